//! Property tests for the structural invariants.

use proptest::prelude::*;

use cyclemeter::numtheory::{exact_lcm, MangoldtTable};
use cyclemeter::sampler::sample_cycle_type;
use cyclemeter::series::{series_exp, LogWeightTable, TruncatedSeries};
use cyclemeter::weights::WeightModel;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

proptest! {
    #[test]
    fn series_exp_log_domain_agrees_with_plain(
        coeffs in prop::collection::vec(0.0f64..1.5, 1..24)
    ) {
        let mut g = coeffs;
        g[0] = 0.0;
        let plain = series_exp(&TruncatedSeries::Real(g.clone()))
            .unwrap()
            .to_real()
            .unwrap();
        let logd = series_exp(&TruncatedSeries::log_from_nonnegative(&g).unwrap())
            .unwrap()
            .to_real()
            .unwrap();
        for (a, b) in plain.iter().zip(logd.iter()) {
            prop_assert!((a - b).abs() <= 1e-10 * a.abs().max(1.0), "{a} vs {b}");
        }
    }

    #[test]
    fn tilt_round_trip_preserves_theta(
        s in -2.0f64..2.0,
        gamma in 0.1f64..3.0,
        m in 1usize..200
    ) {
        let base = WeightModel::polynomial(gamma);
        let round = base.clone().tilt_real(s).tilt_real(-s);
        let orig = base.theta(m).unwrap();
        let back = round.theta(m).unwrap();
        prop_assert!((orig - back).abs() <= 1e-12 * orig.max(1.0));
    }

    #[test]
    fn lcm_divides_and_dominates(xs in prop::collection::vec(1u64..500, 1..12)) {
        let l = exact_lcm(&xs).unwrap();
        for &x in &xs {
            prop_assert_eq!(l % x as u128, 0);
            prop_assert!(l >= x as u128);
        }
    }

    #[test]
    fn sampled_types_satisfy_order_inequalities(seed in 0u64..500, n in 1usize..40) {
        let table = MangoldtTable::build(40).unwrap();
        let h = LogWeightTable::build(&WeightModel::Uniform, 40).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ct = sample_cycle_type(&h, n, &mut rng).unwrap();
        let log_y = ct.log_y();
        let log_o = ct.log_o(&table).unwrap();
        prop_assert!(log_o <= log_y + 1e-12);
        prop_assert!(log_o <= table.psi(n).unwrap() + 1e-12);
        let order = ct.exact_order().unwrap();
        prop_assert!(((order as f64).ln() - log_o).abs() <= 1e-9);
    }

    #[test]
    fn h_recursion_holds_for_random_ewens(theta in 0.05f64..5.0, n in 1usize..64) {
        let t = LogWeightTable::build(&WeightModel::ewens(theta), 64).unwrap();
        prop_assert!(t.recursion_residual(n).unwrap() <= 1e-12);
    }
}
