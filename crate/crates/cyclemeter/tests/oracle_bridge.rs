//! Cross-module oracle tests: every quantity the series engine extracts
//! from coefficients is rechecked against brute-force enumeration of cycle
//! types, and the sampler is checked against both.

use std::collections::BTreeMap;

use num_complex::Complex64;

use cyclemeter::numtheory::MangoldtTable;
use cyclemeter::permstat::{
    distribution_mean, enumerate_cycle_types, exact_distribution, truncation_cutoff, Functional,
};
use cyclemeter::sampler::sample_cycle_type;
use cyclemeter::series::{
    dnk_pgf, expect_dnk, expect_log_o, expect_log_y, mgf_log_y, p_dnk_zero, LogWeightTable,
    Truncation,
};
use cyclemeter::stats::chi_square_statistic;
use cyclemeter::weights::WeightModel;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn models3() -> [WeightModel; 3] {
    [
        WeightModel::Uniform,
        WeightModel::ewens(2.0),
        WeightModel::polynomial(0.5),
    ]
}

#[test]
fn truncated_means_match_enumeration() {
    let mang = MangoldtTable::build(20).unwrap();
    for model in models3() {
        let h = LogWeightTable::build(&model, 20).unwrap();
        for n in [6usize, 13, 20] {
            let y = distribution_mean(
                &exact_distribution(Functional::LogYTrunc, n, &h, Some(&mang)).unwrap(),
            );
            let series_y = expect_log_y(&h, n, Truncation::Bn).unwrap();
            assert!((y - series_y).abs() <= 1e-10 * series_y.abs().max(1.0));

            let o = distribution_mean(
                &exact_distribution(Functional::LogOTrunc, n, &h, Some(&mang)).unwrap(),
            );
            let series_o = expect_log_o(&h, &mang, n, Truncation::Bn).unwrap();
            assert!((o - series_o).abs() <= 1e-10 * series_o.abs().max(1.0));
        }
    }
}

#[test]
fn complex_mgf_matches_characteristic_function() {
    // E[e^{i t log Y_n}] from the enumerated distribution vs the rescaled
    // complex convolution
    for model in models3() {
        let h = LogWeightTable::build(&model, 14).unwrap();
        let dist = exact_distribution(Functional::LogY, 14, &h, None).unwrap();
        for t in [0.3f64, 1.0, 2.0] {
            let direct: Complex64 = dist
                .iter()
                .map(|(v, p)| Complex64::new(0.0, t * v).exp() * *p)
                .sum();
            let via_series = mgf_log_y(&h, 14, Complex64::new(0.0, t), Truncation::Full).unwrap();
            assert!(
                (direct - via_series).norm() <= 1e-11,
                "{model:?} t={t}: {direct} vs {via_series}"
            );
        }
    }
}

#[test]
fn complex_mgf_with_real_part_matches_enumeration() {
    let h = LogWeightTable::build(&WeightModel::ewens(2.0), 12).unwrap();
    let dist = exact_distribution(Functional::LogY, 12, &h, None).unwrap();
    let s = Complex64::new(0.6, -1.3);
    let direct: Complex64 = dist.iter().map(|(v, p)| (s * *v).exp() * *p).sum();
    let via_series = mgf_log_y(&h, 12, s, Truncation::Full).unwrap();
    assert!((direct - via_series).norm() <= 1e-11 * direct.norm().max(1.0));
}

#[test]
fn truncated_mgf_matches_enumeration() {
    let h = LogWeightTable::build(&WeightModel::polynomial(0.5), 16).unwrap();
    let b = truncation_cutoff(16);
    let types: Vec<_> = enumerate_cycle_types(16, &h).unwrap().collect();
    for s in [-0.8f64, 0.5] {
        let direct: f64 = types
            .iter()
            .map(|(ct, p)| (s * ct.log_y_truncated(b)).exp() * p)
            .sum();
        let via_series = cyclemeter::series::mgf_log_y_real(&h, 16, s, Truncation::Bn).unwrap();
        assert!(
            (direct - via_series).abs() <= 1e-11 * direct,
            "s={s}: {direct} vs {via_series}"
        );
    }
}

#[test]
fn dnk_probabilities_match_enumeration() {
    for model in models3() {
        let h = LogWeightTable::build(&model, 18).unwrap();
        let types: Vec<_> = enumerate_cycle_types(18, &h).unwrap().collect();
        let b = truncation_cutoff(18);
        for k in [1usize, 2, 3, 7, 18] {
            // untruncated
            let p0: f64 = types
                .iter()
                .filter(|(ct, _)| ct.d_nk(k).0 == 0)
                .map(|(_, p)| p)
                .sum();
            let via = p_dnk_zero(&h, 18, k, Truncation::Full).unwrap();
            assert!((p0 - via).abs() <= 1e-11, "{model:?} k={k}: {p0} vs {via}");

            // truncated
            let p0t: f64 = types
                .iter()
                .filter(|(ct, _)| ct.d_nk_truncated(k, b).0 == 0)
                .map(|(_, p)| p)
                .sum();
            let via_t = p_dnk_zero(&h, 18, k, Truncation::Bn).unwrap();
            assert!((p0t - via_t).abs() <= 1e-11);

            // probability generating function at a complex point
            let u = Complex64::new(0.4, 0.7);
            let pgf: Complex64 = types
                .iter()
                .map(|(ct, p)| u.powu(ct.d_nk(k).0 as u32) * *p)
                .sum();
            let via_pgf = dnk_pgf(&h, 18, k, u, Truncation::Full).unwrap();
            assert!((pgf - via_pgf).norm() <= 1e-11);
        }
    }
}

#[test]
fn mgf_trunc_asym_tracks_exact_relatively() {
    // the reference form exp(theta log(b_n) ((e^s-1)/s - 1)) and the exact
    // truncated mgf at exponent s/log n agree only in the log n -> infinity
    // limit (log b_n / log n approaches 1 at a loglog rate); what must hold
    // at desk scale is that the relative log-gap shrinks with n
    let model = WeightModel::ewens(1.0);
    let s = 0.3f64;
    let mut rel_gaps = Vec::new();
    for n in [1000usize, 10_000] {
        let table = LogWeightTable::build(&model, n).unwrap();
        let ln_n = (n as f64).ln();
        let exact = cyclemeter::series::mgf_log_y_real(&table, n, s / ln_n, Truncation::Bn)
            .unwrap()
            .ln();
        let asym = cyclemeter::asymptotics::mgf_trunc_asym(
            Complex64::new(s, 0.0),
            n,
            1.0,
            cyclemeter::asymptotics::ThetaScaling::Scaled,
        )
        .unwrap()
        .re
        .ln();
        rel_gaps.push((exact - asym).abs() / asym.abs());
    }
    assert!(
        rel_gaps[1] < rel_gaps[0],
        "relative log-gap did not shrink: {rel_gaps:?}"
    );
    assert!(rel_gaps[0] < 0.7, "calibrated band exceeded: {rel_gaps:?}");
}

#[test]
fn markov_direction_bound() {
    // E[D_nk] >= 1 - P(D_nk = 0)
    for model in models3() {
        let h = LogWeightTable::build(&model, 60).unwrap();
        for n in [10usize, 35, 60] {
            for k in [1usize, 2, 3, 5, 11] {
                let e = expect_dnk(&h, n, k, Truncation::Full).unwrap();
                let p0 = p_dnk_zero(&h, n, k, Truncation::Full).unwrap();
                assert!(e >= 1.0 - p0 - 1e-12, "{model:?} n={n} k={k}");
            }
        }
    }
}

#[test]
fn sampler_chi_square_battery() {
    // 0.999 quantiles of chi-square at p(n)-1 degrees of freedom
    let crit: BTreeMap<usize, f64> = [(5usize, 22.458), (6, 29.588), (8, 46.797)]
        .into_iter()
        .collect();
    for (mi, model) in models3().into_iter().enumerate() {
        for (ni, &n) in [5usize, 6, 8].iter().enumerate() {
            let h = LogWeightTable::build(&model, n).unwrap();
            let types: Vec<(Vec<(usize, usize)>, f64)> = enumerate_cycle_types(n, &h)
                .unwrap()
                .map(|(ct, p)| (ct.counts().collect(), p))
                .collect();
            let mut index: BTreeMap<Vec<(usize, usize)>, usize> = BTreeMap::new();
            for (i, (key, _)) in types.iter().enumerate() {
                index.insert(key.clone(), i);
            }
            let samples = 1_000_000u64;
            let mut counts = vec![0u64; types.len()];
            for i in 0..samples {
                let mut rng = ChaCha8Rng::seed_from_u64(7000 + (mi * 3 + ni) as u64);
                rng.set_stream(i);
                let ct = sample_cycle_type(&h, n, &mut rng).unwrap();
                counts[index[&ct.counts().collect::<Vec<_>>()]] += 1;
            }
            let probs: Vec<f64> = types.iter().map(|(_, p)| *p).collect();
            let stat = chi_square_statistic(&counts, &probs, samples);
            assert!(
                stat < crit[&n],
                "{model:?} n={n}: chi2 {stat} vs {}",
                crit[&n]
            );
        }
    }
}

#[test]
fn ewens_total_cycle_count_matches_harmonic_form() {
    // D_{n,1} counts all cycles; for Ewens(theta) the classical value is
    // sum_{j=0}^{n-1} theta/(theta+j)
    for theta in [0.5f64, 2.0, 3.7] {
        let h = LogWeightTable::build(&WeightModel::ewens(theta), 100).unwrap();
        for n in [1usize, 10, 100] {
            let via_series = expect_dnk(&h, n, 1, Truncation::Full).unwrap();
            let classical: f64 = (0..n).map(|j| theta / (theta + j as f64)).sum();
            assert!(
                (via_series - classical).abs() <= 1e-11 * classical,
                "theta={theta} n={n}: {via_series} vs {classical}"
            );
        }
    }
}

#[test]
fn poly_one_normalization_matches_binomial_sum() {
    // for theta_m = m the generating function is exp(t/(1-t)) and
    // h_n = sum_k binom(n-1, k-1) / k!
    let h = LogWeightTable::build(&WeightModel::polynomial(1.0), 60).unwrap();
    for n in 1..=60usize {
        let mut direct = 0.0f64;
        let mut binom = 1.0f64; // binom(n-1, 0)
        let mut fact = 1.0f64;
        for k in 1..=n {
            fact *= k as f64;
            direct += binom / fact;
            binom = binom * (n - k) as f64 / k as f64;
        }
        let via_table = h.log_h(n).exp();
        assert!(
            (via_table - direct).abs() <= 1e-10 * direct,
            "n={n}: {via_table} vs {direct}"
        );
    }
}

#[test]
fn uniform_expected_log_product_is_harmonic_log_sum() {
    // h is identically 1 under uniform weights, so the coefficient
    // extraction collapses to sum log(m)/m
    let h = LogWeightTable::build(&WeightModel::Uniform, 1000).unwrap();
    let via_series = expect_log_y(&h, 1000, Truncation::Full).unwrap();
    let direct: f64 = (2..=1000).map(|m| (m as f64).ln() / m as f64).sum();
    assert!((via_series - direct).abs() <= 1e-12 * direct);
}

#[test]
fn generalized_ewens_tracks_singularity_main_term() {
    // exercises the r != 1 path end to end: direct log weights, estimated
    // K by partial summation, log-domain tables, and the asymptotic form;
    // the gap must fall like 1/n (a wrong K would leave a constant offset)
    let model =
        cyclemeter::weights::parse_weight_spec("genewens:r=0.9,theta=1.5,eps=power:0.25,-1.5")
            .unwrap();
    let (r, theta, k) = model.singularity_params().unwrap();
    let mut gaps = Vec::new();
    for n in [250usize, 500, 1000] {
        let h = LogWeightTable::build(&model, n).unwrap();
        assert!(h.recursion_residual(n).unwrap() <= 1e-12);
        let asym = cyclemeter::asymptotics::h_asym_ge(r, theta, k, n).unwrap();
        gaps.push((h.log_h(n) - asym).abs());
    }
    assert!(gaps[0] < 3e-4, "{gaps:?}");
    assert!(gaps[0] > gaps[1] && gaps[1] > gaps[2], "{gaps:?}");
    // halving n halves the gap: O(1/n), not a constant offset
    assert!((gaps[0] / gaps[1] - 2.0).abs() < 0.2, "{gaps:?}");
}

#[test]
fn poly_mgf_main_term_gap_shrinks_on_saddle_scale() {
    // |log exact mgf - log main term| relative to the driving scale
    // n^{1 - 1/(1+gamma+s)} must fall with n (the absolute gap plateaus at
    // a constant the displayed main term omits)
    let model = WeightModel::polynomial(0.5);
    let (gamma, s) = (0.5f64, 0.2f64);
    let scale_exp = 1.0 - 1.0 / (1.0 + gamma + s);
    let mut rel = Vec::new();
    for n in [1000usize, 10_000] {
        let h = LogWeightTable::build(&model, n).unwrap();
        let exact = cyclemeter::series::mgf_log_y_real(&h, n, s, Truncation::Full)
            .unwrap()
            .ln();
        let main = cyclemeter::asymptotics::mgf_asym_poly(s, n, gamma).unwrap();
        rel.push((exact - main).abs() / (n as f64).powf(scale_exp));
    }
    assert!(rel[1] < rel[0], "relative gap did not shrink: {rel:?}");
    assert!(rel[0] < 0.1, "{rel:?}");
}

#[test]
fn ewens2_expansions_cross_evaluate() {
    // the finite-sum expansion tracks the exact truncated expected order
    // closely for Ewens(2); the zero-sum expansion reproduces the same
    // leading behavior within its (loglog n)^3 envelope
    let model = WeightModel::ewens(2.0);
    let mang = MangoldtTable::build(2000).unwrap();
    let zeros = cyclemeter::asymptotics::ZetaZeros::bundled();
    for n in [500usize, 1000, 2000] {
        let h = LogWeightTable::build(&model, n).unwrap();
        let exact = expect_log_o(&h, &mang, n, Truncation::Bn).unwrap();
        let expansion =
            cyclemeter::asymptotics::expect_logo_trunc_expansion(&model, n, &mang).unwrap();
        assert!(
            (exact - expansion).abs() < 0.1,
            "n={n}: exact {exact} vs expansion {expansion}"
        );
        let zx = cyclemeter::asymptotics::expect_logo_zeros(
            cyclemeter::asymptotics::ZeroExpansionKind::Truncated,
            n,
            2.0,
            &zeros,
            None,
        )
        .unwrap();
        let envelope = (n as f64).ln().ln().powi(3);
        assert!(
            (exact - zx.value).abs() < envelope,
            "n={n}: exact {exact} vs zeros form {} (envelope {envelope})",
            zx.value
        );
    }
}

#[test]
fn local_limit_bin_discrepancy_does_not_increase() {
    // sigma_n P((log O_n - centering)/scale in [0,1]) against 1/sqrt(2 pi):
    // the gap closes at a log rate, so only the trend is checkable here
    let mang = MangoldtTable::build(10_000).unwrap();
    let mut gaps = Vec::new();
    for n in [1000usize, 10_000] {
        let h = LogWeightTable::build(&WeightModel::Uniform, n).unwrap();
        let consts = cyclemeter::asymptotics::llt_constants(n, 1.0).unwrap();
        let samples = 50_000u64;
        let stats = cyclemeter::sampler::monte_carlo(
            Functional::LogO,
            &h,
            Some(&mang),
            n,
            samples,
            &cyclemeter::sampler::MonteCarloOptions {
                seed: 3,
                keep_raw: true,
                ..Default::default()
            },
        )
        .unwrap();
        let hits = stats
            .raw
            .unwrap()
            .into_iter()
            .map(|v| (v - consts.centering) / consts.scale)
            .filter(|o| (0.0..1.0).contains(o))
            .count();
        let estimate = consts.sigma_n * hits as f64 / samples as f64;
        let prediction = 1.0 / (2.0 * std::f64::consts::PI).sqrt();
        gaps.push((estimate - prediction).abs());
    }
    assert!(
        gaps[1] <= gaps[0],
        "local-limit discrepancy increased: {gaps:?}"
    );
}

#[test]
fn order_stats_consistency_under_sampling() {
    // sampled cycle types satisfy the same pointwise invariants the
    // enumerated ones do
    let mang = MangoldtTable::build(120).unwrap();
    let h = LogWeightTable::build(&WeightModel::ewens(0.7), 120).unwrap();
    let b = truncation_cutoff(120);
    for i in 0..200u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        rng.set_stream(i);
        let ct = sample_cycle_type(&h, 120, &mut rng).unwrap();
        let s = ct.order_stats(&mang, b).unwrap();
        assert!(s.delta >= -1e-12);
        assert!(s.log_o <= mang.psi(120).unwrap() + 1e-12);
        assert!(s.log_y_trunc <= s.log_y + 1e-12);
        assert!(s.log_o_trunc <= s.log_o + 1e-12);
        if let Ok(order) = ct.exact_order() {
            assert!(((order as f64).ln() - s.log_o).abs() <= 1e-9);
        }
    }
}
