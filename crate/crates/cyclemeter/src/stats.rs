//! Small statistics helpers for the experiment drivers and tests:
//! standard normal CDF, Kolmogorov-Smirnov distance, chi-square.

/// Abramowitz & Stegun 7.1.26 rational approximation of erf,
/// absolute error below 1.5e-7 (ample for goodness-of-fit use).
pub fn erf(x: f64) -> f64 {
    let sign = if x < 0.0 { -1.0 } else { 1.0 };
    let x = x.abs();
    let t = 1.0 / (1.0 + 0.3275911 * x);
    let y = 1.0
        - (((((1.061405429 * t - 1.453152027) * t) + 1.421413741) * t - 0.284496736) * t
            + 0.254829592)
            * t
            * (-x * x).exp();
    sign * y
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * (1.0 + erf(x / std::f64::consts::SQRT_2))
}

/// Kolmogorov-Smirnov distance between a sample and a CDF.
/// Sorts a copy of the sample.
pub fn ks_distance<F: Fn(f64) -> f64>(sample: &[f64], cdf: F) -> f64 {
    let mut xs = sample.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        let c = cdf(x);
        d = d.max((c - i as f64 / n).abs());
        d = d.max(((i + 1) as f64 / n - c).abs());
    }
    d
}

/// Pearson chi-square statistic of observed counts against expected
/// probabilities (cells with zero expectation are rejected by debug assert).
pub fn chi_square_statistic(observed: &[u64], expected_probs: &[f64], total: u64) -> f64 {
    debug_assert_eq!(observed.len(), expected_probs.len());
    let mut stat = 0.0;
    for (&o, &p) in observed.iter().zip(expected_probs) {
        let e = p * total as f64;
        debug_assert!(e > 0.0);
        let d = o as f64 - e;
        stat += d * d / e;
    }
    stat
}

/// Total variation distance between empirical counts and exact
/// probabilities.
pub fn tv_distance(observed: &[u64], expected_probs: &[f64], total: u64) -> f64 {
    observed
        .iter()
        .zip(expected_probs)
        .map(|(&o, &p)| (o as f64 / total as f64 - p).abs())
        .sum::<f64>()
        / 2.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normal_cdf_anchor_points() {
        assert!((normal_cdf(0.0) - 0.5).abs() < 1e-9);
        assert!((normal_cdf(1.0) - 0.8413447460685429).abs() < 2e-7);
        assert!((normal_cdf(-1.96) - 0.024997895148220435).abs() < 2e-7);
        assert!(normal_cdf(8.0) > 0.999999);
    }

    #[test]
    fn ks_of_exact_uniform_grid() {
        // sample = exact quantiles of N(0,1) has tiny KS distance
        let n = 1000;
        let xs: Vec<f64> = (0..n)
            .map(|i| {
                let p = (i as f64 + 0.5) / n as f64;
                // crude quantile by bisection
                let (mut lo, mut hi) = (-10.0, 10.0);
                for _ in 0..80 {
                    let mid = 0.5 * (lo + hi);
                    if normal_cdf(mid) < p {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                lo
            })
            .collect();
        assert!(ks_distance(&xs, normal_cdf) < 2.0 / n as f64);
    }

    #[test]
    fn chi_square_of_perfect_fit_is_zero() {
        let obs = [250u64, 250, 250, 250];
        let probs = [0.25; 4];
        assert_eq!(chi_square_statistic(&obs, &probs, 1000), 0.0);
        assert_eq!(tv_distance(&obs, &probs, 1000), 0.0);
    }
}
