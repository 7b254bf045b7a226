//! Exact generating-function engine.
//!
//! Everything the measure defines through the identity
//! `sum_n h_n t^n = exp(sum_m (theta_m/m) t^m)` is computed here by
//! truncated power-series exponentials. The workhorse is the convolution
//! recursion `n F_n = sum_k k G_k F_{n-k}`, run in one of three coefficient
//! representations:
//!
//! * log-domain (nonnegative series only) — used for every probability and
//!   expectation, because the normalization h_n of polynomial weights grows
//!   like exp(c n^{gamma/(1+gamma)}) and overflows plain doubles;
//! * plain real / complex — the generic `TruncatedSeries` surface;
//! * complex ratios rescaled by the untilted log-magnitudes — used for
//!   moment generating functions at complex exponents.
//!
//! The inner convolution sums are chunked with fixed boundaries and merged
//! in chunk order, so results do not depend on the number of worker threads.
//!
//! Untruncated quantities are the b = n case of their truncated forms:
//! everything is a finite sum over cycle lengths up to n, so no analytic
//! extension of the generating data is ever needed.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::numtheory::MangoldtTable;
use crate::weights::WeightModel;

/// Default ceiling for h-table sizes; the series exponential is O(N^2).
pub const DEFAULT_TABLE_CEILING: usize = 50_000;

/// Default ceiling on the estimated work of `expect_log_o` (inner-loop terms).
pub const DEFAULT_LOG_O_COST_GATE: u64 = 4_000_000_000;

/// Truncation threshold b_n = clamp(floor(n / ln^2 n), 1, n).
///
/// The clamp matters for n <= 8 where n / ln^2 n leaves [1, n].
pub fn truncation_cutoff(n: usize) -> usize {
    if n <= 1 {
        return n;
    }
    let raw = n as f64 / (n as f64).ln().powi(2);
    (raw.floor() as usize).clamp(1, n)
}

/// Which cycle lengths enter a truncated statistic.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Truncation {
    /// No truncation (b = n).
    Full,
    /// The canonical threshold b_n = n / ln^2 n.
    Bn,
    /// An explicit threshold (clamped to n).
    At(usize),
}

impl Truncation {
    pub fn cutoff(self, n: usize) -> usize {
        match self {
            Truncation::Full => n,
            Truncation::Bn => truncation_cutoff(n),
            Truncation::At(b) => b.min(n),
        }
    }
}

const PAR_MIN_TERMS: usize = 16_384;
const PAR_CHUNK: usize = 8_192;

/// Log-sum-exp of the convolution terms w[k] + f[n-k], k = 1..=n.
///
/// Deterministic under parallelism: fixed chunk boundaries, in-order merge.
fn lse_conv(w: &[f64], f: &[f64], n: usize) -> f64 {
    debug_assert!(w.len() > n && f.len() >= n);
    if n < PAR_MIN_TERMS {
        let mut mx = f64::NEG_INFINITY;
        for k in 1..=n {
            let t = w[k] + f[n - k];
            if t > mx {
                mx = t;
            }
        }
        if mx == f64::NEG_INFINITY {
            return mx;
        }
        let mut s = 0.0;
        for k in 1..=n {
            let t = w[k] + f[n - k];
            s += (t - mx).exp();
        }
        return mx + s.ln();
    }

    let chunks: Vec<(f64, f64)> = (1..n + 1)
        .into_par_iter()
        .chunks(PAR_CHUNK)
        .map(|ks| {
            let mut mx = f64::NEG_INFINITY;
            for &k in &ks {
                let t = w[k] + f[n - k];
                if t > mx {
                    mx = t;
                }
            }
            if mx == f64::NEG_INFINITY {
                return (mx, 0.0);
            }
            let mut s = 0.0;
            for &k in &ks {
                let t = w[k] + f[n - k];
                s += (t - mx).exp();
            }
            (mx, s)
        })
        .collect();

    let mx = chunks.iter().fold(f64::NEG_INFINITY, |a, c| a.max(c.0));
    if mx == f64::NEG_INFINITY {
        return mx;
    }
    let mut total: f64 = 0.0;
    for (cm, cs) in chunks {
        if cm > f64::NEG_INFINITY {
            total += cs * (cm - mx).exp();
        }
    }
    mx + total.ln()
}

/// Exponential of a log-domain series: log_g[m] = log of the m-th
/// coefficient of g (g_0 = 0 required, encoded as -inf). Returns the
/// log-domain coefficients of exp(g) to the same order.
pub(crate) fn exp_log_coeffs(log_g: &[f64]) -> Vec<f64> {
    let n_max = log_g.len().saturating_sub(1);
    // w[k] = log(k * g_k)
    let mut w = vec![f64::NEG_INFINITY; n_max + 1];
    for k in 1..=n_max {
        w[k] = (k as f64).ln() + log_g[k];
    }
    let mut f = vec![f64::NEG_INFINITY; n_max + 1];
    f[0] = 0.0;
    for n in 1..=n_max {
        let (head, tail) = f.split_at_mut(n);
        let lse = lse_conv(&w, head, n);
        tail[0] = if lse == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else {
            lse - (n as f64).ln()
        };
    }
    f
}

/// Truncated power series in one of three coefficient representations.
#[derive(Debug, Clone, PartialEq)]
pub enum TruncatedSeries {
    Real(Vec<f64>),
    Complex(Vec<Complex64>),
    /// Log-magnitudes of a series with all coefficients >= 0; a zero
    /// coefficient is encoded as -inf.
    Log(Vec<f64>),
}

impl TruncatedSeries {
    pub fn order(&self) -> usize {
        let len = match self {
            TruncatedSeries::Real(c) => c.len(),
            TruncatedSeries::Complex(c) => c.len(),
            TruncatedSeries::Log(c) => c.len(),
        };
        len.saturating_sub(1)
    }

    /// Build the log-domain representation from plain nonnegative values.
    pub fn log_from_nonnegative(coeffs: &[f64]) -> Result<Self> {
        if let Some(bad) = coeffs.iter().find(|v| **v < 0.0 || v.is_nan()) {
            return Err(Error::Representation(format!(
                "log-domain series requires nonnegative coefficients, got {bad}"
            )));
        }
        Ok(TruncatedSeries::Log(
            coeffs.iter().map(|v| v.ln()).collect(),
        ))
    }

    /// Plain coefficients (exponentiating a log-domain series).
    pub fn to_real(&self) -> Result<Vec<f64>> {
        match self {
            TruncatedSeries::Real(c) => Ok(c.clone()),
            TruncatedSeries::Log(c) => Ok(c.iter().map(|v| v.exp()).collect()),
            TruncatedSeries::Complex(_) => Err(Error::Representation(
                "complex series has no real coefficient view".into(),
            )),
        }
    }
}

/// Series exponential F = exp(g) with F_0 = 1, truncated at the input order.
/// Coefficient k of the output depends only on coefficients 0..=k of g.
pub fn series_exp(g: &TruncatedSeries) -> Result<TruncatedSeries> {
    match g {
        TruncatedSeries::Real(c) => {
            if c.is_empty() || c[0] != 0.0 {
                return Err(Error::Domain("series_exp requires g_0 = 0".into()));
            }
            let n_max = c.len() - 1;
            let mut f = vec![0.0; n_max + 1];
            f[0] = 1.0;
            for n in 1..=n_max {
                let mut s = 0.0;
                for k in 1..=n {
                    s += k as f64 * c[k] * f[n - k];
                }
                f[n] = s / n as f64;
            }
            Ok(TruncatedSeries::Real(f))
        }
        TruncatedSeries::Complex(c) => {
            if c.is_empty() || c[0] != Complex64::ZERO {
                return Err(Error::Domain("series_exp requires g_0 = 0".into()));
            }
            let n_max = c.len() - 1;
            let mut f = vec![Complex64::ZERO; n_max + 1];
            f[0] = Complex64::new(1.0, 0.0);
            for n in 1..=n_max {
                let mut s = Complex64::ZERO;
                for k in 1..=n {
                    s += k as f64 * c[k] * f[n - k];
                }
                f[n] = s / n as f64;
            }
            Ok(TruncatedSeries::Complex(f))
        }
        TruncatedSeries::Log(c) => {
            if c.is_empty() || c[0] != f64::NEG_INFINITY {
                return Err(Error::Domain(
                    "series_exp requires g_0 = 0 (-inf in log domain)".into(),
                ));
            }
            Ok(TruncatedSeries::Log(exp_log_coeffs(c)))
        }
    }
}

/// The normalization sequence h_0..h_N in log domain, with the model that
/// produced it. Immutable after construction.
#[derive(Debug, Clone)]
pub struct LogWeightTable {
    model: WeightModel,
    log_h: Vec<f64>,
}

impl LogWeightTable {
    pub fn build(model: &WeightModel, limit: usize) -> Result<Self> {
        Self::build_with_ceiling(model, limit, DEFAULT_TABLE_CEILING)
    }

    pub fn build_with_ceiling(model: &WeightModel, limit: usize, ceiling: usize) -> Result<Self> {
        if limit > ceiling {
            return Err(Error::Capacity(format!(
                "h-table limit {limit} exceeds ceiling {ceiling} (the build is O(N^2); \
                 for Ewens weights the closed form h_n = Gamma(n+theta)/(Gamma(theta) n!) \
                 avoids the table entirely)"
            )));
        }
        model.validate()?;
        if !model.is_real() {
            return Err(Error::Representation(
                "h-tables are built for real weight models".into(),
            ));
        }
        let log_g = log_g_coeffs(model, limit)?;
        let log_h = exp_log_coeffs(&log_g);
        Ok(Self {
            model: model.clone(),
            log_h,
        })
    }

    pub fn model(&self) -> &WeightModel {
        &self.model
    }

    pub fn limit(&self) -> usize {
        self.log_h.len() - 1
    }

    pub fn log_h(&self, n: usize) -> f64 {
        self.log_h[n]
    }

    pub fn log_h_slice(&self) -> &[f64] {
        &self.log_h
    }

    fn check_index(&self, n: usize) -> Result<()> {
        if n > self.limit() {
            return Err(Error::Range(format!(
                "index {n} exceeds h-table limit {}",
                self.limit()
            )));
        }
        Ok(())
    }

    fn require_positive_through(&self, n: usize) -> Result<()> {
        self.check_index(n)?;
        if self.log_h[n] == f64::NEG_INFINITY {
            return Err(Error::Domain(format!(
                "h_{n} = 0: the measure is undefined at size {n}"
            )));
        }
        Ok(())
    }

    /// Residual of the defining recursion n h_n = sum theta_m h_{n-m},
    /// measured in log-sum-exp arithmetic (absolute difference of logs).
    pub fn recursion_residual(&self, n: usize) -> Result<f64> {
        self.check_index(n)?;
        if n == 0 {
            return Ok(0.0);
        }
        let mut w = vec![f64::NEG_INFINITY; n + 1];
        for (m, slot) in w.iter_mut().enumerate().skip(1) {
            *slot = self.model.log_theta(m)?;
        }
        let lhs = (n as f64).ln() + self.log_h[n];
        let rhs = lse_conv(&w, &self.log_h[..n], n);
        if lhs == f64::NEG_INFINITY && rhs == f64::NEG_INFINITY {
            return Ok(0.0);
        }
        Ok((lhs - rhs).abs() / lhs.abs().max(1.0))
    }
}

/// log(theta_m / m) for m = 0..=limit (index 0 is -inf).
fn log_g_coeffs(model: &WeightModel, limit: usize) -> Result<Vec<f64>> {
    let mut lg = vec![f64::NEG_INFINITY; limit + 1];
    for (m, slot) in lg.iter_mut().enumerate().skip(1) {
        *slot = model.log_theta(m)? - (m as f64).ln();
    }
    Ok(lg)
}

/// E[e^{s log Y_n}] (or its truncated variant) for real s, in log domain.
pub fn mgf_log_y_real(table: &LogWeightTable, n: usize, s: f64, trunc: Truncation) -> Result<f64> {
    table.require_positive_through(n)?;
    if n == 0 {
        return Ok(1.0);
    }
    let b = trunc.cutoff(n);
    let model = table.model();
    let mut lg = log_g_coeffs(model, n)?;
    for (m, c) in lg.iter_mut().enumerate().take(b + 1).skip(1) {
        *c += s * (m as f64).ln();
    }
    let f = exp_log_coeffs(&lg);
    let value = (f[n] - table.log_h(n)).exp();
    if !value.is_finite() {
        return Err(Error::NumericRange(format!(
            "mgf at s={s} exceeds f64 range for n={n}"
        )));
    }
    Ok(value)
}

/// E[e^{s log Y_n}] for complex s.
///
/// Runs the convolution on ratios z_j = F_j / h_j, rescaling every term by
/// exp(log h_{j-k} - log h_j) so that moderate |s| stays inside f64 range.
pub fn mgf_log_y(
    table: &LogWeightTable,
    n: usize,
    s: Complex64,
    trunc: Truncation,
) -> Result<Complex64> {
    if s.im == 0.0 {
        return mgf_log_y_real(table, n, s.re, trunc).map(|v| Complex64::new(v, 0.0));
    }
    table.require_positive_through(n)?;
    if n == 0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let b = trunc.cutoff(n);
    let model = table.model();
    let mut log_mag = vec![f64::NEG_INFINITY; n + 1];
    let mut phase = vec![Complex64::new(1.0, 0.0); n + 1];
    for m in 1..=n {
        let lm = (m as f64).ln();
        let mut mag = model.log_theta(m)?;
        if m <= b {
            mag += s.re * lm;
            phase[m] = Complex64::new(0.0, s.im * lm).exp();
        }
        log_mag[m] = mag;
    }
    coeff_ratio_complex(table, n, &log_mag, &phase)
}

/// z_n for F = exp(G) where the m-th coefficient of G is
/// exp(log_mag[m]) * phase[m] / m, and z_j = F_j / h_j.
fn coeff_ratio_complex(
    table: &LogWeightTable,
    n: usize,
    log_mag: &[f64],
    phase: &[Complex64],
) -> Result<Complex64> {
    let lh = table.log_h_slice();
    for (j, v) in lh.iter().enumerate().take(n + 1) {
        if *v == f64::NEG_INFINITY {
            return Err(Error::Domain(format!(
                "h_{j} = 0: complex tilts need a positive normalization"
            )));
        }
    }
    let mut z = vec![Complex64::ZERO; n + 1];
    z[0] = Complex64::new(1.0, 0.0);
    for j in 1..=n {
        let lhj = lh[j];
        let sum = if j < PAR_MIN_TERMS {
            let mut s = Complex64::ZERO;
            for k in 1..=j {
                let scale = (log_mag[k] + lh[j - k] - lhj).exp();
                if scale > 0.0 {
                    s += phase[k] * z[j - k] * scale;
                }
            }
            s
        } else {
            let zs = &z;
            let partials: Vec<Complex64> = (1..j + 1)
                .into_par_iter()
                .chunks(PAR_CHUNK)
                .map(|ks| {
                    let mut s = Complex64::ZERO;
                    for &k in &ks {
                        let scale = (log_mag[k] + lh[j - k] - lhj).exp();
                        if scale > 0.0 {
                            s += phase[k] * zs[j - k] * scale;
                        }
                    }
                    s
                })
                .collect();
            partials.into_iter().sum()
        };
        let val = sum / j as f64;
        if !val.re.is_finite() || !val.im.is_finite() {
            return Err(Error::NumericRange(format!(
                "complex coefficient overflow at index {j} (|s| too large for this model)"
            )));
        }
        z[j] = val;
    }
    Ok(z[n])
}

/// E[log Y_n] (or E[log Y-tilde_n]) as the single series multiply
/// sum_{m<=b} log(m) (theta_m/m) h_{n-m} / h_n.
pub fn expect_log_y(table: &LogWeightTable, n: usize, trunc: Truncation) -> Result<f64> {
    table.require_positive_through(n)?;
    if n <= 1 {
        return Ok(0.0);
    }
    let b = trunc.cutoff(n);
    let model = table.model();
    let lhn = table.log_h(n);
    let mut acc = 0.0;
    for m in 2..=b {
        let lm = (m as f64).ln();
        let expo = model.log_theta(m)? - lm + table.log_h(n - m) - lhn;
        acc += lm * expo.exp();
    }
    Ok(acc)
}

/// `E[D_nk]` (or the truncated variant): sum over multiples of k of
/// (theta_m/m) h_{n-m} / h_n.
pub fn expect_dnk(table: &LogWeightTable, n: usize, k: usize, trunc: Truncation) -> Result<f64> {
    if k == 0 {
        return Err(Error::Domain("k must be >= 1".into()));
    }
    table.require_positive_through(n)?;
    if n == 0 {
        return Ok(0.0);
    }
    let b = trunc.cutoff(n);
    let model = table.model();
    let lhn = table.log_h(n);
    let mut acc = 0.0;
    let mut m = k;
    while m <= b {
        let expo = model.log_theta(m)? - (m as f64).ln() + table.log_h(n - m) - lhn;
        acc += expo.exp();
        m += k;
    }
    Ok(acc)
}

/// P(D*_nk = 0) = [t^n] exp(g - g_k) / h_n, run in log domain (the
/// coefficients of g - g_k are a sub-multiset of g's, hence nonnegative).
pub fn p_dnk_zero(table: &LogWeightTable, n: usize, k: usize, trunc: Truncation) -> Result<f64> {
    if k == 0 {
        return Err(Error::Domain("k must be >= 1".into()));
    }
    table.require_positive_through(n)?;
    if n == 0 {
        return Ok(1.0);
    }
    let b = trunc.cutoff(n);
    let model = table.model();
    let mut lg = log_g_coeffs(model, n)?;
    let mut m = k;
    while m <= b {
        lg[m] = f64::NEG_INFINITY;
        m += k;
    }
    let f = exp_log_coeffs(&lg);
    Ok((f[n] - table.log_h(n)).exp())
}

/// E[u^{D_nk}] for complex u (at u = 0 this is P(D*_nk = 0)).
pub fn dnk_pgf(
    table: &LogWeightTable,
    n: usize,
    k: usize,
    u: Complex64,
    trunc: Truncation,
) -> Result<Complex64> {
    if k == 0 {
        return Err(Error::Domain("k must be >= 1".into()));
    }
    if u.im == 0.0 && u.re >= 0.0 {
        // nonnegative real u keeps the series nonnegative: log domain
        table.require_positive_through(n)?;
        if n == 0 {
            return Ok(Complex64::new(1.0, 0.0));
        }
        let b = trunc.cutoff(n);
        let model = table.model();
        let mut lg = log_g_coeffs(model, n)?;
        let lu = u.re.ln();
        let mut m = k;
        while m <= b {
            lg[m] += lu;
            m += k;
        }
        let f = exp_log_coeffs(&lg);
        return Ok(Complex64::new((f[n] - table.log_h(n)).exp(), 0.0));
    }

    table.require_positive_through(n)?;
    if n == 0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let b = trunc.cutoff(n);
    let model = table.model();
    let norm = u.norm();
    let unit = if norm == 0.0 {
        Complex64::new(1.0, 0.0)
    } else {
        u / norm
    };
    let mut log_mag = vec![f64::NEG_INFINITY; n + 1];
    let mut phase = vec![Complex64::new(1.0, 0.0); n + 1];
    for m in 1..=n {
        let mut mag = model.log_theta(m)?;
        if m <= b && m % k == 0 {
            mag += norm.ln();
            phase[m] = unit;
        }
        log_mag[m] = mag;
    }
    coeff_ratio_complex(table, n, &log_mag, &phase)
}

/// E[log O_n] (or the truncated variant) assembled from the von Mangoldt
/// decomposition: sum over prime powers k of Lambda(k) (1 - P(D*_nk = 0)).
///
/// Cost is one O(n^2) series exponential per prime power, O(n^3) overall in
/// the untruncated case; the estimate is gated before any work starts.
pub fn expect_log_o(
    table: &LogWeightTable,
    mangoldt: &MangoldtTable,
    n: usize,
    trunc: Truncation,
) -> Result<f64> {
    expect_log_o_with_gate(table, mangoldt, n, trunc, DEFAULT_LOG_O_COST_GATE)
}

pub fn expect_log_o_with_gate(
    table: &LogWeightTable,
    mangoldt: &MangoldtTable,
    n: usize,
    trunc: Truncation,
    cost_gate: u64,
) -> Result<f64> {
    table.require_positive_through(n)?;
    if n <= 1 {
        return Ok(0.0);
    }
    let k_max = trunc.cutoff(n);
    if mangoldt.limit() < k_max {
        return Err(Error::Range(format!(
            "von Mangoldt table reaches {}, need {k_max}",
            mangoldt.limit()
        )));
    }
    let ks = mangoldt.prime_powers(k_max);
    let est = ks.len() as u64 * (n as u64).pow(2) / 2;
    if est > cost_gate {
        return Err(Error::Capacity(format!(
            "expect_log_o at n={n} with {} prime powers needs ~{est} inner terms \
             (gate {cost_gate}); truncate or raise the gate",
            ks.len()
        )));
    }
    let mut acc = 0.0;
    for k in ks {
        let p0 = p_dnk_zero(table, n, k, trunc)?;
        acc += mangoldt.lambda(k) * (1.0 - p0);
    }
    Ok(acc)
}
