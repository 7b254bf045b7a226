//! Exact sampling of cycle types and deterministic parallel Monte Carlo.
//!
//! A cycle type of size n is grown one cycle at a time: the cycle containing
//! a marked element has length m with probability theta_m h_{n-m} / (n h_n),
//! and the remainder is an independent copy of the measure at size n - m.
//! Sampling is by inverse CDF, walking the lengths in increasing order; the
//! number of terms inspected equals the drawn length, so one sample costs
//! O(n) probability evaluations in the worst case and no per-size tables
//! are materialized.
//!
//! Determinism contract: sample i is a pure function of (seed, i) through a
//! dedicated ChaCha stream, and all reductions run in fixed index order, so
//! results are identical for any worker count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::numtheory::MangoldtTable;
use crate::permstat::{truncation_cutoff, CycleType, Functional};
use crate::series::LogWeightTable;

/// First-cycle length distribution at size n, with the renormalization
/// drift of the raw log-domain probabilities.
#[derive(Debug, Clone)]
pub struct FirstCyclePmf {
    pub probs: Vec<f64>,
    /// |1 - sum of raw probabilities| before renormalization.
    pub drift: f64,
}

/// Raw (unnormalized residual) first-cycle probabilities and the drift.
pub fn first_cycle_length_pmf(h: &LogWeightTable, n: usize) -> Result<FirstCyclePmf> {
    if n == 0 || n > h.limit() {
        return Err(Error::Range(format!(
            "pmf needs 1 <= n <= {}, got {n}",
            h.limit()
        )));
    }
    if h.log_h(n) == f64::NEG_INFINITY {
        return Err(Error::Domain(format!("h_{n} = 0: measure undefined")));
    }
    let model = h.model();
    let ln_n = (n as f64).ln();
    let lhn = h.log_h(n);
    let mut probs = Vec::with_capacity(n);
    let mut total = 0.0;
    for m in 1..=n {
        let p = (model.log_theta(m)? + h.log_h(n - m) - ln_n - lhn).exp();
        probs.push(p);
        total += p;
    }
    let drift = (1.0 - total).abs();
    for p in &mut probs {
        *p /= total;
    }
    Ok(FirstCyclePmf { probs, drift })
}

/// Threshold above which the pmf drift is worth a diagnostic.
pub const PMF_DRIFT_WARN: f64 = 1e-9;

struct SamplerContext<'a> {
    h: &'a LogWeightTable,
    /// log theta_m for m = 0..=n (index 0 unused).
    log_theta: Vec<f64>,
}

impl<'a> SamplerContext<'a> {
    fn new(h: &'a LogWeightTable, n: usize) -> Result<Self> {
        if n > h.limit() {
            return Err(Error::Range(format!(
                "h-table reaches {}, need {n}",
                h.limit()
            )));
        }
        for j in 0..=n {
            if h.log_h(j) == f64::NEG_INFINITY {
                return Err(Error::Domain(format!(
                    "h_{j} = 0: sequential sampling needs positive normalizations"
                )));
            }
        }
        let model = h.model();
        let mut log_theta = vec![f64::NEG_INFINITY; n + 1];
        for (m, slot) in log_theta.iter_mut().enumerate().skip(1) {
            *slot = model.log_theta(m)?;
        }
        Ok(Self { h, log_theta })
    }

    fn draw(&self, n: usize, rng: &mut ChaCha8Rng) -> CycleType {
        let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
        let mut rem = n;
        while rem > 0 {
            let u: f64 = rng.random();
            let ln_r = (rem as f64).ln();
            let lhr = self.h.log_h(rem);
            let mut cum = 0.0;
            let mut chosen = rem;
            let mut last_positive = rem;
            for m in 1..=rem {
                let p = (self.log_theta[m] + self.h.log_h(rem - m) - ln_r - lhr).exp();
                if p > 0.0 {
                    last_positive = m;
                }
                cum += p;
                if u < cum {
                    chosen = m;
                    break;
                }
                if m == rem {
                    // residual rounding mass goes to the last feasible length
                    chosen = last_positive;
                }
            }
            *counts.entry(chosen).or_insert(0) += 1;
            rem -= chosen;
        }
        CycleType::from_pairs(n, &counts.into_iter().collect::<Vec<_>>())
            .expect("sampled counts always sum to n")
    }
}

/// One exact sample of the cycle-type distribution at size n.
pub fn sample_cycle_type(h: &LogWeightTable, n: usize, rng: &mut ChaCha8Rng) -> Result<CycleType> {
    Ok(SamplerContext::new(h, n)?.draw(n, rng))
}

fn stream_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Histogram with equal-width bins spanning [min, max].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
}

impl Histogram {
    fn build(values: &[f64], bins: usize, min: f64, max: f64) -> Self {
        let bins = bins.max(1);
        let width = (max - min) / bins as f64;
        let mut edges = Vec::with_capacity(bins + 1);
        for i in 0..=bins {
            edges.push(min + width * i as f64);
        }
        let mut counts = vec![0u64; bins];
        for &v in values {
            let idx = if width > 0.0 {
                (((v - min) / width) as usize).min(bins - 1)
            } else {
                0
            };
            counts[idx] += 1;
        }
        Self { edges, counts }
    }
}

/// Summary statistics of a Monte Carlo run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleStats {
    pub count: u64,
    pub mean: f64,
    /// Unbiased sample variance.
    pub variance: f64,
    /// Standard error sqrt(variance / count).
    pub se: f64,
    pub min: f64,
    pub max: f64,
    pub histogram: Histogram,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub raw: Option<Vec<f64>>,
}

/// Options for `monte_carlo`.
#[derive(Debug, Clone)]
pub struct MonteCarloOptions {
    pub seed: u64,
    /// 0 means the rayon default.
    pub workers: usize,
    pub histogram_bins: usize,
    pub keep_raw: bool,
}

impl Default for MonteCarloOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            workers: 0,
            histogram_bins: 32,
            keep_raw: false,
        }
    }
}

/// Deterministic pairwise sum over a fixed chunk tree.
fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= 64 {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// Statistics of `samples` i.i.d. evaluations of a functional.
///
/// The value of sample i depends only on (seed, i); merging is in fixed
/// index order, so the result is byte-identical for every worker count.
pub fn monte_carlo(
    functional: Functional,
    h: &LogWeightTable,
    mangoldt: Option<&MangoldtTable>,
    n: usize,
    samples: u64,
    opts: &MonteCarloOptions,
) -> Result<SampleStats> {
    if samples == 0 {
        return Err(Error::Domain("need at least one sample".into()));
    }
    if functional.needs_mangoldt() {
        let t = mangoldt
            .ok_or_else(|| Error::Domain("this functional needs a von Mangoldt table".into()))?;
        if t.limit() < n {
            return Err(Error::Range(format!(
                "von Mangoldt table reaches {}, need {n}",
                t.limit()
            )));
        }
    }
    let ctx = SamplerContext::new(h, n)?;
    let bn = truncation_cutoff(n);

    let run = || -> Result<Vec<f64>> {
        (0..samples)
            .into_par_iter()
            .map(|i| {
                let mut rng = stream_rng(opts.seed, i);
                let ct = ctx.draw(n, &mut rng);
                functional.evaluate(&ct, mangoldt, bn)
            })
            .collect()
    };
    let values: Vec<f64> = if opts.workers == 0 {
        run()?
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(opts.workers)
            .build()
            .map_err(|e| Error::Capacity(format!("thread pool: {e}")))?;
        pool.install(run)?
    };

    Ok(stats_from_values(
        values,
        opts.histogram_bins,
        opts.keep_raw,
    ))
}

/// Deterministic summary of an ordered value vector.
pub fn stats_from_values(values: Vec<f64>, bins: usize, keep_raw: bool) -> SampleStats {
    let count = values.len() as u64;
    let mean = pairwise_sum(&values) / count as f64;
    let sq: Vec<f64> = values.iter().map(|v| (v - mean) * (v - mean)).collect();
    let variance = if count > 1 {
        pairwise_sum(&sq) / (count - 1) as f64
    } else {
        0.0
    };
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let histogram = Histogram::build(&values, bins, min, max);
    SampleStats {
        count,
        mean,
        variance,
        se: (variance / count as f64).sqrt(),
        min,
        max,
        histogram,
        raw: keep_raw.then_some(values),
    }
}
