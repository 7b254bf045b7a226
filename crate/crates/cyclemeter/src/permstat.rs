//! Cycle types, the order statistics log Y / log O / Delta with their
//! truncated variants, and the brute-force enumeration oracle.
//!
//! Every statistic in scope is a class function, so the sample objects are
//! integer partitions of n (cycle types), never one-line permutations. The
//! mass of a type with counts (C_m) is prod_m (theta_m/m)^{C_m} / C_m!
//! divided by h_n.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::numtheory::{self, MangoldtTable};
use crate::series::LogWeightTable;

pub use crate::series::truncation_cutoff;

/// Enumeration gate: p(60) is just under a million partitions.
pub const MAX_ENUMERATION_N: usize = 60;

/// Sparse cycle-count record: `counts[m] = C_m >= 1`, sum m C_m = n.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CycleType {
    n: usize,
    counts: BTreeMap<usize, usize>,
}

impl CycleType {
    pub fn new(n: usize, counts: BTreeMap<usize, usize>) -> Result<Self> {
        let mut total = 0usize;
        for (&m, &c) in &counts {
            if m == 0 || m > n {
                return Err(Error::Validation(format!(
                    "cycle length {m} outside 1..={n}"
                )));
            }
            if c == 0 {
                return Err(Error::Validation("stored counts must be >= 1".into()));
            }
            total += m * c;
        }
        if total != n {
            return Err(Error::Validation(format!(
                "cycle lengths sum to {total}, expected {n}"
            )));
        }
        Ok(Self { n, counts })
    }

    pub fn from_pairs(n: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        Self::new(n, pairs.iter().copied().collect())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// (length, count) pairs in increasing length order.
    pub fn counts(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.counts.iter().map(|(&m, &c)| (m, c))
    }

    pub fn count_of(&self, m: usize) -> usize {
        self.counts.get(&m).copied().unwrap_or(0)
    }

    /// log Y = sum log(m) C_m over all stored lengths.
    pub fn log_y(&self) -> f64 {
        self.log_y_truncated(self.n)
    }

    /// Truncated variant summing only lengths m <= b.
    pub fn log_y_truncated(&self, b: usize) -> f64 {
        self.counts
            .iter()
            .take_while(|(&m, _)| m <= b)
            .map(|(&m, &c)| (m as f64).ln() * c as f64)
            .sum()
    }

    /// log O = log lcm of the cycle lengths, assembled from prime-power
    /// maxima so no rounding accumulates across lengths.
    pub fn log_o(&self, table: &MangoldtTable) -> Result<f64> {
        self.log_o_truncated(self.n, table)
    }

    pub fn log_o_truncated(&self, b: usize, table: &MangoldtTable) -> Result<f64> {
        if table.limit() < self.n.min(b) {
            return Err(Error::Range(format!(
                "von Mangoldt table reaches {}, need {}",
                table.limit(),
                self.n.min(b)
            )));
        }
        let mut max_exp: BTreeMap<u32, u32> = BTreeMap::new();
        for (&m, _) in self.counts.iter().take_while(|(&m, _)| m <= b) {
            for (p, e) in table.factorize(m)? {
                let slot = max_exp.entry(p).or_insert(0);
                if e > *slot {
                    *slot = e;
                }
            }
        }
        Ok(max_exp
            .iter()
            .map(|(&p, &e)| e as f64 * table.lambda(p as usize))
            .sum())
    }

    /// Exact order as an integer, when it fits 128 bits.
    pub fn exact_order(&self) -> Result<u128> {
        let lengths: Vec<u64> = self.counts.keys().map(|&m| m as u64).collect();
        if lengths.is_empty() {
            return Ok(1);
        }
        numtheory::exact_lcm(&lengths)
    }

    /// (D_nk, D*_nk): the number of cycles with length divisible by k and
    /// its indicator.
    pub fn d_nk(&self, k: usize) -> (usize, bool) {
        self.d_nk_truncated(k, self.n)
    }

    pub fn d_nk_truncated(&self, k: usize, b: usize) -> (usize, bool) {
        if k == 0 {
            return (0, false);
        }
        let d: usize = self
            .counts
            .iter()
            .take_while(|(&m, _)| m <= b)
            .filter(|(&m, _)| m % k == 0)
            .map(|(_, &c)| c)
            .sum();
        (d, d > 0)
    }

    /// All order statistics in one pass; `bn` fixes the truncation level.
    pub fn order_stats(&self, table: &MangoldtTable, bn: usize) -> Result<OrderStats> {
        let log_y = self.log_y();
        let log_o = self.log_o(table)?;
        Ok(OrderStats {
            log_y,
            log_o,
            delta: log_y - log_o,
            log_y_trunc: self.log_y_truncated(bn),
            log_o_trunc: self.log_o_truncated(bn, table)?,
        })
    }
}

/// The order statistics of one cycle type.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrderStats {
    pub log_y: f64,
    pub log_o: f64,
    /// delta = log Y - log O >= 0.
    pub delta: f64,
    pub log_y_trunc: f64,
    pub log_o_trunc: f64,
}

/// The functionals exposed to the exact-distribution and Monte Carlo
/// drivers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Functional {
    LogY,
    LogO,
    Delta,
    LogYTrunc,
    LogOTrunc,
    /// D_nk for a fixed divisor class k.
    DCount {
        k: usize,
    },
}

impl Functional {
    pub fn needs_mangoldt(&self) -> bool {
        matches!(
            self,
            Functional::LogO | Functional::Delta | Functional::LogOTrunc
        )
    }

    pub fn evaluate(
        &self,
        ct: &CycleType,
        table: Option<&MangoldtTable>,
        bn: usize,
    ) -> Result<f64> {
        Ok(match self {
            Functional::LogY => ct.log_y(),
            Functional::LogYTrunc => ct.log_y_truncated(bn),
            Functional::LogO => ct.log_o(require(table)?)?,
            Functional::LogOTrunc => ct.log_o_truncated(bn, require(table)?)?,
            Functional::Delta => ct.log_y() - ct.log_o(require(table)?)?,
            Functional::DCount { k } => ct.d_nk(*k).0 as f64,
        })
    }

    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        Ok(match s {
            "logY" => Functional::LogY,
            "logO" => Functional::LogO,
            "delta" => Functional::Delta,
            "logY_t" => Functional::LogYTrunc,
            "logO_t" => Functional::LogOTrunc,
            _ => {
                if let Some(k) = s.strip_prefix("d_nk:") {
                    let k: usize = k
                        .parse()
                        .map_err(|_| Error::Parse(format!("bad divisor class `{k}`")))?;
                    if k == 0 {
                        return Err(Error::Parse("divisor class must be >= 1".into()));
                    }
                    Functional::DCount { k }
                } else {
                    return Err(Error::Parse(format!(
                        "unknown functional `{s}` (logY, logO, delta, logY_t, logO_t, d_nk:<k>)"
                    )));
                }
            }
        })
    }

    pub fn name(&self) -> String {
        match self {
            Functional::LogY => "logY".into(),
            Functional::LogO => "logO".into(),
            Functional::Delta => "delta".into(),
            Functional::LogYTrunc => "logY_t".into(),
            Functional::LogOTrunc => "logO_t".into(),
            Functional::DCount { k } => format!("d_nk:{k}"),
        }
    }
}

fn require(table: Option<&MangoldtTable>) -> Result<&MangoldtTable> {
    table.ok_or_else(|| Error::Domain("this functional needs a von Mangoldt table".into()))
}

/// Streaming iterator over the partitions of n, largest part first within
/// each partition, in descending lexicographic order.
struct Partitions {
    parts: Vec<usize>,
    started: bool,
    n: usize,
}

impl Partitions {
    fn new(n: usize) -> Self {
        Self {
            parts: Vec::new(),
            started: false,
            n,
        }
    }
}

impl Iterator for Partitions {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if !self.started {
            self.started = true;
            if self.n == 0 {
                return Some(Vec::new());
            }
            self.parts = vec![self.n];
            return Some(self.parts.clone());
        }
        // find the rightmost part greater than 1
        let k = self.parts.iter().rposition(|&p| p > 1)?;
        let trailing_ones = self.parts.len() - k - 1;
        let new_part = self.parts[k] - 1;
        let mut remainder = trailing_ones + 1;
        self.parts.truncate(k);
        self.parts.push(new_part);
        // refill the remainder with chunks of size new_part
        while remainder > 0 {
            let chunk = remainder.min(new_part);
            self.parts.push(chunk);
            remainder -= chunk;
        }
        Some(self.parts.clone())
    }
}

fn log_factorial_table(max: usize) -> Vec<f64> {
    let mut t = vec![0.0; max + 1];
    for k in 2..=max {
        t[k] = t[k - 1] + (k as f64).ln();
    }
    t
}

/// All cycle types of n with their exact probabilities under the model
/// behind `h`. Streams partition by partition; gated at n = 60.
pub fn enumerate_cycle_types<'a>(
    n: usize,
    h: &'a LogWeightTable,
) -> Result<impl Iterator<Item = (CycleType, f64)> + 'a> {
    if n > MAX_ENUMERATION_N {
        return Err(Error::Capacity(format!(
            "enumeration gate is n <= {MAX_ENUMERATION_N}, got {n}"
        )));
    }
    if h.limit() < n {
        return Err(Error::Range(format!(
            "h-table reaches {}, need {n}",
            h.limit()
        )));
    }
    let log_hn = h.log_h(n);
    if log_hn == f64::NEG_INFINITY {
        return Err(Error::Domain(format!("h_{n} = 0: measure undefined")));
    }
    // log(theta_m / m) once per length
    let model = h.model();
    let mut log_tm = vec![f64::NEG_INFINITY; n + 1];
    for (m, slot) in log_tm.iter_mut().enumerate().skip(1) {
        *slot = model.log_theta(m)? - (m as f64).ln();
    }
    let log_fact = log_factorial_table(n.max(1));

    Ok(Partitions::new(n).map(move |parts| {
        let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
        for p in parts {
            *counts.entry(p).or_insert(0) += 1;
        }
        let mut log_mass = -log_hn;
        for (&m, &c) in &counts {
            log_mass += c as f64 * log_tm[m] - log_fact[c];
        }
        (CycleType { n, counts }, log_mass.exp())
    }))
}

/// Exact distribution of a functional: sorted (value, probability) atoms.
/// Atoms closer than 1e-12 (relative) are merged.
pub fn exact_distribution(
    functional: Functional,
    n: usize,
    h: &LogWeightTable,
    mangoldt: Option<&MangoldtTable>,
) -> Result<Vec<(f64, f64)>> {
    if functional.needs_mangoldt() {
        require(mangoldt)?;
    }
    let bn = truncation_cutoff(n);
    let mut atoms: Vec<(f64, f64)> = Vec::new();
    for (ct, p) in enumerate_cycle_types(n, h)? {
        let v = functional.evaluate(&ct, mangoldt, bn)?;
        atoms.push((v, p));
    }
    atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut merged: Vec<(f64, f64)> = Vec::with_capacity(atoms.len());
    for (v, p) in atoms {
        match merged.last_mut() {
            Some((lv, lp)) if (v - *lv).abs() <= 1e-12 * v.abs().max(1.0) => *lp += p,
            _ => merged.push((v, p)),
        }
    }
    Ok(merged)
}

/// Mean of an exact distribution.
pub fn distribution_mean(dist: &[(f64, f64)]) -> f64 {
    dist.iter().map(|(v, p)| v * p).sum()
}
