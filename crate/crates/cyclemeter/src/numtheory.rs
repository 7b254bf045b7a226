//! Prime sieve, von Mangoldt function, Chebyshev psi and exact lcm.
//!
//! `MangoldtTable` is the number-theoretic backbone of the order statistics:
//! it stores Lambda(k) for k up to a limit, the prefix sums psi(x), and a
//! smallest-prime-factor table so that cycle lengths can be factorized
//! exactly (the order of a permutation is assembled from prime-power maxima,
//! never from rounded logarithms of products).

use crate::error::{Error, Result};

/// Hard cap on sieve size (entries), overridable per call.
pub const DEFAULT_SIEVE_CEILING: usize = 100_000_000;

/// Von Mangoldt values Lambda(0..=limit) with prefix sums and factorization
/// support. Immutable after construction and freely shareable.
#[derive(Debug, Clone)]
pub struct MangoldtTable {
    limit: usize,
    values: Vec<f64>,
    psi_prefix: Vec<f64>,
    smallest_factor: Vec<u32>,
}

impl MangoldtTable {
    /// Sieve Lambda and psi up to `limit` (inclusive).
    pub fn build(limit: usize) -> Result<Self> {
        Self::build_with_ceiling(limit, DEFAULT_SIEVE_CEILING)
    }

    pub fn build_with_ceiling(limit: usize, ceiling: usize) -> Result<Self> {
        if limit == 0 {
            return Err(Error::Capacity("sieve limit must be at least 1".into()));
        }
        if limit > ceiling {
            return Err(Error::Capacity(format!(
                "sieve limit {limit} exceeds ceiling {ceiling}"
            )));
        }
        if limit > u32::MAX as usize {
            return Err(Error::Capacity("sieve limit exceeds u32 range".into()));
        }

        // Linear sieve for smallest prime factors.
        let mut spf = vec![0u32; limit + 1];
        let mut primes: Vec<u32> = Vec::new();
        for i in 2..=limit {
            if spf[i] == 0 {
                spf[i] = i as u32;
                primes.push(i as u32);
            }
            for &p in &primes {
                let p = p as usize;
                if p > spf[i] as usize || i * p > limit {
                    break;
                }
                spf[i * p] = p as u32;
            }
        }

        // Lambda(k) = log p when k = p^j, else 0.
        let mut values = vec![0.0; limit + 1];
        for k in 2..=limit {
            let p = spf[k] as usize;
            let mut m = k;
            while m % p == 0 {
                m /= p;
            }
            if m == 1 {
                values[k] = (p as f64).ln();
            }
        }

        let mut psi_prefix = vec![0.0; limit + 1];
        let mut acc = 0.0;
        for k in 0..=limit {
            acc += values[k];
            psi_prefix[k] = acc;
        }

        Ok(Self {
            limit,
            values,
            psi_prefix,
            smallest_factor: spf,
        })
    }

    pub fn limit(&self) -> usize {
        self.limit
    }

    /// Lambda(k); panics if k > limit.
    pub fn lambda(&self, k: usize) -> f64 {
        self.values[k]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Chebyshev psi(x) = sum of Lambda(k) for k <= x.
    pub fn psi(&self, x: usize) -> Result<f64> {
        if x > self.limit {
            return Err(Error::Range(format!(
                "psi({x}) requested but table only reaches {}",
                self.limit
            )));
        }
        Ok(self.psi_prefix[x])
    }

    pub fn is_prime(&self, k: usize) -> bool {
        k >= 2 && self.smallest_factor[k] as usize == k
    }

    /// Exact factorization of k as (prime, exponent) pairs, ascending primes.
    pub fn factorize(&self, k: usize) -> Result<Vec<(u32, u32)>> {
        if k > self.limit {
            return Err(Error::Range(format!(
                "factorize({k}) requested but table only reaches {}",
                self.limit
            )));
        }
        let mut out = Vec::new();
        let mut m = k;
        while m > 1 {
            let p = self.smallest_factor[m];
            let mut e = 0u32;
            while m.is_multiple_of(p as usize) {
                m /= p as usize;
                e += 1;
            }
            out.push((p, e));
        }
        Ok(out)
    }

    /// Prime powers p^j <= bound, ascending. These are exactly the k with
    /// Lambda(k) > 0, the support of every von Mangoldt sum.
    pub fn prime_powers(&self, bound: usize) -> Vec<usize> {
        let bound = bound.min(self.limit);
        (2..=bound).filter(|&k| self.values[k] > 0.0).collect()
    }
}

/// Chebyshev psi as a free function mirroring the table method.
pub fn chebyshev_psi(table: &MangoldtTable, x: usize) -> Result<f64> {
    table.psi(x)
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Exact lcm in 128-bit arithmetic with overflow detection.
///
/// Sufficient for every cycle type with n below roughly 900, since the
/// largest order of a permutation grows like exp(sqrt(n log n)).
pub fn exact_lcm(values: &[u64]) -> Result<u128> {
    if values.is_empty() {
        return Err(Error::Domain("lcm of an empty list".into()));
    }
    let mut acc: u128 = 1;
    for &v in values {
        if v == 0 {
            return Err(Error::Domain("lcm input must be positive".into()));
        }
        let v = v as u128;
        let g = gcd(acc, v);
        acc = (acc / g)
            .checked_mul(v)
            .ok_or_else(|| Error::Overflow("lcm exceeds 128 bits".into()))?;
    }
    Ok(acc)
}
