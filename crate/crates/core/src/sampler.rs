//! Categorical samplers over indices `0..k`.

use rand::{Rng, RngCore};

/// Walker/Vose alias table: O(k) construction, one 64-bit draw per sample.
///
/// A single `u64` supplies both the column and the coin: the high half of
/// the 128-bit product `r * k` is the column, the low half is compared
/// against the column's fixed-point acceptance threshold.
#[derive(Debug, Clone)]
pub struct AliasTable {
    threshold: Vec<u64>,
    alias: Vec<u32>,
}

impl AliasTable {
    /// Builds the table from probabilities that sum to one.
    ///
    /// Callers guarantee `probs` is non-empty, non-negative and normalized;
    /// `CategoricalDist` enforces this.
    pub fn new(probs: &[f64]) -> Self {
        let k = probs.len();
        assert!(k > 0 && k <= u32::MAX as usize, "alias table size out of range");
        let mut scaled: Vec<f64> = probs.iter().map(|&p| p * k as f64).collect();
        let mut alias: Vec<u32> = (0..k as u32).collect();
        let mut threshold = vec![u64::MAX; k];

        let mut small = Vec::with_capacity(k);
        let mut large = Vec::with_capacity(k);
        for (i, &s) in scaled.iter().enumerate() {
            if s < 1.0 {
                small.push(i);
            } else {
                large.push(i);
            }
        }

        while let (Some(&s), Some(&l)) = (small.last(), large.last()) {
            small.pop();
            threshold[s] = to_fixed(scaled[s]);
            alias[s] = l as u32;
            scaled[l] = (scaled[l] + scaled[s]) - 1.0;
            if scaled[l] < 1.0 {
                large.pop();
                small.push(l);
            }
        }
        // Leftovers are full columns up to rounding error.
        for i in small.into_iter().chain(large) {
            threshold[i] = u64::MAX;
            alias[i] = i as u32;
        }

        Self { threshold, alias }
    }

    pub fn len(&self) -> usize {
        self.alias.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alias.is_empty()
    }

    #[inline]
    pub fn sample<R: RngCore + ?Sized>(&self, rng: &mut R) -> usize {
        let wide = u128::from(rng.next_u64()) * self.alias.len() as u128;
        let column = (wide >> 64) as usize;
        let coin = wide as u64;
        if coin < self.threshold[column] {
            column
        } else {
            self.alias[column] as usize
        }
    }
}

fn to_fixed(x: f64) -> u64 {
    if x >= 1.0 {
        u64::MAX
    } else if x <= 0.0 {
        0
    } else {
        // 2^64 * x, exact for x representable with <= 53 bits
        (x * 18_446_744_073_709_551_616.0) as u64
    }
}

/// Cumulative-inversion sampler: O(log k) per draw. Kept as an independent
/// route for checking the alias table.
#[derive(Debug, Clone)]
pub struct InversionSampler {
    cdf: Vec<f64>,
}

impl InversionSampler {
    pub fn new(probs: &[f64]) -> Self {
        assert!(!probs.is_empty());
        let mut acc = 0.0;
        let mut cdf: Vec<f64> = probs
            .iter()
            .map(|&p| {
                acc += p;
                acc
            })
            .collect();
        // The last positive atom absorbs rounding so that trailing
        // zero-probability entries are unreachable.
        let last = probs.iter().rposition(|&p| p > 0.0).unwrap_or(probs.len() - 1);
        cdf[last..].fill(f64::INFINITY);
        Self { cdf }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.random();
        self.cdf.partition_point(|&c| c <= u)
    }
}
