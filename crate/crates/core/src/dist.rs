//! Finite categorical distributions, Zipf laws and concentration statistics.

use std::collections::HashSet;

use rand::RngCore;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::sampler::AliasTable;

/// A finite labelled distribution with an alias table for O(1) draws.
///
/// Immutable once built; share it freely across threads.
#[derive(Debug, Clone)]
pub struct CategoricalDist {
    labels: Vec<String>,
    weights: Vec<f64>,
    probs: Vec<f64>,
    sampler: AliasTable,
}

impl CategoricalDist {
    /// Normalizes `weights` and builds the sampler in O(k).
    pub fn new(labels: Vec<String>, weights: Vec<f64>) -> Result<Self> {
        if labels.len() != weights.len() {
            return Err(Error::LengthMismatch {
                labels: labels.len(),
                weights: weights.len(),
            });
        }
        if let Some((index, &value)) = weights
            .iter()
            .enumerate()
            .find(|(_, w)| !(w.is_finite() && **w >= 0.0))
        {
            return Err(Error::NegativeWeight { index, value });
        }
        let mut seen = HashSet::with_capacity(labels.len());
        for label in &labels {
            if !seen.insert(label.as_str()) {
                return Err(Error::DuplicateLabel(label.clone()));
            }
        }
        let total = neumaier_sum(weights.iter().copied());
        if total.is_nan() || total <= 0.0 {
            return Err(Error::EmptySupport);
        }
        let probs: Vec<f64> = weights.iter().map(|w| w / total).collect();
        let sampler = AliasTable::new(&probs);
        Ok(Self {
            labels,
            weights,
            probs,
            sampler,
        })
    }

    /// Labels `"1"..="k"` with the given weights.
    pub fn from_ranked_weights(weights: Vec<f64>) -> Result<Self> {
        let labels = (1..=weights.len()).map(|i| i.to_string()).collect();
        Self::new(labels, weights)
    }

    /// Uniform distribution over `k` ranked labels.
    pub fn uniform(k: usize) -> Result<Self> {
        Self::from_ranked_weights(vec![1.0; k])
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    #[inline]
    pub fn sample<R: RngCore + ?Sized>(&self, rng: &mut R) -> usize {
        self.sampler.sample(rng)
    }

    /// `n` i.i.d. label indices.
    pub fn sample_n<R: RngCore + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<usize> {
        (0..n).map(|_| self.sampler.sample(rng)).collect()
    }
}

/// Builds a distribution from labels and non-negative weights.
pub fn build_dist<S: Into<String>>(labels: impl IntoIterator<Item = S>, weights: Vec<f64>) -> Result<CategoricalDist> {
    CategoricalDist::new(labels.into_iter().map(Into::into).collect(), weights)
}

pub(crate) fn neumaier_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// `Σ_{i=1..k} i^-alpha`, summed from the smallest term up.
pub fn zipf_normalizer(alpha: f64, k: usize) -> f64 {
    neumaier_sum((1..=k).rev().map(|i| (i as f64).powf(-alpha)))
}

/// Zipf law over ranks `1..=k`: `p_i ∝ i^-alpha`.
///
/// `alpha = 0` is accepted and yields the uniform law.
pub fn zipf_pmf(alpha: f64, k: usize) -> Result<CategoricalDist> {
    if !(alpha.is_finite() && alpha >= 0.0) {
        return Err(Error::InvalidAlpha(alpha));
    }
    if k == 0 {
        return Err(Error::EmptySupport);
    }
    let weights = (1..=k).map(|i| (i as f64).powf(-alpha)).collect();
    CategoricalDist::from_ranked_weights(weights)
}

/// Result of a maximum-likelihood Zipf fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ZipfFit {
    pub alpha: f64,
    pub k: usize,
    pub log_likelihood: f64,
    pub normalizer: f64,
}

impl ZipfFit {
    /// Fitted probability of the 1-based `rank`; zero outside `1..=k`.
    pub fn pmf(&self, rank: usize) -> f64 {
        if rank == 0 || rank > self.k {
            0.0
        } else {
            (rank as f64).powf(-self.alpha) / self.normalizer
        }
    }
}

pub const ZIPF_ALPHA_MIN: f64 = 0.01;
pub const ZIPF_ALPHA_MAX: f64 = 10.0;
const ZIPF_ALPHA_TOL: f64 = 1e-6;

/// Sufficient statistics of a rank-count table for the Zipf likelihood.
struct RankCounts {
    k: usize,
    total: f64,
    weighted_log_rank: f64,
}

impl RankCounts {
    fn from_ranked(ranked: &[u64]) -> Self {
        Self {
            k: ranked.len(),
            total: ranked.iter().map(|&c| c as f64).sum(),
            weighted_log_rank: neumaier_sum(
                ranked
                    .iter()
                    .enumerate()
                    .map(|(i, &c)| c as f64 * ((i + 1) as f64).ln()),
            ),
        }
    }

    /// Multinomial log-likelihood `Σ c_i log p_i` under `Zipf(alpha, k)`.
    fn log_likelihood(&self, alpha: f64) -> (f64, f64) {
        let z = zipf_normalizer(alpha, self.k);
        (-alpha * self.weighted_log_rank - self.total * z.ln(), z)
    }
}

/// Ranks counts in stable descending order and drops zeros.
///
/// Equal counts keep their input order.
pub fn rank_counts(counts: &[u64]) -> Vec<u64> {
    let mut ranked: Vec<u64> = counts.iter().copied().filter(|&c| c > 0).collect();
    ranked.sort_by(|a, b| b.cmp(a));
    ranked
}

/// Discrete maximum-likelihood fit of a Zipf exponent.
///
/// Ranks are positions after a stable descending sort; zero counts are
/// dropped, so `k` is the observed support. The exponent is found by golden
/// section search on `[0.01, 10]`, which is safe because the log-likelihood
/// is concave in `alpha`.
pub fn fit_zipf(counts: &[u64]) -> Result<ZipfFit> {
    let ranked = rank_counts(counts);
    if ranked.is_empty() {
        return Err(Error::EmptyInput);
    }
    if ranked.first() == ranked.last() {
        return Err(Error::DegenerateInput("fewer than two distinct count values"));
    }
    let stats = RankCounts::from_ranked(&ranked);
    let alpha = golden_section_max(
        |a| stats.log_likelihood(a).0,
        ZIPF_ALPHA_MIN,
        ZIPF_ALPHA_MAX,
        ZIPF_ALPHA_TOL,
    );
    let (log_likelihood, normalizer) = stats.log_likelihood(alpha);
    Ok(ZipfFit {
        alpha,
        k: stats.k,
        log_likelihood,
        normalizer,
    })
}

/// Multinomial log-likelihood of ranked `counts` under `Zipf(alpha, k)`.
pub fn zipf_log_likelihood(counts: &[u64], alpha: f64) -> f64 {
    RankCounts::from_ranked(&rank_counts(counts)).log_likelihood(alpha).0
}

/// Exponent from least squares of `log count` on `log rank`.
///
/// A diagnostic only: the sparse tail dominates the regression.
pub fn loglog_alpha(counts: &[u64]) -> Option<f64> {
    let ranked = rank_counts(counts);
    if ranked.len() < 2 {
        return None;
    }
    let pts: Vec<(f64, f64)> = ranked
        .iter()
        .enumerate()
        .map(|(i, &c)| (((i + 1) as f64).ln(), (c as f64).ln()))
        .collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = pts.iter().map(|(x, _)| (x - mx).powi(2)).sum();
    Some(-sxy / sxx)
}

fn golden_section_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > tol {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        }
    }
    let mid = 0.5 * (lo + hi);
    // The optimum may sit on a boundary of the bracket.
    [lo, mid, hi]
        .into_iter()
        .map(|x| (x, f(x)))
        .fold((mid, f64::NEG_INFINITY), |best, cand| if cand.1 > best.1 { cand } else { best })
        .0
}

/// Share of the total held by the `m` largest counts.
pub fn top_share(counts: &[u64], m: usize) -> Result<f64> {
    if m == 0 {
        return Err(Error::DegenerateInput("top_share needs m >= 1"));
    }
    let total: u128 = counts.iter().map(|&c| u128::from(c)).sum();
    if counts.is_empty() || total == 0 {
        return Err(Error::EmptyInput);
    }
    if m >= counts.len() {
        return Ok(1.0);
    }
    let mut sorted = counts.to_vec();
    sorted.select_nth_unstable_by(m - 1, |a, b| b.cmp(a));
    let top: u128 = sorted[..m].iter().map(|&c| u128::from(c)).sum();
    Ok(top as f64 / total as f64)
}
