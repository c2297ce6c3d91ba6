//! Joint (first name, last name) laws.
//!
//! A person's identity is the pair of label indices; two people are
//! homonyms when both indices match. Pairs are never concatenated into a
//! single string, which would merge `("AB", "C")` with `("A", "BC")`.

use std::io::Write;

use rustc_hash::FxHashMap;
use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::collision::LabelSource;
use crate::dist::CategoricalDist;
use crate::error::{Error, Result};
use crate::sampler::AliasTable;
use crate::stream::Stream;

/// Sparse counts over observed (first, last) pairs.
///
/// Label indices follow first-appearance order. Entries are sorted by
/// `(first, last)` and every count is at least 1.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDist {
    first_labels: Vec<String>,
    last_labels: Vec<String>,
    entries: Vec<((u32, u32), u64)>,
    first_totals: Vec<u64>,
    last_totals: Vec<u64>,
    total: u64,
}

/// Streaming aggregation of pair records.
#[derive(Debug, Default)]
pub struct JointBuilder {
    first_index: FxHashMap<String, u32>,
    last_index: FxHashMap<String, u32>,
    first_labels: Vec<String>,
    last_labels: Vec<String>,
    counts: FxHashMap<(u32, u32), u64>,
}

fn intern(index: &mut FxHashMap<String, u32>, labels: &mut Vec<String>, label: &str) -> u32 {
    if let Some(&i) = index.get(label) {
        return i;
    }
    let i = labels.len() as u32;
    labels.push(label.to_owned());
    index.insert(label.to_owned(), i);
    i
}

impl JointBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, first: &str, last: &str) {
        self.add_count(first, last, 1);
    }

    pub fn add_count(&mut self, first: &str, last: &str, count: u64) {
        if count == 0 {
            return;
        }
        let f = intern(&mut self.first_index, &mut self.first_labels, first);
        let l = intern(&mut self.last_index, &mut self.last_labels, last);
        *self.counts.entry((f, l)).or_insert(0) += count;
    }

    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    pub fn build(self) -> Result<JointDist> {
        if self.counts.is_empty() {
            return Err(Error::EmptyInput);
        }
        let mut entries: Vec<_> = self.counts.into_iter().collect();
        entries.sort_unstable_by_key(|e| e.0);
        Ok(JointDist::from_parts(self.first_labels, self.last_labels, entries))
    }
}

impl JointDist {
    fn from_parts(first_labels: Vec<String>, last_labels: Vec<String>, entries: Vec<((u32, u32), u64)>) -> Self {
        let mut first_totals = vec![0u64; first_labels.len()];
        let mut last_totals = vec![0u64; last_labels.len()];
        for &((f, l), c) in &entries {
            first_totals[f as usize] += c;
            last_totals[l as usize] += c;
        }
        let total = first_totals.iter().sum();
        Self {
            first_labels,
            last_labels,
            entries,
            first_totals,
            last_totals,
            total,
        }
    }

    /// Builds a joint from a dense `rows × cols` count table; zero cells are
    /// dropped, as are labels whose whole row or column is zero.
    pub fn from_table(first_labels: &[&str], last_labels: &[&str], table: &[Vec<u64>]) -> Result<Self> {
        let mut b = JointBuilder::new();
        for (i, row) in table.iter().enumerate() {
            for (j, &c) in row.iter().enumerate() {
                b.add_count(first_labels[i], last_labels[j], c);
            }
        }
        b.build()
    }

    pub fn first_labels(&self) -> &[String] {
        &self.first_labels
    }

    pub fn last_labels(&self) -> &[String] {
        &self.last_labels
    }

    /// Observed pairs with their counts, sorted by index.
    pub fn entries(&self) -> &[((u32, u32), u64)] {
        &self.entries
    }

    pub fn count(&self, first: u32, last: u32) -> u64 {
        self.entries
            .binary_search_by_key(&(first, last), |e| e.0)
            .map(|i| self.entries[i].1)
            .unwrap_or(0)
    }

    pub fn first_totals(&self) -> &[u64] {
        &self.first_totals
    }

    pub fn last_totals(&self) -> &[u64] {
        &self.last_totals
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn k_first(&self) -> usize {
        self.first_labels.len()
    }

    pub fn k_last(&self) -> usize {
        self.last_labels.len()
    }

    /// First-name and last-name marginal laws.
    pub fn marginals(&self) -> (CategoricalDist, CategoricalDist) {
        let to_dist = |labels: &[String], totals: &[u64]| {
            CategoricalDist::new(labels.to_vec(), totals.iter().map(|&c| c as f64).collect())
                .expect("marginals of a non-empty joint are valid")
        };
        (
            to_dist(&self.first_labels, &self.first_totals),
            to_dist(&self.last_labels, &self.last_totals),
        )
    }
}

/// Aggregates `(first, last)` records.
pub fn from_records<F, L>(records: impl IntoIterator<Item = (F, L)>) -> Result<JointDist>
where
    F: AsRef<str>,
    L: AsRef<str>,
{
    let mut b = JointBuilder::new();
    for (f, l) in records {
        b.add(f.as_ref(), l.as_ref());
    }
    b.build()
}

pub fn marginals(joint: &JointDist) -> (CategoricalDist, CategoricalDist) {
    joint.marginals()
}

#[inline]
fn pair_key(first: u32, last: u32, k_last: u64) -> u64 {
    u64::from(first) * k_last + u64::from(last)
}

/// Draws observed pairs with probability `count / total`.
#[derive(Debug, Clone)]
pub struct EmpiricalPairSampler {
    table: AliasTable,
    keys: Vec<u64>,
    pairs: Vec<(u32, u32)>,
    key_space: u64,
}

impl EmpiricalPairSampler {
    pub fn new(joint: &JointDist) -> Self {
        let total = joint.total as f64;
        let probs: Vec<f64> = joint.entries.iter().map(|e| e.1 as f64 / total).collect();
        let k_last = joint.k_last() as u64;
        Self {
            table: AliasTable::new(&probs),
            keys: joint.entries.iter().map(|e| pair_key(e.0 .0, e.0 .1, k_last)).collect(),
            pairs: joint.entries.iter().map(|e| e.0).collect(),
            key_space: joint.k_first() as u64 * k_last,
        }
    }

    pub fn draw_pair(&self, rng: &mut Stream) -> (u32, u32) {
        self.pairs[self.table.sample(rng)]
    }
}

impl LabelSource for EmpiricalPairSampler {
    #[inline]
    fn draw(&self, rng: &mut Stream) -> u64 {
        self.keys[self.table.sample(rng)]
    }

    fn key_space(&self) -> u64 {
        self.key_space
    }

    fn describe(&self) -> String {
        format!("pairs(observed={})", self.keys.len())
    }
}

/// Draws first and last names independently from two marginals, i.e. from
/// the product law `p(i, ·) p(·, j)`, without materializing it.
#[derive(Debug, Clone)]
pub struct IndependentPairSampler {
    first: CategoricalDist,
    last: CategoricalDist,
}

impl IndependentPairSampler {
    pub fn new(joint: &JointDist) -> Self {
        let (first, last) = joint.marginals();
        Self { first, last }
    }

    pub fn from_marginals(first: CategoricalDist, last: CategoricalDist) -> Self {
        Self { first, last }
    }

    pub fn draw_pair(&self, rng: &mut Stream) -> (u32, u32) {
        (self.first.sample(rng) as u32, self.last.sample(rng) as u32)
    }

    pub fn first(&self) -> &CategoricalDist {
        &self.first
    }

    pub fn last(&self) -> &CategoricalDist {
        &self.last
    }
}

impl LabelSource for IndependentPairSampler {
    #[inline]
    fn draw(&self, rng: &mut Stream) -> u64 {
        let (f, l) = self.draw_pair(rng);
        pair_key(f, l, self.last.len() as u64)
    }

    fn key_space(&self) -> u64 {
        self.first.len() as u64 * self.last.len() as u64
    }

    fn describe(&self) -> String {
        format!("independent(k_first={}, k_last={})", self.first.len(), self.last.len())
    }
}

pub fn empirical_pair_sampler(joint: &JointDist) -> EmpiricalPairSampler {
    EmpiricalPairSampler::new(joint)
}

pub fn independent_product_sampler(joint: &JointDist) -> IndependentPairSampler {
    IndependentPairSampler::new(joint)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualEntry {
    pub first: u32,
    pub last: u32,
    pub observed: u64,
    pub expected: f64,
    pub residual: f64,
}

/// Pearson residuals of a restricted contingency table.
///
/// `first`/`last` in each entry index the joint's label lists.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualTable {
    pub rows: Vec<u32>,
    pub cols: Vec<u32>,
    pub entries: Vec<ResidualEntry>,
    pub chi_square: f64,
    pub dof: u64,
    pub p_value: f64,
}

pub const DEFAULT_TOP: usize = 20;

/// Indices of the `m` largest totals, ties by index.
fn top_indices(totals: &[u64], m: usize) -> Vec<u32> {
    let mut idx: Vec<u32> = (0..totals.len() as u32).collect();
    idx.sort_by(|&a, &b| totals[b as usize].cmp(&totals[a as usize]).then(a.cmp(&b)));
    idx.truncate(m);
    idx
}

/// Chi-square test of independence on the `top_first × top_last` table of
/// the most frequent names. Sizes above the support are clipped.
pub fn pearson_residuals(joint: &JointDist, top_first: usize, top_last: usize) -> Result<ResidualTable> {
    let rows = top_indices(&joint.first_totals, top_first.min(joint.k_first()));
    let cols = top_indices(&joint.last_totals, top_last.min(joint.k_last()));
    if rows.is_empty() || cols.is_empty() {
        return Err(Error::DegenerateTable("empty restriction".into()));
    }
    let observed: Vec<Vec<u64>> = rows
        .iter()
        .map(|&f| cols.iter().map(|&l| joint.count(f, l)).collect())
        .collect();
    let row_totals: Vec<u64> = observed.iter().map(|r| r.iter().sum()).collect();
    let col_totals: Vec<u64> = (0..cols.len()).map(|j| observed.iter().map(|r| r[j]).sum()).collect();
    if let Some(i) = row_totals.iter().position(|&t| t == 0) {
        return Err(Error::DegenerateTable(format!(
            "first name {:?} has no pair inside the restricted table",
            joint.first_labels[rows[i] as usize]
        )));
    }
    if let Some(j) = col_totals.iter().position(|&t| t == 0) {
        return Err(Error::DegenerateTable(format!(
            "last name {:?} has no pair inside the restricted table",
            joint.last_labels[cols[j] as usize]
        )));
    }
    let grand: u64 = row_totals.iter().sum();
    let grand_f = grand as f64;

    let mut entries = Vec::with_capacity(rows.len() * cols.len());
    let mut chi_square = 0.0;
    for (i, &f) in rows.iter().enumerate() {
        for (j, &l) in cols.iter().enumerate() {
            let obs = observed[i][j];
            // row·col/grand, exact when it is an integer
            let num = u128::from(row_totals[i]) * u128::from(col_totals[j]);
            let expected = if num % u128::from(grand) == 0 {
                (num / u128::from(grand)) as f64
            } else {
                num as f64 / grand_f
            };
            let diff = obs as f64 - expected;
            chi_square += diff * diff / expected;
            entries.push(ResidualEntry {
                first: f,
                last: l,
                observed: obs,
                expected,
                residual: diff / expected.sqrt(),
            });
        }
    }
    let dof = (rows.len() as u64 - 1) * (cols.len() as u64 - 1);
    let p_value = if dof > 0 {
        ChiSquared::new(dof as f64)
            .map(|d| d.sf(chi_square))
            .unwrap_or(f64::NAN)
    } else {
        1.0
    };
    Ok(ResidualTable {
        rows,
        cols,
        entries,
        chi_square,
        dof,
        p_value,
    })
}

/// Writes `first,last,observed,expected,residual`.
pub fn write_residuals_csv<W: Write>(joint: &JointDist, table: &ResidualTable, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["first", "last", "observed", "expected", "residual"])?;
    for e in &table.entries {
        w.write_record([
            joint.first_labels[e.first as usize].as_str(),
            joint.last_labels[e.last as usize].as_str(),
            &e.observed.to_string(),
            &e.expected.to_string(),
            &e.residual.to_string(),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}
