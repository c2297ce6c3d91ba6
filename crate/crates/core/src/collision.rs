//! Monte Carlo and exact computation of the proportion of a group that
//! shares its label with at least one other member.
//!
//! For a group of `n` i.i.d. draws `X_1..X_n`, member `i` has an alter-ego
//! when `Z_i = #{j != i : X_j = X_i} >= 1`. The estimator is the fraction of
//! members with an alter-ego, and its expectation under probabilities `p` is
//! `1 - Σ_i p_i (1 - p_i)^(n-1)`.
//!
//! The closed form for uniform `p` is the falling-factorial product
//! `k!/(k-n)! / k^n`; the often-quoted `C(k, n) / k^n` drops a factor `n!`.

use std::io::{Read, Write};

use rayon::prelude::*;
use rustc_hash::FxHashMap;
use serde::Serialize;

use crate::dist::{neumaier_sum, CategoricalDist};
use crate::error::{Error, Result};
use crate::extrapolate::{clamp_epsilon, logit, probit};
use crate::stream::{replicate_stream, Stream};

/// Anything that draws i.i.d. labels encoded as integer keys.
///
/// Keys must lie in `0..key_space()`. Two draws collide iff their keys are
/// equal.
pub trait LabelSource: Send + Sync {
    fn draw(&self, rng: &mut Stream) -> u64;

    fn key_space(&self) -> u64;

    /// Short human-readable description recorded with every curve.
    fn describe(&self) -> String;
}

impl LabelSource for CategoricalDist {
    #[inline]
    fn draw(&self, rng: &mut Stream) -> u64 {
        self.sample(rng) as u64
    }

    fn key_space(&self) -> u64 {
        self.len() as u64
    }

    fn describe(&self) -> String {
        format!("categorical(k={})", self.len())
    }
}

impl<T: LabelSource + ?Sized> LabelSource for &T {
    #[inline]
    fn draw(&self, rng: &mut Stream) -> u64 {
        (**self).draw(rng)
    }

    fn key_space(&self) -> u64 {
        (**self).key_space()
    }

    fn describe(&self) -> String {
        (**self).describe()
    }
}

impl<T: LabelSource + ?Sized> LabelSource for Box<T> {
    #[inline]
    fn draw(&self, rng: &mut Stream) -> u64 {
        (**self).draw(rng)
    }

    fn key_space(&self) -> u64 {
        (**self).key_space()
    }

    fn describe(&self) -> String {
        (**self).describe()
    }
}

/// Key spaces up to this size are counted in a flat array.
const DENSE_KEY_LIMIT: u64 = 1 << 22;

/// Reusable scratch space for multiplicity counting.
///
/// Small key spaces use a flat array plus a list of touched slots so reset
/// costs O(n); larger ones use a hash map.
#[derive(Debug, Default)]
pub struct MultiplicityCounter {
    dense: Vec<u32>,
    touched: Vec<u32>,
    sparse: FxHashMap<u64, u32>,
}

impl MultiplicityCounter {
    pub fn new() -> Self {
        Self::default()
    }

    /// Draws `n` labels and returns the fraction whose multiplicity is >= 2.
    pub fn homonym_fraction<S: LabelSource + ?Sized>(&mut self, source: &S, n: u64, rng: &mut Stream) -> f64 {
        if n == 0 {
            return 0.0;
        }
        let singletons = if source.key_space() <= DENSE_KEY_LIMIT {
            self.dense_singletons(source, n, rng)
        } else {
            self.sparse_singletons(source, n, rng)
        };
        (n - singletons) as f64 / n as f64
    }

    fn dense_singletons<S: LabelSource + ?Sized>(&mut self, source: &S, n: u64, rng: &mut Stream) -> u64 {
        let space = source.key_space() as usize;
        if self.dense.len() < space {
            self.dense.resize(space, 0);
        }
        self.touched.clear();
        for _ in 0..n {
            let key = source.draw(rng) as usize;
            let slot = &mut self.dense[key];
            if *slot == 0 {
                self.touched.push(key as u32);
            }
            *slot = slot.saturating_add(1);
        }
        let mut singletons = 0u64;
        for &key in &self.touched {
            let slot = &mut self.dense[key as usize];
            singletons += u64::from(*slot == 1);
            *slot = 0;
        }
        singletons
    }

    fn sparse_singletons<S: LabelSource + ?Sized>(&mut self, source: &S, n: u64, rng: &mut Stream) -> u64 {
        self.sparse.clear();
        for _ in 0..n {
            let slot = self.sparse.entry(source.draw(rng)).or_insert(0);
            *slot = slot.saturating_add(1);
        }
        self.sparse.values().filter(|&&c| c == 1).count() as u64
    }
}

/// One Monte Carlo draw of the homonym proportion for a group of size `n`.
///
/// Runs in O(n) time and O(distinct labels) space. Returns 0 for `n <= 1`.
pub fn homonym_proportion_once<S: LabelSource + ?Sized>(source: &S, n: u64, rng: &mut Stream) -> f64 {
    MultiplicityCounter::new().homonym_fraction(source, n, rng)
}

/// Group sizes, replicate count and seed for a curve.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SimulationPlan {
    n_grid: Vec<u64>,
    replicates: u32,
    seed: u64,
}

pub const DEFAULT_REPLICATES: u32 = 200;

impl SimulationPlan {
    pub fn new(n_grid: Vec<u64>, replicates: u32, seed: u64) -> Result<Self> {
        if n_grid.is_empty() {
            return Err(Error::InvalidPlan("empty grid".into()));
        }
        if n_grid[0] == 0 {
            return Err(Error::InvalidPlan("group sizes must be >= 1".into()));
        }
        if n_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidPlan("grid must be strictly ascending".into()));
        }
        if replicates == 0 {
            return Err(Error::InvalidPlan("replicates must be >= 1".into()));
        }
        if n_grid.len() > u32::MAX as usize {
            return Err(Error::InvalidPlan("grid too long".into()));
        }
        Ok(Self {
            n_grid,
            replicates,
            seed,
        })
    }

    pub fn n_grid(&self) -> &[u64] {
        &self.n_grid
    }

    pub fn replicates(&self) -> u32 {
        self.replicates
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

/// Replicate estimates at one group size.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurvePoint {
    pub n: u64,
    pub replicates: u32,
    pub mean: f64,
    pub stderr: f64,
    /// Per-replicate values; empty when the point was loaded from a summary.
    pub values: Vec<f64>,
}

impl CurvePoint {
    /// Summarizes replicate values. `stderr` uses the unbiased sample
    /// variance and is 0 for a single replicate.
    pub fn from_values(n: u64, values: Vec<f64>) -> Self {
        let r = values.len() as f64;
        let mean = neumaier_sum(values.iter().copied()) / r;
        let stderr = if values.len() > 1 {
            let ss = neumaier_sum(values.iter().map(|v| (v - mean).powi(2)));
            (ss / (r - 1.0)).sqrt() / r.sqrt()
        } else {
            0.0
        };
        Self {
            n,
            replicates: values.len() as u32,
            mean,
            stderr,
            values,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CollisionCurve {
    pub source: String,
    pub seed: u64,
    pub points: Vec<CurvePoint>,
}

/// Runs every `(grid point, replicate)` task on the global rayon pool.
pub fn estimate_curve<S: LabelSource + ?Sized>(plan: &SimulationPlan, source: &S) -> CollisionCurve {
    let reps = plan.replicates;
    let tasks: Vec<(u32, u32)> = (0..plan.n_grid.len() as u32)
        .flat_map(|g| (0..reps).map(move |r| (g, r)))
        .collect();
    let values: Vec<f64> = tasks
        .into_par_iter()
        .map_init(MultiplicityCounter::new, |counter, (g, r)| {
            let mut rng = replicate_stream(plan.seed, g, r);
            counter.homonym_fraction(source, plan.n_grid[g as usize], &mut rng)
        })
        .collect();
    let points = plan
        .n_grid
        .iter()
        .zip(values.chunks(reps as usize))
        .map(|(&n, chunk)| CurvePoint::from_values(n, chunk.to_vec()))
        .collect();
    CollisionCurve {
        source: source.describe(),
        seed: plan.seed,
        points,
    }
}

/// Same as [`estimate_curve`] on a dedicated pool of `workers` threads.
pub fn estimate_curve_with_workers<S: LabelSource + ?Sized>(
    plan: &SimulationPlan,
    source: &S,
    workers: usize,
) -> CollisionCurve {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .expect("failed to start worker pool");
    pool.install(|| estimate_curve(plan, source))
}

/// `E[P_n] = 1 - Σ_i p_i (1 - p_i)^(n-1)`.
pub fn analytic_expected_proportion(dist: &CategoricalDist, n: u64) -> f64 {
    expected_proportion_from_probs(dist.probs(), n)
}

pub fn expected_proportion_from_probs(probs: &[f64], n: u64) -> f64 {
    if n <= 1 {
        return 0.0;
    }
    let m = (n - 1) as f64;
    let alone = neumaier_sum(probs.iter().map(|&p| {
        if p <= 0.0 {
            0.0
        } else {
            p * (m * (-p).ln_1p()).exp()
        }
    }));
    (1.0 - alone).clamp(0.0, 1.0)
}

pub const BRUTE_FORCE_LIMIT: u64 = 10_000_000;

/// Exact expectation by enumerating all `k^n` ordered outcomes.
pub fn brute_force_expected_proportion(dist: &CategoricalDist, n: u64) -> Result<f64> {
    let k = dist.len();
    let outcomes = (k as f64).powf(n as f64);
    if outcomes > BRUTE_FORCE_LIMIT as f64 {
        return Err(Error::TooLarge {
            outcomes,
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    if n == 0 {
        return Ok(0.0);
    }
    let probs = dist.probs();
    let n = n as usize;
    let mut idx = vec![0usize; n];
    let mut mult = vec![0usize; k];
    let mut terms = Vec::with_capacity(outcomes as usize);
    loop {
        mult.fill(0);
        let mut weight = 1.0;
        for &i in &idx {
            mult[i] += 1;
            weight *= probs[i];
        }
        let with_alter_ego: usize = mult.iter().filter(|&&m| m >= 2).sum();
        terms.push(weight * with_alter_ego as f64 / n as f64);

        // odometer increment
        let mut pos = 0;
        loop {
            if pos == n {
                return Ok(neumaier_sum(terms));
            }
            idx[pos] += 1;
            if idx[pos] < k {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
    }
}

/// Probability that `n` uniform draws over `k` values are all distinct:
/// `Π_{i=0}^{n-1} (1 - i/k)`.
pub fn uniform_all_distinct_exact(k: u64, n: u64) -> f64 {
    if n > k {
        return 0.0;
    }
    let kf = k as f64;
    (0..n).map(|i| 1.0 - i as f64 / kf).product()
}

/// `exp(-n² / 2k)`.
pub fn uniform_all_distinct_approx(k: u64, n: u64) -> f64 {
    let nf = n as f64;
    (-nf * nf / (2.0 * k as f64)).exp()
}

/// Writes `n,mean,stderr,replicates`, optionally followed by the logit and
/// probit of the clamped mean.
pub fn write_curve_csv<W: Write>(curve: &CollisionCurve, with_transforms: bool, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if with_transforms {
        w.write_record(["n", "mean", "stderr", "replicates", "logit", "probit"])?;
    } else {
        w.write_record(["n", "mean", "stderr", "replicates"])?;
    }
    for p in &curve.points {
        let mut rec = vec![
            p.n.to_string(),
            p.mean.to_string(),
            p.stderr.to_string(),
            p.replicates.to_string(),
        ];
        if with_transforms {
            let eps = clamp_epsilon(p.n, p.replicates);
            let u = p.mean.clamp(eps, 1.0 - eps);
            rec.push(logit(u).map(|v| v.to_string()).unwrap_or_default());
            rec.push(probit(u).map(|v| v.to_string()).unwrap_or_default());
        }
        w.write_record(&rec)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Long form `n,replicate,value`.
pub fn write_replicates_csv<W: Write>(curve: &CollisionCurve, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["n", "replicate", "value"])?;
    for p in &curve.points {
        for (r, v) in p.values.iter().enumerate() {
            w.write_record([p.n.to_string(), r.to_string(), v.to_string()])?;
        }
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Reads a summary curve. Requires `n` and `mean`; `stderr` defaults to 0
/// and `replicates` to 1. Other columns are ignored.
pub fn read_curve_csv<R: Read>(input: R, source: &str) -> Result<CollisionCurve> {
    let mut rdr = csv::Reader::from_reader(input);
    let headers = rdr.headers()?.clone();
    let col = |name: &str| headers.iter().position(|h| h.trim() == name);
    let (n_col, mean_col) = match (col("n"), col("mean")) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(Error::MalformedCurve("header needs `n` and `mean` columns".into())),
    };
    let stderr_col = col("stderr");
    let reps_col = col("replicates");
    let mut points = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let field = |i: usize| rec.get(i).unwrap_or("").trim();
        let bad = |what: &str| Error::MalformedCurve(format!("row {}: bad {what}", line + 2));
        let n: u64 = parse_count(field(n_col)).ok_or_else(|| bad("n"))?;
        let mean: f64 = field(mean_col).parse().map_err(|_| bad("mean"))?;
        let stderr = match stderr_col {
            Some(c) => field(c).parse().map_err(|_| bad("stderr"))?,
            None => 0.0,
        };
        let replicates = match reps_col {
            Some(c) => field(c).parse().map_err(|_| bad("replicates"))?,
            None => 1,
        };
        points.push(CurvePoint {
            n,
            replicates,
            mean,
            stderr,
            values: Vec::new(),
        });
    }
    Ok(CollisionCurve {
        source: source.to_string(),
        seed: 0,
        points,
    })
}

/// Accepts plain integers and integral floats such as `1e6`.
pub fn parse_count(s: &str) -> Option<u64> {
    if let Ok(v) = s.parse::<u64>() {
        return Some(v);
    }
    let f: f64 = s.parse().ok()?;
    (f.is_finite() && f >= 0.0 && f.fract() == 0.0 && f < 1.8e19).then_some(f as u64)
}
