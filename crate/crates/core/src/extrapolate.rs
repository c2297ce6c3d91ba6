//! Linearization of collision curves against `log n` and extrapolation.
//!
//! On a logit or probit scale the homonym proportion is close to linear in
//! the natural log of the group size, `T(P_n) ≈ a + b·ln n`. A line is fitted
//! on a window of small group sizes and pushed out to population scale.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::collision::CollisionCurve;
use crate::error::{Error, Result};
use crate::normal;

/// `log(u / (1 - u))`.
pub fn logit(u: f64) -> Result<f64> {
    check_open_unit(u)?;
    Ok((u / (1.0 - u)).ln())
}

/// Inverse standard normal CDF.
pub fn probit(u: f64) -> Result<f64> {
    check_open_unit(u)?;
    Ok(normal::quantile(u))
}

fn check_open_unit(u: f64) -> Result<()> {
    if u > 0.0 && u < 1.0 {
        Ok(())
    } else {
        Err(Error::OutOfDomain { value: u })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Transform {
    Logit,
    Probit,
}

impl Transform {
    pub fn apply(self, u: f64) -> Result<f64> {
        match self {
            Transform::Logit => logit(u),
            Transform::Probit => probit(u),
        }
    }

    pub fn inverse(self, x: f64) -> f64 {
        match self {
            Transform::Logit => {
                if x >= 0.0 {
                    1.0 / (1.0 + (-x).exp())
                } else {
                    let e = x.exp();
                    e / (1.0 + e)
                }
            }
            Transform::Probit => normal::cdf(x),
        }
    }

    /// `dT/du` at `u`.
    fn derivative(self, u: f64) -> f64 {
        match self {
            Transform::Logit => 1.0 / (u * (1.0 - u)),
            Transform::Probit => 1.0 / normal::pdf(normal::quantile(u)),
        }
    }
}

impl fmt::Display for Transform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Transform::Logit => "logit",
            Transform::Probit => "probit",
        })
    }
}

impl FromStr for Transform {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "logit" => Ok(Transform::Logit),
            "probit" => Ok(Transform::Probit),
            other => Err(format!("unknown transform `{other}` (expected logit or probit)")),
        }
    }
}

/// Half a draw out of all draws at a grid point: `1 / (2·n·replicates)`.
pub fn clamp_epsilon(n: u64, replicates: u32) -> f64 {
    1.0 / (2.0 * n.max(1) as f64 * f64::from(replicates.max(1)))
}

pub const DEFAULT_WINDOW: (f64, f64) = (5_000.0, 50_000.0);

/// A line `T(P) = a + b·ln n` fitted on `[n_min, n_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TransformFit {
    pub transform: Transform,
    #[serde(rename = "a")]
    pub intercept: f64,
    #[serde(rename = "b")]
    pub slope: f64,
    pub n_min: f64,
    pub n_max: f64,
    pub r_squared: f64,
    /// Smallest clamp applied to an in-window mean.
    #[serde(skip)]
    pub clamp_epsilon: f64,
}

impl TransformFit {
    /// Extrapolated proportion at group size `n`, always inside `(0, 1)`.
    pub fn predict(&self, n: f64) -> f64 {
        let x = self.intercept + self.slope * n.max(1.0).ln();
        let below_one = 1.0 - f64::EPSILON / 2.0;
        self.transform.inverse(x).clamp(f64::MIN_POSITIVE, below_one)
    }
}

pub fn predict(fit: &TransformFit, n: f64) -> f64 {
    fit.predict(n)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    pub transform: Transform,
    pub window: (f64, f64),
    /// Weight points by the inverse delta-method variance of `T(mean)`.
    pub weighted: bool,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            transform: Transform::Probit,
            window: DEFAULT_WINDOW,
            weighted: false,
        }
    }
}

/// Unweighted least squares of `T(clamped mean)` on `ln n` in the window.
pub fn fit_transformed(curve: &CollisionCurve, transform: Transform, window: (f64, f64)) -> Result<TransformFit> {
    fit_with(
        curve,
        &FitOptions {
            transform,
            window,
            weighted: false,
        },
    )
}

pub fn fit_with(curve: &CollisionCurve, opts: &FitOptions) -> Result<TransformFit> {
    let (n_min, n_max) = opts.window;
    let mut selected: Vec<_> = curve
        .points
        .iter()
        .filter(|p| (p.n as f64) >= n_min && (p.n as f64) <= n_max)
        .collect();
    if n_min.partial_cmp(&n_max) != Some(std::cmp::Ordering::Less) || selected.len() < 3 {
        return Err(Error::InsufficientPoints {
            n_min,
            n_max,
            found: if n_min < n_max { selected.len() } else { 0 },
        });
    }
    // Fixed summation order regardless of input order.
    selected.sort_by(|a, b| a.n.cmp(&b.n).then(a.mean.total_cmp(&b.mean)));

    let mut min_eps = f64::INFINITY;
    let mut saturated = 0usize;
    let mut rows = Vec::with_capacity(selected.len());
    for p in &selected {
        let eps = clamp_epsilon(p.n, p.replicates);
        min_eps = min_eps.min(eps);
        if !(p.mean > 0.0 && p.mean < 1.0) {
            saturated += 1;
        }
        let u = p.mean.clamp(eps, 1.0 - eps);
        let y = opts.transform.apply(u)?;
        let weight = if opts.weighted {
            let sd = p.stderr * opts.transform.derivative(u);
            if sd > 0.0 {
                1.0 / (sd * sd)
            } else {
                f64::NAN
            }
        } else {
            1.0
        };
        rows.push(((p.n as f64).ln(), y, weight));
    }
    if saturated == rows.len() {
        return Err(Error::AllSaturated);
    }
    if opts.weighted {
        // Points with zero spread get the largest finite weight present.
        let cap = rows
            .iter()
            .map(|r| r.2)
            .filter(|w| w.is_finite())
            .fold(f64::NAN, f64::max);
        let cap = if cap.is_nan() { 1.0 } else { cap };
        for r in &mut rows {
            if !r.2.is_finite() {
                r.2 = cap;
            }
        }
    }

    let (intercept, slope, r_squared) = weighted_least_squares(&rows);
    Ok(TransformFit {
        transform: opts.transform,
        intercept,
        slope,
        n_min,
        n_max,
        r_squared,
        clamp_epsilon: min_eps,
    })
}

/// Returns `(intercept, slope, r²)` for rows `(x, y, weight)`.
fn weighted_least_squares(rows: &[(f64, f64, f64)]) -> (f64, f64, f64) {
    let sw: f64 = rows.iter().map(|r| r.2).sum();
    let mx = rows.iter().map(|r| r.2 * r.0).sum::<f64>() / sw;
    let my = rows.iter().map(|r| r.2 * r.1).sum::<f64>() / sw;
    let sxx: f64 = rows.iter().map(|r| r.2 * (r.0 - mx).powi(2)).sum();
    let sxy: f64 = rows.iter().map(|r| r.2 * (r.0 - mx) * (r.1 - my)).sum();
    let syy: f64 = rows.iter().map(|r| r.2 * (r.1 - my).powi(2)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let ss_res: f64 = rows
        .iter()
        .map(|r| r.2 * (r.1 - intercept - slope * r.0).powi(2))
        .sum();
    let r_squared = if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 };
    (intercept, slope, r_squared.clamp(0.0, 1.0))
}

/// Writes `n,predicted` for each target group size.
pub fn write_predictions_csv<W: Write>(fit: &TransformFit, targets: &[f64], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["n", "predicted"])?;
    for &n in targets {
        w.write_record([format_n(n), fit.predict(n).to_string()])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

fn format_n(n: f64) -> String {
    if n.fract() == 0.0 && n.abs() < 1e18 {
        format!("{}", n as u64)
    } else {
        n.to_string()
    }
}
