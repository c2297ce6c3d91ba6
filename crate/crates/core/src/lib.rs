//! Estimating how often people share a (first name, last name) identity.
//!
//! The proportion of a group of size `n` with at least one homonym is a
//! generalized birthday problem over a heavily skewed label distribution.
//! This crate estimates it by seeded, schedule-independent Monte Carlo,
//! checks the estimates against exact expectations, fits Zipf laws to name
//! frequencies, and extrapolates curves to population sizes on a probit or
//! logit scale.

pub mod collision;
pub mod dist;
pub mod error;
pub mod extrapolate;
pub mod ingest;
pub mod normal;
pub mod pairs;
pub mod sampler;
pub mod stream;

pub use collision::{
    analytic_expected_proportion, brute_force_expected_proportion, estimate_curve, estimate_curve_with_workers,
    homonym_proportion_once, uniform_all_distinct_approx, uniform_all_distinct_exact, CollisionCurve, CurvePoint,
    LabelSource, SimulationPlan,
};
pub use dist::{build_dist, fit_zipf, top_share, zipf_pmf, CategoricalDist, ZipfFit};
pub use error::{Error, Result};
pub use extrapolate::{fit_transformed, logit, predict, probit, FitOptions, Transform, TransformFit};
pub use ingest::{load_frequency_table, load_pair_records, normalize_name, FrequencyTable, IngestReport};
pub use pairs::{
    empirical_pair_sampler, independent_product_sampler, pearson_residuals, EmpiricalPairSampler,
    IndependentPairSampler, JointDist, ResidualTable,
};
pub use stream::Stream;
