//! Statistically careful evaluation of algorithms benchmarked over many
//! tasks with few runs each.
//!
//! - [`scores`]: the tasks × runs data model, JSON/CSV ingestion, normalization
//! - [`aggregates`]: mean, median, IQM, optimality gap, probability of improvement, ...
//! - [`bootstrap`]: stratified resampling and percentile/basic/BC/BCa intervals
//! - [`profiles`]: score distributions with bands, rank distributions
//! - [`harness`]: Monte Carlo checks of coverage, bias, lift detection and MSE
//!
//! All randomized routines take an explicit seed and are reproducible
//! bit-for-bit regardless of the `parallel` feature or thread count.

pub mod aggregates;
pub mod bootstrap;
pub mod error;
pub mod harness;
pub mod normal;
pub mod parallel;
pub mod profiles;
pub mod rng;
pub mod scores;

pub use aggregates::Metric;
pub use bootstrap::{CiConfig, CiMethod, IntervalEstimate, ResampleKind, ResampleStrategy};
pub use error::{Error, Result};
pub use profiles::{ProfileCurve, ProfileKind, RankDistribution};
pub use scores::{NormalizationSpec, ScoreFormat, ScoreSet, ScoreTable};
