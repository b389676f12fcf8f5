//! Monte Carlo harness for validating the estimators themselves.

pub mod config;
pub mod experiments;
pub mod pool;
pub mod protocol;

pub use config::{parse_config, run_experiment, ExperimentKind, ExperimentReport, ExperimentResult, ExperimentSpec, PoolSource};
pub use experiments::{
    coverage_experiment, estimator_mse, expected_statistic_curve, lift_detection, mean_and_se,
    sampling_distribution, CoverageResult, ExpectedPoint, LiftResult, MsePoint,
};
pub use pool::{generate_pool, Component, Family, ScorePool, SyntheticPoolSpec};
pub use protocol::{protocol_bias, protocol_scores, simulate_eval_series, EvalSeries, Protocol, ProtocolStudy, SeriesShape};
