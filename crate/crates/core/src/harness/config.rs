//! JSON experiment configs and the reports they produce.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::aggregates::Metric;
use crate::bootstrap::{CiConfig, CiMethod, ResampleStrategy, DEFAULT_COVERAGE};
use crate::error::{Error, Result};
use crate::scores::{load_scores_path, normalize, NormalizationSpec};

use super::experiments::{
    coverage_experiment, estimator_mse, expected_statistic_curve, lift_detection, mean_and_se,
    sampling_distribution, CoverageResult, ExpectedPoint, MsePoint,
};
use super::pool::{generate_pool, ScorePool, SyntheticPoolSpec};
use super::protocol::{protocol_bias, ProtocolStudy, SeriesShape};

/// Bootstrap replicates per interval inside coverage and lift experiments.
pub const DEFAULT_EXPERIMENT_REPLICATES: usize = 1_000;
/// Expected-value curves count as flat when every point is this many
/// standard errors or fewer from the pool truth.
pub const FLATNESS_SE: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Sampling,
    Bias,
    Coverage,
    Lift,
    Mse,
    Protocol,
}

/// Where the population pool comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum PoolSource {
    Synthetic(SyntheticPoolSpec),
    File {
        path: PathBuf,
        /// Required when the file holds several algorithms.
        #[serde(default)]
        algorithm: Option<String>,
        #[serde(default)]
        normalize: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    #[serde(default)]
    pub name: Option<String>,
    pub kind: ExperimentKind,
    pub pool: PoolSource,
    #[serde(default)]
    pub statistic: Option<String>,
    /// Subsample sizes (`n` or `k`).
    pub sizes: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
    #[serde(default)]
    pub replicates: Option<usize>,
    #[serde(default)]
    pub method: Option<CiMethod>,
    #[serde(default)]
    pub nominal: Option<f64>,
    #[serde(default)]
    pub lift_percents: Option<Vec<f64>>,
    #[serde(default)]
    pub trim_fractions: Option<Vec<f64>>,
    #[serde(default)]
    pub series: Option<SeriesShape>,
    #[serde(default)]
    pub configs: Option<usize>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ConfigFile {
    Many { experiments: Vec<serde_json::Value> },
    One(serde_json::Value),
}

fn config_error(key: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Config { key: key.into(), message: message.into() }
}

/// Parses `{"experiments": [...]}` or a single experiment object.
pub fn parse_config(text: &str) -> Result<Vec<ExperimentSpec>> {
    let file: ConfigFile = serde_json::from_str(text)
        .map_err(|e| config_error("$", format!("line {} column {}: {e}", e.line(), e.column())))?;
    let values = match file {
        ConfigFile::Many { experiments } => experiments,
        ConfigFile::One(v) => vec![v],
    };
    values
        .into_iter()
        .enumerate()
        .map(|(i, v)| {
            serde_json::from_value(v).map_err(|e| {
                let msg = e.to_string();
                let key = msg
                    .split('`')
                    .nth(1)
                    .filter(|_| msg.contains("field"))
                    .map(str::to_owned)
                    .unwrap_or_else(|| format!("experiments[{i}]"));
                config_error(key, msg)
            })
        })
        .collect()
}

impl ExperimentSpec {
    fn label(&self, index: usize) -> String {
        self.name.clone().unwrap_or_else(|| format!("experiment{index}"))
    }

    fn metric(&self) -> Result<Metric> {
        let name = self.statistic.as_deref().ok_or_else(|| config_error("statistic", "missing key"))?;
        let metric: Metric = name.parse().map_err(|e: Error| config_error("statistic", e.to_string()))?;
        metric.validate().map_err(|e| config_error("statistic", e.to_string()))?;
        Ok(metric)
    }

    fn ci_config(&self) -> Result<CiConfig> {
        let coverage = self.nominal.unwrap_or(DEFAULT_COVERAGE);
        if !(coverage > 0.0 && coverage < 1.0) {
            return Err(config_error("nominal", format!("must be in (0, 1), got {coverage}")));
        }
        let replicates = self.replicates.unwrap_or(DEFAULT_EXPERIMENT_REPLICATES);
        if replicates < crate::bootstrap::MIN_CI_REPLICATES {
            return Err(config_error("replicates", "must be at least 10"));
        }
        Ok(CiConfig {
            method: self.method.unwrap_or_default(),
            coverage,
            replicates,
            strategy: ResampleStrategy::RUNS,
            seed: self.seed,
        })
    }

    /// Structural checks that do not need the pool.
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(config_error("trials", "must be at least 1"));
        }
        if self.kind != ExperimentKind::Protocol && (self.sizes.is_empty() || self.sizes.contains(&0)) {
            return Err(config_error("sizes", "need at least one positive subsample size"));
        }
        if let PoolSource::Synthetic(spec) = &self.pool {
            spec.validate().map_err(|e| config_error("pool.synthetic", e.to_string()))?;
        }
        match self.kind {
            ExperimentKind::Mse => {
                let trims = self.trim_fractions.as_ref().ok_or_else(|| config_error("trim_fractions", "missing key"))?;
                if trims.is_empty() || trims.iter().any(|t| !(0.0..0.5).contains(t)) {
                    return Err(config_error("trim_fractions", "values must be in [0, 0.5)"));
                }
            }
            ExperimentKind::Protocol => {
                self.metric()?;
                let shape = self.series.ok_or_else(|| config_error("series", "missing key"))?;
                shape.validate().map_err(|e| config_error("series", e.to_string()))?;
                if let Some(c) = self.configs {
                    if c == 0 || shape.runs_per_task % c != 0 {
                        return Err(config_error("configs", "must divide series.runs_per_task"));
                    }
                }
            }
            ExperimentKind::Lift => {
                self.metric()?;
                self.ci_config()?;
                let lifts = self.lift_percents.as_ref().ok_or_else(|| config_error("lift_percents", "missing key"))?;
                if lifts.is_empty() || lifts.iter().any(|l| !(*l >= 0.0 && l.is_finite())) {
                    return Err(config_error("lift_percents", "need non-negative percentages"));
                }
            }
            ExperimentKind::Coverage => {
                self.metric()?;
                self.ci_config()?;
            }
            ExperimentKind::Sampling | ExperimentKind::Bias => {
                self.metric()?;
            }
        }
        Ok(())
    }

    /// Loads or generates the pool; relative file paths resolve against `base`.
    pub fn load_pool(&self, base: &Path) -> Result<ScorePool> {
        match &self.pool {
            PoolSource::Synthetic(spec) => generate_pool(spec),
            PoolSource::File { path, algorithm, normalize: norm } => {
                let mut table = load_scores_path(&base.join(path))?;
                let set = match algorithm {
                    Some(id) => table
                        .shift_remove(id)
                        .ok_or_else(|| config_error("pool.file.algorithm", format!("`{id}` not in file")))?,
                    None if table.len() == 1 => table.swap_remove_index(0).expect("one entry").1,
                    None => return Err(config_error("pool.file.algorithm", "file holds several algorithms")),
                };
                let set = match norm {
                    Some(p) => {
                        let spec = NormalizationSpec::from_json(std::fs::File::open(base.join(p))?)?;
                        normalize(&set, &spec)?
                    }
                    None => set,
                };
                Ok(ScorePool::new(set))
            }
        }
    }
}

/// Pass/fail outcome of a built-in property check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplingSummary {
    pub n: usize,
    pub mean: f64,
    pub standard_error: f64,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiftSummary {
    pub lift_percent: f64,
    pub n: usize,
    pub fraction_containing_zero: f64,
    pub mean_lower: f64,
    pub mean_upper: f64,
    pub mean_observed: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "data", rename_all = "snake_case")]
pub enum ExperimentResult {
    Sampling(Vec<SamplingSummary>),
    Bias(Vec<ExpectedPoint>),
    Coverage(Vec<CoverageResult>),
    Lift(Vec<LiftSummary>),
    Mse(Vec<MsePoint>),
    Protocol(ProtocolStudy),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub name: String,
    pub statistic: Option<String>,
    pub trials: usize,
    pub seed: u64,
    /// Statistic on the full pool.
    pub truth: Option<f64>,
    pub result: ExperimentResult,
    pub checks: Vec<Check>,
}

impl ExperimentReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    /// The result as a flat table: header and rows of formatted numbers.
    pub fn table(&self) -> (Vec<&'static str>, Vec<Vec<String>>) {
        let f = |x: f64| x.to_string();
        match &self.result {
            ExperimentResult::Sampling(rows) => (
                vec!["n", "trial", "value"],
                rows.iter()
                    .flat_map(|r| {
                        r.values.iter().enumerate().map(move |(t, v)| vec![r.n.to_string(), t.to_string(), f(*v)])
                    })
                    .collect(),
            ),
            ExperimentResult::Bias(rows) => (
                vec!["n", "expected", "standard_error"],
                rows.iter().map(|r| vec![r.n.to_string(), f(r.expected), f(r.standard_error)]).collect(),
            ),
            ExperimentResult::Coverage(rows) => (
                vec!["k", "trials", "truth", "coverage_percent", "mean_width"],
                rows.iter()
                    .map(|r| {
                        vec![r.k.to_string(), r.trials.to_string(), f(r.truth), f(r.coverage_percent), f(r.mean_width)]
                    })
                    .collect(),
            ),
            ExperimentResult::Lift(rows) => (
                vec!["lift_percent", "n", "fraction_containing_zero", "mean_lower", "mean_upper", "mean_observed"],
                rows.iter()
                    .map(|r| {
                        vec![
                            f(r.lift_percent),
                            r.n.to_string(),
                            f(r.fraction_containing_zero),
                            f(r.mean_lower),
                            f(r.mean_upper),
                            f(r.mean_observed),
                        ]
                    })
                    .collect(),
            ),
            ExperimentResult::Mse(rows) => (
                vec!["trim_fraction", "truth", "mse"],
                rows.iter().map(|r| vec![f(r.trim_fraction), f(r.truth), f(r.mse)]).collect(),
            ),
            ExperimentResult::Protocol(p) => {
                let opt = |x: Option<f64>| x.map(f).unwrap_or_default();
                (
                    vec!["protocol", "statistic", "bias", "bias_se"],
                    vec![
                        vec!["final".into(), f(p.statistic_final), "0".into(), "0".into()],
                        vec!["max_over_evals".into(), f(p.statistic_max_over_evals), f(p.eval_bias), f(p.eval_bias_se)],
                        vec![
                            "max_over_configs".into(),
                            opt(p.statistic_max_over_configs),
                            opt(p.config_bias),
                            opt(p.config_bias_se),
                        ],
                    ],
                )
            }
        }
    }
}

/// Validates and runs one experiment.
pub fn run_experiment(spec: &ExperimentSpec, index: usize, base: &Path) -> Result<ExperimentReport> {
    spec.validate()?;
    let pool = spec.load_pool(base)?;
    let metric = if spec.kind == ExperimentKind::Mse { None } else { Some(spec.metric()?) };
    let truth = metric.map(|m| m.evaluate(pool.set()));
    let mut checks = Vec::new();
    let result = match spec.kind {
        ExperimentKind::Sampling => {
            let m = metric.expect("metric");
            let rows = spec
                .sizes
                .iter()
                .map(|&n| {
                    let values = sampling_distribution(&pool, n, spec.trials, &m, crate::rng::child_seed(spec.seed, n as u64))?;
                    let (mean, standard_error) = mean_and_se(&values);
                    Ok(SamplingSummary { n, mean, standard_error, values })
                })
                .collect::<Result<Vec<_>>>()?;
            ExperimentResult::Sampling(rows)
        }
        ExperimentKind::Bias => {
            let m = metric.expect("metric");
            let points = expected_statistic_curve(&pool, &spec.sizes, spec.trials, &m, spec.seed)?;
            let truth = truth.expect("truth");
            let worst = points
                .iter()
                .map(|p| {
                    let dev = (p.expected - truth).abs();
                    if p.standard_error > 0.0 {
                        dev / p.standard_error
                    } else if dev == 0.0 {
                        0.0
                    } else {
                        f64::INFINITY
                    }
                })
                .fold(0.0, f64::max);
            checks.push(Check {
                name: "unbiased_within_4se".into(),
                pass: worst <= FLATNESS_SE,
                detail: format!("largest deviation from pool truth: {worst} standard errors"),
            });
            ExperimentResult::Bias(points)
        }
        ExperimentKind::Coverage => {
            let m = metric.expect("metric");
            let cfg = spec.ci_config()?;
            let rows = spec
                .sizes
                .iter()
                .map(|&k| coverage_experiment(&pool, k, spec.trials, &m, &cfg, crate::rng::child_seed(spec.seed, k as u64)))
                .collect::<Result<Vec<_>>>()?;
            ExperimentResult::Coverage(rows)
        }
        ExperimentKind::Lift => {
            let m = metric.expect("metric");
            let cfg = spec.ci_config()?;
            let mut rows = Vec::new();
            for &lift in spec.lift_percents.as_deref().unwrap_or_default() {
                for &n in &spec.sizes {
                    let seed = crate::rng::child_seed(crate::rng::child_seed(spec.seed, n as u64), lift.to_bits());
                    let r = lift_detection(&pool, lift, n, spec.trials, &m, &cfg, seed)?;
                    let k = r.intervals.len() as f64;
                    rows.push(LiftSummary {
                        lift_percent: lift,
                        n,
                        fraction_containing_zero: r.fraction_containing_zero(),
                        mean_lower: r.intervals.iter().map(|c| c.lower).sum::<f64>() / k,
                        mean_upper: r.intervals.iter().map(|c| c.upper).sum::<f64>() / k,
                        mean_observed: r.intervals.iter().map(|c| c.point).sum::<f64>() / k,
                    });
                }
            }
            ExperimentResult::Lift(rows)
        }
        ExperimentKind::Mse => {
            let trims = spec.trim_fractions.as_deref().unwrap_or_default();
            let n = spec.sizes[0];
            ExperimentResult::Mse(estimator_mse(&pool, n, spec.trials, trims, spec.seed)?)
        }
        ExperimentKind::Protocol => {
            let m = metric.expect("metric");
            let shape = spec.series.expect("validated series");
            let study = protocol_bias(&pool, &shape, spec.configs, spec.trials, &m, spec.seed)?;
            checks.push(Check {
                name: "max_over_evals_inflates".into(),
                pass: study.eval_bias > 3.0 * study.eval_bias_se,
                detail: format!("bias {} (se {})", study.eval_bias, study.eval_bias_se),
            });
            ExperimentResult::Protocol(study)
        }
    };
    Ok(ExperimentReport {
        name: spec.label(index),
        statistic: metric.map(|m| m.name().to_owned()),
        trials: spec.trials,
        seed: spec.seed,
        truth,
        result,
        checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const CONSTANT_COVERAGE: &str = r#"{
        "kind": "coverage",
        "pool": {"synthetic": {"tasks": 3, "pool_size": 20, "seed": 1,
                 "families": [{"family": "gaussian", "mean": 0.5, "std": 0.0}]}},
        "statistic": "iqm", "sizes": [5], "trials": 20, "seed": 4, "replicates": 50
    }"#;

    #[test]
    fn constant_pool_full_coverage() {
        let specs = parse_config(CONSTANT_COVERAGE).unwrap();
        let report = run_experiment(&specs[0], 0, Path::new(".")).unwrap();
        match report.result {
            ExperimentResult::Coverage(rows) => assert_eq!(rows[0].coverage_percent, 100.0),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn missing_trials_named() {
        let text = CONSTANT_COVERAGE.replace(r#""trials": 20,"#, "");
        match parse_config(&text) {
            Err(Error::Config { key, .. }) => assert_eq!(key, "trials"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn bad_values_named() {
        let text = CONSTANT_COVERAGE.replace(r#""statistic": "iqm""#, r#""statistic": "iqr""#);
        let spec = &parse_config(&text).unwrap()[0];
        assert!(matches!(spec.validate(), Err(Error::Config { key, .. }) if key == "statistic"));
        let text = CONSTANT_COVERAGE.replace(r#""trials": 20"#, r#""trials": 0"#);
        let spec = &parse_config(&text).unwrap()[0];
        assert!(matches!(spec.validate(), Err(Error::Config { key, .. }) if key == "trials"));
        let text = CONSTANT_COVERAGE.replace(r#""kind": "coverage""#, r#""kind": "mse""#);
        let spec = &parse_config(&text).unwrap()[0];
        assert!(matches!(spec.validate(), Err(Error::Config { key, .. }) if key == "trim_fractions"));
    }

    #[test]
    fn bias_of_mean_passes() {
        let text = r#"{"experiments": [{
            "name": "mean-bias", "kind": "bias",
            "pool": {"synthetic": {"tasks": 5, "pool_size": 100, "seed": 2,
                     "families": [{"family": "lognormal", "mu": 0.0, "sigma": 1.0}]}},
            "statistic": "mean", "sizes": [3, 5, 10], "trials": 5000, "seed": 9
        }]}"#;
        let spec = &parse_config(text).unwrap()[0];
        let report = run_experiment(spec, 0, Path::new(".")).unwrap();
        assert_eq!(report.name, "mean-bias");
        assert!(report.passed(), "{:?}", report.checks);
        let (header, rows) = report.table();
        assert_eq!(header, ["n", "expected", "standard_error"]);
        assert_eq!(rows.len(), 3);
    }
}
