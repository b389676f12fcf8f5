//! Evaluation-protocol simulation: how reporting the maximum over
//! evaluations or over hyperparameter configurations inflates scores.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::bootstrap::Statistic;
use crate::error::{invalid, Error, Result};
use crate::parallel::try_map_indexed;
use crate::rng::{self, SubstreamRng};
use crate::scores::ScoreSet;

use super::experiments::mean_and_se;
use super::pool::ScorePool;

/// Evaluation scores recorded during training, `series[m][run][eval]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalSeries {
    algorithm: String,
    tasks: Vec<String>,
    series: Vec<Vec<Vec<f64>>>,
}

impl EvalSeries {
    pub fn new(algorithm: impl Into<String>, tasks: Vec<String>, series: Vec<Vec<Vec<f64>>>) -> Result<Self> {
        if tasks.len() != series.len() || tasks.is_empty() {
            return Err(Error::Validation("evaluation series need one entry per task".into()));
        }
        for (task, runs) in tasks.iter().zip(&series) {
            if runs.is_empty() {
                return Err(Error::Validation(format!("task `{task}` has no runs")));
            }
            if runs.iter().any(Vec::is_empty) {
                return Err(Error::Validation(format!("task `{task}` has an empty evaluation series")));
            }
            if runs.iter().flatten().any(|x| !x.is_finite()) {
                return Err(Error::Validation(format!("task `{task}` has a non-finite evaluation")));
            }
        }
        Ok(Self { algorithm: algorithm.into(), tasks, series })
    }

    pub fn tasks(&self) -> &[String] {
        &self.tasks
    }

    pub fn runs(&self, m: usize) -> &[Vec<f64>] {
        &self.series[m]
    }
}

/// How a per-run score is extracted from training-time evaluations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "protocol", rename_all = "snake_case")]
pub enum Protocol {
    /// Last evaluation of each run.
    Final,
    /// Best evaluation of each run.
    MaxOverEvals,
    /// Runs split into `configs` consecutive equal groups; the best group
    /// mean of final scores becomes the task's single score.
    MaxOverConfigs { configs: usize },
}

pub fn protocol_scores(series: &EvalSeries, protocol: Protocol) -> Result<ScoreSet> {
    let tasks = series
        .tasks
        .iter()
        .zip(&series.series)
        .map(|(task, runs)| {
            let last = |r: &Vec<f64>| r[r.len() - 1];
            let scores = match protocol {
                Protocol::Final => runs.iter().map(last).collect(),
                Protocol::MaxOverEvals => {
                    runs.iter().map(|r| r.iter().copied().fold(f64::NEG_INFINITY, f64::max)).collect()
                }
                Protocol::MaxOverConfigs { configs } => {
                    if configs == 0 || runs.len() % configs != 0 {
                        return Err(invalid(format!(
                            "task `{task}` has {} runs, which do not split into {configs} equal configs",
                            runs.len()
                        )));
                    }
                    let size = runs.len() / configs;
                    let best = runs
                        .chunks(size)
                        .map(|group| group.iter().map(last).sum::<f64>() / size as f64)
                        .fold(f64::NEG_INFINITY, f64::max);
                    vec![best]
                }
            };
            Ok((task.clone(), scores))
        })
        .collect::<Result<Vec<_>>>()?;
    ScoreSet::new(series.algorithm.clone(), tasks)
}

/// Shape of synthetic training curves: each run's plateau is a pool draw;
/// evaluations ramp linearly up to it over the first half of training and
/// carry Gaussian noise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesShape {
    pub runs_per_task: usize,
    pub evaluations: usize,
    /// Noise standard deviation relative to the plateau magnitude.
    pub noise: f64,
}

impl SeriesShape {
    pub fn validate(&self) -> Result<()> {
        if self.runs_per_task == 0 || self.evaluations == 0 {
            return Err(invalid("series need at least one run and one evaluation"));
        }
        if !(self.noise >= 0.0 && self.noise.is_finite()) {
            return Err(invalid(format!("noise must be finite and ≥ 0, got {}", self.noise)));
        }
        Ok(())
    }
}

pub fn simulate_eval_series(pool: &ScorePool, shape: &SeriesShape, rng: &mut SubstreamRng) -> Result<EvalSeries> {
    shape.validate()?;
    let ramp = (shape.evaluations / 2).max(1) as f64;
    let series = pool
        .set()
        .all_runs()
        .iter()
        .map(|r| {
            (0..shape.runs_per_task)
                .map(|_| {
                    let plateau = r[rng.random_range(0..r.len())];
                    let noise = Normal::new(0.0, shape.noise * plateau.abs()).expect("validated noise");
                    (0..shape.evaluations)
                        .map(|k| plateau * ((k + 1) as f64 / ramp).min(1.0) + noise.sample(rng))
                        .collect()
                })
                .collect()
        })
        .collect();
    EvalSeries::new(pool.set().algorithm(), pool.set().tasks().to_vec(), series)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolStudy {
    pub trials: usize,
    pub statistic_final: f64,
    pub statistic_max_over_evals: f64,
    pub statistic_max_over_configs: Option<f64>,
    /// Mean over trials of `stat(max_over_evals) − stat(final)`.
    pub eval_bias: f64,
    pub eval_bias_se: f64,
    pub config_bias: Option<f64>,
    pub config_bias_se: Option<f64>,
}

/// Repeats the simulation `trials` times and compares the statistic under
/// each protocol on the same simulated series.
pub fn protocol_bias<S: Statistic + ?Sized>(
    pool: &ScorePool,
    shape: &SeriesShape,
    configs: Option<usize>,
    trials: usize,
    statistic: &S,
    seed: u64,
) -> Result<ProtocolStudy> {
    if trials == 0 {
        return Err(invalid("trials must be at least 1"));
    }
    let rows = try_map_indexed(trials, |t| {
        let mut rng = rng::substream(seed, t as u64);
        let series = simulate_eval_series(pool, shape, &mut rng)?;
        let fin = statistic.evaluate(&protocol_scores(&series, Protocol::Final)?)?;
        let max = statistic.evaluate(&protocol_scores(&series, Protocol::MaxOverEvals)?)?;
        let cfg = configs
            .map(|c| statistic.evaluate(&protocol_scores(&series, Protocol::MaxOverConfigs { configs: c })?))
            .transpose()?;
        Ok((fin, max, cfg))
    })?;
    let finals: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let maxes: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let eval_diffs: Vec<f64> = rows.iter().map(|r| r.1 - r.0).collect();
    let (eval_bias, eval_bias_se) = mean_and_se(&eval_diffs);
    let (cfg_mean, config_bias, config_bias_se) = if configs.is_some() {
        let cfgs: Vec<f64> = rows.iter().map(|r| r.2.unwrap_or_default()).collect();
        let diffs: Vec<f64> = rows.iter().map(|r| r.2.unwrap_or_default() - r.0).collect();
        let (b, se) = mean_and_se(&diffs);
        (Some(mean_and_se(&cfgs).0), Some(b), Some(se))
    } else {
        (None, None, None)
    };
    Ok(ProtocolStudy {
        trials,
        statistic_final: mean_and_se(&finals).0,
        statistic_max_over_evals: mean_and_se(&maxes).0,
        statistic_max_over_configs: cfg_mean,
        eval_bias,
        eval_bias_se,
        config_bias,
        config_bias_se,
    })
}
