//! Monte Carlo studies of estimator behaviour on a [`ScorePool`].
//!
//! Trial `t` draws its subsample from substream `t` of the experiment seed;
//! any bootstrap inside the trial uses `child_seed(seed, t)`.

use serde::{Deserialize, Serialize};

use crate::aggregates::trimmed_mean_in_place;
use crate::bootstrap::{confidence_interval, confidence_interval_joint, CiConfig, IntervalEstimate, Statistic};
use crate::error::{invalid, Result};
use crate::parallel::{map_indexed, try_map_indexed};
use crate::rng;
use crate::scores::ScoreSet;

use super::pool::ScorePool;

fn check_trials(trials: usize) -> Result<()> {
    if trials == 0 {
        Err(invalid("trials must be at least 1"))
    } else {
        Ok(())
    }
}

/// Statistic over `trials` sets of `n` runs per task drawn with replacement.
pub fn sampling_distribution<S: Statistic + ?Sized>(
    pool: &ScorePool,
    n: usize,
    trials: usize,
    statistic: &S,
    seed: u64,
) -> Result<Vec<f64>> {
    check_trials(trials)?;
    if n == 0 {
        return Err(invalid("subsample size must be at least 1"));
    }
    try_map_indexed(trials, |t| {
        let mut rng = rng::substream(seed, t as u64);
        statistic.evaluate(&pool.draw_with_replacement(n, &mut rng))
    })
}

/// Monte Carlo expectation of a statistic at one subsample size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpectedPoint {
    pub n: usize,
    pub expected: f64,
    pub standard_error: f64,
}

/// Mean and Monte Carlo standard error of `values`.
pub fn mean_and_se(values: &[f64]) -> (f64, f64) {
    let k = values.len() as f64;
    let mean = values.iter().sum::<f64>() / k;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1.0);
    (mean, (var / k).sqrt())
}

/// Expected statistic per subsample size; size `n` uses `child_seed(seed, n)`.
pub fn expected_statistic_curve<S: Statistic + ?Sized>(
    pool: &ScorePool,
    ns: &[usize],
    trials: usize,
    statistic: &S,
    seed: u64,
) -> Result<Vec<ExpectedPoint>> {
    ns.iter()
        .map(|&n| {
            let dist = sampling_distribution(pool, n, trials, statistic, rng::child_seed(seed, n as u64))?;
            let (expected, standard_error) = mean_and_se(&dist);
            Ok(ExpectedPoint { n, expected, standard_error })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoverageResult {
    pub k: usize,
    pub trials: usize,
    pub truth: f64,
    /// Percentage of intervals containing the pool truth.
    pub coverage_percent: f64,
    pub mean_width: f64,
}

/// Builds an interval on `trials` sets of `k` runs per task drawn without
/// replacement and counts how often it contains the full-pool statistic.
pub fn coverage_experiment<S: Statistic + ?Sized>(
    pool: &ScorePool,
    k: usize,
    trials: usize,
    statistic: &S,
    config: &CiConfig,
    seed: u64,
) -> Result<CoverageResult> {
    check_trials(trials)?;
    if k == 0 || k > pool.min_runs() {
        return Err(invalid(format!("subsample size {k} must be in 1..={}", pool.min_runs())));
    }
    let truth = pool.truth(statistic)?;
    let intervals = try_map_indexed(trials, |t| {
        let mut rng = rng::substream(seed, t as u64);
        let sample = pool.draw_without_replacement(k, &mut rng);
        let cfg = CiConfig { seed: rng::child_seed(seed, t as u64), ..*config };
        confidence_interval(&sample, statistic, &cfg)
    })?;
    let hits = intervals.iter().filter(|ci| ci.contains(truth)).count();
    let mean_width = intervals.iter().map(IntervalEstimate::width).sum::<f64>() / trials as f64;
    Ok(CoverageResult {
        k,
        trials,
        truth,
        coverage_percent: 100.0 * hits as f64 / trials as f64,
        mean_width,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiftResult {
    pub lift_percent: f64,
    pub n: usize,
    /// Per-trial interval on the observed lift.
    pub intervals: Vec<IntervalEstimate>,
    /// Whether each trial reported a relative lift (positive base statistic)
    /// instead of an absolute difference.
    pub relative: Vec<bool>,
}

impl LiftResult {
    pub fn fraction_containing_zero(&self) -> f64 {
        self.intervals.iter().filter(|ci| ci.contains(0.0)).count() as f64 / self.intervals.len() as f64
    }

    pub fn fraction_excluding_zero(&self) -> f64 {
        1.0 - self.fraction_containing_zero()
    }
}

fn observed_lift<S: Statistic + ?Sized>(statistic: &S, relative: bool, sets: &[ScoreSet]) -> Result<f64> {
    let base = statistic.evaluate(&sets[0])?;
    let lifted = statistic.evaluate(&sets[1])?;
    Ok(if relative { (lifted - base) / base } else { lifted - base })
}

/// Two independent `n`-run subsamples per trial; the second is scaled by
/// `1 + lift/100` and the lift in the statistic gets a stratified bootstrap
/// interval (both subsamples resampled independently).
pub fn lift_detection<S: Statistic + ?Sized>(
    pool: &ScorePool,
    lift_percent: f64,
    n: usize,
    trials: usize,
    statistic: &S,
    config: &CiConfig,
    seed: u64,
) -> Result<LiftResult> {
    check_trials(trials)?;
    if !(lift_percent >= 0.0 && lift_percent.is_finite()) {
        return Err(invalid(format!("lift must be a non-negative percentage, got {lift_percent}")));
    }
    if n == 0 {
        return Err(invalid("subsample size must be at least 1"));
    }
    let factor = 1.0 + lift_percent / 100.0;
    let per_trial = try_map_indexed(trials, |t| {
        let mut rng = rng::substream(seed, t as u64);
        let base = pool.draw_with_replacement(n, &mut rng);
        let other = pool.draw_with_replacement(n, &mut rng);
        let lifted = other.with_runs(
            other.all_runs().iter().map(|r| r.iter().map(|x| x * factor).collect()).collect(),
        );
        let relative = statistic.evaluate(&base)? > 0.0;
        let lift = |sets: &[ScoreSet]| observed_lift(statistic, relative, sets);
        let cfg = CiConfig { seed: rng::child_seed(seed, t as u64), ..*config };
        let ci = confidence_interval_joint(&[base, lifted], &lift, &cfg)?;
        Ok((ci, relative))
    })?;
    let (intervals, relative) = per_trial.into_iter().unzip();
    Ok(LiftResult { lift_percent, n, intervals, relative })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MsePoint {
    pub trim_fraction: f64,
    pub truth: f64,
    pub mse: f64,
}

/// Mean squared error of pooled trimmed means from `n`-run subsamples
/// (with replacement) against the same trimmed mean of the full pool.
/// Every trim level sees the same subsamples.
pub fn estimator_mse(
    pool: &ScorePool,
    n: usize,
    trials: usize,
    trim_fractions: &[f64],
    seed: u64,
) -> Result<Vec<MsePoint>> {
    check_trials(trials)?;
    if n == 0 {
        return Err(invalid("subsample size must be at least 1"));
    }
    if let Some(t) = trim_fractions.iter().find(|t| !(0.0..0.5).contains(*t)) {
        return Err(invalid(format!("trim fraction must be in [0, 0.5), got {t}")));
    }
    let truths: Vec<f64> = trim_fractions
        .iter()
        .map(|&trim| trimmed_mean_in_place(&mut pool.set().pooled_scores(), trim))
        .collect();
    let errors: Vec<Vec<f64>> = map_indexed(trials, |t| {
        let mut rng = rng::substream(seed, t as u64);
        let mut pooled = pool.draw_with_replacement(n, &mut rng).pooled_scores();
        trim_fractions
            .iter()
            .zip(&truths)
            .map(|(&trim, truth)| (trimmed_mean_in_place(&mut pooled, trim) - truth).powi(2))
            .collect()
    });
    Ok(trim_fractions
        .iter()
        .enumerate()
        .map(|(i, &trim_fraction)| MsePoint {
            trim_fraction,
            truth: truths[i],
            mse: errors.iter().map(|e| e[i]).sum::<f64>() / trials as f64,
        })
        .collect())
}
