//! Stratified bootstrap resampling and confidence intervals.
//!
//! Replicate `b` always draws from [`rng::substream`]`(seed, b)`, so a
//! bootstrap distribution is a pure function of its inputs and seed no
//! matter how many threads evaluate it.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::aggregates::Metric;
use crate::error::{invalid, Error, Result};
use crate::normal;
use crate::parallel::try_map_indexed;
use crate::rng::{self, SubstreamRng};
use crate::scores::ScoreSet;

/// Replicates used for aggregate-metric intervals.
pub const DEFAULT_REPLICATES: usize = 50_000;
/// Smallest replicate count accepted when building an interval.
pub const MIN_CI_REPLICATES: usize = 10;
pub const DEFAULT_COVERAGE: f64 = 0.95;

/// What gets resampled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ResampleKind {
    /// Runs with replacement independently within every task.
    #[default]
    RunsWithinTasks,
    /// Tasks with replacement, then runs within each drawn task.
    TasksAndRuns,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct ResampleStrategy {
    pub kind: ResampleKind,
    /// Runs drawn per task (m/n bootstrap); `None` draws `N_m`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subsample_size: Option<usize>,
}

impl ResampleStrategy {
    pub const RUNS: ResampleStrategy =
        ResampleStrategy { kind: ResampleKind::RunsWithinTasks, subsample_size: None };
    pub const TASKS_AND_RUNS: ResampleStrategy =
        ResampleStrategy { kind: ResampleKind::TasksAndRuns, subsample_size: None };

    pub fn with_subsample(self, m: usize) -> Self {
        Self { subsample_size: Some(m), ..self }
    }

    /// m/n subsample size used when none is given: `⌈min_m N_m / 2⌉`.
    pub fn default_subsample_size(s: &ScoreSet) -> usize {
        s.run_counts().into_iter().min().unwrap_or(1).div_ceil(2)
    }

    pub fn validate(&self, s: &ScoreSet) -> Result<()> {
        if let Some(m) = self.subsample_size {
            let smallest = s.run_counts().into_iter().min().unwrap_or(0);
            if m == 0 || m > smallest {
                return Err(invalid(format!(
                    "subsample size {m} must be in 1..={smallest} for `{}`",
                    s.algorithm()
                )));
            }
        }
        Ok(())
    }
}

/// Interval construction from a bootstrap distribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum CiMethod {
    #[default]
    Percentile,
    /// Reverse percentile.
    Basic,
    /// Bias-corrected percentile.
    Bc,
    /// Bias-corrected and accelerated.
    Bca,
}

impl CiMethod {
    pub const ALL: [CiMethod; 4] = [CiMethod::Percentile, CiMethod::Basic, CiMethod::Bc, CiMethod::Bca];

    pub fn name(&self) -> &'static str {
        match self {
            CiMethod::Percentile => "percentile",
            CiMethod::Basic => "basic",
            CiMethod::Bc => "bc",
            CiMethod::Bca => "bca",
        }
    }
}

impl fmt::Display for CiMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CiMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CiMethod::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| invalid(format!("unknown interval method `{s}`")))
    }
}

/// A point estimate with its bootstrap interval and everything needed to
/// reproduce it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntervalEstimate {
    pub point: f64,
    pub lower: f64,
    pub upper: f64,
    pub nominal_coverage: f64,
    pub method: CiMethod,
    pub replicates: usize,
    pub seed: u64,
}

impl IntervalEstimate {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, value: f64) -> bool {
        self.lower <= value && value <= self.upper
    }
}

/// Settings shared by every interval computation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CiConfig {
    pub method: CiMethod,
    pub coverage: f64,
    pub replicates: usize,
    pub strategy: ResampleStrategy,
    pub seed: u64,
}

impl Default for CiConfig {
    fn default() -> Self {
        Self {
            method: CiMethod::Percentile,
            coverage: DEFAULT_COVERAGE,
            replicates: DEFAULT_REPLICATES,
            strategy: ResampleStrategy::RUNS,
            seed: 0,
        }
    }
}

/// A real-valued statistic of one score set.
pub trait Statistic: Sync {
    fn evaluate(&self, s: &ScoreSet) -> Result<f64>;
}

impl<F> Statistic for F
where
    F: Fn(&ScoreSet) -> Result<f64> + Sync,
{
    fn evaluate(&self, s: &ScoreSet) -> Result<f64> {
        self(s)
    }
}

impl Statistic for Metric {
    fn evaluate(&self, s: &ScoreSet) -> Result<f64> {
        Ok(Metric::evaluate(self, s))
    }
}

/// A real-valued statistic of several score sets resampled together, e.g.
/// the probability of improvement of one algorithm over another.
pub trait JointStatistic: Sync {
    fn evaluate(&self, sets: &[ScoreSet]) -> Result<f64>;
}

impl<F> JointStatistic for F
where
    F: Fn(&[ScoreSet]) -> Result<f64> + Sync,
{
    fn evaluate(&self, sets: &[ScoreSet]) -> Result<f64> {
        self(sets)
    }
}

struct Single<'a, S: ?Sized>(&'a S);

impl<S: Statistic + ?Sized> JointStatistic for Single<'_, S> {
    fn evaluate(&self, sets: &[ScoreSet]) -> Result<f64> {
        self.0.evaluate(&sets[0])
    }
}

fn draw_runs(runs: &[f64], count: usize, rng: &mut SubstreamRng) -> Vec<f64> {
    let n = runs.len();
    (0..count).map(|_| runs[rng.random_range(0..n)]).collect()
}

/// One stratified bootstrap sample of `s`.
pub fn stratified_resample(
    s: &ScoreSet,
    strategy: &ResampleStrategy,
    rng: &mut SubstreamRng,
) -> Result<ScoreSet> {
    strategy.validate(s)?;
    if strategy.kind == ResampleKind::TasksAndRuns {
        let picks = draw_tasks(s.num_tasks(), rng);
        return Ok(resample_tasks(s, &picks, strategy, rng));
    }
    Ok(resample_runs(s, strategy, rng))
}

fn resample_runs(s: &ScoreSet, strategy: &ResampleStrategy, rng: &mut SubstreamRng) -> ScoreSet {
    let runs = s
        .all_runs()
        .iter()
        .map(|r| draw_runs(r, strategy.subsample_size.unwrap_or(r.len()), rng))
        .collect();
    s.with_runs(runs)
}

fn draw_tasks(m: usize, rng: &mut SubstreamRng) -> Vec<usize> {
    (0..m).map(|_| rng.random_range(0..m)).collect()
}

/// Drawn tasks get positional names (`name#slot`) so that repeated draws of
/// the same task stay distinct, and sets resampled with the same picks stay
/// aligned by name.
fn resample_tasks(
    s: &ScoreSet,
    picks: &[usize],
    strategy: &ResampleStrategy,
    rng: &mut SubstreamRng,
) -> ScoreSet {
    let names: Arc<[String]> =
        picks.iter().enumerate().map(|(slot, &m)| format!("{}#{slot}", s.tasks()[m])).collect();
    let runs = picks
        .iter()
        .map(|&m| {
            let r = s.runs(m);
            draw_runs(r, strategy.subsample_size.unwrap_or(r.len()), rng)
        })
        .collect();
    ScoreSet::from_parts(s.algorithm().to_owned(), names, runs)
}

/// Resamples several sets with one generator. Runs are resampled
/// independently per set; under [`ResampleKind::TasksAndRuns`] all sets
/// share the same task draw, which requires identical task lists.
pub fn resample_joint(
    sets: &[ScoreSet],
    strategy: &ResampleStrategy,
    rng: &mut SubstreamRng,
) -> Vec<ScoreSet> {
    match strategy.kind {
        ResampleKind::RunsWithinTasks => sets.iter().map(|s| resample_runs(s, strategy, rng)).collect(),
        ResampleKind::TasksAndRuns => {
            let picks = draw_tasks(sets[0].num_tasks(), rng);
            sets.iter().map(|s| resample_tasks(s, &picks, strategy, rng)).collect()
        }
    }
}

fn check_joint(sets: &[ScoreSet], strategy: &ResampleStrategy) -> Result<()> {
    let first = sets.first().ok_or_else(|| invalid("no score sets to resample"))?;
    for s in sets {
        strategy.validate(s)?;
        if strategy.kind == ResampleKind::TasksAndRuns && s.tasks() != first.tasks() {
            return Err(Error::TaskMismatch(format!(
                "resampling tasks jointly needs identical task lists (`{}` vs `{}`)",
                first.algorithm(),
                s.algorithm()
            )));
        }
    }
    Ok(())
}

/// Statistic evaluated on `replicates` stratified resamples, in replicate order.
pub fn bootstrap_distribution<S: Statistic + ?Sized>(
    s: &ScoreSet,
    statistic: &S,
    replicates: usize,
    strategy: &ResampleStrategy,
    seed: u64,
) -> Result<Vec<f64>> {
    bootstrap_distribution_joint(std::slice::from_ref(s), &Single(statistic), replicates, strategy, seed)
}

/// Joint version of [`bootstrap_distribution`].
pub fn bootstrap_distribution_joint<S: JointStatistic + ?Sized>(
    sets: &[ScoreSet],
    statistic: &S,
    replicates: usize,
    strategy: &ResampleStrategy,
    seed: u64,
) -> Result<Vec<f64>> {
    if replicates == 0 {
        return Err(invalid("replicates must be at least 1"));
    }
    check_joint(sets, strategy)?;
    try_map_indexed(replicates, |b| {
        let mut rng = rng::substream(seed, b as u64);
        let sample = resample_joint(sets, strategy, &mut rng);
        statistic
            .evaluate(&sample)
            .map_err(|e| Error::Statistic { replicate: b, source: Box::new(e) })
    })
}

/// Point estimate plus bootstrap interval for a single set.
pub fn confidence_interval<S: Statistic + ?Sized>(
    s: &ScoreSet,
    statistic: &S,
    config: &CiConfig,
) -> Result<IntervalEstimate> {
    confidence_interval_joint(std::slice::from_ref(s), &Single(statistic), config)
}

/// Point estimate plus bootstrap interval for a joint statistic.
pub fn confidence_interval_joint<S: JointStatistic + ?Sized>(
    sets: &[ScoreSet],
    statistic: &S,
    config: &CiConfig,
) -> Result<IntervalEstimate> {
    if config.replicates < MIN_CI_REPLICATES {
        return Err(invalid(format!(
            "at least {MIN_CI_REPLICATES} replicates are needed for an interval, got {}",
            config.replicates
        )));
    }
    check_coverage(config.coverage)?;
    let point = statistic.evaluate(sets)?;
    let dist =
        bootstrap_distribution_joint(sets, statistic, config.replicates, &config.strategy, config.seed)?;
    let acceleration = match config.method {
        CiMethod::Bca => jackknife_acceleration(sets, statistic)?,
        _ => 0.0,
    };
    let (lower, upper) = interval_from_replicates(point, &dist, config.method, config.coverage, acceleration)?;
    Ok(IntervalEstimate {
        point,
        lower,
        upper,
        nominal_coverage: config.coverage,
        method: config.method,
        replicates: config.replicates,
        seed: config.seed,
    })
}

fn check_coverage(coverage: f64) -> Result<()> {
    if coverage > 0.0 && coverage < 1.0 {
        Ok(())
    } else {
        Err(invalid(format!("coverage must be in (0, 1), got {coverage}")))
    }
}

/// Maps a bootstrap distribution to `(lower, upper)`.
///
/// `acceleration` is only used by [`CiMethod::Bca`]. Endpoints are swapped if
/// a construction inverts them.
pub fn interval_from_replicates(
    point: f64,
    replicates: &[f64],
    method: CiMethod,
    coverage: f64,
    acceleration: f64,
) -> Result<(f64, f64)> {
    check_coverage(coverage)?;
    let mut sorted = replicates.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    let alpha = 1.0 - coverage;
    let (p_lo, p_hi) = (alpha / 2.0, 1.0 - alpha / 2.0);
    let (a, b) = match method {
        CiMethod::Percentile => (quantile_sorted(&sorted, p_lo)?, quantile_sorted(&sorted, p_hi)?),
        CiMethod::Basic => {
            let (q_lo, q_hi) = (quantile_sorted(&sorted, p_lo)?, quantile_sorted(&sorted, p_hi)?);
            (2.0 * point - q_hi, 2.0 * point - q_lo)
        }
        CiMethod::Bc | CiMethod::Bca => {
            let z0 = bias_correction(point, &sorted);
            let a = if method == CiMethod::Bca { acceleration } else { 0.0 };
            (
                quantile_sorted(&sorted, adjusted_level(p_lo, z0, a))?,
                quantile_sorted(&sorted, adjusted_level(p_hi, z0, a))?,
            )
        }
    };
    Ok(if a <= b { (a, b) } else { (b, a) })
}

/// `z₀ = Φ⁻¹(#{θ* < θ̂} / B)`, with the fraction clamped to
/// `[1/(B+1), B/(B+1)]`.
pub fn bias_correction(point: f64, sorted_replicates: &[f64]) -> f64 {
    let b = sorted_replicates.len() as f64;
    let below = sorted_replicates.partition_point(|&x| x < point) as f64;
    let frac = (below / b).clamp(1.0 / (b + 1.0), b / (b + 1.0));
    normal::quantile(frac)
}

/// Quantile level `Φ(z₀ + (z₀ + z)/(1 − a(z₀ + z)))` with `z = Φ⁻¹(p)`.
pub fn adjusted_level(p: f64, z0: f64, acceleration: f64) -> f64 {
    if z0 == 0.0 && acceleration == 0.0 {
        // Φ(Φ⁻¹(p)) = p.
        return p;
    }
    let z = normal::quantile(p);
    let shifted = z0 + z;
    normal::cdf(z0 + shifted / (1.0 - acceleration * shifted))
}

/// Jackknife acceleration, leaving out one run of one task (of one set) at a
/// time. Runs of single-run tasks cannot be left out and are skipped.
pub fn jackknife_acceleration<S: JointStatistic + ?Sized>(sets: &[ScoreSet], statistic: &S) -> Result<f64> {
    let mut slots = Vec::new();
    for (i, s) in sets.iter().enumerate() {
        for m in 0..s.num_tasks() {
            if s.runs(m).len() > 1 {
                slots.extend((0..s.runs(m).len()).map(|j| (i, m, j)));
            }
        }
    }
    if slots.is_empty() {
        return Ok(0.0);
    }
    let thetas = try_map_indexed(slots.len(), |k| {
        let (i, m, j) = slots[k];
        let mut copy = sets.to_vec();
        let mut runs = copy[i].all_runs().to_vec();
        runs[m].remove(j);
        copy[i] = copy[i].with_runs(runs);
        statistic.evaluate(&copy)
    })?;
    Ok(acceleration_from_jackknife(&thetas))
}

/// `a = Σ(θ̄ − θᵢ)³ / (6 (Σ(θ̄ − θᵢ)²)^{3/2})`, zero when all θᵢ agree.
pub fn acceleration_from_jackknife(thetas: &[f64]) -> f64 {
    let mean = thetas.iter().sum::<f64>() / thetas.len() as f64;
    let (mut num, mut den) = (0.0, 0.0);
    for &t in thetas {
        let d = mean - t;
        num += d * d * d;
        den += d * d;
    }
    if den == 0.0 {
        0.0
    } else {
        num / (6.0 * den.powf(1.5))
    }
}

/// Linear-interpolation empirical quantile (`q = 0` is the minimum,
/// `q = 1` the maximum).
pub fn quantile(samples: &[f64], q: f64) -> Result<f64> {
    let mut sorted = samples.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    quantile_sorted(&sorted, q)
}

/// [`quantile`] on already ascending samples.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> Result<f64> {
    if sorted.is_empty() {
        return Err(invalid("quantile of an empty sample"));
    }
    if !(0.0..=1.0).contains(&q) {
        return Err(invalid(format!("quantile level must be in [0, 1], got {q}")));
    }
    let h = q * (sorted.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    let frac = h - lo as f64;
    if lo == hi || frac == 0.0 {
        return Ok(sorted[lo]);
    }
    Ok(sorted[lo] + frac * (sorted[hi] - sorted[lo]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aggregates::iqm;

    fn set() -> ScoreSet {
        ScoreSet::new("A", [("t1", vec![1.0, 2.0, 3.0]), ("t2", vec![5.0]), ("t3", vec![0.5, 0.25])])
            .unwrap()
    }

    #[test]
    fn quantile_examples() {
        assert_eq!(quantile(&[1.0, 2.0, 3.0], 0.5).unwrap(), 2.0);
        assert_eq!(quantile(&[3.0, 1.0], 0.5).unwrap(), 2.0);
        assert_eq!(quantile(&[4.0, -2.0, 9.0], 1.0).unwrap(), 9.0);
        assert_eq!(quantile(&[4.0, -2.0, 9.0], 0.0).unwrap(), -2.0);
        assert!(quantile(&[], 0.5).is_err());
        assert!(quantile(&[1.0], 1.5).is_err());
    }

    #[test]
    fn single_run_stratum_is_fixed() {
        let s = ScoreSet::new("A", [("t", vec![5.0])]).unwrap();
        let mut rng = rng::substream(1, 0);
        for _ in 0..10 {
            assert_eq!(stratified_resample(&s, &ResampleStrategy::RUNS, &mut rng).unwrap().runs(0), [5.0]);
        }
    }

    #[test]
    fn resample_preserves_structure_and_membership() {
        let s = set();
        let mut rng = rng::substream(3, 0);
        for _ in 0..50 {
            let r = stratified_resample(&s, &ResampleStrategy::RUNS, &mut rng).unwrap();
            assert_eq!(r.tasks(), s.tasks());
            assert_eq!(r.run_counts(), s.run_counts());
            for m in 0..s.num_tasks() {
                assert!(r.runs(m).iter().all(|x| s.runs(m).contains(x)));
            }
        }
    }

    #[test]
    fn resample_is_deterministic() {
        let s = set();
        let a = stratified_resample(&s, &ResampleStrategy::RUNS, &mut rng::substream(9, 4)).unwrap();
        let b = stratified_resample(&s, &ResampleStrategy::RUNS, &mut rng::substream(9, 4)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn tasks_and_runs_draws_whole_tasks() {
        let s = set();
        let mut rng = rng::substream(5, 0);
        for _ in 0..50 {
            let r = stratified_resample(&s, &ResampleStrategy::TASKS_AND_RUNS, &mut rng).unwrap();
            assert_eq!(r.num_tasks(), 3);
            for (name, runs) in r.iter() {
                let original = name.split('#').next().unwrap();
                let source = s.task_runs(original).unwrap();
                assert_eq!(runs.len(), source.len());
                assert!(runs.iter().all(|x| source.contains(x)));
            }
        }
    }

    #[test]
    fn subsample_size_checked() {
        let s = set();
        let mut rng = rng::substream(0, 0);
        assert!(stratified_resample(&s, &ResampleStrategy::RUNS.with_subsample(2), &mut rng).is_err());
        let r = stratified_resample(&s, &ResampleStrategy::RUNS.with_subsample(1), &mut rng).unwrap();
        assert_eq!(r.run_counts(), [1, 1, 1]);
        assert!(ResampleStrategy::RUNS.with_subsample(0).validate(&s).is_err());
        assert_eq!(ResampleStrategy::default_subsample_size(&s), 1);
    }

    #[test]
    fn distribution_shape_and_constant_case() {
        let c = ScoreSet::new("A", [("a", vec![0.3; 4]), ("b", vec![0.3; 2])]).unwrap();
        let d = bootstrap_distribution(&c, &Metric::IQM, 64, &ResampleStrategy::RUNS, 0).unwrap();
        assert_eq!(d.len(), 64);
        assert!(d.iter().all(|&x| x == 0.3));
        let one = bootstrap_distribution(&set(), &Metric::Mean, 1, &ResampleStrategy::RUNS, 0).unwrap();
        assert_eq!(one.len(), 1);
        assert!(bootstrap_distribution(&set(), &Metric::Mean, 0, &ResampleStrategy::RUNS, 0).is_err());
    }

    #[test]
    fn statistic_errors_carry_replicate() {
        let failing = |s: &ScoreSet| -> Result<f64> {
            if s.runs(0)[0] == 3.0 {
                Err(invalid("three"))
            } else {
                Ok(0.0)
            }
        };
        match bootstrap_distribution(&set(), &failing, 200, &ResampleStrategy::RUNS, 1) {
            Err(Error::Statistic { replicate, .. }) => {
                let mut rng = rng::substream(1, replicate as u64);
                let r = stratified_resample(&set(), &ResampleStrategy::RUNS, &mut rng).unwrap();
                assert_eq!(r.runs(0)[0], 3.0);
            }
            other => panic!("expected statistic error, got {other:?}"),
        }
    }

    #[test]
    fn basic_reflects_around_point() {
        // Bootstrap sample whose 2.5th/97.5th percentiles are exactly 8 and 14.
        let mut reps = vec![8.0; 5];
        reps.extend(std::iter::repeat_n(11.0, 71));
        reps.extend(std::iter::repeat_n(14.0, 5));
        let sorted = {
            let mut r = reps.clone();
            r.sort_by(f64::total_cmp);
            r
        };
        assert_eq!(quantile_sorted(&sorted, 0.025).unwrap(), 8.0);
        assert_eq!(quantile_sorted(&sorted, 0.975).unwrap(), 14.0);
        assert_eq!(interval_from_replicates(10.0, &reps, CiMethod::Basic, 0.95, 0.0).unwrap(), (6.0, 12.0));
    }

    #[test]
    fn bc_reduces_to_percentile_when_unbiased() {
        let reps: Vec<f64> = (0..100).map(|i| i as f64).collect();
        // 50 of 100 replicates below 49.5 → z0 = 0.
        assert_eq!(bias_correction(49.5, &reps), 0.0);
        let p = interval_from_replicates(49.5, &reps, CiMethod::Percentile, 0.9, 0.0).unwrap();
        assert_eq!(interval_from_replicates(49.5, &reps, CiMethod::Bc, 0.9, 0.0).unwrap(), p);
        let bc = interval_from_replicates(30.0, &reps, CiMethod::Bc, 0.9, 0.0).unwrap();
        assert_eq!(interval_from_replicates(30.0, &reps, CiMethod::Bca, 0.9, 0.0).unwrap(), bc);
        assert!(bc.0 < p.0 && bc.1 < p.1);
    }

    #[test]
    fn bias_correction_clamps() {
        let reps = [1.0, 2.0, 3.0];
        assert!(bias_correction(0.0, &reps).is_finite());
        assert!(bias_correction(10.0, &reps).is_finite());
        assert!(bias_correction(0.0, &reps) < 0.0);
    }

    #[test]
    fn acceleration_formula() {
        assert_eq!(acceleration_from_jackknife(&[2.0, 2.0, 2.0]), 0.0);
        // Symmetric leave-one-out values have no skew.
        assert_eq!(acceleration_from_jackknife(&[1.0, 2.0, 3.0]), 0.0);
        // mean 1, diffs (1, 1, -2): Σd³ = -6, Σd² = 6.
        let a = acceleration_from_jackknife(&[0.0, 0.0, 3.0]);
        assert!((a - (-6.0 / (6.0 * 6f64.powf(1.5)))).abs() < 1e-15);
    }

    #[test]
    fn constant_data_zero_width_every_method() {
        let c = ScoreSet::new("A", [("a", vec![0.7; 3]), ("b", vec![0.7; 5])]).unwrap();
        for method in CiMethod::ALL {
            let cfg = CiConfig { method, replicates: 200, ..CiConfig::default() };
            let ci = confidence_interval(&c, &Metric::IQM, &cfg).unwrap();
            assert_eq!((ci.point, ci.lower, ci.upper), (0.7, 0.7, 0.7), "{method}");
        }
    }

    #[test]
    fn interval_brackets_point_on_symmetric_data() {
        let s = ScoreSet::new("A", (0..8).map(|m| (format!("t{m}"), (0..6).map(|n| (m * 6 + n) as f64).collect())))
            .unwrap();
        let stat = |s: &ScoreSet| -> Result<f64> { Ok(iqm(s, 0.25)) };
        for method in CiMethod::ALL {
            let cfg = CiConfig { method, replicates: 2000, seed: 11, ..CiConfig::default() };
            let ci = confidence_interval(&s, &stat, &cfg).unwrap();
            assert!(ci.lower < ci.point && ci.point < ci.upper, "{method}: {ci:?}");
            assert_eq!(ci.replicates, 2000);
            assert_eq!(ci.seed, 11);
        }
    }

    #[test]
    fn interval_argument_checks() {
        let cfg = CiConfig { replicates: 9, ..CiConfig::default() };
        assert!(confidence_interval(&set(), &Metric::Mean, &cfg).is_err());
        let cfg = CiConfig { coverage: 1.0, replicates: 100, ..CiConfig::default() };
        assert!(confidence_interval(&set(), &Metric::Mean, &cfg).is_err());
    }

    #[test]
    fn method_names_round_trip() {
        for m in CiMethod::ALL {
            assert_eq!(m.name().parse::<CiMethod>().unwrap(), m);
        }
        assert!("student".parse::<CiMethod>().is_err());
    }
}
