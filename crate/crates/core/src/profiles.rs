//! Performance profiles: empirical tail functions of run scores or task
//! means, bootstrap bands, variance diagnostics, axis rescaling and rank
//! distributions.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bootstrap::{self, ResampleStrategy};
use crate::error::{invalid, Result};
use crate::parallel::{fold_chunks, map_indexed};
use crate::rng;
use crate::scores::ScoreSet;

/// Replicates used for pointwise bands.
pub const DEFAULT_BAND_REPLICATES: usize = 2_000;
/// Replicates used for rank distributions.
pub const DEFAULT_RANK_REPLICATES: usize = 200_000;
/// Within-task resamples behind the task-mean variance plug-in.
pub const TASK_MEAN_PLUGIN_RESAMPLES: usize = 500;

/// Fraction of `samples` strictly greater than `tau`.
pub fn empirical_tail(samples: &[f64], tau: f64) -> Result<f64> {
    if samples.is_empty() {
        return Err(invalid("tail fraction of an empty sample"));
    }
    Ok(samples.iter().filter(|&&x| x > tau).count() as f64 / samples.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ProfileKind {
    /// Task-balanced tail over all runs.
    #[default]
    RunScores,
    /// Tail over the task means.
    TaskMeans,
}

/// A tail function sampled on an ascending τ grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileCurve {
    kind: ProfileKind,
    taus: Vec<f64>,
    values: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    bands: Option<Vec<(f64, f64)>>,
}

impl ProfileCurve {
    pub fn kind(&self) -> ProfileKind {
        self.kind
    }

    pub fn taus(&self) -> &[f64] {
        &self.taus
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn bands(&self) -> Option<&[(f64, f64)]> {
        self.bands.as_deref()
    }

    /// `(τ, value, lower, upper)` rows for export.
    pub fn records(&self) -> impl Iterator<Item = (f64, f64, Option<(f64, f64)>)> + '_ {
        self.taus
            .iter()
            .zip(&self.values)
            .enumerate()
            .map(|(i, (&t, &v))| (t, v, self.bands.as_ref().map(|b| b[i])))
    }

    /// Tail value at an arbitrary τ under right-continuous step interpolation.
    pub fn value_at(&self, tau: f64) -> f64 {
        let i = self.taus.partition_point(|&t| t <= tau);
        if i == 0 {
            self.values[0]
        } else {
            self.values[i - 1]
        }
    }
}

fn check_grid(taus: &[f64]) -> Result<()> {
    if taus.is_empty() {
        return Err(invalid("profile grid is empty"));
    }
    if taus.iter().any(|t| !t.is_finite()) {
        return Err(invalid("profile grid contains a non-finite threshold"));
    }
    if taus.windows(2).any(|w| w[0] >= w[1]) {
        return Err(invalid("profile grid must be strictly ascending"));
    }
    Ok(())
}

/// Every distinct pooled score of `sets`, plus one point below the minimum
/// and one above the maximum, so the grid contains every jump.
pub fn default_grid(sets: &[ScoreSet]) -> Vec<f64> {
    let mut all: Vec<f64> = sets.iter().flat_map(|s| s.pooled_scores()).collect();
    if all.is_empty() {
        return Vec::new();
    }
    all.sort_unstable_by(f64::total_cmp);
    all.dedup();
    let (lo, hi) = (all[0], all[all.len() - 1]);
    let span = hi - lo;
    let pad = if span > 0.0 { 0.05 * span } else { (0.05 * lo.abs()).max(0.05) };
    let mut grid = Vec::with_capacity(all.len() + 2);
    grid.push(lo - pad);
    grid.extend(all);
    grid.push(hi + pad);
    grid
}

/// `n` evenly spaced thresholds over `[lo, hi]`.
pub fn linear_grid(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    if n < 2 || lo.partial_cmp(&hi) != Some(std::cmp::Ordering::Less) {
        return Err(invalid(format!("linear grid needs lo < hi and n ≥ 2 (got {lo}, {hi}, {n})")));
    }
    let step = (hi - lo) / (n - 1) as f64;
    Ok((0..n).map(|i| if i == n - 1 { hi } else { lo + step * i as f64 }).collect())
}

/// Ascending copies of every task's runs, for repeated tail queries.
struct SortedTasks(Vec<Vec<f64>>);

impl SortedTasks {
    fn new(s: &ScoreSet) -> Self {
        Self(
            s.all_runs()
                .iter()
                .map(|r| {
                    let mut r = r.clone();
                    r.sort_unstable_by(f64::total_cmp);
                    r
                })
                .collect(),
        )
    }

    fn run_tail(&self, tau: f64) -> f64 {
        let above = |r: &Vec<f64>| r.len() - r.partition_point(|&x| x <= tau);
        let n = self.0[0].len();
        if self.0.iter().all(|r| r.len() == n) {
            // Equal run counts: one division, identical to the pooled tail.
            let total: usize = self.0.iter().map(above).sum();
            return total as f64 / (n * self.0.len()) as f64;
        }
        let sum: f64 = self.0.iter().map(|r| above(r) as f64 / r.len() as f64).sum();
        sum / self.0.len() as f64
    }
}

fn sorted_means(s: &ScoreSet) -> Vec<f64> {
    let mut means = s.task_means();
    means.sort_unstable_by(f64::total_cmp);
    means
}

fn tail_of_sorted(sorted: &[f64], tau: f64) -> f64 {
    (sorted.len() - sorted.partition_point(|&x| x <= tau)) as f64 / sorted.len() as f64
}

fn profile_values(s: &ScoreSet, taus: &[f64], kind: ProfileKind) -> Vec<f64> {
    match kind {
        ProfileKind::RunScores => {
            let sorted = SortedTasks::new(s);
            taus.iter().map(|&t| sorted.run_tail(t)).collect()
        }
        ProfileKind::TaskMeans => {
            let means = sorted_means(s);
            taus.iter().map(|&t| tail_of_sorted(&means, t)).collect()
        }
    }
}

/// Profile of the requested kind without bands.
pub fn profile(s: &ScoreSet, taus: &[f64], kind: ProfileKind) -> Result<ProfileCurve> {
    check_grid(taus)?;
    Ok(ProfileCurve { kind, taus: taus.to_vec(), values: profile_values(s, taus, kind), bands: None })
}

/// `F̂(τ) = (1/M) Σ_m (1/N_m) Σ_n 1[x_{m,n} > τ]`.
pub fn run_score_distribution(s: &ScoreSet, taus: &[f64]) -> Result<ProfileCurve> {
    profile(s, taus, ProfileKind::RunScores)
}

/// Tail function of the task means.
pub fn average_score_distribution(s: &ScoreSet, taus: &[f64]) -> Result<ProfileCurve> {
    profile(s, taus, ProfileKind::TaskMeans)
}

/// Profile with pointwise percentile-bootstrap bands (runs resampled within
/// tasks). Bands are widened where needed so they always contain the point
/// value.
pub fn profile_with_bands(
    s: &ScoreSet,
    taus: &[f64],
    kind: ProfileKind,
    coverage: f64,
    replicates: usize,
    seed: u64,
) -> Result<ProfileCurve> {
    let mut curve = profile(s, taus, kind)?;
    if replicates < bootstrap::MIN_CI_REPLICATES {
        return Err(invalid(format!("bands need at least {} replicates", bootstrap::MIN_CI_REPLICATES)));
    }
    if !(coverage > 0.0 && coverage < 1.0) {
        return Err(invalid(format!("coverage must be in (0, 1), got {coverage}")));
    }
    let draws: Vec<Vec<f64>> = map_indexed(replicates, |b| {
        let mut rng = rng::substream(seed, b as u64);
        let sample = bootstrap::resample_joint(std::slice::from_ref(s), &ResampleStrategy::RUNS, &mut rng);
        profile_values(&sample[0], taus, kind)
    });
    let alpha = 1.0 - coverage;
    let mut bands = Vec::with_capacity(taus.len());
    let mut column = vec![0.0; replicates];
    for (i, &value) in curve.values.iter().enumerate() {
        for (c, d) in column.iter_mut().zip(&draws) {
            *c = d[i];
        }
        column.sort_unstable_by(f64::total_cmp);
        let lo = bootstrap::quantile_sorted(&column, alpha / 2.0)?;
        let hi = bootstrap::quantile_sorted(&column, 1.0 - alpha / 2.0)?;
        bands.push((lo.min(value).clamp(0.0, 1.0), hi.max(value).clamp(0.0, 1.0)));
    }
    curve.bands = Some(bands);
    Ok(curve)
}

/// Plug-in variances of the run-score and average-score profiles at one τ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileVariance {
    /// `(1/M²) Σ_m F̂_m(1 − F̂_m) / N_m`.
    pub runs: f64,
    /// `(1/M²) Σ_m F̂_X̄m(1 − F̂_X̄m)`, with `F̂_X̄m` the fraction of
    /// within-task resamples whose mean exceeds τ.
    pub means: f64,
}

pub fn profile_variance(s: &ScoreSet, tau: f64, seed: u64) -> ProfileVariance {
    let m = s.num_tasks() as f64;
    let runs: f64 = s
        .all_runs()
        .iter()
        .map(|r| {
            let f = tail_of_unsorted(r, tau);
            f * (1.0 - f) / r.len() as f64
        })
        .sum::<f64>()
        / (m * m);
    let means: f64 = map_indexed(s.num_tasks(), |task| {
        let r = s.runs(task);
        let n = r.len();
        let mut rng = rng::substream(seed, task as u64);
        let above = (0..TASK_MEAN_PLUGIN_RESAMPLES)
            .filter(|_| {
                let total: f64 = (0..n).map(|_| r[rng.random_range(0..n)]).sum();
                total / n as f64 > tau
            })
            .count();
        let f = above as f64 / TASK_MEAN_PLUGIN_RESAMPLES as f64;
        f * (1.0 - f)
    })
    .into_iter()
    .sum::<f64>()
        / (m * m);
    ProfileVariance { runs, means }
}

fn tail_of_unsorted(r: &[f64], tau: f64) -> f64 {
    r.iter().filter(|&&x| x > tau).count() as f64 / r.len() as f64
}

/// Integral of the right-continuous step curve from `lower_limit` to the
/// last grid point. Below the first grid point the first value is held.
pub fn profile_area(curve: &ProfileCurve, lower_limit: f64) -> f64 {
    let taus = curve.taus();
    let values = curve.values();
    let mut area = 0.0;
    if lower_limit < taus[0] {
        area += (taus[0] - lower_limit) * values[0];
    }
    for i in 0..taus.len() - 1 {
        let start = taus[i].max(lower_limit);
        let end = taus[i + 1];
        if end > start {
            area += (end - start) * values[i];
        }
    }
    area
}

/// Maps each grid τ to `[0, 1]` so that spacing follows the average
/// fraction of runs between thresholds: `1 − mean_p F_p(τ)`, rescaled to
/// span the grid. Falls back to linear spacing when the curves are flat.
pub fn rescaled_tau_axis(profiles: &[ProfileCurve]) -> Result<Vec<(f64, f64)>> {
    let first = profiles.first().ok_or_else(|| invalid("no profiles to rescale"))?;
    if profiles.iter().any(|p| p.taus() != first.taus()) {
        return Err(invalid("profiles do not share a τ grid"));
    }
    let taus = first.taus();
    let raw: Vec<f64> = (0..taus.len())
        .map(|i| 1.0 - profiles.iter().map(|p| p.values()[i]).sum::<f64>() / profiles.len() as f64)
        .collect();
    let last = taus.len() - 1;
    if last == 0 {
        return Ok(vec![(taus[0], 0.0)]);
    }
    let (c0, c1) = (raw[0], raw[last]);
    let coords: Vec<f64> = if c1 > c0 {
        raw.iter().map(|c| ((c - c0) / (c1 - c0)).clamp(0.0, 1.0)).collect()
    } else {
        taus.iter().map(|t| (t - taus[0]) / (taus[last] - taus[0])).collect()
    };
    Ok(taus.iter().copied().zip(coords).collect())
}

/// Bootstrap probability that each algorithm attains each rank, per task
/// and averaged over tasks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankDistribution {
    pub algorithms: Vec<String>,
    pub tasks: Vec<String>,
    /// `per_task[m][i][r]`: probability that algorithm `i` ranks `r + 1` on task `m`.
    pub per_task: Vec<Vec<Vec<f64>>>,
    pub mean_matrix: Vec<Vec<f64>>,
    pub replicates: usize,
    pub seed: u64,
}

const RANK_CHUNK: usize = 1024;

/// Ranks algorithms by resampled task mean (rank 1 = highest) in every
/// replicate. Tied algorithms split the tied ranks' mass evenly.
pub fn rank_distribution(sets: &[ScoreSet], replicates: usize, seed: u64) -> Result<RankDistribution> {
    let first = sets.first().ok_or_else(|| invalid("no algorithms to rank"))?;
    if replicates == 0 {
        return Err(invalid("replicates must be at least 1"));
    }
    let aligned = sets.iter().map(|s| first.aligned_to(s)).collect::<Result<Vec<_>>>()?;
    let a = aligned.len();
    let tasks = first.num_tasks();

    let partials = fold_chunks(replicates, RANK_CHUNK, |range| {
        let mut counts = vec![0.0; tasks * a * a];
        let mut means = vec![0.0; a];
        let mut order: Vec<usize> = (0..a).collect();
        for b in range {
            let mut rng = rng::substream(seed, b as u64);
            for m in 0..tasks {
                for (i, s) in aligned.iter().enumerate() {
                    let r = s.runs(m);
                    let n = r.len();
                    means[i] = (0..n).map(|_| r[rng.random_range(0..n)]).sum::<f64>() / n as f64;
                }
                add_ranks(&means, &mut order, &mut counts[m * a * a..(m + 1) * a * a]);
            }
        }
        counts
    });
    let mut total = vec![0.0; tasks * a * a];
    for p in partials {
        for (t, x) in total.iter_mut().zip(p) {
            *t += x;
        }
    }
    let scale = replicates as f64;
    let per_task: Vec<Vec<Vec<f64>>> = (0..tasks)
        .map(|m| {
            (0..a)
                .map(|i| (0..a).map(|r| total[m * a * a + i * a + r] / scale).collect())
                .collect()
        })
        .collect();
    let mean_matrix = (0..a)
        .map(|i| {
            (0..a).map(|r| per_task.iter().map(|t| t[i][r]).sum::<f64>() / tasks as f64).collect()
        })
        .collect();
    Ok(RankDistribution {
        algorithms: aligned.iter().map(|s| s.algorithm().to_owned()).collect(),
        tasks: first.tasks().to_vec(),
        per_task,
        mean_matrix,
        replicates,
        seed,
    })
}

/// Adds one replicate's rank mass (row-major `alg × rank`) to `counts`.
fn add_ranks(means: &[f64], order: &mut [usize], counts: &mut [f64]) {
    let a = means.len();
    for (i, o) in order.iter_mut().enumerate() {
        *o = i;
    }
    order.sort_by(|&x, &y| means[y].total_cmp(&means[x]).then(x.cmp(&y)));
    let mut start = 0;
    while start < a {
        let mut end = start + 1;
        while end < a && means[order[end]] == means[order[start]] {
            end += 1;
        }
        let share = 1.0 / (end - start) as f64;
        for &alg in &order[start..end] {
            for rank in start..end {
                counts[alg * a + rank] += share;
            }
        }
        start = end;
    }
}

impl RankDistribution {
    /// Largest deviation of any row or column sum from 1.
    pub fn stochasticity_error(&self) -> f64 {
        std::iter::once(&self.mean_matrix)
            .chain(&self.per_task)
            .map(|mat| {
                let n = mat.len();
                let rows = mat.iter().map(|row| (row.iter().sum::<f64>() - 1.0).abs());
                let cols = (0..n).map(|r| (mat.iter().map(|row| row[r]).sum::<f64>() - 1.0).abs());
                rows.chain(cols).fold(0.0, f64::max)
            })
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(tasks: &[&[f64]]) -> ScoreSet {
        ScoreSet::new("A", tasks.iter().enumerate().map(|(i, r)| (format!("t{i}"), r.to_vec()))).unwrap()
    }

    #[test]
    fn tail_examples() {
        assert_eq!(empirical_tail(&[0.2, 0.8], 0.5).unwrap(), 0.5);
        assert_eq!(empirical_tail(&[0.2, 0.8], 0.8).unwrap(), 0.0);
        assert_eq!(empirical_tail(&[0.2, 0.8], -3.0).unwrap(), 1.0);
        assert!(empirical_tail(&[], 0.0).is_err());
    }

    #[test]
    fn run_score_examples() {
        let s = set(&[&[0.0, 1.0], &[1.0, 1.0]]);
        assert_eq!(run_score_distribution(&s, &[0.5]).unwrap().values(), [0.75]);
        let taus = default_grid(std::slice::from_ref(&s));
        let c = run_score_distribution(&s, &taus).unwrap();
        assert_eq!(c.values()[0], 1.0);
        assert_eq!(*c.values().last().unwrap(), 0.0);
    }

    #[test]
    fn ragged_tasks_are_balanced() {
        let s = set(&[&[1.0], &[0.0, 0.0, 0.0]]);
        assert_eq!(run_score_distribution(&s, &[0.5]).unwrap().values(), [0.5]);
    }

    #[test]
    fn average_score_examples() {
        assert_eq!(average_score_distribution(&set(&[&[0.2], &[0.9]]), &[0.5]).unwrap().values(), [0.5]);
        assert_eq!(average_score_distribution(&set(&[&[0.3, 0.3], &[0.3]]), &[0.3]).unwrap().values(), [0.0]);
        let v = average_score_distribution(&set(&[&[0.0], &[1.0], &[2.0]]), &[0.5]).unwrap();
        assert_eq!(v.values(), [2.0 / 3.0]);
    }

    #[test]
    fn grid_checks() {
        let s = set(&[&[1.0]]);
        assert!(run_score_distribution(&s, &[]).is_err());
        assert!(run_score_distribution(&s, &[1.0, 1.0]).is_err());
        assert!(linear_grid(0.0, 1.0, 1).is_err());
        assert_eq!(linear_grid(0.0, 1.0, 3).unwrap(), [0.0, 0.5, 1.0]);
        let g = default_grid(&[set(&[&[2.0, 2.0]])]);
        assert_eq!(g.len(), 3);
        assert!(g[0] < 2.0 && g[2] > 2.0);
    }

    #[test]
    fn constant_set_has_zero_width_bands() {
        let s = set(&[&[0.5, 0.5], &[0.5]]);
        let taus = [0.0, 0.5, 1.0];
        let c = profile_with_bands(&s, &taus, ProfileKind::RunScores, 0.95, 200, 1).unwrap();
        for (_, v, band) in c.records() {
            let (lo, hi) = band.unwrap();
            assert_eq!((lo, hi), (v, v));
        }
    }

    #[test]
    fn bands_are_deterministic() {
        let s = set(&[&[0.1, 0.4, 0.9], &[0.3, 0.2], &[1.2, 0.0, 0.6, 0.7]]);
        let taus = default_grid(std::slice::from_ref(&s));
        let a = profile_with_bands(&s, &taus, ProfileKind::RunScores, 0.95, 500, 42).unwrap();
        let b = profile_with_bands(&s, &taus, ProfileKind::RunScores, 0.95, 500, 42).unwrap();
        assert_eq!(a, b);
        let c = profile_with_bands(&s, &taus, ProfileKind::TaskMeans, 0.9, 500, 42).unwrap();
        assert!(c.records().all(|(_, v, b)| b.is_some_and(|(lo, hi)| lo <= v && v <= hi)));
    }

    #[test]
    fn variance_examples() {
        let s = set(&[&[0.0, 0.0, 1.0, 1.0]]);
        assert_eq!(profile_variance(&s, 0.5, 0).runs, 0.0625);
        let degenerate = set(&[&[0.0, 0.0], &[1.0, 1.0]]);
        assert_eq!(profile_variance(&degenerate, 0.5, 0).runs, 0.0);
        let doubled = set(&[&[0.0, 0.0, 0.0, 0.0, 1.0, 1.0, 1.0, 1.0]]);
        assert_eq!(profile_variance(&doubled, 0.5, 0).runs, 0.0625 / 2.0);
    }

    #[test]
    fn pooling_runs_reduces_variance() {
        // F̂_m = 0.5 on every task; the task-mean plug-in is P(mean > 0.5) ≈ 1/4 for N = 2.
        for tasks in [1, 3, 8] {
            let s = ScoreSet::new("A", (0..tasks).map(|m| (format!("t{m}"), vec![0.0, 1.0]))).unwrap();
            let v = profile_variance(&s, 0.5, 7);
            assert!(v.runs < v.means, "{tasks}: {v:?}");
        }
    }

    #[test]
    fn area_examples() {
        let dense = linear_grid(0.0, 2.0, 201).unwrap();
        let c = run_score_distribution(&set(&[&[1.0, 1.0]]), &dense).unwrap();
        assert!((profile_area(&c, 0.0) - 1.0).abs() < 1e-12);
        let c = run_score_distribution(&set(&[&[0.0, 2.0]]), &[0.0, 2.0]).unwrap();
        assert_eq!(profile_area(&c, 0.0), 1.0);
        let c = run_score_distribution(&set(&[&[0.0, 2.0]]), &[0.0, 2.0, 5.0, 9.0]).unwrap();
        assert_eq!(profile_area(&c, 0.0), 1.0);
    }

    #[test]
    fn rescaled_axis_examples() {
        let uniform: Vec<f64> = (0..=100).map(|i| i as f64 / 100.0).collect();
        let s = set(&[&uniform]);
        let c = run_score_distribution(&s, &uniform).unwrap();
        let axis = rescaled_tau_axis(std::slice::from_ref(&c)).unwrap();
        assert_eq!(axis[0].1, 0.0);
        assert_eq!(axis[100].1, 1.0);
        for (t, x) in &axis {
            assert!((x - t).abs() < 1e-12, "{t} -> {x}");
        }
        assert_eq!(rescaled_tau_axis(&[c.clone(), c.clone()]).unwrap(), axis);
        let other = run_score_distribution(&s, &[0.0, 1.0]).unwrap();
        assert!(rescaled_tau_axis(&[c, other]).is_err());
    }

    #[test]
    fn rank_examples() {
        let a = ScoreSet::new("A", [("x", vec![5.0, 6.0]), ("y", vec![3.0])]).unwrap();
        let b = ScoreSet::new("B", [("x", vec![1.0, 2.0]), ("y", vec![0.0, 2.9])]).unwrap();
        let r = rank_distribution(&[a.clone(), b], 500, 3).unwrap();
        assert_eq!(r.per_task[0][0][0], 1.0);
        assert_eq!(r.per_task[1][0][0], 1.0);
        assert_eq!(r.mean_matrix, vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
        let solo = rank_distribution(&[a], 10, 0).unwrap();
        assert_eq!(solo.mean_matrix, vec![vec![1.0]]);
    }

    #[test]
    fn ties_split_mass() {
        let mut counts = vec![0.0; 9];
        let mut order = vec![0; 3];
        add_ranks(&[1.0, 2.0, 1.0], &mut order, &mut counts);
        assert_eq!(counts, [0.0, 0.5, 0.5, 1.0, 0.0, 0.0, 0.0, 0.5, 0.5]);
    }

    #[test]
    fn rank_mismatched_tasks() {
        let a = ScoreSet::new("A", [("x", vec![1.0])]).unwrap();
        let b = ScoreSet::new("B", [("y", vec![1.0])]).unwrap();
        assert!(rank_distribution(&[a, b], 10, 0).is_err());
    }
}
