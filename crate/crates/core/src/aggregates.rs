//! Aggregate point estimates over a [`ScoreSet`].
//!
//! `mean`/`median` summarize task means. IQM, optimality gap, difficulty
//! progress and superhuman probability summarize the pooled run scores.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::scores::ScoreSet;

pub const DEFAULT_TRIM: f64 = 0.25;
pub const DEFAULT_GAMMA: f64 = 1.0;

pub fn mean_of_task_means(s: &ScoreSet) -> f64 {
    mean(&s.task_means())
}

/// Sample median of task means; an even count averages the two middle values.
pub fn median_of_task_means(s: &ScoreSet) -> f64 {
    let mut means = s.task_means();
    median_in_place(&mut means)
}

/// Trimmed mean of the pooled runs: drops `⌊trim·K⌋` from each end of the
/// sorted pool. `trim = 0.25` is the interquartile mean.
pub fn iqm(s: &ScoreSet, trim: f64) -> f64 {
    let mut pooled = s.pooled_scores();
    trimmed_mean_in_place(&mut pooled, trim)
}

/// Mean shortfall of the pooled runs below `gamma`.
pub fn optimality_gap(s: &ScoreSet, gamma: f64) -> f64 {
    let shortfall: Vec<f64> = s.all_runs().iter().flatten().map(|&x| (gamma - x).max(0.0)).collect();
    mean(&shortfall)
}

/// `(γ, gap(γ)/γ)` over an ascending grid of positive thresholds.
pub fn optimality_gap_curve(s: &ScoreSet, gammas: &[f64]) -> Result<Vec<(f64, f64)>> {
    if let Some(g) = gammas.iter().find(|g| !(**g > 0.0 && g.is_finite())) {
        return Err(invalid(format!("optimality gap threshold must be positive, got {g}")));
    }
    if gammas.windows(2).any(|w| w[0] >= w[1]) {
        return Err(invalid("optimality gap thresholds must be strictly ascending"));
    }
    Ok(gammas.iter().map(|&g| (g, optimality_gap(s, g) / g)).collect())
}

/// Task-averaged Mann-Whitney probability that a run of `x` beats a run of
/// `y` on the same task, ties counting one half.
pub fn probability_of_improvement(x: &ScoreSet, y: &ScoreSet) -> Result<f64> {
    let y = x.aligned_to(y)?;
    Ok(probability_of_improvement_aligned(x, &y))
}

/// Same as [`probability_of_improvement`] for sets already in the same task order.
///
/// The task average is accumulated as an exact fraction and rounded once,
/// so swapping the arguments yields the exact complement.
pub(crate) fn probability_of_improvement_aligned(x: &ScoreSet, y: &ScoreSet) -> f64 {
    let counts: Vec<(u64, u64)> = x
        .all_runs()
        .iter()
        .zip(y.all_runs())
        .map(|(xs, ys)| (doubled_wins(xs, ys), 2 * (xs.len() * ys.len()) as u64))
        .collect();
    match exact_task_average(&counts) {
        Some(p) => p,
        None => {
            let total: f64 = counts.iter().map(|&(c, d)| c as f64 / d as f64).sum();
            total / counts.len() as f64
        }
    }
}

/// `(1/M) Σ_m c_m / d_m` rounded once, if the reduced fraction fits in
/// 53-bit integers.
fn exact_task_average(counts: &[(u64, u64)]) -> Option<f64> {
    fn gcd(mut a: u128, mut b: u128) -> u128 {
        while b != 0 {
            (a, b) = (b, a % b);
        }
        a
    }
    let (mut num, mut den) = (0u128, 1u128);
    for &(c, d) in counts {
        let (c, d) = (c as u128, d as u128);
        let g = gcd(den, d);
        let scale = d / g;
        num = num.checked_mul(scale)?.checked_add(c.checked_mul(den / g)?)?;
        den = den.checked_mul(scale)?;
        let r = gcd(num, den).max(1);
        num /= r;
        den /= r;
    }
    den = den.checked_mul(counts.len() as u128)?;
    let r = gcd(num, den).max(1);
    let (num, den) = (num / r, den / r);
    const EXACT: u128 = 1 << 53;
    (num < EXACT && den < EXACT).then(|| num as f64 / den as f64)
}

/// `2 Σ_i Σ_j S(x_i, y_j)`: sorts `y` and counts smaller and equal
/// elements per `x_i`.
fn doubled_wins(xs: &[f64], ys: &[f64]) -> u64 {
    let mut sorted = ys.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    xs.iter()
        .map(|&x| {
            let below = sorted.partition_point(|&y| y < x) as u64;
            let not_above = sorted.partition_point(|&y| y <= x) as u64;
            2 * below + (not_above - below)
        })
        .sum()
}

/// `(1/(N·K)) Σ_i Σ_j S(x_i, y_j)` for one task.
pub fn mann_whitney_probability(xs: &[f64], ys: &[f64]) -> f64 {
    doubled_wins(xs, ys) as f64 / (2 * xs.len() * ys.len()) as f64
}

/// Mean of the `⌈fraction·K⌉` smallest pooled runs.
pub fn difficulty_progress(s: &ScoreSet, fraction: f64) -> f64 {
    let mut pooled = s.pooled_scores();
    pooled.sort_unstable_by(f64::total_cmp);
    let take = ((fraction * pooled.len() as f64).ceil() as usize).clamp(1, pooled.len());
    mean(&pooled[..take])
}

/// Fraction of pooled runs strictly above `threshold`.
pub fn superhuman_probability(s: &ScoreSet, threshold: f64) -> f64 {
    let above = s.all_runs().iter().flatten().filter(|&&x| x > threshold).count();
    above as f64 / s.total_runs() as f64
}

/// Arithmetic mean, clamped to the data range so a constant slice returns
/// that constant exactly.
pub(crate) fn mean(xs: &[f64]) -> f64 {
    let (lo, hi) = xs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
    (xs.iter().sum::<f64>() / xs.len() as f64).clamp(lo, hi)
}

pub(crate) fn median_in_place(xs: &mut [f64]) -> f64 {
    xs.sort_unstable_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

pub(crate) fn trimmed_mean_in_place(xs: &mut [f64], trim: f64) -> f64 {
    xs.sort_unstable_by(f64::total_cmp);
    let cut = (trim * xs.len() as f64).floor() as usize;
    assert!(2 * cut < xs.len(), "trim fraction {trim} leaves nothing to average");
    mean(&xs[cut..xs.len() - cut])
}

/// An aggregate metric with its parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Metric {
    Mean,
    Median,
    Iqm { trim_fraction: f64 },
    OptimalityGap { gamma: f64 },
    DifficultyProgress { fraction: f64 },
    SuperhumanProb { threshold: f64 },
}

impl Metric {
    pub const IQM: Metric = Metric::Iqm { trim_fraction: DEFAULT_TRIM };
    pub const OPTIMALITY_GAP: Metric = Metric::OptimalityGap { gamma: DEFAULT_GAMMA };
    pub const DP25: Metric = Metric::DifficultyProgress { fraction: DEFAULT_TRIM };
    pub const SUPERHUMAN: Metric = Metric::SuperhumanProb { threshold: DEFAULT_GAMMA };

    /// Median, IQM, mean and optimality gap.
    pub const DEFAULT_BUNDLE: [Metric; 4] =
        [Metric::Median, Metric::IQM, Metric::Mean, Metric::OPTIMALITY_GAP];

    pub fn validate(&self) -> Result<()> {
        match *self {
            Metric::Iqm { trim_fraction: t } if !(0.0..0.5).contains(&t) => {
                Err(invalid(format!("trim fraction must be in [0, 0.5), got {t}")))
            }
            Metric::DifficultyProgress { fraction: f } if !(f > 0.0 && f <= 1.0) => {
                Err(invalid(format!("difficulty-progress fraction must be in (0, 1], got {f}")))
            }
            Metric::OptimalityGap { gamma: g } | Metric::SuperhumanProb { threshold: g }
                if !g.is_finite() =>
            {
                Err(invalid(format!("threshold must be finite, got {g}")))
            }
            _ => Ok(()),
        }
    }

    pub fn evaluate(&self, s: &ScoreSet) -> f64 {
        match *self {
            Metric::Mean => mean_of_task_means(s),
            Metric::Median => median_of_task_means(s),
            Metric::Iqm { trim_fraction } => iqm(s, trim_fraction),
            Metric::OptimalityGap { gamma } => optimality_gap(s, gamma),
            Metric::DifficultyProgress { fraction } => difficulty_progress(s, fraction),
            Metric::SuperhumanProb { threshold } => superhuman_probability(s, threshold),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Metric::Mean => "mean",
            Metric::Median => "median",
            Metric::Iqm { .. } => "iqm",
            Metric::OptimalityGap { .. } => "optimality_gap",
            Metric::DifficultyProgress { .. } => "difficulty_progress",
            Metric::SuperhumanProb { .. } => "superhuman_prob",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Metric {
    type Err = Error;

    /// Accepts the metric names with default parameters, plus `dp25`.
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim().to_ascii_lowercase().as_str() {
            "mean" => Metric::Mean,
            "median" => Metric::Median,
            "iqm" => Metric::IQM,
            "optimality_gap" | "og" => Metric::OPTIMALITY_GAP,
            "difficulty_progress" | "dp25" => Metric::DP25,
            "superhuman_prob" | "superhuman" => Metric::SUPERHUMAN,
            other => return Err(invalid(format!("unknown metric `{other}`"))),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pooled(xs: &[f64]) -> ScoreSet {
        ScoreSet::new("A", [("t", xs.to_vec())]).unwrap()
    }

    fn with_means(means: &[f64]) -> ScoreSet {
        ScoreSet::new("A", means.iter().enumerate().map(|(i, &m)| (format!("t{i}"), vec![m]))).unwrap()
    }

    #[test]
    fn mean_examples() {
        assert!((mean_of_task_means(&with_means(&[0.2, 0.4])) - 0.3).abs() < 1e-15);
        assert_eq!(mean_of_task_means(&pooled(&[1.0, 3.0])), 2.0);
        let outlier = mean_of_task_means(&with_means(&[0.0, 0.0, 100.0]));
        assert!((outlier - 100.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn median_examples() {
        assert_eq!(median_of_task_means(&with_means(&[0.2, 0.4, 0.9])), 0.4);
        assert!((median_of_task_means(&with_means(&[0.2, 0.4, 0.6, 0.9])) - 0.5).abs() < 1e-15);
        assert_eq!(median_of_task_means(&with_means(&[0.0, 0.0, 1.0, 1.0, 1.0])), 1.0);
    }

    #[test]
    fn iqm_examples() {
        assert_eq!(iqm(&pooled(&[0.0, 1.0, 2.0, 3.0]), 0.25), 1.5);
        assert!((iqm(&pooled(&[0.1, 0.1, 0.1, 100.0]), 0.25) - 0.1).abs() < 1e-15);
        let s = pooled(&[3.0, -1.0, 7.5, 2.0, 2.0]);
        assert_eq!(iqm(&s, 0.0), mean(&s.pooled_scores()));
    }

    #[test]
    fn optimality_gap_examples() {
        assert_eq!(optimality_gap(&pooled(&[1.0, 2.0, 5.0]), 1.0), 0.0);
        assert_eq!(optimality_gap(&pooled(&[0.5, 1.5]), 1.0), 0.25);
        let s = pooled(&[0.1, 0.7, 0.3]);
        assert!((optimality_gap(&s, 1.0) - (1.0 - mean(&s.pooled_scores()))).abs() < 1e-15);
    }

    #[test]
    fn optimality_gap_curve_examples() {
        let c = optimality_gap_curve(&pooled(&[3.0, 3.0]), &[0.5, 1.0, 2.0]).unwrap();
        assert!(c.iter().all(|&(_, r)| r == 0.0));
        assert_eq!(optimality_gap_curve(&pooled(&[0.0]), &[2.0]).unwrap(), [(2.0, 1.0)]);
        let c = optimality_gap_curve(&pooled(&[0.5, 1.5]), &[1.0, 2.0]).unwrap();
        assert_eq!(c, [(1.0, 0.25), (2.0, 0.5)]);
        assert!(optimality_gap_curve(&pooled(&[0.0]), &[0.0]).is_err());
        assert!(optimality_gap_curve(&pooled(&[0.0]), &[-1.0, 1.0]).is_err());
    }

    #[test]
    fn probability_of_improvement_examples() {
        assert_eq!(probability_of_improvement(&pooled(&[2.0]), &pooled(&[1.0])).unwrap(), 1.0);
        let s = ScoreSet::new("A", [("a", vec![1.0, 4.0]), ("b", vec![2.0])]).unwrap();
        assert_eq!(probability_of_improvement(&s, &s).unwrap(), 0.5);
        assert_eq!(probability_of_improvement(&pooled(&[1.0, 3.0]), &pooled(&[2.0, 2.0])).unwrap(), 0.5);
        let other = ScoreSet::new("B", [("z", vec![1.0])]).unwrap();
        assert!(matches!(
            probability_of_improvement(&pooled(&[1.0]), &other),
            Err(Error::TaskMismatch(_))
        ));
    }

    #[test]
    fn improvement_complements_exactly() {
        let x = ScoreSet::new("X", [("a", vec![0.1, 0.7, 0.3]), ("b", vec![1.0]), ("c", vec![2.0, 2.0])]).unwrap();
        let y = ScoreSet::new("Y", [("a", vec![0.3, 0.2]), ("b", vec![1.0, 5.0, 0.0]), ("c", vec![1.0; 7])]).unwrap();
        let p = probability_of_improvement(&x, &y).unwrap();
        let q = probability_of_improvement(&y, &x).unwrap();
        assert_eq!(p + q, 1.0);
        // (3.5/6 + 1.5/3 + 14/14) / 3
        assert!((p - (3.5 / 6.0 + 0.5 + 1.0) / 3.0).abs() < 1e-15);
    }

    #[test]
    fn difficulty_progress_examples() {
        assert_eq!(difficulty_progress(&pooled(&[4.0, 1.0, 3.0, 2.0]), 0.25), 1.0);
        assert_eq!(difficulty_progress(&pooled(&[0.7; 6]), 0.25), 0.7);
        assert_eq!(difficulty_progress(&pooled(&[1.0, 2.0, 3.0, 4.0, 5.0]), 0.25), 1.5);
    }

    #[test]
    fn superhuman_examples() {
        assert_eq!(superhuman_probability(&pooled(&[0.5, 1.5]), 1.0), 0.5);
        assert_eq!(superhuman_probability(&pooled(&[1.0, 1.0]), 1.0), 0.0);
        assert_eq!(superhuman_probability(&pooled(&[2.0, 2.0]), 1.0), 1.0);
    }

    #[test]
    fn constant_sets() {
        let s = ScoreSet::new("A", [("a", vec![0.4; 3]), ("b", vec![0.4])]).unwrap();
        for m in [Metric::Mean, Metric::Median, Metric::IQM, Metric::DP25] {
            assert_eq!(m.evaluate(&s), 0.4, "{m}");
        }
        assert!((Metric::OPTIMALITY_GAP.evaluate(&s) - 0.6).abs() < 1e-15);
    }

    #[test]
    fn metric_parsing_and_validation() {
        assert_eq!("IQM".parse::<Metric>().unwrap(), Metric::IQM);
        assert_eq!("dp25".parse::<Metric>().unwrap(), Metric::DP25);
        assert!("iqr".parse::<Metric>().is_err());
        assert!(Metric::Iqm { trim_fraction: 0.5 }.validate().is_err());
        assert!(Metric::DifficultyProgress { fraction: 0.0 }.validate().is_err());
        assert!(Metric::OptimalityGap { gamma: f64::NAN }.validate().is_err());
        assert!(Metric::IQM.validate().is_ok());
    }
}
