use rand::Rng;
use rand_distr::{Distribution, LogNormal, Normal};
use serde::{Deserialize, Serialize};

use crate::bootstrap::Statistic;
use crate::error::{invalid, Result};
use crate::parallel::map_indexed;
use crate::rng::{self, SubstreamRng};
use crate::scores::ScoreSet;

/// One component of a Gaussian mixture.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Component {
    pub weight: f64,
    pub mean: f64,
    pub std: f64,
}

/// Per-task score distribution of a synthetic pool.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    Gaussian { mean: f64, std: f64 },
    /// `exp(N(mu, sigma²))`.
    Lognormal { mu: f64, sigma: f64 },
    Uniform { low: f64, high: f64 },
    Mixture { components: Vec<Component> },
}

impl Family {
    pub fn validate(&self) -> Result<()> {
        let finite = |xs: &[f64]| xs.iter().all(|x| x.is_finite());
        match self {
            Family::Gaussian { mean, std } if !finite(&[*mean, *std]) || *std < 0.0 => {
                Err(invalid(format!("gaussian needs finite mean and std ≥ 0, got ({mean}, {std})")))
            }
            Family::Lognormal { mu, sigma } if !finite(&[*mu, *sigma]) || *sigma < 0.0 => {
                Err(invalid(format!("lognormal needs finite mu and sigma ≥ 0, got ({mu}, {sigma})")))
            }
            Family::Uniform { low, high } if !finite(&[*low, *high]) || low > high => {
                Err(invalid(format!("uniform needs finite low ≤ high, got ({low}, {high})")))
            }
            Family::Mixture { components } => {
                if components.is_empty() {
                    return Err(invalid("mixture has no components"));
                }
                for c in components {
                    if !finite(&[c.weight, c.mean, c.std]) || c.weight <= 0.0 || c.std < 0.0 {
                        return Err(invalid(format!("invalid mixture component {c:?}")));
                    }
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    pub fn sample(&self, rng: &mut SubstreamRng) -> f64 {
        match self {
            Family::Gaussian { mean, std } => gaussian(*mean, *std, rng),
            Family::Lognormal { mu, sigma } => {
                LogNormal::new(*mu, *sigma).expect("validated lognormal").sample(rng)
            }
            Family::Uniform { low, high } => low + (high - low) * rng.random::<f64>(),
            Family::Mixture { components } => {
                let total: f64 = components.iter().map(|c| c.weight).sum();
                let mut u = rng.random::<f64>() * total;
                let mut chosen = components[components.len() - 1];
                for c in components {
                    if u < c.weight {
                        chosen = *c;
                        break;
                    }
                    u -= c.weight;
                }
                gaussian(chosen.mean, chosen.std, rng)
            }
        }
    }

    /// Population mean where it has a closed form.
    pub fn analytic_mean(&self) -> Option<f64> {
        match self {
            Family::Gaussian { mean, .. } => Some(*mean),
            Family::Lognormal { mu, sigma } => Some((mu + 0.5 * sigma * sigma).exp()),
            Family::Uniform { low, high } => Some(0.5 * (low + high)),
            Family::Mixture { components } => {
                let total: f64 = components.iter().map(|c| c.weight).sum();
                Some(components.iter().map(|c| c.weight * c.mean).sum::<f64>() / total)
            }
        }
    }

    /// Population median where it has a closed form.
    pub fn analytic_median(&self) -> Option<f64> {
        match self {
            Family::Gaussian { mean, .. } => Some(*mean),
            Family::Lognormal { mu, .. } => Some(mu.exp()),
            Family::Uniform { low, high } => Some(0.5 * (low + high)),
            Family::Mixture { .. } => None,
        }
    }
}

fn gaussian(mean: f64, std: f64, rng: &mut SubstreamRng) -> f64 {
    Normal::new(mean, std).expect("validated gaussian").sample(rng)
}

/// Synthetic population: task `m` draws `pool_size` i.i.d. scores from
/// `families[m % families.len()]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticPoolSpec {
    pub tasks: usize,
    pub pool_size: usize,
    pub families: Vec<Family>,
    pub seed: u64,
}

impl SyntheticPoolSpec {
    pub fn uniform_family(tasks: usize, pool_size: usize, family: Family, seed: u64) -> Self {
        Self { tasks, pool_size, families: vec![family], seed }
    }

    pub fn family(&self, task: usize) -> &Family {
        &self.families[task % self.families.len()]
    }

    pub fn validate(&self) -> Result<()> {
        if self.tasks == 0 || self.pool_size == 0 {
            return Err(invalid("synthetic pool needs at least one task and one run"));
        }
        if self.families.is_empty() {
            return Err(invalid("synthetic pool needs at least one family"));
        }
        self.families.iter().try_for_each(Family::validate)
    }
}

/// A large run pool treated as the population in Monte Carlo experiments.
#[derive(Debug, Clone, PartialEq)]
pub struct ScorePool {
    set: ScoreSet,
}

impl ScorePool {
    pub fn new(set: ScoreSet) -> Self {
        Self { set }
    }

    pub fn set(&self) -> &ScoreSet {
        &self.set
    }

    /// Smallest per-task run count.
    pub fn min_runs(&self) -> usize {
        self.set.run_counts().into_iter().min().unwrap_or(0)
    }

    /// Statistic on the full pool, used as ground truth.
    pub fn truth<S: Statistic + ?Sized>(&self, statistic: &S) -> Result<f64> {
        statistic.evaluate(&self.set)
    }

    /// `n` runs per task drawn with replacement.
    pub(crate) fn draw_with_replacement(&self, n: usize, rng: &mut SubstreamRng) -> ScoreSet {
        let runs = self
            .set
            .all_runs()
            .iter()
            .map(|r| (0..n).map(|_| r[rng.random_range(0..r.len())]).collect())
            .collect();
        self.set.with_runs(runs)
    }

    /// `k` distinct runs per task; each task needs at least `k` runs.
    pub(crate) fn draw_without_replacement(&self, k: usize, rng: &mut SubstreamRng) -> ScoreSet {
        let runs = self
            .set
            .all_runs()
            .iter()
            .map(|r| {
                let mut idx: Vec<usize> = (0..r.len()).collect();
                for i in 0..k {
                    let j = rng.random_range(i..idx.len());
                    idx.swap(i, j);
                }
                idx[..k].iter().map(|&i| r[i]).collect()
            })
            .collect();
        self.set.with_runs(runs)
    }
}

/// Draws a synthetic pool; task `m` uses substream `m` of the spec seed.
pub fn generate_pool(spec: &SyntheticPoolSpec) -> Result<ScorePool> {
    spec.validate()?;
    let runs = map_indexed(spec.tasks, |m| {
        let mut rng = rng::substream(spec.seed, m as u64);
        let family = spec.family(m);
        (0..spec.pool_size).map(|_| family.sample(&mut rng)).collect::<Vec<f64>>()
    });
    let set = ScoreSet::new("synthetic", runs.into_iter().enumerate().map(|(m, r)| (format!("task{m}"), r)))?;
    Ok(ScorePool::new(set))
}
