use clap::{Args, Parser, Subcommand, ValueEnum};
use precipice::{CiMethod, Metric, ProfileKind, ResampleKind, ResampleStrategy};
use std::path::PathBuf;

#[derive(Debug, Parser)]
#[command(name = "precipice", version, about = "Interval estimates, profiles and rankings for multi-task benchmark scores")]
pub struct Cli {
    /// Worker threads for resampling (default: all cores). Output does not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Aggregate metrics with stratified bootstrap intervals.
    Metrics(MetricsArgs),
    /// Pairwise probability of improvement.
    Compare(CompareArgs),
    /// Score distributions, optionally with pointwise bands.
    Profile(ProfileArgs),
    /// Bootstrap rank distributions.
    Ranks(RanksArgs),
    /// Run meta-harness experiments from a config file.
    Validate(ValidateArgs),
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Score files (JSON or CSV). Each algorithm may appear in only one file.
    #[arg(long = "input", required = true, num_args = 1..)]
    pub inputs: Vec<PathBuf>,

    /// Per-task normalization references.
    #[arg(long)]
    pub normalize: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SeedArg {
    #[arg(long, env = "PRECIPICE_SEED", default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct ResampleArgs {
    #[arg(long, value_enum, default_value_t = StrategyArg::Runs)]
    pub strategy: StrategyArg,

    /// m/n bootstrap: draw this many runs per task. Without a value, half the smallest run count.
    #[arg(long, num_args = 0..=1)]
    pub subsample: Option<Option<usize>>,
}

#[derive(Debug, Args)]
pub struct IntervalArgs {
    #[arg(long = "ci-method", default_value = "percentile", value_parser = parse_method)]
    pub method: CiMethod,

    #[arg(long, default_value_t = precipice::bootstrap::DEFAULT_COVERAGE)]
    pub coverage: f64,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Directory for report files; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,

    #[arg(long, value_enum, value_delimiter = ',', default_value = "json")]
    pub format: Vec<Format>,
}

#[derive(Debug, Args)]
pub struct MetricsArgs {
    #[command(flatten)]
    pub input: InputArgs,

    /// Comma-separated metrics, e.g. `iqm,median,optimality_gap:1.5`.
    #[arg(long, value_delimiter = ',', value_parser = parse_metric, default_value = "median,iqm,mean,optimality_gap")]
    pub metrics: Vec<Metric>,

    #[command(flatten)]
    pub interval: IntervalArgs,

    #[arg(long, default_value_t = precipice::bootstrap::DEFAULT_REPLICATES)]
    pub replicates: usize,

    #[command(flatten)]
    pub resample: ResampleArgs,

    #[command(flatten)]
    pub seed: SeedArg,

    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub input: InputArgs,

    /// First algorithm; all pairs when neither `--x` nor `--y` is given.
    #[arg(long, requires = "y")]
    pub x: Option<String>,

    #[arg(long, requires = "x")]
    pub y: Option<String>,

    #[command(flatten)]
    pub interval: IntervalArgs,

    #[arg(long, default_value_t = 2_000)]
    pub replicates: usize,

    #[command(flatten)]
    pub resample: ResampleArgs,

    #[command(flatten)]
    pub seed: SeedArg,

    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct ProfileArgs {
    #[command(flatten)]
    pub input: InputArgs,

    #[arg(long, value_enum, default_value_t = KindArg::Run)]
    pub kind: KindArg,

    /// Evenly spaced grid `lo:hi:n`; defaults to every observed score plus padding.
    #[arg(long, value_parser = parse_grid, allow_hyphen_values = true)]
    pub grid: Option<(f64, f64, usize)>,

    /// Attach pointwise percentile bands.
    #[arg(long)]
    pub bands: bool,

    /// Space τ so equal horizontal distances carry equal profile mass.
    #[arg(long = "rescale-axis")]
    pub rescale_axis: bool,

    #[arg(long, default_value_t = precipice::bootstrap::DEFAULT_COVERAGE)]
    pub coverage: f64,

    #[arg(long, default_value_t = precipice::profiles::DEFAULT_BAND_REPLICATES)]
    pub replicates: usize,

    #[command(flatten)]
    pub seed: SeedArg,

    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct RanksArgs {
    #[command(flatten)]
    pub input: InputArgs,

    #[arg(long, default_value_t = precipice::profiles::DEFAULT_RANK_REPLICATES)]
    pub replicates: usize,

    #[command(flatten)]
    pub seed: SeedArg,

    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    /// Experiment config (JSON). Relative pool paths resolve against its directory.
    #[arg(long)]
    pub config: PathBuf,

    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Svg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StrategyArg {
    Runs,
    TasksAndRuns,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Run,
    TaskMeans,
}

impl From<KindArg> for ProfileKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Run => ProfileKind::RunScores,
            KindArg::TaskMeans => ProfileKind::TaskMeans,
        }
    }
}

impl ResampleArgs {
    /// Strategy for a comparison among `sets`; the default m/n size uses the smallest run count.
    pub fn strategy(&self, sets: &[&precipice::ScoreSet]) -> ResampleStrategy {
        let kind = match self.strategy {
            StrategyArg::Runs => ResampleKind::RunsWithinTasks,
            StrategyArg::TasksAndRuns => ResampleKind::TasksAndRuns,
        };
        let base = ResampleStrategy { kind, subsample_size: None };
        match self.subsample {
            None => base,
            Some(Some(m)) => base.with_subsample(m),
            Some(None) => base.with_subsample(
                sets.iter().map(|s| ResampleStrategy::default_subsample_size(s)).min().unwrap_or(1),
            ),
        }
    }
}

fn parse_method(s: &str) -> Result<CiMethod, String> {
    s.parse().map_err(|e: precipice::Error| e.to_string())
}

/// `name` or `name:parameter`.
pub fn parse_metric(s: &str) -> Result<Metric, String> {
    let (name, param) = match s.split_once(':') {
        Some((n, p)) => (n, Some(p.trim().parse::<f64>().map_err(|e| format!("bad parameter in `{s}`: {e}"))?)),
        None => (s, None),
    };
    let base: Metric = name.parse().map_err(|e: precipice::Error| e.to_string())?;
    let metric = match (base, param) {
        (m, None) => m,
        (Metric::Iqm { .. }, Some(p)) => Metric::Iqm { trim_fraction: p },
        (Metric::OptimalityGap { .. }, Some(p)) => Metric::OptimalityGap { gamma: p },
        (Metric::DifficultyProgress { .. }, Some(p)) => Metric::DifficultyProgress { fraction: p },
        (Metric::SuperhumanProb { .. }, Some(p)) => Metric::SuperhumanProb { threshold: p },
        (Metric::Mean | Metric::Median, Some(_)) => return Err(format!("`{name}` takes no parameter")),
    };
    metric.validate().map_err(|e| e.to_string())?;
    Ok(metric)
}

fn parse_grid(s: &str) -> Result<(f64, f64, usize), String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [lo, hi, n] = parts[..] else {
        return Err(format!("grid must look like lo:hi:n, got `{s}`"));
    };
    let num = |x: &str| x.trim().parse::<f64>().map_err(|e| format!("bad grid bound `{x}`: {e}"));
    let n = n.trim().parse::<usize>().map_err(|e| format!("bad grid size `{n}`: {e}"))?;
    Ok((num(lo)?, num(hi)?, n))
}
