use crate::args::{CompareArgs, Format, InputArgs, MetricsArgs, OutputArgs, ProfileArgs, RanksArgs, ValidateArgs};
use crate::error::{CliError, CliResult};
use crate::report::{
    comparisons_table, experiment_table, metric_label, metrics_table, profiles_table, ranks_table, Comparison,
    InputDigest, MetricRow, ProfileRecord, ReportDocument, Table,
};
use crate::svg;
use precipice::aggregates::probability_of_improvement;
use precipice::bootstrap::{confidence_interval, confidence_interval_joint};
use precipice::harness::{parse_config, run_experiment};
use precipice::profiles::{default_grid, linear_grid, profile, profile_with_bands, rank_distribution, rescaled_tau_axis};
use precipice::scores::{load_scores, normalize};
use precipice::{CiConfig, Error, IntervalEstimate, NormalizationSpec, ScoreFormat, ScoreSet};
use sha2::{Digest, Sha256};
use std::io::Write;
use std::path::{Path, PathBuf};

/// Everything a command produces before it is written out.
pub struct Artifacts {
    pub command: &'static str,
    pub report: ReportDocument,
    /// `(file stem, table)`; the first is the SVG sidecar.
    pub tables: Vec<(String, Table)>,
    pub svg: Option<String>,
}

struct Inputs {
    sets: Vec<ScoreSet>,
    digests: Vec<InputDigest>,
    normalization: Option<InputDigest>,
}

fn read(path: &Path) -> CliResult<(Vec<u8>, InputDigest)> {
    let bytes = std::fs::read(path)
        .map_err(|e| CliError::Data(Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))))?;
    let digest = InputDigest { path: path.display().to_string(), sha256: hex(&Sha256::digest(&bytes)) };
    Ok((bytes, digest))
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

fn in_file(path: &Path, e: Error) -> CliError {
    match e {
        Error::Parse { location, message } => {
            CliError::Data(Error::Parse { location: format!("{} {location}", path.display()), message })
        }
        other => other.into(),
    }
}

fn load_inputs(args: &InputArgs) -> CliResult<Inputs> {
    let mut sets: Vec<ScoreSet> = Vec::new();
    let mut digests = Vec::new();
    for path in &args.inputs {
        let (bytes, digest) = read(path)?;
        let table = load_scores(bytes.as_slice(), ScoreFormat::from_path(path)).map_err(|e| in_file(path, e))?;
        for (name, set) in table {
            if sets.iter().any(|s| s.algorithm() == name) {
                return Err(CliError::Data(Error::Validation(format!(
                    "algorithm `{name}` appears in more than one input ({})",
                    path.display()
                ))));
            }
            sets.push(set);
        }
        digests.push(digest);
    }
    let normalization = match &args.normalize {
        Some(path) => {
            let (bytes, digest) = read(path)?;
            let spec = NormalizationSpec::from_json(bytes.as_slice()).map_err(|e| in_file(path, e))?;
            sets = sets.iter().map(|s| normalize(s, &spec)).collect::<Result<_, _>>()?;
            Some(digest)
        }
        None => None,
    };
    Ok(Inputs { sets, digests, normalization })
}

fn check_coverage(coverage: f64) -> CliResult<()> {
    if coverage > 0.0 && coverage < 1.0 {
        Ok(())
    } else {
        Err(CliError::Usage(format!("--coverage must be in (0, 1), got {coverage}")))
    }
}

fn check_svg(output: &OutputArgs, command: &str) -> CliResult<()> {
    if output.format.contains(&Format::Svg) && command == "validate" {
        return Err(CliError::Usage("svg output is not available for `validate`".into()));
    }
    Ok(())
}

fn report_for(command: &'static str, inputs: &Inputs) -> ReportDocument {
    let mut doc = ReportDocument::new(command);
    doc.inputs = inputs.digests.clone();
    doc.normalization = inputs.normalization.clone();
    doc
}

pub fn metrics(a: &MetricsArgs) -> CliResult<Artifacts> {
    check_coverage(a.interval.coverage)?;
    let inputs = load_inputs(&a.input)?;
    let mut doc = report_for("metrics", &inputs);
    doc.settings.ci_method = Some(a.interval.method);
    doc.settings.coverage = Some(a.interval.coverage);
    doc.settings.replicates = Some(a.replicates);
    doc.settings.seed = Some(a.seed.seed);
    doc.settings.strategy = Some(a.resample.strategy(&inputs.sets.iter().collect::<Vec<_>>()));
    for set in &inputs.sets {
        let strategy = a.resample.strategy(&[set]);
        let config = CiConfig {
            method: a.interval.method,
            coverage: a.interval.coverage,
            replicates: a.replicates,
            strategy,
            seed: a.seed.seed,
        };
        for metric in &a.metrics {
            let estimate = confidence_interval(set, metric, &config)?;
            doc.metrics.push(MetricRow {
                algorithm: set.algorithm().to_owned(),
                metric: metric_label(metric),
                parameters: *metric,
                subsample_size: strategy.subsample_size,
                estimate,
            });
        }
    }
    let rows: Vec<svg::IntervalRow> = doc
        .metrics
        .iter()
        .map(|r| svg::IntervalRow { label: &r.algorithm, panel: &r.metric, estimate: &r.estimate })
        .collect();
    let plot = svg::intervals(&rows, "Aggregate metrics");
    let table = metrics_table(&doc.metrics);
    Ok(Artifacts { command: "metrics", report: doc, tables: vec![("metrics".into(), table)], svg: Some(plot) })
}

fn find<'a>(sets: &'a [ScoreSet], name: &str) -> CliResult<&'a ScoreSet> {
    sets.iter()
        .find(|s| s.algorithm() == name)
        .ok_or_else(|| CliError::Usage(format!("algorithm `{name}` is not in the inputs")))
}

pub fn compare(a: &CompareArgs) -> CliResult<Artifacts> {
    check_coverage(a.interval.coverage)?;
    let inputs = load_inputs(&a.input)?;
    let sets = &inputs.sets;
    let pairs: Vec<(&ScoreSet, &ScoreSet)> = match (&a.x, &a.y) {
        (Some(x), Some(y)) => vec![(find(sets, x)?, find(sets, y)?)],
        _ => {
            if sets.len() < 2 {
                return Err(CliError::Usage("compare needs at least two algorithms".into()));
            }
            (0..sets.len()).flat_map(|i| (i + 1..sets.len()).map(move |j| (&sets[i], &sets[j]))).collect()
        }
    };
    let mut doc = report_for("compare", &inputs);
    doc.settings.ci_method = Some(a.interval.method);
    doc.settings.coverage = Some(a.interval.coverage);
    doc.settings.replicates = Some(a.replicates);
    doc.settings.seed = Some(a.seed.seed);
    doc.settings.strategy = Some(a.resample.strategy(&inputs.sets.iter().collect::<Vec<_>>()));
    let improvement = |s: &[ScoreSet]| probability_of_improvement(&s[0], &s[1]);
    for (x, y) in pairs {
        let y = x.aligned_to(y)?;
        let config = CiConfig {
            method: a.interval.method,
            coverage: a.interval.coverage,
            replicates: a.replicates,
            strategy: a.resample.strategy(&[x, &y]),
            seed: a.seed.seed,
        };
        let pair = [x.clone(), y];
        let p = confidence_interval_joint(&pair, &improvement, &config)?;
        let q = IntervalEstimate {
            point: probability_of_improvement(&pair[1], &pair[0])?,
            lower: 1.0 - p.upper,
            upper: 1.0 - p.lower,
            ..p
        };
        doc.comparisons.push(Comparison {
            x: x.algorithm().to_owned(),
            y: pair[1].algorithm().to_owned(),
            statistically_significant: p.lower > 0.5,
            statistically_meaningful: p.upper > 0.75,
            p_x_over_y: p,
            p_y_over_x: q,
        });
    }
    let labels: Vec<String> = doc.comparisons.iter().map(|c| format!("{} > {}", c.x, c.y)).collect();
    let rows: Vec<svg::IntervalRow> = doc
        .comparisons
        .iter()
        .zip(&labels)
        .map(|(c, l)| svg::IntervalRow { label: l, panel: "P(X > Y)", estimate: &c.p_x_over_y })
        .collect();
    let plot = svg::intervals(&rows, "Probability of improvement");
    let table = comparisons_table(&doc.comparisons);
    Ok(Artifacts { command: "compare", report: doc, tables: vec![("compare".into(), table)], svg: Some(plot) })
}

pub fn profile_cmd(a: &ProfileArgs) -> CliResult<Artifacts> {
    if a.bands {
        check_coverage(a.coverage)?;
    }
    let inputs = load_inputs(&a.input)?;
    let grid = match a.grid {
        Some((lo, hi, n)) => linear_grid(lo, hi, n)?,
        None => default_grid(&inputs.sets),
    };
    let kind = a.kind.into();
    let mut doc = report_for("profile", &inputs);
    doc.settings.profile_kind = Some(kind);
    doc.settings.bands = Some(a.bands);
    doc.settings.rescale_axis = Some(a.rescale_axis);
    if a.bands {
        doc.settings.coverage = Some(a.coverage);
        doc.settings.replicates = Some(a.replicates);
        doc.settings.seed = Some(a.seed.seed);
    }
    for set in &inputs.sets {
        let curve = if a.bands {
            profile_with_bands(set, &grid, kind, a.coverage, a.replicates, a.seed.seed)?
        } else {
            profile(set, &grid, kind)?
        };
        doc.profiles.push(ProfileRecord {
            algorithm: set.algorithm().to_owned(),
            curve,
            band_replicates: a.bands.then_some(a.replicates),
            band_seed: a.bands.then_some(a.seed.seed),
        });
    }
    if a.rescale_axis {
        let curves: Vec<_> = doc.profiles.iter().map(|p| p.curve.clone()).collect();
        doc.tau_axis = Some(rescaled_tau_axis(&curves)?);
    }
    let title = match kind {
        precipice::ProfileKind::RunScores => "Run-score distribution",
        precipice::ProfileKind::TaskMeans => "Average-score distribution",
    };
    let plot = svg::profiles(&doc.profiles, doc.tau_axis.as_deref(), title);
    let table = profiles_table(&doc.profiles, doc.tau_axis.as_deref());
    Ok(Artifacts { command: "profile", report: doc, tables: vec![("profile".into(), table)], svg: Some(plot) })
}

pub fn ranks(a: &RanksArgs) -> CliResult<Artifacts> {
    let inputs = load_inputs(&a.input)?;
    if inputs.sets.len() < 2 {
        return Err(CliError::Usage(format!("ranks needs at least two algorithms, got {}", inputs.sets.len())));
    }
    let dist = rank_distribution(&inputs.sets, a.replicates, a.seed.seed)?;
    let mut doc = report_for("ranks", &inputs);
    doc.settings.replicates = Some(a.replicates);
    doc.settings.seed = Some(a.seed.seed);
    let plot = svg::ranks(&dist, "Rank distribution (task average)");
    let table = ranks_table(&dist);
    doc.ranks = Some(dist);
    Ok(Artifacts { command: "ranks", report: doc, tables: vec![("ranks".into(), table)], svg: Some(plot) })
}

fn file_stem(name: &str) -> String {
    name.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' }).collect()
}

pub fn validate(a: &ValidateArgs) -> CliResult<Artifacts> {
    check_svg(&a.output, "validate")?;
    let (bytes, digest) = read(&a.config)?;
    let text = String::from_utf8(bytes)
        .map_err(|_| CliError::Usage(format!("{} is not UTF-8", a.config.display())))?;
    let specs = parse_config(&text)?;
    for spec in &specs {
        spec.validate()?;
    }
    let base = a.config.parent().map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from("."));
    let mut doc = ReportDocument::new("validate");
    doc.inputs = vec![digest];
    let mut tables = Vec::new();
    for (i, spec) in specs.iter().enumerate() {
        let report = run_experiment(spec, i, &base)?;
        tables.push((format!("validate-{i}-{}", file_stem(&report.name)), experiment_table(&report)));
        doc.experiments.push(report);
    }
    Ok(Artifacts { command: "validate", report: doc, tables, svg: None })
}

/// Writes the requested formats into `--out`, or to `stdout` without it.
/// SVG output always gets its CSV sidecar when written to a directory.
pub fn emit(art: &Artifacts, output: &OutputArgs, stdout: &mut dyn Write) -> CliResult<Vec<PathBuf>> {
    let mut formats = output.format.clone();
    formats.dedup();
    check_svg(output, art.command)?;
    let mut written = Vec::new();
    match &output.out {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            let mut put = |name: String, contents: &str| -> CliResult<()> {
                let path = dir.join(name);
                std::fs::write(&path, contents)?;
                if !written.contains(&path) {
                    written.push(path);
                }
                Ok(())
            };
            for f in &formats {
                match f {
                    Format::Json => put(format!("{}.json", art.command), &art.report.to_json())?,
                    Format::Csv => {
                        for (stem, t) in &art.tables {
                            put(format!("{stem}.csv"), &t.to_csv())?;
                        }
                    }
                    Format::Svg => {
                        let svg = art.svg.as_deref().unwrap_or_default();
                        put(format!("{}.svg", art.command), svg)?;
                        if let Some((stem, t)) = art.tables.first() {
                            put(format!("{stem}.csv"), &t.to_csv())?;
                        }
                    }
                }
            }
        }
        None => {
            for f in &formats {
                match f {
                    Format::Json => stdout.write_all(art.report.to_json().as_bytes())?,
                    Format::Csv => {
                        for (_, t) in &art.tables {
                            stdout.write_all(t.to_csv().as_bytes())?;
                        }
                    }
                    Format::Svg => stdout.write_all(art.svg.as_deref().unwrap_or_default().as_bytes())?,
                }
            }
        }
    }
    Ok(written)
}
