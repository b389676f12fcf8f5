//! The JSON report document and its CSV tables.

use precipice::harness::ExperimentReport;
use precipice::{IntervalEstimate, Metric, ProfileCurve, RankDistribution, ResampleStrategy};
use serde::Serialize;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize)]
pub struct Tool {
    pub name: &'static str,
    pub version: &'static str,
}

impl Tool {
    pub const CURRENT: Tool = Tool { name: "precipice", version: env!("CARGO_PKG_VERSION") };
}

#[derive(Debug, Clone, Serialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

/// Settings that, with the inputs, reproduce the report.
#[derive(Debug, Clone, Default, Serialize)]
pub struct Settings {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ci_method: Option<precipice::CiMethod>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coverage: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub replicates: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub strategy: Option<ResampleStrategy>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub profile_kind: Option<precipice::ProfileKind>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bands: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rescale_axis: Option<bool>,
}

#[derive(Debug, Clone, Serialize)]
pub struct MetricRow {
    pub algorithm: String,
    pub metric: String,
    pub parameters: Metric,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub subsample_size: Option<usize>,
    pub estimate: IntervalEstimate,
}

#[derive(Debug, Clone, Serialize)]
pub struct Comparison {
    pub x: String,
    pub y: String,
    /// P(X > Y) with its interval.
    pub p_x_over_y: IntervalEstimate,
    /// P(Y > X); its interval is the complement of the one above.
    pub p_y_over_x: IntervalEstimate,
    pub statistically_significant: bool,
    pub statistically_meaningful: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ProfileRecord {
    pub algorithm: String,
    pub curve: ProfileCurve,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub band_replicates: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub band_seed: Option<u64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReportDocument {
    pub schema_version: u32,
    pub tool: Tool,
    pub command: &'static str,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub inputs: Vec<InputDigest>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub normalization: Option<InputDigest>,
    pub settings: Settings,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub metrics: Vec<MetricRow>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub comparisons: Vec<Comparison>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub profiles: Vec<ProfileRecord>,
    /// `(τ, coordinate in [0, 1])` pairs of the rescaled axis.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau_axis: Option<Vec<(f64, f64)>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ranks: Option<RankDistribution>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub experiments: Vec<ExperimentReport>,
}

impl ReportDocument {
    pub fn new(command: &'static str) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            tool: Tool::CURRENT,
            command,
            inputs: Vec::new(),
            normalization: None,
            settings: Settings::default(),
            metrics: Vec::new(),
            comparisons: Vec::new(),
            profiles: Vec::new(),
            tau_axis: None,
            ranks: None,
            experiments: Vec::new(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// Number formatting shared by CSV cells and SVG data attributes.
pub fn num(x: f64) -> String {
    x.to_string()
}

/// Label for a metric; parameters are shown only when they differ from the defaults.
pub fn metric_label(m: &Metric) -> String {
    let param = match *m {
        Metric::Mean | Metric::Median => None,
        Metric::Iqm { trim_fraction: p } => (p != precipice::aggregates::DEFAULT_TRIM).then_some(p),
        Metric::OptimalityGap { gamma: p } => (p != precipice::aggregates::DEFAULT_GAMMA).then_some(p),
        Metric::DifficultyProgress { fraction: p } => (p != precipice::aggregates::DEFAULT_TRIM).then_some(p),
        Metric::SuperhumanProb { threshold: p } => (p != precipice::aggregates::DEFAULT_GAMMA).then_some(p),
    };
    match param {
        Some(p) => format!("{}:{}", m.name(), num(p)),
        None => m.name().to_owned(),
    }
}

/// A CSV table held as formatted cells.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self { header: header.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 cells")
    }
}

pub fn metrics_table(rows: &[MetricRow]) -> Table {
    let mut t = Table::new(["algorithm", "metric", "point", "lower", "upper", "method", "coverage", "replicates", "seed"]);
    for r in rows {
        let e = &r.estimate;
        t.push(vec![
            r.algorithm.clone(),
            r.metric.clone(),
            num(e.point),
            num(e.lower),
            num(e.upper),
            e.method.to_string(),
            num(e.nominal_coverage),
            e.replicates.to_string(),
            e.seed.to_string(),
        ]);
    }
    t
}

pub fn comparisons_table(rows: &[Comparison]) -> Table {
    let mut t = Table::new([
        "x", "y", "p_x_over_y", "lower", "upper", "p_y_over_x", "lower_y_over_x", "upper_y_over_x",
        "statistically_significant", "statistically_meaningful", "method", "replicates", "seed",
    ]);
    for c in rows {
        let (p, q) = (&c.p_x_over_y, &c.p_y_over_x);
        t.push(vec![
            c.x.clone(),
            c.y.clone(),
            num(p.point),
            num(p.lower),
            num(p.upper),
            num(q.point),
            num(q.lower),
            num(q.upper),
            c.statistically_significant.to_string(),
            c.statistically_meaningful.to_string(),
            p.method.to_string(),
            p.replicates.to_string(),
            p.seed.to_string(),
        ]);
    }
    t
}

/// One row per (algorithm, τ). Band and axis columns appear only when present.
pub fn profiles_table(profiles: &[ProfileRecord], axis: Option<&[(f64, f64)]>) -> Table {
    let bands = profiles.iter().any(|p| p.curve.bands().is_some());
    let mut header = vec!["algorithm", "tau", "value"];
    if bands {
        header.extend(["lower", "upper"]);
    }
    if axis.is_some() {
        header.push("axis");
    }
    let mut t = Table::new(header);
    for p in profiles {
        for (i, (tau, value, band)) in p.curve.records().enumerate() {
            let mut row = vec![p.algorithm.clone(), num(tau), num(value)];
            if bands {
                let (lo, hi) = band.unwrap_or((value, value));
                row.extend([num(lo), num(hi)]);
            }
            if let Some(axis) = axis {
                row.push(num(axis[i].1));
            }
            t.push(row);
        }
    }
    t
}

/// `scope` is `mean` for the task-averaged matrix, otherwise the task name.
pub fn ranks_table(r: &RankDistribution) -> Table {
    let mut header = vec!["scope".to_owned(), "algorithm".to_owned()];
    header.extend((1..=r.algorithms.len()).map(|k| format!("rank_{k}")));
    let mut t = Table::new(header);
    let mut add = |scope: &str, matrix: &[Vec<f64>]| {
        for (alg, row) in r.algorithms.iter().zip(matrix) {
            let mut cells = vec![scope.to_owned(), alg.clone()];
            cells.extend(row.iter().map(|&p| num(p)));
            t.push(cells);
        }
    };
    add("mean", &r.mean_matrix);
    for (task, matrix) in r.tasks.iter().zip(&r.per_task) {
        add(task, matrix);
    }
    t
}

pub fn experiment_table(report: &ExperimentReport) -> Table {
    let (header, rows) = report.table();
    let mut t = Table::new(header);
    for row in rows {
        t.push(row);
    }
    t
}
