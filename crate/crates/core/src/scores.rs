//! Score data model, ingestion and normalization.
//!
//! A [`ScoreSet`] holds one algorithm's scalar scores as tasks × runs. Run
//! counts may differ per task. Sets are immutable once built.

use std::collections::HashSet;
use std::io::{Read, Write};
use std::sync::Arc;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};

/// One algorithm's scores, `runs[m]` holding the runs of task `tasks[m]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreSet {
    algorithm: String,
    tasks: Arc<[String]>,
    runs: Vec<Vec<f64>>,
}

impl ScoreSet {
    /// Builds a validated set from `(task, runs)` pairs in task order.
    pub fn new<A, T, I>(algorithm: A, tasks: I) -> Result<Self>
    where
        A: Into<String>,
        T: Into<String>,
        I: IntoIterator<Item = (T, Vec<f64>)>,
    {
        let algorithm = algorithm.into();
        let (names, runs): (Vec<String>, Vec<Vec<f64>>) =
            tasks.into_iter().map(|(t, r)| (t.into(), r)).unzip();
        if names.is_empty() {
            return Err(Error::Validation(format!("algorithm `{algorithm}` has no tasks")));
        }
        let mut seen = HashSet::with_capacity(names.len());
        for (name, task_runs) in names.iter().zip(&runs) {
            if !seen.insert(name.as_str()) {
                return Err(Error::Validation(format!(
                    "algorithm `{algorithm}` lists task `{name}` twice"
                )));
            }
            if task_runs.is_empty() {
                return Err(Error::Validation(format!(
                    "algorithm `{algorithm}` task `{name}` has an empty run list"
                )));
            }
            if let Some(bad) = task_runs.iter().find(|x| !x.is_finite()) {
                return Err(Error::Validation(format!(
                    "algorithm `{algorithm}` task `{name}` has non-finite score {bad}"
                )));
            }
        }
        Ok(Self { algorithm, tasks: names.into(), runs })
    }

    /// Same task list, new runs. Callers guarantee non-empty finite runs.
    pub(crate) fn with_runs(&self, runs: Vec<Vec<f64>>) -> Self {
        debug_assert_eq!(runs.len(), self.tasks.len());
        debug_assert!(runs.iter().all(|r| !r.is_empty()));
        Self { algorithm: self.algorithm.clone(), tasks: Arc::clone(&self.tasks), runs }
    }

    /// Arbitrary task names (e.g. tasks drawn with replacement get unique
    /// positional names). Same guarantees as [`Self::with_runs`].
    pub(crate) fn from_parts(algorithm: String, tasks: Arc<[String]>, runs: Vec<Vec<f64>>) -> Self {
        debug_assert_eq!(runs.len(), tasks.len());
        Self { algorithm, tasks, runs }
    }

    pub fn algorithm(&self) -> &str {
        &self.algorithm
    }

    pub fn tasks(&self) -> &[String] {
        &self.tasks
    }

    pub fn num_tasks(&self) -> usize {
        self.tasks.len()
    }

    /// Runs of task `m`.
    pub fn runs(&self, m: usize) -> &[f64] {
        &self.runs[m]
    }

    pub fn all_runs(&self) -> &[Vec<f64>] {
        &self.runs
    }

    pub fn task_index(&self, task: &str) -> Option<usize> {
        self.tasks.iter().position(|t| t == task)
    }

    /// Runs of the named task.
    pub fn task_runs(&self, task: &str) -> Option<&[f64]> {
        self.task_index(task).map(|m| self.runs(m))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &[f64])> {
        self.tasks.iter().map(String::as_str).zip(self.runs.iter().map(Vec::as_slice))
    }

    pub fn run_counts(&self) -> Vec<usize> {
        self.runs.iter().map(Vec::len).collect()
    }

    pub fn total_runs(&self) -> usize {
        self.runs.iter().map(Vec::len).sum()
    }

    /// All runs concatenated in task order, run order preserved.
    pub fn pooled_scores(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.total_runs());
        for r in &self.runs {
            out.extend_from_slice(r);
        }
        out
    }

    /// Arithmetic mean of each task's runs.
    pub fn task_means(&self) -> Vec<f64> {
        self.runs.iter().map(|r| crate::aggregates::mean(r)).collect()
    }

    /// Sets whose task *set* matches ours are reordered to our task order.
    pub fn aligned_to(&self, other: &ScoreSet) -> Result<ScoreSet> {
        if other.num_tasks() != self.num_tasks() {
            return Err(Error::TaskMismatch(format!(
                "`{}` has {} tasks, `{}` has {}",
                self.algorithm,
                self.num_tasks(),
                other.algorithm,
                other.num_tasks()
            )));
        }
        let runs = self
            .tasks
            .iter()
            .map(|t| {
                other.task_runs(t).map(<[f64]>::to_vec).ok_or_else(|| {
                    Error::TaskMismatch(format!("task `{t}` missing from `{}`", other.algorithm))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ScoreSet::from_parts(other.algorithm.clone(), Arc::clone(&self.tasks), runs))
    }
}

/// Reference points of one task: `low` maps to 0 and `high` to 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Reference {
    pub low: f64,
    pub high: f64,
}

/// Per-task linear rescaling of raw scores.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NormalizationSpec {
    tasks: IndexMap<String, Reference>,
}

impl NormalizationSpec {
    pub fn new(tasks: IndexMap<String, Reference>) -> Result<Self> {
        for (task, r) in &tasks {
            if r.high == r.low {
                return Err(Error::DegenerateNormalization(task.clone()));
            }
            if !r.low.is_finite() || !r.high.is_finite() {
                return Err(Error::Validation(format!(
                    "normalization for task `{task}` is not finite"
                )));
            }
        }
        Ok(Self { tasks })
    }

    /// Reads `{<task>: {"low": x, "high": y}, ...}`.
    pub fn from_json<R: Read>(reader: R) -> Result<Self> {
        let tasks: IndexMap<String, Reference> =
            serde_json::from_reader(reader).map_err(|e| json_error("normalization", e))?;
        Self::new(tasks)
    }

    pub fn reference(&self, task: &str) -> Option<Reference> {
        self.tasks.get(task).copied()
    }
}

/// Maps every score to `(x − low) / (high − low)` using its task's references.
pub fn normalize(raw: &ScoreSet, spec: &NormalizationSpec) -> Result<ScoreSet> {
    let runs = raw
        .iter()
        .map(|(task, runs)| {
            let r = spec.reference(task).ok_or_else(|| Error::MissingTask(task.to_owned()))?;
            if r.high == r.low {
                return Err(Error::DegenerateNormalization(task.to_owned()));
            }
            let scale = r.high - r.low;
            Ok(runs.iter().map(|x| (x - r.low) / scale).collect::<Vec<_>>())
        })
        .collect::<Result<Vec<_>>>()?;
    if let Some((task, bad)) = raw.tasks().iter().zip(&runs).find_map(|(t, r)| {
        r.iter().find(|x| !x.is_finite()).map(|x| (t, *x))
    }) {
        return Err(Error::Validation(format!("normalized score {bad} on task `{task}` overflowed")));
    }
    Ok(raw.with_runs(runs))
}

/// Input encodings accepted by [`load_scores`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScoreFormat {
    Json,
    Csv,
}

impl ScoreFormat {
    /// Guesses from a file extension; anything but `.csv` is JSON.
    pub fn from_path(path: &std::path::Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => ScoreFormat::Csv,
            _ => ScoreFormat::Json,
        }
    }
}

/// Algorithm id → score set, in order of first appearance.
pub type ScoreTable = IndexMap<String, ScoreSet>;

/// Parses one or more algorithms' raw scores.
pub fn load_scores<R: Read>(source: R, format: ScoreFormat) -> Result<ScoreTable> {
    match format {
        ScoreFormat::Json => load_json(source),
        ScoreFormat::Csv => load_csv(source),
    }
}

/// Opens `path` and dispatches on its extension.
pub fn load_scores_path(path: &std::path::Path) -> Result<ScoreTable> {
    let file = std::fs::File::open(path)?;
    load_scores(std::io::BufReader::new(file), ScoreFormat::from_path(path))
}

fn json_error(what: &str, e: serde_json::Error) -> Error {
    Error::Parse {
        location: format!("{what} line {} column {}", e.line(), e.column()),
        message: e.to_string(),
    }
}

fn parse_error(location: String, message: impl Into<String>) -> Error {
    Error::Parse { location, message: message.into() }
}

fn load_json<R: Read>(source: R) -> Result<ScoreTable> {
    let value: Value = serde_json::from_reader(source).map_err(|e| json_error("json", e))?;
    let entries: Vec<(String, &Value)> = match &value {
        Value::Array(items) => {
            items.iter().enumerate().map(|(i, v)| (format!("[{i}]"), v)).collect()
        }
        Value::Object(_) => vec![(String::new(), &value)],
        _ => return Err(parse_error("$".into(), "expected an object or an array of objects")),
    };
    let mut table = ScoreTable::new();
    for (path, entry) in entries {
        let obj = entry
            .as_object()
            .ok_or_else(|| parse_error(format!("${path}"), "expected an object"))?;
        let alg = match obj.get("alg") {
            Some(Value::String(s)) => s.clone(),
            Some(_) => return Err(parse_error(format!("${path}.alg"), "expected a string")),
            None => return Err(parse_error(format!("${path}.alg"), "missing key `alg`")),
        };
        let scores = match obj.get("scores") {
            Some(Value::Object(m)) => m,
            Some(_) => return Err(parse_error(format!("${path}.scores"), "expected an object")),
            None => return Err(parse_error(format!("${path}.scores"), "missing key `scores`")),
        };
        let mut tasks = Vec::with_capacity(scores.len());
        for (task, runs) in scores {
            let loc = format!("${path}.scores.{task}");
            let runs = runs
                .as_array()
                .ok_or_else(|| parse_error(loc.clone(), "expected an array of numbers"))?;
            let runs = runs
                .iter()
                .enumerate()
                .map(|(i, v)| {
                    v.as_f64().ok_or_else(|| parse_error(format!("{loc}[{i}]"), "expected a number"))
                })
                .collect::<Result<Vec<_>>>()?;
            tasks.push((task.clone(), runs));
        }
        insert_unique(&mut table, ScoreSet::new(alg, tasks)?)?;
    }
    Ok(table)
}

fn insert_unique(table: &mut ScoreTable, set: ScoreSet) -> Result<()> {
    if table.contains_key(set.algorithm()) {
        return Err(Error::Validation(format!("algorithm `{}` appears twice", set.algorithm())));
    }
    table.insert(set.algorithm().to_owned(), set);
    Ok(())
}

#[derive(Debug, Deserialize, Serialize)]
struct CsvRow {
    algorithm: String,
    task: String,
    run: usize,
    score: f64,
}

fn load_csv<R: Read>(source: R) -> Result<ScoreTable> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(source);
    let headers = reader
        .headers()
        .map_err(|e| parse_error("csv header".into(), e.to_string()))?
        .clone();
    let expected = ["algorithm", "task", "run", "score"];
    if headers.iter().ne(expected) {
        return Err(parse_error(
            "csv line 1".into(),
            format!("expected header `{}`", expected.join(",")),
        ));
    }
    // algorithm → task → run index → score
    let mut grid: IndexMap<String, IndexMap<String, Vec<Option<f64>>>> = IndexMap::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(0);
            parse_error(format!("csv line {line}"), e.to_string())
        })?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let row: CsvRow = record
            .deserialize(Some(&headers))
            .map_err(|e| parse_error(format!("csv line {line}"), e.to_string()))?;
        if !row.score.is_finite() {
            return Err(Error::Validation(format!("csv line {line}: non-finite score {}", row.score)));
        }
        let slot = grid.entry(row.algorithm.clone()).or_default().entry(row.task.clone()).or_default();
        if slot.len() <= row.run {
            slot.resize(row.run + 1, None);
        }
        if slot[row.run].replace(row.score).is_some() {
            return Err(Error::Validation(format!(
                "csv line {line}: algorithm `{}` task `{}` run {} given twice",
                row.algorithm, row.task, row.run
            )));
        }
    }
    let mut table = ScoreTable::new();
    for (alg, tasks) in grid {
        let tasks = tasks
            .into_iter()
            .map(|(task, slots)| {
                let runs = slots
                    .iter()
                    .enumerate()
                    .map(|(i, s)| {
                        s.ok_or_else(|| {
                            Error::Validation(format!(
                                "algorithm `{alg}` task `{task}` is missing run {i}; run indices must be contiguous from 0"
                            ))
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok((task, runs))
            })
            .collect::<Result<Vec<_>>>()?;
        insert_unique(&mut table, ScoreSet::new(alg, tasks)?)?;
    }
    Ok(table)
}

#[derive(Serialize)]
struct JsonEntry<'a> {
    alg: &'a str,
    scores: IndexMap<&'a str, &'a [f64]>,
}

/// Writes sets as a JSON array of `{"alg", "scores"}` objects.
pub fn write_json<'a, W, I>(writer: W, sets: I) -> Result<()>
where
    W: Write,
    I: IntoIterator<Item = &'a ScoreSet>,
{
    let entries: Vec<JsonEntry> = sets
        .into_iter()
        .map(|s| JsonEntry { alg: s.algorithm(), scores: s.iter().collect() })
        .collect();
    serde_json::to_writer_pretty(writer, &entries).map_err(|e| Error::Io(e.into()))
}

/// Writes sets as `algorithm,task,run,score` rows.
pub fn write_csv<'a, W, I>(writer: W, sets: I) -> Result<()>
where
    W: Write,
    I: IntoIterator<Item = &'a ScoreSet>,
{
    let mut w = csv::Writer::from_writer(writer);
    for set in sets {
        for (task, runs) in set.iter() {
            for (run, &score) in runs.iter().enumerate() {
                w.serialize(CsvRow {
                    algorithm: set.algorithm().to_owned(),
                    task: task.to_owned(),
                    run,
                    score,
                })
                .map_err(|e| Error::Io(std::io::Error::other(e)))?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(tasks: &[(&str, &[f64])]) -> ScoreSet {
        ScoreSet::new("A", tasks.iter().map(|(t, r)| (*t, r.to_vec()))).unwrap()
    }

    #[test]
    fn json_single_object() {
        let t = load_scores(r#"{"alg":"A","scores":{"t1":[1.0,2.0]}}"#.as_bytes(), ScoreFormat::Json)
            .unwrap();
        assert_eq!(t["A"], set(&[("t1", &[1.0, 2.0])]));
    }

    #[test]
    fn json_array_keeps_task_order() {
        let src = r#"[{"alg":"A","scores":{"zeta":[1],"alpha":[2,3]}},
                      {"alg":"B","scores":{"zeta":[0.1],"alpha":[0.2]}}]"#;
        let t = load_scores(src.as_bytes(), ScoreFormat::Json).unwrap();
        assert_eq!(t.keys().collect::<Vec<_>>(), ["A", "B"]);
        assert_eq!(t["A"].tasks(), ["zeta", "alpha"]);
        assert_eq!(t["A"].runs(1), [2.0, 3.0]);
    }

    #[test]
    fn json_empty_runs_rejected() {
        let err = load_scores(r#"{"alg":"A","scores":{"t1":[]}}"#.as_bytes(), ScoreFormat::Json)
            .unwrap_err();
        assert!(matches!(err, Error::Validation(m) if m.contains("t1")));
    }

    #[test]
    fn json_errors_name_location() {
        let err = load_scores(r#"{"alg":"A","scores":{"t1":[1,"x"]}}"#.as_bytes(), ScoreFormat::Json)
            .unwrap_err();
        assert!(matches!(err, Error::Parse { ref location, .. } if location == "$.scores.t1[1]"), "{err}");
        let err = load_scores("{\n\"alg\": \"A\",\n\"scores\": {".as_bytes(), ScoreFormat::Json)
            .unwrap_err();
        assert!(matches!(err, Error::Parse { ref location, .. } if location.contains("line 3")), "{err}");
        let err = load_scores(r#"[{"scores":{}}]"#.as_bytes(), ScoreFormat::Json).unwrap_err();
        assert!(err.to_string().contains("alg"));
    }

    #[test]
    fn csv_row_placed_at_run_index() {
        let src = "algorithm,task,run,score\nA,t1,1,2.5\nA,t1,0,1.5\n";
        let t = load_scores(src.as_bytes(), ScoreFormat::Csv).unwrap();
        assert_eq!(t["A"].runs(0), [1.5, 2.5]);
    }

    #[test]
    fn csv_errors() {
        let gap = "algorithm,task,run,score\nA,t1,0,1\nA,t1,2,1\n";
        assert!(load_scores(gap.as_bytes(), ScoreFormat::Csv).is_err());
        let nan = "algorithm,task,run,score\nA,t1,0,NaN\n";
        assert!(matches!(load_scores(nan.as_bytes(), ScoreFormat::Csv), Err(Error::Validation(_))));
        let bad = "algorithm,task,run,score\nA,t1,0,1\nA,t1,x,1\n";
        let err = load_scores(bad.as_bytes(), ScoreFormat::Csv).unwrap_err();
        assert!(err.to_string().contains("line 3"), "{err}");
        let header = "alg,task,run,score\n";
        assert!(load_scores(header.as_bytes(), ScoreFormat::Csv).is_err());
    }

    #[test]
    fn duplicate_tasks_rejected() {
        assert!(ScoreSet::new("A", [("t", vec![1.0]), ("t", vec![2.0])]).is_err());
        assert!(ScoreSet::new("A", Vec::<(String, Vec<f64>)>::new()).is_err());
        assert!(ScoreSet::new("A", [("t", vec![f64::INFINITY])]).is_err());
    }

    #[test]
    fn normalize_reference_points() {
        let raw = set(&[("t", &[100.0, 50.0, 150.0])]);
        let spec =
            NormalizationSpec::new([("t".to_owned(), Reference { low: 50.0, high: 150.0 })].into())
                .unwrap();
        assert_eq!(normalize(&raw, &spec).unwrap().runs(0), [0.5, 0.0, 1.0]);
    }

    #[test]
    fn normalize_errors() {
        let raw = set(&[("t", &[1.0]), ("u", &[2.0])]);
        let spec = NormalizationSpec::from_json(r#"{"t":{"low":0,"high":1}}"#.as_bytes()).unwrap();
        assert!(matches!(normalize(&raw, &spec), Err(Error::MissingTask(t)) if t == "u"));
        let degenerate = NormalizationSpec::from_json(r#"{"t":{"low":3,"high":3}}"#.as_bytes());
        assert!(matches!(degenerate, Err(Error::DegenerateNormalization(_))));
    }

    #[test]
    fn pooled_and_means() {
        let s = set(&[("t1", &[1.0, 2.0]), ("t2", &[3.0])]);
        assert_eq!(s.pooled_scores(), [1.0, 2.0, 3.0]);
        assert_eq!(set(&[("t1", &[1.0, 3.0])]).task_means(), [2.0]);
        assert_eq!(set(&[("t1", &[2.0]), ("t2", &[4.0, 4.0])]).task_means(), [2.0, 4.0]);
        let big = ScoreSet::new("A", (0..26).map(|m| (format!("t{m}"), vec![0.5; 100]))).unwrap();
        assert_eq!(big.pooled_scores().len(), 2600);
        assert!(big.task_means().iter().all(|&m| m == 0.5));
    }

    #[test]
    fn align_reorders_by_name() {
        let a = set(&[("x", &[1.0]), ("y", &[2.0])]);
        let b = ScoreSet::new("B", [("y", vec![20.0]), ("x", vec![10.0])]).unwrap();
        let aligned = a.aligned_to(&b).unwrap();
        assert_eq!(aligned.tasks(), ["x", "y"]);
        assert_eq!(aligned.all_runs(), [vec![10.0], vec![20.0]]);
        let c = ScoreSet::new("C", [("x", vec![1.0]), ("z", vec![2.0])]).unwrap();
        assert!(matches!(a.aligned_to(&c), Err(Error::TaskMismatch(_))));
    }
}
