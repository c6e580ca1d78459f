//! Desk-scale studies with pass/fail verdicts.
//!
//! Each study reads its parameters and thresholds from the embedded criteria
//! file, runs once per seed and aggregates. Metrics depend only on the
//! parameters and seeds; wall-clock figures are kept apart in `timings`.

pub mod criteria;
pub mod plots;
pub mod stats;

mod high_dim;
mod info_loss;
mod isometry;
mod noise_robustness;
mod reconstruction_sweep;
mod refinement_comparison;
mod regression_shift;
mod sample_invariance;
mod vfa_failure;

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::codec::FunctionEncoding;
use crate::error::{HdfeError, Result};
use crate::hv::{similarity, Convention};

pub use criteria::{criteria, Criteria, CRITERIA_VERSION};
pub use plots::emit_plots;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentName {
    SampleInvariance,
    RefinementComparison,
    ReconstructionSweep,
    Isometry,
    InfoLoss,
    HighDim,
    NoiseRobustness,
    RegressionShift,
    VfaFailure,
}

impl ExperimentName {
    pub const ALL: [ExperimentName; 9] = [
        ExperimentName::SampleInvariance,
        ExperimentName::RefinementComparison,
        ExperimentName::ReconstructionSweep,
        ExperimentName::Isometry,
        ExperimentName::InfoLoss,
        ExperimentName::HighDim,
        ExperimentName::NoiseRobustness,
        ExperimentName::RegressionShift,
        ExperimentName::VfaFailure,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentName::SampleInvariance => "sample-invariance",
            ExperimentName::RefinementComparison => "refinement-comparison",
            ExperimentName::ReconstructionSweep => "reconstruction-sweep",
            ExperimentName::Isometry => "isometry",
            ExperimentName::InfoLoss => "info-loss",
            ExperimentName::HighDim => "high-dim",
            ExperimentName::NoiseRobustness => "noise-robustness",
            ExperimentName::RegressionShift => "regression-shift",
            ExperimentName::VfaFailure => "vfa-failure",
        }
    }
}

impl fmt::Display for ExperimentName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExperimentName {
    type Err = HdfeError;

    fn from_str(s: &str) -> Result<Self> {
        ExperimentName::ALL
            .into_iter()
            .find(|n| n.as_str() == s)
            .ok_or_else(|| HdfeError::Spec(format!("unknown experiment `{s}`")))
    }
}

/// What to run. Override values are TOML literals (`4096`, `[1, 2]`,
/// `"left"`); bare words are taken as strings.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub name: ExperimentName,
    pub overrides: BTreeMap<String, String>,
    pub seeds: Vec<u64>,
}

impl ExperimentSpec {
    /// Spec with the default seeds from the criteria file.
    pub fn new(name: ExperimentName) -> Self {
        ExperimentSpec {
            name,
            overrides: BTreeMap::new(),
            seeds: criteria().default_seeds(name),
        }
    }

    pub fn with_seeds(mut self, seeds: Vec<u64>) -> Self {
        self.seeds = seeds;
        self
    }

    pub fn with_override(mut self, key: &str, value: impl ToString) -> Self {
        self.overrides.insert(key.to_string(), value.to_string());
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.seeds.is_empty() {
            return Err(HdfeError::Spec("at least one seed is required".into()));
        }
        Ok(())
    }

    /// The study's parameter table with the overrides applied.
    pub fn params(&self) -> Result<toml::Table> {
        let mut table = criteria().study(self.name)?.clone();
        table.remove("seeds");
        table.remove("criteria");
        for (key, raw) in &self.overrides {
            if key == "seeds" || key == "criteria" {
                return Err(HdfeError::Spec(
                    "seeds and criteria cannot be overridden".into(),
                ));
            }
            if !table.contains_key(key) {
                return Err(HdfeError::Spec(format!(
                    "`{}` has no parameter `{key}`",
                    self.name
                )));
            }
            table.insert(key.clone(), parse_value(raw));
        }
        Ok(table)
    }
}

fn parse_value(raw: &str) -> toml::Value {
    #[derive(Deserialize)]
    struct Wrap {
        v: toml::Value,
    }
    match toml::from_str::<Wrap>(&format!("v = {raw}")) {
        Ok(w) => w.v,
        Err(_) => toml::Value::String(raw.to_string()),
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    /// Square table with the same labels on both axes.
    pub fn square(labels: &[String], values: Vec<Vec<f64>>) -> Self {
        Table {
            columns: labels.to_vec(),
            rows: values,
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        self.rows.push(row);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PlotKind {
    Line,
    Scatter,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub kind: PlotKind,
    pub x_label: String,
    pub y_label: String,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl Series {
    pub fn line(x_label: &str, y_label: &str, x: Vec<f64>, y: Vec<f64>) -> Self {
        Series {
            kind: PlotKind::Line,
            x_label: x_label.into(),
            y_label: y_label.into(),
            x,
            y,
        }
    }

    pub fn scatter(x_label: &str, y_label: &str, x: Vec<f64>, y: Vec<f64>) -> Self {
        Series {
            kind: PlotKind::Scatter,
            ..Series::line(x_label, y_label, x, y)
        }
    }
}

/// Metrics, tables and plot series of one run or of an aggregate.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunData {
    pub metrics: BTreeMap<String, f64>,
    pub tables: BTreeMap<String, Table>,
    pub series: BTreeMap<String, Series>,
}

impl RunData {
    pub fn metric(&mut self, key: &str, value: f64) {
        self.metrics.insert(key.to_string(), value);
    }

    pub fn table(&mut self, key: &str, table: Table) {
        self.tables.insert(key.to_string(), table);
    }

    pub fn series(&mut self, key: &str, series: Series) {
        self.series.insert(key.to_string(), series);
    }

    pub fn get(&self, key: &str) -> f64 {
        self.metrics.get(key).copied().unwrap_or(f64::NAN)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedReport {
    pub seed: u64,
    #[serde(flatten)]
    pub data: RunData,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub name: ExperimentName,
    pub criteria_version: u32,
    pub seeds: Vec<u64>,
    pub params: toml::Table,
    pub metrics: BTreeMap<String, f64>,
    pub tables: BTreeMap<String, Table>,
    pub series: BTreeMap<String, Series>,
    pub pass: BTreeMap<String, bool>,
    pub runtime_seconds: f64,
    /// Wall-clock measurements made inside the study. Not reproducible.
    pub timings: BTreeMap<String, f64>,
    pub per_seed: Vec<SeedReport>,
}

impl ExperimentReport {
    pub fn passed(&self) -> bool {
        self.pass.values().all(|&p| p)
    }

    pub fn aggregate(&self) -> RunData {
        RunData {
            metrics: self.metrics.clone(),
            tables: self.tables.clone(),
            series: self.series.clone(),
        }
    }
}

/// What a study hands back to the harness.
#[derive(Debug, Default)]
pub(crate) struct StudyOutput {
    pub per_seed: Vec<SeedReport>,
    pub aggregate: RunData,
    pub pass: BTreeMap<String, bool>,
    pub timings: BTreeMap<String, f64>,
}

impl StudyOutput {
    pub fn verdict(&mut self, key: &str, ok: bool) {
        self.pass.insert(key.to_string(), ok);
    }

    /// Per-seed values of one metric, in seed order.
    pub fn collect(&self, key: &str) -> Vec<f64> {
        self.per_seed.iter().map(|s| s.data.get(key)).collect()
    }

    /// Copies the across-seed mean of each listed metric into the aggregate.
    pub fn mean_of(&mut self, keys: &[&str]) {
        for k in keys {
            let v = stats::mean(&self.collect(k));
            self.aggregate.metric(&format!("mean-{k}"), v);
        }
    }
}

/// Independent generator for one purpose within one seed's run.
pub(crate) fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Real-cosine similarity of two encodings.
pub(crate) fn cosine(a: &FunctionEncoding, b: &FunctionEncoding) -> Result<f64> {
    Ok(similarity(&a.vector, &b.vector, Convention::RealCosine)?.value)
}

pub(crate) fn parse_params<T: serde::de::DeserializeOwned>(table: &toml::Table) -> Result<T> {
    table
        .clone()
        .try_into()
        .map_err(|e: toml::de::Error| HdfeError::Spec(e.message().to_string()))
}

pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentReport> {
    spec.validate()?;
    let params = spec.params()?;
    let start = Instant::now();
    let out = match spec.name {
        ExperimentName::SampleInvariance => sample_invariance::run(&params, &spec.seeds)?,
        ExperimentName::RefinementComparison => refinement_comparison::run(&params, &spec.seeds)?,
        ExperimentName::ReconstructionSweep => reconstruction_sweep::run(&params, &spec.seeds)?,
        ExperimentName::Isometry => isometry::run(&params, &spec.seeds)?,
        ExperimentName::InfoLoss => info_loss::run(&params, &spec.seeds)?,
        ExperimentName::HighDim => high_dim::run(&params, &spec.seeds)?,
        ExperimentName::NoiseRobustness => noise_robustness::run(&params, &spec.seeds)?,
        ExperimentName::RegressionShift => regression_shift::run(&params, &spec.seeds)?,
        ExperimentName::VfaFailure => vfa_failure::run(&params, &spec.seeds)?,
    };
    let declared = criteria().declared(spec.name);
    for key in &declared {
        if !out.pass.contains_key(key) {
            return Err(HdfeError::Spec(format!(
                "`{}` did not report criterion `{key}`",
                spec.name
            )));
        }
    }
    Ok(ExperimentReport {
        name: spec.name,
        criteria_version: CRITERIA_VERSION,
        seeds: spec.seeds.clone(),
        params,
        metrics: out.aggregate.metrics,
        tables: out.aggregate.tables,
        series: out.aggregate.series,
        pass: out.pass,
        runtime_seconds: start.elapsed().as_secs_f64(),
        timings: out.timings,
        per_seed: out.per_seed,
    })
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| HdfeError::Serialize(e.to_string()))?;
    fs::write(path, text + "\n").map_err(|e| HdfeError::io(path, e))
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| HdfeError::io(dir, e))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryEntry {
    pub pass: bool,
    pub criteria: BTreeMap<String, bool>,
    pub seeds: Vec<u64>,
    pub runtime_seconds: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub criteria_version: u32,
    pub pass: bool,
    pub experiments: BTreeMap<String, SummaryEntry>,
}

impl Summary {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| HdfeError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| HdfeError::Serialize(e.to_string()))
    }
}

/// Writes the per-seed and aggregate reports, their series and figures, and
/// merges the verdicts into `<out>/summary.json`. Returns every file written.
pub fn write_outputs(report: &ExperimentReport, out: &Path) -> Result<Vec<PathBuf>> {
    let base = out.join(report.name.as_str());
    let mut written = Vec::new();

    for s in &report.per_seed {
        let dir = base.join(s.seed.to_string());
        create_dir(&dir)?;
        let path = dir.join("report.json");
        write_json(&path, s)?;
        written.push(path);
        written.extend(emit_plots(&s.data, &dir)?);
    }

    let dir = base.join("aggregate");
    create_dir(&dir)?;
    let path = dir.join("report.json");
    write_json(&path, report)?;
    written.push(path);
    written.extend(emit_plots(&report.aggregate(), &dir)?);

    let summary_path = out.join("summary.json");
    let mut summary = if summary_path.exists() {
        Summary::load(&summary_path)?
    } else {
        Summary::default()
    };
    summary.criteria_version = report.criteria_version;
    summary.experiments.insert(
        report.name.to_string(),
        SummaryEntry {
            pass: report.passed(),
            criteria: report.pass.clone(),
            seeds: report.seeds.clone(),
            runtime_seconds: report.runtime_seconds,
        },
    );
    summary.pass = summary.experiments.values().all(|e| e.pass);
    write_json(&summary_path, &summary)?;
    written.push(summary_path);
    Ok(written)
}
