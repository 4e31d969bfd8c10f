//! Experiment grid: ground truth × model variant × seed.
//!
//! Output layout under the output directory:
//!
//! ```text
//! summary.csv                         rows = models, columns = truths, "mean ± std"
//! summary.json                        full-precision summary and per-run MSEs
//! metadata.json                       wall-clock timings (not reproducible)
//! runs/<truth>_<model>_<seed>/trace.csv
//! runs/<truth>_<model>_<seed>/record.json
//! runs/<truth>_<model>_<seed>/trajectory.svg   routed runs only
//! runs/<truth>_<model>_<seed>/fit.svg
//! ```
//!
//! Every cell is trained independently from its own seed, so the results do
//! not depend on scheduling or on `jobs`.

use std::collections::HashSet;
use std::fmt;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant, SystemTime, UNIX_EPOCH};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::activations::{ActivationKind, Catalog};
use crate::harness::plots::{emit_fit_plot, emit_trajectory_plot};
use crate::model::{evaluate, train, Network, NetworkMode, TrainConfig, TrainTrace};
use crate::numkit::{Matrix, Vector};
use crate::routing::{Logits, ProbVector, RoutedLayer};
use crate::synthdata::{generate, split, Dataset, DatasetSpec};
use crate::{Error, Result};

/// Column order of `trace.csv`.
pub const TRACE_HEADER: &str = "epoch,task_loss,kl_loss,total_loss,tau,p_relu,p_sigmoid,p_tanh,p_lrelu,p_identity";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ModelVariant {
    Routed { alpha: f64 },
    Fixed { activation: ActivationKind },
}

impl ModelVariant {
    pub fn routed(alpha: f64) -> Self {
        ModelVariant::Routed { alpha }
    }

    pub fn fixed(activation: ActivationKind) -> Self {
        ModelVariant::Fixed { activation }
    }

    pub fn mode(&self) -> NetworkMode {
        match *self {
            ModelVariant::Routed { .. } => NetworkMode::Routed,
            ModelVariant::Fixed { activation } => NetworkMode::Fixed(activation),
        }
    }

    pub fn is_routed(&self) -> bool {
        matches!(self, ModelVariant::Routed { .. })
    }

    /// File-name slug, e.g. `routed-a0.3` or `fixed-tanh`.
    pub fn slug(&self) -> String {
        match self {
            ModelVariant::Routed { alpha } => format!("routed-a{alpha}"),
            ModelVariant::Fixed { activation } => format!("fixed-{}", activation.name()),
        }
    }

    /// The default comparison: routed at α = 0.3 and 0.0, then the five fixed baselines.
    pub fn default_set() -> Vec<ModelVariant> {
        let mut v = vec![ModelVariant::routed(0.3), ModelVariant::routed(0.0)];
        v.extend(ActivationKind::ALL.map(ModelVariant::fixed));
        v
    }
}

impl fmt::Display for ModelVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelVariant::Routed { alpha } => write!(f, "Routed (alpha = {alpha:.1})"),
            ModelVariant::Fixed { activation } => write!(f, "{} model", activation.label()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    pub truth: ActivationKind,
    pub model: ModelVariant,
    pub seed: u64,
}

impl GridCell {
    pub fn dir_name(&self) -> String {
        format!("{}_{}_{}", self.truth.name(), self.model.slug(), self.seed)
    }
}

/// Dataset settings shared by every cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DataConfig {
    pub n_train: usize,
    pub n_test: usize,
    pub scale: f64,
    pub leaky_slope: f64,
}

impl Default for DataConfig {
    fn default() -> Self {
        Self { n_train: 2048, n_test: 512, scale: 5.0, leaky_slope: crate::activations::DEFAULT_LEAKY_SLOPE }
    }
}

impl DataConfig {
    pub fn catalog(&self) -> Result<Catalog> {
        Catalog::new(self.leaky_slope)
    }

    /// Train and test splits for one truth and seed.
    pub fn build(&self, truth: ActivationKind, seed: u64) -> Result<(Dataset, Dataset)> {
        let n = self.n_train + self.n_test;
        let spec = DatasetSpec {
            scale: self.scale,
            catalog: self.catalog()?,
            ..DatasetSpec::new(truth, n, seed)
        };
        let data = generate(&spec)?;
        split(&data, self.n_train as f64 / n as f64, seed)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub truths: Vec<ActivationKind>,
    pub models: Vec<ModelVariant>,
    pub seeds: Vec<u64>,
    /// Shared training settings; `alpha` and `seed` are overridden per cell.
    pub train: TrainConfig,
    pub data: DataConfig,
    pub out: PathBuf,
    pub jobs: usize,
    pub plots: bool,
    pub export_data: bool,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        Self {
            truths: ActivationKind::ALL.to_vec(),
            models: ModelVariant::default_set(),
            seeds: (0..5).collect(),
            train: TrainConfig::default(),
            data: DataConfig::default(),
            out: PathBuf::from("results"),
            jobs: 0,
            plots: true,
            export_data: false,
        }
    }
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        if self.seeds.is_empty() || self.truths.is_empty() || self.models.is_empty() {
            return Err(Error::InvalidConfig("grid needs at least one truth, model and seed".into()));
        }
        let mut seen = HashSet::new();
        for c in self.cells() {
            if !seen.insert(c.dir_name()) {
                return Err(Error::InvalidConfig(format!("duplicate grid cell {}", c.dir_name())));
            }
        }
        for m in &self.models {
            if let ModelVariant::Routed { alpha } = m {
                TrainConfig { alpha: *alpha, ..self.train }.validate()?;
            }
        }
        self.train.validate()?;
        self.data.catalog()?;
        if self.data.n_train == 0 || self.data.n_test == 0 {
            return Err(Error::InvalidConfig("train and test sizes must be >= 1".into()));
        }
        Ok(())
    }

    /// Cells in truth-major, then model, then seed order.
    pub fn cells(&self) -> Vec<GridCell> {
        let mut out = Vec::with_capacity(self.truths.len() * self.models.len() * self.seeds.len());
        for &truth in &self.truths {
            for &model in &self.models {
                for &seed in &self.seeds {
                    out.push(GridCell { truth, model, seed });
                }
            }
        }
        out
    }

    pub fn train_config(&self, cell: &GridCell) -> TrainConfig {
        let alpha = match cell.model {
            ModelVariant::Routed { alpha } => alpha,
            ModelVariant::Fixed { .. } => 0.0,
        };
        TrainConfig { alpha, seed: cell.seed, ..self.train }
    }
}

/// Final trained parameters, enough to rebuild the network for plotting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FinalParams {
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
    pub logits: Logits,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum RunStatus {
    Ok,
    Failed { epoch: Option<usize>, message: String },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunRecord {
    pub cell: GridCell,
    pub status: RunStatus,
    pub test_mse: Option<f64>,
    /// Hard selection for routed runs.
    pub selected: Option<ActivationKind>,
    pub final_p_soft: Option<ProbVector>,
    pub params: Option<FinalParams>,
    #[serde(skip)]
    pub trace: TrainTrace,
    #[serde(skip)]
    pub duration: Duration,
}

impl RunRecord {
    pub fn is_ok(&self) -> bool {
        self.status == RunStatus::Ok
    }

    /// Rebuilds the trained network from the stored parameters.
    pub fn network(&self, catalog: Catalog) -> Option<Network> {
        let p = self.params.as_ref()?;
        let w = Matrix::new(1, p.weights.len(), p.weights.clone()).ok()?;
        let mut layer = RoutedLayer::from_params(w, Vector::new(p.bias.clone())).ok()?.with_catalog(catalog);
        layer.set_logits(p.logits).ok()?;
        Some(Network { layer, mode: self.cell.model.mode() })
    }

    /// Epochs whose mean soft probabilities peak on ReLU or LeakyReLU.
    pub fn unbounded_epochs(&self) -> usize {
        self.trace.epochs_with_argmax_in(&[ActivationKind::Relu, ActivationKind::LeakyRelu])
    }
}

/// Trains and evaluates one cell.
pub fn run_cell(spec: &ExperimentSpec, cell: GridCell) -> RunRecord {
    let start = Instant::now();
    let mut rec = RunRecord {
        cell,
        status: RunStatus::Ok,
        test_mse: None,
        selected: None,
        final_p_soft: None,
        params: None,
        trace: TrainTrace::default(),
        duration: Duration::ZERO,
    };
    let outcome = (|| -> Result<()> {
        let catalog = spec.data.catalog()?;
        let (train_set, test_set) = spec.data.build(cell.truth, cell.seed)?;
        let mut net = Network::new(train_set.d_in(), 1, cell.model.mode(), cell.seed).with_catalog(catalog);
        let cfg = spec.train_config(&cell);
        rec.trace = train(&mut net, &train_set, &cfg)?;
        rec.test_mse = Some(evaluate(&net, &test_set)?);
        if cell.model.is_routed() {
            rec.selected = Some(net.selected());
            rec.final_p_soft = rec.trace.last().map(|r| r.p_soft);
        }
        rec.params = Some(FinalParams {
            weights: net.layer.weights().as_slice().to_vec(),
            bias: net.layer.bias().as_slice().to_vec(),
            logits: *net.layer.logits(),
        });
        Ok(())
    })();
    if let Err(e) = outcome {
        let epoch = match e {
            Error::Diverged { epoch, .. } => Some(epoch),
            _ => None,
        };
        rec.status = RunStatus::Failed { epoch, message: e.to_string() };
    }
    rec.duration = start.elapsed();
    rec
}

/// Mean and sample standard deviation (zero for a single value).
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryCell {
    pub model: ModelVariant,
    pub truth: ActivationKind,
    pub mse_mean: f64,
    pub mse_std: f64,
    /// Per-seed test MSEs of successful runs, in seed order.
    pub mse_runs: Vec<f64>,
    pub failed: usize,
    /// Fraction of seeds whose hard selection equals the truth (routed only).
    pub selection_fraction: Option<f64>,
    /// Mean number of epochs with the soft-probability peak on ReLU/LeakyReLU (routed only).
    pub mean_unbounded_epochs: Option<f64>,
    /// Seeds whose final soft probability of the truth exceeds 0.9 (routed only).
    pub converged_seeds: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryTable {
    pub truths: Vec<ActivationKind>,
    pub models: Vec<ModelVariant>,
    pub seeds: Vec<u64>,
    pub cells: Vec<SummaryCell>,
}

impl SummaryTable {
    pub fn from_records(spec: &ExperimentSpec, records: &[RunRecord]) -> Self {
        let mut cells = Vec::new();
        for &model in &spec.models {
            for &truth in &spec.truths {
                let runs: Vec<&RunRecord> =
                    records.iter().filter(|r| r.cell.model == model && r.cell.truth == truth).collect();
                let mse_runs: Vec<f64> = runs.iter().filter_map(|r| r.test_mse).collect();
                let (mse_mean, mse_std) = mean_std(&mse_runs);
                let failed = runs.iter().filter(|r| !r.is_ok()).count();
                let n = runs.len().max(1) as f64;
                let routed = model.is_routed();
                cells.push(SummaryCell {
                    model,
                    truth,
                    mse_mean,
                    mse_std,
                    mse_runs,
                    failed,
                    selection_fraction: routed
                        .then(|| runs.iter().filter(|r| r.selected == Some(truth)).count() as f64 / n),
                    mean_unbounded_epochs: routed
                        .then(|| runs.iter().map(|r| r.unbounded_epochs() as f64).sum::<f64>() / n),
                    converged_seeds: routed.then(|| {
                        runs.iter().filter(|r| r.final_p_soft.is_some_and(|p| p.get(truth) > 0.9)).count()
                    }),
                });
            }
        }
        Self { truths: spec.truths.clone(), models: spec.models.clone(), seeds: spec.seeds.clone(), cells }
    }

    pub fn get(&self, model: ModelVariant, truth: ActivationKind) -> Option<&SummaryCell> {
        self.cells.iter().find(|c| c.model == model && c.truth == truth)
    }

    /// Table-shaped CSV: one row per model, one `mean ± std` column per truth.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("model");
        for t in &self.truths {
            s.push(',');
            s.push_str(t.label());
        }
        s.push('\n');
        for &m in &self.models {
            s.push_str(&m.to_string());
            for &t in &self.truths {
                let c = self.get(m, t).expect("summary covers the grid");
                if c.mse_runs.is_empty() {
                    s.push_str(",failed");
                } else {
                    s.push_str(&format!(",{:.4} ± {:.4}", c.mse_mean, c.mse_std));
                }
            }
            s.push('\n');
        }
        s
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// CSV text for one trace in [`TRACE_HEADER`] column order.
pub fn trace_csv(trace: &TrainTrace) -> String {
    let mut s = String::from(TRACE_HEADER);
    s.push('\n');
    for r in &trace.records {
        let p = r.p_soft.as_array();
        s.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            r.epoch, r.task_loss, r.kl_loss, r.total_loss, r.tau, p[0], p[1], p[2], p[3], p[4]
        ));
    }
    s
}

pub struct GridOutput {
    pub summary: SummaryTable,
    pub records: Vec<RunRecord>,
}

fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

/// Runs every cell, writes all artifacts and returns the summary.
pub fn run_grid(spec: &ExperimentSpec) -> Result<GridOutput> {
    spec.validate()?;
    let runs_dir = spec.out.join("runs");
    fs::create_dir_all(&runs_dir).map_err(|e| Error::io(&runs_dir, e))?;

    let started = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let clock = Instant::now();
    let cells = spec.cells();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(spec.jobs)
        .build()
        .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
    let records: Vec<RunRecord> = pool.install(|| cells.par_iter().map(|&c| run_cell(spec, c)).collect());

    let catalog = spec.data.catalog()?;
    for rec in &records {
        let dir = runs_dir.join(rec.cell.dir_name());
        fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        write(&dir.join("trace.csv"), &trace_csv(&rec.trace))?;
        write(&dir.join("record.json"), &serde_json::to_string_pretty(rec)?)?;
        if spec.plots && rec.is_ok() {
            if rec.cell.model.is_routed() {
                emit_trajectory_plot(rec, &dir.join("trajectory.svg"))?;
            }
            let (_, test) = spec.data.build(rec.cell.truth, rec.cell.seed)?;
            emit_fit_plot(rec, &test, catalog, &dir.join("fit.svg"))?;
        }
    }

    if spec.export_data {
        let data_dir = spec.out.join("data");
        fs::create_dir_all(&data_dir).map_err(|e| Error::io(&data_dir, e))?;
        for &truth in &spec.truths {
            for &seed in &spec.seeds {
                let (tr, te) = spec.data.build(truth, seed)?;
                tr.save_csv(&data_dir.join(format!("{}_{seed}_train.csv", truth.name())))?;
                te.save_csv(&data_dir.join(format!("{}_{seed}_test.csv", truth.name())))?;
            }
        }
    }

    let summary = SummaryTable::from_records(spec, &records);
    write(&spec.out.join("summary.csv"), &summary.to_csv())?;
    write(&spec.out.join("summary.json"), &summary.to_json()?)?;
    write_metadata(spec, &records, started, clock.elapsed())?;
    Ok(GridOutput { summary, records })
}

fn write_metadata(spec: &ExperimentSpec, records: &[RunRecord], started: u64, total: Duration) -> Result<()> {
    #[derive(Serialize)]
    struct RunTiming {
        run: String,
        seconds: f64,
    }
    #[derive(Serialize)]
    struct Metadata<'a> {
        started_unix: u64,
        total_seconds: f64,
        jobs: usize,
        spec: &'a ExperimentSpec,
        runs: Vec<RunTiming>,
    }
    let meta = Metadata {
        started_unix: started,
        total_seconds: total.as_secs_f64(),
        jobs: spec.jobs,
        spec,
        runs: records
            .iter()
            .map(|r| RunTiming { run: r.cell.dir_name(), seconds: r.duration.as_secs_f64() })
            .collect(),
    };
    let path = spec.out.join("metadata.json");
    let mut f = fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
    f.write_all(serde_json::to_string_pretty(&meta)?.as_bytes()).map_err(|e| Error::io(&path, e))
}
