//! Machine-readable run reports.

use nalgebra::DMatrix;
use num_complex::Complex;
use oamsim_core::tomography::Uncertainty;
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexMatrixJson {
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl From<&DMatrix<Complex<f64>>> for ComplexMatrixJson {
    fn from(m: &DMatrix<Complex<f64>>) -> Self {
        let rows = |f: fn(&Complex<f64>) -> f64| {
            (0..m.nrows()).map(|r| (0..m.ncols()).map(|c| f(&m[(r, c)])).collect()).collect()
        };
        Self { re: rows(|z| z.re), im: rows(|z| z.im) }
    }
}

pub fn real_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|r| m.row(r).iter().copied().collect()).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransferReport {
    /// Readout of the trained stack before efficiency normalization.
    pub h_raw: ComplexMatrixJson,
    /// The H block used in the gate.
    pub h: ComplexMatrixJson,
    pub v: ComplexMatrixJson,
    pub efficiency: f64,
    pub captured_power: [f64; 4],
    pub raw_unitarity_defect: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainingReport {
    pub iterations: usize,
    pub initial_loss: f64,
    pub final_loss: f64,
    pub loss_ratio: f64,
    pub history: Vec<f64>,
}

impl TrainingReport {
    pub fn from_history(history: &[f64]) -> Self {
        let initial_loss = history.first().copied().unwrap_or(f64::NAN);
        let final_loss = history.last().copied().unwrap_or(f64::NAN);
        Self {
            iterations: history.len().saturating_sub(1),
            initial_loss,
            final_loss,
            loss_ratio: final_loss / initial_loss,
            history: history.to_vec(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UncertaintyReport {
    pub mean_total: f64,
    /// Metric on the sampled dataset itself.
    pub value: f64,
    pub mean: f64,
    pub stddev: f64,
    pub trials: usize,
    pub dropped: usize,
}

impl UncertaintyReport {
    pub fn new(mean_total: f64, value: f64, u: Uncertainty) -> Self {
        Self { mean_total, value, mean: u.mean, stddev: u.stddev, trials: u.trials, dropped: u.dropped }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruthTableReport {
    pub probs: Vec<Vec<f64>>,
    pub row_visibility: Vec<f64>,
    pub visibility: f64,
    pub sampled: UncertaintyReport,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionReport {
    pub mean_total: f64,
    pub fidelity: f64,
    pub iterations: usize,
    pub converged: bool,
    pub uncertainty: Option<UncertaintyReport>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateReport {
    pub label: String,
    pub fidelity: f64,
    /// Output norm before renormalization.
    pub norm: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub reconstruction: Option<ReconstructionReport>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntangledReport {
    /// `listed` for the tabulated Toffoli outputs, `ideal-gate` otherwise.
    pub expected: String,
    pub states: Vec<StateReport>,
    pub min_fidelity: Option<f64>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QptReport {
    pub fidelity: f64,
    /// `Re Tr(χ_a χ_b)` before clamping to [0, 1].
    pub raw_fidelity: f64,
    pub iterations: usize,
    pub converged: bool,
    pub log_likelihood: f64,
    pub trace_defect: f64,
    pub pseudo_inverse: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProcessReport {
    pub noiseless: QptReport,
    pub mean_total: f64,
    pub sampled: QptReport,
    pub uncertainty: Option<UncertaintyReport>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdCheck {
    pub name: String,
    pub value: Option<f64>,
    pub minimum: f64,
    pub passed: bool,
}

impl ThresholdCheck {
    pub fn new(name: &str, value: Option<f64>, minimum: f64) -> Self {
        let passed = value.is_some_and(|v| v >= minimum);
        Self { name: name.to_string(), value, minimum, passed }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub kind: String,
    pub gate: String,
    pub config: RunConfig,
    pub accepted: bool,
    pub unitarity_defect: f64,
    pub acceptance_limit: f64,
    pub training: Option<TrainingReport>,
    pub transfer: Option<TransferReport>,
    pub truth_table: TruthTableReport,
    pub probes: Vec<StateReport>,
    pub entangled: EntangledReport,
    pub process: ProcessReport,
    pub thresholds: Vec<ThresholdCheck>,
    pub literature: Literature,
}

impl Report {
    pub fn failed_thresholds(&self) -> Vec<String> {
        self.thresholds
            .iter()
            .filter(|t| !t.passed)
            .map(|t| match t.value {
                Some(v) => format!("{} {v:.5} < {}", t.name, t.minimum),
                None => format!("{} unavailable", t.name),
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub schema_version: u32,
    pub kind: String,
    pub gate: String,
    pub config: RunConfig,
    pub initial_loss: f64,
    pub final_loss: f64,
    pub loss_ratio: f64,
    pub transfer: TransferReport,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Published {
    pub label: String,
    pub value: f64,
    pub uncertainty: Option<f64>,
}

fn published(label: &str, value: f64, uncertainty: Option<f64>) -> Published {
    Published { label: label.to_string(), value, uncertainty }
}

/// Published reference numbers, carried for comparison only.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Literature {
    pub acceptance_target: bool,
    pub note: String,
    pub experimental: Vec<Published>,
    pub simulated: Vec<Published>,
}

impl Default for Literature {
    fn default() -> Self {
        Self {
            acceptance_target: false,
            note: "Published values for comparison only. The experimental numbers depend on hardware \
                   imperfections that this simulator does not model; none of them is an acceptance target."
                .into(),
            experimental: vec![
                published("toffoli truth-table visibility", 0.9727, Some(0.0020)),
                published("toffoli process fidelity", 0.9405, Some(0.0002)),
                published("state fidelity U|11-i>", 0.9518, Some(0.0044)),
                published("state fidelity U|+1+i>", 0.9312, Some(0.0067)),
                published("state fidelity U|+i+i+>", 0.979, Some(0.0045)),
            ],
            simulated: vec![
                published("toffoli truth-table visibility", 0.9986, None),
                published("toffoli process fidelity", 0.9909, None),
                published("cch process fidelity", 0.9926, None),
                published("fredkin process fidelity", 0.9989, None),
                published("ccz process fidelity", 0.9989, None),
                published("psi1 fidelity", 0.9967, None),
                published("psi2 fidelity", 0.9955, None),
                published("psi3 fidelity", 0.9963, None),
                published("psi4 fidelity", 0.9972, None),
                published("psi5 fidelity", 0.9964, None),
                published("psi6 fidelity", 0.9965, None),
                published("psi7 fidelity", 0.9974, None),
                published("psi8 fidelity", 0.9962, None),
            ],
        }
    }
}

impl Literature {
    pub fn lines(&self) -> Vec<String> {
        let fmt = |p: &Published| match p.uncertainty {
            Some(u) => format!("{}: {:.2} ± {:.2} %", p.label, 100.0 * p.value, 100.0 * u),
            None => format!("{}: {:.2} %", p.label, 100.0 * p.value),
        };
        let mut out = vec![format!("literature (not a target): {}", self.note)];
        out.extend(self.experimental.iter().map(|p| format!("  experimental {}", fmt(p))));
        out.extend(self.simulated.iter().map(|p| format!("  simulated {}", fmt(p))));
        out
    }
}

/// Wall-clock seconds per stage. Kept out of the reports so that those
/// stay byte-identical across runs.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub stages: Vec<Stage>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Stage {
    pub name: String,
    pub seconds: f64,
}

impl Timings {
    pub fn record<R>(&mut self, name: &str, f: impl FnOnce() -> R) -> R {
        let start = std::time::Instant::now();
        let out = f();
        self.stages.push(Stage { name: name.to_string(), seconds: start.elapsed().as_secs_f64() });
        out
    }

    pub fn extend_prefixed(&mut self, prefix: &str, other: Timings) {
        for s in other.stages {
            self.stages.push(Stage { name: format!("{prefix}/{}", s.name), seconds: s.seconds });
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TomographyReport {
    pub schema_version: u32,
    /// `state-tomography` or `process-tomography`.
    pub kind: String,
    pub dataset: String,
    pub iterations: usize,
    pub converged: bool,
    pub log_likelihood: f64,
    /// Purity of ρ, or `χ[III, III]` for processes.
    pub summary_value: f64,
    pub fidelity: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DemoRow {
    pub gate: String,
    pub accepted: bool,
    pub visibility: f64,
    pub process_fidelity: f64,
    pub process_threshold: f64,
    pub published_simulated: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DemoSummary {
    pub schema_version: u32,
    pub config: RunConfig,
    pub gates: Vec<DemoRow>,
    pub literature: Literature,
}
