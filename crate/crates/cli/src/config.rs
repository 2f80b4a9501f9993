//! Run configuration, read from TOML.

use std::path::{Path, PathBuf};

use oamsim_core::dnn::{GateKind, LossKind, PairSelection};
use oamsim_core::gate::VPath;
use oamsim_core::modes::ModeBasis;
use oamsim_core::optics::GridSpec;
use oamsim_core::tomography::{QptConfig, QstConfig, MIN_TRIALS};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub grid: GridConfig,
    pub stack: StackConfig,
    pub modes: ModesConfig,
    pub training: TrainingConfig,
    /// Gate target name, e.g. `toffoli-cnot`.
    pub target: String,
    pub v_path: VPath,
    pub tomography: TomographyConfig,
    pub output: PathBuf,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub n: usize,
    pub pitch: f64,
    pub wavelength: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StackConfig {
    pub layers: usize,
    pub spacing: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModesConfig {
    pub waist: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainingConfig {
    pub iterations: usize,
    pub learning_rate: f64,
    pub seed: u64,
    pub loss: LossKind,
    pub superpositions: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TomographyConfig {
    /// Expected counts behind a unit-probability projector.
    pub mean_total: f64,
    /// Monte Carlo trials for the truth-table visibility.
    pub trials: usize,
    /// Monte Carlo trials for state and process reconstructions; 0 skips them.
    pub tomography_trials: usize,
    pub seed: u64,
    pub thresholds: Thresholds,
    pub qpt: QptConfig,
    pub qst: QstConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Thresholds {
    pub visibility: f64,
    /// Unset means the per-gate default.
    pub process_fidelity: Option<f64>,
    pub entangled_fidelity: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            grid: GridConfig::default(),
            stack: StackConfig::default(),
            modes: ModesConfig::default(),
            training: TrainingConfig::default(),
            target: GateKind::ToffoliCnot.name().to_string(),
            v_path: VPath::Ideal,
            tomography: TomographyConfig::default(),
            output: PathBuf::from("out"),
        }
    }
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { n: 128, pitch: 12.5e-6, wavelength: 1550e-9 }
    }
}

impl Default for StackConfig {
    fn default() -> Self {
        Self { layers: 4, spacing: 10e-3 }
    }
}

impl Default for ModesConfig {
    fn default() -> Self {
        Self { waist: 0.16e-3 }
    }
}

impl Default for TrainingConfig {
    fn default() -> Self {
        Self { iterations: 1000, learning_rate: 0.01, seed: 7, loss: LossKind::Mse, superpositions: true }
    }
}

impl Default for TomographyConfig {
    fn default() -> Self {
        Self {
            mean_total: 1e4,
            trials: 100,
            tomography_trials: 10,
            seed: 11,
            thresholds: Thresholds::default(),
            qpt: QptConfig::default(),
            qst: QstConfig::default(),
        }
    }
}

impl Default for Thresholds {
    fn default() -> Self {
        Self { visibility: 0.99, process_fidelity: None, entangled_fidelity: 0.99 }
    }
}

/// Minimum process fidelity for a gate when the config leaves it unset.
pub fn default_process_threshold(kind: GateKind) -> f64 {
    match kind {
        GateKind::ToffoliCnot | GateKind::Cch => 0.98,
        GateKind::FredkinSwap | GateKind::Ccz => 0.985,
    }
}

impl RunConfig {
    /// Reads a TOML file, or the defaults when no path is given.
    pub fn load(path: Option<&Path>) -> CliResult<Self> {
        let Some(path) = path else { return Ok(Self::default()) };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| match e {
            CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn from_toml(text: &str) -> CliResult<Self> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn kind(&self) -> CliResult<GateKind> {
        self.target.parse().map_err(|_| {
            let names: Vec<_> = GateKind::ALL.iter().map(|k| k.name()).collect();
            CliError::Config(format!("unknown target {:?}; expected one of {}", self.target, names.join(", ")))
        })
    }

    pub fn grid_spec(&self) -> CliResult<GridSpec<f64>> {
        GridSpec::new(self.grid.n, self.grid.pitch, self.grid.wavelength).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn pair_selection(&self) -> PairSelection {
        if self.training.superpositions {
            PairSelection::WithSuperpositions
        } else {
            PairSelection::BasisOnly
        }
    }

    pub fn process_threshold(&self) -> CliResult<f64> {
        Ok(self.tomography.thresholds.process_fidelity.unwrap_or(default_process_threshold(self.kind()?)))
    }

    /// Checks every value against the preconditions of the stages that
    /// will consume it, so that nothing runs on a bad config.
    pub fn validate(&self) -> CliResult<()> {
        let grid = self.grid_spec()?;
        self.kind()?;
        let bad = |m: String| Err(CliError::Config(m));
        if self.stack.layers == 0 {
            return bad("stack.layers must be at least 1".into());
        }
        if !(self.stack.spacing > 0.0 && self.stack.spacing.is_finite()) {
            return bad(format!("stack.spacing must be positive, got {}", self.stack.spacing));
        }
        ModeBasis::input(grid, self.modes.waist).map_err(|e| CliError::Config(format!("modes.waist: {e}")))?;
        let t = &self.training;
        if t.iterations == 0 {
            return bad("training.iterations must be at least 1".into());
        }
        if !(t.learning_rate > 0.0 && t.learning_rate.is_finite()) {
            return bad(format!("training.learning_rate must be positive, got {}", t.learning_rate));
        }
        let tomo = &self.tomography;
        if !(tomo.mean_total > 0.0 && tomo.mean_total.is_finite()) {
            return bad(format!("tomography.mean_total must be positive and finite, got {}", tomo.mean_total));
        }
        if tomo.trials < MIN_TRIALS {
            return bad(format!("tomography.trials must be at least {MIN_TRIALS}, got {}", tomo.trials));
        }
        if tomo.tomography_trials != 0 && tomo.tomography_trials < MIN_TRIALS {
            return bad(format!(
                "tomography.tomography_trials must be 0 or at least {MIN_TRIALS}, got {}",
                tomo.tomography_trials
            ));
        }
        let th = &tomo.thresholds;
        for (name, v) in [
            ("visibility", Some(th.visibility)),
            ("process_fidelity", th.process_fidelity),
            ("entangled_fidelity", Some(th.entangled_fidelity)),
        ] {
            if let Some(v) = v {
                if !(0.0..=1.0).contains(&v) {
                    return bad(format!("tomography.thresholds.{name} must lie in [0, 1], got {v}"));
                }
            }
        }
        if tomo.qpt.max_iterations == 0 || !(tomo.qpt.tolerance > 0.0) {
            return bad("tomography.qpt needs max_iterations >= 1 and a positive tolerance".into());
        }
        if tomo.qst.max_iterations == 0 || !(tomo.qst.tolerance > 0.0) {
            return bad("tomography.qst needs max_iterations >= 1 and a positive tolerance".into());
        }
        if !(0.0..1.0).contains(&tomo.qst.dilution) || tomo.qst.dilution == 0.0 {
            return bad(format!("tomography.qst.dilution must lie in (0, 1), got {}", tomo.qst.dilution));
        }
        Ok(())
    }
}
