use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::basis::{ProbeBasis, PROBE_COUNT};
use super::density::DensityMatrix;
use crate::error::{Error, Result};
use crate::gate::{sample_counts_with, GateOperator};
use crate::linalg::{dot, norm_sqr};
use crate::Real;

/// Detection data `f_jk` for inputs `j` and projectors `k`, both given as
/// probe-basis indices. Stored row-major with one row per input.
#[derive(Clone, Debug, PartialEq)]
pub struct TomographyDataset {
    inputs: Vec<usize>,
    projectors: Vec<usize>,
    counts: Vec<f64>,
    /// Expected counts for a projector of unit probability; infinite when
    /// the entries are exact probabilities.
    mean_total: f64,
}

impl TomographyDataset {
    pub fn new(inputs: Vec<usize>, projectors: Vec<usize>, counts: Vec<f64>, mean_total: f64) -> Result<Self> {
        if inputs.is_empty() || projectors.is_empty() {
            return Err(Error::InvalidDataset("dataset needs at least one input and one projector".into()));
        }
        if let Some(&bad) = inputs.iter().chain(&projectors).find(|&&i| i >= PROBE_COUNT) {
            return Err(Error::InvalidDataset(format!("probe index {bad} out of range 0..{PROBE_COUNT}")));
        }
        if counts.len() != inputs.len() * projectors.len() {
            return Err(Error::InvalidDataset(format!(
                "expected {} counts for {}x{} entries, got {}",
                inputs.len() * projectors.len(),
                inputs.len(),
                projectors.len(),
                counts.len()
            )));
        }
        if let Some(bad) = counts.iter().find(|c| !(c.is_finite() && **c >= 0.0)) {
            return Err(Error::InvalidDataset(format!("count {bad} must be finite and non-negative")));
        }
        if !(mean_total > 0.0) {
            return Err(Error::InvalidDataset(format!("mean_total must be positive, got {mean_total}")));
        }
        Ok(Self { inputs, projectors, counts, mean_total })
    }

    pub fn inputs(&self) -> &[usize] {
        &self.inputs
    }

    pub fn projectors(&self) -> &[usize] {
        &self.projectors
    }

    pub fn counts(&self) -> &[f64] {
        &self.counts
    }

    pub fn row(&self, j: usize) -> &[f64] {
        let w = self.projectors.len();
        &self.counts[j * w..(j + 1) * w]
    }

    pub fn mean_total(&self) -> f64 {
        self.mean_total
    }

    pub fn is_exact(&self) -> bool {
        self.mean_total.is_infinite()
    }

    /// Same layout with replaced entries.
    pub(crate) fn with_counts(&self, counts: Vec<f64>) -> Self {
        Self { counts, ..self.clone() }
    }

    /// Keeps only the first input row; used for state tomography.
    pub fn single_input(&self, j: usize) -> Result<Self> {
        if j >= self.inputs.len() {
            return Err(Error::InvalidDataset(format!("row {j} out of range")));
        }
        Self::new(vec![self.inputs[j]], self.projectors.clone(), self.row(j).to_vec(), self.mean_total)
    }
}

fn all_indices() -> Vec<usize> {
    (0..PROBE_COUNT).collect()
}

fn sample_rows(probs: Vec<Vec<f64>>, mean_total: f64, seed: u64) -> Result<Vec<f64>> {
    if mean_total.is_infinite() {
        return Ok(probs.into_iter().flatten().collect());
    }
    let rows: Vec<Vec<f64>> = probs
        .par_iter()
        .enumerate()
        .map(|(j, p)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(j as u64);
            sample_counts_with(&mut rng, p, mean_total).map(|c| c.into_iter().map(|v| v as f64).collect())
        })
        .collect::<Result<_>>()?;
    Ok(rows.into_iter().flatten().collect())
}

/// Data for `gate` over the given inputs and projectors. Entries are
/// `|⟨s_k|U|s_j⟩|²` (with `U|s_j⟩` renormalized for lossy gates), or
/// Poisson counts with mean `mean_total` times that when `mean_total` is
/// finite. Pass `f64::INFINITY` for exact data.
pub fn simulate_subset<T: Real>(
    gate: &GateOperator<T>,
    basis: &ProbeBasis<T>,
    inputs: Vec<usize>,
    projectors: Vec<usize>,
    mean_total: f64,
    seed: u64,
) -> Result<TomographyDataset> {
    let probs: Vec<Vec<f64>> = inputs
        .iter()
        .map(|&j| {
            let out = gate.matrix() * basis.state(j);
            let norm = norm_sqr(&out);
            if !(norm > T::zero()) {
                return Err(Error::InvalidState(format!("gate annihilates probe {j}")));
            }
            Ok(projectors.iter().map(|&k| (dot(basis.state(k), &out).norm_sqr() / norm).as_f64()).collect())
        })
        .collect::<Result<_>>()?;
    let counts = sample_rows(probs, mean_total, seed)?;
    TomographyDataset::new(inputs, projectors, counts, mean_total)
}

/// Full 216×216 process-tomography data.
pub fn simulate_dataset<T: Real>(
    gate: &GateOperator<T>,
    basis: &ProbeBasis<T>,
    mean_total: f64,
    seed: u64,
) -> Result<TomographyDataset> {
    simulate_subset(gate, basis, all_indices(), all_indices(), mean_total, seed)
}

/// Projections of one state onto all 216 probes. The input slot records
/// `input_label`, a probe index naming the prepared state.
pub fn simulate_state_dataset<T: Real>(
    rho: &DensityMatrix<T>,
    basis: &ProbeBasis<T>,
    input_label: usize,
    mean_total: f64,
    seed: u64,
) -> Result<TomographyDataset> {
    let p: Vec<f64> = (0..PROBE_COUNT)
        .map(|k| crate::linalg::trace_product(basis.projector(k), rho.matrix()).re.max(T::zero()).as_f64())
        .collect();
    let counts = sample_rows(vec![p], mean_total, seed)?;
    TomographyDataset::new(vec![input_label], all_indices(), counts, mean_total)
}

/// The 8×8 computational-basis block, as used for truth tables.
pub fn simulate_truth_table_dataset<T: Real>(
    gate: &GateOperator<T>,
    basis: &ProbeBasis<T>,
    mean_total: f64,
    seed: u64,
) -> Result<TomographyDataset> {
    let comp: Vec<usize> = (0..8).map(ProbeBasis::<T>::computational_index).collect();
    simulate_subset(gate, basis, comp.clone(), comp, mean_total, seed)
}
