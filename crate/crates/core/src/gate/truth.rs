use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

use super::operator::GateOperator;
use crate::error::{Error, Result};
use crate::Real;

/// Computational-basis detection statistics of a gate.
#[derive(Clone, Debug, PartialEq)]
pub struct TruthTable<T: Real> {
    /// Row `j` is the output distribution for input `|j⟩`, normalized.
    pub probs: DMatrix<T>,
    /// Classical overlap `(Σ_k √(p_jk q_jk))²` of each row with the ideal row.
    pub row_visibility: Vec<T>,
    /// Mean of the row visibilities.
    pub visibility: T,
}

impl<T: Real> TruthTable<T> {
    /// Builds a table from non-negative row weights (probabilities or counts).
    pub fn from_weights(weights: &DMatrix<T>, ideal: &GateOperator<T>) -> Result<Self> {
        if weights.shape() != (8, 8) {
            return Err(Error::InvalidDataset(format!("truth table needs 8x8 weights, got {:?}", weights.shape())));
        }
        let ideal_probs = raw_probabilities(ideal);
        let mut probs = weights.clone();
        let mut row_visibility = Vec::with_capacity(8);
        for j in 0..8 {
            let total: T = probs.row(j).iter().copied().sum();
            if !(total > T::zero() && total.is_finite()) {
                return Err(Error::ZeroCounts);
            }
            if probs.row(j).iter().any(|&p| p < T::zero()) {
                return Err(Error::InvalidDataset(format!("row {j} has negative weight")));
            }
            probs.row_mut(j).iter_mut().for_each(|p| *p /= total);
            let q_total: T = ideal_probs.row(j).iter().copied().sum();
            let overlap: T = (0..8).map(|k| (probs[(j, k)] * ideal_probs[(j, k)] / q_total).sqrt()).sum();
            row_visibility.push(overlap * overlap);
        }
        let visibility = row_visibility.iter().copied().sum::<T>() / T::lit(8.0);
        Ok(Self { probs, row_visibility, visibility })
    }
}

/// `|⟨k|U|j⟩|²` with inputs as rows, before renormalization.
pub fn raw_probabilities<T: Real>(gate: &GateOperator<T>) -> DMatrix<T> {
    let m = gate.matrix();
    DMatrix::from_fn(8, 8, |j, k| m[(k, j)].norm_sqr())
}

/// Truth table of `gate`, scored against the computational-basis
/// behaviour of `ideal`. For permutation gates the row visibility is the
/// probability of the correct output.
pub fn truth_table<T: Real>(gate: &GateOperator<T>, ideal: &GateOperator<T>) -> Result<TruthTable<T>> {
    TruthTable::from_weights(&raw_probabilities(gate), ideal)
}

fn poisson_draw(rng: &mut ChaCha8Rng, mean: f64) -> Result<u64> {
    if mean == 0.0 {
        return Ok(0);
    }
    let dist = Poisson::new(mean).map_err(|e| Error::InvalidDataset(format!("Poisson mean {mean}: {e}")))?;
    Ok(dist.sample(rng) as u64)
}

/// Independent Poisson counts with means `mean_total · p_k`.
pub fn sample_counts(probabilities: &[f64], mean_total: f64, seed: u64) -> Result<Vec<u64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_counts_with(&mut rng, probabilities, mean_total)
}

pub(crate) fn sample_counts_with(rng: &mut ChaCha8Rng, probabilities: &[f64], mean_total: f64) -> Result<Vec<u64>> {
    if !(mean_total > 0.0 && mean_total.is_finite()) {
        return Err(Error::InvalidDataset(format!("mean_total must be positive and finite, got {mean_total}")));
    }
    probabilities
        .iter()
        .map(|&p| {
            if !(p >= 0.0 && p.is_finite()) {
                return Err(Error::InvalidDataset(format!("probability {p} is not a non-negative number")));
            }
            poisson_draw(rng, mean_total * p)
        })
        .collect()
}

/// Poisson resampling of existing counts, used by the Monte Carlo loop.
pub(crate) fn resample_counts(rng: &mut ChaCha8Rng, counts: &[f64]) -> Result<Vec<f64>> {
    counts.iter().map(|&c| poisson_draw(rng, c).map(|v| v as f64)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dnn::GateKind;

    #[test]
    fn ideal_and_identity_tables() {
        let tof = GateOperator::<f64>::ideal(GateKind::ToffoliCnot);
        let t = truth_table(&tof, &tof).unwrap();
        assert_eq!(t.visibility, 1.0);
        assert_eq!(t.probs[(6, 7)], 1.0);
        let id = GateOperator::<f64>::identity();
        assert_eq!(truth_table(&id, &id).unwrap().visibility, 1.0);
        let crossed = truth_table(&id, &tof).unwrap();
        assert!((crossed.visibility - 0.75).abs() < 1e-15);
        let cch = GateOperator::<f64>::ideal(GateKind::Cch);
        assert!((truth_table(&cch, &cch).unwrap().visibility - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rows_sum_to_one() {
        let cch = GateOperator::<f64>::ideal(GateKind::Cch);
        let t = truth_table(&cch, &cch).unwrap();
        for j in 0..8 {
            let s: f64 = t.probs.row(j).iter().sum();
            assert!((s - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn counts_basic_properties() {
        let mut p = vec![0.0; 8];
        p[0] = 1.0;
        let c = sample_counts(&p, 1000.0, 1).unwrap();
        assert!(c[1..].iter().all(|&x| x == 0));
        assert!(c[0] > 800);
        assert_eq!(sample_counts(&p, 1000.0, 5).unwrap(), sample_counts(&p, 1000.0, 5).unwrap());
        assert!(sample_counts(&p, 0.0, 5).is_err());
        assert!(sample_counts(&[-0.1], 10.0, 5).is_err());
    }

    #[test]
    fn counts_mean_matches_poisson_moments() {
        let p = [0.5, 0.25, 0.01];
        let seeds = 10_000;
        let mut sums = [0.0f64; 3];
        for seed in 0..seeds {
            let c = sample_counts(&p, 200.0, seed).unwrap();
            for k in 0..3 {
                sums[k] += c[k] as f64;
            }
        }
        for k in 0..3 {
            let mean = 200.0 * p[k];
            let sigma_of_mean = (mean / seeds as f64).sqrt();
            assert!((sums[k] / seeds as f64 - mean).abs() < 3.0 * sigma_of_mean, "slot {k}");
        }
    }
}
