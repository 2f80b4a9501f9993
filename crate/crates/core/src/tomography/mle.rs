use nalgebra::DMatrix;
use num_complex::Complex;
use num_traits::Zero;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::basis::ProbeBasis;
use super::dataset::TomographyDataset;
use super::density::DensityMatrix;
use super::process::{trace_preservation_defect, ChoiMatrix, DIM};
use crate::error::{Error, Result};
use crate::linalg::{hermitian_map, hermitize, identity, kron, max_abs_diff, partial_trace_second, trace, CMatrix, CVector};
use crate::Real;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QstConfig {
    pub max_iterations: usize,
    /// Stop once no density-matrix entry moves by more than this.
    pub tolerance: f64,
    /// Lower bound on predicted probabilities inside the update.
    pub probability_floor: f64,
    /// Step weight of the diluted update used after a likelihood decrease.
    pub dilution: f64,
}

impl Default for QstConfig {
    fn default() -> Self {
        Self { max_iterations: 5000, tolerance: 1e-10, probability_floor: 1e-12, dilution: 0.1 }
    }
}

#[derive(Clone, Debug)]
pub struct QstResult<T: Real> {
    pub rho: DensityMatrix<T>,
    pub iterations: usize,
    pub converged: bool,
    /// Whether the diluted update was engaged.
    pub diluted: bool,
    pub log_likelihood: T,
}

fn normalized_rows(dataset: &TomographyDataset) -> Result<Vec<Vec<f64>>> {
    let mut any = false;
    let rows = (0..dataset.inputs().len())
        .map(|j| {
            let row = dataset.row(j);
            let total: f64 = row.iter().sum();
            if total > 0.0 {
                any = true;
                row.iter().map(|c| c / total).collect()
            } else {
                vec![0.0; row.len()]
            }
        })
        .collect();
    if any {
        Ok(rows)
    } else {
        Err(Error::ZeroCounts)
    }
}

fn quad_form<T: Real>(m: &CMatrix<T>, s: &CVector<T>) -> T {
    let mut acc = Complex::<T>::zero();
    for col in 0..s.len() {
        let mut inner = Complex::<T>::zero();
        for row in 0..s.len() {
            inner += s[row].conj() * m[(row, col)];
        }
        acc += inner * s[col];
    }
    acc.re
}

/// Σ_k w_k |s_k⟩⟨s_k|
fn weighted_projector_sum<T: Real>(weights: &[T], states: &[&CVector<T>]) -> CMatrix<T> {
    let d = states[0].len();
    let mut out = DMatrix::from_element(d, d, Complex::zero());
    for (&w, s) in weights.iter().zip(states) {
        if w == T::zero() {
            continue;
        }
        for col in 0..d {
            let sc = s[col].conj() * w;
            for row in 0..d {
                out[(row, col)] += s[row] * sc;
            }
        }
    }
    out
}

/// Iterative RρR maximum-likelihood state reconstruction from I/8. The
/// dataset must hold a single input row. Falls back to the diluted update
/// `(I + εR)ρ(I + εR)` once the likelihood drops.
pub fn qst_mle<T: Real>(dataset: &TomographyDataset, basis: &ProbeBasis<T>, config: &QstConfig) -> Result<QstResult<T>> {
    if dataset.inputs().len() != 1 {
        return Err(Error::InvalidDataset(format!(
            "state tomography needs one input row, got {}",
            dataset.inputs().len()
        )));
    }
    let mut distinct = dataset.projectors().to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() < 64 {
        return Err(Error::InvalidDataset(format!("need at least 64 distinct projectors, got {}", distinct.len())));
    }
    let f: Vec<T> = normalized_rows(dataset)?.remove(0).into_iter().map(T::lit).collect();
    let states: Vec<&CVector<T>> = dataset.projectors().iter().map(|&k| basis.state(k)).collect();
    let floor = T::lit(config.probability_floor);
    let eps = T::lit(config.dilution);
    let tol = T::lit(config.tolerance);

    let mut rho = identity::<T>(DIM).map(|z| z / T::lit(DIM as f64));
    let mut best = (rho.clone(), T::neg_infinity());
    let mut prev_ll = T::neg_infinity();
    let mut diluted = false;
    for iteration in 0..config.max_iterations {
        let p: Vec<T> = states.iter().map(|s| quad_form(&rho, s).max(floor)).collect();
        let ll: T = f.iter().zip(&p).filter(|(fk, _)| **fk > T::zero()).map(|(fk, pk)| *fk * pk.ln()).sum();
        if ll > best.1 {
            best = (rho.clone(), ll);
        }
        if ll < prev_ll && !diluted {
            diluted = true;
        }
        prev_ll = ll;
        let ratios: Vec<T> = f.iter().zip(&p).map(|(fk, pk)| *fk / *pk).collect();
        let r = weighted_projector_sum(&ratios, &states);
        let step = if diluted {
            let a = (identity::<T>(DIM) + r.map(|z| z * eps)).map(|z| z / (T::one() + eps));
            &a * &rho * &a
        } else {
            &r * &rho * &r
        };
        let tr = trace(&step).re;
        let next = hermitize(&step.map(|z| z / tr));
        let change = max_abs_diff(&next, &rho);
        rho = next;
        if change < tol {
            let p: Vec<T> = states.iter().map(|s| quad_form(&rho, s).max(floor)).collect();
            let ll = f.iter().zip(&p).filter(|(fk, _)| **fk > T::zero()).map(|(fk, pk)| *fk * pk.ln()).sum();
            return Ok(QstResult { rho: DensityMatrix::new(rho)?, iterations: iteration + 1, converged: true, diluted, log_likelihood: ll });
        }
    }
    Ok(QstResult {
        rho: DensityMatrix::new(best.0)?,
        iterations: config.max_iterations,
        converged: false,
        diluted,
        log_likelihood: best.1,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QptConfig {
    pub max_iterations: usize,
    /// Stop once the log-likelihood changes by less than this per datum.
    pub tolerance: f64,
    pub probability_floor: f64,
    /// Largest tolerated log-likelihood decrease between iterates.
    pub monotonicity_slack: f64,
}

impl Default for QptConfig {
    fn default() -> Self {
        Self { max_iterations: 2000, tolerance: 1e-12, probability_floor: 1e-12, monotonicity_slack: 1e-9 }
    }
}

#[derive(Clone, Debug)]
pub struct QptResult<T: Real> {
    pub choi: ChoiMatrix<T>,
    pub iterations: usize,
    pub converged: bool,
    pub log_likelihood: T,
    /// Largest `‖Tr_out E − I‖_max` seen over all iterates.
    pub max_trace_defect: T,
    /// Set when `Tr_out(RER)` was singular and a pseudo-inverse was used.
    pub pseudo_inverse: bool,
}

struct QptProblem<'a, T: Real> {
    /// ρ_jᵀ for every input row
    inputs_t: Vec<CMatrix<T>>,
    conj_inputs: Vec<CVector<T>>,
    states: Vec<&'a CVector<T>>,
    f: Vec<Vec<T>>,
    floor: T,
}

impl<T: Real> QptProblem<'_, T> {
    /// Predicted probabilities `Tr(E · ρ_jᵀ ⊗ Π_k)` for all rows.
    fn probabilities(&self, e: &CMatrix<T>) -> Vec<Vec<T>> {
        self.conj_inputs
            .par_iter()
            .map(|v| {
                // M = (v ⊗ I)† E (v ⊗ I), with v = conj(s_j)
                let mut x = DMatrix::from_element(DIM * DIM, DIM, Complex::<T>::zero());
                for o2 in 0..DIM {
                    for i2 in 0..DIM {
                        let w = v[i2];
                        let col = e.column(i2 * DIM + o2);
                        for r in 0..DIM * DIM {
                            x[(r, o2)] += col[r] * w;
                        }
                    }
                }
                let mut m = DMatrix::from_element(DIM, DIM, Complex::zero());
                for o2 in 0..DIM {
                    for i in 0..DIM {
                        let w = v[i].conj();
                        for o in 0..DIM {
                            m[(o, o2)] += x[(i * DIM + o, o2)] * w;
                        }
                    }
                }
                self.states.iter().map(|s| quad_form(&m, s).max(self.floor)).collect()
            })
            .collect()
    }

    fn log_likelihood(&self, p: &[Vec<T>]) -> T {
        let mut ll = T::zero();
        for (fr, pr) in self.f.iter().zip(p) {
            for (fk, pk) in fr.iter().zip(pr) {
                if *fk > T::zero() {
                    ll += *fk * pk.ln();
                }
            }
        }
        ll
    }

    /// R = Σ_j ρ_jᵀ ⊗ Σ_k (f_jk / p_jk) Π_k
    fn r_operator(&self, p: &[Vec<T>]) -> CMatrix<T> {
        let blocks: Vec<CMatrix<T>> = self
            .f
            .par_iter()
            .zip(p)
            .map(|(fr, pr)| {
                let ratios: Vec<T> = fr.iter().zip(pr).map(|(fk, pk)| *fk / *pk).collect();
                weighted_projector_sum(&ratios, &self.states)
            })
            .collect();
        let mut r = DMatrix::from_element(DIM * DIM, DIM * DIM, Complex::zero());
        for (rt, w) in self.inputs_t.iter().zip(&blocks) {
            r += kron(rt, w);
        }
        r
    }
}

/// Maximum-likelihood Choi matrix by the symmetric fixed-point iteration
/// `E ← Λ⁻¹ R E R Λ⁻¹`, `Λ = (Tr_out RER)^{1/2} ⊗ I`, from `E₀ = I/8`.
/// Counts are normalized per input row. Fails if the log-likelihood ever
/// drops by more than the configured slack.
pub fn qpt_mle<T: Real>(dataset: &TomographyDataset, basis: &ProbeBasis<T>, config: &QptConfig) -> Result<QptResult<T>> {
    let f: Vec<Vec<T>> = normalized_rows(dataset)?.into_iter().map(|r| r.into_iter().map(T::lit).collect()).collect();
    let conj_inputs: Vec<CVector<T>> = dataset.inputs().iter().map(|&j| basis.state(j).map(|z| z.conj())).collect();
    let problem = QptProblem {
        inputs_t: conj_inputs.iter().map(crate::linalg::outer).collect(),
        conj_inputs,
        states: dataset.projectors().iter().map(|&k| basis.state(k)).collect(),
        f,
        floor: T::lit(config.probability_floor),
    };
    let n_data = T::lit((dataset.inputs().len() * dataset.projectors().len()) as f64);
    let tol = T::lit(config.tolerance);
    let slack = T::lit(config.monotonicity_slack);
    let tiny = T::epsilon() * T::lit(1e4);

    let mut e = identity::<T>(DIM * DIM).map(|z| z / T::lit(DIM as f64));
    let mut max_defect = T::zero();
    let mut pseudo_inverse = false;
    let mut prev_ll: Option<T> = None;
    let mut iterations = 0;
    loop {
        let p = problem.probabilities(&e);
        let ll = problem.log_likelihood(&p);
        if let Some(prev) = prev_ll {
            if ll < prev - slack {
                return Err(Error::LikelihoodDecrease { iteration: iterations, previous: prev.as_f64(), current: ll.as_f64() });
            }
            if (ll - prev).abs() / n_data < tol {
                return finish(e, iterations, true, ll, max_defect, pseudo_inverse);
            }
        }
        if iterations == config.max_iterations {
            return finish(e, iterations, false, ll, max_defect, pseudo_inverse);
        }
        prev_ll = Some(ll);

        let r = problem.r_operator(&p);
        let rer = &r * &e * &r;
        let lambda_sq = partial_trace_second(&rer, DIM);
        let spectrum = crate::linalg::eigenvalues(&lambda_sq);
        let cutoff = tiny * spectrum.last().copied().unwrap_or(T::zero());
        if spectrum[0] <= cutoff {
            pseudo_inverse = true;
        }
        let inv_sqrt = hermitian_map(&lambda_sq, |x| if x > cutoff { T::one() / x.sqrt() } else { T::zero() });
        let lift = kron(&inv_sqrt, &identity(DIM));
        e = hermitize(&(&lift * rer * &lift));
        iterations += 1;
        let defect = trace_preservation_defect(&e);
        max_defect = max_defect.max(defect);
        if !(defect <= T::tol(1e-6)) {
            return Err(Error::InvalidState(format!(
                "trace preservation lost at iteration {iterations} (defect {defect:e}); Tr_out(RER) is singular"
            )));
        }
    }
}

fn finish<T: Real>(
    e: CMatrix<T>,
    iterations: usize,
    converged: bool,
    log_likelihood: T,
    max_trace_defect: T,
    pseudo_inverse: bool,
) -> Result<QptResult<T>> {
    let min = crate::linalg::eigenvalues(&e)[0];
    if min < -T::tol(1e-8) {
        return Err(Error::InvalidState(format!("reconstructed Choi matrix has eigenvalue {min:e}")));
    }
    Ok(QptResult {
        choi: ChoiMatrix::new_unchecked(e),
        iterations,
        converged,
        log_likelihood,
        max_trace_defect,
        pseudo_inverse,
    })
}
