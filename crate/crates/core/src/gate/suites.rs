use nalgebra::DVector;
use num_complex::Complex;
use num_traits::Zero;

use super::operator::{apply_gate, EncodedState, GateOperator, ACCEPTANCE_DEFECT};
use crate::error::{Error, Result};
use crate::linalg::{c, CVector};
use crate::states::{parse_product_label, product_state};
use crate::tomography::DensityMatrix;
use crate::Real;

/// A named input with the output it should map to under the ideal gate.
#[derive(Clone, Debug)]
pub struct StateMapping<T: Real> {
    pub label: String,
    pub input: EncodedState<T>,
    pub expected: EncodedState<T>,
}

#[derive(Clone, Debug)]
pub struct SuiteResult<T: Real> {
    pub label: String,
    pub output: DensityMatrix<T>,
    /// Norm of the unnormalized output, below 1 for lossy gates.
    pub norm: T,
    pub fidelity: T,
}

fn product<T: Real>(label: &str) -> Result<EncodedState<T>> {
    EncodedState::new(product_state(parse_product_label(label)?)?)
}

fn combo<T: Real>(terms: &[(Complex<T>, &str)]) -> Result<EncodedState<T>> {
    let mut v: CVector<T> = DVector::from_element(8, Complex::zero());
    for (w, label) in terms {
        v += product::<T>(label)?.amplitudes() * *w;
    }
    EncodedState::normalized(v)
}

fn computational<T: Real>(terms: &[(Complex<T>, usize)]) -> Result<EncodedState<T>> {
    let mut v: CVector<T> = DVector::from_element(8, Complex::zero());
    for (w, index) in terms {
        v[*index] += *w;
    }
    EncodedState::normalized(v)
}

/// The three Toffoli probes with their printed outputs (global phases as
/// printed), plus the `|+0+_i⟩` variant shown for the second probe in the
/// density-matrix figure.
pub fn toffoli_probe_mappings<T: Real>() -> Result<Vec<StateMapping<T>>> {
    let one = c::<T>(1.0, 0.0);
    let i = c::<T>(0.0, 1.0);
    Ok(vec![
        StateMapping {
            label: "11-i".into(),
            input: product("11-i")?,
            expected: combo(&[(i, "11+i")])?,
        },
        StateMapping {
            label: "+1+i".into(),
            input: product("+1+i")?,
            expected: combo(&[(one, "01+i"), (i, "11-i")])?,
        },
        StateMapping {
            label: "+i+i+".into(),
            input: product("+i+i+")?,
            expected: product("+i+i+")?,
        },
        StateMapping {
            label: "+0+i".into(),
            input: product("+0+i")?,
            expected: product("+0+i")?,
        },
    ])
}

/// Table of entangled inputs `ψ1…ψ8` and their Toffoli images `φ1…φ8`.
pub fn entangled_mappings<T: Real>() -> Result<Vec<StateMapping<T>>> {
    let one = c::<T>(1.0, 0.0);
    let phases = [c::<T>(1.0, 0.0), c(-1.0, 0.0), c(0.0, 1.0), c(0.0, -1.0)];
    let mut out = Vec::with_capacity(8);
    // ψ1–ψ4 pair |100⟩ with |111⟩, ψ5–ψ8 pair |101⟩ with |110⟩
    for (first, second, image) in [(4, 7, 6), (5, 6, 7)] {
        for w in phases {
            let k = out.len() + 1;
            out.push(StateMapping {
                label: format!("psi{k}"),
                input: computational(&[(one, first), (w, second)])?,
                expected: computational(&[(one, first), (w, image)])?,
            });
        }
    }
    Ok(out)
}

fn run_suite<T: Real>(
    gate: &GateOperator<T>,
    mappings: Vec<(String, EncodedState<T>, EncodedState<T>)>,
) -> Result<Vec<SuiteResult<T>>> {
    mappings
        .into_iter()
        .map(|(label, input, expected)| {
            let evo = apply_gate(gate, &input)?;
            Ok(SuiteResult {
                label,
                fidelity: evo.state.fidelity(&expected),
                output: DensityMatrix::pure(evo.state.amplitudes())?,
                norm: evo.norm,
            })
        })
        .collect()
}

/// Evolves each input through `gate` and scores it against the ideal
/// gate's image of the same input.
pub fn evolve_suite<T: Real>(
    gate: &GateOperator<T>,
    ideal: &GateOperator<T>,
    inputs: &[StateMapping<T>],
) -> Result<Vec<SuiteResult<T>>> {
    let mappings = inputs
        .iter()
        .map(|m| Ok((m.label.clone(), m.input.clone(), apply_gate(ideal, &m.input)?.state)))
        .collect::<Result<Vec<_>>>()?;
    run_suite(gate, mappings)
}

/// Entangled-input table evaluated against its listed Toffoli outputs.
/// Requires an accepted gate.
pub fn evolve_entangled_suite<T: Real>(gate: &GateOperator<T>) -> Result<Vec<SuiteResult<T>>> {
    let defect = gate.unitarity_defect();
    if !gate.is_accepted() {
        return Err(Error::GateRejected { defect: defect.as_f64(), limit: ACCEPTANCE_DEFECT });
    }
    let mappings = entangled_mappings()?.into_iter().map(|m| (m.label, m.input, m.expected)).collect();
    run_suite(gate, mappings)
}
