use nalgebra::{DMatrix, DVector};
use num_complex::Complex;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use super::encoding::Polarization;
use crate::dnn::{GateKind, PhaseStack};
use crate::error::{Error, Result};
use crate::linalg::{identity, norm_sqr, unitarity_defect, CMatrix, CVector};
use crate::modes::{project_onto_basis, ModeBasis, Provenance};
use crate::optics::AsmPropagator;
use crate::Real;

/// Largest unitarity defect for which a gate counts as accepted.
pub const ACCEPTANCE_DEFECT: f64 = 0.05;

/// How the unmodulated V path is represented.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VPath {
    /// Exact identity.
    #[default]
    Ideal,
    /// Free propagation over the stack length, read out in the reference basis.
    Propagated,
}

/// 4×4 map from the input OAM basis to the reference basis for one
/// polarization path.
#[derive(Clone, Debug, PartialEq)]
pub struct TransferMatrix<T: Real> {
    entries: CMatrix<T>,
    path: Polarization,
}

impl<T: Real> TransferMatrix<T> {
    pub fn new(entries: CMatrix<T>, path: Polarization) -> Result<Self> {
        if entries.shape() != (4, 4) {
            return Err(Error::InvalidState(format!("transfer matrix must be 4x4, got {:?}", entries.shape())));
        }
        Ok(Self { entries, path })
    }

    pub fn identity(path: Polarization) -> Self {
        Self { entries: identity(4), path }
    }

    pub fn entries(&self) -> &CMatrix<T> {
        &self.entries
    }

    pub fn path(&self) -> Polarization {
        self.path
    }

    pub fn unitarity_defect(&self) -> T {
        unitarity_defect(&self.entries)
    }

    /// Power of each output column inside the four-mode subspace.
    pub fn captured_power(&self) -> [T; 4] {
        let mut out = [T::zero(); 4];
        for (j, o) in out.iter_mut().enumerate() {
            *o = self.entries.column(j).iter().map(|z| z.norm_sqr()).sum();
        }
        out
    }

    /// Mean in-subspace power per input: the uniform insertion efficiency.
    pub fn efficiency(&self) -> T {
        self.captured_power().iter().copied().sum::<T>() / T::lit(4.0)
    }

    /// Copy rescaled to unit efficiency. Only crosstalk and uneven loss
    /// remain in the unitarity defect, as with count-normalized detection.
    pub fn normalized(&self) -> Self {
        let eff = self.efficiency();
        if eff <= T::zero() {
            return self.clone();
        }
        let scale = Complex::new(T::one() / eff.sqrt(), T::zero());
        Self { entries: self.entries.map(|z| z * scale), path: self.path }
    }

    /// Rotates the global phase so the largest-magnitude entry of column 0
    /// is real and positive.
    fn fix_global_phase(mut self) -> Self {
        let col = self.entries.column(0);
        let (mut best, mut mag) = (Complex::zero(), T::zero());
        for z in col.iter() {
            if z.norm() > mag {
                mag = z.norm();
                best = *z;
            }
        }
        if mag > T::zero() {
            let rot = best.conj() / mag;
            self.entries.iter_mut().for_each(|z| *z *= rot);
        }
        self
    }
}

/// Column `j` is the reference-basis readout of the stack's response to
/// input mode `j`, up to one global phase.
pub fn extract_transfer_matrix<T: Real>(
    stack: &PhaseStack<T>,
    input_basis: &ModeBasis<T>,
    reference_basis: &ModeBasis<T>,
) -> Result<TransferMatrix<T>> {
    check_bases(input_basis, reference_basis)?;
    let model = stack.model()?;
    let mut entries = DMatrix::from_element(4, 4, Complex::zero());
    for j in 0..4 {
        let out = model.forward(input_basis.mode(j))?;
        let amp = project_onto_basis(&out, reference_basis)?;
        for (k, a) in amp.iter().enumerate() {
            entries[(k, j)] = *a;
        }
    }
    Ok(TransferMatrix { entries, path: Polarization::H }.fix_global_phase())
}

/// Transfer matrix of the V path under the chosen convention.
pub fn v_path_transfer<T: Real>(
    mode: VPath,
    input_basis: &ModeBasis<T>,
    reference_basis: &ModeBasis<T>,
    total_path: T,
) -> Result<TransferMatrix<T>> {
    match mode {
        VPath::Ideal => Ok(TransferMatrix::identity(Polarization::V)),
        VPath::Propagated => {
            check_bases(input_basis, reference_basis)?;
            let prop = AsmPropagator::new(*input_basis.grid(), total_path)?;
            let mut entries = DMatrix::from_element(4, 4, Complex::zero());
            for j in 0..4 {
                let amp = project_onto_basis(&prop.propagate(input_basis.mode(j))?, reference_basis)?;
                for (k, a) in amp.iter().enumerate() {
                    entries[(k, j)] = *a;
                }
            }
            Ok(TransferMatrix { entries, path: Polarization::V }.fix_global_phase())
        }
    }
}

fn check_bases<T: Real>(input: &ModeBasis<T>, reference: &ModeBasis<T>) -> Result<()> {
    if input.provenance() != Provenance::InputPlane || reference.provenance() != Provenance::PropagatedReference {
        return Err(Error::InvalidState("expected an input-plane basis and a propagated reference basis".into()));
    }
    input.grid().ensure_same(reference.grid())
}

/// 8×8 operator on `|p a s⟩`.
#[derive(Clone, Debug, PartialEq)]
pub struct GateOperator<T: Real> {
    matrix: CMatrix<T>,
}

impl<T: Real> GateOperator<T> {
    /// Wraps an arbitrary 8×8 matrix. Used for synthetic and ideal gates.
    pub fn from_matrix(matrix: CMatrix<T>) -> Result<Self> {
        if matrix.shape() != (8, 8) {
            return Err(Error::InvalidState(format!("gate operator must be 8x8, got {:?}", matrix.shape())));
        }
        if matrix.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::InvalidState("gate operator has non-finite entries".into()));
        }
        Ok(Self { matrix })
    }

    /// The exact three-qubit gate with `kind` as its H block.
    pub fn ideal(kind: GateKind) -> Self {
        compose_gate(
            &TransferMatrix { entries: kind.unitary(), path: Polarization::H },
            &TransferMatrix::identity(Polarization::V),
        )
        .expect("labels are correct by construction")
    }

    pub fn identity() -> Self {
        Self { matrix: identity(8) }
    }

    pub fn matrix(&self) -> &CMatrix<T> {
        &self.matrix
    }

    pub fn unitarity_defect(&self) -> T {
        unitarity_defect(&self.matrix)
    }

    pub fn is_accepted(&self) -> bool {
        self.unitarity_defect() < T::lit(ACCEPTANCE_DEFECT)
    }

    /// `|U|j⟩|²` for every computational input.
    pub fn captured_power(&self) -> Vec<T> {
        (0..8).map(|j| self.matrix.column(j).iter().map(|z| z.norm_sqr()).sum()).collect()
    }
}

/// `|0⟩⟨0| ⊗ T_V + |1⟩⟨1| ⊗ T_H`.
pub fn compose_gate<T: Real>(t_h: &TransferMatrix<T>, t_v: &TransferMatrix<T>) -> Result<GateOperator<T>> {
    if t_h.path != Polarization::H || t_v.path != Polarization::V {
        return Err(Error::PathLabel(format!(
            "compose_gate expects (H, V) transfer matrices, got ({:?}, {:?})",
            t_h.path, t_v.path
        )));
    }
    let mut m = DMatrix::from_element(8, 8, Complex::zero());
    m.view_mut((0, 0), (4, 4)).copy_from(&t_v.entries);
    m.view_mut((4, 4), (4, 4)).copy_from(&t_h.entries);
    Ok(GateOperator { matrix: m })
}

/// Normalized pure state on the 8-dimensional encoded space.
#[derive(Clone, Debug, PartialEq)]
pub struct EncodedState<T: Real> {
    amplitudes: CVector<T>,
}

impl<T: Real> EncodedState<T> {
    pub fn new(amplitudes: CVector<T>) -> Result<Self> {
        if amplitudes.len() != 8 {
            return Err(Error::InvalidState(format!("encoded state needs 8 amplitudes, got {}", amplitudes.len())));
        }
        let n = norm_sqr(&amplitudes);
        if !((n - T::one()).abs() <= T::tol(1e-9)) {
            return Err(Error::InvalidState(format!("encoded state has norm² {n}, expected 1")));
        }
        Ok(Self { amplitudes })
    }

    /// Scales an arbitrary non-zero vector to unit norm.
    pub fn normalized(amplitudes: CVector<T>) -> Result<Self> {
        let n = norm_sqr(&amplitudes).sqrt();
        if !(n > T::zero() && n.is_finite()) {
            return Err(Error::InvalidState("cannot normalize a zero state".into()));
        }
        Self::new(amplitudes.map(|z| z / n))
    }

    pub fn basis(index: usize) -> Result<Self> {
        if index >= 8 {
            return Err(Error::InvalidState(format!("basis index {index} out of range 0..8")));
        }
        Ok(Self { amplitudes: DVector::from_fn(8, |i, _| if i == index { Complex::from(T::one()) } else { Complex::zero() }) })
    }

    pub fn amplitudes(&self) -> &CVector<T> {
        &self.amplitudes
    }

    /// |⟨self|other⟩|²
    pub fn fidelity(&self, other: &Self) -> T {
        crate::linalg::dot(&self.amplitudes, &other.amplitudes).norm_sqr()
    }
}

#[derive(Clone, Debug)]
pub struct Evolution<T: Real> {
    pub state: EncodedState<T>,
    /// Norm of `U|ψ⟩` before renormalization; exactly 1 for unitary gates.
    pub norm: T,
}

/// `U|ψ⟩`, renormalized when the gate is lossy.
pub fn apply_gate<T: Real>(gate: &GateOperator<T>, state: &EncodedState<T>) -> Result<Evolution<T>> {
    let out = &gate.matrix * &state.amplitudes;
    if gate.unitarity_defect() <= T::tol(1e-12) {
        return Ok(Evolution { state: EncodedState { amplitudes: out }, norm: T::one() });
    }
    let norm = norm_sqr(&out).sqrt();
    Ok(Evolution { state: EncodedState::normalized(out)?, norm })
}
