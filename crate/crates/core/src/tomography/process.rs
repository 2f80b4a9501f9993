use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::gate::GateOperator;
use crate::linalg::{adjoint, eigenvalues, hermiticity_defect, hermitize, identity, kron, max_abs_diff, partial_trace_second, trace, trace_product, CMatrix};
use crate::Real;

pub const DIM: usize = 8;
pub const PAULI_LABELS: [char; 4] = ['I', 'X', 'Y', 'Z'];

/// Choi matrix `E = Σ_jk |j⟩⟨k| ⊗ 𝓔(|j⟩⟨k|)`, input factor first.
#[derive(Clone, Debug, PartialEq)]
pub struct ChoiMatrix<T: Real> {
    e: CMatrix<T>,
}

impl<T: Real> ChoiMatrix<T> {
    /// Checks Hermiticity, positivity and trace preservation.
    pub fn new(e: CMatrix<T>) -> Result<Self> {
        if e.shape() != (DIM * DIM, DIM * DIM) {
            return Err(Error::InvalidState(format!("Choi matrix must be 64x64, got {:?}", e.shape())));
        }
        let herm = hermiticity_defect(&e);
        if !(herm <= T::tol(1e-10)) {
            return Err(Error::InvalidState(format!("Choi matrix is not Hermitian (defect {herm:e})")));
        }
        let e = hermitize(&e);
        let min = eigenvalues(&e)[0];
        if min < -T::tol(1e-8) {
            return Err(Error::InvalidState(format!("Choi matrix has eigenvalue {min:e}")));
        }
        let tp = trace_preservation_defect(&e);
        if !(tp <= T::tol(1e-6)) {
            return Err(Error::InvalidState(format!("Choi matrix is not trace preserving (defect {tp:e})")));
        }
        Ok(Self { e })
    }

    pub(crate) fn new_unchecked(e: CMatrix<T>) -> Self {
        Self { e }
    }

    pub fn matrix(&self) -> &CMatrix<T> {
        &self.e
    }

    /// max |Tr_out E − I|
    pub fn trace_preservation_defect(&self) -> T {
        trace_preservation_defect(&self.e)
    }

    /// `Tr(E · (ρᵀ ⊗ Π))`, the probability of projector `Π` on the image of `ρ`.
    pub fn probability(&self, rho: &CMatrix<T>, projector: &CMatrix<T>) -> T {
        trace_product(&self.e, &kron(&rho.transpose(), projector)).re
    }
}

pub(crate) fn trace_preservation_defect<T: Real>(e: &CMatrix<T>) -> T {
    max_abs_diff(&partial_trace_second(e, DIM), &identity(DIM))
}

/// Choi matrix of `ρ ↦ UρU†`. The gate must be unitary to 1e-6.
pub fn choi_from_unitary<T: Real>(gate: &GateOperator<T>) -> Result<ChoiMatrix<T>> {
    let defect = gate.unitarity_defect();
    if !(defect <= T::tol(1e-6)) {
        return Err(Error::GateRejected { defect: defect.as_f64(), limit: 1e-6 });
    }
    let u = gate.matrix();
    // column-stacked vec(U): entry (j, o) = U[o, j]
    let v = DVector::from_fn(DIM * DIM, |idx, _| u[(idx % DIM, idx / DIM)]);
    Ok(ChoiMatrix { e: crate::linalg::outer(&v) })
}

/// Process matrix in the orthonormal Pauli basis `σ_m/√8`, so that
/// `E = 8 · Σ_mn χ_mn |B_m⟩⟩⟨⟨B_n|` and Tr χ = 1 for trace-preserving maps.
/// Pauli index `16·m1 + 4·m2 + m3` over `I, X, Y, Z`.
#[derive(Clone, Debug, PartialEq)]
pub struct ChiMatrix<T: Real> {
    chi: CMatrix<T>,
}

impl<T: Real> ChiMatrix<T> {
    pub fn matrix(&self) -> &CMatrix<T> {
        &self.chi
    }

    pub fn from_matrix(chi: CMatrix<T>) -> Result<Self> {
        if chi.shape() != (DIM * DIM, DIM * DIM) {
            return Err(Error::InvalidState(format!("chi matrix must be 64x64, got {:?}", chi.shape())));
        }
        Ok(Self { chi })
    }

    pub fn trace(&self) -> T {
        trace(&self.chi).re
    }

    pub fn label(index: usize) -> String {
        [index / 16, (index / 4) % 4, index % 4].iter().map(|&m| PAULI_LABELS[m]).collect()
    }
}

fn pauli<T: Real>(m: usize) -> CMatrix<T> {
    let z = Complex::zero();
    let o = Complex::from(T::one());
    let i = Complex::new(T::zero(), T::one());
    let entries = match m {
        0 => [o, z, z, o],
        1 => [z, o, o, z],
        2 => [z, -i, i, z],
        _ => [o, z, z, -o],
    };
    DMatrix::from_row_slice(2, 2, &entries)
}

/// Unitary whose column `m` is the column-stacked vec of `σ_m/√8`.
fn pauli_vec_basis<T: Real>() -> CMatrix<T> {
    let scale = Complex::from(T::one() / T::lit(DIM as f64).sqrt());
    let mut b = DMatrix::from_element(DIM * DIM, DIM * DIM, Complex::zero());
    for m in 0..DIM * DIM {
        let sigma = kron(&kron(&pauli::<T>(m / 16), &pauli::<T>((m / 4) % 4)), &pauli::<T>(m % 4));
        for col in 0..DIM {
            for row in 0..DIM {
                b[(col * DIM + row, m)] = sigma[(row, col)] * scale;
            }
        }
    }
    b
}

fn cached_basis<T: Real>() -> CMatrix<T> {
    static F64: OnceLock<CMatrix<f64>> = OnceLock::new();
    let b = F64.get_or_init(pauli_vec_basis::<f64>);
    b.map(|z| Complex::new(T::lit(z.re), T::lit(z.im)))
}

pub fn chi_from_choi<T: Real>(choi: &ChoiMatrix<T>) -> ChiMatrix<T> {
    let b = cached_basis::<T>();
    let scale = Complex::from(T::one() / T::lit(DIM as f64));
    ChiMatrix { chi: (adjoint(&b) * &choi.e * &b).map(|z| z * scale) }
}

/// Inverse of [`chi_from_choi`]. No validity checks are applied.
pub fn choi_from_chi<T: Real>(chi: &ChiMatrix<T>) -> ChoiMatrix<T> {
    let b = cached_basis::<T>();
    let scale = Complex::from(T::lit(DIM as f64));
    ChoiMatrix { e: (&b * &chi.chi * adjoint(&b)).map(|z| z * scale) }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProcessFidelity<T> {
    pub value: T,
    /// Re Tr(a·b) before clamping to [0, 1].
    pub raw: T,
}

impl<T: Real> ProcessFidelity<T> {
    pub fn clamped(&self) -> bool {
        self.value != self.raw
    }
}

/// Re Tr(a·b), clamped to [0, 1].
pub fn process_fidelity<T: Real>(a: &ChiMatrix<T>, b: &ChiMatrix<T>) -> ProcessFidelity<T> {
    let raw = trace_product(&a.chi, &b.chi).re;
    ProcessFidelity { value: raw.max(T::zero()).min(T::one()), raw }
}
