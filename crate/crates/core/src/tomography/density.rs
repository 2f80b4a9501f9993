use crate::error::{Error, Result};
use crate::linalg::{eigenvalues, hermiticity_defect, hermitize, outer, psd_sqrt, trace, CMatrix, CVector};
use crate::Real;

/// Unit-trace positive semidefinite Hermitian matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix<T: Real> {
    rho: CMatrix<T>,
}

impl<T: Real> DensityMatrix<T> {
    pub fn new(rho: CMatrix<T>) -> Result<Self> {
        if !rho.is_square() {
            return Err(Error::InvalidState(format!("density matrix must be square, got {:?}", rho.shape())));
        }
        let herm = hermiticity_defect(&rho);
        if !(herm <= T::tol(1e-12)) {
            return Err(Error::InvalidState(format!("density matrix is not Hermitian (defect {herm:e})")));
        }
        let rho = hermitize(&rho);
        let tr = trace(&rho).re;
        if !((tr - T::one()).abs() <= T::tol(1e-9)) {
            return Err(Error::InvalidState(format!("density matrix has trace {tr}")));
        }
        let min = eigenvalues(&rho).first().copied().unwrap_or(T::zero());
        if min < -T::tol(1e-10) {
            return Err(Error::InvalidState(format!("density matrix has eigenvalue {min:e}")));
        }
        Ok(Self { rho })
    }

    /// |ψ⟩⟨ψ| of a normalized vector.
    pub fn pure(psi: &CVector<T>) -> Result<Self> {
        Self::new(outer(psi))
    }

    pub fn maximally_mixed(d: usize) -> Self {
        let w = T::one() / T::lit(d as f64);
        Self { rho: crate::linalg::identity::<T>(d).map(|z| z * w) }
    }

    pub fn matrix(&self) -> &CMatrix<T> {
        &self.rho
    }

    pub fn dim(&self) -> usize {
        self.rho.nrows()
    }

    /// Tr ρ²
    pub fn purity(&self) -> T {
        crate::linalg::trace_product(&self.rho, &self.rho).re
    }
}

/// `(Tr √(√a · b · √a))²`.
pub fn state_fidelity<T: Real>(a: &DensityMatrix<T>, b: &DensityMatrix<T>) -> Result<T> {
    if a.dim() != b.dim() {
        return Err(Error::InvalidState(format!("dimension mismatch {} vs {}", a.dim(), b.dim())));
    }
    let sa = psd_sqrt(&a.rho);
    let inner = &sa * &b.rho * &sa;
    let root: T = eigenvalues(&inner).into_iter().map(|x| x.max(T::zero()).sqrt()).sum();
    Ok((root * root).min(T::one()).max(T::zero()))
}
