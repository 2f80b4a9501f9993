use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use nalgebra::DMatrix;
use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};
use rustfft::FftNum;

/// Floating-point scalar the whole simulator is generic over.
///
/// Everything element-wise goes through [`num_traits::Float`]. The one
/// routine that needs a full linear-algebra backend, the Hermitian
/// eigendecomposition, is provided per concrete type so callers never need
/// nalgebra's own scalar bounds in scope.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + NumAssign + FftNum + Display + LowerExp + Debug + Sum + Default
{
    /// Eigen-decomposition of a Hermitian matrix. Eigenvalues are returned in
    /// ascending order, eigenvectors as the matching columns.
    fn hermitian_eigen(m: &DMatrix<Complex<Self>>) -> (Vec<Self>, DMatrix<Complex<Self>>);

    /// Converts an `f64` literal. Infallible for every supported scalar.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    /// A tolerance of `base`, loosened to what the scalar can actually resolve.
    #[inline]
    fn tol(base: f64) -> Self {
        let floor = Self::epsilon().to_f64().unwrap_or(f64::EPSILON) * 1e3;
        Self::lit(base.max(floor))
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

macro_rules! impl_real {
    ($t:ty) => {
        impl Real for $t {
            fn hermitian_eigen(m: &DMatrix<Complex<$t>>) -> (Vec<$t>, DMatrix<Complex<$t>>) {
                let eig = m.clone().symmetric_eigen();
                let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
                order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
                let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
                let vectors = DMatrix::from_fn(m.nrows(), order.len(), |r, c| eig.eigenvectors[(r, order[c])]);
                (values, vectors)
            }
        }
    };
}

impl_real!(f32);
impl_real!(f64);
