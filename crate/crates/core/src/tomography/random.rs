use nalgebra::{DMatrix, DVector};
use num_complex::Complex;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::linalg::{CMatrix, CVector};
use crate::Real;

fn gaussian<T: Real, R: Rng + ?Sized>(rng: &mut R) -> Complex<T> {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex::new(T::lit(re), T::lit(im))
}

/// Haar-random unitary: QR of a complex Ginibre matrix with the phases of
/// R's diagonal folded back into Q.
pub fn random_unitary<T: Real, R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMatrix<T> {
    let g: DMatrix<Complex<f64>> = DMatrix::from_fn(d, d, |_, _| gaussian::<f64, R>(rng));
    let (q, r) = g.qr().unpack();
    let mut u = q;
    for c in 0..d {
        let diag = r[(c, c)];
        let phase = if diag.norm() > 0.0 { diag / diag.norm() } else { Complex::new(1.0, 0.0) };
        for row in 0..d {
            u[(row, c)] *= phase;
        }
    }
    u.map(|z| Complex::new(T::lit(z.re), T::lit(z.im)))
}

/// Uniformly random pure state.
pub fn random_pure_state<T: Real, R: Rng + ?Sized>(d: usize, rng: &mut R) -> CVector<T> {
    let v: DVector<Complex<T>> = DVector::from_fn(d, |_, _| gaussian::<T, R>(rng));
    let n = crate::linalg::norm_sqr(&v).sqrt();
    v.map(|z| z / n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{norm_sqr, unitarity_defect};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn unitary_and_normalized() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let u = random_unitary::<f64, _>(8, &mut rng);
        assert!(unitarity_defect(&u) < 1e-12);
        let s = random_pure_state::<f64, _>(8, &mut rng);
        assert!((norm_sqr(&s) - 1.0).abs() < 1e-12);
    }
}
