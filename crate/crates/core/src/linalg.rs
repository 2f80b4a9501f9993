//! Small dense complex matrix helpers shared by the gate and tomography code.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;
use num_traits::{One, Zero};

use crate::Real;

pub type CMatrix<T> = DMatrix<Complex<T>>;
pub type CVector<T> = DVector<Complex<T>>;

pub fn c<T: Real>(re: f64, im: f64) -> Complex<T> {
    Complex::new(T::lit(re), T::lit(im))
}

pub fn adjoint<T: Real>(m: &CMatrix<T>) -> CMatrix<T> {
    DMatrix::from_fn(m.ncols(), m.nrows(), |r, col| m[(col, r)].conj())
}

/// Inner product ⟨a|b⟩.
pub fn dot<T: Real>(a: &CVector<T>, b: &CVector<T>) -> Complex<T> {
    a.iter().zip(b.iter()).fold(Complex::zero(), |acc, (x, y)| acc + x.conj() * y)
}

pub fn norm_sqr<T: Real>(v: &CVector<T>) -> T {
    v.iter().map(|z| z.norm_sqr()).sum()
}

/// |v⟩⟨v|
pub fn outer<T: Real>(v: &CVector<T>) -> CMatrix<T> {
    DMatrix::from_fn(v.len(), v.len(), |r, col| v[r] * v[col].conj())
}

pub fn identity<T: Real>(d: usize) -> CMatrix<T> {
    DMatrix::from_fn(d, d, |r, col| if r == col { Complex::one() } else { Complex::zero() })
}

pub fn trace<T: Real>(m: &CMatrix<T>) -> Complex<T> {
    (0..m.nrows().min(m.ncols())).fold(Complex::zero(), |acc, i| acc + m[(i, i)])
}

pub fn max_abs<T: Real>(m: &CMatrix<T>) -> T {
    m.iter().fold(T::zero(), |acc, z| acc.max(z.norm()))
}

pub fn max_abs_diff<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> T {
    a.iter().zip(b.iter()).fold(T::zero(), |acc, (x, y)| acc.max((x - y).norm()))
}

/// max |M^† M − I|
pub fn unitarity_defect<T: Real>(m: &CMatrix<T>) -> T {
    let gram = adjoint(m) * m;
    max_abs_diff(&gram, &identity(m.ncols()))
}

pub fn hermiticity_defect<T: Real>(m: &CMatrix<T>) -> T {
    max_abs_diff(m, &adjoint(m))
}

/// (M + M^†) / 2
pub fn hermitize<T: Real>(m: &CMatrix<T>) -> CMatrix<T> {
    let half = T::lit(0.5);
    DMatrix::from_fn(m.nrows(), m.ncols(), |r, col| (m[(r, col)] + m[(col, r)].conj()) * half)
}

/// Applies `f` to the spectrum of a Hermitian matrix.
pub fn hermitian_map<T: Real>(m: &CMatrix<T>, f: impl Fn(T) -> T) -> CMatrix<T> {
    let (values, vectors) = T::hermitian_eigen(&hermitize(m));
    let d = m.nrows();
    let mut out = DMatrix::from_element(d, d, Complex::zero());
    for (k, &ev) in values.iter().enumerate() {
        let w = f(ev);
        if w == T::zero() {
            continue;
        }
        for r in 0..d {
            let vr = vectors[(r, k)] * w;
            for col in 0..d {
                out[(r, col)] += vr * vectors[(col, k)].conj();
            }
        }
    }
    out
}

pub fn eigenvalues<T: Real>(m: &CMatrix<T>) -> Vec<T> {
    T::hermitian_eigen(&hermitize(m)).0
}

/// Principal square root of a positive semidefinite matrix; negative
/// round-off eigenvalues are clipped to zero.
pub fn psd_sqrt<T: Real>(m: &CMatrix<T>) -> CMatrix<T> {
    hermitian_map(m, |x| x.max(T::zero()).sqrt())
}

/// Kronecker product with the left factor as the most significant index.
pub fn kron<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> CMatrix<T> {
    a.kronecker(b)
}

pub fn kron_vec<T: Real>(a: &CVector<T>, b: &CVector<T>) -> CVector<T> {
    DVector::from_fn(a.len() * b.len(), |i, _| a[i / b.len()] * b[i % b.len()])
}

/// Trace over the second (right) tensor factor of dimension `d_second`.
pub fn partial_trace_second<T: Real>(m: &CMatrix<T>, d_second: usize) -> CMatrix<T> {
    let d_first = m.nrows() / d_second;
    DMatrix::from_fn(d_first, d_first, |a, col| {
        (0..d_second).fold(Complex::zero(), |acc, b| acc + m[(a * d_second + b, col * d_second + b)])
    })
}

/// Trace over the first (left) tensor factor of dimension `d_first`.
pub fn partial_trace_first<T: Real>(m: &CMatrix<T>, d_first: usize) -> CMatrix<T> {
    let d_second = m.nrows() / d_first;
    DMatrix::from_fn(d_second, d_second, |b, col| {
        (0..d_first).fold(Complex::zero(), |acc, a| acc + m[(a * d_second + b, a * d_second + col)])
    })
}

/// Multiplies the `d`-dimensional left factor of `m` on both sides:
/// (L ⊗ I) m (L ⊗ I) with L Hermitian.
pub fn sandwich_first<T: Real>(left: &CMatrix<T>, m: &CMatrix<T>) -> CMatrix<T> {
    let d_first = left.nrows();
    let d_second = m.nrows() / d_first;
    let lift = kron(left, &identity(d_second));
    &lift * m * &lift
}

pub fn frobenius_inner<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> Complex<T> {
    // Tr(a^† b)
    a.iter().zip(b.iter()).fold(Complex::zero(), |acc, (x, y)| acc + x.conj() * y)
}

/// Tr(a b)
pub fn trace_product<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> Complex<T> {
    let n = a.nrows();
    let mut acc = Complex::zero();
    for i in 0..n {
        for k in 0..a.ncols() {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> CMatrix<f64> {
        DMatrix::from_fn(4, 4, |r, col| Complex::new((r * 3 + col) as f64 * 0.1, (r as f64 - col as f64) * 0.2))
    }

    #[test]
    fn partial_traces_of_product_operator() {
        let a = sample();
        let a = &a * adjoint(&a);
        let b = identity::<f64>(2) * Complex::new(2.0, 0.0);
        let ab = kron(&a, &b);
        let first = partial_trace_second(&ab, 2);
        assert!(max_abs_diff(&first, &(a.clone() * Complex::new(4.0, 0.0))) < 1e-12);
        let second = partial_trace_first(&ab, 4);
        assert!(max_abs_diff(&second, &(b * trace(&a))) < 1e-12);
    }

    #[test]
    fn psd_sqrt_squares_back() {
        let a = sample();
        let p = &a * adjoint(&a);
        let s = psd_sqrt(&p);
        assert!(max_abs_diff(&(&s * &s), &p) < 1e-10);
    }

    #[test]
    fn eigen_is_ascending() {
        let a = sample();
        let p = &a * adjoint(&a);
        let ev = eigenvalues(&p);
        assert!(ev.windows(2).all(|w| w[0] <= w[1]));
        assert!((ev.iter().sum::<f64>() - trace(&p).re).abs() < 1e-10);
    }

    #[test]
    fn kron_vec_matches_kron() {
        let a = CVector::<f64>::from_vec(vec![c(1.0, 0.5), c(0.0, -1.0)]);
        let b = CVector::<f64>::from_vec(vec![c(0.3, 0.0), c(2.0, 1.0), c(-1.0, 0.0)]);
        let v = kron_vec(&a, &b);
        let m = kron(&outer(&a), &outer(&b));
        assert!(max_abs_diff(&m, &outer(&v)) < 1e-12);
    }
}
