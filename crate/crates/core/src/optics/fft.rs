use std::sync::Arc;

use num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::Real;

/// Square 2-D DFT on row-major buffers.
///
/// Forward uses the `exp(-2πi f·x)` kernel without scaling; the inverse
/// carries the full `1/n²` factor.
#[derive(Clone)]
pub struct Fft2<T: Real> {
    n: usize,
    forward: Arc<dyn Fft<T>>,
    inverse: Arc<dyn Fft<T>>,
}

impl<T: Real> Fft2<T> {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self { n, forward: planner.plan_fft_forward(n), inverse: planner.plan_fft_inverse(n) }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn forward(&self, data: &mut [Complex<T>]) {
        self.transform(&*self.forward, data);
    }

    pub fn inverse(&self, data: &mut [Complex<T>]) {
        self.transform(&*self.inverse, data);
        let scale = T::one() / T::lit((self.n * self.n) as f64);
        data.iter_mut().for_each(|z| *z = *z * scale);
    }

    fn transform(&self, fft: &dyn Fft<T>, data: &mut [Complex<T>]) {
        let n = self.n;
        assert_eq!(data.len(), n * n, "buffer is not {n}x{n}");
        let mut scratch = vec![Complex::new(T::zero(), T::zero()); fft.get_inplace_scratch_len()];
        fft.process_with_scratch(data, &mut scratch);
        let mut t = vec![Complex::new(T::zero(), T::zero()); n * n];
        transpose(data, &mut t, n);
        fft.process_with_scratch(&mut t, &mut scratch);
        transpose(&t, data, n);
    }
}

fn transpose<T: Copy>(src: &[T], dst: &mut [T], n: usize) {
    const BLOCK: usize = 16;
    for rb in (0..n).step_by(BLOCK) {
        for cb in (0..n).step_by(BLOCK) {
            for r in rb..(rb + BLOCK).min(n) {
                for c in cb..(cb + BLOCK).min(n) {
                    dst[c * n + r] = src[r * n + c];
                }
            }
        }
    }
}
