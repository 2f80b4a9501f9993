//! Band-limited angular-spectrum propagation.

use num_complex::Complex;
use num_traits::Zero;

use super::{Fft2, Field, GridSpec};
use crate::error::{Error, Result};
use crate::Real;

/// Highest spatial frequency per axis kept for a propagation over
/// `distance`: `1 / (λ·sqrt((2Δz/(n·pitch))² + 1))`. Beyond it the
/// sampled transfer function aliases.
pub fn band_limit<T: Real>(grid: &GridSpec<T>, distance: f64) -> f64 {
    let extent = grid.extent().as_f64();
    let wl = grid.wavelength().as_f64();
    1.0 / (wl * ((2.0 * distance / extent).powi(2) + 1.0).sqrt())
}

/// Free-space propagator for one grid and one distance, with the FFT plan
/// and transfer function precomputed.
#[derive(Clone)]
pub struct AsmPropagator<T: Real> {
    grid: GridSpec<T>,
    distance: T,
    // None for zero distance: the transfer function is identically one.
    transfer: Option<Vec<Complex<T>>>,
    fft: Fft2<T>,
}

impl<T: Real> AsmPropagator<T> {
    pub fn new(grid: GridSpec<T>, distance: T) -> Result<Self> {
        let dz = distance.as_f64();
        if !(dz >= 0.0) || !dz.is_finite() {
            return Err(Error::NegativeDistance(dz));
        }
        let fft = Fft2::new(grid.n());
        let transfer = (dz > 0.0).then(|| transfer_function(&grid, dz));
        Ok(Self { grid, distance, transfer, fft })
    }

    pub fn grid(&self) -> &GridSpec<T> {
        &self.grid
    }

    pub fn distance(&self) -> T {
        self.distance
    }

    /// Sampled `H(fx, fy, Δz)` in DFT layout, row index over `fy`.
    pub fn transfer(&self) -> Vec<Complex<T>> {
        match &self.transfer {
            Some(h) => h.clone(),
            None => vec![Complex::new(T::one(), T::zero()); self.grid.n() * self.grid.n()],
        }
    }

    pub fn propagate(&self, field: &Field<T>) -> Result<Field<T>> {
        self.grid.ensure_same(field.grid())?;
        let mut out = field.clone();
        self.apply_in_place(out.as_mut_slice(), false);
        Ok(out)
    }

    /// Hermitian adjoint of [`propagate`](Self::propagate): the conjugated
    /// transfer function, which is what reverse-mode gradients need.
    pub fn propagate_adjoint(&self, field: &Field<T>) -> Result<Field<T>> {
        self.grid.ensure_same(field.grid())?;
        let mut out = field.clone();
        self.apply_in_place(out.as_mut_slice(), true);
        Ok(out)
    }

    pub(crate) fn apply_in_place(&self, data: &mut [Complex<T>], adjoint: bool) {
        let Some(h) = &self.transfer else { return };
        self.fft.forward(data);
        if adjoint {
            data.iter_mut().zip(h).for_each(|(z, h)| *z = *z * h.conj());
        } else {
            data.iter_mut().zip(h).for_each(|(z, h)| *z = *z * *h);
        }
        self.fft.inverse(data);
    }
}

fn transfer_function<T: Real>(grid: &GridSpec<T>, dz: f64) -> Vec<Complex<T>> {
    let n = grid.n();
    let wl = grid.wavelength().as_f64();
    let f_limit = band_limit(grid, dz);
    let freqs: Vec<f64> = (0..n).map(|k| grid.frequency(k).as_f64()).collect();
    let k0 = 2.0 * std::f64::consts::PI / wl;
    let mut h = vec![Complex::zero(); n * n];
    for (r, &fy) in freqs.iter().enumerate() {
        for (c, &fx) in freqs.iter().enumerate() {
            let arg = 1.0 - (wl * fx).powi(2) - (wl * fy).powi(2);
            // evanescent or outside the anti-aliasing band: dropped
            if arg < 0.0 || fx.abs() > f_limit || fy.abs() > f_limit {
                continue;
            }
            let phase = k0 * dz * arg.sqrt();
            h[r * n + c] = Complex::new(T::lit(phase.cos()), T::lit(phase.sin()));
        }
    }
    h
}

/// One-shot propagation over `distance` meters.
pub fn asm_propagate<T: Real>(field: &Field<T>, distance: T) -> Result<Field<T>> {
    AsmPropagator::new(*field.grid(), distance)?.propagate(field)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array2;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn grid() -> GridSpec<f64> {
        GridSpec::new(64, 12.5e-6, 1550e-9).unwrap()
    }

    // Random spectrum confined well inside the band limit of `dz`.
    fn band_limited_field(grid: GridSpec<f64>, dz: f64, seed: u64) -> Field<f64> {
        let n = grid.n();
        let limit = 0.9 * band_limit(&grid, dz);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut spec = vec![Complex::zero(); n * n];
        for r in 0..n {
            for c in 0..n {
                if grid.frequency(r).abs() < limit && grid.frequency(c).abs() < limit {
                    spec[r * n + c] = Complex::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
                }
            }
        }
        Fft2::new(n).inverse(&mut spec);
        Field::from_array(grid, Array2::from_shape_vec((n, n), spec).unwrap()).unwrap()
    }

    #[test]
    fn zero_distance_is_identity() {
        let f = band_limited_field(grid(), 0.05, 1);
        let out = asm_propagate(&f, 0.0).unwrap();
        assert!(out.max_abs_diff(&f).unwrap() <= 1e-12 * f.max_abs());
    }

    #[test]
    fn rejects_negative_distance() {
        let f = Field::zeros(grid());
        assert!(matches!(asm_propagate(&f, -1e-3), Err(Error::NegativeDistance(_))));
    }

    #[test]
    fn band_limited_power_is_conserved() {
        let f = band_limited_field(grid(), 0.05, 2);
        let out = asm_propagate(&f, 0.05).unwrap();
        assert!((out.power() / f.power() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn propagation_composes() {
        let f = band_limited_field(grid(), 0.05, 3);
        let two_step = asm_propagate(&asm_propagate(&f, 0.02).unwrap(), 0.03).unwrap();
        let one_step = asm_propagate(&f, 0.05).unwrap();
        assert!(two_step.max_abs_diff(&one_step).unwrap() <= 1e-9 * one_step.max_abs());
    }

    #[test]
    fn adjoint_is_inverse_on_band_limited_fields() {
        let f = band_limited_field(grid(), 0.03, 4);
        let p = AsmPropagator::new(grid(), 0.03).unwrap();
        let back = p.propagate_adjoint(&p.propagate(&f).unwrap()).unwrap();
        assert!(back.max_abs_diff(&f).unwrap() <= 1e-10 * f.max_abs());
    }

    #[test]
    fn evanescent_components_are_dropped() {
        // pitch below λ/2 puts the outer spectrum past the light cone
        let g = GridSpec::<f64>::new(16, 0.5e-6, 1550e-9).unwrap();
        let p = AsmPropagator::new(g, 1e-6).unwrap();
        let h = p.transfer();
        let corner = 8 * 16 + 8;
        assert_eq!(h[corner], Complex::zero());
        assert!((h[0].norm() - 1.0).abs() < 1e-12);
    }
}
