use ndarray::{Array2, Zip};
use num_complex::Complex;
use num_traits::Zero;
use rand::Rng;

use super::GridSpec;
use crate::error::{Error, Result};
use crate::Real;

/// Complex scalar field sampled on a [`GridSpec`].
///
/// Amplitudes are indexed `[row, column] = [y, x]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Field<T> {
    grid: GridSpec<T>,
    amplitudes: Array2<Complex<T>>,
}

impl<T: Real> Field<T> {
    pub fn zeros(grid: GridSpec<T>) -> Self {
        Self { grid, amplitudes: Array2::from_elem((grid.n(), grid.n()), Complex::zero()) }
    }

    pub fn from_array(grid: GridSpec<T>, amplitudes: Array2<Complex<T>>) -> Result<Self> {
        if amplitudes.dim() != (grid.n(), grid.n()) {
            return Err(Error::InvalidGrid(format!(
                "amplitude array is {:?}, grid expects {n}x{n}",
                amplitudes.dim(),
                n = grid.n()
            )));
        }
        Ok(Self { grid, amplitudes: amplitudes.as_standard_layout().into_owned() })
    }

    /// Samples `f(x, y)` at physical pixel coordinates.
    pub fn from_fn(grid: GridSpec<T>, f: impl Fn(T, T) -> Complex<T>) -> Self {
        let amplitudes =
            Array2::from_shape_fn((grid.n(), grid.n()), |(r, c)| f(grid.coordinate(c), grid.coordinate(r)));
        Self { grid, amplitudes }
    }

    pub fn grid(&self) -> &GridSpec<T> {
        &self.grid
    }

    pub fn amplitudes(&self) -> &Array2<Complex<T>> {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Array2<Complex<T>> {
        self.amplitudes
    }

    pub(crate) fn as_slice(&self) -> &[Complex<T>] {
        self.amplitudes.as_slice().expect("standard layout")
    }

    pub(crate) fn as_mut_slice(&mut self) -> &mut [Complex<T>] {
        self.amplitudes.as_slice_mut().expect("standard layout")
    }

    /// Σ|a|²·pitch²
    pub fn power(&self) -> T {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum::<T>() * self.grid.pixel_area()
    }

    pub fn scaled(&self, factor: Complex<T>) -> Self {
        Self { grid: self.grid, amplitudes: self.amplitudes.mapv(|z| z * factor) }
    }

    /// Rescales to unit power. A zero field cannot be normalized.
    pub fn normalized(&self) -> Result<Self> {
        let p = self.power();
        if !(p > T::zero()) {
            return Err(Error::InvalidState("cannot normalize a zero field".into()));
        }
        Ok(self.scaled(Complex::new(T::one() / p.sqrt(), T::zero())))
    }

    pub fn inner_product(&self, other: &Self) -> Result<Complex<T>> {
        inner_product(self, other)
    }

    /// Σ_k c_k f_k over fields sharing one grid.
    pub fn superpose(terms: &[(Complex<T>, &Field<T>)]) -> Result<Self> {
        let (_, first) = terms.first().ok_or_else(|| Error::InvalidState("empty superposition".into()))?;
        let mut out = Field::zeros(first.grid);
        for (coef, f) in terms {
            first.grid.ensure_same(&f.grid)?;
            Zip::from(&mut out.amplitudes).and(&f.amplitudes).for_each(|o, &a| *o += a * *coef);
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.grid.ensure_same(&other.grid)?;
        Ok(Self { grid: self.grid, amplitudes: &self.amplitudes - &other.amplitudes })
    }

    /// Largest pixel-wise difference, for comparisons in tests and checks.
    pub fn max_abs_diff(&self, other: &Self) -> Result<T> {
        self.grid.ensure_same(&other.grid)?;
        Ok(self.amplitudes.iter().zip(other.amplitudes.iter()).fold(T::zero(), |m, (a, b)| m.max((a - b).norm())))
    }

    pub fn max_abs(&self) -> T {
        self.amplitudes.iter().fold(T::zero(), |m, a| m.max(a.norm()))
    }
}

/// Σ conj(a)·b·pitch²
pub fn inner_product<T: Real>(a: &Field<T>, b: &Field<T>) -> Result<Complex<T>> {
    a.grid.ensure_same(&b.grid)?;
    let sum = a
        .amplitudes
        .iter()
        .zip(b.amplitudes.iter())
        .fold(Complex::zero(), |acc: Complex<T>, (x, y)| acc + x.conj() * y);
    Ok(sum * a.grid.pixel_area())
}

/// Phase-only modulation plane. Phases are stored unwrapped; the applied
/// transmission is `exp(i·phase)`.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseLayer<T> {
    grid: GridSpec<T>,
    phases: Array2<T>,
}

impl<T: Real> PhaseLayer<T> {
    pub fn zeros(grid: GridSpec<T>) -> Self {
        Self::uniform(grid, T::zero())
    }

    pub fn uniform(grid: GridSpec<T>, phase: T) -> Self {
        Self { grid, phases: Array2::from_elem((grid.n(), grid.n()), phase) }
    }

    pub fn from_array(grid: GridSpec<T>, phases: Array2<T>) -> Result<Self> {
        if phases.dim() != (grid.n(), grid.n()) {
            return Err(Error::InvalidGrid(format!(
                "phase array is {:?}, grid expects {n}x{n}",
                phases.dim(),
                n = grid.n()
            )));
        }
        Ok(Self { grid, phases: phases.as_standard_layout().into_owned() })
    }

    /// Independent uniform phases in `(-amplitude, amplitude)`.
    pub fn random<R: Rng + ?Sized>(grid: GridSpec<T>, amplitude: T, rng: &mut R) -> Self {
        let a = amplitude.as_f64();
        let phases = Array2::from_shape_simple_fn((grid.n(), grid.n()), || T::lit(rng.random_range(-a..=a)));
        Self { grid, phases }
    }

    pub fn grid(&self) -> &GridSpec<T> {
        &self.grid
    }

    pub fn phases(&self) -> &Array2<T> {
        &self.phases
    }

    pub(crate) fn phases_mut_slice(&mut self) -> &mut [T] {
        self.phases.as_slice_mut().expect("standard layout")
    }

    pub(crate) fn phases_slice(&self) -> &[T] {
        self.phases.as_slice().expect("standard layout")
    }

    pub fn transmission(&self) -> Array2<Complex<T>> {
        self.phases.mapv(|p| Complex::new(p.cos(), p.sin()))
    }
}

/// Pointwise multiplication by `exp(i·phase)`.
pub fn apply_phase_layer<T: Real>(field: &Field<T>, layer: &PhaseLayer<T>) -> Result<Field<T>> {
    field.grid.ensure_same(&layer.grid)?;
    let mut out = field.clone();
    Zip::from(&mut out.amplitudes).and(&layer.phases).for_each(|a, &p| *a = *a * Complex::new(p.cos(), p.sin()));
    Ok(out)
}
