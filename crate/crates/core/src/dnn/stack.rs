use std::io::{Read, Write};

use ndarray::Array2;
use num_complex::Complex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::optics::snapshot::{read_exact, read_f64, read_u32};
use crate::optics::{AsmPropagator, Field, GridSpec, PhaseLayer};
use crate::Real;

pub const STACK_MAGIC: &[u8; 4] = b"OAMS";

/// Half-width of the uniform random phase initialization, radians.
pub const INIT_PHASE_SPREAD: f64 = 0.1;

/// Ordered phase planes separated by a constant free-space gap. The input
/// plane sits one gap before the first layer and the output plane one gap
/// after the last.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseStack<T> {
    grid: GridSpec<T>,
    spacing: T,
    layers: Vec<PhaseLayer<T>>,
}

impl<T: Real> PhaseStack<T> {
    pub fn new(grid: GridSpec<T>, spacing: T, layers: Vec<PhaseLayer<T>>) -> Result<Self> {
        if !(spacing >= T::zero() && spacing.is_finite()) {
            return Err(Error::NegativeDistance(spacing.as_f64()));
        }
        for layer in &layers {
            grid.ensure_same(layer.grid())?;
        }
        Ok(Self { grid, spacing, layers })
    }

    pub fn zeros(grid: GridSpec<T>, layers: usize, spacing: T) -> Result<Self> {
        Self::new(grid, spacing, vec![PhaseLayer::zeros(grid); layers])
    }

    /// Seeded uniform phases in `(−0.1, 0.1)` rad.
    pub fn random(grid: GridSpec<T>, layers: usize, spacing: T, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let spread = T::lit(INIT_PHASE_SPREAD);
        let layers = (0..layers).map(|_| PhaseLayer::random(grid, spread, &mut rng)).collect();
        Self::new(grid, spacing, layers)
    }

    pub fn grid(&self) -> &GridSpec<T> {
        &self.grid
    }

    pub fn spacing(&self) -> T {
        self.spacing
    }

    pub fn layers(&self) -> &[PhaseLayer<T>] {
        &self.layers
    }

    pub(crate) fn layers_mut(&mut self) -> &mut [PhaseLayer<T>] {
        &mut self.layers
    }

    pub fn num_layers(&self) -> usize {
        self.layers.len()
    }

    /// `(L + 1) · spacing`
    pub fn total_path(&self) -> T {
        T::lit((self.layers.len() + 1) as f64) * self.spacing
    }

    /// Precomputes propagator and transmissions for repeated evaluation.
    pub fn model(&self) -> Result<StackModel<T>> {
        let propagator = AsmPropagator::new(self.grid, self.spacing)?;
        let transmissions = self
            .layers
            .iter()
            .map(|l| l.transmission().into_raw_vec_and_offset().0)
            .collect();
        Ok(StackModel { propagator, transmissions })
    }

    pub fn write<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(STACK_MAGIC)?;
        w.write_all(&(self.layers.len() as u32).to_le_bytes())?;
        w.write_all(&(self.grid.n() as u32).to_le_bytes())?;
        w.write_all(&self.grid.pitch().as_f64().to_le_bytes())?;
        w.write_all(&self.grid.wavelength().as_f64().to_le_bytes())?;
        w.write_all(&self.spacing.as_f64().to_le_bytes())?;
        let mut body = Vec::with_capacity(self.layers.len() * self.grid.n() * self.grid.n() * 8);
        for layer in &self.layers {
            for p in layer.phases().iter() {
                body.extend_from_slice(&p.as_f64().to_le_bytes());
            }
        }
        w.write_all(&body)?;
        Ok(())
    }

    pub fn read<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 4];
        read_exact(&mut r, &mut magic, "magic")?;
        if &magic != STACK_MAGIC {
            return Err(Error::Format(format!("expected magic OAMS, found {magic:?}")));
        }
        let layers = read_u32(&mut r, "layer count")? as usize;
        let n = read_u32(&mut r, "n")? as usize;
        let pitch = read_f64(&mut r, "pitch")?;
        let wavelength = read_f64(&mut r, "wavelength")?;
        let spacing = read_f64(&mut r, "spacing")?;
        let grid = GridSpec::new(n, T::lit(pitch), T::lit(wavelength))?;
        let mut out = Vec::with_capacity(layers);
        let mut buf = vec![0u8; n * n * 8];
        for k in 0..layers {
            read_exact(&mut r, &mut buf, &format!("layer {k}"))?;
            let phases: Vec<T> =
                buf.chunks_exact(8).map(|c| T::lit(f64::from_le_bytes(c.try_into().unwrap()))).collect();
            let arr = Array2::from_shape_vec((n, n), phases).map_err(|e| Error::Format(e.to_string()))?;
            out.push(PhaseLayer::from_array(grid, arr)?);
        }
        let mut trailing = [0u8; 1];
        if r.read(&mut trailing)? != 0 {
            return Err(Error::Format("trailing bytes after last layer".into()));
        }
        Self::new(grid, T::lit(spacing), out)
    }
}

/// A [`PhaseStack`] prepared for evaluation: one propagator for the layer
/// gap and the complex transmission of every layer.
pub struct StackModel<T: Real> {
    propagator: AsmPropagator<T>,
    transmissions: Vec<Vec<Complex<T>>>,
}

/// Field right after each modulation plane, kept from a forward pass for
/// the reverse sweep.
pub(crate) struct ForwardTrace<T> {
    pub modulated: Vec<Vec<Complex<T>>>,
    pub output: Vec<Complex<T>>,
}

impl<T: Real> StackModel<T> {
    pub fn grid(&self) -> &GridSpec<T> {
        self.propagator.grid()
    }

    pub fn forward(&self, input: &Field<T>) -> Result<Field<T>> {
        self.grid().ensure_same(input.grid())?;
        let mut out = input.clone();
        let data = out.as_mut_slice();
        for t in &self.transmissions {
            self.propagator.apply_in_place(data, false);
            data.iter_mut().zip(t).for_each(|(a, t)| *a = *a * *t);
        }
        self.propagator.apply_in_place(data, false);
        Ok(out)
    }

    /// Re-reads the layer phases of `stack`, keeping the propagator.
    pub(crate) fn refresh(&mut self, stack: &PhaseStack<T>) {
        for (t, layer) in self.transmissions.iter_mut().zip(stack.layers()) {
            t.iter_mut()
                .zip(layer.phases_slice())
                .for_each(|(z, &p)| *z = Complex::new(p.cos(), p.sin()));
        }
    }

    pub(crate) fn forward_trace(&self, input: &Field<T>) -> ForwardTrace<T> {
        let mut data = input.as_slice().to_vec();
        let mut modulated = Vec::with_capacity(self.transmissions.len());
        for t in &self.transmissions {
            self.propagator.apply_in_place(&mut data, false);
            data.iter_mut().zip(t).for_each(|(a, t)| *a = *a * *t);
            modulated.push(data.clone());
        }
        self.propagator.apply_in_place(&mut data, false);
        ForwardTrace { modulated, output: data }
    }

    /// Reverse sweep. `seed` is the loss sensitivity at the output plane,
    /// already scaled; the returned arrays are `Im(conj(a_l)·λ_l)` per layer
    /// where `a_l` is the modulated forward field and `λ_l` the adjoint field
    /// arriving back at plane `l`.
    pub(crate) fn backward(&self, trace: &ForwardTrace<T>, mut seed: Vec<Complex<T>>) -> Vec<Vec<T>> {
        let layers = self.transmissions.len();
        let mut grads = vec![Vec::new(); layers];
        for l in (0..layers).rev() {
            self.propagator.apply_in_place(&mut seed, true);
            grads[l] = trace.modulated[l].iter().zip(&seed).map(|(a, lam)| (a.conj() * lam).im).collect();
            if l > 0 {
                seed.iter_mut().zip(&self.transmissions[l]).for_each(|(z, t)| *z = *z * t.conj());
            }
        }
        grads
    }
}

/// Runs `input` through the stack: one gap of free space before each
/// layer's modulation, and a final gap to the output plane.
pub fn forward<T: Real>(stack: &PhaseStack<T>, input: &Field<T>) -> Result<Field<T>> {
    stack.model()?.forward(input)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modes::ModeBasis;
    use crate::optics::asm_propagate;

    fn grid() -> GridSpec<f64> {
        GridSpec::new(64, 12.5e-6, 1550e-9).unwrap()
    }

    #[test]
    fn zero_stack_is_free_propagation() {
        let basis = ModeBasis::input(grid(), 0.06e-3).unwrap();
        let stack = PhaseStack::zeros(grid(), 3, 0.002).unwrap();
        let out = forward(&stack, basis.mode(1)).unwrap();
        let free = asm_propagate(basis.mode(1), stack.total_path()).unwrap();
        let err = out.max_abs_diff(&free).unwrap() / free.max_abs();
        assert!(err <= 1e-12, "relative error {err:e}");
    }

    #[test]
    fn pi_layer_negates() {
        let basis = ModeBasis::input(grid(), 0.06e-3).unwrap();
        let stack =
            PhaseStack::new(grid(), 0.002, vec![PhaseLayer::uniform(grid(), std::f64::consts::PI)]).unwrap();
        let out = forward(&stack, basis.mode(2)).unwrap();
        let free = asm_propagate(basis.mode(2), 0.004).unwrap();
        let neg = free.scaled(Complex::new(-1.0, 0.0));
        assert!(out.max_abs_diff(&neg).unwrap() <= 1e-12 * free.max_abs());
    }

    #[test]
    fn random_stack_conserves_power_of_modes() {
        let basis = ModeBasis::input(grid(), 0.06e-3).unwrap();
        let stack = PhaseStack::random(grid(), 4, 0.004, 11).unwrap();
        for m in basis.modes() {
            let out = forward(&stack, m).unwrap();
            assert!((out.power() - 1.0).abs() < 1e-9, "power {}", out.power());
        }
    }

    #[test]
    fn binary_layout_and_round_trip() {
        let stack = PhaseStack::random(GridSpec::new(16, 1e-5, 1.55e-6).unwrap(), 2, 0.02, 5).unwrap();
        let mut buf = Vec::new();
        stack.write(&mut buf).unwrap();
        assert_eq!(buf.len(), 4 + 4 + 4 + 8 * 3 + 2 * 16 * 16 * 8);
        assert_eq!(&buf[..4], b"OAMS");
        assert_eq!(u32::from_le_bytes(buf[4..8].try_into().unwrap()), 2);
        assert_eq!(u32::from_le_bytes(buf[8..12].try_into().unwrap()), 16);
        assert_eq!(f64::from_le_bytes(buf[28..36].try_into().unwrap()), 0.02);
        let back = PhaseStack::<f64>::read(&buf[..]).unwrap();
        assert_eq!(back, stack);
        assert!(PhaseStack::<f64>::read(&buf[..buf.len() - 1]).is_err());
        buf.push(0);
        assert!(PhaseStack::<f64>::read(&buf[..]).is_err());
    }
}
