//! OAM basis modes, propagated reference bases, and mode-space readout.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::optics::{inner_product, AsmPropagator, Field, GridSpec};
use crate::Real;

/// Topological charges in encoding order `(a, s) = 00, 01, 10, 11`.
pub const ENCODED_CHARGES: [i32; 4] = [-1, 1, -3, 3];

pub const MAX_CHARGE: i32 = 16;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OamSpec<T> {
    charge: i32,
    waist: T,
}

impl<T: Real> OamSpec<T> {
    pub fn new(charge: i32, waist: T) -> Result<Self> {
        if charge.abs() > MAX_CHARGE {
            return Err(Error::InvalidMode(format!("|l| must be <= {MAX_CHARGE}, got {charge}")));
        }
        if !(waist > T::zero() && waist.is_finite()) {
            return Err(Error::InvalidMode(format!("waist must be positive, got {waist}")));
        }
        Ok(Self { charge, waist })
    }

    pub fn charge(&self) -> i32 {
        self.charge
    }

    pub fn waist(&self) -> T {
        self.waist
    }

    /// Largest waist the aperture guard accepts for this charge on `grid`.
    pub fn max_waist(charge: i32, grid: &GridSpec<T>) -> f64 {
        grid.extent().as_f64() / (3.0 * (1.0 + (charge.unsigned_abs() as f64).sqrt()))
    }
}

/// Unit-power ring mode `(r/w)^|l| · exp(−r²/w²) · exp(i·l·φ)`.
pub fn make_oam_mode<T: Real>(spec: OamSpec<T>, grid: GridSpec<T>) -> Result<Field<T>> {
    let l = spec.charge;
    let w = spec.waist;
    let max_waist = OamSpec::max_waist(l, &grid);
    if w.as_f64() >= max_waist {
        return Err(Error::ApertureGuard { charge: l, waist: w.as_f64(), max_waist });
    }
    let order = l.unsigned_abs() as i32;
    let lf = T::lit(l as f64);
    let raw = Field::from_fn(grid, |x, y| {
        let rho2 = (x * x + y * y) / (w * w);
        let radial = rho2.sqrt().powi(order) * (-rho2).exp();
        let phase = lf * y.atan2(x);
        Complex::new(radial * phase.cos(), radial * phase.sin())
    });
    raw.normalized()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Provenance {
    InputPlane,
    PropagatedReference,
}

/// Four orthonormal fields in encoding order (|−1⟩, |+1⟩, |−3⟩, |+3⟩).
#[derive(Clone, Debug)]
pub struct ModeBasis<T> {
    modes: Vec<Field<T>>,
    provenance: Provenance,
}

impl<T: Real> ModeBasis<T> {
    /// Validates orthonormality (|⟨m_i,m_j⟩| < 1e-6, ⟨m_i,m_i⟩ = 1 ± 1e-9).
    pub fn new(modes: Vec<Field<T>>, provenance: Provenance) -> Result<Self> {
        if modes.len() != 4 {
            return Err(Error::NonOrthonormalBasis(format!("expected 4 modes, got {}", modes.len())));
        }
        let off_tol = T::tol(1e-6);
        let norm_tol = T::tol(1e-9);
        for i in 0..4 {
            for j in i..4 {
                let ip = inner_product(&modes[i], &modes[j])?;
                if i == j && (ip.re - T::one()).abs() > norm_tol {
                    return Err(Error::NonOrthonormalBasis(format!("mode {i} has norm² {}", ip.re)));
                }
                if i != j && ip.norm() >= off_tol {
                    return Err(Error::NonOrthonormalBasis(format!("|<m{i},m{j}>| = {:.3e}", ip.norm().as_f64())));
                }
            }
        }
        Ok(Self { modes, provenance })
    }

    /// The input-plane basis of the four encoded charges at a common waist.
    pub fn input(grid: GridSpec<T>, waist: T) -> Result<Self> {
        let modes = ENCODED_CHARGES
            .iter()
            .map(|&l| make_oam_mode(OamSpec::new(l, waist)?, grid))
            .collect::<Result<Vec<_>>>()?;
        Self::new(modes, Provenance::InputPlane)
    }

    pub fn modes(&self) -> &[Field<T>] {
        &self.modes
    }

    pub fn mode(&self, k: usize) -> &Field<T> {
        &self.modes[k]
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn grid(&self) -> &GridSpec<T> {
        self.modes[0].grid()
    }
}

/// Free-space propagates every input mode over `total_path` and
/// renormalizes, defining the output plane of an unmodulated path.
pub fn make_reference_basis<T: Real>(input_basis: &ModeBasis<T>, total_path: T) -> Result<ModeBasis<T>> {
    let prop = AsmPropagator::new(*input_basis.grid(), total_path)?;
    let modes = input_basis
        .modes
        .iter()
        .map(|m| prop.propagate(m)?.normalized())
        .collect::<Result<Vec<_>>>()?;
    ModeBasis::new(modes, Provenance::PropagatedReference)
}

/// Components `⟨basis_k, field⟩`, unnormalized.
pub fn project_onto_basis<T: Real>(field: &Field<T>, basis: &ModeBasis<T>) -> Result<[Complex<T>; 4]> {
    let mut out = [Complex::new(T::zero(), T::zero()); 4];
    for (o, m) in out.iter_mut().zip(&basis.modes) {
        *o = inner_product(m, field)?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn grid() -> GridSpec<f64> {
        GridSpec::default()
    }

    const WAIST: f64 = 0.16e-3;

    #[test]
    fn fundamental_mode_is_real_positive() {
        let g = grid();
        let m = make_oam_mode(OamSpec::new(0, WAIST).unwrap(), g).unwrap();
        assert!((m.power() - 1.0).abs() < 1e-9);
        assert!(m.amplitudes().iter().all(|z| z.re > 0.0 && z.im == 0.0));
    }

    #[test]
    fn charge_three_winds_six_pi() {
        let g = grid();
        let m = make_oam_mode(OamSpec::new(3, WAIST).unwrap(), g).unwrap();
        // walk a centered circle through pixel samples and unwrap the phase
        let c = g.n() / 2;
        let radius = 14.0;
        let steps = 720;
        let mut total = 0.0;
        let sample = |k: usize| {
            let t = 2.0 * PI * k as f64 / steps as f64;
            let x = (c as f64 + radius * t.cos()).round() as usize;
            let y = (c as f64 + radius * t.sin()).round() as usize;
            m.amplitudes()[(y, x)].arg()
        };
        let mut prev = sample(0);
        for k in 1..=steps {
            let cur = sample(k % steps);
            let mut d = cur - prev;
            while d > PI {
                d -= 2.0 * PI;
            }
            while d < -PI {
                d += 2.0 * PI;
            }
            total += d;
            prev = cur;
        }
        assert!((total - 6.0 * PI).abs() < 1e-9, "winding {total}");
    }

    #[test]
    fn opposite_charges_are_orthogonal() {
        let g = grid();
        let a = make_oam_mode(OamSpec::new(1, WAIST).unwrap(), g).unwrap();
        let b = make_oam_mode(OamSpec::new(-1, WAIST).unwrap(), g).unwrap();
        assert!(inner_product(&a, &b).unwrap().norm() < 1e-8);
    }

    #[test]
    fn aperture_guard_suggests_waist() {
        let err = make_oam_mode(OamSpec::new(3, 0.4e-3).unwrap(), grid()).unwrap_err();
        match err {
            Error::ApertureGuard { max_waist, .. } => {
                let expected = 128.0 * 12.5e-6 / (3.0 * (1.0 + 3f64.sqrt()));
                assert!((max_waist - expected).abs() < 1e-12);
            }
            other => panic!("unexpected {other}"),
        }
        assert!(OamSpec::new(17, WAIST).is_err());
        assert!(OamSpec::new(1, 0.0).is_err());
    }

    #[test]
    fn reference_basis_properties() {
        let input = ModeBasis::input(grid(), WAIST).unwrap();
        let same = make_reference_basis(&input, 0.0).unwrap();
        for k in 0..4 {
            assert!(same.mode(k).max_abs_diff(input.mode(k)).unwrap() < 1e-9 * input.mode(k).max_abs());
        }
        let reference = make_reference_basis(&input, 0.05).unwrap();
        assert_eq!(reference.provenance(), Provenance::PropagatedReference);
        let free = crate::optics::asm_propagate(input.mode(3), 0.05).unwrap();
        let amps = project_onto_basis(&free, &reference).unwrap();
        for (k, a) in amps.iter().enumerate() {
            let expected = if k == 3 { 1.0 } else { 0.0 };
            assert!((a.norm() - expected).abs() < 1e-6, "component {k}: {a}");
        }
    }

    #[test]
    fn projection_is_linear_readout() {
        let basis = ModeBasis::input(grid(), WAIST).unwrap();
        let amps = project_onto_basis(basis.mode(2), &basis).unwrap();
        for (k, a) in amps.iter().enumerate() {
            assert!((a - Complex::new(if k == 2 { 1.0 } else { 0.0 }, 0.0)).norm() < 1e-6);
        }
        let h = Complex::new(1.0 / 2f64.sqrt(), 0.0);
        let sup = Field::superpose(&[(h, basis.mode(0)), (h, basis.mode(3))]).unwrap();
        let amps = project_onto_basis(&sup, &basis).unwrap();
        assert!((amps[0] - h).norm() < 1e-6 && (amps[3] - h).norm() < 1e-6);
        assert!(amps[1].norm() < 1e-6 && amps[2].norm() < 1e-6);
        let zero = project_onto_basis(&Field::zeros(grid()), &basis).unwrap();
        assert!(zero.iter().all(|z| z.norm() == 0.0));
    }
}
