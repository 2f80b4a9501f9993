use std::fmt;

use crate::error::{Error, Result};
use crate::Real;

/// Square sampling grid: `n × n` pixels of side `pitch`, monochromatic at
/// `wavelength`. Pixel `(n/2, n/2)` sits on the optical axis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSpec<T> {
    n: usize,
    pitch: T,
    wavelength: T,
}

impl<T: Real> GridSpec<T> {
    pub fn new(n: usize, pitch: T, wavelength: T) -> Result<Self> {
        if n < 16 || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!("n must be a power of two >= 16, got {n}")));
        }
        if !(pitch > T::zero() && pitch.is_finite()) {
            return Err(Error::InvalidGrid(format!("pitch must be positive, got {pitch}")));
        }
        if !(wavelength > T::zero() && wavelength.is_finite()) {
            return Err(Error::InvalidGrid(format!("wavelength must be positive, got {wavelength}")));
        }
        Ok(Self { n, pitch, wavelength })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn pitch(&self) -> T {
        self.pitch
    }

    pub fn wavelength(&self) -> T {
        self.wavelength
    }

    /// Side length of the sampled window in meters.
    pub fn extent(&self) -> T {
        T::lit(self.n as f64) * self.pitch
    }

    pub fn pixel_area(&self) -> T {
        self.pitch * self.pitch
    }

    /// Physical coordinate of pixel index `i` along either axis.
    pub fn coordinate(&self, i: usize) -> T {
        (T::lit(i as f64) - T::lit((self.n / 2) as f64)) * self.pitch
    }

    /// Spatial frequency (1/m) of DFT bin `k`, negative frequencies in the upper half.
    pub fn frequency(&self, k: usize) -> T {
        let n = self.n as isize;
        let k = k as isize;
        let signed = if k < n / 2 { k } else { k - n };
        T::lit(signed as f64) / self.extent()
    }

    pub(crate) fn ensure_same(&self, other: &Self) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch { left: self.to_string(), right: other.to_string() })
        }
    }
}

impl<T: Real> Default for GridSpec<T> {
    fn default() -> Self {
        Self { n: 128, pitch: T::lit(12.5e-6), wavelength: T::lit(1550e-9) }
    }
}

impl<T: Real> fmt::Display for GridSpec<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{n}x{n} grid, pitch {p:.4e} m, wavelength {w:.4e} m",
            n = self.n,
            p = self.pitch.as_f64(),
            w = self.wavelength.as_f64()
        )
    }
}
