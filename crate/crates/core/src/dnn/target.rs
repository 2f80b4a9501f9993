use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{unitarity_defect, CMatrix};
use crate::Real;

/// Polarization-controlled gates whose OAM block the stack is trained for.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GateKind {
    ToffoliCnot,
    Cch,
    FredkinSwap,
    Ccz,
}

impl GateKind {
    pub const ALL: [GateKind; 4] = [GateKind::ToffoliCnot, GateKind::Cch, GateKind::FredkinSwap, GateKind::Ccz];

    pub fn name(self) -> &'static str {
        match self {
            GateKind::ToffoliCnot => "toffoli-cnot",
            GateKind::Cch => "cch",
            GateKind::FredkinSwap => "fredkin-swap",
            GateKind::Ccz => "ccz",
        }
    }

    /// Name of the full three-qubit gate.
    pub fn gate_name(self) -> &'static str {
        match self {
            GateKind::ToffoliCnot => "Toffoli",
            GateKind::Cch => "CCH",
            GateKind::FredkinSwap => "Fredkin",
            GateKind::Ccz => "CCZ",
        }
    }

    /// 4×4 action on the (a, s) OAM subspace.
    pub fn unitary<T: Real>(self) -> CMatrix<T> {
        let o = Complex::<T>::one();
        let z = Complex::<T>::zero();
        let h = Complex::new(T::FRAC_1_SQRT_2(), T::zero());
        let rows: [[Complex<T>; 4]; 4] = match self {
            GateKind::ToffoliCnot => [[o, z, z, z], [z, o, z, z], [z, z, z, o], [z, z, o, z]],
            GateKind::Cch => [[o, z, z, z], [z, o, z, z], [z, z, h, h], [z, z, h, -h]],
            GateKind::FredkinSwap => [[o, z, z, z], [z, z, o, z], [z, o, z, z], [z, z, z, o]],
            GateKind::Ccz => [[o, z, z, z], [z, o, z, z], [z, z, o, z], [z, z, z, -o]],
        };
        DMatrix::from_fn(4, 4, |r, c| rows[r][c])
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GateKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        GateKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown gate target {s:?}")))
    }
}

/// OAM-subspace unitary the stack should realize.
#[derive(Clone, Debug)]
pub struct OamGateTarget<T> {
    name: String,
    unitary: CMatrix<T>,
}

impl<T: Real> OamGateTarget<T> {
    pub fn new(kind: GateKind) -> Self {
        Self { name: kind.name().to_string(), unitary: kind.unitary() }
    }

    /// Arbitrary 4×4 target; rejected unless `‖U†U − I‖_max < 1e-12`.
    pub fn custom(name: impl Into<String>, unitary: CMatrix<T>) -> Result<Self> {
        if unitary.shape() != (4, 4) {
            return Err(Error::InvalidConfig(format!("target must be 4x4, got {:?}", unitary.shape())));
        }
        let defect = unitarity_defect(&unitary);
        if !(defect < T::tol(1e-12)) {
            return Err(Error::NonUnitaryTarget { defect: defect.as_f64() });
        }
        Ok(Self { name: name.into(), unitary })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn unitary(&self) -> &CMatrix<T> {
        &self.unitary
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn library_targets_are_unitary() {
        for kind in GateKind::ALL {
            let u = kind.unitary::<f64>();
            assert!(unitarity_defect(&u) < 1e-12, "{kind}");
            assert!(OamGateTarget::custom(kind.name(), u).is_ok());
            assert_eq!(kind.name().parse::<GateKind>().unwrap(), kind);
        }
        assert!("cnot".parse::<GateKind>().is_err());
    }

    #[test]
    fn non_unitary_target_is_rejected() {
        let mut u = GateKind::Ccz.unitary::<f64>();
        u[(0, 0)] = Complex::new(0.9, 0.0);
        assert!(matches!(OamGateTarget::custom("bad", u), Err(Error::NonUnitaryTarget { .. })));
    }
}
