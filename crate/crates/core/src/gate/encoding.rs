use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::modes::ENCODED_CHARGES;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Polarization {
    /// Vertical, control qubit 0. Bypasses the trained stack.
    V,
    /// Horizontal, control qubit 1. Modulated by the trained stack.
    H,
}

impl Polarization {
    pub fn bit(self) -> u8 {
        match self {
            Polarization::V => 0,
            Polarization::H => 1,
        }
    }
}

/// Physical carrier of one computational label `|p a s⟩`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct EncodedLabel {
    pub polarization: Polarization,
    /// Topological charge: `(a, s) = 00, 01, 10, 11` carry `−1, +1, −3, +3`.
    pub charge: i32,
}

impl EncodedLabel {
    /// Position of the OAM mode in encoding order.
    pub fn mode_index(&self) -> usize {
        ENCODED_CHARGES.iter().position(|&l| l == self.charge).expect("label holds an encoded charge")
    }

    /// Computational basis index `4p + 2a + s`.
    pub fn index(&self) -> usize {
        4 * self.polarization.bit() as usize + self.mode_index()
    }
}

pub fn encode_label(p: u8, a: u8, s: u8) -> Result<EncodedLabel> {
    if p > 1 || a > 1 || s > 1 {
        return Err(Error::InvalidState(format!("label bits ({p},{a},{s}) must be 0 or 1")));
    }
    let polarization = if p == 0 { Polarization::V } else { Polarization::H };
    let charge = ENCODED_CHARGES[(2 * a + s) as usize];
    Ok(EncodedLabel { polarization, charge })
}

pub fn decode_label(label: EncodedLabel) -> Result<(u8, u8, u8)> {
    let k = ENCODED_CHARGES
        .iter()
        .position(|&l| l == label.charge)
        .ok_or_else(|| Error::InvalidState(format!("charge {} is not an encoded value", label.charge)))?;
    Ok((label.polarization.bit(), (k / 2) as u8, (k % 2) as u8))
}
