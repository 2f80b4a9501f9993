//! Single-qubit Pauli eigenstates and three-qubit product states built
//! from them.

use nalgebra::DVector;
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::linalg::{kron_vec, CVector};
use crate::Real;

/// Labels of the six single-qubit states, in basis order.
pub const QUBIT_LABELS: [&str; 6] = ["0", "1", "+", "-", "+i", "-i"];

/// `|0⟩, |1⟩, |+⟩, |−⟩, |+i⟩, |−i⟩` with `|±⟩ = (|0⟩ ± |1⟩)/√2` and
/// `|±i⟩ = (|0⟩ ± i|1⟩)/√2`.
pub fn qubit_state<T: Real>(index: usize) -> Result<CVector<T>> {
    let h = T::FRAC_1_SQRT_2();
    let z = T::zero();
    let o = T::one();
    let (a, b) = match index {
        0 => (Complex::new(o, z), Complex::new(z, z)),
        1 => (Complex::new(z, z), Complex::new(o, z)),
        2 => (Complex::new(h, z), Complex::new(h, z)),
        3 => (Complex::new(h, z), Complex::new(-h, z)),
        4 => (Complex::new(h, z), Complex::new(z, h)),
        5 => (Complex::new(h, z), Complex::new(z, -h)),
        _ => return Err(Error::InvalidState(format!("qubit state index {index} out of range 0..6"))),
    };
    Ok(DVector::from_vec(vec![a, b]))
}

pub fn qubit_index(label: &str) -> Result<usize> {
    QUBIT_LABELS
        .iter()
        .position(|&l| l == label)
        .ok_or_else(|| Error::InvalidState(format!("unknown qubit label {label:?}")))
}

/// `|q0⟩ ⊗ |q1⟩ ⊗ |q2⟩`, first factor most significant.
pub fn product_state<T: Real>(qubits: [usize; 3]) -> Result<CVector<T>> {
    let a = qubit_state::<T>(qubits[0])?;
    let b = qubit_state::<T>(qubits[1])?;
    let c = qubit_state::<T>(qubits[2])?;
    Ok(kron_vec(&kron_vec(&a, &b), &c))
}

/// Parses a label such as `"11-i"` or `"+_i+_i+"` into qubit indices.
/// Accepts an optional `_` inside `±i` and surrounding `|`, `⟩`.
pub fn parse_product_label(label: &str) -> Result<[usize; 3]> {
    let cleaned: String = label
        .trim()
        .trim_start_matches('|')
        .trim_end_matches('⟩')
        .trim_end_matches('>')
        .chars()
        .filter(|&ch| ch != '_')
        .collect();
    let chars: Vec<char> = cleaned.chars().collect();
    let mut out = Vec::with_capacity(3);
    let mut i = 0;
    while i < chars.len() {
        let mut token = chars[i].to_string();
        if matches!(chars[i], '+' | '-') && chars.get(i + 1) == Some(&'i') {
            token.push('i');
            i += 1;
        }
        out.push(qubit_index(&token).map_err(|_| Error::InvalidState(format!("bad product label {label:?}")))?);
        i += 1;
    }
    out.try_into().map_err(|_| Error::InvalidState(format!("product label {label:?} needs three qubits")))
}

pub fn product_label(qubits: [usize; 3]) -> String {
    qubits.iter().map(|&q| QUBIT_LABELS[q]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{dot, norm_sqr};

    #[test]
    fn six_states_are_unit_and_paired_orthogonal() {
        for i in 0..6 {
            let s = qubit_state::<f64>(i).unwrap();
            assert!((norm_sqr(&s) - 1.0).abs() < 1e-15);
        }
        for (a, b) in [(0, 1), (2, 3), (4, 5)] {
            let x = dot(&qubit_state::<f64>(a).unwrap(), &qubit_state::<f64>(b).unwrap());
            assert!(x.norm() < 1e-15);
        }
        assert!(qubit_state::<f64>(6).is_err());
    }

    #[test]
    fn labels_parse() {
        assert_eq!(parse_product_label("11-i").unwrap(), [1, 1, 5]);
        assert_eq!(parse_product_label("|+_i+_i+⟩").unwrap(), [4, 4, 2]);
        assert_eq!(parse_product_label("+1+i").unwrap(), [2, 1, 4]);
        assert_eq!(product_label([2, 0, 4]), "+0+i");
        assert!(parse_product_label("01").is_err());
        assert!(parse_product_label("01x").is_err());
    }

    #[test]
    fn product_state_ordering() {
        let s = product_state::<f64>([1, 1, 0]).unwrap();
        assert!((s[6].re - 1.0).abs() < 1e-15);
    }
}
