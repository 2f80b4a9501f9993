use crate::linalg::{outer, CMatrix, CVector};
use crate::states::{product_label, product_state};
use crate::Real;

pub const PROBE_COUNT: usize = 216;

/// Overcomplete three-qubit basis: all products of the six single-qubit
/// Pauli eigenstates. State `36·q1 + 6·q2 + q3` is `|q1⟩|q2⟩|q3⟩`.
#[derive(Clone, Debug)]
pub struct ProbeBasis<T: Real> {
    states: Vec<CVector<T>>,
    projectors: Vec<CMatrix<T>>,
}

impl<T: Real> ProbeBasis<T> {
    pub fn new() -> Self {
        let states: Vec<_> = (0..PROBE_COUNT)
            .map(|k| product_state(Self::qubits(k)).expect("indices below 6"))
            .collect();
        let projectors = states.iter().map(outer).collect();
        Self { states, projectors }
    }

    pub fn qubits(index: usize) -> [usize; 3] {
        [index / 36, (index / 6) % 6, index % 6]
    }

    pub fn index_of(qubits: [usize; 3]) -> usize {
        36 * qubits[0] + 6 * qubits[1] + qubits[2]
    }

    /// Basis index of computational state `|j⟩`, `j < 8`.
    pub fn computational_index(j: usize) -> usize {
        Self::index_of([(j >> 2) & 1, (j >> 1) & 1, j & 1])
    }

    pub fn label(index: usize) -> String {
        product_label(Self::qubits(index))
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[CVector<T>] {
        &self.states
    }

    pub fn state(&self, index: usize) -> &CVector<T> {
        &self.states[index]
    }

    pub fn projector(&self, index: usize) -> &CMatrix<T> {
        &self.projectors[index]
    }
}

impl<T: Real> Default for ProbeBasis<T> {
    fn default() -> Self {
        Self::new()
    }
}
