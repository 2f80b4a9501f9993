//! Polarization/OAM encoding of three qubits and the 8×8 gate built from
//! the two polarization paths.

mod encoding;
mod operator;
mod suites;
mod truth;

pub use encoding::{decode_label, encode_label, EncodedLabel, Polarization};
pub use operator::{
    apply_gate, compose_gate, extract_transfer_matrix, v_path_transfer, EncodedState, Evolution, GateOperator,
    TransferMatrix, VPath, ACCEPTANCE_DEFECT,
};
pub use suites::{
    entangled_mappings, evolve_entangled_suite, evolve_suite, toffoli_probe_mappings, StateMapping, SuiteResult,
};
pub(crate) use truth::{resample_counts, sample_counts_with};
pub use truth::{raw_probabilities, sample_counts, truth_table, TruthTable};
