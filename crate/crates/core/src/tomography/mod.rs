//! Maximum-likelihood state and process tomography over the 216-state
//! product probe basis, process-matrix conversions and fidelity metrics.

mod basis;
mod dataset;
mod density;
pub mod io;
mod mle;
mod montecarlo;
mod process;
mod random;

pub use basis::{ProbeBasis, PROBE_COUNT};
pub use dataset::{simulate_dataset, simulate_state_dataset, simulate_subset, simulate_truth_table_dataset, TomographyDataset};
pub use density::{state_fidelity, DensityMatrix};
pub use mle::{qpt_mle, qst_mle, QptConfig, QptResult, QstConfig, QstResult};
pub use montecarlo::{monte_carlo_uncertainty, Uncertainty, MIN_TRIALS};
pub use process::{
    chi_from_choi, choi_from_chi, choi_from_unitary, process_fidelity, ChiMatrix, ChoiMatrix, ProcessFidelity, PAULI_LABELS,
};
pub use random::{random_pure_state, random_unitary};
