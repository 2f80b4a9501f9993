//! Sampled scalar fields, phase modulation and free-space propagation.

mod asm;
mod fft;
mod field;
mod grid;
pub mod snapshot;

pub use asm::{asm_propagate, band_limit, AsmPropagator};
pub use fft::Fft2;
pub use field::{apply_phase_layer, inner_product, Field, PhaseLayer};
pub use grid::GridSpec;
