//! Simulation and characterization of polarization/OAM-encoded three-qubit
//! photonic gates built from trained diffractive phase stacks.
//!
//! The numerical core is generic over the floating-point scalar ([`Real`]);
//! the `*64` / `*32` aliases below are the concrete types most callers want.

pub mod dnn;
pub mod error;
pub mod gate;
pub mod linalg;
pub mod modes;
pub mod optics;
pub mod render;
mod real;
pub mod states;
pub mod tomography;

pub use error::{Error, Result};
pub use real::Real;

pub type Field64 = optics::Field<f64>;
pub type Field32 = optics::Field<f32>;
pub type GridSpec64 = optics::GridSpec<f64>;
pub type PhaseStack64 = dnn::PhaseStack<f64>;
pub type PhaseStack32 = dnn::PhaseStack<f32>;
pub type GateOperator64 = gate::GateOperator<f64>;
pub type DensityMatrix64 = tomography::DensityMatrix<f64>;
pub type ChoiMatrix64 = tomography::ChoiMatrix<f64>;
pub type ChiMatrix64 = tomography::ChiMatrix<f64>;
pub type ProbeBasis64 = tomography::ProbeBasis<f64>;
