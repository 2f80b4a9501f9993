//! Trainable diffractive phase stacks.

mod adam;
mod stack;
mod target;
mod training;

pub use adam::{Adam, AdamConfig};
pub use stack::{forward, PhaseStack, StackModel, INIT_PHASE_SPREAD, STACK_MAGIC};
pub use target::{GateKind, OamGateTarget};
pub use training::{
    adjoint_gradient, build_gate_training_set, loss, train, LossKind, PairSelection, TrainConfig, TrainingOutcome,
    TrainingPair, TrainingSet,
};
