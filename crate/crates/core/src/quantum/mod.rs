//! Complex linear algebra, gate semantics, simulation and distance metrics.

pub mod gates;
pub mod matrix;
mod sim;
pub mod state;

pub use gates::GateKind;
pub use matrix::{hermitian_eigenvalues, ComplexMatrix, C64};
pub use sim::{apply_gate, circuit_unitary, run_density, run_statevector};
pub(crate) use sim::check_density_cap;
pub use state::{
    depolarize, measure, total_variation, trace_distance, trace_distance_pure, DensityMatrix, Measurable,
    OutcomeDistribution, Shots, StateVector, UnitaryMatrix, DENSITY_QUBIT_CAP, SIMULATION_QUBIT_CAP,
};
