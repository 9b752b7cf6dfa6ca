//! Quantum-jump unravelling of the master equation, a dense master-equation
//! oracle, and the ensemble runner.

mod ensemble;
mod master;
mod trajectory;

pub use ensemble::{ensemble_mean, run_ensemble, EnsembleError};
pub use master::{
    master_equation_evolve, master_equation_evolve_with, master_rhs, DensityMatrix,
    MasterEvolution, MasterSample, MASTER_TOLERANCES, MAX_DENSE_DIM,
};
pub use trajectory::{
    evolve_trajectory, Channel, Jump, Sample, TrajectoryRecord, TrajectorySettings,
    JUMP_TIME_TOLERANCE, TRAJECTORY_TOLERANCES,
};
