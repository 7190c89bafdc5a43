//! Statevector QAOA with shot sampling and depolarising noise.

mod noise;
mod runner;
mod statevector;

pub use noise::{
    run_qaoa_noisy, DensityMatrix, NoiseConfig, NoiseMode, TrajectoryEstimate, TrajectoryEstimator,
    DEFAULT_TRAJECTORIES, MAX_DENSITY_QUBITS,
};
pub use runner::{run_qaoa, Evaluation, QaoaRunner, RunResult, DEFAULT_SHOTS};
pub use statevector::{apply_cost_layer, apply_mixer_layer, DiagonalCost, Statevector, MAX_STATEVECTOR_QUBITS};
