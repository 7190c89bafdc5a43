//! Spectral-gap informed parameter schedules for QAOA.
//!
//! The crate is organised by pipeline stage:
//!
//! - [`problems`]: Grover and maximum-independent-set instances, random graphs
//!   and an exact enumeration oracle.
//! - [`spectra`]: adiabatic interpolation operators, dense / Lanczos /
//!   symmetric-subspace eigensolvers and gap profiles.
//! - [`schedules`]: linear-ramp, Roland–Cerf, gap-informed and random
//!   schedule families.
//! - [`simulator`]: statevector QAOA with shot sampling and depolarising noise.
//! - [`search`]: log-spaced endpoint grid search and depth-to-threshold scans.
//! - [`harness`]: experiment orchestration, statistics, CSV/SVG output.

pub mod error;
pub mod harness;
pub mod problems;
pub mod rng;
pub mod schedules;
pub mod search;
pub mod simulator;
pub mod spectra;
pub mod stats;

pub use error::{Error, Result};
pub use problems::{Graph, GroverInstance, MisInstance, ProblemInstance};
pub use schedules::{Schedule, ScheduleFamily, ScheduleShape};
pub use simulator::{NoiseConfig, NoiseMode, RunResult};
pub use spectra::{GapKind, GapProfile, SpectrumMethod};
