//! Adiabatic interpolation spectra and gap profiles.

mod dense;
mod extrapolate;
mod grover;
mod lanczos;
mod operator;
mod profile;
mod tridiag;

pub use dense::dense_spectrum;
pub use extrapolate::{extrapolated_gap_profile, ExtrapolationVariant, INITIAL_GAP};
pub use grover::{grover_analytic_gap, grover_symmetric_eigen, grover_symmetric_spectrum, MAX_SYMMETRIC_QUBITS};
pub use lanczos::{lanczos_lowest, lanczos_with, LanczosOptions, DEFAULT_TOL};
pub use operator::{build_operator, AdiabaticOperator, OperatorKind, MAX_DENSE_DIM};
pub use profile::{gap_profile, gap_profile_with, GapKind, GapProfile, ProfileOptions, ProfileSource, SpectrumMethod, GAP_CLAMP};
pub use tridiag::{tridiagonal_eigen, TridiagonalEigen};
