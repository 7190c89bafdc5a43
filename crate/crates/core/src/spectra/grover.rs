//! Grover spectra: the Hamming-weight sector of the mixer interpolation and
//! the closed-form gap of the projector interpolation.

use super::tridiag::{tridiagonal_eigen, TridiagonalEigen};
use crate::{Error, Result};

/// Largest register the symmetric sector is built for.
pub const MAX_SYMMETRIC_QUBITS: usize = 4096;

fn check(n: usize, s: f64) -> Result<()> {
    if n == 0 || n > MAX_SYMMETRIC_QUBITS {
        return Err(Error::param(format!("symmetric sector needs 1 ≤ n ≤ {MAX_SYMMETRIC_QUBITS}, got {n}")));
    }
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::param(format!("interpolation parameter {s} outside [0, 1]")));
    }
    Ok(())
}

/// Eigen-decomposition of `(1 − s)(−Σ X_i) + s (I − |0⟩⟨0|)` restricted to
/// the normalised Dicke states `|w⟩`, `w = 0..=n`. The marked string is taken
/// to be all-zeros; conjugating by bit flips maps any other marked string
/// there without changing the spectrum. `rows[0]` holds the weight-0
/// component of every eigenvector.
pub fn grover_symmetric_eigen(n: usize, s: f64) -> Result<TridiagonalEigen> {
    check(n, s)?;
    let diag: Vec<f64> = (0..=n).map(|w| if w == 0 { 0.0 } else { s }).collect();
    let off: Vec<f64> = (0..n)
        .map(|w| -(1.0 - s) * (((w + 1) * (n - w)) as f64).sqrt())
        .collect();
    tridiagonal_eigen(&diag, &off, &[0])
}

/// The `n + 1` eigenvalues of the symmetric sector, ascending.
pub fn grover_symmetric_spectrum(n: usize, s: f64) -> Result<Vec<f64>> {
    Ok(grover_symmetric_eigen(n, s)?.values)
}

/// `E1 − E0` of the projector interpolation, `sqrt(1 − 4s(1−s)(1 − 1/N))`.
pub fn grover_analytic_gap(n: usize, s: f64) -> f64 {
    let inv_n = (-(n as f64)).exp2();
    (1.0 - 4.0 * s * (1.0 - s) * (1.0 - inv_n)).max(0.0).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{GroverInstance, ProblemInstance};
    use crate::spectra::dense::dense_spectrum;
    use crate::spectra::operator::{build_operator, OperatorKind};

    #[test]
    fn single_qubit_is_full_space() {
        let ev = grover_symmetric_spectrum(1, 0.0).unwrap();
        assert!((ev[0] + 1.0).abs() < 1e-14 && (ev[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn lowest_two_match_full_space() {
        let p = ProblemInstance::Grover(GroverInstance::new(6, 41).unwrap());
        for j in 0..=10 {
            let s = j as f64 / 10.0;
            let op = build_operator(&p, s, OperatorKind::MixerInterpolation).unwrap();
            let dense = dense_spectrum(&op, 2).unwrap();
            let sym = grover_symmetric_spectrum(6, s).unwrap();
            assert!((dense[0] - sym[0]).abs() < 1e-10 && (dense[1] - sym[1]).abs() < 1e-10, "s={s}");
        }
    }

    #[test]
    fn endpoint_ground_state_is_weight_zero() {
        let eig = grover_symmetric_eigen(20, 1.0).unwrap();
        assert!(eig.values[0].abs() < 1e-12);
        assert!((eig.rows[0][0].abs() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn analytic_gap_values() {
        for n in 1..10 {
            assert!((grover_analytic_gap(n, 0.0) - 1.0).abs() < 1e-15);
            assert!((grover_analytic_gap(n, 0.5) - (-(n as f64) / 2.0).exp2()).abs() < 1e-15);
        }
        assert!((grover_analytic_gap(6, 0.5) - 0.125).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(grover_symmetric_spectrum(0, 0.5).is_err());
        assert!(grover_symmetric_spectrum(3, 1.5).is_err());
    }
}
