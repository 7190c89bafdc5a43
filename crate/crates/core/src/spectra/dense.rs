use super::operator::AdiabaticOperator;
use crate::{Error, Result};

/// The `k` lowest eigenvalues of the operator, ascending, by full dense
/// symmetric diagonalisation.
pub fn dense_spectrum(op: &AdiabaticOperator, k: usize) -> Result<Vec<f64>> {
    if k == 0 || k > op.dim() {
        return Err(Error::param(format!("requested {k} eigenvalues of a {}-dim operator", op.dim())));
    }
    let h = op.to_dense()?;
    let mut values: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
    values.sort_by(f64::total_cmp);
    values.truncate(k);
    Ok(values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{GroverInstance, MisInstance, Graph, ProblemInstance, Provenance};
    use crate::spectra::operator::{build_operator, OperatorKind};

    #[test]
    fn transverse_field_spectrum_with_multiplicity() {
        let p = ProblemInstance::Grover(GroverInstance::new(4, 0).unwrap());
        let op = build_operator(&p, 0.0, OperatorKind::MixerInterpolation).unwrap();
        let ev = dense_spectrum(&op, 6).unwrap();
        let expected = [-4.0, -2.0, -2.0, -2.0, -2.0, 0.0];
        for (a, b) in ev.iter().zip(expected) {
            assert!((a - b).abs() < 1e-12, "{ev:?}");
        }
    }

    #[test]
    fn triangle_ground_energy_is_negated_optimum() {
        let inst = MisInstance::new(Graph::complete(3), 2.0, Provenance::default()).unwrap();
        let op = build_operator(&ProblemInstance::Mis(inst), 1.0, OperatorKind::MixerInterpolation).unwrap();
        let ev = dense_spectrum(&op, 1).unwrap();
        assert!((ev[0] + 1.0).abs() < 1e-12);
    }

    #[test]
    fn bad_k() {
        let p = ProblemInstance::Grover(GroverInstance::new(2, 0).unwrap());
        let op = build_operator(&p, 0.0, OperatorKind::MixerInterpolation).unwrap();
        assert!(dense_spectrum(&op, 0).is_err());
        assert!(dense_spectrum(&op, 5).is_err());
    }
}
