//! Adiabatic interpolation Hamiltonians `H(s) = (1 − s) H_0 + s H_C`.

use std::sync::Arc;

use nalgebra::DMatrix;

use crate::problems::ProblemInstance;
use crate::{Error, Result};

/// Largest dimension [`AdiabaticOperator::to_dense`] will allocate.
pub const MAX_DENSE_DIM: usize = 1 << 14;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OperatorKind {
    /// `H_0 = I − |ψ_0⟩⟨ψ_0|`, `H_C = I − |sol⟩⟨sol|` (Grover only).
    GroverProjector,
    /// `H_0 = −Σ X_i` with the problem's diagonal cost Hamiltonian.
    MixerInterpolation,
}

#[derive(Clone, Debug)]
enum Terms {
    Projector { marked: usize },
    Mixer { diag: Arc<[f64]> },
}

#[derive(Clone, Debug)]
pub struct AdiabaticOperator {
    n: usize,
    s: f64,
    terms: Terms,
}

pub fn build_operator(problem: &ProblemInstance, s: f64, kind: OperatorKind) -> Result<AdiabaticOperator> {
    let terms = match (kind, problem) {
        (OperatorKind::GroverProjector, ProblemInstance::Grover(g)) => Terms::Projector { marked: g.marked as usize },
        (OperatorKind::GroverProjector, _) => {
            return Err(Error::Unsupported("projector interpolation is defined for Grover only".into()))
        }
        (OperatorKind::MixerInterpolation, _) => Terms::Mixer { diag: problem.hamiltonian_diagonal().into() },
    };
    AdiabaticOperator::with_terms(problem.n(), s, terms)
}

impl AdiabaticOperator {
    fn with_terms(n: usize, s: f64, terms: Terms) -> Result<Self> {
        if !(0.0..=1.0).contains(&s) {
            return Err(Error::param(format!("interpolation parameter {s} outside [0, 1]")));
        }
        Ok(Self { n, s, terms })
    }

    /// Same cost diagonal at another interpolation point; avoids rebuilding it.
    pub fn at(&self, s: f64) -> Result<Self> {
        Self::with_terms(self.n, s, self.terms.clone())
    }

    /// Mixer interpolation with an explicit cost diagonal.
    pub fn mixer_with_diagonal(n: usize, diag: Arc<[f64]>, s: f64) -> Result<Self> {
        if diag.len() != 1 << n {
            return Err(Error::param("diagonal length must be 2^n"));
        }
        Self::with_terms(n, s, Terms::Mixer { diag })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn kind(&self) -> OperatorKind {
        match self.terms {
            Terms::Projector { .. } => OperatorKind::GroverProjector,
            Terms::Mixer { .. } => OperatorKind::MixerInterpolation,
        }
    }

    /// `y = H x`.
    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        let dim = self.dim();
        debug_assert_eq!(x.len(), dim);
        debug_assert_eq!(y.len(), dim);
        let s = self.s;
        match &self.terms {
            Terms::Projector { marked } => {
                let overlap = x.iter().sum::<f64>() / dim as f64;
                for (yi, xi) in y.iter_mut().zip(x) {
                    *yi = xi - (1.0 - s) * overlap;
                }
                y[*marked] -= s * x[*marked];
            }
            Terms::Mixer { diag } => {
                let t = 1.0 - s;
                for (idx, yi) in y.iter_mut().enumerate() {
                    let mut flip = 0.0;
                    for q in 0..self.n {
                        flip += x[idx ^ (1 << q)];
                    }
                    *yi = s * diag[idx] * x[idx] - t * flip;
                }
            }
        }
    }

    pub fn to_dense(&self) -> Result<DMatrix<f64>> {
        let dim = self.dim();
        if dim > MAX_DENSE_DIM {
            return Err(Error::Capacity { what: "dense operator dimension", size: dim, limit: MAX_DENSE_DIM });
        }
        let s = self.s;
        let mut h = DMatrix::zeros(dim, dim);
        match &self.terms {
            Terms::Projector { marked } => {
                let w = (1.0 - s) / dim as f64;
                for i in 0..dim {
                    for j in 0..dim {
                        h[(i, j)] = -w;
                    }
                    h[(i, i)] += 1.0;
                }
                h[(*marked, *marked)] -= s;
            }
            Terms::Mixer { diag } => {
                for i in 0..dim {
                    h[(i, i)] = s * diag[i];
                    for q in 0..self.n {
                        h[(i, i ^ (1 << q))] = -(1.0 - s);
                    }
                }
            }
        }
        Ok(h)
    }
}
