//! Problem instances: Grover search and penalised maximum independent set.
//!
//! Basis index convention used throughout the crate: bit `i` of the index is
//! qubit / node `i`. Printed bitstrings put qubit 0 first.

mod exact;
mod graph;
mod grover;
mod mis;

pub use exact::{solve_mis, MAX_ENUMERATION_QUBITS};
pub use graph::{gen_er_graph, gen_regular_graph, Graph};
pub use grover::GroverInstance;
pub use mis::{mis_cost, mis_cost_index, IsingTerms, MisInstance, DEFAULT_LAMBDA, MAX_DIAGONAL_QUBITS};

use serde::{Deserialize, Serialize};

use crate::rng::fingerprint;
use crate::{Error, Result};

/// Where an instance came from, enough to regenerate it.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub generator: String,
    pub seed: Option<u64>,
    pub lambda: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub enum ProblemInstance {
    Grover(GroverInstance),
    Mis(MisInstance),
}

impl ProblemInstance {
    pub fn n(&self) -> usize {
        match self {
            ProblemInstance::Grover(g) => g.n,
            ProblemInstance::Mis(m) => m.n(),
        }
    }

    pub fn dim(&self) -> usize {
        1usize << self.n()
    }

    /// Diagonal of the cost Hamiltonian `H_C`, whose ground space is the
    /// optimal set. For MIS this is `−C(x)`.
    pub fn hamiltonian_diagonal(&self) -> Vec<f64> {
        match self {
            ProblemInstance::Grover(g) => (0..g.search_space()).map(|x| g.energy(x)).collect(),
            ProblemInstance::Mis(m) => m.cost_diagonal.iter().map(|c| -c).collect(),
        }
    }

    pub fn optimal_set(&self) -> Vec<u64> {
        match self {
            ProblemInstance::Grover(g) => vec![g.marked],
            ProblemInstance::Mis(m) => m.optimal_set.clone(),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            ProblemInstance::Grover(_) => "grover",
            ProblemInstance::Mis(_) => "mis",
        }
    }

    /// Stable fingerprint of the instance definition.
    pub fn hash(&self) -> String {
        let desc = match self {
            ProblemInstance::Grover(g) => format!("grover;n={};marked={}", g.n, g.marked),
            ProblemInstance::Mis(m) => format!(
                "mis;lambda={};{}",
                m.lambda,
                m.graph.to_edge_list().replace('\n', ";")
            ),
        };
        fingerprint(desc.as_bytes())
    }
}

/// Exact optimum and the complete set of optimal bitstrings.
#[derive(Clone, Debug, PartialEq)]
pub struct ExactSolution {
    pub optimal_value: f64,
    pub optimal_set: Vec<u64>,
}

/// Exact classical solution by enumeration. Values are in the maximisation
/// convention: the MIS cost `C`, or `1` for the marked Grover state.
pub fn solve_exact(instance: &ProblemInstance) -> Result<ExactSolution> {
    if instance.n() > MAX_ENUMERATION_QUBITS {
        return Err(Error::Capacity {
            what: "exact enumeration qubits",
            size: instance.n(),
            limit: MAX_ENUMERATION_QUBITS,
        });
    }
    match instance {
        ProblemInstance::Grover(g) => Ok(ExactSolution {
            optimal_value: 1.0,
            optimal_set: vec![g.marked],
        }),
        ProblemInstance::Mis(m) => {
            let (optimal_value, optimal_set) = solve_mis(&m.graph, m.lambda)?;
            Ok(ExactSolution { optimal_value, optimal_set })
        }
    }
}

/// Render a basis index as a bitstring, qubit 0 first.
pub fn format_bits(x: u64, n: usize) -> String {
    (0..n).map(|i| if (x >> i) & 1 == 1 { '1' } else { '0' }).collect()
}

pub fn parse_bits(s: &str) -> Result<u64> {
    if s.is_empty() || s.len() > 64 {
        return Err(Error::Parse(format!("bad bitstring {s:?}")));
    }
    s.chars().enumerate().try_fold(0u64, |acc, (i, c)| match c {
        '0' => Ok(acc),
        '1' => Ok(acc | (1 << i)),
        _ => Err(Error::Parse(format!("bad bitstring {s:?}"))),
    })
}

/// Degree-3 MIS instance from the pairing model.
pub fn regular_mis(n: usize, degree: usize, lambda: f64, seed: u64) -> Result<MisInstance> {
    let graph = gen_regular_graph(n, degree, seed)?;
    MisInstance::new(
        graph,
        lambda,
        Provenance {
            generator: format!("regular(d={degree})"),
            seed: Some(seed),
            lambda: Some(lambda),
        },
    )
}

pub fn er_mis(n: usize, edge_prob: f64, lambda: f64, seed: u64) -> Result<MisInstance> {
    let graph = gen_er_graph(n, edge_prob, seed)?;
    MisInstance::new(
        graph,
        lambda,
        Provenance {
            generator: format!("er(p={edge_prob})"),
            seed: Some(seed),
            lambda: Some(lambda),
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grover_exact_and_diagonal() {
        let g = GroverInstance::new(4, parse_bits("0110").unwrap()).unwrap();
        let inst = ProblemInstance::Grover(g.clone());
        let sol = solve_exact(&inst).unwrap();
        assert_eq!(sol.optimal_set, vec![g.marked]);
        assert_eq!(format_bits(sol.optimal_set[0], 4), "0110");
        let diag = inst.hamiltonian_diagonal();
        assert_eq!(diag.iter().filter(|&&v| v == 0.0).count(), 1);
        assert_eq!(diag[g.marked as usize], 0.0);
    }

    #[test]
    fn mis_optimal_set_is_argmax_of_diagonal() {
        let inst = regular_mis(10, 3, 2000.0, 4).unwrap();
        let best = inst.cost_diagonal.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let argmax: Vec<u64> = (0..1024u64).filter(|&x| inst.cost_diagonal[x as usize] == best).collect();
        assert_eq!(inst.optimal_value, best);
        assert_eq!(inst.optimal_set, argmax);
    }

    #[test]
    fn bit_formatting() {
        assert_eq!(format_bits(0b001, 3), "100");
        assert_eq!(parse_bits("100").unwrap(), 1);
        assert!(parse_bits("10x").is_err());
    }

    #[test]
    fn grover_validation() {
        assert!(GroverInstance::new(3, 8).is_err());
        assert!(GroverInstance::new(0, 0).is_err());
        let a = GroverInstance::random(10, 3).unwrap();
        assert_eq!(a, GroverInstance::random(10, 3).unwrap());
    }
}
