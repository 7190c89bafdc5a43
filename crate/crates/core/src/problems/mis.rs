//! Maximum independent set with a quadratic penalty.

use serde::{Deserialize, Serialize};

use super::{exact, Graph, Provenance};
use crate::{Error, Result};

/// Largest graph for which the full cost diagonal is materialised.
pub const MAX_DIAGONAL_QUBITS: usize = 26;

/// Penalty coefficient used unless a run overrides it.
pub const DEFAULT_LAMBDA: f64 = 2000.0;

/// `C(x) = Σ_i x_i − λ Σ_{(i,j)∈E} x_i x_j` for a bit vector `x`.
pub fn mis_cost(graph: &Graph, lambda: f64, x: &[bool]) -> Result<f64> {
    if x.len() != graph.n() {
        return Err(Error::param(format!(
            "bitstring has {} bits, graph has {} nodes",
            x.len(),
            graph.n()
        )));
    }
    let size = x.iter().filter(|&&b| b).count() as f64;
    let violations = graph.edges().iter().filter(|&&(u, v)| x[u] && x[v]).count() as f64;
    Ok(size - lambda * violations)
}

/// Same as [`mis_cost`] for a basis index whose bit `i` is node `i`.
pub fn mis_cost_index(graph: &Graph, lambda: f64, x: u64) -> f64 {
    let size = x.count_ones() as f64;
    let violations = graph
        .edges()
        .iter()
        .filter(|&&(u, v)| (x >> u) & 1 == 1 && (x >> v) & 1 == 1)
        .count() as f64;
    size - lambda * violations
}

/// Ising form of `H_C = −C(x)`: `const + Σ h_i Z_i + Σ J_ij Z_i Z_j` with
/// `Z = +1` on bit value 0.
#[derive(Clone, Debug, PartialEq)]
pub struct IsingTerms {
    pub n: usize,
    pub constant: f64,
    pub fields: Vec<f64>,
    pub couplings: Vec<(usize, usize, f64)>,
}

impl IsingTerms {
    pub fn energy(&self, x: u64) -> f64 {
        let z = |q: usize| if (x >> q) & 1 == 0 { 1.0 } else { -1.0 };
        let mut e = self.constant;
        for (q, h) in self.fields.iter().enumerate() {
            e += h * z(q);
        }
        for &(a, b, j) in &self.couplings {
            e += j * z(a) * z(b);
        }
        e
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MisInstance {
    pub graph: Graph,
    pub lambda: f64,
    /// `C(x)` for every basis index (maximisation objective).
    pub cost_diagonal: Vec<f64>,
    pub optimal_value: f64,
    /// All maximisers of the cost, ascending.
    pub optimal_set: Vec<u64>,
    pub provenance: Provenance,
}

impl MisInstance {
    pub fn new(graph: Graph, lambda: f64, provenance: Provenance) -> Result<Self> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::param(format!("penalty must be positive, got {lambda}")));
        }
        let n = graph.n();
        if n > MAX_DIAGONAL_QUBITS {
            return Err(Error::Capacity {
                what: "MIS cost diagonal qubits",
                size: n,
                limit: MAX_DIAGONAL_QUBITS,
            });
        }
        let cost_diagonal = cost_diagonal(&graph, lambda);
        let (optimal_value, optimal_set) = exact::solve_mis(&graph, lambda)?;
        Ok(Self {
            graph,
            lambda,
            cost_diagonal,
            optimal_value,
            optimal_set,
            provenance: Provenance { lambda: Some(lambda), ..provenance },
        })
    }

    pub fn n(&self) -> usize {
        self.graph.n()
    }

    pub fn ising_terms(&self) -> IsingTerms {
        // x_i = (1 - Z_i)/2; −Σ x_i + λ Σ x_i x_j expanded.
        let n = self.n();
        let deg = self.graph.degrees();
        let m = self.graph.edges().len() as f64;
        let quarter = self.lambda / 4.0;
        IsingTerms {
            n,
            constant: -(n as f64) / 2.0 + quarter * m,
            fields: deg.iter().map(|&d| 0.5 - quarter * d as f64).collect(),
            couplings: self.graph.edges().iter().map(|&(u, v)| (u, v, quarter)).collect(),
        }
    }
}

fn cost_diagonal(graph: &Graph, lambda: f64) -> Vec<f64> {
    let dim = 1usize << graph.n();
    let lower: Vec<u64> = {
        // Neighbours with a smaller index, so each edge is counted once.
        let mut masks = vec![0u64; graph.n()];
        for &(u, v) in graph.edges() {
            masks[v] |= 1 << u;
        }
        masks
    };
    (0..dim as u64)
        .map(|x| {
            let mut violations = 0u32;
            let mut rest = x;
            while rest != 0 {
                let v = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                violations += (x & lower[v]).count_ones();
            }
            x.count_ones() as f64 - lambda * violations as f64
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::gen_regular_graph;

    fn bits(s: &str) -> Vec<bool> {
        s.chars().map(|c| c == '1').collect()
    }

    #[test]
    fn cost_examples() {
        let tri = Graph::complete(3);
        assert_eq!(mis_cost(&tri, 2.0, &bits("111")).unwrap(), -3.0);
        assert_eq!(mis_cost(&tri, 2.0, &bits("000")).unwrap(), 0.0);
        let path = Graph::path(3);
        assert_eq!(mis_cost(&path, 2000.0, &bits("101")).unwrap(), 2.0);
        assert!(mis_cost(&path, 2.0, &bits("10")).is_err());
    }

    #[test]
    fn diagonal_matches_direct_evaluation() {
        let g = gen_regular_graph(8, 3, 1).unwrap();
        let inst = MisInstance::new(g.clone(), 3.5, Provenance::default()).unwrap();
        for x in 0..256u64 {
            let v: Vec<bool> = (0..8).map(|i| (x >> i) & 1 == 1).collect();
            assert_eq!(inst.cost_diagonal[x as usize], mis_cost(&g, 3.5, &v).unwrap());
        }
    }

    #[test]
    fn ising_terms_reproduce_negated_cost() {
        let g = gen_regular_graph(6, 3, 9).unwrap();
        let inst = MisInstance::new(g, 100.0, Provenance::default()).unwrap();
        let terms = inst.ising_terms();
        for x in 0..64u64 {
            let e = terms.energy(x);
            assert!((e + inst.cost_diagonal[x as usize]).abs() < 1e-9, "x={x}");
        }
    }

    #[test]
    fn rejects_bad_penalty() {
        assert!(MisInstance::new(Graph::path(3), 0.0, Provenance::default()).is_err());
        assert!(MisInstance::new(Graph::path(3), f64::NAN, Provenance::default()).is_err());
    }
}
