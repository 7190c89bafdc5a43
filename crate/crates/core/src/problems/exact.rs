//! Exact classical oracle by enumeration.

use super::Graph;
use crate::{Error, Result};

pub const MAX_ENUMERATION_QUBITS: usize = 30;

/// All maximisers of `C(x)` and the optimal value.
///
/// For `λ > 1` every maximiser is an independent set (dropping one endpoint of
/// a violated edge gains at least `λ − 1`), so the search branches only over
/// independent sets. Otherwise all `2^n` bitstrings are scanned.
pub fn solve_mis(graph: &Graph, lambda: f64) -> Result<(f64, Vec<u64>)> {
    let n = graph.n();
    if n > MAX_ENUMERATION_QUBITS {
        return Err(Error::Capacity {
            what: "exact enumeration qubits",
            size: n,
            limit: MAX_ENUMERATION_QUBITS,
        });
    }
    if lambda > 1.0 {
        let masks = graph.neighbor_masks();
        let mut search = IndependentSetSearch {
            n,
            masks: &masks,
            best: 0,
            found: Vec::new(),
        };
        search.branch(0, 0, 0);
        let mut set = search.found;
        set.sort_unstable();
        Ok((search.best as f64, set))
    } else {
        let mut best = f64::NEG_INFINITY;
        let mut set = Vec::new();
        for x in 0..(1u64 << n) {
            let c = super::mis::mis_cost_index(graph, lambda, x);
            if c > best {
                best = c;
                set.clear();
            }
            if c == best {
                set.push(x);
            }
        }
        Ok((best, set))
    }
}

struct IndependentSetSearch<'a> {
    n: usize,
    masks: &'a [u64],
    best: u32,
    found: Vec<u64>,
}

impl IndependentSetSearch<'_> {
    /// `blocked` marks nodes adjacent to the current set.
    fn branch(&mut self, node: usize, set: u64, blocked: u64) {
        let size = set.count_ones();
        if node == self.n {
            if size > self.best {
                self.best = size;
                self.found.clear();
            }
            if size == self.best {
                self.found.push(set);
            }
            return;
        }
        let full = if self.n == 64 { u64::MAX } else { (1u64 << self.n) - 1 };
        let remaining_free = ((!blocked & full) >> node).count_ones();
        if size + remaining_free < self.best {
            return;
        }
        if blocked & (1 << node) == 0 {
            self.branch(node + 1, set | (1 << node), blocked | self.masks[node]);
        }
        self.branch(node + 1, set, blocked);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{gen_er_graph, mis::mis_cost_index};
    use proptest::prelude::*;

    fn naive(graph: &Graph, lambda: f64) -> (f64, Vec<u64>) {
        let costs: Vec<f64> = (0..1u64 << graph.n())
            .map(|x| mis_cost_index(graph, lambda, x))
            .collect();
        let best = costs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let set = (0..costs.len() as u64).filter(|&x| costs[x as usize] == best).collect();
        (best, set)
    }

    #[test]
    fn triangle_and_cycle() {
        let (v, set) = solve_mis(&Graph::complete(3), 2.0).unwrap();
        assert_eq!(v, 1.0);
        assert_eq!(set, vec![0b001, 0b010, 0b100]);

        let (v, set) = solve_mis(&Graph::cycle(5).unwrap(), 2000.0).unwrap();
        assert_eq!(v, 2.0);
        assert_eq!(set, naive(&Graph::cycle(5).unwrap(), 2000.0).1);
        assert_eq!(set.len(), 5);
    }

    #[test]
    fn empty_graph_takes_everything() {
        let (v, set) = solve_mis(&Graph::empty(4), 10.0).unwrap();
        assert_eq!(v, 4.0);
        assert_eq!(set, vec![0b1111]);
    }

    #[test]
    fn small_penalty_uses_full_scan() {
        let tri = Graph::complete(3);
        assert_eq!(solve_mis(&tri, 0.5).unwrap(), naive(&tri, 0.5));
        assert_eq!(solve_mis(&tri, 1.0).unwrap(), naive(&tri, 1.0));
    }

    #[test]
    fn over_budget() {
        assert!(matches!(
            solve_mis(&Graph::empty(31), 2.0),
            Err(Error::Capacity { .. })
        ));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn agrees_with_naive_scan(n in 1usize..=12, p in 0.0f64..1.0, seed in any::<u64>(), lambda in 0.3f64..50.0) {
            let g = gen_er_graph(n, p, seed).unwrap();
            prop_assert_eq!(solve_mis(&g, lambda).unwrap(), naive(&g, lambda));
        }

        #[test]
        fn independent_sets_score_their_size(n in 2usize..=10, seed in any::<u64>(), lambda in 1.0f64..100.0) {
            let g = gen_er_graph(n, 0.4, seed).unwrap();
            let masks = g.neighbor_masks();
            for x in 0..1u64 << n {
                let independent = (0..n).all(|u| (x >> u) & 1 == 0 || x & masks[u] == 0);
                let c = mis_cost_index(&g, lambda, x);
                if independent {
                    prop_assert_eq!(c, x.count_ones() as f64);
                } else if lambda > n as f64 {
                    prop_assert!(c < 0.0);
                }
            }
        }
    }
}
