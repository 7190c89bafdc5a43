use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Unstructured search over `2^n` items with one marked basis state.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroverInstance {
    pub n: usize,
    pub marked: u64,
}

impl GroverInstance {
    pub fn new(n: usize, marked: u64) -> Result<Self> {
        if n == 0 || n > 62 {
            return Err(Error::param(format!("qubit count {n} outside 1..=62")));
        }
        if marked >= 1u64 << n {
            return Err(Error::param(format!("marked state {marked} needs more than {n} bits")));
        }
        Ok(Self { n, marked })
    }

    pub fn random(n: usize, seed: u64) -> Result<Self> {
        use rand::Rng as _;
        if n == 0 || n > 62 {
            return Err(Error::param(format!("qubit count {n} outside 1..=62")));
        }
        let marked = crate::rng::rng_from_seed(seed).random_range(0..1u64 << n);
        Self::new(n, marked)
    }

    pub fn search_space(&self) -> u64 {
        1u64 << self.n
    }

    /// `H_C = I − |marked⟩⟨marked|` on the computational basis.
    pub fn energy(&self, x: u64) -> f64 {
        if x == self.marked {
            0.0
        } else {
            1.0
        }
    }
}
