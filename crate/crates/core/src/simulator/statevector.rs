use num_complex::Complex64;

use crate::problems::ProblemInstance;
use crate::{Error, Result};

/// Largest register a statevector is allocated for (2^24 amplitudes).
pub const MAX_STATEVECTOR_QUBITS: usize = 24;

#[derive(Clone, Debug, PartialEq)]
pub struct Statevector {
    n: usize,
    amps: Vec<Complex64>,
}

impl Statevector {
    fn check(n: usize) -> Result<()> {
        if n == 0 {
            return Err(Error::param("statevector needs at least one qubit"));
        }
        if n > MAX_STATEVECTOR_QUBITS {
            return Err(Error::Capacity { what: "statevector qubits", size: n, limit: MAX_STATEVECTOR_QUBITS });
        }
        Ok(())
    }

    /// `|+⟩^n`.
    pub fn uniform(n: usize) -> Result<Self> {
        Self::check(n)?;
        let dim = 1usize << n;
        let a = Complex64::new(1.0 / (dim as f64).sqrt(), 0.0);
        Ok(Self { n, amps: vec![a; dim] })
    }

    pub fn basis(n: usize, index: usize) -> Result<Self> {
        Self::check(n)?;
        let dim = 1usize << n;
        if index >= dim {
            return Err(Error::param(format!("basis index {index} outside 2^{n}")));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        amps[index] = Complex64::new(1.0, 0.0);
        Ok(Self { n, amps })
    }

    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        if !amps.len().is_power_of_two() {
            return Err(Error::param("amplitude count must be a power of two"));
        }
        let n = amps.len().trailing_zeros() as usize;
        Self::check(n)?;
        Ok(Self { n, amps })
    }

    pub fn reset_uniform(&mut self) {
        let a = Complex64::new(1.0 / (self.amps.len() as f64).sqrt(), 0.0);
        self.amps.fill(a);
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Probability mass on the listed basis states.
    pub fn mass_on(&self, states: &[u64]) -> f64 {
        states.iter().map(|&x| self.amps[x as usize].norm_sqr()).sum()
    }

    /// `exp(−iβX)` on one qubit: `cos β` on the diagonal, `−i sin β` off it.
    pub fn rx(&mut self, q: usize, beta: f64) {
        let (s, c) = beta.sin_cos();
        let stride = 1usize << q;
        for block in self.amps.chunks_exact_mut(2 * stride) {
            let (lo, hi) = block.split_at_mut(stride);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x, y) = (*a, *b);
                // −i·s·z = (s·z.im, −s·z.re)
                *a = Complex64::new(c * x.re + s * y.im, c * x.im - s * y.re);
                *b = Complex64::new(c * y.re + s * x.im, c * y.im - s * x.re);
            }
        }
    }

    pub fn pauli_x(&mut self, q: usize) {
        let stride = 1usize << q;
        for block in self.amps.chunks_exact_mut(2 * stride) {
            let (lo, hi) = block.split_at_mut(stride);
            lo.swap_with_slice(hi);
        }
    }

    pub fn pauli_z(&mut self, q: usize) {
        let stride = 1usize << q;
        for block in self.amps.chunks_exact_mut(2 * stride) {
            block[stride..].iter_mut().for_each(|a| *a = -*a);
        }
    }

    /// `Y = [[0, −i], [i, 0]]`.
    pub fn pauli_y(&mut self, q: usize) {
        let stride = 1usize << q;
        let i = Complex64::new(0.0, 1.0);
        for block in self.amps.chunks_exact_mut(2 * stride) {
            let (lo, hi) = block.split_at_mut(stride);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x, y) = (*a, *b);
                *a = -i * y;
                *b = i * x;
            }
        }
    }

    /// `exp(−iθ Z_q)`.
    pub fn rz(&mut self, q: usize, theta: f64) {
        let down = Complex64::from_polar(1.0, -theta);
        let up = down.conj();
        for (x, a) in self.amps.iter_mut().enumerate() {
            *a *= if (x >> q) & 1 == 0 { down } else { up };
        }
    }

    /// `exp(−iθ Z_u Z_v)`.
    pub fn rzz(&mut self, u: usize, v: usize, theta: f64) {
        let same = Complex64::from_polar(1.0, -theta);
        let diff = same.conj();
        for (x, a) in self.amps.iter_mut().enumerate() {
            *a *= if ((x >> u) ^ (x >> v)) & 1 == 0 { same } else { diff };
        }
    }
}

/// Cost diagonal stored as distinct energy levels plus a level index per
/// basis state, so a cost layer needs one `exp` per level.
#[derive(Clone, Debug)]
pub struct DiagonalCost {
    levels: Vec<f64>,
    index: Vec<u32>,
    scratch: Vec<Complex64>,
}

impl DiagonalCost {
    pub fn new(diagonal: &[f64]) -> Self {
        let mut levels: Vec<f64> = diagonal.to_vec();
        levels.sort_by(f64::total_cmp);
        levels.dedup();
        let index = diagonal
            .iter()
            .map(|e| levels.binary_search_by(|l| l.total_cmp(e)).expect("level present") as u32)
            .collect();
        let scratch = vec![Complex64::new(1.0, 0.0); levels.len()];
        Self { levels, index, scratch }
    }

    pub fn from_problem(problem: &ProblemInstance) -> Self {
        Self::new(&problem.hamiltonian_diagonal())
    }

    pub fn len(&self) -> usize {
        self.index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index.is_empty()
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn energy(&self, x: usize) -> f64 {
        self.levels[self.index[x] as usize]
    }

    /// Multiply amplitude `x` by `exp(−iγ H_C[x])`.
    pub fn apply(&mut self, state: &mut Statevector, gamma: f64) {
        for (ph, e) in self.scratch.iter_mut().zip(&self.levels) {
            *ph = Complex64::from_polar(1.0, -gamma * e);
        }
        for (a, &k) in state.amps.iter_mut().zip(&self.index) {
            *a *= self.scratch[k as usize];
        }
    }
}

/// One-off cost layer; builds the level table on every call.
pub fn apply_cost_layer(state: &mut Statevector, problem: &ProblemInstance, gamma: f64) -> Result<()> {
    if state.amps.len() != problem.dim() {
        return Err(Error::param(format!("state has {} qubits, problem has {}", state.n, problem.n())));
    }
    DiagonalCost::from_problem(problem).apply(state, gamma);
    Ok(())
}

/// `exp(−iβX)` on every qubit.
pub fn apply_mixer_layer(state: &mut Statevector, beta: f64) {
    for q in 0..state.n {
        state.rx(q, beta);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{regular_mis, GroverInstance};
    use proptest::prelude::*;

    fn random_state(n: usize, seed: u64) -> Statevector {
        use rand::Rng as _;
        let mut rng = crate::rng::rng_from_seed(seed);
        let mut v: Vec<Complex64> = (0..1 << n).map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)).collect();
        let norm = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        v.iter_mut().for_each(|a| *a /= norm);
        Statevector::from_amplitudes(v).unwrap()
    }

    #[test]
    fn zero_angles_are_identity() {
        let p = ProblemInstance::Mis(regular_mis(6, 3, 2000.0, 1).unwrap());
        let orig = random_state(6, 2);
        let mut s = orig.clone();
        apply_cost_layer(&mut s, &p, 0.0).unwrap();
        apply_mixer_layer(&mut s, 0.0);
        assert_eq!(s, orig);
    }

    #[test]
    fn grover_phase_on_unmarked() {
        let p = ProblemInstance::Grover(GroverInstance::new(1, 0).unwrap());
        let mut s = Statevector::uniform(1).unwrap();
        apply_cost_layer(&mut s, &p, 0.7).unwrap();
        let a = s.amplitudes();
        assert!((a[0] - Complex64::new(0.5f64.sqrt(), 0.0)).norm() < 1e-15);
        assert!((a[1] - Complex64::from_polar(0.5f64.sqrt(), -0.7)).norm() < 1e-15);
    }

    #[test]
    fn cost_keeps_moduli() {
        let p = ProblemInstance::Mis(regular_mis(8, 3, 100.0, 4).unwrap());
        let orig = random_state(8, 9);
        let mut s = orig.clone();
        apply_cost_layer(&mut s, &p, 1.234).unwrap();
        for (a, b) in s.amplitudes().iter().zip(orig.amplitudes()) {
            assert!((a.norm() - b.norm()).abs() < 1e-15);
        }
    }

    #[test]
    fn half_pi_mixer_flips_everything() {
        for n in 1..6 {
            let mut s = Statevector::basis(n, 0).unwrap();
            apply_mixer_layer(&mut s, std::f64::consts::FRAC_PI_2);
            let expect = Complex64::new(0.0, -1.0).powi(n as i32);
            assert!((s.amplitudes()[(1 << n) - 1] - expect).norm() < 1e-12);
        }
    }

    #[test]
    fn norm_preserved_over_many_pairs() {
        use rand::Rng as _;
        let mut rng = crate::rng::rng_from_seed(77);
        for k in 0..10_000u64 {
            let n = 1 + (k % 5) as usize;
            let mut s = random_state(n, k);
            apply_mixer_layer(&mut s, rng.random_range(-10.0..10.0));
            assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn pauli_algebra() {
        let orig = random_state(3, 5);
        let mut a = orig.clone();
        // Y = i X Z
        a.pauli_y(1);
        let mut b = orig.clone();
        b.pauli_z(1);
        b.pauli_x(1);
        for (x, y) in a.amplitudes().iter().zip(b.amplitudes()) {
            assert!((x - Complex64::new(0.0, 1.0) * y).norm() < 1e-15);
        }
    }

    #[test]
    fn ising_gates_match_cost_diagonal_up_to_phase() {
        let inst = regular_mis(6, 3, 3.0, 8).unwrap();
        let terms = inst.ising_terms();
        let problem = ProblemInstance::Mis(inst);
        let gamma = 0.37;
        let mut a = random_state(6, 1);
        let mut b = a.clone();
        apply_cost_layer(&mut a, &problem, gamma).unwrap();
        for &(u, v, j) in &terms.couplings {
            b.rzz(u, v, gamma * j);
        }
        for (q, h) in terms.fields.iter().enumerate() {
            b.rz(q, gamma * h);
        }
        let global = Complex64::from_polar(1.0, -gamma * terms.constant);
        for (x, y) in a.amplitudes().iter().zip(b.amplitudes()) {
            assert!((x - global * y).norm() < 1e-12);
        }
    }

    proptest! {
        #[test]
        fn mixer_by_half_pi_multiples_is_x_power(n in 1usize..5, k in 0i32..4, seed in 0u64..1000) {
            let orig = random_state(n, seed);
            let mut s = orig.clone();
            apply_mixer_layer(&mut s, k as f64 * std::f64::consts::FRAC_PI_2);
            let mut reference = orig.clone();
            if k % 2 == 1 {
                for q in 0..n {
                    reference.pauli_x(q);
                }
            }
            let overlap: Complex64 = s.amplitudes().iter().zip(reference.amplitudes()).map(|(a, b)| b.conj() * a).sum();
            prop_assert!((overlap.norm() - 1.0).abs() < 1e-10);
        }

        #[test]
        fn cost_never_changes_distribution(seed in 0u64..500, gamma in -20.0f64..20.0) {
            let p = ProblemInstance::Mis(regular_mis(6, 3, 2000.0, seed).unwrap());
            let orig = random_state(6, seed);
            let mut s = orig.clone();
            apply_cost_layer(&mut s, &p, gamma).unwrap();
            for (a, b) in s.probabilities().iter().zip(orig.probabilities()) {
                prop_assert!((a - b).abs() < 1e-14);
            }
        }
    }
}
