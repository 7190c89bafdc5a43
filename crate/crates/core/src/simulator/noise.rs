//! Depolarising noise under a gate decomposition of the QAOA layers.
//!
//! Per layer: one `exp(−iγJ Z_u Z_v)` per edge, one `exp(−iγh_i Z_i)` per
//! node, then one `exp(−iβX_i)` per qubit. Each gate is followed by a
//! single-qubit depolarising channel of strength `p` on every qubit it
//! touches, `ρ → (1 − p)ρ + p·(I/2 ⊗ Tr_q ρ)`, which is the Pauli channel
//! injecting `X`, `Y` or `Z` each with probability `p/4`.
//!
//! Trajectory mode is stratified on the number of faults. The fault-free
//! branch has weight `P0 = (1 − 3p/4)^S` over `S` fault locations and is
//! evaluated exactly; the sampled trajectories are all conditioned on at
//! least one fault.

use num_complex::Complex64;
use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::runner::{QaoaRunner, RunResult};
use super::statevector::{apply_mixer_layer, Statevector};
use crate::problems::ProblemInstance;
use crate::rng::{derive_seed, rng_from_seed};
use crate::schedules::Schedule;
use crate::{Error, Result};

pub const DEFAULT_TRAJECTORIES: usize = 1000;
/// Density matrices hold `4^n` complex entries.
pub const MAX_DENSITY_QUBITS: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseMode {
    DensityMatrix,
    Trajectories,
}

impl NoiseMode {
    pub fn label(self) -> &'static str {
        match self {
            NoiseMode::DensityMatrix => "density-matrix",
            NoiseMode::Trajectories => "trajectories",
        }
    }
}

impl std::str::FromStr for NoiseMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "density-matrix" => Ok(NoiseMode::DensityMatrix),
            "trajectories" => Ok(NoiseMode::Trajectories),
            other => Err(Error::Parse(format!("unknown noise mode `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseConfig {
    pub p_noise: f64,
    pub mode: NoiseMode,
    #[serde(default = "default_n_traj")]
    pub n_traj: usize,
}

fn default_n_traj() -> usize {
    DEFAULT_TRAJECTORIES
}

impl NoiseConfig {
    pub fn new(p_noise: f64, mode: NoiseMode) -> Result<Self> {
        let cfg = Self { p_noise, mode, n_traj: DEFAULT_TRAJECTORIES };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.p_noise) {
            return Err(Error::param(format!("noise strength {} outside [0, 1]", self.p_noise)));
        }
        if self.n_traj == 0 {
            return Err(Error::param("trajectory count must be ≥ 1"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Pauli {
    X,
    Y,
    Z,
}

/// Gate layout of one layer, indexed by fault location.
#[derive(Clone, Debug)]
struct Layout {
    n: usize,
    couplings: Vec<(usize, usize, f64)>,
    fields: Vec<f64>,
}

impl Layout {
    fn for_problem(problem: &ProblemInstance) -> Result<Self> {
        match problem {
            ProblemInstance::Mis(m) => {
                let t = m.ising_terms();
                Ok(Self { n: t.n, couplings: t.couplings, fields: t.fields })
            }
            ProblemInstance::Grover(_) => Err(Error::Unsupported(
                "Grover's cost oracle has no local gate decomposition for the noise model".into(),
            )),
        }
    }

    /// Edge `e` owns locations `2e` and `2e + 1`, node fields follow, then
    /// one location per mixer rotation.
    fn locations_per_layer(&self) -> usize {
        2 * self.couplings.len() + 2 * self.n
    }

    fn mixer_offset(&self) -> usize {
        2 * self.couplings.len() + self.n
    }

    /// Qubit hit by a fault at in-layer location `loc`.
    fn qubit_at(&self, loc: usize) -> usize {
        let m2 = 2 * self.couplings.len();
        if loc < m2 {
            let (u, v, _) = self.couplings[loc / 2];
            if loc % 2 == 0 { u } else { v }
        } else if loc < m2 + self.n {
            loc - m2
        } else {
            loc - m2 - self.n
        }
    }
}

fn apply_pauli(state: &mut Statevector, q: usize, p: Pauli) {
    match p {
        Pauli::X => state.pauli_x(q),
        Pauli::Y => state.pauli_y(q),
        Pauli::Z => state.pauli_z(q),
    }
}

/// Stratified Pauli-trajectory estimator for one instance.
#[derive(Clone, Debug)]
pub struct TrajectoryEstimator {
    layout: Layout,
    runner: QaoaRunner,
    p_noise: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryEstimate {
    pub p_s: f64,
    pub stderr: f64,
    /// Weight of the fault-free branch.
    pub p_clean: f64,
    /// Averaged output distribution, when requested.
    pub distribution: Option<Vec<f64>>,
}

impl TrajectoryEstimator {
    pub fn new(problem: &ProblemInstance, p_noise: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p_noise) {
            return Err(Error::param(format!("noise strength {p_noise} outside [0, 1]")));
        }
        Ok(Self { layout: Layout::for_problem(problem)?, runner: QaoaRunner::new(problem)?, p_noise })
    }

    pub fn optimal_set(&self) -> &[u64] {
        self.runner.optimal_set()
    }

    pub fn estimate(&mut self, schedule: &Schedule, n_traj: usize, seed: u64, keep_distribution: bool) -> Result<TrajectoryEstimate> {
        if n_traj == 0 {
            return Err(Error::param("trajectory count must be ≥ 1"));
        }
        let clean = self.runner.evolve(schedule)?.clone();
        let clean_mass = clean.mass_on(self.runner.optimal_set());
        let q = 0.75 * self.p_noise;
        let total_locs = schedule.p() * self.layout.locations_per_layer();
        let p_clean = if q == 0.0 || total_locs == 0 { 1.0 } else { (1.0 - q).powf(total_locs as f64) };
        let mut distribution = keep_distribution.then(|| clean.probabilities().iter().map(|p| p * p_clean).collect::<Vec<f64>>());
        if p_clean >= 1.0 {
            return Ok(TrajectoryEstimate { p_s: clean_mass, stderr: 0.0, p_clean, distribution });
        }

        let layout = &self.layout;
        let base = &self.runner;
        let results: Vec<(f64, Option<Vec<f64>>)> = (0..n_traj)
            .into_par_iter()
            .map_init(
                || (base.clone(), Statevector::uniform(layout.n).expect("size checked")),
                |(runner, state), k| {
                    let mut rng = rng_from_seed(derive_seed(seed, &[&"trajectory", &k]));
                    let faults = sample_faults(&mut rng, total_locs, q, p_clean);
                    simulate_faulty(runner, state, layout, schedule, &faults);
                    let mass = state.mass_on(runner.optimal_set());
                    (mass, keep_distribution.then(|| state.probabilities()))
                },
            )
            .collect();

        let masses: Vec<f64> = results.iter().map(|r| r.0).collect();
        let faulty_mean = crate::stats::mean(&masses);
        let sd = crate::stats::std_dev(&masses);
        let w = (1.0 - p_clean) / n_traj as f64;
        if let Some(dist) = distribution.as_mut() {
            for (_, probs) in &results {
                for (d, p) in dist.iter_mut().zip(probs.as_ref().unwrap()) {
                    *d += w * p;
                }
            }
        }
        Ok(TrajectoryEstimate {
            p_s: (p_clean * clean_mass + (1.0 - p_clean) * faulty_mean).clamp(0.0, 1.0),
            stderr: (1.0 - p_clean) * sd / (n_traj as f64).sqrt(),
            p_clean,
            distribution,
        })
    }
}

/// Fault positions (sorted) given at least one fault among `total` locations,
/// each failing independently with probability `q`.
fn sample_faults(rng: &mut crate::rng::Rng, total: usize, q: f64, p_clean: f64) -> Vec<(usize, Pauli)> {
    let log_keep = (1.0 - q).ln();
    let pauli = |rng: &mut crate::rng::Rng| match rng.random_range(0..3) {
        0 => Pauli::X,
        1 => Pauli::Y,
        _ => Pauli::Z,
    };
    let mut faults = Vec::new();
    // First fault: geometric truncated to [0, total).
    let u: f64 = rng.random();
    let first = if log_keep == f64::NEG_INFINITY {
        0
    } else {
        ((1.0 - u * (1.0 - p_clean)).ln() / log_keep).floor() as usize
    };
    let mut pos = first.min(total - 1);
    loop {
        faults.push((pos, pauli(rng)));
        let skip = if log_keep == f64::NEG_INFINITY {
            0.0
        } else {
            (1.0 - rng.random::<f64>()).ln() / log_keep
        };
        let next = pos as f64 + 1.0 + skip.floor();
        if next >= total as f64 {
            break;
        }
        pos = next as usize;
    }
    faults
}

fn simulate_faulty(
    runner: &mut QaoaRunner,
    state: &mut Statevector,
    layout: &Layout,
    schedule: &Schedule,
    faults: &[(usize, Pauli)],
) {
    let per_layer = layout.locations_per_layer();
    let mixer_at = layout.mixer_offset();
    state.reset_uniform();
    let mut next = 0;
    for (layer, (&beta, &gamma)) in schedule.betas.iter().zip(&schedule.gammas).enumerate() {
        let start = layer * per_layer;
        let end = start + per_layer;
        let here_end = next + faults[next..].iter().take_while(|f| f.0 < end).count();
        let here = &faults[next..here_end];
        next = here_end;
        let cost_faults: Vec<(usize, Pauli)> =
            here.iter().filter(|f| f.0 - start < mixer_at).map(|&(l, p)| (l - start, p)).collect();

        if cost_faults.is_empty() {
            runner.cost_mut().apply(state, gamma);
        } else {
            let mut k = 0;
            let flush = |state: &mut Statevector, upto: usize, k: &mut usize| {
                while *k < cost_faults.len() && cost_faults[*k].0 <= upto {
                    let (loc, p) = cost_faults[*k];
                    apply_pauli(state, layout.qubit_at(loc), p);
                    *k += 1;
                }
            };
            for (e, &(u, v, j)) in layout.couplings.iter().enumerate() {
                state.rzz(u, v, gamma * j);
                flush(state, 2 * e + 1, &mut k);
            }
            let m2 = 2 * layout.couplings.len();
            for (qb, &h) in layout.fields.iter().enumerate() {
                state.rz(qb, gamma * h);
                flush(state, m2 + qb, &mut k);
            }
        }

        // Rotations on distinct qubits commute with a Pauli on another
        // qubit, and the fault on qubit q sits after q's own rotation.
        apply_mixer_layer(state, beta);
        for &(loc, p) in here.iter().filter(|f| f.0 - start >= mixer_at) {
            apply_pauli(state, layout.qubit_at(loc - start), p);
        }
    }
}

/// Row-major `2^n × 2^n` density matrix.
#[derive(Clone, Debug)]
pub struct DensityMatrix {
    n: usize,
    dim: usize,
    data: Vec<Complex64>,
}

impl DensityMatrix {
    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 || n > MAX_DENSITY_QUBITS {
            return Err(Error::Capacity { what: "density-matrix qubits", size: n, limit: MAX_DENSITY_QUBITS });
        }
        let dim = 1usize << n;
        Ok(Self { n, dim, data: vec![Complex64::new(1.0 / dim as f64, 0.0); dim * dim] })
    }

    pub fn from_statevector(state: &Statevector) -> Result<Self> {
        let mut rho = Self::uniform(state.n())?;
        let a = state.amplitudes();
        for r in 0..rho.dim {
            for c in 0..rho.dim {
                rho.data[r * rho.dim + c] = a[r] * a[c].conj();
            }
        }
        Ok(rho)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn entry(&self, r: usize, c: usize) -> Complex64 {
        self.data[r * self.dim + c]
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.entry(i, i)).sum()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.entry(i, i).re.max(0.0)).collect()
    }

    /// `ρ → DρD†` for a diagonal unitary `D`.
    pub fn apply_diagonal(&mut self, d: &[Complex64]) {
        for (r, row) in self.data.chunks_exact_mut(self.dim).enumerate() {
            for (x, dc) in row.iter_mut().zip(d) {
                *x *= d[r] * dc.conj();
            }
        }
    }

    /// `ρ → UρU†` for a single-qubit `U = [[u00, u01], [u10, u11]]`.
    pub fn apply_1q(&mut self, q: usize, u: [[Complex64; 2]; 2]) {
        let bit = 1usize << q;
        let dim = self.dim;
        for r0 in (0..dim).filter(|r| r & bit == 0) {
            let r1 = r0 | bit;
            for c in 0..dim {
                let a = self.data[r0 * dim + c];
                let b = self.data[r1 * dim + c];
                self.data[r0 * dim + c] = u[0][0] * a + u[0][1] * b;
                self.data[r1 * dim + c] = u[1][0] * a + u[1][1] * b;
            }
        }
        for row in self.data.chunks_exact_mut(dim) {
            for c0 in (0..dim).filter(|c| c & bit == 0) {
                let c1 = c0 | bit;
                let (a, b) = (row[c0], row[c1]);
                row[c0] = a * u[0][0].conj() + b * u[0][1].conj();
                row[c1] = a * u[1][0].conj() + b * u[1][1].conj();
            }
        }
    }

    pub fn rx(&mut self, q: usize, beta: f64) {
        let (s, c) = beta.sin_cos();
        let d = Complex64::new(c, 0.0);
        let o = Complex64::new(0.0, -s);
        self.apply_1q(q, [[d, o], [o, d]]);
    }

    /// `ρ → (1 − p)ρ + p·(I/2 ⊗ Tr_q ρ)`.
    pub fn depolarize(&mut self, q: usize, p: f64) {
        if p == 0.0 {
            return;
        }
        let bit = 1usize << q;
        let dim = self.dim;
        for r in 0..dim {
            for c in 0..dim {
                let idx = r * dim + c;
                if (r ^ c) & bit != 0 {
                    self.data[idx] *= 1.0 - p;
                } else if r & bit == 0 {
                    let partner = (r | bit) * dim + (c | bit);
                    let (a, b) = (self.data[idx], self.data[partner]);
                    let avg = (a + b) * 0.5;
                    self.data[idx] = a * (1.0 - p) + avg * p;
                    self.data[partner] = b * (1.0 - p) + avg * p;
                }
            }
        }
    }
}

fn zz_diagonal(dim: usize, u: usize, v: usize, theta: f64) -> Vec<Complex64> {
    let same = Complex64::from_polar(1.0, -theta);
    (0..dim).map(|x| if ((x >> u) ^ (x >> v)) & 1 == 0 { same } else { same.conj() }).collect()
}

fn z_diagonal(dim: usize, q: usize, theta: f64) -> Vec<Complex64> {
    let down = Complex64::from_polar(1.0, -theta);
    (0..dim).map(|x| if (x >> q) & 1 == 0 { down } else { down.conj() }).collect()
}

fn evolve_density(layout: &Layout, schedule: &Schedule, p: f64) -> Result<DensityMatrix> {
    let mut rho = DensityMatrix::uniform(layout.n)?;
    let dim = 1usize << layout.n;
    for (&beta, &gamma) in schedule.betas.iter().zip(&schedule.gammas) {
        for &(u, v, j) in &layout.couplings {
            rho.apply_diagonal(&zz_diagonal(dim, u, v, gamma * j));
            rho.depolarize(u, p);
            rho.depolarize(v, p);
        }
        for (q, &h) in layout.fields.iter().enumerate() {
            rho.apply_diagonal(&z_diagonal(dim, q, gamma * h));
            rho.depolarize(q, p);
        }
        for q in 0..layout.n {
            rho.rx(q, beta);
            rho.depolarize(q, p);
        }
    }
    Ok(rho)
}

pub fn run_qaoa_noisy(
    problem: &ProblemInstance,
    schedule: &Schedule,
    noise: &NoiseConfig,
    shots: usize,
    seed: u64,
) -> Result<RunResult> {
    noise.validate()?;
    if shots == 0 {
        return Err(Error::param("shots must be ≥ 1"));
    }
    let layout = Layout::for_problem(problem)?;
    let (dist, p_s_exact, stderr) = match noise.mode {
        NoiseMode::DensityMatrix => {
            if problem.n() > MAX_DENSITY_QUBITS {
                return Err(Error::Capacity { what: "density-matrix qubits", size: problem.n(), limit: MAX_DENSITY_QUBITS });
            }
            if schedule.p() == 0 {
                return Err(Error::param("schedule depth must be ≥ 1"));
            }
            let rho = evolve_density(&layout, schedule, noise.p_noise)?;
            let probs = rho.probabilities();
            let mass = problem.optimal_set().iter().map(|&x| probs[x as usize]).sum();
            (probs, mass, None)
        }
        NoiseMode::Trajectories => {
            let mut est = TrajectoryEstimator::new(problem, noise.p_noise)?;
            let e = est.estimate(schedule, noise.n_traj, seed, true)?;
            (e.distribution.unwrap(), e.p_s, Some(e.stderr))
        }
    };
    let mut runner = QaoaRunner::new(problem)?;
    let mut result = runner.result_from_distribution(&dist, p_s_exact, shots, seed);
    result.p_s_stderr = stderr;
    result.schedule_hash = schedule.hash();
    result.noise = Some(noise.clone());
    Ok(result)
}
