use std::collections::BTreeMap;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::noise::NoiseConfig;
use super::statevector::{apply_mixer_layer, DiagonalCost, Statevector};
use crate::problems::{format_bits, ProblemInstance};
use crate::rng::rng_from_seed;
use crate::schedules::Schedule;
use crate::{Error, Result};

pub const DEFAULT_SHOTS: usize = 10_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    /// Bitstring (qubit 0 first) to number of shots.
    pub counts: BTreeMap<String, u64>,
    pub shots: usize,
    /// Fraction of shots that landed in the optimal set.
    pub p_s: f64,
    /// Probability mass on the optimal set before sampling (an estimate in
    /// trajectory mode).
    pub p_s_exact: f64,
    /// Standard error of `p_s_exact`, when it is a stochastic estimate.
    pub p_s_stderr: Option<f64>,
    pub seed: u64,
    pub schedule_hash: String,
    pub problem_hash: String,
    pub noise: Option<NoiseConfig>,
}

impl RunResult {
    pub fn to_counts_csv(&self) -> String {
        let mut out = String::from("bitstring,count\n");
        for (b, c) in &self.counts {
            out.push_str(&format!("{b},{c}\n"));
        }
        out
    }

    /// Metadata sidecar: everything except the counts.
    pub fn metadata_json(&self) -> Result<String> {
        let meta = serde_json::json!({
            "seed": self.seed,
            "shots": self.shots,
            "schedule_hash": self.schedule_hash,
            "problem_hash": self.problem_hash,
            "p_s_exact": self.p_s_exact,
            "p_s_sampled": self.p_s,
            "p_s_stderr": self.p_s_stderr,
            "noise_mode": self.noise.as_ref().map(|n| n.mode.label()).unwrap_or("none"),
            "noise": self.noise,
        });
        Ok(serde_json::to_string_pretty(&meta)?)
    }
}

/// Outcome of [`QaoaRunner::evaluate`]: the two success metrics without counts.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Evaluation {
    pub p_s_sampled: f64,
    pub p_s_exact: f64,
}

/// Reusable noiseless simulator for one problem instance.
#[derive(Clone, Debug)]
pub struct QaoaRunner {
    n: usize,
    cost: DiagonalCost,
    optimal: Vec<u64>,
    is_optimal: Vec<bool>,
    state: Statevector,
    cdf: Vec<f64>,
    problem_hash: String,
}

impl QaoaRunner {
    pub fn new(problem: &ProblemInstance) -> Result<Self> {
        let state = Statevector::uniform(problem.n())?;
        let optimal = problem.optimal_set();
        let mut is_optimal = vec![false; problem.dim()];
        for &x in &optimal {
            is_optimal[x as usize] = true;
        }
        Ok(Self {
            n: problem.n(),
            cost: DiagonalCost::from_problem(problem),
            optimal,
            is_optimal,
            state,
            cdf: vec![0.0; problem.dim()],
            problem_hash: problem.hash(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn optimal_set(&self) -> &[u64] {
        &self.optimal
    }

    pub fn problem_hash(&self) -> &str {
        &self.problem_hash
    }

    pub(crate) fn cost_mut(&mut self) -> &mut DiagonalCost {
        &mut self.cost
    }

    /// Evolve from `|+⟩^n`: for each layer the cost phase with `γ_i`, then the
    /// mixer with `β_i`. The final state is left in the runner.
    pub fn evolve(&mut self, schedule: &Schedule) -> Result<&Statevector> {
        if schedule.p() == 0 {
            return Err(Error::param("schedule depth must be ≥ 1"));
        }
        self.state.reset_uniform();
        for (&beta, &gamma) in schedule.betas.iter().zip(&schedule.gammas) {
            self.cost.apply(&mut self.state, gamma);
            apply_mixer_layer(&mut self.state, beta);
        }
        Ok(&self.state)
    }

    pub fn state(&self) -> &Statevector {
        &self.state
    }

    pub fn exact_p_s(&mut self, schedule: &Schedule) -> Result<f64> {
        self.evolve(schedule)?;
        Ok(self.state.mass_on(&self.optimal))
    }

    /// Sampled and exact success probability without materialising counts.
    pub fn evaluate(&mut self, schedule: &Schedule, shots: usize, seed: u64) -> Result<Evaluation> {
        if shots == 0 {
            return Err(Error::param("shots must be ≥ 1"));
        }
        self.evolve(schedule)?;
        let probs = self.state.probabilities();
        let p_s_exact = self.state.mass_on(&self.optimal);
        let hits = sample_indices(&probs, &mut self.cdf, shots, seed)
            .filter(|&x| self.is_optimal[x])
            .count();
        Ok(Evaluation { p_s_sampled: hits as f64 / shots as f64, p_s_exact })
    }

    pub fn run(&mut self, schedule: &Schedule, shots: usize, seed: u64) -> Result<RunResult> {
        if shots == 0 {
            return Err(Error::param("shots must be ≥ 1"));
        }
        self.evolve(schedule)?;
        let probs = self.state.probabilities();
        let p_s_exact = self.state.mass_on(&self.optimal);
        let mut result = self.result_from_distribution(&probs, p_s_exact, shots, seed);
        result.schedule_hash = schedule.hash();
        Ok(result)
    }

    pub(crate) fn result_from_distribution(&mut self, probs: &[f64], p_s_exact: f64, shots: usize, seed: u64) -> RunResult {
        let mut tally: BTreeMap<usize, u64> = BTreeMap::new();
        for x in sample_indices(probs, &mut self.cdf, shots, seed) {
            *tally.entry(x).or_default() += 1;
        }
        let hits: u64 = tally.iter().filter(|(x, _)| self.is_optimal[**x]).map(|(_, c)| c).sum();
        let counts = tally.into_iter().map(|(x, c)| (format_bits(x as u64, self.n), c)).collect();
        RunResult {
            counts,
            shots,
            p_s: hits as f64 / shots as f64,
            p_s_exact: p_s_exact.clamp(0.0, 1.0),
            p_s_stderr: None,
            seed,
            schedule_hash: String::new(),
            problem_hash: self.problem_hash.clone(),
            noise: None,
        }
    }
}

/// Inverse-CDF sampling of `shots` basis indices.
fn sample_indices<'a>(probs: &[f64], cdf: &'a mut Vec<f64>, shots: usize, seed: u64) -> impl Iterator<Item = usize> + 'a {
    cdf.resize(probs.len(), 0.0);
    let mut acc = 0.0;
    for (c, p) in cdf.iter_mut().zip(probs) {
        acc += p;
        *c = acc;
    }
    let total = acc;
    let last = probs.len() - 1;
    let mut rng = rng_from_seed(seed);
    let cdf: &'a [f64] = cdf;
    (0..shots).map(move |_| {
        let u = rng.random::<f64>() * total;
        cdf.partition_point(|&c| c <= u).min(last)
    })
}

pub fn run_qaoa(problem: &ProblemInstance, schedule: &Schedule, shots: usize, seed: u64) -> Result<RunResult> {
    QaoaRunner::new(problem)?.run(schedule, shots, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{regular_mis, GroverInstance};
    use crate::schedules::{lr_schedule, random_shape, ScheduleFamily};
    use std::f64::consts::PI;

    fn grover(n: usize, marked: u64) -> ProblemInstance {
        ProblemInstance::Grover(GroverInstance::new(n, marked).unwrap())
    }

    #[test]
    fn zero_mixer_leaves_uniform() {
        let p = ProblemInstance::Mis(regular_mis(8, 3, 2000.0, 3).unwrap());
        let sched = Schedule::new(vec![0.0; 4], vec![0.3, 0.9, 1.4, 2.0], ScheduleFamily::Lr).unwrap();
        let r = run_qaoa(&p, &sched, 1000, 1).unwrap();
        let expect = p.optimal_set().len() as f64 / 256.0;
        assert!((r.p_s_exact - expect).abs() < 1e-12);
        assert_eq!(r.counts.values().sum::<u64>(), 1000);
    }

    #[test]
    fn single_qubit_closed_form() {
        let p = grover(1, 0);
        let sched = Schedule::new(vec![0.75 * PI], vec![0.5 * PI], ScheduleFamily::Lr).unwrap();
        let r = run_qaoa(&p, &sched, 100, 1).unwrap();
        assert!((r.p_s_exact - 1.0).abs() < 1e-12);
        assert_eq!(r.p_s, 1.0);
    }

    #[test]
    fn sampling_concentrates() {
        let p = grover(4, 9);
        let mut runner = QaoaRunner::new(&p).unwrap();
        let sched = random_shape(3, 4, (0.1, 2.0), (0.1, 3.0)).unwrap();
        let shots = 10_000;
        let mut inside = 0;
        for seed in 0..100 {
            let e = runner.evaluate(&sched, shots, seed).unwrap();
            let q = e.p_s_exact;
            if (e.p_s_sampled - q).abs() <= 3.0 * (q * (1.0 - q) / shots as f64).sqrt() {
                inside += 1;
            }
        }
        assert!(inside >= 99, "{inside}/100 within 3σ");
    }

    #[test]
    fn evaluate_agrees_with_run() {
        let p = ProblemInstance::Mis(regular_mis(6, 3, 2000.0, 2).unwrap());
        let sched = lr_schedule(5, 0.6, 0.4).unwrap();
        let mut runner = QaoaRunner::new(&p).unwrap();
        let e = runner.evaluate(&sched, 2000, 11).unwrap();
        let r = runner.run(&sched, 2000, 11).unwrap();
        assert_eq!(e.p_s_sampled, r.p_s);
        assert_eq!(e.p_s_exact, r.p_s_exact);
        assert_eq!(run_qaoa(&p, &sched, 2000, 11).unwrap(), r);
    }

    #[test]
    fn outputs() {
        let r = run_qaoa(&grover(3, 5), &lr_schedule(3, 0.5, 0.5).unwrap(), 50, 3).unwrap();
        let csv = r.to_counts_csv();
        assert!(csv.starts_with("bitstring,count\n"));
        assert_eq!(csv.lines().count(), r.counts.len() + 1);
        let meta: serde_json::Value = serde_json::from_str(&r.metadata_json().unwrap()).unwrap();
        assert_eq!(meta["noise_mode"], "none");
        assert_eq!(meta["seed"], 3);
    }

    #[test]
    fn norm_drift_small_at_depth_100() {
        let p = ProblemInstance::Mis(regular_mis(8, 3, 2000.0, 5).unwrap());
        let sched = random_shape(100, 1, (0.01, 3.0), (0.01, 3.0)).unwrap();
        let mut runner = QaoaRunner::new(&p).unwrap();
        let s = runner.evolve(&sched).unwrap();
        assert!((s.norm_sqr() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn rejects_zero_shots() {
        assert!(run_qaoa(&grover(2, 0), &lr_schedule(1, 0.1, 0.1).unwrap(), 0, 0).is_err());
    }
}
