//! Log-spaced endpoint grid search and the depth-to-threshold scan.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::problems::ProblemInstance;
use crate::rng::derive_seed;
use crate::schedules::{lr_schedule, shape_to_schedule, Endpoints, Schedule, ScheduleFamily, ScheduleShape};
use crate::simulator::{NoiseConfig, QaoaRunner, TrajectoryEstimator, DEFAULT_SHOTS};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    /// `log10 β_start` range.
    pub log_beta_range: (f64, f64),
    /// `log10 γ_end` range.
    pub log_gamma_range: (f64, f64),
    pub points_per_axis: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { log_beta_range: (-1.5, 0.5), log_gamma_range: (-1.0, 1.0), points_per_axis: 11 }
    }
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        if self.points_per_axis == 0 {
            return Err(Error::param("grid needs at least one point per axis"));
        }
        for (lo, hi) in [self.log_beta_range, self.log_gamma_range] {
            if !(lo.is_finite() && hi.is_finite()) {
                return Err(Error::param("grid ranges must be finite"));
            }
            if self.points_per_axis > 1 && !(lo < hi) {
                return Err(Error::param(format!("grid range [{lo}, {hi}] must have lo < hi")));
            }
        }
        Ok(())
    }

    fn axis((lo, hi): (f64, f64), k: usize) -> Vec<f64> {
        if k == 1 {
            return vec![10f64.powf(lo)];
        }
        (0..k).map(|i| 10f64.powf(lo + (hi - lo) * i as f64 / (k - 1) as f64)).collect()
    }

    pub fn beta_axis(&self) -> Vec<f64> {
        Self::axis(self.log_beta_range, self.points_per_axis)
    }

    pub fn gamma_axis(&self) -> Vec<f64> {
        Self::axis(self.log_gamma_range, self.points_per_axis)
    }

    /// Radian ranges spanned by the grid, for the random baseline.
    pub fn angle_ranges(&self) -> ((f64, f64), (f64, f64)) {
        let r = |(lo, hi): (f64, f64)| (10f64.powf(lo), 10f64.powf(hi));
        (r(self.log_beta_range), r(self.log_gamma_range))
    }
}

/// `(β_start, γ_end)` pairs, β-major.
pub fn log_grid(spec: &GridSpec) -> Result<Vec<(f64, f64)>> {
    spec.validate()?;
    let gammas = spec.gamma_axis();
    Ok(spec.beta_axis().into_iter().flat_map(|b| gammas.iter().map(move |&g| (b, g))).collect())
}

/// How a pair of endpoints becomes a schedule.
#[derive(Clone, Debug, PartialEq)]
pub enum Ramp {
    Linear,
    Shape(ScheduleShape),
}

impl Ramp {
    pub fn family(&self) -> ScheduleFamily {
        match self {
            Ramp::Linear => ScheduleFamily::Lr,
            Ramp::Shape(s) => s.family,
        }
    }

    pub fn schedule(&self, p: usize, beta_start: f64, gamma_end: f64) -> Result<Schedule> {
        match self {
            Ramp::Linear => lr_schedule(p, beta_start, gamma_end),
            Ramp::Shape(shape) => shape_to_schedule(shape, p, beta_start, gamma_end),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Objective {
    /// Fraction of shots in the optimal set.
    #[default]
    Sampled,
    /// Probability mass on the optimal set.
    Exact,
}

#[derive(Clone, Debug)]
pub struct SearchOptions {
    pub shots: usize,
    pub seed: u64,
    pub objective: Objective,
    /// Evaluate each point under noise (trajectory estimator).
    pub noise: Option<NoiseConfig>,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self { shots: DEFAULT_SHOTS, seed: 0, objective: Objective::Sampled, noise: None }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurfacePoint {
    pub beta_endpoint: f64,
    pub gamma_endpoint: f64,
    pub p_s_sampled: f64,
    pub p_s_exact: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GridResult {
    pub best: Endpoints,
    pub best_p_s: f64,
    pub best_point: SurfacePoint,
    pub surface: Vec<SurfacePoint>,
}

impl GridResult {
    pub fn surface_csv(&self) -> String {
        let mut out = String::from("beta_endpoint,gamma_endpoint,p_s_sampled,p_s_exact\n");
        for s in &self.surface {
            out.push_str(&format!("{},{},{},{}\n", s.beta_endpoint, s.gamma_endpoint, s.p_s_sampled, s.p_s_exact));
        }
        out
    }

    /// Surface points ordered by objective, best first, with the grid tie-break.
    pub fn ranked(&self, objective: Objective) -> Vec<SurfacePoint> {
        let mut pts = self.surface.clone();
        pts.sort_by(|a, b| better(b, a, objective));
        pts
    }
}

fn score(s: &SurfacePoint, objective: Objective) -> f64 {
    match objective {
        Objective::Sampled => s.p_s_sampled,
        Objective::Exact => s.p_s_exact,
    }
}

/// `Greater` when `a` beats `b`: higher score, then smaller γ_end, then
/// smaller β_start.
fn better(a: &SurfacePoint, b: &SurfacePoint, objective: Objective) -> std::cmp::Ordering {
    score(a, objective)
        .total_cmp(&score(b, objective))
        .then_with(|| b.gamma_endpoint.total_cmp(&a.gamma_endpoint))
        .then_with(|| b.beta_endpoint.total_cmp(&a.beta_endpoint))
}

#[derive(Clone)]
enum Evaluator {
    Clean(QaoaRunner),
    Noisy(TrajectoryEstimator, NoiseConfig),
}

impl Evaluator {
    fn new(problem: &ProblemInstance, noise: Option<&NoiseConfig>) -> Result<Self> {
        match noise {
            None => Ok(Evaluator::Clean(QaoaRunner::new(problem)?)),
            Some(cfg) => {
                cfg.validate()?;
                Ok(Evaluator::Noisy(TrajectoryEstimator::new(problem, cfg.p_noise)?, cfg.clone()))
            }
        }
    }

    fn eval(&mut self, schedule: &Schedule, shots: usize, seed: u64, objective: Objective) -> Result<(f64, f64)> {
        match self {
            Evaluator::Clean(r) => match objective {
                Objective::Sampled => {
                    let e = r.evaluate(schedule, shots, seed)?;
                    Ok((e.p_s_sampled, e.p_s_exact))
                }
                // Sampling is skipped when it cannot affect the argmax.
                Objective::Exact => {
                    let q = r.exact_p_s(schedule)?;
                    Ok((f64::NAN, q))
                }
            },
            Evaluator::Noisy(est, cfg) => {
                let keep = objective == Objective::Sampled;
                let e = est.estimate(schedule, cfg.n_traj, seed, keep)?;
                let sampled = match e.distribution {
                    Some(d) => sample_hits(&d, est.optimal_set(), shots, seed),
                    None => f64::NAN,
                };
                Ok((sampled, e.p_s))
            }
        }
    }
}

fn sample_hits(dist: &[f64], optimal: &[u64], shots: usize, seed: u64) -> f64 {
    use rand::Rng as _;
    let q: f64 = optimal.iter().map(|&x| dist[x as usize]).sum::<f64>() / dist.iter().sum::<f64>();
    // Only membership matters, so one Bernoulli per shot is the same law.
    let mut rng = crate::rng::rng_from_seed(seed);
    (0..shots).filter(|_| rng.random::<f64>() < q).count() as f64 / shots as f64
}

pub fn grid_search(
    problem: &ProblemInstance,
    ramp: &Ramp,
    p: usize,
    spec: &GridSpec,
    opts: &SearchOptions,
) -> Result<GridResult> {
    if opts.shots == 0 {
        return Err(Error::param("shots must be ≥ 1"));
    }
    let points = log_grid(spec)?;
    let base = Evaluator::new(problem, opts.noise.as_ref())?;
    let surface = points
        .par_iter()
        .enumerate()
        .map_init(
            || base.clone(),
            |ev, (idx, &(beta, gamma))| {
                let at = |e: Error| Error::AtGridPoint { beta, gamma, source: Box::new(e) };
                let schedule = ramp.schedule(p, beta, gamma).map_err(at)?;
                let seed = derive_seed(opts.seed, &[&"grid", &idx]);
                let (p_s_sampled, p_s_exact) = ev.eval(&schedule, opts.shots, seed, opts.objective).map_err(at)?;
                Ok(SurfacePoint { beta_endpoint: beta, gamma_endpoint: gamma, p_s_sampled, p_s_exact })
            },
        )
        .collect::<Result<Vec<_>>>()?;
    let best_point = *surface
        .iter()
        .max_by(|a, b| better(a, b, opts.objective))
        .expect("grid is non-empty");
    Ok(GridResult {
        best: Endpoints { beta_start: best_point.beta_endpoint, gamma_end: best_point.gamma_endpoint },
        best_p_s: score(&best_point, opts.objective),
        best_point,
        surface,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "rule", content = "value")]
pub enum Threshold {
    Absolute(f64),
    /// `1/(c·n)`; `c = 0.75` gives the relaxed MIS rule.
    InverseScaled(f64),
}

impl Threshold {
    pub fn value(self, n: usize) -> f64 {
        match self {
            Threshold::Absolute(t) => t,
            Threshold::InverseScaled(c) => 1.0 / (c * n as f64),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DepthScalingPolicy {
    pub threshold: Threshold,
    pub instances_per_n: usize,
    pub p_start: usize,
    pub p_step: usize,
    pub p_max: usize,
}

impl Default for DepthScalingPolicy {
    fn default() -> Self {
        Self { threshold: Threshold::Absolute(0.1), instances_per_n: 10, p_start: 2, p_step: 2, p_max: 100 }
    }
}

impl DepthScalingPolicy {
    pub fn validate(&self, n: usize) -> Result<()> {
        let t = self.threshold.value(n);
        if !(t >= 0.0 && t <= 1.0) {
            return Err(Error::param(format!("threshold {t} outside [0, 1]")));
        }
        if self.p_step == 0 || self.p_start == 0 || self.instances_per_n == 0 || self.p_max < self.p_start {
            return Err(Error::param("depth policy needs p_start ≥ 1, p_step ≥ 1, p_max ≥ p_start, ≥ 1 instance"));
        }
        Ok(())
    }
}

/// Supplies the ramp for a family at a given depth (SGIR rebuilds its shape
/// from a profile sampled at that depth).
pub trait RampProvider: Sync {
    fn ramp(&self, problem: &ProblemInstance, p: usize) -> Result<Ramp>;
}

impl<F> RampProvider for F
where
    F: Fn(&ProblemInstance, usize) -> Result<Ramp> + Sync,
{
    fn ramp(&self, problem: &ProblemInstance, p: usize) -> Result<Ramp> {
        self(problem, p)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DepthResult {
    pub p_required: usize,
    pub threshold: f64,
    /// `(p, mean best p_s)` for every depth tried.
    pub trace: Vec<(usize, f64)>,
}

/// Smallest depth on the `p_start + k·p_step` ladder whose instance-averaged
/// best `p_s` reaches the threshold. Instances are drawn once and reused at
/// every depth.
pub fn depth_to_threshold(
    generator: &(dyn Fn(usize, u64) -> Result<ProblemInstance> + Sync),
    n: usize,
    provider: &dyn RampProvider,
    policy: &DepthScalingPolicy,
    spec: &GridSpec,
    opts: &SearchOptions,
) -> Result<DepthResult> {
    policy.validate(n)?;
    let threshold = policy.threshold.value(n);
    let instances: Vec<ProblemInstance> = (0..policy.instances_per_n)
        .map(|k| generator(k, derive_seed(opts.seed, &[&"instance", &n, &k])))
        .collect::<Result<_>>()?;
    let mut trace = Vec::new();
    let mut p = policy.p_start;
    while p <= policy.p_max {
        let mut total = 0.0;
        for (k, inst) in instances.iter().enumerate() {
            let ramp = provider.ramp(inst, p)?;
            let o = SearchOptions { seed: derive_seed(opts.seed, &[&"depth", &n, &k, &p]), ..opts.clone() };
            total += grid_search(inst, &ramp, p, spec, &o)?.best_p_s;
        }
        let avg = total / instances.len() as f64;
        trace.push((p, avg));
        log::debug!("depth_to_threshold n={n} p={p} mean p_s={avg:.4} (threshold {threshold:.4})");
        if avg >= threshold {
            return Ok(DepthResult { p_required: p, threshold, trace });
        }
        p += policy.p_step;
    }
    Err(Error::NotReached { threshold, p_max: policy.p_max, trace })
}
