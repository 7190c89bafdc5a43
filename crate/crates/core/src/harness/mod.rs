//! Experiment orchestration: configs, sweeps, result rows and plots.
//!
//! Every cell's randomness comes from [`derive_seed`] on the master seed and
//! the cell key, so a config plus master seed fixes every output byte.

mod plot;

pub use plot::{emit_plot, plot_rows, PlotKind, Series};
pub use crate::stats::{fit_exponential, pearson, percentage_improvement, ScalingFit};

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::problems::{er_mis, regular_mis, GroverInstance, ProblemInstance, DEFAULT_LAMBDA};
use crate::rng::derive_seed;
use crate::schedules::{random_shape, rc_shape, sgir_shape, ScheduleFamily, DEFAULT_KAPPA};
use crate::search::{
    depth_to_threshold, grid_search, DepthScalingPolicy, GridSpec, Objective, Ramp, SearchOptions, Threshold,
};
use crate::simulator::{NoiseConfig, NoiseMode, QaoaRunner, TrajectoryEstimator, DEFAULT_SHOTS};
use crate::spectra::{extrapolated_gap_profile, gap_profile, ExtrapolationVariant, GapProfile, SpectrumMethod};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    GroverScaling,
    GroverDepth,
    MisScaling,
    MisDepth,
    MisNoise,
    LargeNExtrapolated,
    ErVariant,
}

impl ExperimentKind {
    pub fn label(self) -> &'static str {
        match self {
            ExperimentKind::GroverScaling => "grover-scaling",
            ExperimentKind::GroverDepth => "grover-depth",
            ExperimentKind::MisScaling => "mis-scaling",
            ExperimentKind::MisDepth => "mis-depth",
            ExperimentKind::MisNoise => "mis-noise",
            ExperimentKind::LargeNExtrapolated => "large-n-extrapolated",
            ExperimentKind::ErVariant => "er-variant",
        }
    }

    fn is_grover(self) -> bool {
        matches!(self, ExperimentKind::GroverScaling | ExperimentKind::GroverDepth)
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        serde_json::from_value(serde_json::Value::String(s.to_string()))
            .map_err(|_| Error::Parse(format!("unknown experiment kind `{s}`")))
    }
}

/// MIS graph family.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "type")]
pub enum GraphFamily {
    Regular { degree: usize },
    Er { edge_prob: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    /// Problem sizes (targets for the extrapolated kinds).
    pub n_values: Vec<usize>,
    /// Fixed depth for the scaling kinds.
    pub p: usize,
    /// Depth sweep for mis-noise.
    pub p_values: Vec<usize>,
    pub policy: Option<DepthScalingPolicy>,
    pub families: Vec<ScheduleFamily>,
    pub lambda: f64,
    /// Defaults to 3-regular, or ER with edge probability 0.4 for er-variant.
    pub graph: Option<GraphFamily>,
    pub grid: GridSpec,
    pub shots: usize,
    pub instances: usize,
    pub master_seed: u64,
    pub objective: Objective,
    pub noise: Option<NoiseConfig>,
    pub kappa: f64,
    /// Defaults to symmetric for Grover and lanczos for MIS.
    pub spectrum_method: Option<SpectrumMethod>,
    pub rc_resolution: usize,
    /// Calibration sizes for the extrapolated kinds.
    pub calibration_n: Vec<usize>,
    /// mis-noise: noiseless grid candidates re-ranked under noise.
    pub noise_screen_top: usize,
    /// mis-noise: trajectories per candidate during re-ranking.
    pub noise_screen_traj: usize,
    pub output: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            kind: ExperimentKind::GroverScaling,
            n_values: (3..=12).collect(),
            p: 10,
            p_values: (2..=20).step_by(2).collect(),
            policy: None,
            families: vec![ScheduleFamily::Lr, ScheduleFamily::Sgir],
            lambda: DEFAULT_LAMBDA,
            graph: None,
            grid: GridSpec::default(),
            shots: DEFAULT_SHOTS,
            instances: 10,
            master_seed: 0,
            objective: Objective::Sampled,
            noise: None,
            kappa: DEFAULT_KAPPA,
            spectrum_method: None,
            rc_resolution: 1024,
            calibration_n: (6..=12).collect(),
            noise_screen_top: 5,
            noise_screen_traj: 100,
            output: None,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_values.is_empty() {
            return Err(Error::param("n range is empty"));
        }
        if self.families.is_empty() {
            return Err(Error::param("no schedule families requested"));
        }
        if self.instances == 0 || self.shots == 0 {
            return Err(Error::param("instances and shots must be ≥ 1"));
        }
        if self.p == 0 || self.p_values.contains(&0) {
            return Err(Error::param("depths must be ≥ 1"));
        }
        self.grid.validate()?;
        if !self.kind.is_grover() && self.families.contains(&ScheduleFamily::Rc) {
            return Err(Error::param("the rc family needs the analytic Grover gap"));
        }
        if matches!(self.kind, ExperimentKind::LargeNExtrapolated | ExperimentKind::ErVariant) {
            if self.calibration_n.len() < 2 {
                return Err(Error::param("need ≥ 2 calibration sizes"));
            }
            let max_cal = self.calibration_n.iter().max().copied().unwrap_or(0);
            if self.n_values.iter().any(|&n| n <= max_cal) {
                return Err(Error::param("extrapolation targets must exceed every calibration size"));
            }
        }
        if self.kind == ExperimentKind::MisNoise {
            let noise = self.noise.as_ref().ok_or_else(|| Error::param("mis-noise needs a noise config"))?;
            noise.validate()?;
            if self.noise_screen_top == 0 || self.noise_screen_traj == 0 {
                return Err(Error::param("noise screening needs ≥ 1 candidate and ≥ 1 trajectory"));
            }
        }
        if let Some(noise) = &self.noise {
            noise.validate()?;
        }
        Ok(())
    }

    fn graph_family(&self) -> GraphFamily {
        self.graph.unwrap_or(match self.kind {
            ExperimentKind::ErVariant => GraphFamily::Er { edge_prob: 0.4 },
            _ => GraphFamily::Regular { degree: 3 },
        })
    }

    fn method(&self) -> SpectrumMethod {
        self.spectrum_method.unwrap_or(if self.kind.is_grover() {
            SpectrumMethod::Symmetric
        } else {
            SpectrumMethod::Lanczos
        })
    }

    fn instance(&self, n: usize, seed: u64) -> Result<ProblemInstance> {
        if self.kind.is_grover() {
            return Ok(ProblemInstance::Grover(GroverInstance::random(n, seed)?));
        }
        Ok(ProblemInstance::Mis(match self.graph_family() {
            GraphFamily::Regular { degree } => regular_mis(n, degree, self.lambda, seed)?,
            GraphFamily::Er { edge_prob } => er_mis(n, edge_prob, self.lambda, seed)?,
        }))
    }

    fn search_options(&self, seed: u64) -> SearchOptions {
        SearchOptions { shots: self.shots, seed, objective: self.objective, noise: None }
    }
}

/// One result row, keyed by `(n, instance, family, p)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub experiment: ExperimentKind,
    pub n: usize,
    pub instance: Option<usize>,
    pub family: ScheduleFamily,
    /// Where the schedule shape came from (profile method, `rc`, `linear`…).
    pub shape: String,
    pub p: usize,
    pub p_s: Option<f64>,
    pub p_s_exact: Option<f64>,
    pub p_s_noisy: Option<f64>,
    pub p_s_noisy_stderr: Option<f64>,
    pub beta_start: Option<f64>,
    pub gamma_end: Option<f64>,
    pub g_min: Option<f64>,
    pub depth_required: Option<usize>,
    pub instance_seed: Option<u64>,
    pub cell_seed: u64,
    pub problem_hash: String,
    pub schedule_hash: String,
    pub error: Option<String>,
}

impl ResultRow {
    fn new(cfg: &ExperimentConfig, n: usize, instance: Option<usize>, family: ScheduleFamily, p: usize, cell_seed: u64) -> Self {
        Self {
            experiment: cfg.kind,
            n,
            instance,
            family,
            shape: String::new(),
            p,
            p_s: None,
            p_s_exact: None,
            p_s_noisy: None,
            p_s_noisy_stderr: None,
            beta_start: None,
            gamma_end: None,
            g_min: None,
            depth_required: None,
            instance_seed: None,
            cell_seed,
            problem_hash: String::new(),
            schedule_hash: String::new(),
            error: None,
        }
    }

    fn fail(mut self, e: &Error) -> Self {
        log::warn!("{} n={} instance={:?} family={} p={}: {e}", self.experiment, self.n, self.instance, self.family, self.p);
        self.error = Some(format!("{}: {e}", e.kind()));
        self
    }

    /// The metric used for scaling fits and comparisons.
    pub fn metric(&self, exact: bool) -> Option<f64> {
        if exact { self.p_s_exact } else { self.p_s }
    }
}

pub const CSV_HEADER: &str = "experiment,n,instance,family,shape,p,p_s,p_s_exact,p_s_noisy,p_s_noisy_stderr,\
beta_start,gamma_end,g_min,depth_required,instance_seed,cell_seed,problem_hash,schedule_hash,error";

fn opt<T: fmt::Display>(v: &Option<T>) -> String {
    v.as_ref().map(|x| x.to_string()).unwrap_or_default()
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn rows_to_csv(rows: &[ResultRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let fields = [
            r.experiment.to_string(),
            r.n.to_string(),
            opt(&r.instance),
            r.family.to_string(),
            csv_field(&r.shape),
            r.p.to_string(),
            opt(&r.p_s),
            opt(&r.p_s_exact),
            opt(&r.p_s_noisy),
            opt(&r.p_s_noisy_stderr),
            opt(&r.beta_start),
            opt(&r.gamma_end),
            opt(&r.g_min),
            opt(&r.depth_required),
            opt(&r.instance_seed),
            r.cell_seed.to_string(),
            r.problem_hash.clone(),
            r.schedule_hash.clone(),
            csv_field(r.error.as_deref().unwrap_or("")),
        ];
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

fn split_csv_line(line: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut quoted = false;
    let mut chars = line.chars().peekable();
    while let Some(c) = chars.next() {
        match c {
            '"' if quoted && chars.peek() == Some(&'"') => {
                cur.push('"');
                chars.next();
            }
            '"' => quoted = !quoted,
            ',' if !quoted => out.push(std::mem::take(&mut cur)),
            _ => cur.push(c),
        }
    }
    out.push(cur);
    out
}

pub fn rows_from_csv(text: &str) -> Result<Vec<ResultRow>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == CSV_HEADER => {}
        _ => return Err(Error::Parse("not a result table (header mismatch)".into())),
    }
    let bad = |what: &str, v: &str| Error::Parse(format!("bad {what} `{v}`"));
    fn parse_opt<T: FromStr>(v: &str) -> std::result::Result<Option<T>, ()> {
        if v.is_empty() { Ok(None) } else { v.parse().map(Some).map_err(|_| ()) }
    }
    let mut rows = Vec::new();
    for line in lines.filter(|l| !l.trim().is_empty()) {
        let f = split_csv_line(line);
        if f.len() != 19 {
            return Err(Error::Parse(format!("expected 19 columns, got {}", f.len())));
        }
        let float = |i: usize| parse_opt::<f64>(&f[i]).map_err(|_| bad("number", &f[i]));
        rows.push(ResultRow {
            experiment: f[0].parse()?,
            n: f[1].parse().map_err(|_| bad("n", &f[1]))?,
            instance: parse_opt(&f[2]).map_err(|_| bad("instance", &f[2]))?,
            family: f[3].parse()?,
            shape: f[4].clone(),
            p: f[5].parse().map_err(|_| bad("p", &f[5]))?,
            p_s: float(6)?,
            p_s_exact: float(7)?,
            p_s_noisy: float(8)?,
            p_s_noisy_stderr: float(9)?,
            beta_start: float(10)?,
            gamma_end: float(11)?,
            g_min: float(12)?,
            depth_required: parse_opt(&f[13]).map_err(|_| bad("depth", &f[13]))?,
            instance_seed: parse_opt(&f[14]).map_err(|_| bad("seed", &f[14]))?,
            cell_seed: f[15].parse().map_err(|_| bad("seed", &f[15]))?,
            problem_hash: f[16].clone(),
            schedule_hash: f[17].clone(),
            error: (!f[18].is_empty()).then(|| f[18].clone()),
        });
    }
    Ok(rows)
}

/// `(n, family, p, mean best p_s)` for depth scans.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DepthTrace {
    pub n: usize,
    pub family: ScheduleFamily,
    pub trace: Vec<(usize, f64)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentOutput {
    pub config: ExperimentConfig,
    pub rows: Vec<ResultRow>,
    pub traces: Vec<DepthTrace>,
    /// Extrapolated profiles built for the extrapolated kinds.
    pub profiles: Vec<GapProfile>,
}

impl ExperimentOutput {
    pub fn csv(&self) -> String {
        rows_to_csv(&self.rows)
    }

    pub fn trace_csv(&self) -> String {
        let mut out = String::from("n,family,p,mean_p_s\n");
        for t in &self.traces {
            for (p, v) in &t.trace {
                out.push_str(&format!("{},{},{p},{v}\n", t.n, t.family));
            }
        }
        out
    }

    pub fn manifest(&self) -> Result<String> {
        let errors = self.rows.iter().filter(|r| r.error.is_some()).count();
        let manifest = serde_json::json!({
            "experiment": self.config.kind,
            "crate_version": env!("CARGO_PKG_VERSION"),
            "master_seed": self.config.master_seed,
            "rows": self.rows.len(),
            "failed_cells": errors,
            "config": self.config,
            "depth_traces": self.traces,
            "extrapolated_profiles": self.profiles.iter().map(|p| serde_json::json!({
                "n": p.n, "method": p.method, "g_min": p.g_min, "gaps": p.gaps,
            })).collect::<Vec<_>>(),
        });
        Ok(serde_json::to_string_pretty(&manifest)?)
    }

    /// Write `results.csv`, `manifest.json` and (for depth scans)
    /// `depth_trace.csv` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        let mut put = |name: &str, body: String| -> Result<()> {
            let path = dir.join(name);
            std::fs::write(&path, body)?;
            written.push(path);
            Ok(())
        };
        put("results.csv", self.csv())?;
        if !self.traces.is_empty() {
            put("depth_trace.csv", self.trace_csv())?;
        }
        put("manifest.json", self.manifest()?)?;
        Ok(written)
    }
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    config.validate()?;
    let mut out = ExperimentOutput { config: config.clone(), rows: Vec::new(), traces: Vec::new(), profiles: Vec::new() };
    match config.kind {
        ExperimentKind::GroverScaling | ExperimentKind::MisScaling => scaling(config, &mut out),
        ExperimentKind::GroverDepth | ExperimentKind::MisDepth => depth(config, &mut out),
        ExperimentKind::MisNoise => noise_sweep(config, &mut out)?,
        ExperimentKind::LargeNExtrapolated | ExperimentKind::ErVariant => extrapolated(config, &mut out)?,
    }
    if let Some(dir) = &config.output {
        out.write(dir)?;
    }
    Ok(out)
}

fn instance_seed(cfg: &ExperimentConfig, n: usize, k: usize) -> u64 {
    derive_seed(cfg.master_seed, &[&"instance", &n, &k])
}

fn cell_seed(cfg: &ExperimentConfig, n: usize, k: usize, family: ScheduleFamily, p: usize) -> u64 {
    derive_seed(cfg.master_seed, &[&"cell", &n, &k, &family, &p])
}

/// Ramp for a grid-searched family; `profile` is needed by SGIR only.
fn ramp_for(cfg: &ExperimentConfig, family: ScheduleFamily, n: usize, profile: Option<&GapProfile>) -> Result<(Ramp, String)> {
    match family {
        ScheduleFamily::Lr => Ok((Ramp::Linear, "linear".into())),
        ScheduleFamily::Rc => Ok((Ramp::Shape(rc_shape(n, cfg.rc_resolution)?), "rc".into())),
        ScheduleFamily::Sgir => {
            let prof = profile.ok_or_else(|| Error::param("sgir needs a gap profile"))?;
            let shape = sgir_shape(prof, cfg.kappa)?;
            let label = if shape.degenerate { format!("{}-degenerate", prof.method) } else { prof.method.clone() };
            Ok((Ramp::Shape(shape), label))
        }
        ScheduleFamily::Random => Err(Error::Unsupported("random schedules are not grid searched".into())),
    }
}

/// Grid-search (or draw, for the random family) one cell and fill the row.
fn evaluate_cell(
    cfg: &ExperimentConfig,
    problem: &ProblemInstance,
    family: ScheduleFamily,
    p: usize,
    profile: Option<&GapProfile>,
    mut row: ResultRow,
) -> ResultRow {
    row.problem_hash = problem.hash();
    let seed = row.cell_seed;
    let result = (|| -> Result<ResultRow> {
        let mut row = row.clone();
        if family == ScheduleFamily::Random {
            let (b, g) = cfg.grid.angle_ranges();
            let sched = random_shape(p, derive_seed(seed, &[&"angles"]), b, g)?;
            let e = QaoaRunner::new(problem)?.evaluate(&sched, cfg.shots, derive_seed(seed, &[&"shots"]))?;
            row.shape = "random".into();
            row.p_s = Some(e.p_s_sampled);
            row.p_s_exact = Some(e.p_s_exact);
            row.schedule_hash = sched.hash();
            return Ok(row);
        }
        let (ramp, label) = ramp_for(cfg, family, problem.n(), profile)?;
        row.shape = label;
        let res = grid_search(problem, &ramp, p, &cfg.grid, &cfg.search_options(seed))?;
        let pt = res.best_point;
        row.p_s = pt.p_s_sampled.is_finite().then_some(pt.p_s_sampled);
        row.p_s_exact = Some(pt.p_s_exact);
        row.beta_start = Some(res.best.beta_start);
        row.gamma_end = Some(res.best.gamma_end);
        row.schedule_hash = ramp.schedule(p, res.best.beta_start, res.best.gamma_end)?.hash();
        Ok(row)
    })();
    match result {
        Ok(r) => r,
        Err(e) => row.fail(&e),
    }
}

fn scaling(cfg: &ExperimentConfig, out: &mut ExperimentOutput) {
    let method = cfg.method();
    for &n in &cfg.n_values {
        for k in 0..cfg.instances {
            let iseed = instance_seed(cfg, n, k);
            let base = |family| {
                let mut r = ResultRow::new(cfg, n, Some(k), family, cfg.p, cell_seed(cfg, n, k, family, cfg.p));
                r.instance_seed = Some(iseed);
                r
            };
            let problem = match cfg.instance(n, iseed) {
                Ok(p) => p,
                Err(e) => {
                    out.rows.extend(cfg.families.iter().map(|&f| base(f).fail(&e)));
                    continue;
                }
            };
            // The profile is computed whenever it is cheap or needed; its g_min
            // is attached to every row of the instance.
            let need_profile = cfg.families.contains(&ScheduleFamily::Sgir) || cfg.kind.is_grover();
            let profile = need_profile.then(|| gap_profile(&problem, cfg.p, method));
            for &family in &cfg.families {
                let mut row = base(family);
                match &profile {
                    Some(Ok(prof)) => row.g_min = Some(prof.g_min),
                    Some(Err(e)) if family == ScheduleFamily::Sgir => {
                        out.rows.push(row.fail(e));
                        continue;
                    }
                    _ => {}
                }
                let prof = profile.as_ref().and_then(|p| p.as_ref().ok());
                out.rows.push(evaluate_cell(cfg, &problem, family, cfg.p, prof, row));
            }
        }
    }
}

fn depth(cfg: &ExperimentConfig, out: &mut ExperimentOutput) {
    let method = cfg.method();
    let policy = cfg.policy.clone().unwrap_or_else(|| DepthScalingPolicy {
        instances_per_n: cfg.instances,
        threshold: if cfg.kind.is_grover() { Threshold::Absolute(0.1) } else { Threshold::InverseScaled(0.75) },
        ..DepthScalingPolicy::default()
    });
    let (kappa, resolution) = (cfg.kappa, cfg.rc_resolution);
    for &n in &cfg.n_values {
        // The search seed depends on n only, so every family scans the same
        // instances with the same shot streams.
        let seed = derive_seed(cfg.master_seed, &[&"depth", &n]);
        let generator = |_k: usize, s: u64| cfg.instance(n, s);
        for &family in &cfg.families {
            let mut row = ResultRow::new(cfg, n, None, family, 0, seed);
            row.shape = match family {
                ScheduleFamily::Lr => "linear".into(),
                ScheduleFamily::Rc => "rc".into(),
                ScheduleFamily::Sgir => method.label().into(),
                ScheduleFamily::Random => "random".into(),
            };
            let provider = move |problem: &ProblemInstance, p: usize| -> Result<Ramp> {
                match family {
                    ScheduleFamily::Lr => Ok(Ramp::Linear),
                    ScheduleFamily::Rc => Ok(Ramp::Shape(rc_shape(problem.n(), resolution)?)),
                    ScheduleFamily::Sgir => Ok(Ramp::Shape(sgir_shape(&gap_profile(problem, p, method)?, kappa)?)),
                    ScheduleFamily::Random => Err(Error::Unsupported("random schedules have no depth scan".into())),
                }
            };
            match depth_to_threshold(&generator, n, &provider, &policy, &cfg.grid, &cfg.search_options(seed)) {
                Ok(res) => {
                    row.p = res.p_required;
                    row.depth_required = Some(res.p_required);
                    row.p_s = res.trace.last().map(|t| t.1);
                    out.traces.push(DepthTrace { n, family, trace: res.trace });
                    out.rows.push(row);
                }
                Err(e) => {
                    if let Error::NotReached { trace, p_max, .. } = &e {
                        row.p = *p_max;
                        row.p_s = trace.last().map(|t| t.1);
                        out.traces.push(DepthTrace { n, family, trace: trace.clone() });
                    }
                    out.rows.push(row.fail(&e));
                }
            }
        }
    }
}

fn noise_sweep(cfg: &ExperimentConfig, out: &mut ExperimentOutput) -> Result<()> {
    let noise = cfg.noise.clone().expect("validated");
    let method = cfg.method();
    for &n in &cfg.n_values {
        for k in 0..cfg.instances {
            let iseed = instance_seed(cfg, n, k);
            let problem = cfg.instance(n, iseed);
            for &p in &cfg.p_values {
                let profile = match &problem {
                    Ok(prob) if cfg.families.contains(&ScheduleFamily::Sgir) => Some(gap_profile(prob, p, method)),
                    _ => None,
                };
                for &family in &cfg.families {
                    let mut row = ResultRow::new(cfg, n, Some(k), family, p, cell_seed(cfg, n, k, family, p));
                    row.instance_seed = Some(iseed);
                    let problem = match &problem {
                        Ok(pr) => pr,
                        Err(e) => {
                            out.rows.push(row.fail(e));
                            continue;
                        }
                    };
                    if let Some(Ok(prof)) = &profile {
                        row.g_min = Some(prof.g_min);
                    }
                    let prof = match &profile {
                        Some(Ok(p)) => Some(p),
                        Some(Err(e)) if family == ScheduleFamily::Sgir => {
                            out.rows.push(row.fail(e));
                            continue;
                        }
                        _ => None,
                    };
                    let result = noisy_cell(cfg, &noise, problem, family, p, prof, row.clone());
                    out.rows.push(match result {
                        Ok(r) => r,
                        Err(e) => row.fail(&e),
                    });
                }
            }
        }
    }
    Ok(())
}

/// Noiseless grid search, re-rank the best candidates under noise with a
/// cheap trajectory count, then re-evaluate the winner at full count.
fn noisy_cell(
    cfg: &ExperimentConfig,
    noise: &NoiseConfig,
    problem: &ProblemInstance,
    family: ScheduleFamily,
    p: usize,
    profile: Option<&GapProfile>,
    mut row: ResultRow,
) -> Result<ResultRow> {
    row.problem_hash = problem.hash();
    let seed = row.cell_seed;
    let (ramp, label) = ramp_for(cfg, family, problem.n(), profile)?;
    row.shape = label;
    let clean = grid_search(problem, &ramp, p, &cfg.grid, &cfg.search_options(seed))?;
    row.p_s = clean.best_point.p_s_sampled.is_finite().then_some(clean.best_point.p_s_sampled);
    row.p_s_exact = Some(clean.best_point.p_s_exact);

    if noise.mode == NoiseMode::DensityMatrix {
        return Err(Error::Unsupported("mis-noise sweeps use the trajectory estimator".into()));
    }
    let mut est = TrajectoryEstimator::new(problem, noise.p_noise)?;
    let candidates: Vec<_> = clean.ranked(cfg.objective).into_iter().take(cfg.noise_screen_top).collect();
    let mut best: Option<(f64, f64, f64)> = None;
    for (i, c) in candidates.iter().enumerate() {
        let sched = ramp.schedule(p, c.beta_endpoint, c.gamma_endpoint)?;
        let e = est.estimate(&sched, cfg.noise_screen_traj, derive_seed(seed, &[&"screen", &i]), false)?;
        // Strict improvement keeps the noiseless ranking as the tie-break.
        if best.is_none_or(|b| e.p_s > b.0) {
            best = Some((e.p_s, c.beta_endpoint, c.gamma_endpoint));
        }
    }
    let (_, beta, gamma) = best.expect("at least one candidate");
    let sched = ramp.schedule(p, beta, gamma)?;
    let fin = est.estimate(&sched, noise.n_traj, derive_seed(seed, &[&"final"]), false)?;
    row.beta_start = Some(beta);
    row.gamma_end = Some(gamma);
    row.p_s_noisy = Some(fin.p_s);
    row.p_s_noisy_stderr = Some(fin.stderr);
    row.schedule_hash = sched.hash();
    Ok(row)
}

fn extrapolated(cfg: &ExperimentConfig, out: &mut ExperimentOutput) -> Result<()> {
    let variant = match cfg.kind {
        ExperimentKind::ErVariant => ExtrapolationVariant::Er,
        _ => ExtrapolationVariant::Degree3,
    };
    let method = cfg.method();
    let mut calibration = Vec::new();
    for &n in &cfg.calibration_n {
        for k in 0..cfg.instances {
            let seed = derive_seed(cfg.master_seed, &[&"calibration", &n, &k]);
            match cfg.instance(n, seed).and_then(|prob| gap_profile(&prob, cfg.p, method)) {
                Ok(prof) => calibration.push(prof),
                Err(e) => log::warn!("calibration n={n} instance={k} skipped: {e}"),
            }
        }
    }
    for &n in &cfg.n_values {
        let profile = extrapolated_gap_profile(&calibration, n, variant);
        if let Ok(p) = &profile {
            out.profiles.push(p.clone());
        }
        for k in 0..cfg.instances {
            let iseed = instance_seed(cfg, n, k);
            let problem = cfg.instance(n, iseed);
            for &family in &cfg.families {
                let mut row = ResultRow::new(cfg, n, Some(k), family, cfg.p, cell_seed(cfg, n, k, family, cfg.p));
                row.instance_seed = Some(iseed);
                let problem = match &problem {
                    Ok(p) => p,
                    Err(e) => {
                        out.rows.push(row.fail(e));
                        continue;
                    }
                };
                let prof = match &profile {
                    Ok(p) => {
                        row.g_min = Some(p.g_min);
                        Some(p)
                    }
                    Err(e) if family == ScheduleFamily::Sgir => {
                        out.rows.push(row.fail(e));
                        continue;
                    }
                    Err(_) => None,
                };
                out.rows.push(evaluate_cell(cfg, problem, family, cfg.p, prof, row));
            }
        }
    }
    Ok(())
}

/// Per-n mean of a metric for one family, skipping failed cells.
pub fn mean_by_n(rows: &[ResultRow], family: ScheduleFamily, metric: impl Fn(&ResultRow) -> Option<f64>) -> BTreeMap<usize, f64> {
    let mut acc: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for r in rows.iter().filter(|r| r.family == family && r.error.is_none()) {
        if let Some(v) = metric(r) {
            acc.entry(r.n).or_default().push(v);
        }
    }
    acc.into_iter().map(|(n, v)| (n, crate::stats::mean(&v))).collect()
}

/// Exponential fit of the per-n mean `p_s` (or exact mass) for one family.
pub fn scaling_fit(rows: &[ResultRow], family: ScheduleFamily, exact: bool) -> Result<ScalingFit> {
    let pts: Vec<(f64, f64)> = mean_by_n(rows, family, |r| r.metric(exact)).into_iter().map(|(n, v)| (n as f64, v)).collect();
    fit_exponential(&pts)
}

/// `(g_min, improvement %)` of SGIR over LR for every instance that has both.
pub fn improvement_vs_gap(rows: &[ResultRow], exact: bool) -> Vec<(f64, f64)> {
    let key = |r: &ResultRow| (r.n, r.instance, r.p);
    let lr: BTreeMap<_, &ResultRow> =
        rows.iter().filter(|r| r.family == ScheduleFamily::Lr && r.error.is_none()).map(|r| (key(r), r)).collect();
    rows.iter()
        .filter(|r| r.family == ScheduleFamily::Sgir && r.error.is_none())
        .filter_map(|s| {
            let l = lr.get(&key(s))?;
            let imp = percentage_improvement(s.metric(exact)?, l.metric(exact)?).ok()?;
            Some((s.g_min?, imp))
        })
        .collect()
}
