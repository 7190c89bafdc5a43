use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use sgir::harness::{plot_rows, rows_from_csv, run_experiment, scaling_fit, ExperimentConfig, PlotKind};
use sgir::problems::{er_mis, parse_bits, regular_mis, Graph, MisInstance, Provenance};
use sgir::schedules::{lr_schedule, random_shape, rc_shape, sgir_shape, shape_to_schedule, DEFAULT_KAPPA};
use sgir::search::{
    depth_to_threshold, grid_search, DepthScalingPolicy, GridSpec, Objective, Ramp, SearchOptions, Threshold,
};
use sgir::simulator::{run_qaoa, run_qaoa_noisy, NoiseConfig, NoiseMode, DEFAULT_SHOTS, DEFAULT_TRAJECTORIES};
use sgir::spectra::{gap_profile, GapProfile, SpectrumMethod};
use sgir::{Error, GroverInstance, ProblemInstance, Result, Schedule, ScheduleFamily};

#[derive(Parser)]
#[command(name = "sgir", version, about = "Spectral-gap-informed QAOA schedules: spectra, schedules, simulation, experiments")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Gap profile CSV for a problem instance.
    Spectrum {
        #[command(flatten)]
        problem: ProblemArgs,
        #[arg(long, default_value_t = 10)]
        p: usize,
        /// dense | lanczos | symmetric | analytic (default: symmetric for Grover, lanczos for MIS)
        #[arg(long)]
        method: Option<SpectrumMethod>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Schedule CSV for a family and endpoints.
    Schedule {
        #[command(flatten)]
        sched: ScheduleArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Execute one QAOA schedule and report counts and P_s.
    Run {
        #[command(flatten)]
        problem: ProblemArgs,
        /// Schedule CSV; otherwise built from the schedule flags.
        #[arg(long)]
        schedule: Option<PathBuf>,
        #[command(flatten)]
        sched: ScheduleArgs,
        #[arg(long, default_value_t = DEFAULT_SHOTS)]
        shots: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        noise: NoiseArgs,
        /// Counts CSV destination (metadata goes to stdout).
        #[arg(long)]
        counts: Option<PathBuf>,
    },
    /// Log-space grid search over the schedule endpoints.
    GridSearch {
        #[command(flatten)]
        problem: ProblemArgs,
        #[command(flatten)]
        search: SearchArgs,
        #[arg(long, default_value_t = 10)]
        p: usize,
        /// Surface CSV destination (best point goes to stdout).
        #[arg(long)]
        surface: Option<PathBuf>,
    },
    /// Smallest depth whose instance-averaged best P_s reaches a threshold.
    DepthScaling {
        #[command(flatten)]
        problem: ProblemArgs,
        #[command(flatten)]
        search: SearchArgs,
        /// Absolute threshold; omit for 1/(c·n) with --inverse-c.
        #[arg(long)]
        threshold: Option<f64>,
        #[arg(long, default_value_t = 0.75)]
        inverse_c: f64,
        #[arg(long, default_value_t = 10)]
        instances: usize,
        #[arg(long, default_value_t = 2)]
        p_start: usize,
        #[arg(long, default_value_t = 2)]
        p_step: usize,
        #[arg(long, default_value_t = 100)]
        p_max: usize,
    },
    /// Run an experiment from a JSON config file.
    Experiment {
        config: PathBuf,
        /// Output directory (overrides the config's).
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Exponential fits of mean P_s against n per family from a results CSV.
    Fit {
        results: PathBuf,
        /// Fit the exact probability instead of the sampled one.
        #[arg(long)]
        exact: bool,
    },
    /// SVG chart from a results CSV.
    Plot {
        results: PathBuf,
        #[arg(long, value_enum, default_value_t = PlotArg::Scaling)]
        kind: PlotArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ProblemKind {
    Grover,
    Mis,
}

#[derive(Args, Clone)]
struct ProblemArgs {
    #[arg(long, value_enum, default_value_t = ProblemKind::Grover)]
    problem: ProblemKind,
    #[arg(long, default_value_t = 6)]
    n: usize,
    /// Instance seed (marked state or random graph).
    #[arg(long, default_value_t = 0)]
    instance_seed: u64,
    /// Grover marked bitstring, qubit 0 first.
    #[arg(long)]
    marked: Option<String>,
    #[arg(long, default_value_t = sgir::problems::DEFAULT_LAMBDA)]
    lambda: f64,
    #[arg(long, default_value_t = 3)]
    degree: usize,
    /// Use an ER graph with this edge probability instead of a regular graph.
    #[arg(long)]
    edge_prob: Option<f64>,
    /// Edge-list file (`n` on the first line, then `u v` pairs).
    #[arg(long)]
    graph: Option<PathBuf>,
}

impl ProblemArgs {
    fn build(&self) -> Result<ProblemInstance> {
        Ok(match self.problem {
            ProblemKind::Grover => ProblemInstance::Grover(match &self.marked {
                Some(bits) => GroverInstance::new(bits.len(), parse_bits(bits)?)?,
                None => GroverInstance::random(self.n, self.instance_seed)?,
            }),
            ProblemKind::Mis => ProblemInstance::Mis(match (&self.graph, self.edge_prob) {
                (Some(path), _) => {
                    let graph = Graph::from_edge_list(&std::fs::read_to_string(path)?)?;
                    let prov = Provenance { generator: format!("file({})", path.display()), seed: None, lambda: Some(self.lambda) };
                    MisInstance::new(graph, self.lambda, prov)?
                }
                (None, Some(q)) => er_mis(self.n, q, self.lambda, self.instance_seed)?,
                (None, None) => regular_mis(self.n, self.degree, self.lambda, self.instance_seed)?,
            }),
        })
    }
}

#[derive(Args)]
struct ScheduleArgs {
    #[arg(long, default_value_t = ScheduleFamily::Lr)]
    family: ScheduleFamily,
    #[arg(long, default_value_t = 10)]
    depth: usize,
    #[arg(long, default_value_t = 0.3)]
    beta_start: f64,
    #[arg(long, default_value_t = 0.6)]
    gamma_end: f64,
    /// Gap profile CSV (sgir).
    #[arg(long)]
    profile: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_KAPPA)]
    kappa: f64,
    /// Qubit count for the rc shape.
    #[arg(long, default_value_t = 6)]
    rc_n: usize,
    #[arg(long, default_value_t = 1024)]
    rc_resolution: usize,
    /// Seed for the random family.
    #[arg(long, default_value_t = 0)]
    schedule_seed: u64,
}

impl ScheduleArgs {
    fn build(&self) -> Result<Schedule> {
        let (p, b, g) = (self.depth, self.beta_start, self.gamma_end);
        match self.family {
            ScheduleFamily::Lr => lr_schedule(p, b, g),
            ScheduleFamily::Rc => shape_to_schedule(&rc_shape(self.rc_n, self.rc_resolution)?, p, b, g),
            ScheduleFamily::Sgir => {
                let path = self.profile.as_ref().ok_or_else(|| Error::Parameter("sgir needs --profile".into()))?;
                let prof = GapProfile::from_csv(&std::fs::read_to_string(path)?)?;
                shape_to_schedule(&sgir_shape(&prof, self.kappa)?, p, b, g)
            }
            ScheduleFamily::Random => {
                let (br, gr) = GridSpec::default().angle_ranges();
                random_shape(p, self.schedule_seed, br, gr)
            }
        }
    }
}

#[derive(Args)]
struct NoiseArgs {
    /// Per-gate depolarising probability; enables the noisy simulator.
    #[arg(long)]
    p_noise: Option<f64>,
    #[arg(long, default_value = "trajectories")]
    noise_mode: NoiseMode,
    #[arg(long, default_value_t = DEFAULT_TRAJECTORIES)]
    n_traj: usize,
}

impl NoiseArgs {
    fn config(&self) -> Option<NoiseConfig> {
        self.p_noise.map(|p| NoiseConfig { p_noise: p, mode: self.noise_mode, n_traj: self.n_traj })
    }
}

#[derive(Args)]
struct SearchArgs {
    /// lr | rc | sgir (sgir builds the profile of each instance)
    #[arg(long, default_value_t = ScheduleFamily::Lr)]
    family: ScheduleFamily,
    #[arg(long, default_value_t = DEFAULT_SHOTS)]
    shots: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 11)]
    points: usize,
    #[arg(long, num_args = 2, default_values_t = [-1.5, 0.5], allow_negative_numbers = true)]
    log_beta: Vec<f64>,
    #[arg(long, num_args = 2, default_values_t = [-1.0, 1.0], allow_negative_numbers = true)]
    log_gamma: Vec<f64>,
    #[arg(long)]
    exact_objective: bool,
    #[arg(long, default_value_t = DEFAULT_KAPPA)]
    kappa: f64,
    #[arg(long)]
    method: Option<SpectrumMethod>,
    #[arg(long, default_value_t = 1024)]
    rc_resolution: usize,
    #[command(flatten)]
    noise: NoiseArgs,
}

impl SearchArgs {
    fn spec(&self) -> GridSpec {
        GridSpec {
            log_beta_range: (self.log_beta[0], self.log_beta[1]),
            log_gamma_range: (self.log_gamma[0], self.log_gamma[1]),
            points_per_axis: self.points,
        }
    }

    fn options(&self) -> SearchOptions {
        SearchOptions {
            shots: self.shots,
            seed: self.seed,
            objective: if self.exact_objective { Objective::Exact } else { Objective::Sampled },
            noise: self.noise.config(),
        }
    }

    fn ramp(&self, problem: &ProblemInstance, p: usize) -> Result<Ramp> {
        match self.family {
            ScheduleFamily::Lr => Ok(Ramp::Linear),
            ScheduleFamily::Rc => Ok(Ramp::Shape(rc_shape(problem.n(), self.rc_resolution)?)),
            ScheduleFamily::Sgir => {
                let method = self.method.unwrap_or(match problem {
                    ProblemInstance::Grover(_) => SpectrumMethod::Symmetric,
                    ProblemInstance::Mis(_) => SpectrumMethod::Lanczos,
                });
                Ok(Ramp::Shape(sgir_shape(&gap_profile(problem, p, method)?, self.kappa)?))
            }
            ScheduleFamily::Random => Err(Error::Unsupported("random schedules are not grid searched".into())),
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum PlotArg {
    Scaling,
    Depth,
    Noise,
    Correlation,
}

fn emit(out: Option<&Path>, body: &str) -> Result<()> {
    match out {
        Some(path) => Ok(std::fs::write(path, body)?),
        None => {
            print!("{body}");
            Ok(())
        }
    }
}

fn execute(cli: Cli) -> Result<()> {
    match cli.cmd {
        Cmd::Spectrum { problem, p, method, out } => {
            let prob = problem.build()?;
            let method = method.unwrap_or(match prob {
                ProblemInstance::Grover(_) => SpectrumMethod::Symmetric,
                ProblemInstance::Mis(_) => SpectrumMethod::Lanczos,
            });
            emit(out.as_deref(), &gap_profile(&prob, p, method)?.to_csv())
        }
        Cmd::Schedule { sched, out } => emit(out.as_deref(), &sched.build()?.to_csv()),
        Cmd::Run { problem, schedule, sched, shots, seed, noise, counts } => {
            let prob = problem.build()?;
            let schedule = match schedule {
                Some(path) => Schedule::from_csv(&std::fs::read_to_string(path)?)?,
                None => sched.build()?,
            };
            let result = match noise.config() {
                Some(cfg) => run_qaoa_noisy(&prob, &schedule, &cfg, shots, seed)?,
                None => run_qaoa(&prob, &schedule, shots, seed)?,
            };
            if let Some(path) = counts {
                std::fs::write(path, result.to_counts_csv())?;
            }
            println!("{}", result.metadata_json()?);
            Ok(())
        }
        Cmd::GridSearch { problem, search, p, surface } => {
            let prob = problem.build()?;
            let ramp = search.ramp(&prob, p)?;
            let res = grid_search(&prob, &ramp, p, &search.spec(), &search.options())?;
            if let Some(path) = surface {
                std::fs::write(path, res.surface_csv())?;
            }
            let best = json!({
                "family": search.family,
                "p": p,
                "beta_start": res.best.beta_start,
                "gamma_end": res.best.gamma_end,
                "p_s": res.best_p_s,
                "p_s_sampled": res.best_point.p_s_sampled,
                "p_s_exact": res.best_point.p_s_exact,
                "problem_hash": prob.hash(),
                "seed": search.seed,
            });
            println!("{}", serde_json::to_string_pretty(&best)?);
            Ok(())
        }
        Cmd::DepthScaling { problem, search, threshold, inverse_c, instances, p_start, p_step, p_max } => {
            let policy = DepthScalingPolicy {
                threshold: threshold.map_or(Threshold::InverseScaled(inverse_c), Threshold::Absolute),
                instances_per_n: instances,
                p_start,
                p_step,
                p_max,
            };
            let n = problem.n;
            let generator = |_k: usize, seed: u64| ProblemArgs { instance_seed: seed, marked: None, graph: None, ..problem.clone() }.build();
            let provider = |prob: &ProblemInstance, p: usize| search.ramp(prob, p);
            let record = match depth_to_threshold(&generator, n, &provider, &policy, &search.spec(), &search.options()) {
                Ok(res) => json!({"n": n, "family": search.family, "p_required": res.p_required, "threshold": res.threshold, "trace": res.trace}),
                Err(Error::NotReached { threshold, p_max, trace }) => {
                    json!({"n": n, "family": search.family, "p_required": null, "threshold": threshold, "p_max": p_max, "trace": trace})
                }
                Err(e) => return Err(e),
            };
            println!("{}", serde_json::to_string_pretty(&record)?);
            Ok(())
        }
        Cmd::Experiment { config, output, seed } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            if output.is_some() {
                cfg.output = output;
            }
            if let Some(s) = seed {
                cfg.master_seed = s;
            }
            let out = run_experiment(&cfg)?;
            let failed = out.rows.iter().filter(|r| r.error.is_some()).count();
            if cfg.output.is_none() {
                print!("{}", out.csv());
            }
            eprintln!("{} rows, {failed} failed cells", out.rows.len());
            Ok(())
        }
        Cmd::Fit { results, exact } => {
            let rows = rows_from_csv(&std::fs::read_to_string(results)?)?;
            let mut families: Vec<ScheduleFamily> = rows.iter().map(|r| r.family).collect();
            families.sort();
            families.dedup();
            let fits: Vec<_> = families
                .into_iter()
                .map(|f| match scaling_fit(&rows, f, exact) {
                    Ok(fit) => json!({"family": f, "slope": fit.slope, "slope_err": fit.slope_err,
                                      "intercept": fit.intercept, "points": fit.points}),
                    Err(e) => json!({"family": f, "error": e.kind(), "message": e.to_string()}),
                })
                .collect();
            println!("{}", serde_json::to_string_pretty(&fits)?);
            Ok(())
        }
        Cmd::Plot { results, kind, out } => {
            let rows = rows_from_csv(&std::fs::read_to_string(results)?)?;
            let kind = match kind {
                PlotArg::Scaling => PlotKind::Scaling,
                PlotArg::Depth => PlotKind::Depth,
                PlotArg::Noise => PlotKind::Noise,
                PlotArg::Correlation => PlotKind::Correlation,
            };
            emit(out.as_deref(), &plot_rows(&rows, kind)?)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let record = json!({"error": e.kind(), "message": e.to_string()});
            eprintln!("{record}");
            ExitCode::FAILURE
        }
    }
}
