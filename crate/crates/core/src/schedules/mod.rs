//! Schedule families and their rescaling into per-layer QAOA angles.
//!
//! A shape is a monotone map `f: [0,1] → [0,1]` sampled on a grid. Every
//! family goes through the same kernel
//! `β_i = β_start·(1 − f(i/p))`, `γ_i = γ_end·f((i+1)/p)`,
//! so the linear shape reproduces the linear ramp bit for bit.

mod shape;

pub use shape::{linear_shape, rc_shape, sgir_shape, ScheduleShape, DEFAULT_KAPPA, RC_OVERSAMPLE};

use std::fmt;
use std::str::FromStr;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::rng::{f64_bytes, fingerprint, rng_from_seed};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScheduleFamily {
    Lr,
    Rc,
    Sgir,
    Random,
}

impl ScheduleFamily {
    pub fn label(self) -> &'static str {
        match self {
            ScheduleFamily::Lr => "lr",
            ScheduleFamily::Rc => "rc",
            ScheduleFamily::Sgir => "sgir",
            ScheduleFamily::Random => "random",
        }
    }
}

impl fmt::Display for ScheduleFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for ScheduleFamily {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "lr" => Ok(ScheduleFamily::Lr),
            "rc" => Ok(ScheduleFamily::Rc),
            "sgir" => Ok(ScheduleFamily::Sgir),
            "random" => Ok(ScheduleFamily::Random),
            other => Err(Error::Parse(format!("unknown schedule family `{other}`"))),
        }
    }
}

/// The two numbers that fix a ramp: `β_start = Δ_β` and `γ_end = Δ_γ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Endpoints {
    pub beta_start: f64,
    pub gamma_end: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub betas: Vec<f64>,
    pub gammas: Vec<f64>,
    pub family: ScheduleFamily,
    /// `None` for the random family, which has no endpoints.
    pub endpoints: Option<Endpoints>,
    pub kappa: Option<f64>,
    /// Fingerprint of the shape the angles were derived from.
    pub shape_ref: String,
}

impl Schedule {
    pub fn new(betas: Vec<f64>, gammas: Vec<f64>, family: ScheduleFamily) -> Result<Self> {
        if betas.is_empty() || betas.len() != gammas.len() {
            return Err(Error::param(format!(
                "schedule needs equal non-empty angle lists, got {} betas and {} gammas",
                betas.len(),
                gammas.len()
            )));
        }
        if betas.iter().chain(&gammas).any(|a| !a.is_finite()) {
            return Err(Error::param("schedule angles must be finite"));
        }
        Ok(Self { betas, gammas, family, endpoints: None, kappa: None, shape_ref: String::new() })
    }

    pub fn p(&self) -> usize {
        self.betas.len()
    }

    pub fn hash(&self) -> String {
        let mut bytes = Vec::new();
        for (b, g) in self.betas.iter().zip(&self.gammas) {
            bytes.extend(f64_bytes(&[*b]));
            bytes.extend(f64_bytes(&[*g]));
        }
        fingerprint(&bytes)
    }

    pub fn to_csv(&self) -> String {
        let (b, g) = match self.endpoints {
            Some(e) => (e.beta_start.to_string(), e.gamma_end.to_string()),
            None => (String::new(), String::new()),
        };
        let kappa = self.kappa.map(|k| k.to_string()).unwrap_or_default();
        let mut out = format!(
            "# family={},p={},beta_start={b},gamma_end={g},kappa={kappa},shape={}\n",
            self.family,
            self.p(),
            self.shape_ref
        );
        out.push_str("i,beta,gamma\n");
        for (i, (b, g)) in self.betas.iter().zip(&self.gammas).enumerate() {
            out.push_str(&format!("{i},{b},{g}\n"));
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut family = ScheduleFamily::Lr;
        let (mut beta_start, mut gamma_end, mut kappa, mut shape_ref) = (None, None, None, String::new());
        let (mut betas, mut gammas) = (Vec::new(), Vec::new());
        let num = |v: &str| v.trim().parse::<f64>().map_err(|_| Error::Parse(format!("bad number `{v}`")));
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
            if let Some(meta) = line.strip_prefix('#') {
                for field in meta.trim().split(',') {
                    match field.split_once('=') {
                        Some(("family", v)) => family = v.parse()?,
                        Some(("beta_start", v)) if !v.is_empty() => beta_start = Some(num(v)?),
                        Some(("gamma_end", v)) if !v.is_empty() => gamma_end = Some(num(v)?),
                        Some(("kappa", v)) if !v.is_empty() => kappa = Some(num(v)?),
                        Some(("shape", v)) => shape_ref = v.to_string(),
                        _ => {}
                    }
                }
                continue;
            }
            if line == "i,beta,gamma" {
                continue;
            }
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != 3 {
                return Err(Error::Parse(format!("expected `i,beta,gamma`, got `{line}`")));
            }
            betas.push(num(cols[1])?);
            gammas.push(num(cols[2])?);
        }
        let mut s = Self::new(betas, gammas, family)?;
        if let (Some(beta_start), Some(gamma_end)) = (beta_start, gamma_end) {
            s.endpoints = Some(Endpoints { beta_start, gamma_end });
        }
        s.kappa = kappa;
        s.shape_ref = shape_ref;
        Ok(s)
    }
}

/// Shared ramp kernel. `f` must map 0 to 0 and 1 to 1.
fn ramp(p: usize, f: impl Fn(f64) -> f64, beta_start: f64, gamma_end: f64) -> (Vec<f64>, Vec<f64>) {
    let pf = p as f64;
    let betas = (0..p).map(|i| beta_start * (1.0 - f(i as f64 / pf))).collect();
    let gammas = (0..p).map(|i| gamma_end * f((i + 1) as f64 / pf)).collect();
    (betas, gammas)
}

fn check_ramp(p: usize, beta_start: f64, gamma_end: f64) -> Result<()> {
    if p == 0 {
        return Err(Error::param("depth must be ≥ 1"));
    }
    if !beta_start.is_finite() || !gamma_end.is_finite() {
        return Err(Error::param("ramp endpoints must be finite"));
    }
    Ok(())
}

/// `β_i = (1 − i/p)·Δ_β`, `γ_i = ((i+1)/p)·Δ_γ`.
pub fn lr_schedule(p: usize, delta_beta: f64, delta_gamma: f64) -> Result<Schedule> {
    check_ramp(p, delta_beta, delta_gamma)?;
    let (betas, gammas) = ramp(p, |x| x, delta_beta, delta_gamma);
    let mut s = Schedule::new(betas, gammas, ScheduleFamily::Lr)?;
    s.endpoints = Some(Endpoints { beta_start: delta_beta, gamma_end: delta_gamma });
    s.shape_ref = linear_shape().hash();
    Ok(s)
}

pub fn shape_to_schedule(shape: &ScheduleShape, p: usize, beta_start: f64, gamma_end: f64) -> Result<Schedule> {
    check_ramp(p, beta_start, gamma_end)?;
    let (betas, gammas) = ramp(p, |x| shape.eval(x), beta_start, gamma_end);
    let mut s = Schedule::new(betas, gammas, shape.family)?;
    s.endpoints = Some(Endpoints { beta_start, gamma_end });
    s.kappa = shape.kappa;
    s.shape_ref = shape.hash();
    Ok(s)
}

/// Independent log-uniform angles: `β_i ∈ beta_range`, `γ_i ∈ gamma_range`
/// (ranges in radians, both ends positive).
pub fn random_shape(p: usize, seed: u64, beta_range: (f64, f64), gamma_range: (f64, f64)) -> Result<Schedule> {
    if p == 0 {
        return Err(Error::param("depth must be ≥ 1"));
    }
    for (lo, hi) in [beta_range, gamma_range] {
        if !(lo > 0.0 && lo <= hi && hi.is_finite()) {
            return Err(Error::param(format!("log-uniform range [{lo}, {hi}] must satisfy 0 < lo ≤ hi")));
        }
    }
    let mut rng = rng_from_seed(seed);
    let mut draw = |(lo, hi): (f64, f64)| {
        if lo == hi {
            lo
        } else {
            let (a, b) = (lo.log10(), hi.log10());
            10f64.powf(a + (b - a) * rng.random::<f64>())
        }
    };
    let mut betas = Vec::with_capacity(p);
    let mut gammas = Vec::with_capacity(p);
    for _ in 0..p {
        betas.push(draw(beta_range));
        gammas.push(draw(gamma_range));
    }
    let mut s = Schedule::new(betas, gammas, ScheduleFamily::Random)?;
    s.shape_ref = format!("seed-{seed}");
    Ok(s)
}
