//! Gap profiles `g(s_j)` on the grid `s_j = j/p`.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::dense::dense_spectrum;
use super::grover::{grover_analytic_gap, grover_symmetric_spectrum};
use super::lanczos::{lanczos_with, LanczosOptions};
use super::operator::{build_operator, OperatorKind};
use crate::problems::ProblemInstance;
use crate::rng::derive_seed;
use crate::{Error, Result};

/// Gaps this far below zero are round-off and clamp to 0.
pub const GAP_CLAMP: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GapKind {
    /// `E1 − E0`
    FirstExcited,
    /// `E2 − E0`
    SecondExcited,
}

impl GapKind {
    pub fn for_problem(problem: &ProblemInstance) -> Self {
        match problem {
            ProblemInstance::Grover(_) => GapKind::FirstExcited,
            ProblemInstance::Mis(_) => GapKind::SecondExcited,
        }
    }

    /// Index of the excited level compared against the ground state.
    pub fn level(self) -> usize {
        match self {
            GapKind::FirstExcited => 1,
            GapKind::SecondExcited => 2,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProfileSource {
    Exact,
    Extrapolated,
    Analytic,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpectrumMethod {
    Dense,
    Lanczos,
    /// Grover only: Hamming-weight sector of the mixer interpolation.
    Symmetric,
    /// Grover only: closed-form gap of the projector interpolation.
    Analytic,
}

macro_rules! labelled {
    ($ty:ty { $($variant:ident => $label:literal),* $(,)? }) => {
        impl $ty {
            pub fn label(self) -> &'static str {
                match self { $(<$ty>::$variant => $label),* }
            }
        }
        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.label())
            }
        }
        impl FromStr for $ty {
            type Err = Error;
            fn from_str(s: &str) -> Result<Self> {
                match s {
                    $($label => Ok(<$ty>::$variant),)*
                    other => Err(Error::Parse(format!("unknown {} `{other}`", stringify!($ty)))),
                }
            }
        }
    };
}

labelled!(GapKind { FirstExcited => "first-excited", SecondExcited => "second-excited" });
labelled!(ProfileSource { Exact => "exact", Extrapolated => "extrapolated", Analytic => "analytic" });
labelled!(SpectrumMethod { Dense => "dense", Lanczos => "lanczos", Symmetric => "symmetric", Analytic => "analytic" });

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapProfile {
    pub s_grid: Vec<f64>,
    pub gaps: Vec<f64>,
    pub gap_kind: GapKind,
    pub g_min: f64,
    pub source: ProfileSource,
    pub n: usize,
    pub problem_hash: String,
    /// Solver label, or how the profile was assembled when extrapolated.
    pub method: String,
}

impl GapProfile {
    pub fn new(
        s_grid: Vec<f64>,
        gaps: Vec<f64>,
        gap_kind: GapKind,
        source: ProfileSource,
        n: usize,
        problem_hash: String,
        method: String,
    ) -> Result<Self> {
        if s_grid.len() != gaps.len() || s_grid.len() < 2 {
            return Err(Error::param(format!(
                "profile needs ≥ 2 matching points, got {} s-values and {} gaps",
                s_grid.len(),
                gaps.len()
            )));
        }
        if s_grid.windows(2).any(|w| !(w[0] < w[1])) || s_grid[0] != 0.0 || *s_grid.last().unwrap() != 1.0 {
            return Err(Error::param("s-grid must increase strictly from 0 to 1"));
        }
        if let Some(g) = gaps.iter().find(|g| !(**g >= 0.0)) {
            return Err(Error::param(format!("gap {g} is negative or not finite")));
        }
        let g_min = gaps.iter().copied().fold(f64::INFINITY, f64::min);
        Ok(Self { s_grid, gaps, gap_kind, g_min, source, n, problem_hash, method })
    }

    pub fn p(&self) -> usize {
        self.s_grid.len() - 1
    }

    /// Grid point where the minimum is attained (first one on ties).
    pub fn argmin(&self) -> usize {
        self.gaps.iter().position(|&g| g == self.g_min).unwrap_or(0)
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!("# n={},problem={},method={}\n", self.n, self.problem_hash, self.method);
        out.push_str("s,gap,gap_kind,source\n");
        for (s, g) in self.s_grid.iter().zip(&self.gaps) {
            out.push_str(&format!("{s},{g},{},{}\n", self.gap_kind, self.source));
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| Error::Parse("empty profile".into()))?;
        let meta = header
            .strip_prefix('#')
            .ok_or_else(|| Error::Parse("profile must start with a `# n=…` header".into()))?;
        let (mut n, mut hash, mut method) = (None, String::new(), String::new());
        for field in meta.trim().split(',') {
            match field.split_once('=') {
                Some(("n", v)) => n = Some(v.parse().map_err(|_| Error::Parse(format!("bad n `{v}`")))?),
                Some(("problem", v)) => hash = v.to_string(),
                Some(("method", v)) => method = v.to_string(),
                _ => {}
            }
        }
        let n = n.ok_or_else(|| Error::Parse("header lacks n".into()))?;
        match lines.next() {
            Some(l) if l.trim() == "s,gap,gap_kind,source" => {}
            other => return Err(Error::Parse(format!("unexpected column header {other:?}"))),
        }
        let (mut s_grid, mut gaps) = (Vec::new(), Vec::new());
        let (mut kind, mut source) = (None, None);
        for line in lines {
            let cols: Vec<&str> = line.split(',').map(str::trim).collect();
            if cols.len() != 4 {
                return Err(Error::Parse(format!("expected 4 columns in `{line}`")));
            }
            let num = |v: &str| v.parse::<f64>().map_err(|_| Error::Parse(format!("bad number `{v}`")));
            s_grid.push(num(cols[0])?);
            gaps.push(num(cols[1])?);
            kind = Some(cols[2].parse::<GapKind>()?);
            source = Some(cols[3].parse::<ProfileSource>()?);
        }
        let kind = kind.ok_or_else(|| Error::Parse("profile has no rows".into()))?;
        Self::new(s_grid, gaps, kind, source.unwrap_or(ProfileSource::Exact), n, hash, method)
    }
}

/// Tuning for [`gap_profile_with`].
#[derive(Clone, Debug)]
pub struct ProfileOptions {
    pub lanczos: LanczosOptions,
}

impl Default for ProfileOptions {
    fn default() -> Self {
        Self { lanczos: LanczosOptions::default() }
    }
}

pub fn gap_profile(problem: &ProblemInstance, p: usize, method: SpectrumMethod) -> Result<GapProfile> {
    gap_profile_with(problem, p, method, &ProfileOptions::default())
}

pub fn gap_profile_with(
    problem: &ProblemInstance,
    p: usize,
    method: SpectrumMethod,
    opts: &ProfileOptions,
) -> Result<GapProfile> {
    if p == 0 {
        return Err(Error::param("profile depth must be ≥ 1"));
    }
    let kind = GapKind::for_problem(problem);
    let is_grover = matches!(problem, ProblemInstance::Grover(_));
    if matches!(method, SpectrumMethod::Symmetric | SpectrumMethod::Analytic) && !is_grover {
        return Err(Error::Unsupported(format!("{method} spectra exist for Grover only")));
    }
    let levels = kind.level() + 1;
    if levels > problem.dim() {
        return Err(Error::param(format!("{levels} levels requested from a {}-dim space", problem.dim())));
    }
    let s_grid: Vec<f64> = (0..=p).map(|j| j as f64 / p as f64).collect();
    let base = match method {
        SpectrumMethod::Dense | SpectrumMethod::Lanczos => {
            Some(build_operator(problem, 0.0, OperatorKind::MixerInterpolation)?)
        }
        _ => None,
    };
    let hash = problem.hash();

    let gap_at = |(j, &s): (usize, &f64)| -> Result<f64> {
        let raw = match method {
            SpectrumMethod::Analytic => grover_analytic_gap(problem.n(), s),
            SpectrumMethod::Symmetric => {
                let ev = grover_symmetric_spectrum(problem.n(), s)?;
                ev[1] - ev[0]
            }
            SpectrumMethod::Dense => {
                let op = base.as_ref().unwrap().at(s)?;
                let ev = dense_spectrum(&op, levels)?;
                ev[levels - 1] - ev[0]
            }
            SpectrumMethod::Lanczos => {
                let op = base.as_ref().unwrap().at(s)?;
                let lz = LanczosOptions { seed: derive_seed(opts.lanczos.seed, &[&hash, &j]), ..opts.lanczos.clone() };
                let ev = lanczos_with(|x, y| op.apply(x, y), op.dim(), levels, &lz)?;
                ev[levels - 1] - ev[0]
            }
        };
        clamp_gap(raw)
    };
    let gaps = s_grid
        .par_iter()
        .enumerate()
        .map(|(j, s)| gap_at((j, s)).map_err(|e| Error::AtPoint { s: *s, source: Box::new(e) }))
        .collect::<Result<Vec<f64>>>()?;

    let source = if method == SpectrumMethod::Analytic { ProfileSource::Analytic } else { ProfileSource::Exact };
    GapProfile::new(s_grid, gaps, kind, source, problem.n(), hash, method.label().to_string())
}

fn clamp_gap(g: f64) -> Result<f64> {
    if g >= 0.0 {
        Ok(g)
    } else if g >= -GAP_CLAMP {
        Ok(0.0)
    } else {
        Err(Error::Undefined(format!("negative gap {g}: eigenvalues out of order")))
    }
}
