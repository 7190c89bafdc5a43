use serde::{Deserialize, Serialize};

use super::ScheduleFamily;
use crate::rng::{f64_bytes, fingerprint};
use crate::spectra::{grover_analytic_gap, GapProfile};
use crate::{Error, Result};

pub const DEFAULT_KAPPA: f64 = 2.0;

/// Fine quadrature intervals per output interval in [`rc_shape`].
pub const RC_OVERSAMPLE: usize = 64;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScheduleShape {
    pub s_grid: Vec<f64>,
    pub f_values: Vec<f64>,
    pub kappa: Option<f64>,
    pub family: ScheduleFamily,
    /// Set when the gap weights vanished and the linear shape was substituted.
    pub degenerate: bool,
    /// Fingerprint of whatever the shape was computed from.
    pub source: String,
}

impl ScheduleShape {
    pub fn new(s_grid: Vec<f64>, f_values: Vec<f64>, family: ScheduleFamily, kappa: Option<f64>) -> Result<Self> {
        if s_grid.len() < 2 || s_grid.len() != f_values.len() {
            return Err(Error::param("shape needs ≥ 2 matching grid and value points"));
        }
        if s_grid[0] != 0.0 || *s_grid.last().unwrap() != 1.0 || s_grid.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::param("shape grid must increase strictly from 0 to 1"));
        }
        if f_values[0] != 0.0 || *f_values.last().unwrap() != 1.0 {
            return Err(Error::param("shape must satisfy f(0) = 0 and f(1) = 1"));
        }
        if f_values.windows(2).any(|w| !(w[0] <= w[1])) {
            return Err(Error::param("shape must be non-decreasing"));
        }
        Ok(Self { s_grid, f_values, kappa, family, degenerate: false, source: String::new() })
    }

    /// Linear interpolation; grid points return their stored value exactly.
    pub fn eval(&self, x: f64) -> f64 {
        let x = x.clamp(0.0, 1.0);
        let hi = self.s_grid.partition_point(|&s| s < x);
        if hi < self.s_grid.len() && self.s_grid[hi] == x {
            return self.f_values[hi];
        }
        let lo = hi - 1;
        let (s0, s1) = (self.s_grid[lo], self.s_grid[hi]);
        let (f0, f1) = (self.f_values[lo], self.f_values[hi]);
        f0 + (x - s0) / (s1 - s0) * (f1 - f0)
    }

    pub fn hash(&self) -> String {
        let mut bytes = self.family.label().as_bytes().to_vec();
        for (s, f) in self.s_grid.iter().zip(&self.f_values) {
            bytes.extend(f64_bytes(&[*s]));
            bytes.extend(f64_bytes(&[*f]));
        }
        fingerprint(&bytes)
    }
}

/// `f(s) = s` on the two-point grid.
pub fn linear_shape() -> ScheduleShape {
    ScheduleShape::new(vec![0.0, 1.0], vec![0.0, 1.0], ScheduleFamily::Lr, None).expect("valid linear shape")
}

/// Normalised cumulative trapezoid of `(g − g_min)^κ` over the profile grid.
/// If every weight is zero the linear shape `f(s_j) = s_j` is returned with
/// `degenerate` set.
pub fn sgir_shape(profile: &GapProfile, kappa: f64) -> Result<ScheduleShape> {
    if profile.s_grid.len() < 2 {
        return Err(Error::param("profile needs ≥ 2 points"));
    }
    if !(kappa >= 0.0 && kappa.is_finite()) {
        return Err(Error::param(format!("exponent κ = {kappa} must be finite and ≥ 0")));
    }
    let s = &profile.s_grid;
    let w: Vec<f64> = profile.gaps.iter().map(|g| (g - profile.g_min).max(0.0).powf(kappa)).collect();
    let mut cum = vec![0.0; s.len()];
    for j in 1..s.len() {
        cum[j] = cum[j - 1] + 0.5 * (w[j - 1] + w[j]) * (s[j] - s[j - 1]);
    }
    let total = cum[s.len() - 1];
    let degenerate = !(total > 0.0) || !total.is_finite();
    let f: Vec<f64> = if degenerate {
        s.clone()
    } else {
        let mut f: Vec<f64> = cum.iter().map(|c| c / total).collect();
        *f.last_mut().unwrap() = 1.0;
        f
    };
    let mut shape = ScheduleShape::new(s.clone(), f, ScheduleFamily::Sgir, Some(kappa))?;
    shape.degenerate = degenerate;
    shape.source = profile.problem_hash.clone();
    if degenerate {
        log::warn!("sgir_shape: flat gap profile, falling back to the linear shape");
    }
    Ok(shape)
}

/// Local-adiabatic Grover schedule on `resolution` evenly spaced points:
/// the inverse of `t(u) = ∫_0^u dv / g²(v)`, normalised to `[0,1]`, with `g`
/// the analytic gap for `n` qubits.
pub fn rc_shape(n: usize, resolution: usize) -> Result<ScheduleShape> {
    if resolution < 16 {
        return Err(Error::param(format!("resolution {resolution} below the minimum of 16")));
    }
    if n == 0 || n > 62 {
        return Err(Error::param(format!("qubit count {n} out of range")));
    }
    let fine = (resolution - 1) * RC_OVERSAMPLE;
    let u: Vec<f64> = (0..=fine).map(|i| i as f64 / fine as f64).collect();
    let inv: Vec<f64> = u.iter().map(|&v| grover_analytic_gap(n, v).powi(-2)).collect();
    let mut t = vec![0.0; fine + 1];
    for i in 1..=fine {
        t[i] = t[i - 1] + 0.5 * (inv[i - 1] + inv[i]) * (u[i] - u[i - 1]);
    }
    let total = t[fine];
    t.iter_mut().for_each(|x| *x /= total);

    let s_grid: Vec<f64> = (0..resolution).map(|j| j as f64 / (resolution - 1) as f64).collect();
    let mut f: Vec<f64> = s_grid
        .iter()
        .map(|&tau| {
            let hi = t.partition_point(|&x| x < tau).clamp(1, fine);
            let (t0, t1) = (t[hi - 1], t[hi]);
            let frac = if t1 > t0 { (tau - t0) / (t1 - t0) } else { 0.0 };
            u[hi - 1] + frac * (u[hi] - u[hi - 1])
        })
        .collect();
    f[0] = 0.0;
    f[resolution - 1] = 1.0;
    for j in 1..resolution {
        f[j] = f[j].max(f[j - 1]);
    }
    let mut shape = ScheduleShape::new(s_grid, f, ScheduleFamily::Rc, None)?;
    shape.source = format!("rc-n{n}");
    Ok(shape)
}
