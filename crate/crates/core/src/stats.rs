//! Regression and correlation helpers.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// `y ∝ 2^{slope·n}`, fitted as a straight line through `(n, log2 y)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub slope: f64,
    pub slope_err: f64,
    /// `log2` of the prefactor.
    pub intercept: f64,
    /// Points actually used, as `(n, y)`.
    pub points: Vec<(f64, f64)>,
}

impl ScalingFit {
    pub fn predict(&self, n: f64) -> f64 {
        (self.intercept + self.slope * n).exp2()
    }
}

pub fn fit_exponential(points: &[(f64, f64)]) -> Result<ScalingFit> {
    let used: Vec<(f64, f64)> = points.iter().copied().filter(|&(_, y)| y > 0.0 && y.is_finite()).collect();
    if used.len() < points.len() {
        log::warn!("fit_exponential: dropped {} non-positive points", points.len() - used.len());
    }
    if used.len() < 3 {
        return Err(Error::Fit(format!("need ≥ 3 positive points, have {}", used.len())));
    }
    let m = used.len() as f64;
    let xbar = used.iter().map(|p| p.0).sum::<f64>() / m;
    let ybar = used.iter().map(|p| p.1.log2()).sum::<f64>() / m;
    let sxx: f64 = used.iter().map(|p| (p.0 - xbar).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Fit("all points share one abscissa".into()));
    }
    let sxy: f64 = used.iter().map(|p| (p.0 - xbar) * (p.1.log2() - ybar)).sum();
    let slope = sxy / sxx;
    let intercept = ybar - slope * xbar;
    let sse: f64 = used.iter().map(|p| (p.1.log2() - intercept - slope * p.0).powi(2)).sum();
    let slope_err = (sse / (m - 2.0) / sxx).sqrt();
    Ok(ScalingFit { slope, slope_err, intercept, points: used })
}

pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::param(format!("pearson needs two equal series of length ≥ 2, got {} and {}", xs.len(), ys.len())));
    }
    let m = xs.len() as f64;
    let xbar = xs.iter().sum::<f64>() / m;
    let ybar = ys.iter().sum::<f64>() / m;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - xbar) * (y - ybar)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - xbar).powi(2)).sum();
    let syy: f64 = ys.iter().map(|y| (y - ybar).powi(2)).sum();
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::Undefined("correlation of a constant series".into()));
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

pub fn percentage_improvement(p_s_sgir: f64, p_s_lr: f64) -> Result<f64> {
    if !(p_s_lr > 0.0) {
        return Err(Error::Undefined(format!("improvement over a baseline of {p_s_lr}")));
    }
    Ok(100.0 * (p_s_sgir - p_s_lr) / p_s_lr)
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation; 0 for fewer than two values.
pub fn std_dev(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let mu = mean(xs);
    (xs.iter().map(|x| (x - mu).powi(2)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
}
