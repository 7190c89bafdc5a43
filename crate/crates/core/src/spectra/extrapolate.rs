//! Large-n gap profiles assembled from small-n calibration data.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::profile::{GapProfile, ProfileSource};
use crate::stats::fit_exponential;
use crate::{Error, Result};

/// `E2 − E0` of `−Σ X_i` as used for the left endpoint.
pub const INITIAL_GAP: f64 = 4.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExtrapolationVariant {
    /// Final gap pinned to 0.
    Degree3,
    /// Final gap from an exponential fit of the calibration minima.
    Er,
}

impl ExtrapolationVariant {
    pub fn label(self) -> &'static str {
        match self {
            ExtrapolationVariant::Degree3 => "degree3",
            ExtrapolationVariant::Er => "er",
        }
    }
}

/// Interior points are the pointwise mean over `profiles`; `g(0)` is fixed at
/// [`INITIAL_GAP`] and `g(1)` depends on the variant.
pub fn extrapolated_gap_profile(
    profiles: &[GapProfile],
    target_n: usize,
    variant: ExtrapolationVariant,
) -> Result<GapProfile> {
    if profiles.len() < 2 {
        return Err(Error::param(format!("need ≥ 2 calibration profiles, got {}", profiles.len())));
    }
    let first = &profiles[0];
    if profiles.iter().any(|p| p.s_grid != first.s_grid || p.gap_kind != first.gap_kind) {
        return Err(Error::param("calibration profiles must share one s-grid and gap kind"));
    }
    let max_n = profiles.iter().map(|p| p.n).max().unwrap_or(0);
    if target_n <= max_n {
        return Err(Error::param(format!("target n = {target_n} must exceed calibration n ≤ {max_n}")));
    }

    let len = first.s_grid.len();
    let count = profiles.len() as f64;
    let mut gaps: Vec<f64> = (0..len).map(|j| profiles.iter().map(|p| p.gaps[j]).sum::<f64>() / count).collect();
    gaps[0] = INITIAL_GAP;
    gaps[len - 1] = match variant {
        ExtrapolationVariant::Degree3 => 0.0,
        ExtrapolationVariant::Er => {
            let mut by_n: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
            for p in profiles {
                by_n.entry(p.n).or_default().push(p.g_min);
            }
            let points: Vec<(f64, f64)> = by_n
                .iter()
                .map(|(&n, v)| (n as f64, v.iter().sum::<f64>() / v.len() as f64))
                .collect();
            let fit = fit_exponential(&points)?;
            fit.predict(target_n as f64)
        }
    };

    let hash = crate::rng::fingerprint(
        profiles.iter().map(|p| p.problem_hash.as_str()).collect::<Vec<_>>().join(",").as_bytes(),
    );
    GapProfile::new(
        first.s_grid.clone(),
        gaps,
        first.gap_kind,
        ProfileSource::Extrapolated,
        target_n,
        hash,
        format!("extrapolated-{}", variant.label()),
    )
}
