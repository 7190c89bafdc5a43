//! Minimal static SVG charts.

use std::collections::BTreeMap;
use std::fmt::Write;

use serde::{Deserialize, Serialize};

use super::{scaling_fit, improvement_vs_gap, ResultRow};
use crate::stats::{mean, std_dev};
use crate::{Error, Result};

const W: f64 = 640.0;
const H: f64 = 420.0;
const MARGIN: (f64, f64, f64, f64) = (70.0, 150.0, 40.0, 55.0); // left, right, top, bottom
const COLOURS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    /// Half-width of the shaded band at each point.
    pub spread: Option<Vec<f64>>,
    /// `y = 2^(slope·x + intercept)`, drawn over the series' x-range.
    pub fit: Option<(f64, f64)>,
    /// Markers only, no connecting line.
    pub scatter: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PlotKind {
    /// Mean `p_s` against n per family, log-y, with fits and ±1 sd bands.
    Scaling,
    /// Depth needed to reach the threshold against n.
    Depth,
    /// Mean noisy (and noiseless) `p_s` against p.
    Noise,
    /// SGIR improvement over LR against `g_min`.
    Correlation,
}

impl std::str::FromStr for PlotKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        serde_json::from_value(serde_json::Value::String(s.to_string()))
            .map_err(|_| Error::Parse(format!("unknown plot kind `{s}`")))
    }
}

fn grouped(rows: &[&ResultRow], key: impl Fn(&ResultRow) -> f64, val: impl Fn(&ResultRow) -> Option<f64>) -> Series {
    let mut acc: BTreeMap<u64, (f64, Vec<f64>)> = BTreeMap::new();
    for r in rows {
        if let Some(v) = val(r) {
            let k = key(r);
            acc.entry(k.to_bits()).or_insert((k, Vec::new())).1.push(v);
        }
    }
    let mut pts: Vec<(f64, Vec<f64>)> = acc.into_values().collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    Series {
        points: pts.iter().map(|(x, v)| (*x, mean(v))).collect(),
        spread: Some(pts.iter().map(|(_, v)| if v.len() > 1 { std_dev(v) } else { 0.0 }).collect()),
        ..Series::default()
    }
}

/// Build the standard chart for a result table.
pub fn plot_rows(rows: &[ResultRow], kind: PlotKind) -> Result<String> {
    let ok: Vec<&ResultRow> = rows.iter().filter(|r| r.error.is_none()).collect();
    if ok.is_empty() {
        return Err(Error::param("no successful rows to plot"));
    }
    let mut families: Vec<_> = ok.iter().map(|r| r.family).collect();
    families.sort_by_key(|f| f.label());
    families.dedup();
    let title = ok[0].experiment.to_string();
    let by = |f| ok.iter().copied().filter(|r| r.family == f).collect::<Vec<_>>();
    match kind {
        PlotKind::Scaling => {
            let series = families
                .iter()
                .map(|&f| {
                    let fam_rows = by(f);
                    let mut s = grouped(&fam_rows, |r| r.n as f64, |r| r.p_s.or(r.p_s_exact));
                    s.label = f.to_string();
                    let owned: Vec<ResultRow> = fam_rows.into_iter().cloned().collect();
                    if let Ok(fit) = scaling_fit(&owned, f, owned.iter().all(|r| r.p_s.is_none())) {
                        s.label = format!("{f} (slope {:.3})", fit.slope);
                        s.fit = Some((fit.slope, fit.intercept));
                    }
                    s
                })
                .collect::<Vec<_>>();
            emit_plot(&series, &title, "n", "P_s", true)
        }
        PlotKind::Depth => {
            let series = families
                .iter()
                .map(|&f| Series {
                    label: f.to_string(),
                    spread: None,
                    ..grouped(&by(f), |r| r.n as f64, |r| r.depth_required.map(|d| d as f64))
                })
                .collect::<Vec<_>>();
            emit_plot(&series, &title, "n", "p required", false)
        }
        PlotKind::Noise => {
            let mut series = Vec::new();
            for &f in &families {
                series.push(Series { label: format!("{f} noisy"), ..grouped(&by(f), |r| r.p as f64, |r| r.p_s_noisy) });
                series.push(Series { label: format!("{f} noiseless"), ..grouped(&by(f), |r| r.p as f64, |r| r.p_s_exact) });
            }
            series.retain(|s| !s.points.is_empty());
            emit_plot(&series, &title, "p", "P_s", false)
        }
        PlotKind::Correlation => {
            let owned: Vec<ResultRow> = ok.into_iter().cloned().collect();
            let pts = improvement_vs_gap(&owned, false);
            let s = Series { label: "sgir vs lr".into(), points: pts, scatter: true, ..Series::default() };
            emit_plot(&[s], &title, "g_min", "improvement (%)", false)
        }
    }
}

fn nice_ticks(lo: f64, hi: f64) -> Vec<f64> {
    let span = (hi - lo).max(1e-12);
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|s| span / s <= 6.0).unwrap_or(10.0 * mag);
    let mut t = (lo / step).ceil() * step;
    let mut out = Vec::new();
    while t <= hi + 1e-9 * span {
        out.push(if t.abs() < 1e-12 * step { 0.0 } else { t });
        t += step;
    }
    out
}

fn fmt_tick(v: f64) -> String {
    if v != 0.0 && (v.abs() < 1e-2 || v.abs() >= 1e4) {
        format!("{v:.0e}")
    } else {
        let s = format!("{v:.3}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Render series into an SVG document. With `log_y`, non-positive values are
/// dropped with a warning.
pub fn emit_plot(series: &[Series], title: &str, x_label: &str, y_label: &str, log_y: bool) -> Result<String> {
    let mut series: Vec<Series> = series.to_vec();
    if log_y {
        for s in &mut series {
            let keep: Vec<bool> = s.points.iter().map(|p| p.1 > 0.0 && p.1.is_finite()).collect();
            let dropped = keep.iter().filter(|k| !**k).count();
            if dropped > 0 {
                log::warn!("series `{}`: dropped {dropped} non-positive point(s) on a log axis", s.label);
            }
            let mut it = keep.iter();
            s.points.retain(|_| *it.next().unwrap());
            if let Some(sp) = &mut s.spread {
                let mut it = keep.iter();
                sp.retain(|_| *it.next().unwrap());
            }
        }
    }
    series.retain(|s| !s.points.is_empty());
    if series.is_empty() {
        return Err(Error::param("nothing to plot"));
    }
    let ty = |y: f64| if log_y { y.log10() } else { y };
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for s in &series {
        for (i, &(x, y)) in s.points.iter().enumerate() {
            let sd = s.spread.as_ref().map_or(0.0, |v| v[i]);
            let lo = if log_y && y - sd <= 0.0 { y } else { y - sd };
            x0 = x0.min(x);
            x1 = x1.max(x);
            y0 = y0.min(ty(lo));
            y1 = y1.max(ty(y + sd));
        }
    }
    if x1 - x0 < 1e-12 {
        x0 -= 0.5;
        x1 += 0.5;
    }
    if y1 - y0 < 1e-12 {
        y0 -= 0.5;
        y1 += 0.5;
    }
    let pad = 0.05 * (y1 - y0);
    let (y0, y1) = (y0 - pad, y1 + pad);
    let (l, r, t, b) = MARGIN;
    let px = |x: f64| l + (x - x0) / (x1 - x0) * (W - l - r);
    let py = |v: f64| H - b - (v - y0) / (y1 - y0) * (H - t - b);

    let mut svg = String::new();
    let _ = writeln!(svg, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#);
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(svg, r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#, (l + W - r) / 2.0, esc(title));
    let _ = writeln!(svg, r#"<g class="axes" stroke="black"><line x1="{l}" y1="{}" x2="{}" y2="{}"/><line x1="{l}" y1="{t}" x2="{l}" y2="{}"/></g>"#, H - b, W - r, H - b, H - b);
    for xt in nice_ticks(x0, x1) {
        let _ = writeln!(svg, r#"<text x="{:.1}" y="{}" text-anchor="middle">{}</text>"#, px(xt), H - b + 16.0, fmt_tick(xt));
    }
    let yticks: Vec<(f64, f64)> = if log_y {
        (y0.ceil() as i64..=y1.floor() as i64).map(|e| (e as f64, 10f64.powi(e as i32))).collect()
    } else {
        nice_ticks(y0, y1).into_iter().map(|v| (v, v)).collect()
    };
    for (pos, label) in yticks {
        let _ = writeln!(svg, r#"<line x1="{}" y1="{:.1}" x2="{l}" y2="{:.1}" stroke="black"/><text x="{}" y="{:.1}" text-anchor="end">{}</text>"#, l - 4.0, py(pos), py(pos), l - 6.0, py(pos) + 4.0, fmt_tick(label));
    }
    let _ = writeln!(svg, r#"<text class="xlabel" x="{}" y="{}" text-anchor="middle">{}</text>"#, (l + W - r) / 2.0, H - 15.0, esc(x_label));
    let _ = writeln!(svg, r#"<text class="ylabel" x="18" y="{}" text-anchor="middle" transform="rotate(-90 18 {})">{}</text>"#, (t + H - b) / 2.0, (t + H - b) / 2.0, esc(y_label));

    for (i, s) in series.iter().enumerate() {
        let c = COLOURS[i % COLOURS.len()];
        if let Some(sp) = &s.spread {
            if sp.iter().any(|v| *v > 0.0) && s.points.len() > 1 {
                let upper = s.points.iter().zip(sp).map(|(&(x, y), d)| (px(x), py(ty(y + d))));
                let lower = s.points.iter().zip(sp).rev().map(|(&(x, y), d)| {
                    let lo = if log_y && y - d <= 0.0 { y } else { y - d };
                    (px(x), py(ty(lo)))
                });
                let pts: Vec<String> = upper.chain(lower).map(|(a, b)| format!("{a:.1},{b:.1}")).collect();
                let _ = writeln!(svg, r#"<polygon class="band" points="{}" fill="{c}" fill-opacity="0.15" stroke="none"/>"#, pts.join(" "));
            }
        }
        let pts: Vec<String> = s.points.iter().map(|&(x, y)| format!("{:.1},{:.1}", px(x), py(ty(y)))).collect();
        if !s.scatter {
            let _ = writeln!(svg, r#"<polyline class="series" points="{}" fill="none" stroke="{c}" stroke-width="2"/>"#, pts.join(" "));
        }
        for p in &pts {
            let (a, b) = p.split_once(',').unwrap();
            let _ = writeln!(svg, r#"<circle cx="{a}" cy="{b}" r="3" fill="{c}"/>"#);
        }
        if let Some((slope, icpt)) = s.fit {
            let xa = s.points.first().unwrap().0;
            let xb = s.points.last().unwrap().0;
            let f = |x: f64| 2f64.powf(slope * x + icpt);
            let _ = writeln!(svg, r#"<line class="fit" x1="{:.1}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="{c}" stroke-dasharray="5,4"/>"#, px(xa), py(ty(f(xa))), px(xb), py(ty(f(xb))));
        }
        let ly = t + 10.0 + 18.0 * i as f64;
        let _ = writeln!(svg, r#"<rect x="{}" y="{}" width="12" height="12" fill="{c}"/><text x="{}" y="{}">{}</text>"#, W - r + 10.0, ly - 10.0, W - r + 26.0, ly, esc(&s.label));
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}
