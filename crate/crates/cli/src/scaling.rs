//! Convergence of the mollified velocity: `max |u − u_ε|` over a fixed
//! probe set as `ε → 0`, with a least-squares power-law fit.

use std::fmt::Write as _;
use std::path::Path;

use gsqg_core::velocity::{VelocityField, VelocitySettings};
use gsqg_core::Vec2;

use crate::config::RunConfig;
use crate::presets;
use crate::{write_file, CliError};

/// Rows whose difference is below this multiple of `tol · max|u|` are
/// treated as quadrature-limited and left out of the fit.
const QUADRATURE_FLOOR: f64 = 100.0;

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingRow {
    pub epsilon: f64,
    pub max_diff: Option<f64>,
    /// Why the row is excluded from the fit.
    pub flag: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingStudy {
    pub alpha: f64,
    pub rows: Vec<ScalingRow>,
    pub max_u: f64,
    pub probes: usize,
    pub slope: Option<f64>,
    /// Reason the fit was skipped.
    pub skipped: Option<String>,
}

impl ScalingStudy {
    /// Theoretical exponent `1 − 2α`.
    pub fn expected(&self) -> f64 {
        1.0 - 2.0 * self.alpha
    }

    /// Acceptance band for the fitted slope.
    pub fn band(&self) -> (f64, f64) {
        (self.expected() - 0.1, self.expected() + 0.15)
    }

    pub fn within_band(&self) -> Option<bool> {
        let (lo, hi) = self.band();
        self.slope.map(|s| s >= lo && s <= hi)
    }
}

/// Probe points: `count` nodes spread evenly over all curves, or a fixed
/// handful of points when there are no curves.
fn probe_points(cake: &gsqg_core::Cake, count: usize) -> Vec<(Vec2<f64>, Option<(usize, usize)>)> {
    let all: Vec<(usize, usize)> =
        cake.components().iter().enumerate().flat_map(|(j, c)| (0..c.curve().len()).map(move |i| (j, i))).collect();
    if all.is_empty() {
        return [(0.0, 0.0), (0.5, 0.0), (0.0, 0.5), (1.0, 1.0)].iter().map(|&(x, y)| (Vec2::new(x, y), None)).collect();
    }
    let count = count.min(all.len());
    (0..count)
        .map(|k| {
            let (j, i) = all[k * all.len() / count];
            (cake.components()[j].curve().nodes()[i], Some((j, i)))
        })
        .collect()
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let (lx, ly): (Vec<f64>, Vec<f64>) = points.iter().map(|(x, y)| (x.ln(), y.ln())).unzip();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx > 0.0 {
        Some(sxy / sxx)
    } else {
        None
    }
}

pub fn scaling_study(cfg: &RunConfig) -> Result<ScalingStudy, CliError> {
    let inst = presets::build(cfg, cfg.levels)?;
    let cake = &inst.cake;
    let probes = probe_points(cake, cfg.probes);
    let base = VelocitySettings::<f64> { tol: cfg.tol, ..Default::default() };
    let field = VelocityField::new(cake, base.clone())?;
    let mut exact = Vec::with_capacity(probes.len());
    for (x, node) in &probes {
        exact.push(match node {
            Some((j, i)) => field.u_at_node(*j, *i)?,
            None => field.u_boundary(*x)?,
        });
    }
    let max_u = exact.iter().map(|u| u.norm()).fold(0.0, f64::max);
    let floor = QUADRATURE_FLOOR * cfg.tol * max_u;
    let mut rows = Vec::new();
    for &eps in &cfg.scaling_epsilons {
        let field = VelocityField::new(cake, VelocitySettings { epsilon: eps, ..base.clone() })?;
        let mut worst = 0.0f64;
        let mut failure = None;
        for ((x, _), u) in probes.iter().zip(&exact) {
            match field.u_eps_contour(*x) {
                Ok(v) => worst = worst.max((*u - v).norm()),
                Err(e) => {
                    failure = Some(format!("quadrature failure: {e}"));
                    break;
                }
            }
        }
        let row = match failure {
            Some(flag) => ScalingRow { epsilon: eps, max_diff: None, flag: Some(flag) },
            None if max_u > 0.0 && worst <= floor => {
                ScalingRow { epsilon: eps, max_diff: Some(worst), flag: Some("below the quadrature floor".into()) }
            }
            None => ScalingRow { epsilon: eps, max_diff: Some(worst), flag: None },
        };
        rows.push(row);
    }
    let fit: Vec<(f64, f64)> =
        rows.iter().filter(|r| r.flag.is_none()).filter_map(|r| r.max_diff.map(|d| (r.epsilon, d))).collect();
    let (slope, skipped) = if cake.is_empty() || rows.iter().all(|r| r.max_diff == Some(0.0)) {
        (None, Some("theta vanishes identically: every difference is 0, nothing to fit".to_string()))
    } else if fit.iter().any(|(_, d)| *d <= 0.0) {
        (None, Some("a difference is exactly 0; the power law cannot be fitted".to_string()))
    } else {
        match log_log_slope(&fit) {
            Some(s) => (Some(s), None),
            None => (None, Some(format!("only {} usable row(s); at least two distinct epsilons are needed", fit.len()))),
        }
    };
    Ok(ScalingStudy { alpha: cfg.alpha, rows, max_u, probes: probes.len(), slope, skipped })
}

pub fn render_report(cfg: &RunConfig, st: &ScalingStudy) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "preset = {}", cfg.preset);
    let _ = writeln!(s, "alpha = {}", st.alpha);
    let _ = writeln!(s, "probes = {}", st.probes);
    let _ = writeln!(s, "max_u = {}", st.max_u);
    let _ = writeln!(s, "{:>10} {:>16}  note", "epsilon", "max|u - u_eps|");
    for r in &st.rows {
        let d = r.max_diff.map_or_else(|| "-".to_string(), |v| format!("{v:.6e}"));
        let _ = writeln!(s, "{:>10} {:>16}  {}", r.epsilon, d, r.flag.as_deref().unwrap_or(""));
    }
    let _ = writeln!(s, "expected_slope = {}", st.expected());
    match (st.slope, &st.skipped) {
        (Some(slope), _) => {
            let (lo, hi) = st.band();
            let _ = writeln!(s, "fitted_slope = {slope}");
            let verdict = if st.within_band() == Some(true) { "within" } else { "OUTSIDE" };
            let _ = writeln!(s, "slope {verdict} [{lo}, {hi}]");
        }
        (None, Some(reason)) => {
            let _ = writeln!(s, "fit skipped: {reason}");
        }
        (None, None) => {}
    }
    s
}

fn scaling_csv(st: &ScalingStudy) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["epsilon", "max_diff", "flag"])?;
    for r in &st.rows {
        w.write_record([
            r.epsilon.to_string(),
            r.max_diff.map_or_else(String::new, |d| d.to_string()),
            r.flag.clone().unwrap_or_default(),
        ])?;
    }
    w.into_inner().map_err(|e| CliError::Data(e.to_string()))
}

pub fn write_outputs(cfg: &RunConfig, st: &ScalingStudy, dir: &Path) -> Result<(), CliError> {
    write_file(&dir.join("report.txt"), render_report(cfg, st).as_bytes())?;
    write_file(&dir.join("scaling.csv"), &scaling_csv(st)?)
}
