//! Diagnostics without evolution, with a refinement trend over the level
//! count.

use std::fmt::Write as _;
use std::path::Path;

use gsqg_core::layercake::{modulus_admissibility, Admissibility, Modulus, SampleSpec, SelfCell};
use gsqg_core::Diagnostics;

use crate::config::RunConfig;
use crate::presets::{self, Instance};
use crate::{write_file, CliError};

/// Per-doubling growth at or above which a functional counts as diverging.
pub const DIVERGING_RATIO: f64 = 1.5;
/// Per-doubling growth at or below which it counts as saturated.
pub const SATURATED_RATIO: f64 = 1.05;

#[derive(Debug, Clone, PartialEq)]
pub struct TrendRow {
    pub levels: usize,
    pub eta: f64,
    pub l_eta: f64,
    pub r_eta: f64,
    pub q: f64,
    /// Ratio to the previous row.
    pub l_ratio: Option<f64>,
    pub r_ratio: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Trend {
    Diverging,
    Saturated,
    Inconclusive,
}

impl Trend {
    /// Classifies by the last per-doubling ratio.
    pub fn classify(last_ratio: Option<f64>) -> Self {
        match last_ratio {
            Some(r) if r >= DIVERGING_RATIO => Trend::Diverging,
            Some(r) if r <= SATURATED_RATIO => Trend::Saturated,
            _ => Trend::Inconclusive,
        }
    }

    fn name(self) -> &'static str {
        match self {
            Trend::Diverging => "diverging",
            Trend::Saturated => "saturated",
            Trend::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Debug, Clone)]
pub struct DiagnoseReport {
    pub instance: Instance,
    pub eta: f64,
    pub diagnostics: Diagnostics,
    pub modulus: Option<(Modulus, Admissibility)>,
    /// Empty when the preset does not depend on the level count.
    pub trend: Vec<TrendRow>,
}

impl DiagnoseReport {
    pub fn l_trend(&self) -> Trend {
        Trend::classify(self.trend.last().and_then(|r| r.l_ratio))
    }

    pub fn r_trend(&self) -> Trend {
        Trend::classify(self.trend.last().and_then(|r| r.r_ratio))
    }
}

fn eta_for(cfg: &RunConfig, inst: &Instance) -> f64 {
    cfg.eta.unwrap_or_else(|| inst.cake.default_eta())
}

/// Trend table over `M, 2M, …, 2^k M` levels.
pub fn trend_table(cfg: &RunConfig) -> Result<Vec<TrendRow>, CliError> {
    let spec = SampleSpec::default();
    let self_cell: SelfCell = cfg.self_cell.into();
    let mut rows: Vec<TrendRow> = Vec::new();
    for k in 0..=cfg.trend_doublings {
        let levels = cfg.levels << k;
        let inst = presets::build(cfg, levels)?;
        let eta = eta_for(cfg, &inst);
        let l_eta = inst.cake.diag_l_eta(eta, &spec).value;
        let r_eta = inst.cake.diag_r_eta(eta, self_cell);
        let prev = rows.last();
        rows.push(TrendRow {
            levels,
            eta,
            l_eta,
            r_eta,
            q: inst.cake.diag_q(),
            l_ratio: prev.map(|p| l_eta / p.l_eta),
            r_ratio: prev.map(|p| r_eta / p.r_eta),
        });
    }
    Ok(rows)
}

/// Computes the report without writing anything.
pub fn diagnose(cfg: &RunConfig) -> Result<DiagnoseReport, CliError> {
    let instance = presets::build(cfg, cfg.levels)?;
    let eta = eta_for(cfg, &instance);
    let diagnostics = instance.cake.diagnostics(eta, &SampleSpec::default(), cfg.self_cell.into());
    let modulus = match cfg.preset.as_str() {
        "bump-pow-inner" | "bump-pow-outer" => {
            let rho = Modulus::Power { beta: cfg.beta.min(1.0) };
            let adm = modulus_admissibility(rho, instance.cake.alpha()).map_err(|e| CliError::Data(e.to_string()))?;
            Some((rho, adm))
        }
        _ => None,
    };
    let trend = if instance.layered { trend_table(cfg)? } else { Vec::new() };
    Ok(DiagnoseReport { instance, eta, diagnostics, modulus, trend })
}

fn ratio(r: Option<f64>) -> String {
    r.map_or_else(|| "-".to_string(), |v| format!("{v:.4}"))
}

pub fn render_report(cfg: &RunConfig, rep: &DiagnoseReport) -> String {
    let d = &rep.diagnostics;
    let h = &rep.instance.header;
    let mut s = String::new();
    let _ = writeln!(s, "preset = {}", h.preset);
    let _ = writeln!(s, "alpha = {}", h.alpha);
    let _ = writeln!(s, "c_alpha = {}", h.c_alpha);
    let _ = writeln!(s, "levels = {}", cfg.levels);
    let _ = writeln!(s, "nodes = {}", cfg.nodes);
    let _ = writeln!(s, "curves = {}", rep.instance.cake.len());
    let _ = writeln!(s, "eta = {}", rep.eta);
    let _ = writeln!(s, "L_eta = {}", d.l_eta);
    let _ = writeln!(s, "R_eta = {}", d.r_eta);
    let _ = writeln!(s, "Q = {}", d.q);
    let _ = writeln!(s, "Lambda = {}", d.lambda);
    let _ = writeln!(s, "Sigma = {}", d.sigma);
    let _ = writeln!(s, "min_delta = {}", d.min_pairwise_delta);
    let _ = writeln!(s, "max_kappa = {}", d.max_kappa);
    match &rep.modulus {
        Some((rho, Admissibility::Finite(v))) => {
            let _ = writeln!(s, "modulus {rho:?}: admissibility integral = {v}");
        }
        Some((rho, Admissibility::Divergent { partial, shells })) => {
            let _ = writeln!(s, "modulus {rho:?}: admissibility integral diverges (partial {partial} over {shells} shells)");
        }
        None => {
            let _ = writeln!(s, "modulus: not applicable to this preset");
        }
    }
    if rep.trend.is_empty() {
        let _ = writeln!(s, "trend: not applicable (the preset does not depend on the level count)");
    } else {
        let _ = writeln!(s, "\ntrend table");
        let _ = writeln!(s, "{:>6} {:>12} {:>14} {:>8} {:>14} {:>8} {:>12}", "M", "eta", "L_eta", "ratio", "R_eta", "ratio", "Q");
        for r in &rep.trend {
            let _ = writeln!(
                s,
                "{:>6} {:>12.4e} {:>14.6} {:>8} {:>14.6} {:>8} {:>12.6}",
                r.levels,
                r.eta,
                r.l_eta,
                ratio(r.l_ratio),
                r.r_eta,
                ratio(r.r_ratio),
                r.q
            );
        }
        let _ = writeln!(s, "L_eta trend: {}", rep.l_trend().name());
        let _ = writeln!(s, "R_eta trend: {}", rep.r_trend().name());
    }
    s
}

fn per_curve_csv(rep: &DiagnoseReport) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["label", "level", "weight", "nodes", "length", "area", "h2_seminorm_sq"])?;
    for (c, p) in rep.instance.cake.components().iter().zip(&rep.diagnostics.per_curve) {
        w.write_record([
            c.label.clone(),
            c.level.map_or_else(String::new, |l| l.to_string()),
            c.weight().to_string(),
            c.curve().len().to_string(),
            p.length.to_string(),
            p.area.to_string(),
            p.h2_seminorm_sq.to_string(),
        ])?;
    }
    w.into_inner().map_err(|e| CliError::Data(e.to_string()))
}

fn trend_csv(rep: &DiagnoseReport) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["levels", "eta", "L_eta", "L_ratio", "R_eta", "R_ratio", "Q"])?;
    for r in &rep.trend {
        let opt = |v: Option<f64>| v.map_or_else(String::new, |x| x.to_string());
        w.write_record([
            r.levels.to_string(),
            r.eta.to_string(),
            r.l_eta.to_string(),
            opt(r.l_ratio),
            r.r_eta.to_string(),
            opt(r.r_ratio),
            r.q.to_string(),
        ])?;
    }
    w.into_inner().map_err(|e| CliError::Data(e.to_string()))
}

/// Writes `report.txt`, `diagnostics.csv`, `trend.csv` (layered presets)
/// and `config.echo` into `dir`.
pub fn write_outputs(cfg: &RunConfig, rep: &DiagnoseReport, dir: &Path) -> Result<(), CliError> {
    write_file(&dir.join("report.txt"), render_report(cfg, rep).as_bytes())?;
    write_file(&dir.join("diagnostics.csv"), &per_curve_csv(rep)?)?;
    if !rep.trend.is_empty() {
        write_file(&dir.join("trend.csv"), &trend_csv(rep)?)?;
    }
    Ok(())
}
