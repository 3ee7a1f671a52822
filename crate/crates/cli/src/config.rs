//! Run configuration: a flat TOML file of `key = value` lines, overridden
//! by command-line flags, validated with every problem reported at once.

use std::path::{Path, PathBuf};

use gsqg_core::evolution::{EvolutionConfig, LipschitzSampling, MonitorConfig, StepperConfig};
use gsqg_core::layercake::{SampleSpec, SelfCell};
use gsqg_core::velocity::{VelocityMode, VelocitySettings};
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Shipped preset names.
pub const PRESETS: [&str; 8] =
    ["disk", "circles", "bump-pow-inner", "bump-pow-outer", "cone-stack", "ellipse", "two-patch-approach", "grid-file"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Profile {
    #[default]
    Standard,
    /// Requires `α ≤ 1/6`, the range where `Q` alone controls continuation.
    Monitor,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModeName {
    #[default]
    Exact,
    MollifiedContour,
    MollifiedArea,
}

impl From<ModeName> for VelocityMode {
    fn from(m: ModeName) -> Self {
        match m {
            ModeName::Exact => VelocityMode::Exact,
            ModeName::MollifiedContour => VelocityMode::MollifiedContour,
            ModeName::MollifiedArea => VelocityMode::MollifiedArea,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SelfCellName {
    Exclude,
    #[default]
    LevelGap,
}

impl From<SelfCellName> for SelfCell {
    fn from(s: SelfCellName) -> Self {
        match s {
            SelfCellName::Exclude => SelfCell::Exclude,
            SelfCellName::LevelGap => SelfCell::LevelGap,
        }
    }
}

/// Every setting of the three commands. Unset optional values resolve to
/// data-dependent defaults at run time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub alpha: f64,
    pub c_alpha: Option<f64>,
    pub profile: Profile,
    pub preset: String,

    // Preset parameters.
    pub beta: f64,
    pub radius: f64,
    pub weight: f64,
    pub radii: Vec<f64>,
    pub weights: Vec<f64>,
    /// Circle centres for `circles`; empty means all at the origin.
    pub centers: Vec<[f64; 2]>,
    pub semi_axes: [f64; 2],
    /// Boundary gap of the two patches in `two-patch-approach`.
    pub separation: f64,
    /// Rate of the external strain pressing the two patches together.
    pub strain: f64,
    pub n_max: usize,
    pub amplitude: f64,
    pub grid_file: Option<PathBuf>,
    /// Levels for `grid-file`; empty means `levels` midpoint levels.
    pub grid_levels: Vec<f64>,

    pub levels: usize,
    pub nodes: usize,
    pub eta: Option<f64>,
    pub self_cell: SelfCellName,
    pub trend_doublings: usize,

    pub velocity: ModeName,
    pub epsilon: f64,
    pub tol: f64,
    pub grid_h: Option<f64>,

    pub dt: Option<f64>,
    pub cfl: f64,
    pub t_end: f64,
    pub resample_every: usize,
    pub max_halvings: usize,

    pub slack: f64,
    pub q_max: f64,
    pub l_max: f64,
    pub min_delta: f64,
    pub max_curvature: f64,

    pub out: PathBuf,
    pub k_diag: usize,
    pub k_snap: usize,
    pub seed: u64,

    pub scaling_epsilons: Vec<f64>,
    pub probes: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            alpha: 0.25,
            c_alpha: None,
            profile: Profile::Standard,
            preset: "disk".into(),
            beta: 0.8,
            radius: 1.0,
            weight: 1.0,
            radii: vec![1.0],
            weights: vec![1.0],
            centers: Vec::new(),
            semi_axes: [1.25, 0.8],
            separation: 0.5,
            strain: 4.0,
            n_max: 4,
            amplitude: 1.0,
            grid_file: None,
            grid_levels: Vec::new(),
            levels: 20,
            nodes: 256,
            eta: None,
            self_cell: SelfCellName::LevelGap,
            trend_doublings: 2,
            velocity: ModeName::Exact,
            epsilon: 0.1,
            tol: 1e-8,
            grid_h: None,
            dt: None,
            cfl: 0.1,
            t_end: 1.0,
            resample_every: 50,
            max_halvings: 8,
            slack: 1.2,
            q_max: 1e6,
            l_max: 1e6,
            min_delta: 1e-3,
            max_curvature: 1e6,
            out: PathBuf::from("out"),
            k_diag: 10,
            k_snap: 50,
            seed: 0,
            scaling_epsilons: vec![0.2, 0.1, 0.05, 0.025],
            probes: 20,
        }
    }
}

/// Flag and `--set` overrides, applied in order after the file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub pairs: Vec<(String, String)>,
}

impl Overrides {
    pub fn push(&mut self, key: &str, raw: impl Into<String>) {
        self.pairs.push((key.to_string(), raw.into()));
    }

    /// Adds a `key=value` assignment.
    pub fn push_assignment(&mut self, text: &str) -> Result<(), String> {
        match text.split_once('=') {
            Some((k, v)) if !k.trim().is_empty() => {
                self.push(k.trim(), v.trim());
                Ok(())
            }
            _ => Err(format!("--set expects KEY=VALUE, got `{text}`")),
        }
    }
}

/// Interprets a raw override as a TOML value; bare words become strings.
fn raw_value(raw: &str) -> toml::Value {
    let doc = format!("v = {raw}");
    match doc.parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").unwrap_or_else(|| toml::Value::String(raw.to_string())),
        Err(_) => toml::Value::String(raw.to_string()),
    }
}

impl RunConfig {
    /// Resolves a configuration from an optional file and overrides.
    pub fn resolve(path: Option<&Path>, overrides: &Overrides) -> Result<Self, CliError> {
        let text = match path {
            Some(p) => std::fs::read_to_string(p)
                .map_err(|e| CliError::Config(vec![format!("cannot read {}: {e}", p.display())]))?,
            None => String::new(),
        };
        Self::resolve_str(&text, overrides)
    }

    pub fn resolve_str(text: &str, overrides: &Overrides) -> Result<Self, CliError> {
        let mut table: toml::Table =
            text.parse().map_err(|e: toml::de::Error| CliError::Config(vec![format!("config file: {}", e.message())]))?;
        for (k, raw) in &overrides.pairs {
            table.insert(k.replace('-', "_"), raw_value(raw));
        }
        let mut problems = Vec::new();
        for (k, v) in &table {
            let mut single = toml::Table::new();
            single.insert(k.clone(), v.clone());
            if let Err(e) = toml::Value::Table(single).try_into::<RunConfig>() {
                problems.push(format!("{k}: {}", e.message().trim()));
            }
        }
        if !problems.is_empty() {
            return Err(CliError::Config(problems));
        }
        let cfg: RunConfig = toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| CliError::Config(vec![e.message().trim().to_string()]))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Range checks; all failures are collected.
    pub fn validate(&self) -> Result<(), CliError> {
        let mut p = Vec::new();
        let mut need = |ok: bool, msg: String| {
            if !ok {
                p.push(msg);
            }
        };
        need(self.alpha > 0.0 && self.alpha < 0.5, format!("alpha = {} must lie in (0, 0.5)", self.alpha));
        if self.profile == Profile::Monitor {
            need(
                self.alpha <= 1.0 / 6.0,
                format!("alpha = {} exceeds 1/6, required by the monitor profile", self.alpha),
            );
        }
        if let Some(c) = self.c_alpha {
            need(c > 0.0 && c.is_finite(), format!("c_alpha = {c} must be positive"));
        }
        need(PRESETS.contains(&self.preset.as_str()), format!("preset `{}` is not one of {}", self.preset, PRESETS.join(", ")));
        need(self.beta > 0.0 && self.beta.is_finite(), format!("beta = {} must be positive", self.beta));
        need(self.radius > 0.0 && self.radius.is_finite(), format!("radius = {} must be positive", self.radius));
        need(self.weight != 0.0 && self.weight.is_finite(), format!("weight = {} must be nonzero", self.weight));
        need(self.radii.iter().all(|r| *r > 0.0 && r.is_finite()), "radii must all be positive".into());
        need(self.weights.iter().all(|w| *w != 0.0 && w.is_finite()), "weights must all be nonzero".into());
        need(
            self.radii.len() == self.weights.len(),
            format!("radii ({}) and weights ({}) differ in length", self.radii.len(), self.weights.len()),
        );
        need(
            self.centers.is_empty() || self.centers.len() == self.radii.len(),
            format!("centers ({}) must be empty or match radii ({})", self.centers.len(), self.radii.len()),
        );
        need(self.semi_axes.iter().all(|a| *a > 0.0 && a.is_finite()), "semi_axes must be positive".into());
        need(self.separation > 0.0 && self.separation.is_finite(), format!("separation = {} must be positive", self.separation));
        need(self.strain >= 0.0 && self.strain.is_finite(), format!("strain = {} must be nonnegative", self.strain));
        need(self.n_max >= 1, "n_max must be at least 1".into());
        need(self.amplitude > 0.0 && self.amplitude.is_finite(), format!("amplitude = {} must be positive", self.amplitude));
        if self.preset == "grid-file" {
            need(self.grid_file.is_some(), "preset grid-file needs grid_file".into());
        }
        need(self.grid_levels.iter().all(|l| *l != 0.0 && l.is_finite()), "grid_levels must be finite and nonzero".into());
        need(self.levels >= 2, format!("levels = {} must be at least 2", self.levels));
        need(self.nodes >= 16, format!("nodes = {} must be at least 16", self.nodes));
        if let Some(e) = self.eta {
            need(e > 0.0 && e.is_finite(), format!("eta = {e} must be positive"));
        }
        need((1..=4).contains(&self.trend_doublings), format!("trend_doublings = {} must lie in 1..=4", self.trend_doublings));
        need(self.epsilon > 0.0 && self.epsilon.is_finite(), format!("epsilon = {} must be positive", self.epsilon));
        need(self.tol > 0.0 && self.tol < 1.0, format!("tol = {} must lie in (0, 1)", self.tol));
        if let Some(h) = self.grid_h {
            need(h > 0.0 && h <= self.epsilon / 4.0, format!("grid_h = {h} must lie in (0, epsilon/4]"));
        }
        if let Some(dt) = self.dt {
            need(dt > 0.0 && dt.is_finite(), format!("dt = {dt} must be positive"));
        }
        need(self.cfl > 0.0 && self.cfl.is_finite(), format!("cfl = {} must be positive", self.cfl));
        need(self.t_end > 0.0 && self.t_end.is_finite(), format!("t_end = {} must be positive", self.t_end));
        need(self.slack >= 1.0, format!("slack = {} must be at least 1", self.slack));
        for (name, v) in [("q_max", self.q_max), ("l_max", self.l_max), ("min_delta", self.min_delta), ("max_curvature", self.max_curvature)] {
            need(v > 0.0, format!("{name} = {v} must be positive"));
        }
        need(self.k_diag >= 1, "k_diag must be at least 1".into());
        need(self.scaling_epsilons.len() >= 2, "scaling_epsilons needs at least two values".into());
        need(self.scaling_epsilons.iter().all(|e| *e > 0.0 && e.is_finite()), "scaling_epsilons must be positive".into());
        need(self.probes >= 1, "probes must be at least 1".into());
        if p.is_empty() {
            Ok(())
        } else {
            Err(CliError::Config(p))
        }
    }

    pub fn velocity_settings(&self) -> VelocitySettings<f64> {
        VelocitySettings {
            mode: self.velocity.into(),
            epsilon: self.epsilon,
            tol: self.tol,
            grid_h: self.grid_h,
            ..Default::default()
        }
    }

    pub fn evolution_config(&self) -> EvolutionConfig<f64> {
        EvolutionConfig {
            stepper: StepperConfig {
                velocity: self.velocity_settings(),
                dt: self.dt,
                cfl: self.cfl,
                resample_every: self.resample_every,
                max_halvings: self.max_halvings,
                ..Default::default()
            },
            monitor: MonitorConfig {
                lipschitz: LipschitzSampling { seed: self.seed, ..Default::default() },
                slack: self.slack,
                q_max: self.q_max,
                l_max: self.l_max,
                min_delta: self.min_delta,
                max_curvature: self.max_curvature,
                k_diag: self.k_diag,
                eta: self.eta,
                samples: SampleSpec::default(),
                self_cell: self.self_cell.into(),
            },
            k_snap: self.k_snap,
        }
    }

    /// The resolved configuration as a config file.
    pub fn echo(&self) -> String {
        let body = toml::to_string(self).expect("configuration serializes");
        format!("# resolved configuration; unset keys use data-dependent defaults\n{body}")
    }
}
