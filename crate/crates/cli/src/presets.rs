//! Initial data for every shipped preset.

use gsqg_core::io::{read_grid_file, CakeHeader};
use gsqg_core::kernel::AlphaParam;
use gsqg_core::layercake::{LayerCake, LevelComponent, RadialProfile};
use gsqg_core::velocity::ExternalField;
use gsqg_core::{Cake, ClosedCurve, Vec2};
use serde_json::json;

use crate::config::RunConfig;
use crate::CliError;

/// A preset instantiated at a given number of levels.
#[derive(Debug, Clone)]
pub struct Instance {
    pub cake: Cake,
    pub header: CakeHeader,
    /// Prescribed field added to the induced velocity.
    pub external: ExternalField<f64>,
    /// Whether the level count `M` changes the data (trend tables apply).
    pub layered: bool,
}

pub fn alpha_param(cfg: &RunConfig) -> Result<AlphaParam<f64>, CliError> {
    let p = match cfg.c_alpha {
        Some(c) => AlphaParam::with_c_alpha(cfg.alpha, c),
        None => AlphaParam::new(cfg.alpha),
    };
    p.map_err(|e| CliError::Config(vec![e.to_string()]))
}

fn data_err(e: impl std::fmt::Display) -> CliError {
    CliError::Data(e.to_string())
}

fn single(label: &str, weight: f64, curve: ClosedCurve<f64>) -> Result<LevelComponent<f64>, CliError> {
    LevelComponent::new(label, None, weight, curve).map_err(data_err)
}

/// Builds the preset of `cfg` with `levels` level sets.
pub fn build(cfg: &RunConfig, levels: usize) -> Result<Instance, CliError> {
    let alpha = alpha_param(cfg)?;
    let n = cfg.nodes;
    let mut external = ExternalField::None;
    let mut layered = false;
    let (cake, parameters) = match cfg.preset.as_str() {
        "disk" => {
            let c = ClosedCurve::circle(Vec2::zero(), cfg.radius, n).map_err(data_err)?;
            let cake = LayerCake::new(vec![single("disk", cfg.weight, c)?], alpha);
            (cake, json!({ "radius": cfg.radius, "weight": cfg.weight }))
        }
        "circles" => {
            let mut comps = Vec::new();
            for (k, (r, w)) in cfg.radii.iter().zip(&cfg.weights).enumerate() {
                let center = cfg.centers.get(k).map_or(Vec2::zero(), |c| Vec2::new(c[0], c[1]));
                let c = ClosedCurve::circle(center, *r, n).map_err(data_err)?;
                comps.push(single(&format!("circle{}", k + 1), *w, c)?);
            }
            let cake = LayerCake::new(comps, alpha);
            if cake.len() >= 2 && !(cake.min_pairwise_delta() > 0.0) {
                return Err(CliError::Data("circles touch or cross".into()));
            }
            (cake, json!({ "radii": cfg.radii, "weights": cfg.weights, "centers": cfg.centers }))
        }
        "bump-pow-inner" | "bump-pow-outer" => {
            layered = true;
            let profile = if cfg.preset == "bump-pow-inner" {
                RadialProfile::BumpPowInner { beta: cfg.beta }
            } else {
                RadialProfile::BumpPowOuter { beta: cfg.beta }
            };
            let cake = LayerCake::from_radial_profile(profile, levels, n, alpha).map_err(data_err)?;
            (cake, json!({ "beta": cfg.beta, "levels": levels }))
        }
        "cone-stack" => {
            layered = true;
            let cake = LayerCake::cone_stack(cfg.amplitude, cfg.n_max, levels, n, alpha).map_err(data_err)?;
            (cake, json!({ "amplitude": cfg.amplitude, "n_max": cfg.n_max, "levels": levels }))
        }
        "ellipse" => {
            let [a, b] = cfg.semi_axes;
            let c = ClosedCurve::ellipse(Vec2::zero(), a, b, n)
                .and_then(|c| c.resample_arclength(n))
                .map_err(data_err)?;
            let cake = LayerCake::new(vec![single("ellipse", cfg.weight, c)?], alpha);
            (cake, json!({ "semi_axes": cfg.semi_axes, "weight": cfg.weight }))
        }
        "two-patch-approach" => {
            let offset = cfg.radius + 0.5 * cfg.separation;
            let left = ClosedCurve::circle(Vec2::new(-offset, 0.0), cfg.radius, n).map_err(data_err)?;
            let right = ClosedCurve::circle(Vec2::new(offset, 0.0), cfg.radius, n).map_err(data_err)?;
            let comps = vec![single("left", cfg.weight, left)?, single("right", -cfg.weight, right)?];
            external = ExternalField::Strain { rate: cfg.strain };
            (
                LayerCake::new(comps, alpha),
                json!({ "radius": cfg.radius, "separation": cfg.separation, "strain": cfg.strain, "weight": cfg.weight }),
            )
        }
        "grid-file" => {
            layered = cfg.grid_levels.is_empty();
            let path = cfg.grid_file.as_ref().ok_or_else(|| CliError::Config(vec!["grid_file is not set".into()]))?;
            let grid = read_grid_file::<f64>(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
            let lv = if cfg.grid_levels.is_empty() { midpoint_levels(grid.min(), grid.max(), levels) } else { cfg.grid_levels.clone() };
            let cake = LayerCake::from_scalar_grid(&grid, &lv, Some(n), alpha).map_err(data_err)?;
            (cake, json!({ "grid_file": path, "levels": lv }))
        }
        other => return Err(CliError::Config(vec![format!("unknown preset `{other}`")])),
    };
    let header = CakeHeader {
        alpha: cfg.alpha,
        c_alpha: cake.alpha().c_alpha(),
        eta_default: cake.default_eta(),
        preset: cfg.preset.clone(),
        parameters,
    };
    Ok(Instance { cake, header, external, layered })
}

/// `M` midpoint levels spanning `(0, max]` and, if the data go negative,
/// `M` more spanning `[min, 0)`.
pub fn midpoint_levels(min: f64, max: f64, m: usize) -> Vec<f64> {
    let mut out = Vec::new();
    for extreme in [max, min] {
        if extreme != 0.0 {
            out.extend((1..=m).map(|j| (j as f64 - 0.5) * extreme / m as f64));
        }
    }
    out
}
