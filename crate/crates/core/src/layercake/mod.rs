//! Discretized layer-cake representations: a scalar field written as a
//! weighted sum of indicator functions of regions bounded by simple closed
//! curves, plus the regularity functionals computed from them.

mod contour;
mod diagnostics;
mod modulus;
mod radial;

use std::sync::OnceLock;

use thiserror::Error;

use crate::geometry::{ClosedCurve, GeometryError, Winding};
use crate::kernel::AlphaParam;
use crate::scalar::Real;
use crate::vec2::Vec2;

pub use contour::ScalarGrid;
pub use diagnostics::{Diagnostics, LEtaReport, PerCurve, SampleSpec, SelfCell};
pub use modulus::{modulus_admissibility, Admissibility, Modulus};
pub use radial::RadialProfile;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LayerCakeError {
    #[error("component {label}: weight must be finite and nonzero")]
    BadWeight { label: String },
    #[error("component {label}: curve is not simple (segments {first} and {second} cross)")]
    NotSimple { label: String, first: usize, second: usize },
    #[error("component {label}: curve is not positively oriented (signed area {area:e})")]
    NegativeOrientation { label: String, area: f64 },
    #[error("component {label}: {source}")]
    Geometry { label: String, source: GeometryError },
    #[error("profile cannot be inverted at level {level}")]
    NonInvertible { level: f64 },
    #[error("at least {min} levels are required, got {got}")]
    TooFewLevels { min: usize, got: usize },
    #[error("invalid parameter: {0}")]
    BadParameter(String),
    #[error("level {level}: contour leaves the sampled grid")]
    OpenContour { level: f64 },
    #[error("malformed grid: {0}")]
    Grid(String),
    #[error("modulus is not a nondecreasing function vanishing at 0: {0}")]
    NonMonotoneModulus(String),
}

/// One atom of the discretized measure: a region boundary and its weight.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelComponent<T> {
    pub label: String,
    /// Level value `λ` the region belongs to (informational; several
    /// components may share a level).
    pub level: Option<T>,
    weight: T,
    curve: ClosedCurve<T>,
}

impl<T: Real> LevelComponent<T> {
    /// Validates the weight, simplicity and positive orientation.
    pub fn new(
        label: impl Into<String>,
        level: Option<T>,
        weight: T,
        curve: ClosedCurve<T>,
    ) -> Result<Self, LayerCakeError> {
        let label = label.into();
        if !(weight.is_finite() && weight != T::zero()) {
            return Err(LayerCakeError::BadWeight { label });
        }
        let report = curve.is_simple();
        if let Some((first, second)) = report.crossing {
            return Err(LayerCakeError::NotSimple { label, first, second });
        }
        let area = curve.signed_area();
        if !(area > T::zero()) {
            return Err(LayerCakeError::NegativeOrientation { label, area: area.as_f64() });
        }
        Ok(Self { label, level, weight, curve })
    }

    pub fn weight(&self) -> T {
        self.weight
    }

    pub fn curve(&self) -> &ClosedCurve<T> {
        &self.curve
    }

    /// Replaces the curve, re-checking the invariants.
    pub fn with_curve(&self, curve: ClosedCurve<T>) -> Result<Self, LayerCakeError> {
        Self::new(self.label.clone(), self.level, self.weight, curve)
    }

    /// Replaces the curve without validation (used by the stepper, which
    /// runs its own collision checks).
    pub fn with_curve_unchecked(&self, curve: ClosedCurve<T>) -> Self {
        Self { label: self.label.clone(), level: self.level, weight: self.weight, curve }
    }
}

/// `θ` at a point, or both one-sided values when the point is on a curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ThetaValue<T> {
    Interior(T),
    Boundary { inside: T, outside: T },
}

impl<T: Real> ThetaValue<T> {
    pub fn value(self) -> Option<T> {
        match self {
            ThetaValue::Interior(v) => Some(v),
            ThetaValue::Boundary { .. } => None,
        }
    }
}

/// Ordered list of level components with the kernel order `α`.
#[derive(Debug, Clone)]
pub struct LayerCake<T> {
    components: Vec<LevelComponent<T>>,
    alpha: AlphaParam<T>,
    /// Spacing of the level grid when the cake was built from one.
    level_spacing: Option<T>,
    /// Curve-to-curve distance matrix, filled on first use.
    distances: OnceLock<Vec<Vec<T>>>,
}

impl<T: PartialEq> PartialEq for LayerCake<T> {
    fn eq(&self, other: &Self) -> bool {
        self.components == other.components && self.alpha == other.alpha && self.level_spacing == other.level_spacing
    }
}

impl<T: Real> LayerCake<T> {
    pub fn new(components: Vec<LevelComponent<T>>, alpha: AlphaParam<T>) -> Self {
        Self { components, alpha, level_spacing: None, distances: OnceLock::new() }
    }

    pub fn empty(alpha: AlphaParam<T>) -> Self {
        Self::new(Vec::new(), alpha)
    }

    pub fn with_level_spacing(mut self, spacing: Option<T>) -> Self {
        self.level_spacing = spacing;
        self
    }

    pub fn components(&self) -> &[LevelComponent<T>] {
        &self.components
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn alpha(&self) -> &AlphaParam<T> {
        &self.alpha
    }

    pub fn level_spacing(&self) -> Option<T> {
        self.level_spacing
    }

    pub fn curves(&self) -> impl Iterator<Item = &ClosedCurve<T>> {
        self.components.iter().map(|c| &c.curve)
    }

    /// Same weights and labels with new curves (one per component, in order).
    pub fn with_curves_unchecked(&self, curves: Vec<ClosedCurve<T>>) -> Self {
        assert_eq!(curves.len(), self.components.len());
        let components =
            self.components.iter().zip(curves).map(|(c, k)| c.with_curve_unchecked(k)).collect();
        Self { components, alpha: self.alpha, level_spacing: self.level_spacing, distances: OnceLock::new() }
    }

    /// Applies `f` to every node; invariants are re-validated.
    pub fn map_nodes(&self, f: impl Fn(Vec2<T>) -> Vec2<T>) -> Result<Self, LayerCakeError> {
        let mut out = Vec::with_capacity(self.len());
        for c in &self.components {
            let curve = c
                .curve
                .map(&f)
                .map_err(|source| LayerCakeError::Geometry { label: c.label.clone(), source })?;
            out.push(c.with_curve(curve)?);
        }
        Ok(Self { components: out, alpha: self.alpha, level_spacing: self.level_spacing, distances: OnceLock::new() })
    }

    /// `Σ_j μ_j [x inside curve_j]`, summed with compensation so equal
    /// weights add up exactly where representable.
    pub fn evaluate_theta(&self, x: Vec2<T>) -> ThetaValue<T> {
        let mut base = CompensatedSum::default();
        let mut on_boundary = CompensatedSum::default();
        let mut hit = false;
        for c in &self.components {
            match c.curve.winding_number(x) {
                Winding::Count(0) => {}
                Winding::Count(_) => base.add(c.weight),
                Winding::Boundary => {
                    hit = true;
                    on_boundary.add(c.weight);
                }
            }
        }
        if hit {
            let outside = base.value();
            base.add(on_boundary.value());
            ThetaValue::Boundary { inside: base.value(), outside }
        } else {
            ThetaValue::Interior(base.value())
        }
    }

    /// `Σ|μ_j|`.
    pub fn total_variation(&self) -> T {
        self.components.iter().map(|c| c.weight.abs()).sum()
    }

    /// `∫θ = Σ μ_j |Θ_j|` using the spline-enclosed areas.
    pub fn mass(&self) -> T {
        self.components.iter().map(|c| c.weight * c.curve.enclosed_area()).sum()
    }

    /// Sup of `|θ|` bounded by summing weights of the same sign.
    pub fn sup_bound(&self) -> T {
        let pos: T = self.components.iter().filter(|c| c.weight > T::zero()).map(|c| c.weight).sum();
        let neg: T = self.components.iter().filter(|c| c.weight < T::zero()).map(|c| -c.weight).sum();
        pos.max(neg)
    }

    /// Resamples every curve to `n` nodes.
    pub fn resampled(&self, n: usize) -> Result<Self, LayerCakeError> {
        let mut out = Vec::with_capacity(self.len());
        for c in &self.components {
            let curve = c
                .curve
                .resample_arclength(n)
                .map_err(|source| LayerCakeError::Geometry { label: c.label.clone(), source })?;
            out.push(c.with_curve(curve)?);
        }
        Ok(Self { components: out, alpha: self.alpha, level_spacing: self.level_spacing, distances: OnceLock::new() })
    }
}

/// Neumaier compensated summation.
#[derive(Debug, Clone, Copy, Default)]
struct CompensatedSum<T> {
    sum: T,
    comp: T,
}

impl<T: Real> CompensatedSum<T> {
    fn add(&mut self, v: T) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> T {
        self.sum + self.comp
    }
}
