//! Radially symmetric profiles and the disjoint cone stack.

use crate::geometry::ClosedCurve;
use crate::kernel::AlphaParam;
use crate::scalar::Real;
use crate::vec2::Vec2;

use super::{LayerCake, LayerCakeError, LevelComponent};

/// Radially decreasing profiles `θ(x) = φ(|x|)` with `sup θ = φ(0) = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RadialProfile<T> {
    /// `[1 − |x|^β]_+`.
    BumpPowInner { beta: T },
    /// `[1 − |x|]_+^β`.
    BumpPowOuter { beta: T },
    /// `exp(−|x|²)`.
    Gaussian,
}

impl<T: Real> RadialProfile<T> {
    pub fn sup(&self) -> T {
        T::one()
    }

    fn check(&self) -> Result<(), LayerCakeError> {
        match *self {
            RadialProfile::BumpPowInner { beta } | RadialProfile::BumpPowOuter { beta } => {
                if beta > T::zero() && beta.is_finite() {
                    Ok(())
                } else {
                    Err(LayerCakeError::BadParameter(format!("beta = {beta} must be positive")))
                }
            }
            RadialProfile::Gaussian => Ok(()),
        }
    }

    pub fn value(&self, r: T) -> T {
        match *self {
            RadialProfile::BumpPowInner { beta } => (T::one() - r.powf(beta)).max(T::zero()),
            RadialProfile::BumpPowOuter { beta } => (T::one() - r).max(T::zero()).powf(beta),
            RadialProfile::Gaussian => (-r * r).exp(),
        }
    }

    /// Radius of the super-level set `{θ > λ}` for `0 < λ < sup`.
    pub fn inverse(&self, level: T) -> Result<T, LayerCakeError> {
        let bad = || LayerCakeError::NonInvertible { level: level.as_f64() };
        if !(level > T::zero() && level < self.sup()) {
            return Err(bad());
        }
        let r = match *self {
            RadialProfile::BumpPowInner { beta } => (T::one() - level).powf(T::one() / beta),
            RadialProfile::BumpPowOuter { beta } => T::one() - level.powf(T::one() / beta),
            RadialProfile::Gaussian => (-level.ln()).sqrt(),
        };
        if r > T::zero() && r.is_finite() {
            Ok(r)
        } else {
            Err(bad())
        }
    }
}

impl<T: Real> LayerCake<T> {
    /// `levels` concentric circles at the midpoint levels
    /// `λ_j = (j − ½) sup θ / M`, each carrying weight `sup θ / M`.
    pub fn from_radial_profile(
        profile: RadialProfile<T>,
        levels: usize,
        nodes: usize,
        alpha: AlphaParam<T>,
    ) -> Result<Self, LayerCakeError> {
        profile.check()?;
        if levels < 2 {
            return Err(LayerCakeError::TooFewLevels { min: 2, got: levels });
        }
        let dl = profile.sup() / T::from_usize(levels);
        let mut comps = Vec::with_capacity(levels);
        for j in 1..=levels {
            let level = (T::from_usize(j) - T::half()) * dl;
            let r = profile.inverse(level)?;
            let label = format!("level{j}");
            let curve = ClosedCurve::circle(Vec2::zero(), r, nodes)
                .map_err(|source| LayerCakeError::Geometry { label: label.clone(), source })?;
            comps.push(LevelComponent::new(label, Some(level), dl, curve)?);
        }
        Ok(LayerCake::new(comps, alpha).with_level_spacing(Some(dl)))
    }

    /// Disjoint cones `a · 3^{1−2αn} [1 − 3ⁿ|x − (2^{1−n}, 0)|]_+` for
    /// `n = 1..=n_max`, sliced at `levels` global midpoint levels. Each
    /// cone that rises above a level contributes its own circle.
    pub fn cone_stack(
        amplitude: T,
        n_max: usize,
        levels: usize,
        nodes: usize,
        alpha: AlphaParam<T>,
    ) -> Result<Self, LayerCakeError> {
        if !(amplitude > T::zero() && amplitude.is_finite()) {
            return Err(LayerCakeError::BadParameter(format!("amplitude = {amplitude} must be positive")));
        }
        if n_max < 1 {
            return Err(LayerCakeError::BadParameter("n_max must be at least 1".into()));
        }
        if levels < 2 {
            return Err(LayerCakeError::TooFewLevels { min: 2, got: levels });
        }
        let three = T::lit(3.0);
        let cones: Vec<(Vec2<T>, T, T)> = (1..=n_max)
            .map(|n| {
                let nf = T::from_usize(n);
                let center = Vec2::new(T::two().powf(T::one() - nf), T::zero());
                let radius = three.powf(-nf);
                let height = amplitude * three.powf(T::one() - alpha.two_alpha() * nf);
                (center, radius, height)
            })
            .collect();
        let sup = cones.iter().fold(T::zero(), |m, c| m.max(c.2));
        let dl = sup / T::from_usize(levels);
        let mut comps = Vec::new();
        for j in 1..=levels {
            let level = (T::from_usize(j) - T::half()) * dl;
            for (n, &(center, radius, height)) in cones.iter().enumerate() {
                if level >= height {
                    continue;
                }
                let r = radius * (T::one() - level / height);
                let label = format!("level{j}.cone{}", n + 1);
                let curve = ClosedCurve::circle(center, r, nodes)
                    .map_err(|source| LayerCakeError::Geometry { label: label.clone(), source })?;
                comps.push(LevelComponent::new(label, Some(level), dl, curve)?);
            }
        }
        Ok(LayerCake::new(comps, alpha).with_level_spacing(Some(dl)))
    }
}
