//! Contour quadrature of `∮ F(x − z(τ)) z′(τ) dτ` over spline panels.
//!
//! Far panels get a Gauss–Legendre rule whose order drops with distance;
//! panels near the target are split at the closest point and refined
//! adaptively; when the target is a node of the curve and the kernel is
//! singular, the two panels touching it use a Gauss–Jacobi rule that
//! absorbs the `|τ|^{−2α}` factor.

use crate::geometry::{closest_param, point_segment_dist, ClosedCurve};
use crate::quadrature::{adaptive, GaussRule, QuadValue};
use crate::scalar::Real;
use crate::spline::PeriodicSpline;
use crate::vec2::Vec2;

use super::VelocityError;

/// Spline panels of one curve with conservative proximity data.
#[derive(Debug, Clone)]
pub struct PreparedCurve<T> {
    pub spline: PeriodicSpline<T>,
    chords: Vec<(Vec2<T>, Vec2<T>)>,
    /// Upper bound on how far a panel strays from its chord.
    bulge: Vec<T>,
}

impl<T: Real> PreparedCurve<T> {
    pub fn new(curve: &ClosedCurve<T>) -> Self {
        let spline = curve.spline();
        let n = curve.len();
        let mut chords = Vec::with_capacity(n);
        let mut bulge = Vec::with_capacity(n);
        for s in 0..n {
            let (a, b) = curve.segment(s);
            let h = spline.width(s);
            let mut dev = T::zero();
            for k in 1..8 {
                let p = spline.eval(s, h * T::from_usize(k) / T::lit(8.0)).0;
                dev = dev.max(point_segment_dist(p, a, b));
            }
            chords.push((a, b));
            bulge.push(dev * T::lit(1.5));
        }
        Self { spline, chords, bulge }
    }

    pub fn len(&self) -> usize {
        self.chords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chords.is_empty()
    }
}

/// Quadrature controls shared by all contour integrals.
#[derive(Debug, Clone)]
pub struct ContourRules<T> {
    pub far: GaussRule<T>,
    /// Cheaper rules beyond `8h` and `32h`, where the `(h/2d)^{2n}` error
    /// factor is below `10⁻¹⁰`.
    pub distant: GaussRule<T>,
    pub remote: GaussRule<T>,
    pub endpoint: GaussRule<T>,
    pub tol: T,
    pub max_depth: usize,
    /// Panels closer than `near_factor × panel width + extra` are refined.
    pub near_factor: T,
}

impl<T: Real> ContourRules<T> {
    pub fn new(two_alpha: T, tol: T, max_depth: usize) -> Self {
        Self {
            far: GaussRule::legendre(8),
            distant: GaussRule::legendre(4),
            remote: GaussRule::legendre(3),
            endpoint: GaussRule::jacobi_left(16, -two_alpha.as_f64()),
            tol,
            max_depth,
            near_factor: T::two(),
        }
    }
}

/// `Σ_panels ∫ f(x − S(τ), S′(τ)) dτ`.
///
/// `node` marks `x` as node `node` of this curve; `singular` says whether
/// `f` blows up like `|d|^{−2α}` at `d = 0` (bare kernel) or is smooth
/// (mollified kernels). `extra` widens the near zone, e.g. by `ε`.
#[allow(clippy::too_many_arguments)]
pub fn integrate<T, V, F>(
    curve: &PreparedCurve<T>,
    rules: &ContourRules<T>,
    x: Vec2<T>,
    node: Option<usize>,
    singular: bool,
    extra: T,
    f: &F,
) -> Result<V, VelocityError>
where
    T: Real,
    V: QuadValue<T>,
    F: Fn(Vec2<T>, Vec2<T>) -> V,
{
    let n = curve.len();
    let sp = &curve.spline;
    let g = |s: usize| {
        move |t: T| {
            let (p, d1, _) = sp.eval(s, t);
            f(x - p, d1)
        }
    };
    let mut total = V::zero();
    for s in 0..n {
        let h = sp.width(s);
        if singular {
            if let Some(i) = node {
                if s == i {
                    total = total + rules.endpoint.integrate_endpoint_singular(T::zero(), h, false, g(s));
                    continue;
                }
                if (s + 1) % n == i {
                    total = total + rules.endpoint.integrate_endpoint_singular(T::zero(), h, true, g(s));
                    continue;
                }
            }
        }
        let (a, b) = curve.chords[s];
        let d = point_segment_dist(x, a, b) - curve.bulge[s];
        if d > rules.near_factor * h + extra {
            let rule = if d > T::lit(32.0) * h + extra {
                &rules.remote
            } else if d > T::lit(8.0) * h + extra {
                &rules.distant
            } else {
                &rules.far
            };
            total = total + rule.integrate(T::zero(), h, g(s));
            continue;
        }
        // Near panel: split at the closest point and refine each side.
        let split = h * closest_param(x, a, b);
        let mut gs = g(s);
        let scale = |lo: T, hi: T| {
            let at = |t: T| {
                let (p, d1, _) = sp.eval(s, t);
                f(x - p, d1).magnitude()
            };
            let peak = at(lo).max(at((lo + hi) * T::half())).max(at(hi));
            let peak = if peak.is_finite() { peak } else { at((lo + hi) * T::half()) };
            (hi - lo) * peak.max(T::min_positive_value())
        };
        let pieces = [(T::zero(), split), (split, h)];
        for (lo, hi) in pieces {
            if hi - lo <= h * T::epsilon() {
                continue;
            }
            let v = adaptive(&rules.far, lo, hi, rules.tol, rules.max_depth, &mut gs, &scale).map_err(|e| {
                VelocityError::Quadrature { achieved: e.achieved, depth: e.depth }
            })?;
            total = total + v;
        }
    }
    Ok(total)
}
