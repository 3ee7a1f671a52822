//! Regularity functionals of a layer cake: `L^η`, `R^η`, `Q`, `Λ`, `Σ`.

use rayon::prelude::*;

use crate::geometry::CurveIndex;
use crate::scalar::Real;
use crate::vec2::Vec2;

use super::LayerCake;

/// Where the supremum over `x` in `L^η` is sampled.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleSpec {
    /// Offsets `±η, ±2η, ±ℓ/N` along the node normals.
    pub normal_offsets: bool,
    /// Side of the background grid over the padded bounding box (0 = none).
    pub background: usize,
    pub centroids: bool,
}

impl Default for SampleSpec {
    fn default() -> Self {
        Self { normal_offsets: true, background: 32, centroids: true }
    }
}

/// Treatment of the `λ′ = λ` term in `R^η`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SelfCell {
    /// Drop the diagonal entirely.
    #[default]
    Exclude,
    /// Replace the diagonal by the integral over the curve's own level
    /// cell, assuming neighbouring level curves recede linearly in the
    /// level: `|μ| 2^{2α} / ((1 − 2α)(g + η)^{2α})`, with `g` the mean
    /// distance to the adjacent-level curves. Without it, a discrete sum
    /// misses the part of the continuum integral closest to each curve.
    LevelGap,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LEtaReport<T> {
    pub value: T,
    /// Sample point where the maximum was attained.
    pub at: Vec2<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerCurve<T> {
    pub label: String,
    pub length: T,
    pub area: T,
    pub h2_seminorm_sq: T,
}

/// Snapshot of every monitored functional.
#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostics<T> {
    pub l_eta: T,
    pub r_eta: T,
    pub q: T,
    pub lambda: T,
    pub sigma: T,
    /// `+∞` for fewer than two curves.
    pub min_pairwise_delta: T,
    pub max_kappa: T,
    pub per_curve: Vec<PerCurve<T>>,
    /// Filled in by the time stepper.
    pub lipschitz_u_est: Option<T>,
}

impl<T: Real> LayerCake<T> {
    /// `min((Δλ)^{1/(2α)}, min_j ℓ_j/N_j, δ_min)` with `Δλ` the level
    /// spacing (or the smallest `|μ_j|` when no level grid is known) and
    /// `δ_min` the smallest distance between two curves: the finest scale
    /// the discretization resolves, so refining the levels refines `η`.
    pub fn default_eta(&self) -> T {
        if self.is_empty() {
            return T::one();
        }
        let spacing = self
            .level_spacing
            .unwrap_or_else(|| self.components.iter().map(|c| c.weight().abs()).fold(T::infinity(), T::min));
        let from_levels = spacing.powf(T::one() / self.alpha.two_alpha());
        let resolution = self
            .curves()
            .map(|c| c.length() / T::from_usize(c.len()))
            .fold(T::infinity(), T::min);
        let gap = self.min_pairwise_delta();
        let eta = from_levels.min(resolution);
        if gap > T::zero() {
            eta.min(gap)
        } else {
            eta
        }
    }

    /// `Σ_j |μ_j| / (d(x, curve_j) + η)^{2α}` using prebuilt indices.
    fn l_sum(&self, indices: &[CurveIndex<'_, T>], x: Vec2<T>, eta: T) -> T {
        let two_a = self.alpha.two_alpha();
        self.components
            .iter()
            .zip(indices)
            .map(|(c, idx)| c.weight().abs() / (idx.dist_point(x) + eta).powf(two_a))
            .sum()
    }

    /// The `L^η` supremand at a single point.
    pub fn l_eta_at(&self, x: Vec2<T>, eta: T) -> T {
        let indices: Vec<_> = self.curves().map(CurveIndex::new).collect();
        self.l_sum(&indices, x, eta)
    }

    /// Points at which the `L^η` supremum is sampled.
    pub fn l_eta_samples(&self, eta: T, spec: &SampleSpec) -> Vec<Vec2<T>> {
        let mut pts = Vec::new();
        for c in self.curves() {
            pts.extend_from_slice(c.nodes());
            if spec.normal_offsets {
                let h = c.length() / T::from_usize(c.len());
                let offsets = [eta, eta * T::two(), h];
                for (p, n) in c.nodes().iter().zip(c.node_normals()) {
                    for d in offsets {
                        pts.push(*p + n.scale(d));
                        pts.push(*p - n.scale(d));
                    }
                }
            }
            if spec.centroids {
                pts.push(c.centroid());
            }
        }
        if spec.background > 1 && !self.is_empty() {
            let bb = self.curves().map(|c| c.bbox()).reduce(|a, b| a.union(b)).expect("nonempty");
            let pad = (bb.max - bb.min).scale(T::lit(0.1));
            let (lo, hi) = (bb.min - pad, bb.max + pad);
            let n = spec.background;
            for j in 0..n {
                for i in 0..n {
                    let fx = T::from_usize(i) / T::from_usize(n - 1);
                    let fy = T::from_usize(j) / T::from_usize(n - 1);
                    pts.push(Vec2::new(lo.x + (hi.x - lo.x) * fx, lo.y + (hi.y - lo.y) * fy));
                }
            }
        }
        pts
    }

    /// `max_x Σ_j |μ_j| / (d(x, curve_j) + η)^{2α}` over a structured sample.
    pub fn diag_l_eta(&self, eta: T, spec: &SampleSpec) -> LEtaReport<T> {
        assert!(eta > T::zero(), "L^eta needs eta > 0");
        if self.is_empty() {
            return LEtaReport { value: T::zero(), at: Vec2::zero() };
        }
        let indices: Vec<_> = self.curves().map(CurveIndex::new).collect();
        let samples = self.l_eta_samples(eta, spec);
        samples
            .par_iter()
            .map(|&x| LEtaReport { value: self.l_sum(&indices, x, eta), at: x })
            .reduce(
                || LEtaReport { value: T::neg_infinity(), at: Vec2::zero() },
                |a, b| if b.value > a.value { b } else { a },
            )
    }

    /// Symmetric matrix of curve-to-curve distances (diagonal zero),
    /// computed once per cake.
    pub fn pairwise_distances(&self) -> &[Vec<T>] {
        self.distances.get_or_init(|| {
            let m = self.len();
            let indices: Vec<_> = self.curves().map(CurveIndex::new).collect();
            let pairs: Vec<(usize, usize)> = (0..m).flat_map(|i| (i + 1..m).map(move |j| (i, j))).collect();
            let dists: Vec<T> = pairs.par_iter().map(|&(i, j)| indices[i].dist_curve(&indices[j])).collect();
            let mut out = vec![vec![T::zero(); m]; m];
            for (&(i, j), d) in pairs.iter().zip(dists) {
                out[i][j] = d;
                out[j][i] = d;
            }
            out
        })
    }

    pub fn min_pairwise_delta(&self) -> T {
        self.pairwise_distances()
            .iter()
            .enumerate()
            .flat_map(|(i, row)| row.iter().skip(i + 1).copied())
            .fold(T::infinity(), T::min)
    }

    /// `max_λ ℓ_λ^{1/2} Σ_{λ′≠λ} |μ_λ′| / (ℓ_λ′^{1/2} (Δ(λ, λ′) + η)^{2α})`.
    /// Touching curves with `η = 0` give `+∞`.
    pub fn diag_r_eta(&self, eta: T, self_cell: SelfCell) -> T {
        self.diag_r_eta_with(self.pairwise_distances(), eta, self_cell)
    }

    pub(crate) fn diag_r_eta_with(&self, dist: &[Vec<T>], eta: T, self_cell: SelfCell) -> T {
        let m = self.len();
        let two_a = self.alpha.two_alpha();
        let lens: Vec<T> = self.curves().map(|c| c.length()).collect();
        let mut best = T::zero();
        for i in 0..m {
            let mut sum = T::zero();
            for j in 0..m {
                if j == i {
                    continue;
                }
                let w = self.components[j].weight().abs();
                sum += w / (lens[j].sqrt() * (dist[i][j] + eta).powf(two_a));
            }
            if self_cell == SelfCell::LevelGap {
                if let Some(g) = self.adjacent_level_gap(i, dist) {
                    let w = self.components[i].weight().abs();
                    let cell = w * T::two().powf(two_a) / ((T::one() - two_a) * (g + eta).powf(two_a));
                    sum += cell / lens[i].sqrt();
                }
            }
            best = best.max(lens[i].sqrt() * sum);
        }
        best
    }

    /// Mean distance from component `i` to the nearest curve on each
    /// neighbouring level value (below and above).
    fn adjacent_level_gap(&self, i: usize, dist: &[Vec<T>]) -> Option<T> {
        let li = self.components[i].level?;
        let mut below: Option<T> = None;
        let mut above: Option<T> = None;
        for c in &self.components {
            if let Some(l) = c.level {
                if l < li && below.is_none_or(|b| l > b) {
                    below = Some(l);
                }
                if l > li && above.is_none_or(|a| l < a) {
                    above = Some(l);
                }
            }
        }
        let nearest = |level: T| {
            self.components
                .iter()
                .enumerate()
                .filter(|(_, c)| c.level == Some(level))
                .map(|(j, _)| dist[i][j])
                .fold(T::infinity(), T::min)
        };
        let gaps: Vec<T> = [below, above].into_iter().flatten().map(nearest).collect();
        if gaps.is_empty() {
            return None;
        }
        Some(gaps.iter().copied().sum::<T>() / T::from_usize(gaps.len()))
    }

    /// `max_λ ℓ(z^λ) ‖z^λ‖²_{Ḣ²}`.
    pub fn diag_q(&self) -> T {
        self.curves().map(|c| c.length() * c.h2_seminorm_sq()).fold(T::zero(), T::max)
    }

    /// `(Λ, Σ) = (Σ_j |μ_j| ℓ_j, min_j area_j)`.
    pub fn diag_lambda_sigma(&self) -> (T, T) {
        let lambda = self.components.iter().map(|c| c.weight().abs() * c.curve().length()).sum();
        let sigma = self.curves().map(|c| c.signed_area()).fold(T::infinity(), T::min);
        (lambda, sigma)
    }

    /// All functionals at once.
    pub fn diagnostics(&self, eta: T, spec: &SampleSpec, self_cell: SelfCell) -> Diagnostics<T> {
        let dist = self.pairwise_distances();
        let min_pairwise_delta = dist
            .iter()
            .enumerate()
            .flat_map(|(i, row)| row.iter().skip(i + 1).copied())
            .fold(T::infinity(), T::min);
        let (lambda, sigma) = self.diag_lambda_sigma();
        let per_curve: Vec<PerCurve<T>> = self
            .components
            .par_iter()
            .map(|c| PerCurve {
                label: c.label.clone(),
                length: c.curve().length(),
                area: c.curve().signed_area(),
                h2_seminorm_sq: c.curve().h2_seminorm_sq(),
            })
            .collect();
        let q = per_curve.iter().map(|p| p.length * p.h2_seminorm_sq).fold(T::zero(), T::max);
        let max_kappa = self.curves().map(|c| c.max_abs_curvature()).fold(T::zero(), T::max);
        Diagnostics {
            l_eta: self.diag_l_eta(eta, spec).value,
            r_eta: self.diag_r_eta_with(dist, eta, self_cell),
            q,
            lambda,
            sigma,
            min_pairwise_delta,
            max_kappa,
            per_curve,
            lipschitz_u_est: None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::ClosedCurve;
    use crate::kernel::AlphaParam;
    use crate::layercake::{LevelComponent, RadialProfile};
    use std::f64::consts::PI;

    fn alpha() -> AlphaParam<f64> {
        AlphaParam::new(0.25).unwrap()
    }

    fn circle_comp(label: &str, c: Vec2<f64>, r: f64, w: f64) -> LevelComponent<f64> {
        LevelComponent::new(label, None, w, ClosedCurve::circle(c, r, 256).unwrap()).unwrap()
    }

    #[test]
    fn single_circle_values() {
        let cake = LayerCake::new(vec![circle_comp("a", Vec2::zero(), 1.0, 1.0)], alpha());
        let l = cake.diag_l_eta(0.1, &SampleSpec::default());
        assert!(l.value >= 10f64.sqrt() - 1e-12);
        assert!((cake.l_eta_at(Vec2::zero(), 0.1) - 1.1f64.powf(-0.5)).abs() < 1e-4);
        assert_eq!(cake.diag_r_eta(0.0, SelfCell::Exclude), 0.0);
        assert!((cake.diag_q() - 4.0 * PI * PI).abs() < 1e-3 * 4.0 * PI * PI);
        let empty = LayerCake::<f64>::empty(alpha());
        assert_eq!(empty.diag_l_eta(0.1, &SampleSpec::default()).value, 0.0);
    }

    #[test]
    fn concentric_pair_r_value() {
        let cake = LayerCake::new(
            vec![circle_comp("a", Vec2::zero(), 1.0, 1.0), circle_comp("b", Vec2::zero(), 2.0, 1.0)],
            alpha(),
        );
        let r = cake.diag_r_eta(0.0, SelfCell::Exclude);
        assert!((r - 2f64.sqrt()).abs() < 1e-3, "{r}");
    }

    #[test]
    fn lambda_sigma_examples() {
        let one = LayerCake::new(vec![circle_comp("a", Vec2::zero(), 1.0, 2.0)], alpha());
        let (l, s) = one.diag_lambda_sigma();
        assert!((l - 4.0 * PI).abs() < 1e-3 && (s - PI).abs() < 1e-3);
        let pair = LayerCake::new(
            vec![circle_comp("a", Vec2::zero(), 1.0, 1.0), circle_comp("b", Vec2::new(3.0, 0.0), 1.0, -1.0)],
            alpha(),
        );
        let (l, s) = pair.diag_lambda_sigma();
        assert!((l - 4.0 * PI).abs() < 1e-3 && (s - PI).abs() < 1e-3);
        let cone = LayerCake::from_radial_profile(RadialProfile::BumpPowInner { beta: 1.0 }, 4, 256, alpha()).unwrap();
        assert!((cone.diag_lambda_sigma().0 - PI).abs() < 1e-3);
    }

    #[test]
    fn l_eta_is_monotone_in_eta() {
        let cake = LayerCake::from_radial_profile(RadialProfile::Gaussian, 6, 64, alpha()).unwrap();
        let spec = SampleSpec::default();
        let mut prev = f64::INFINITY;
        for eta in [0.01, 0.02, 0.05, 0.1, 0.5] {
            let v = cake.diag_l_eta(eta, &spec).value;
            assert!(v <= prev);
            prev = v;
        }
    }
}
