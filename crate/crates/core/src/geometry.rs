//! Closed planar polylines with spline-based differential quantities,
//! distances and topology checks.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::quadrature::GaussRule;
use crate::scalar::Real;
use crate::spline::PeriodicSpline;
use crate::vec2::Vec2;

/// Smallest node count accepted for a curve.
pub const MIN_NODES: usize = 16;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("curve has {0} nodes, at least {MIN_NODES} are required")]
    TooFewNodes(usize),
    #[error("curve has a non-finite coordinate at node {0}")]
    NonFinite(usize),
    #[error("curve has zero length")]
    ZeroLength,
    #[error("nodes {0} and {1} coincide (degenerate segment)")]
    RepeatedNode(usize, usize),
    #[error("arclength inversion failed at target {0}")]
    Inversion(usize),
}

/// Result of a winding-number query.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Winding {
    Count(i32),
    /// The point lies on the polyline (within rounding).
    Boundary,
}

impl Winding {
    pub fn count(self) -> Option<i32> {
        match self {
            Winding::Count(c) => Some(c),
            Winding::Boundary => None,
        }
    }
}

/// Outcome of a self-intersection check; `crossing` holds the first
/// offending segment pair (segment `i` joins node `i` to node `i + 1`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimplicityReport {
    pub simple: bool,
    pub crossing: Option<(usize, usize)>,
}

/// A closed polyline; node `N - 1` connects back to node `0`.
///
/// Construction rejects degenerate input. Orientation and simplicity are
/// not enforced here (reversed or self-crossing curves are representable
/// so they can be diagnosed); [`crate::layercake::LevelComponent`] enforces
/// both.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClosedCurve<T> {
    nodes: Vec<Vec2<T>>,
    #[serde(skip)]
    cumulative: Vec<T>,
}

impl<'de, T: Real + Deserialize<'de>> Deserialize<'de> for ClosedCurve<T> {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw<T> {
            nodes: Vec<Vec2<T>>,
        }
        let raw = Raw::<T>::deserialize(d)?;
        ClosedCurve::new(raw.nodes).map_err(serde::de::Error::custom)
    }
}

impl<T: Real> ClosedCurve<T> {
    pub fn new(nodes: Vec<Vec2<T>>) -> Result<Self, GeometryError> {
        let n = nodes.len();
        if n < MIN_NODES {
            return Err(GeometryError::TooFewNodes(n));
        }
        if let Some(i) = nodes.iter().position(|p| !p.is_finite()) {
            return Err(GeometryError::NonFinite(i));
        }
        let mut cumulative = Vec::with_capacity(n + 1);
        let mut acc = T::zero();
        cumulative.push(acc);
        for i in 0..n {
            acc += nodes[i].dist(nodes[(i + 1) % n]);
            cumulative.push(acc);
        }
        if !(acc > T::zero()) {
            return Err(GeometryError::ZeroLength);
        }
        let floor = acc * T::epsilon() * T::lit(16.0);
        for i in 0..n {
            if cumulative[i + 1] - cumulative[i] <= floor {
                return Err(GeometryError::RepeatedNode(i, (i + 1) % n));
            }
        }
        Ok(Self { nodes, cumulative })
    }

    /// `n` equispaced samples of `r(φ)·(cos φ, sin φ)`-style parametrizations.
    pub fn from_fn(n: usize, f: impl Fn(T) -> Vec2<T>) -> Result<Self, GeometryError> {
        let tau = T::TAU();
        Self::new((0..n).map(|k| f(tau * T::from_usize(k) / T::from_usize(n))).collect())
    }

    /// Counterclockwise circle sampled at equal angles.
    pub fn circle(center: Vec2<T>, radius: T, n: usize) -> Result<Self, GeometryError> {
        Self::from_fn(n, |a| center + Vec2::new(a.cos(), a.sin()).scale(radius))
    }

    /// Counterclockwise axis-aligned ellipse sampled at equal parameter steps.
    pub fn ellipse(center: Vec2<T>, a: T, b: T, n: usize) -> Result<Self, GeometryError> {
        Self::from_fn(n, |t| center + Vec2::new(a * t.cos(), b * t.sin()))
    }

    pub fn nodes(&self) -> &[Vec2<T>] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Segment `i` as its endpoints.
    #[inline]
    pub fn segment(&self, i: usize) -> (Vec2<T>, Vec2<T>) {
        (self.nodes[i], self.nodes[(i + 1) % self.nodes.len()])
    }

    /// Cumulative polyline length at each node, with the total appended.
    pub fn cumulative_length(&self) -> &[T] {
        &self.cumulative
    }

    pub fn segment_length(&self, i: usize) -> T {
        self.cumulative[i + 1] - self.cumulative[i]
    }

    /// Polyline length.
    pub fn length(&self) -> T {
        self.cumulative[self.nodes.len()]
    }

    /// Shoelace signed area; positive for counterclockwise curves.
    pub fn signed_area(&self) -> T {
        let n = self.nodes.len();
        let o = self.nodes[0];
        let mut acc = T::zero();
        for i in 1..n - 1 {
            acc += (self.nodes[i] - o).cross(self.nodes[i + 1] - o);
        }
        acc * T::half()
    }

    pub fn spline(&self) -> PeriodicSpline<T> {
        let n = self.nodes.len();
        let widths = (0..n).map(|i| self.segment_length(i)).collect();
        PeriodicSpline::new(self.nodes.clone(), widths)
    }

    /// Length of the spline interpolant.
    pub fn arclength(&self) -> T {
        self.spline().segment_arclengths(&GaussRule::legendre(8)).into_iter().sum()
    }

    /// Signed area enclosed by the spline interpolant.
    pub fn enclosed_area(&self) -> T {
        self.spline().signed_area()
    }

    /// Signed curvature at each node from the spline derivatives.
    pub fn curvature_profile(&self) -> Vec<T> {
        let sp = self.spline();
        (0..self.len()).map(|i| sp.curvature(i, T::zero())).collect()
    }

    pub fn max_abs_curvature(&self) -> T {
        self.curvature_profile().into_iter().fold(T::zero(), |m, k| m.max(k.abs()))
    }

    /// `∮ κ² ds` along the spline interpolant.
    pub fn h2_seminorm_sq(&self) -> T {
        self.spline().curvature_energy(&GaussRule::legendre(6))
    }

    /// Largest distance between two nodes.
    pub fn diameter(&self) -> T {
        let mut best = T::zero();
        for (i, p) in self.nodes.iter().enumerate() {
            for q in &self.nodes[i + 1..] {
                best = best.max((*p - *q).norm_sq());
            }
        }
        best.sqrt()
    }

    pub fn centroid(&self) -> Vec2<T> {
        // Area centroid of the polygon.
        let n = self.nodes.len();
        let o = self.nodes[0];
        let mut acc = Vec2::zero();
        let mut area = T::zero();
        for i in 1..n - 1 {
            let (a, b) = (self.nodes[i] - o, self.nodes[i + 1] - o);
            let w = a.cross(b);
            area += w;
            acc += (a + b).scale(w);
        }
        if area == T::zero() {
            return o;
        }
        o + acc.scale(T::one() / (T::lit(3.0) * area))
    }

    pub fn bbox(&self) -> BBox<T> {
        BBox::of_points(&self.nodes)
    }

    /// Outward-agnostic unit normal `T^⊥` at node `i` from the spline tangent.
    pub fn node_normals(&self) -> Vec<Vec2<T>> {
        let sp = self.spline();
        (0..self.len()).map(|i| sp.derivative_at_node(i).normalized().perp()).collect()
    }

    pub fn reversed(&self) -> Self {
        let mut nodes = self.nodes.clone();
        nodes.reverse();
        Self::new(nodes).expect("reversal preserves validity")
    }

    pub fn map(&self, f: impl Fn(Vec2<T>) -> Vec2<T>) -> Result<Self, GeometryError> {
        Self::new(self.nodes.iter().map(|&p| f(p)).collect())
    }

    pub fn scaled(&self, a: T) -> Result<Self, GeometryError> {
        self.map(|p| p.scale(a))
    }

    pub fn translated(&self, d: Vec2<T>) -> Self {
        self.map(|p| p + d).expect("translation preserves validity")
    }

    /// Segment lengths all within `[lo, hi] × ℓ/N`.
    pub fn is_quasi_uniform_within(&self, lo: T, hi: T) -> bool {
        let mean = self.length() / T::from_usize(self.len());
        (0..self.len()).all(|i| {
            let s = self.segment_length(i);
            s >= lo * mean && s <= hi * mean
        })
    }

    pub fn is_quasi_uniform(&self) -> bool {
        self.is_quasi_uniform_within(T::half(), T::two())
    }

    /// Resamples to `n_target` nodes at equal arclength along the periodic
    /// cubic spline through the current nodes.
    pub fn resample_arclength(&self, n_target: usize) -> Result<Self, GeometryError> {
        Self::new(resample_points(&self.nodes, n_target)?)
    }

    /// Distance from `x` to the polyline.
    pub fn dist_point(&self, x: Vec2<T>) -> T {
        (0..self.len())
            .map(|i| {
                let (a, b) = self.segment(i);
                point_segment_dist(x, a, b)
            })
            .fold(T::infinity(), T::min)
    }

    /// Index of the segment closest to `x`, with the distance.
    pub fn closest_segment(&self, x: Vec2<T>) -> (usize, T) {
        let mut best = (0, T::infinity());
        for i in 0..self.len() {
            let (a, b) = self.segment(i);
            let d = point_segment_dist(x, a, b);
            if d < best.1 {
                best = (i, d);
            }
        }
        best
    }

    /// Winding number of the polyline around `x`.
    pub fn winding_number(&self, x: Vec2<T>) -> Winding {
        let n = self.len();
        let tol = self.length() * T::epsilon() * T::lit(64.0);
        let mut wn = 0i32;
        for i in 0..n {
            let (a, b) = self.segment(i);
            let side = (b - a).cross(x - a);
            let seg_len = b.dist(a);
            if side.abs() <= tol * seg_len && point_segment_dist(x, a, b) <= tol {
                return Winding::Boundary;
            }
            if a.y <= x.y {
                if b.y > x.y && side > T::zero() {
                    wn += 1;
                }
            } else if b.y <= x.y && side < T::zero() {
                wn -= 1;
            }
        }
        Winding::Count(wn)
    }

    /// Self-intersection check by a sweep over segment x-extents.
    pub fn is_simple(&self) -> SimplicityReport {
        match first_crossing(&[self]) {
            None => SimplicityReport { simple: true, crossing: None },
            Some(((_, i), (_, j))) => SimplicityReport {
                simple: false,
                crossing: Some((i.min(j), i.max(j))),
            },
        }
    }
}

/// Equal-arclength resampling of a closed point sequence through its
/// chord-length periodic cubic spline. Accepts any number of distinct
/// consecutive points (at least three), so raw contours can be regularized.
pub fn resample_points<T: Real>(points: &[Vec2<T>], n_target: usize) -> Result<Vec<Vec2<T>>, GeometryError> {
    if n_target < MIN_NODES {
        return Err(GeometryError::TooFewNodes(n_target));
    }
    let n = points.len();
    if n < 3 {
        return Err(GeometryError::TooFewNodes(n));
    }
    let widths: Vec<T> = (0..n).map(|i| points[i].dist(points[(i + 1) % n])).collect();
    let total_chord: T = widths.iter().copied().sum();
    if !(total_chord > T::zero()) {
        return Err(GeometryError::ZeroLength);
    }
    let floor = total_chord * T::epsilon() * T::lit(16.0);
    if let Some(i) = widths.iter().position(|&w| w <= floor) {
        return Err(GeometryError::RepeatedNode(i, (i + 1) % n));
    }
    let sp = PeriodicSpline::new(points.to_vec(), widths);
    let rule = GaussRule::<T>::legendre(8);
    let seg_len = sp.segment_arclengths(&rule);
    let mut cum = Vec::with_capacity(n + 1);
    let mut acc = T::zero();
    cum.push(acc);
    for s in &seg_len {
        acc += *s;
        cum.push(acc);
    }
    let total = acc;
    let mut out = Vec::with_capacity(n_target);
    let mut seg = 0usize;
    for k in 0..n_target {
        let target = total * T::from_usize(k) / T::from_usize(n_target);
        while seg + 1 < n && cum[seg + 1] <= target {
            seg += 1;
        }
        let want = target - cum[seg];
        let h = sp.width(seg);
        // Newton on s(t) = want, safeguarded by bisection bounds.
        let mut t = h * (want / seg_len[seg]).min(T::one());
        let (mut lo, mut hi) = (T::zero(), h);
        let tol = T::epsilon() * T::lit(8.0) * (total + T::one());
        let mut converged = false;
        for _ in 0..60 {
            let f = sp.partial_arclength(&rule, seg, t) - want;
            if f.abs() <= tol {
                converged = true;
                break;
            }
            if f > T::zero() {
                hi = t;
            } else {
                lo = t;
            }
            let speed = sp.eval(seg, t).1.norm();
            let mut next = t - f / speed;
            if !(next > lo && next < hi) {
                next = (lo + hi) * T::half();
            }
            if (next - t).abs() <= T::epsilon() * h {
                converged = true;
                t = next;
                break;
            }
            t = next;
        }
        if !converged {
            return Err(GeometryError::Inversion(k));
        }
        out.push(sp.eval(seg, t).0);
    }
    Ok(out)
}

/// Axis-aligned bounding box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BBox<T> {
    pub min: Vec2<T>,
    pub max: Vec2<T>,
}

impl<T: Real> BBox<T> {
    pub fn of_points(pts: &[Vec2<T>]) -> Self {
        let mut min = Vec2::new(T::infinity(), T::infinity());
        let mut max = Vec2::new(T::neg_infinity(), T::neg_infinity());
        for p in pts {
            min = Vec2::new(min.x.min(p.x), min.y.min(p.y));
            max = Vec2::new(max.x.max(p.x), max.y.max(p.y));
        }
        Self { min, max }
    }

    pub fn union(self, o: Self) -> Self {
        Self {
            min: Vec2::new(self.min.x.min(o.min.x), self.min.y.min(o.min.y)),
            max: Vec2::new(self.max.x.max(o.max.x), self.max.y.max(o.max.y)),
        }
    }

    /// Lower bound on the distance between points of the two boxes.
    pub fn gap(self, o: Self) -> T {
        let dx = (o.min.x - self.max.x).max(self.min.x - o.max.x).max(T::zero());
        let dy = (o.min.y - self.max.y).max(self.min.y - o.max.y).max(T::zero());
        dx.hypot(dy)
    }

    pub fn dist_point(self, p: Vec2<T>) -> T {
        let dx = (self.min.x - p.x).max(p.x - self.max.x).max(T::zero());
        let dy = (self.min.y - p.y).max(p.y - self.max.y).max(T::zero());
        dx.hypot(dy)
    }
}

#[inline]
pub fn point_segment_dist<T: Real>(x: Vec2<T>, a: Vec2<T>, b: Vec2<T>) -> T {
    let d = b - a;
    let len_sq = d.norm_sq();
    let t = if len_sq > T::zero() {
        ((x - a).dot(d) / len_sq).max(T::zero()).min(T::one())
    } else {
        T::zero()
    };
    x.dist(a + d.scale(t))
}

/// Closest point on segment `[a, b]` to `x` as the parameter in `[0, 1]`.
#[inline]
pub fn closest_param<T: Real>(x: Vec2<T>, a: Vec2<T>, b: Vec2<T>) -> T {
    let d = b - a;
    let len_sq = d.norm_sq();
    if len_sq > T::zero() {
        ((x - a).dot(d) / len_sq).max(T::zero()).min(T::one())
    } else {
        T::zero()
    }
}

#[inline]
fn orient<T: Real>(a: Vec2<T>, b: Vec2<T>, c: Vec2<T>) -> T {
    (b - a).cross(c - a)
}

#[inline]
fn on_segment<T: Real>(a: Vec2<T>, b: Vec2<T>, p: Vec2<T>) -> bool {
    p.x >= a.x.min(b.x) && p.x <= a.x.max(b.x) && p.y >= a.y.min(b.y) && p.y <= a.y.max(b.y)
}

/// Whether closed segments `[p1, p2]` and `[q1, q2]` share a point.
pub fn segments_intersect<T: Real>(p1: Vec2<T>, p2: Vec2<T>, q1: Vec2<T>, q2: Vec2<T>) -> bool {
    let d1 = orient(q1, q2, p1);
    let d2 = orient(q1, q2, p2);
    let d3 = orient(p1, p2, q1);
    let d4 = orient(p1, p2, q2);
    let z = T::zero();
    if ((d1 > z && d2 < z) || (d1 < z && d2 > z)) && ((d3 > z && d4 < z) || (d3 < z && d4 > z)) {
        return true;
    }
    (d1 == z && on_segment(q1, q2, p1))
        || (d2 == z && on_segment(q1, q2, p2))
        || (d3 == z && on_segment(p1, p2, q1))
        || (d4 == z && on_segment(p1, p2, q2))
}

/// Distance between two closed segments.
pub fn segment_segment_dist<T: Real>(p1: Vec2<T>, p2: Vec2<T>, q1: Vec2<T>, q2: Vec2<T>) -> T {
    if segments_intersect(p1, p2, q1, q2) {
        return T::zero();
    }
    point_segment_dist(p1, q1, q2)
        .min(point_segment_dist(p2, q1, q2))
        .min(point_segment_dist(q1, p1, p2))
        .min(point_segment_dist(q2, p1, p2))
}

/// Two segments sharing node `shared` fold back onto each other when they
/// are collinear and leave the node in the same direction.
fn folds_back<T: Real>(shared: Vec2<T>, a: Vec2<T>, b: Vec2<T>) -> bool {
    let (u, v) = (a - shared, b - shared);
    u.cross(v) == T::zero() && u.dot(v) > T::zero()
}

/// First pair of crossing segments among a family of closed curves,
/// reported as `((curve, segment), (curve, segment))`. Segments that are
/// adjacent on the same curve are exempt at their shared node.
pub fn first_crossing<T: Real>(curves: &[&ClosedCurve<T>]) -> Option<((usize, usize), (usize, usize))> {
    struct Seg<T> {
        curve: usize,
        idx: usize,
        a: Vec2<T>,
        b: Vec2<T>,
        xmin: T,
        xmax: T,
    }
    let mut segs = Vec::new();
    for (c, curve) in curves.iter().enumerate() {
        for i in 0..curve.len() {
            let (a, b) = curve.segment(i);
            segs.push(Seg { curve: c, idx: i, a, b, xmin: a.x.min(b.x), xmax: a.x.max(b.x) });
        }
    }
    segs.sort_by(|s, t| s.xmin.partial_cmp(&t.xmin).unwrap_or(std::cmp::Ordering::Equal));
    let mut found: Option<((usize, usize), (usize, usize))> = None;
    for i in 0..segs.len() {
        let s = &segs[i];
        for t in &segs[i + 1..] {
            if t.xmin > s.xmax {
                break;
            }
            if s.a.y.max(s.b.y) < t.a.y.min(t.b.y) || t.a.y.max(t.b.y) < s.a.y.min(s.b.y) {
                continue;
            }
            let hit = if s.curve == t.curve {
                let n = curves[s.curve].len();
                let (i0, j0) = (s.idx, t.idx);
                if (i0 + 1) % n == j0 {
                    folds_back(s.b, s.a, t.b)
                } else if (j0 + 1) % n == i0 {
                    folds_back(t.b, t.a, s.b)
                } else {
                    segments_intersect(s.a, s.b, t.a, t.b)
                }
            } else {
                segments_intersect(s.a, s.b, t.a, t.b)
            };
            if hit {
                let pair = if (s.curve, s.idx) < (t.curve, t.idx) {
                    ((s.curve, s.idx), (t.curve, t.idx))
                } else {
                    ((t.curve, t.idx), (s.curve, s.idx))
                };
                if found.is_none_or(|f| pair < f) {
                    found = Some(pair);
                }
            }
        }
    }
    found
}

const CHUNK: usize = 16;

/// Bounding boxes over runs of consecutive segments, used to prune
/// distance queries.
#[derive(Debug, Clone)]
pub struct CurveIndex<'a, T> {
    curve: &'a ClosedCurve<T>,
    boxes: Vec<BBox<T>>,
}

impl<'a, T: Real> CurveIndex<'a, T> {
    pub fn new(curve: &'a ClosedCurve<T>) -> Self {
        let n = curve.len();
        let boxes = (0..n)
            .step_by(CHUNK)
            .map(|start| {
                let end = (start + CHUNK).min(n);
                let mut pts: Vec<_> = curve.nodes[start..end].to_vec();
                pts.push(curve.nodes[end % n]);
                BBox::of_points(&pts)
            })
            .collect();
        Self { curve, boxes }
    }

    pub fn curve(&self) -> &ClosedCurve<T> {
        self.curve
    }

    fn chunk_range(&self, c: usize) -> std::ops::Range<usize> {
        let start = c * CHUNK;
        start..(start + CHUNK).min(self.curve.len())
    }

    /// Distance from `x` to the polyline.
    pub fn dist_point(&self, x: Vec2<T>) -> T {
        let chunk_dist = |c: usize| {
            self.chunk_range(c).fold(T::infinity(), |best, i| {
                let (a, b) = self.curve.segment(i);
                best.min(point_segment_dist(x, a, b))
            })
        };
        // Seed with the most promising chunk, then visit only chunks whose
        // box could still beat it.
        let (first, _) = self
            .boxes
            .iter()
            .enumerate()
            .map(|(c, b)| (c, b.dist_point(x)))
            .fold((0, T::infinity()), |acc, cur| if cur.1 < acc.1 { cur } else { acc });
        let mut best = chunk_dist(first);
        for (c, b) in self.boxes.iter().enumerate() {
            if c != first && b.dist_point(x) < best {
                best = best.min(chunk_dist(c));
            }
        }
        best
    }

    /// Distance between the images of two polylines. Disjoint segments
    /// attain their distance at an endpoint, so node-to-curve queries give
    /// the answer unless the curves cross, which is checked separately.
    pub fn dist_curve(&self, other: &CurveIndex<'_, T>) -> T {
        let best = self.nodes_to(other).min(other.nodes_to(self));
        if best > T::zero() && self.crosses(other) {
            return T::zero();
        }
        best
    }

    fn nodes_to(&self, other: &CurveIndex<'_, T>) -> T {
        self.curve.nodes.iter().map(|&p| other.dist_point(p)).fold(T::infinity(), T::min)
    }

    fn crosses(&self, other: &CurveIndex<'_, T>) -> bool {
        for (c, bc) in self.boxes.iter().enumerate() {
            for (d, bd) in other.boxes.iter().enumerate() {
                if bc.gap(*bd) > T::zero() {
                    continue;
                }
                for i in self.chunk_range(c) {
                    let (p1, p2) = self.curve.segment(i);
                    for j in other.chunk_range(d) {
                        let (q1, q2) = other.curve.segment(j);
                        if segments_intersect(p1, p2, q1, q2) {
                            return true;
                        }
                    }
                }
            }
        }
        false
    }
}

/// Distance from a point to a curve image.
pub fn dist_point_curve<T: Real>(x: Vec2<T>, curve: &ClosedCurve<T>) -> T {
    curve.dist_point(x)
}

/// Distance between two curve images; zero iff they touch.
pub fn dist_curve_curve<T: Real>(c1: &ClosedCurve<T>, c2: &ClosedCurve<T>) -> T {
    CurveIndex::new(c1).dist_curve(&CurveIndex::new(c2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn unit_circle(n: usize) -> ClosedCurve<f64> {
        ClosedCurve::circle(Vec2::zero(), 1.0, n).unwrap()
    }

    pub(crate) fn square() -> ClosedCurve<f64> {
        // Corners (±1, ±1), four nodes per side, counterclockwise.
        let mut pts = Vec::new();
        let steps = [-1.0, -0.5, 0.0, 0.5];
        for &s in &steps {
            pts.push(Vec2::new(s, -1.0));
        }
        for &s in &steps {
            pts.push(Vec2::new(1.0, s));
        }
        for &s in &steps {
            pts.push(Vec2::new(-s, 1.0));
        }
        for &s in &steps {
            pts.push(Vec2::new(-1.0, -s));
        }
        ClosedCurve::new(pts).unwrap()
    }

    #[test]
    fn rejects_degenerate_input() {
        let few: Vec<_> = (0..8).map(|k| Vec2::new(k as f64, 0.0)).collect();
        assert_eq!(ClosedCurve::new(few).unwrap_err(), GeometryError::TooFewNodes(8));
        let same = vec![Vec2::new(1.0, 1.0); 20];
        assert_eq!(ClosedCurve::new(same).unwrap_err(), GeometryError::ZeroLength);
        let mut dup = unit_circle(32).nodes().to_vec();
        dup[5] = dup[4];
        assert_eq!(ClosedCurve::new(dup).unwrap_err(), GeometryError::RepeatedNode(4, 5));
        let c = unit_circle(32);
        assert_eq!(c.resample_arclength(8).unwrap_err(), GeometryError::TooFewNodes(8));
    }

    #[test]
    fn square_identities_are_exact() {
        let sq = square();
        assert_eq!(sq.length(), 8.0);
        assert_eq!(sq.signed_area(), 4.0);
        assert!((sq.diameter() - 8f64.sqrt()).abs() < 1e-15);
        assert_eq!(sq.dist_point(Vec2::new(0.5, 0.5)), 0.5);
    }

    #[test]
    fn circle_basics() {
        let c = unit_circle(256);
        assert!((c.length() - 2.0 * PI).abs() < 1e-4 * 2.0 * PI);
        assert!((c.signed_area() - PI).abs() < 1e-3);
        assert!((c.reversed().signed_area() + PI).abs() < 1e-3);
        assert!((c.diameter() - 2.0).abs() < 1e-12);
        assert!((c.dist_point(Vec2::zero()) - 1.0).abs() < 1e-3);
        assert!((c.dist_point(Vec2::new(3.0, 0.0)) - 2.0).abs() < 1e-12);
        let r3 = ClosedCurve::circle(Vec2::zero(), 3.0, 256).unwrap();
        assert!((r3.length() - 6.0 * PI).abs() < 1e-4 * 6.0 * PI);
        for k in c.curvature_profile() {
            assert!((k - 1.0).abs() < 1e-3);
        }
        let r2 = ClosedCurve::circle(Vec2::zero(), 2.0, 256).unwrap();
        assert!((r2.h2_seminorm_sq() - PI).abs() < 1e-3 * PI);
    }

    #[test]
    fn winding_numbers() {
        let c = unit_circle(64);
        assert_eq!(c.winding_number(Vec2::zero()), Winding::Count(1));
        assert_eq!(c.winding_number(Vec2::new(3.0, 0.0)), Winding::Count(0));
        assert_eq!(c.reversed().winding_number(Vec2::zero()), Winding::Count(-1));
        assert_eq!(c.winding_number(Vec2::new(1.0, 0.0)), Winding::Boundary);
    }

    #[test]
    fn figure_eight_is_not_simple() {
        let eight = ClosedCurve::from_fn(64, |t: f64| Vec2::new(t.sin(), (2.0 * t).sin() * 0.5)).unwrap();
        let rep = eight.is_simple();
        assert!(!rep.simple);
        let (i, j) = rep.crossing.unwrap();
        let (a, b) = eight.segment(i);
        let (p, q) = eight.segment(j);
        assert!(segments_intersect(a, b, p, q));
        assert!(unit_circle(128).is_simple().simple);
    }

    #[test]
    fn fold_back_is_detected() {
        let mut pts: Vec<_> = unit_circle(32).nodes().to_vec();
        // Node 6 steps back along the segment from 4 to 5.
        pts[6] = pts[4] + (pts[5] - pts[4]).scale(0.5);
        let c = ClosedCurve::new(pts).unwrap();
        assert!(!c.is_simple().simple);
    }

    #[test]
    fn curve_distances() {
        let a = unit_circle(256);
        let b = ClosedCurve::circle(Vec2::zero(), 2.0, 256).unwrap();
        assert!((dist_curve_curve(&a, &b) - 1.0).abs() < 1e-3);
        let c = ClosedCurve::circle(Vec2::new(3.0, 0.0), 1.0, 256).unwrap();
        assert!((dist_curve_curve(&a, &c) - 1.0).abs() < 1e-12);
        assert_eq!(dist_curve_curve(&a, &a), 0.0);
        assert_eq!(dist_curve_curve(&a, &c), dist_curve_curve(&c, &a));
    }

    #[test]
    fn resample_circle_and_identity() {
        let c = unit_circle(64);
        let r = c.resample_arclength(128).unwrap();
        assert_eq!(r.len(), 128);
        assert!((r.arclength() - 2.0 * PI).abs() < 1e-4 * 2.0 * PI);
        assert!(r.is_quasi_uniform_within(0.999, 1.001));
        let same = c.resample_arclength(64).unwrap();
        for (p, q) in c.nodes().iter().zip(same.nodes()) {
            assert!(p.dist(*q) < 1e-10);
        }
    }
}
