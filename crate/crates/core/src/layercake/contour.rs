//! Level-set extraction from vertex-centered grid samples (marching squares).

use std::collections::HashMap;

use log::{debug, warn};

use crate::geometry::{resample_points, ClosedCurve, MIN_NODES};
use crate::kernel::AlphaParam;
use crate::scalar::Real;
use crate::vec2::Vec2;

use super::{LayerCake, LayerCakeError, LevelComponent};

/// Row-major samples `values[j * nx + i]` at `(x_i, y_j)` with
/// `x_i = xmin + i (xmax − xmin)/(nx − 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarGrid<T> {
    pub nx: usize,
    pub ny: usize,
    pub xmin: T,
    pub xmax: T,
    pub ymin: T,
    pub ymax: T,
    pub values: Vec<T>,
}

impl<T: Real> ScalarGrid<T> {
    pub fn new(
        nx: usize,
        ny: usize,
        (xmin, xmax, ymin, ymax): (T, T, T, T),
        values: Vec<T>,
    ) -> Result<Self, LayerCakeError> {
        if nx < 2 || ny < 2 {
            return Err(LayerCakeError::Grid(format!("need at least 2x2 samples, got {nx}x{ny}")));
        }
        if values.len() != nx * ny {
            return Err(LayerCakeError::Grid(format!(
                "expected {} samples, found {}",
                nx * ny,
                values.len()
            )));
        }
        if !(xmax > xmin && ymax > ymin) {
            return Err(LayerCakeError::Grid("bounding box is empty".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(LayerCakeError::Grid("non-finite sample".into()));
        }
        Ok(Self { nx, ny, xmin, xmax, ymin, ymax, values })
    }

    /// Samples `f` on the grid.
    pub fn sample(nx: usize, ny: usize, bbox: (T, T, T, T), f: impl Fn(Vec2<T>) -> T) -> Result<Self, LayerCakeError> {
        let mut values = Vec::with_capacity(nx * ny);
        let (x0, x1, y0, y1) = bbox;
        for j in 0..ny {
            for i in 0..nx {
                let x = x0 + (x1 - x0) * T::from_usize(i) / T::from_usize(nx - 1);
                let y = y0 + (y1 - y0) * T::from_usize(j) / T::from_usize(ny - 1);
                values.push(f(Vec2::new(x, y)));
            }
        }
        Self::new(nx, ny, bbox, values)
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> T {
        self.values[j * self.nx + i]
    }

    pub fn point(&self, i: usize, j: usize) -> Vec2<T> {
        Vec2::new(
            self.xmin + (self.xmax - self.xmin) * T::from_usize(i) / T::from_usize(self.nx - 1),
            self.ymin + (self.ymax - self.ymin) * T::from_usize(j) / T::from_usize(self.ny - 1),
        )
    }

    pub fn max(&self) -> T {
        self.values.iter().copied().fold(T::neg_infinity(), T::max)
    }

    pub fn min(&self) -> T {
        self.values.iter().copied().fold(T::infinity(), T::min)
    }
}

/// Cell edge identifier: horizontal edges join `(i, j)–(i+1, j)`,
/// vertical edges join `(i, j)–(i, j+1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Edge {
    H(usize, usize),
    V(usize, usize),
}

/// Closed loops bounding `{sign · θ > sign · level}` with that region on
/// their left, i.e. outer boundaries counterclockwise and holes clockwise.
fn extract_loops<T: Real>(
    grid: &ScalarGrid<T>,
    level: T,
    sign: T,
) -> Result<(Vec<Vec<Vec2<T>>>, usize), LayerCakeError> {
    let val = |i: usize, j: usize| sign * grid.at(i, j);
    let lvl = sign * level;
    let inside = |i: usize, j: usize| val(i, j) > lvl;
    for i in 0..grid.nx {
        if inside(i, 0) || inside(i, grid.ny - 1) {
            return Err(LayerCakeError::OpenContour { level: level.as_f64() });
        }
    }
    for j in 0..grid.ny {
        if inside(0, j) || inside(grid.nx - 1, j) {
            return Err(LayerCakeError::OpenContour { level: level.as_f64() });
        }
    }
    let crossing = |e: Edge| -> Vec2<T> {
        let ((i0, j0), (i1, j1)) = match e {
            Edge::H(i, j) => ((i, j), (i + 1, j)),
            Edge::V(i, j) => ((i, j), (i, j + 1)),
        };
        let (a, b) = (val(i0, j0), val(i1, j1));
        let t = (lvl - a) / (b - a);
        let (p, q) = (grid.point(i0, j0), grid.point(i1, j1));
        p + (q - p).scale(t)
    };
    // Segment map: start edge -> end edge.
    let mut next: HashMap<Edge, Edge> = HashMap::new();
    let mut starts: Vec<Edge> = Vec::new();
    let mut saddles = 0usize;
    for j in 0..grid.ny - 1 {
        for i in 0..grid.nx - 1 {
            // Corners and edges in counterclockwise order.
            let corners = [(i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1)];
            let edges = [Edge::H(i, j), Edge::V(i + 1, j), Edge::H(i, j + 1), Edge::V(i, j)];
            let ins: Vec<bool> = corners.iter().map(|&(a, b)| inside(a, b)).collect();
            let mut exits = Vec::new();
            let mut entries = Vec::new();
            for k in 0..4 {
                let (a, b) = (ins[k], ins[(k + 1) % 4]);
                if a && !b {
                    exits.push(k);
                } else if !a && b {
                    entries.push(k);
                }
            }
            if exits.is_empty() {
                continue;
            }
            let pair_next = if exits.len() == 2 {
                saddles += 1;
                let center = corners.iter().map(|&(a, b)| val(a, b)).sum::<T>() * T::lit(0.25);
                center > lvl
            } else {
                true
            };
            for &e in &exits {
                // With a single entry both choices coincide.
                let partner = if pair_next {
                    (1..4).map(|d| (e + d) % 4).find(|k| entries.contains(k))
                } else {
                    (1..4).map(|d| (e + 4 - d) % 4).find(|k| entries.contains(k))
                }
                .expect("every exit has an entry in the same cell");
                next.insert(edges[e], edges[partner]);
                starts.push(edges[e]);
            }
        }
    }
    if saddles > 0 {
        debug!("level {level}: resolved {saddles} saddle cell(s) by the cell-midpoint value");
    }
    let cell = ((grid.xmax - grid.xmin) / T::from_usize(grid.nx - 1))
        .min((grid.ymax - grid.ymin) / T::from_usize(grid.ny - 1));
    let mut used: HashMap<Edge, bool> = HashMap::new();
    let mut loops = Vec::new();
    for &s in &starts {
        if used.contains_key(&s) {
            continue;
        }
        let mut pts = Vec::new();
        let mut e = s;
        loop {
            used.insert(e, true);
            pts.push(crossing(e));
            e = *next.get(&e).ok_or(LayerCakeError::OpenContour { level: level.as_f64() })?;
            if e == s {
                break;
            }
        }
        // Drop (nearly) coincident consecutive points, which appear when
        // the level passes through or very close to a sample.
        let merge = cell * T::lit(1e-9);
        pts.dedup_by(|a, b| a.dist(*b) <= merge);
        while pts.len() > 1 && pts[0].dist(pts[pts.len() - 1]) <= merge {
            pts.pop();
        }
        if pts.len() >= 3 {
            loops.push(pts);
        }
    }
    Ok((loops, saddles))
}

fn shoelace<T: Real>(pts: &[Vec2<T>]) -> T {
    let n = pts.len();
    (0..n).map(|i| pts[i].cross(pts[(i + 1) % n])).sum::<T>() * T::half()
}

impl<T: Real> LayerCake<T> {
    /// Extracts the level curves of sampled `θ` at the given nonzero
    /// levels. Positive levels bound `{θ > λ}` with weight `+w`; negative
    /// levels bound `{θ < λ}` with weight `−w`, where `w` is the width of
    /// the level's cell (midpoints between neighbouring levels, closed off
    /// by 0 and by the grid extreme). Holes become separate positively
    /// oriented components with the opposite weight. Every curve is
    /// resampled to `nodes` points (default: at least the raw count).
    pub fn from_scalar_grid(
        grid: &ScalarGrid<T>,
        levels: &[T],
        nodes: Option<usize>,
        alpha: AlphaParam<T>,
    ) -> Result<Self, LayerCakeError> {
        if levels.iter().any(|l| *l == T::zero() || !l.is_finite()) {
            return Err(LayerCakeError::BadParameter("levels must be finite and nonzero".into()));
        }
        let (gmax, gmin) = (grid.max(), grid.min());
        let mut comps = Vec::new();
        let mut spacing: Option<T> = None;
        for sign in [T::one(), -T::one()] {
            let extreme = if sign > T::zero() { gmax } else { -gmin };
            let mut lv: Vec<T> = levels.iter().map(|&l| sign * l).filter(|&l| l > T::zero()).collect();
            lv.sort_by(|a, b| a.partial_cmp(b).expect("finite levels"));
            lv.dedup();
            let dropped = lv.iter().filter(|&&l| l >= extreme).count();
            if dropped > 0 {
                warn!("{dropped} level(s) beyond the sampled range produce no curves");
            }
            lv.retain(|&l| l < extreme);
            for (k, &l) in lv.iter().enumerate() {
                let lo = if k == 0 { T::zero() } else { (lv[k - 1] + l) * T::half() };
                let hi = if k + 1 == lv.len() { extreme } else { (lv[k + 1] + l) * T::half() };
                let width = hi - lo;
                if k > 0 {
                    let gap = l - lv[k - 1];
                    spacing = Some(spacing.map_or(gap, |s: T| s.min(gap)));
                }
                let level = sign * l;
                let (loops, _) = extract_loops(grid, level, sign)?;
                for (c, pts) in loops.into_iter().enumerate() {
                    let area = shoelace(&pts);
                    let (pts, weight) = if area > T::zero() {
                        (pts, sign * width)
                    } else {
                        let mut p = pts;
                        p.reverse();
                        (p, -sign * width)
                    };
                    let label = format!("level{level}.c{c}");
                    let n = nodes.unwrap_or_else(|| pts.len().max(MIN_NODES));
                    let geo = |source| LayerCakeError::Geometry { label: label.clone(), source };
                    let curve = ClosedCurve::new(resample_points(&pts, n).map_err(geo)?).map_err(geo)?;
                    comps.push(LevelComponent::new(label.clone(), Some(level), weight, curve)?);
                }
            }
        }
        Ok(LayerCake::new(comps, alpha).with_level_spacing(spacing))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::layercake::RadialProfile;

    fn alpha() -> AlphaParam<f64> {
        AlphaParam::new(0.25).unwrap()
    }

    #[test]
    fn zero_field_gives_empty_cake() {
        let g = ScalarGrid::sample(32, 32, (-1.0, 1.0, -1.0, 1.0), |_| 0.0).unwrap();
        let cake = LayerCake::from_scalar_grid(&g, &[0.5, -0.5], None, alpha()).unwrap();
        assert!(cake.is_empty());
    }

    #[test]
    fn gaussian_level_matches_radial_circle() {
        let g = ScalarGrid::sample(256, 256, (-3.0, 3.0, -3.0, 3.0), |p: Vec2<f64>| (-p.norm_sq()).exp()).unwrap();
        let cake = LayerCake::from_scalar_grid(&g, &[0.5], Some(256), alpha()).unwrap();
        assert_eq!(cake.len(), 1);
        let r = RadialProfile::Gaussian.inverse(0.5).unwrap();
        let want = 2.0 * std::f64::consts::PI * r;
        let got = cake.components()[0].curve().length();
        assert!((got - want).abs() < 0.01 * want, "{got} vs {want}");
        assert!((cake.components()[0].weight() - 1.0).abs() < 1e-3);
    }

    #[test]
    fn signed_pair_gets_signed_weights() {
        let cone = |p: Vec2<f64>, c: f64| (1.0 - p.dist(Vec2::new(c, 0.0))).max(0.0);
        let g = ScalarGrid::sample(201, 101, (-4.0, 4.0, -2.0, 2.0), |p| cone(p, 2.0) - cone(p, -2.0)).unwrap();
        let cake = LayerCake::from_scalar_grid(&g, &[0.5, -0.5], Some(64), alpha()).unwrap();
        assert_eq!(cake.len(), 2);
        let pos = cake.components().iter().find(|c| c.weight() > 0.0).unwrap();
        let neg = cake.components().iter().find(|c| c.weight() < 0.0).unwrap();
        assert!(pos.curve().centroid().x > 1.9 && neg.curve().centroid().x < -1.9);
        assert!((pos.weight() + neg.weight()).abs() < 1e-12);
    }

    #[test]
    fn annulus_hole_gets_opposite_weight() {
        let ring = |p: Vec2<f64>| (1.0 - 4.0 * (p.norm() - 1.0).abs()).max(0.0);
        let g = ScalarGrid::sample(161, 161, (-2.0, 2.0, -2.0, 2.0), ring).unwrap();
        let cake = LayerCake::from_scalar_grid(&g, &[0.5], Some(128), alpha()).unwrap();
        assert_eq!(cake.len(), 2);
        let v = cake.evaluate_theta(Vec2::new(1.0, 0.0)).value().unwrap();
        let hole = cake.evaluate_theta(Vec2::zero()).value().unwrap();
        assert!(v > 0.9 && hole.abs() < 1e-12);
    }

    #[test]
    fn open_contour_is_rejected() {
        let g = ScalarGrid::sample(32, 32, (-1.0, 1.0, -1.0, 1.0), |p: Vec2<f64>| p.x + 1.0).unwrap();
        assert!(matches!(
            LayerCake::from_scalar_grid(&g, &[0.5], None, alpha()),
            Err(LayerCakeError::OpenContour { .. })
        ));
    }

    #[test]
    fn saddle_cell_uses_midpoint_rule() {
        // Diagonal peaks at (2,2) and (3,3) share the saddle cell (2,2);
        // its midpoint value is 0.5.
        let mut values = vec![0.0; 36];
        values[2 * 6 + 2] = 1.0;
        values[3 * 6 + 3] = 1.0;
        let g = ScalarGrid::new(6, 6, (0.0, 5.0, 0.0, 5.0), values).unwrap();
        let joined = LayerCake::from_scalar_grid(&g, &[0.4], Some(32), alpha()).unwrap();
        assert_eq!(joined.len(), 1);
        let split = LayerCake::from_scalar_grid(&g, &[0.6], Some(32), alpha()).unwrap();
        assert_eq!(split.len(), 2);
    }
}
