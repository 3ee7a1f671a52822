//! Periodic cubic splines with non-uniform knots.

use crate::quadrature::GaussRule;
use crate::scalar::Real;
use crate::vec2::Vec2;

/// Interpolating periodic C² cubic through `values[i]` at knot `knots[i]`,
/// with period `period` (so `knots[n] = knots[0] + period`).
#[derive(Clone, Debug)]
pub struct PeriodicSpline<T> {
    values: Vec<Vec2<T>>,
    /// Segment widths `h_i = knots[i+1] - knots[i]`.
    widths: Vec<T>,
    /// Second derivatives at the knots.
    second: Vec<Vec2<T>>,
}

impl<T: Real> PeriodicSpline<T> {
    /// `widths[i]` is the parameter width of the segment from node `i` to
    /// node `i + 1` (cyclically). All widths must be positive.
    pub fn new(values: Vec<Vec2<T>>, widths: Vec<T>) -> Self {
        let n = values.len();
        assert!(n >= 3 && widths.len() == n, "periodic spline needs >= 3 nodes");
        let six = T::lit(6.0);
        let mut rhs = Vec::with_capacity(n);
        let mut diag = Vec::with_capacity(n);
        for i in 0..n {
            let ip = (i + 1) % n;
            let im = (i + n - 1) % n;
            let slope_r = (values[ip] - values[i]).scale(T::one() / widths[i]);
            let slope_l = (values[i] - values[im]).scale(T::one() / widths[im]);
            rhs.push((slope_r - slope_l).scale(six));
            diag.push(T::two() * (widths[im] + widths[i]));
        }
        // Row i: widths[i-1] M_{i-1} + diag_i M_i + widths[i] M_{i+1}.
        let second = solve_cyclic(&diag, &widths, &rhs);
        Self { values, widths, second }
    }

    /// Spline through `values` parametrised by cumulative chord length.
    pub fn chord_length(values: &[Vec2<T>]) -> Self {
        let n = values.len();
        let widths = (0..n).map(|i| values[i].dist(values[(i + 1) % n])).collect();
        Self::new(values.to_vec(), widths)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn width(&self, seg: usize) -> T {
        self.widths[seg]
    }

    pub fn widths(&self) -> &[T] {
        &self.widths
    }

    pub fn node(&self, i: usize) -> Vec2<T> {
        self.values[i]
    }

    /// Position, first and second parameter derivatives on segment `seg`
    /// at local parameter `t ∈ [0, h_seg]`.
    #[inline]
    pub fn eval(&self, seg: usize, t: T) -> (Vec2<T>, Vec2<T>, Vec2<T>) {
        let n = self.values.len();
        let j = (seg + 1) % n;
        let h = self.widths[seg];
        let (p0, p1) = (self.values[seg], self.values[j]);
        let (m0, m1) = (self.second[seg], self.second[j]);
        let u = h - t;
        let six = T::lit(6.0);
        let c0 = p0.scale(T::one() / h) - m0.scale(h / six);
        let c1 = p1.scale(T::one() / h) - m1.scale(h / six);
        let pos = m0.scale(u * u * u / (six * h)) + m1.scale(t * t * t / (six * h)) + c0.scale(u) + c1.scale(t);
        let d1 = m1.scale(t * t / (T::two() * h)) - m0.scale(u * u / (T::two() * h)) + c1 - c0;
        let d2 = m0.scale(u / h) + m1.scale(t / h);
        (pos, d1, d2)
    }

    /// Third parameter derivative, constant on each segment.
    pub fn third(&self, seg: usize) -> Vec2<T> {
        let j = (seg + 1) % self.values.len();
        (self.second[j] - self.second[seg]).scale(T::one() / self.widths[seg])
    }

    /// First derivative at knot `i` (start of segment `i`).
    pub fn derivative_at_node(&self, i: usize) -> Vec2<T> {
        self.eval(i, T::zero()).1
    }

    /// Signed curvature at a local parameter.
    pub fn curvature(&self, seg: usize, t: T) -> T {
        let (_, d1, d2) = self.eval(seg, t);
        let sp = d1.norm();
        d1.cross(d2) / (sp * sp * sp)
    }

    /// Arclength of each segment.
    pub fn segment_arclengths(&self, rule: &GaussRule<T>) -> Vec<T> {
        (0..self.len())
            .map(|s| rule.integrate(T::zero(), self.widths[s], |t| self.eval(s, t).1.norm()))
            .collect()
    }

    /// Arclength of segment `seg` from its start to local parameter `t`.
    pub fn partial_arclength(&self, rule: &GaussRule<T>, seg: usize, t: T) -> T {
        rule.integrate(T::zero(), t, |tt| self.eval(seg, tt).1.norm())
    }

    /// Signed enclosed area `½∮ (x dy − y dx)`; exact for the cubic pieces
    /// with a four-point rule.
    pub fn signed_area(&self) -> T {
        let rule = GaussRule::<T>::legendre(4);
        let mut acc = T::zero();
        for s in 0..self.len() {
            acc += rule.integrate(T::zero(), self.widths[s], |t| {
                let (p, d1, _) = self.eval(s, t);
                p.cross(d1)
            });
        }
        acc * T::half()
    }

    /// `∮ κ² ds` over the whole curve.
    pub fn curvature_energy(&self, rule: &GaussRule<T>) -> T {
        let mut acc = T::zero();
        for s in 0..self.len() {
            acc += rule.integrate(T::zero(), self.widths[s], |t| {
                let (_, d1, d2) = self.eval(s, t);
                let sp = d1.norm();
                let c = d1.cross(d2);
                c * c / (sp * sp * sp * sp * sp)
            });
        }
        acc
    }
}

/// Solves the cyclic tridiagonal system
/// `lower_i x_{i-1} + diag_i x_i + upper_i x_{i+1} = rhs_i` where
/// `lower_i = off[i-1]`, `upper_i = off[i]` (indices mod n), via
/// Sherman–Morrison on top of the Thomas algorithm.
fn solve_cyclic<T: Real>(diag: &[T], off: &[T], rhs: &[Vec2<T>]) -> Vec<Vec2<T>> {
    let n = diag.len();
    // Corner entries: A[0][n-1] = off[n-1], A[n-1][0] = off[n-1].
    let corner = off[n - 1];
    let gamma = -diag[0];
    let mut b = diag.to_vec();
    b[0] -= gamma;
    b[n - 1] -= corner * corner / gamma;
    let sub = |i: usize| off[i - 1]; // A[i][i-1] for i >= 1
    let sup = |i: usize| off[i]; // A[i][i+1] for i < n-1

    let thomas = |r: &dyn Fn(usize) -> Vec2<T>| -> Vec<Vec2<T>> {
        let mut cp = vec![T::zero(); n];
        let mut dp = vec![Vec2::zero(); n];
        cp[0] = sup(0) / b[0];
        dp[0] = r(0).scale(T::one() / b[0]);
        for i in 1..n {
            let m = b[i] - sub(i) * cp[i - 1];
            if i < n - 1 {
                cp[i] = sup(i) / m;
            }
            dp[i] = (r(i) - dp[i - 1].scale(sub(i))).scale(T::one() / m);
        }
        let mut x = dp;
        for i in (0..n - 1).rev() {
            let next = x[i + 1];
            x[i] -= next.scale(cp[i]);
        }
        x
    };
    let y = thomas(&|i| rhs[i]);
    let q = thomas(&|i| {
        if i == 0 {
            Vec2::new(gamma, gamma)
        } else if i == n - 1 {
            Vec2::new(corner, corner)
        } else {
            Vec2::zero()
        }
    });
    // v = (1, 0, …, 0, corner/gamma); correction uses one scalar per component.
    let vq = q[0].x + q[n - 1].x * corner / gamma;
    let vy = Vec2::new(y[0].x + y[n - 1].x * corner / gamma, y[0].y + y[n - 1].y * corner / gamma);
    let fx = vy.x / (T::one() + vq);
    let fy = vy.y / (T::one() + vq);
    y.iter()
        .zip(&q)
        .map(|(yi, qi)| Vec2::new(yi.x - fx * qi.x, yi.y - fy * qi.x))
        .collect()
}
