//! Gauss-type quadrature rules and adaptive panel integration.
//!
//! Rules are generated once in `f64` (Golub–Welsch style: nodes from the
//! Jacobi matrix by Sturm bisection, weights from the Christoffel function)
//! and narrowed to the working scalar.

use std::ops::Add;

use crate::scalar::Real;
use crate::vec2::{Bilinear2, Mat2, Vec2};

/// Values that can be accumulated by a quadrature rule.
pub trait QuadValue<T: Real>: Copy + Add<Output = Self> {
    fn zero() -> Self;
    fn scaled(self, s: T) -> Self;
    /// Size used by error control.
    fn magnitude(self) -> T;
}

impl<T: Real> QuadValue<T> for T {
    fn zero() -> Self {
        T::zero()
    }
    fn scaled(self, s: T) -> Self {
        self * s
    }
    fn magnitude(self) -> T {
        self.abs()
    }
}

impl<T: Real> QuadValue<T> for Vec2<T> {
    fn zero() -> Self {
        Vec2::zero()
    }
    fn scaled(self, s: T) -> Self {
        self.scale(s)
    }
    fn magnitude(self) -> T {
        self.norm()
    }
}

impl<T: Real> QuadValue<T> for Mat2<T> {
    fn zero() -> Self {
        Mat2::zero()
    }
    fn scaled(self, s: T) -> Self {
        self.scale(s)
    }
    fn magnitude(self) -> T {
        self.norm()
    }
}

impl<T: Real> QuadValue<T> for Bilinear2<T> {
    fn zero() -> Self {
        Bilinear2::zero()
    }
    fn scaled(self, s: T) -> Self {
        self.scale(s)
    }
    fn magnitude(self) -> T {
        self.norm()
    }
}

/// Nodes and weights on `[-1, 1]` for the weight `(1 - x)^a (1 + x)^b`.
#[derive(Clone, Debug)]
pub struct GaussRule<T> {
    pub nodes: Vec<T>,
    pub weights: Vec<T>,
    /// Exponent `b` of the left-endpoint factor; zero for Gauss–Legendre.
    pub left_exponent: T,
}

impl<T: Real> GaussRule<T> {
    pub fn legendre(n: usize) -> Self {
        let (x, w) = jacobi_rule_f64(n, 0.0, 0.0);
        Self::from_f64(&x, &w, 0.0)
    }

    /// Rule exact for `(1 + x)^b p(x)` with `p` a polynomial of degree `< 2n`.
    pub fn jacobi_left(n: usize, b: f64) -> Self {
        let (x, w) = jacobi_rule_f64(n, 0.0, b);
        Self::from_f64(&x, &w, b)
    }

    fn from_f64(x: &[f64], w: &[f64], b: f64) -> Self {
        Self {
            nodes: x.iter().map(|&v| T::lit(v)).collect(),
            weights: w.iter().map(|&v| T::lit(v)).collect(),
            left_exponent: T::lit(b),
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Plain application on `[a, b]`.
    #[inline]
    pub fn integrate<V, F>(&self, a: T, b: T, mut f: F) -> V
    where
        V: QuadValue<T>,
        F: FnMut(T) -> V,
    {
        let half = (b - a) * T::half();
        let mid = (a + b) * T::half();
        let mut acc = V::zero();
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            acc = acc + f(mid + half * x).scaled(w);
        }
        acc.scaled(half)
    }

    /// Integrates `f` over `[a, b]` where `f` behaves like `|t - a|^{b}` near
    /// `a` (`b` = `left_exponent`). `f` itself is passed; the rule divides the
    /// algebraic factor out. With `mirrored`, the singular endpoint is `b`.
    pub fn integrate_endpoint_singular<V, F>(&self, a: T, b: T, mirrored: bool, mut f: F) -> V
    where
        V: QuadValue<T>,
        F: FnMut(T) -> V,
    {
        let half = (b - a) * T::half();
        let mid = (a + b) * T::half();
        let mut acc = V::zero();
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            let factor = (T::one() + x).powf(-self.left_exponent);
            let t = if mirrored { mid - half * x } else { mid + half * x };
            acc = acc + f(t).scaled(w * factor);
        }
        acc.scaled(half)
    }
}

/// Error from adaptive integration that hit its depth limit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NonConvergence {
    pub achieved: f64,
    pub depth: usize,
}

/// Adaptive bisection: a panel is accepted when its one-rule and two-halves
/// estimates agree within `tol * scale(a, b)`.
pub fn adaptive<T, V, F, S>(
    rule: &GaussRule<T>,
    a: T,
    b: T,
    tol: T,
    max_depth: usize,
    f: &mut F,
    scale: &S,
) -> Result<V, NonConvergence>
where
    T: Real,
    V: QuadValue<T>,
    F: FnMut(T) -> V,
    S: Fn(T, T) -> T,
{
    let whole = rule.integrate(a, b, &mut *f);
    adaptive_rec(rule, a, b, whole, tol, max_depth, 0, f, scale)
}

#[allow(clippy::too_many_arguments)]
fn adaptive_rec<T, V, F, S>(
    rule: &GaussRule<T>,
    a: T,
    b: T,
    whole: V,
    tol: T,
    max_depth: usize,
    depth: usize,
    f: &mut F,
    scale: &S,
) -> Result<V, NonConvergence>
where
    T: Real,
    V: QuadValue<T>,
    F: FnMut(T) -> V,
    S: Fn(T, T) -> T,
{
    let m = (a + b) * T::half();
    let left = rule.integrate(a, m, &mut *f);
    let right = rule.integrate(m, b, &mut *f);
    let refined = left + right;
    let diff = (refined + whole.scaled(-T::one())).magnitude();
    let bound = tol * scale(a, b);
    if diff <= bound || !(diff.is_finite()) && !refined.magnitude().is_finite() {
        return Ok(refined);
    }
    if depth + 1 >= max_depth {
        return Err(NonConvergence {
            achieved: (diff / scale(a, b).max(T::min_positive_value())).as_f64(),
            depth: depth + 1,
        });
    }
    let l = adaptive_rec(rule, a, m, left, tol, max_depth, depth + 1, f, scale)?;
    let r = adaptive_rec(rule, m, b, right, tol, max_depth, depth + 1, f, scale)?;
    Ok(l + r)
}

/// Composite Gauss–Legendre on `n` equal panels.
pub fn composite<T, V, F>(rule: &GaussRule<T>, a: T, b: T, panels: usize, mut f: F) -> V
where
    T: Real,
    V: QuadValue<T>,
    F: FnMut(T) -> V,
{
    let h = (b - a) / T::from_usize(panels);
    let mut acc = V::zero();
    for k in 0..panels {
        let lo = a + h * T::from_usize(k);
        acc = acc + rule.integrate(lo, lo + h, &mut f);
    }
    acc
}

/// Recurrence coefficients of the monic Jacobi polynomials for the weight
/// `(1-x)^a (1+x)^b`: diagonal `alpha_k` and squared off-diagonal `beta_k`.
fn jacobi_recurrence(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let ab = a + b;
    let mut diag = Vec::with_capacity(n);
    let mut off = Vec::with_capacity(n);
    for k in 0..n {
        let kf = k as f64;
        let d = if k == 0 {
            (b - a) / (ab + 2.0)
        } else {
            let s = 2.0 * kf + ab;
            (b * b - a * a) / (s * (s + 2.0))
        };
        diag.push(d);
        if k >= 1 {
            let s = 2.0 * kf + ab;
            let num = 4.0 * kf * (kf + a) * (kf + b) * (kf + ab);
            let den = s * s * (s + 1.0) * (s - 1.0);
            off.push(num / den);
        }
    }
    (diag, off)
}

/// Number of eigenvalues of the symmetric tridiagonal matrix below `x`.
fn sturm_count(diag: &[f64], off_sq: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut q = diag[0] - x;
    if q < 0.0 {
        count += 1;
    }
    for k in 1..diag.len() {
        let denom = if q == 0.0 { f64::EPSILON * (1.0 + x.abs()) } else { q };
        q = diag[k] - x - off_sq[k - 1] / denom;
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

fn jacobi_rule_f64(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "quadrature rule needs at least one node");
    assert!(a > -1.0 && b > -1.0, "Jacobi exponents must exceed -1");
    let (diag, off_sq) = jacobi_recurrence(n, a, b);
    // All nodes lie in (-1, 1).
    let mut nodes = Vec::with_capacity(n);
    for k in 0..n {
        let (mut lo, mut hi) = (-1.0_f64, 1.0_f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if sturm_count(&diag, &off_sq, mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
            if hi - lo <= 4.0 * f64::EPSILON {
                break;
            }
        }
        nodes.push(0.5 * (lo + hi));
    }
    let mu0 = 2f64.powf(a + b + 1.0) * libm::tgamma(a + 1.0) * libm::tgamma(b + 1.0)
        / libm::tgamma(a + b + 2.0);
    let weights = nodes
        .iter()
        .map(|&x| {
            // Orthonormal three-term recurrence.
            let mut p_prev = 0.0;
            let mut p = 1.0;
            let mut sum = 1.0;
            for k in 0..n - 1 {
                let sb_next = off_sq[k].sqrt();
                let sb_cur = if k == 0 { 0.0 } else { off_sq[k - 1].sqrt() };
                let p_next = ((x - diag[k]) * p - sb_cur * p_prev) / sb_next;
                p_prev = p;
                p = p_next;
                sum += p * p;
            }
            mu0 / sum
        })
        .collect();
    (nodes, weights)
}
