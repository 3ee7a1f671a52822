//! The g-SQG kernel `K(x) = −c_α / (2α |x|^{2α})`, its derivatives, and the
//! mollified family `K_ε(x) = χ(|x|/ε) K(x)`.
//!
//! All quantities are radial, so everything is assembled from the radial
//! profile `F(r)` and its first three derivatives.

use thiserror::Error;

use crate::scalar::Real;
use crate::vec2::{Bilinear2, Mat2, Vec2};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KernelError {
    #[error("alpha = {0} must lie strictly inside (0, 1/2)")]
    AlphaOutOfRange(f64),
    #[error("kernel constant c_alpha = {0} must be positive and finite")]
    BadConstant(f64),
    #[error("mollification radius epsilon = {0} must be finite and >= 0")]
    BadEpsilon(f64),
    #[error("kernel evaluated at the singularity x = 0 without mollification")]
    Singular,
}

/// Riesz-potential normalization `2Γ(1+α) / (4^{1−α} π Γ(1−α))`.
pub fn default_c_alpha(alpha: f64) -> f64 {
    2.0 * libm::tgamma(1.0 + alpha)
        / (4f64.powf(1.0 - alpha) * std::f64::consts::PI * libm::tgamma(1.0 - alpha))
}

/// Fractional order `α ∈ (0, ½)` with the kernel normalization `c_α`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaParam<T> {
    alpha: T,
    c_alpha: T,
}

impl<T: Real> AlphaParam<T> {
    pub fn new(alpha: T) -> Result<Self, KernelError> {
        let a = alpha.as_f64();
        if !(a > 0.0 && a < 0.5) {
            return Err(KernelError::AlphaOutOfRange(a));
        }
        Self::with_c_alpha(alpha, T::lit(default_c_alpha(a)))
    }

    pub fn with_c_alpha(alpha: T, c_alpha: T) -> Result<Self, KernelError> {
        let a = alpha.as_f64();
        if !(a > 0.0 && a < 0.5) {
            return Err(KernelError::AlphaOutOfRange(a));
        }
        if !(c_alpha > T::zero() && c_alpha.is_finite()) {
            return Err(KernelError::BadConstant(c_alpha.as_f64()));
        }
        Ok(Self { alpha, c_alpha })
    }

    pub fn alpha(&self) -> T {
        self.alpha
    }

    pub fn c_alpha(&self) -> T {
        self.c_alpha
    }

    /// `2α`, the Hölder exponent that recurs everywhere.
    pub fn two_alpha(&self) -> T {
        self.alpha * T::two()
    }
}

/// Mollification radius; `ε = 0` means the bare kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MollifierParam<T> {
    epsilon: T,
}

impl<T: Real> MollifierParam<T> {
    pub fn new(epsilon: T) -> Result<Self, KernelError> {
        if !(epsilon >= T::zero() && epsilon.is_finite()) {
            return Err(KernelError::BadEpsilon(epsilon.as_f64()));
        }
        Ok(Self { epsilon })
    }

    pub fn none() -> Self {
        Self { epsilon: T::zero() }
    }

    pub fn epsilon(&self) -> T {
        self.epsilon
    }

    pub fn is_mollified(&self) -> bool {
        self.epsilon > T::zero()
    }
}

/// Cutoff profile `χ` and its first three derivatives at `s ≥ 0`.
///
/// `χ = 0` on `[0, ½]`, `χ = 1` on `[1, ∞)`, and on `[½, 1]` it is the
/// smooth step `σ(2s − 1)` with `σ(t) = f(t) / (f(t) + f(1 − t))`,
/// `f(t) = exp(−1/t)`.
pub fn cutoff<T: Real>(s: T) -> [T; 4] {
    let zero = T::zero();
    if s <= T::half() {
        return [zero; 4];
    }
    if s >= T::one() {
        return [T::one(), zero, zero, zero];
    }
    let t = T::two() * s - T::one();
    let (f, g) = (glue(t), glue(T::one() - t));
    // g(t) = f(1 − t): odd derivatives flip sign.
    let d = [f[0] + g[0], f[1] - g[1], f[2] + g[2], f[3] - g[3]];
    let three = T::lit(3.0);
    let s0 = f[0] / d[0];
    let s1 = (f[1] - s0 * d[1]) / d[0];
    let s2 = (f[2] - T::two() * s1 * d[1] - s0 * d[2]) / d[0];
    let s3 = (f[3] - three * s2 * d[1] - three * s1 * d[2] - s0 * d[3]) / d[0];
    // Chain rule for t = 2s − 1.
    [s0, T::two() * s1, T::lit(4.0) * s2, T::lit(8.0) * s3]
}

/// `exp(−1/t)` and its first three derivatives for `t ∈ (0, 1)`.
fn glue<T: Real>(t: T) -> [T; 4] {
    let f = (-T::one() / t).exp();
    let i = T::one() / t;
    let (i2, i3) = (i * i, i * i * i);
    let (i4, i5, i6) = (i2 * i2, i2 * i3, i3 * i3);
    [
        f,
        f * i2,
        f * (i4 - T::two() * i3),
        f * (i6 - T::lit(6.0) * i5 + T::lit(6.0) * i4),
    ]
}

/// Radial profile `F(r) = χ(r/ε) K(r)` with derivatives up to third order.
#[derive(Debug, Clone, Copy)]
pub struct Radial<T> {
    pub r: T,
    pub f: [T; 4],
}

/// Kernel evaluator bundling `α`, `c_α` and `ε`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Kernel<T> {
    pub alpha: AlphaParam<T>,
    pub mollifier: MollifierParam<T>,
}

impl<T: Real> Kernel<T> {
    pub fn new(alpha: AlphaParam<T>, mollifier: MollifierParam<T>) -> Self {
        Self { alpha, mollifier }
    }

    pub fn epsilon(&self) -> T {
        self.mollifier.epsilon
    }

    /// `F(r)` and derivatives at `r > 0`; `order` limits the work done.
    #[inline]
    pub fn radial(&self, r: T, order: usize) -> Radial<T> {
        let two_a = self.alpha.two_alpha();
        let c = self.alpha.c_alpha;
        let p = r.powf(-two_a);
        let inv = T::one() / r;
        let mut k = [-c / two_a * p, T::zero(), T::zero(), T::zero()];
        if order >= 1 {
            k[1] = c * p * inv;
        }
        if order >= 2 {
            k[2] = -(two_a + T::one()) * k[1] * inv;
        }
        if order >= 3 {
            k[3] = -(two_a + T::two()) * k[2] * inv;
        }
        let eps = self.mollifier.epsilon;
        if eps == T::zero() || r >= eps {
            return Radial { r, f: k };
        }
        let chi = cutoff(r / eps);
        let ie = T::one() / eps;
        let x = [chi[0], chi[1] * ie, chi[2] * ie * ie, chi[3] * ie * ie * ie];
        let three = T::lit(3.0);
        Radial {
            r,
            f: [
                x[0] * k[0],
                x[1] * k[0] + x[0] * k[1],
                x[2] * k[0] + T::two() * x[1] * k[1] + x[0] * k[2],
                x[3] * k[0] + three * x[2] * k[1] + three * x[1] * k[2] + x[0] * k[3],
            ],
        }
    }

    fn check(&self, x: Vec2<T>) -> Result<T, KernelError> {
        let r = x.norm();
        if r == T::zero() {
            if self.mollifier.is_mollified() {
                return Ok(r);
            }
            return Err(KernelError::Singular);
        }
        Ok(r)
    }

    /// Inside the cutoff's zero zone (`|x| ≤ ε/2`) every derivative vanishes.
    fn in_zero_zone(&self, r: T) -> bool {
        self.mollifier.is_mollified() && r <= self.mollifier.epsilon * T::half()
    }

    pub fn k(&self, x: Vec2<T>) -> Result<T, KernelError> {
        let r = self.check(x)?;
        if self.in_zero_zone(r) {
            return Ok(T::zero());
        }
        Ok(self.radial(r, 0).f[0])
    }

    pub fn grad(&self, x: Vec2<T>) -> Result<Vec2<T>, KernelError> {
        let r = self.check(x)?;
        if self.in_zero_zone(r) {
            return Ok(Vec2::zero());
        }
        Ok(grad_from(x, &self.radial(r, 1)))
    }

    pub fn hessian(&self, x: Vec2<T>) -> Result<Mat2<T>, KernelError> {
        let r = self.check(x)?;
        if self.in_zero_zone(r) {
            return Ok(Mat2::zero());
        }
        Ok(hessian_from(x, &self.radial(r, 2)))
    }

    pub fn third(&self, x: Vec2<T>) -> Result<[[[T; 2]; 2]; 2], KernelError> {
        let r = self.check(x)?;
        if self.in_zero_zone(r) {
            return Ok([[[T::zero(); 2]; 2]; 2]);
        }
        Ok(third_from(x, &self.radial(r, 3)))
    }

    /// `∇^⊥K_ε(x) = (−∂₂K_ε, ∂₁K_ε)`.
    pub fn gradperp(&self, x: Vec2<T>) -> Result<Vec2<T>, KernelError> {
        Ok(self.grad(x)?.perp())
    }

    /// Jacobian `D(∇^⊥K_ε)`, entry `(i, j)` = `∂_j (∇^⊥K_ε)_i`.
    pub fn d_gradperp(&self, x: Vec2<T>) -> Result<Mat2<T>, KernelError> {
        Ok(perp_rows(&self.hessian(x)?))
    }

    /// Second derivative `D²(∇^⊥K_ε)` as a vector-valued bilinear form.
    pub fn d2_gradperp(&self, x: Vec2<T>) -> Result<Bilinear2<T>, KernelError> {
        let g = self.third(x)?;
        Ok(Bilinear2 { t: [neg2(g[1]), g[0]] })
    }
}

fn neg2<T: Real>(m: [[T; 2]; 2]) -> [[T; 2]; 2] {
    [[-m[0][0], -m[0][1]], [-m[1][0], -m[1][1]]]
}

/// Rows of `∇^⊥` applied to a symmetric matrix of partials.
#[inline]
pub fn perp_rows<T: Real>(h: &Mat2<T>) -> Mat2<T> {
    Mat2::new(-h.m[1][0], -h.m[1][1], h.m[0][0], h.m[0][1])
}

#[inline]
pub fn grad_from<T: Real>(x: Vec2<T>, rad: &Radial<T>) -> Vec2<T> {
    x.scale(rad.f[1] / rad.r)
}

/// Hessian `A n nᵀ + B I` with `A = F'' − F'/r`, `B = F'/r`.
#[inline]
pub fn hessian_from<T: Real>(x: Vec2<T>, rad: &Radial<T>) -> Mat2<T> {
    let r = rad.r;
    let n = x.scale(T::one() / r);
    let b = rad.f[1] / r;
    let a = rad.f[2] - b;
    Mat2::new(a * n.x * n.x + b, a * n.x * n.y, a * n.y * n.x, a * n.y * n.y + b)
}

/// Third derivative tensor of a radial function.
#[inline]
pub fn third_from<T: Real>(x: Vec2<T>, rad: &Radial<T>) -> [[[T; 2]; 2]; 2] {
    let r = rad.r;
    let n = [x.x / r, x.y / r];
    let [_, f1, f2, f3] = rad.f;
    let a = f2 - f1 / r;
    let a_prime = f3 - f2 / r + f1 / (r * r);
    let c = a_prime - T::two() * a / r;
    let d = a / r;
    let delta = |i: usize, j: usize| if i == j { T::one() } else { T::zero() };
    let mut out = [[[T::zero(); 2]; 2]; 2];
    for (i, oi) in out.iter_mut().enumerate() {
        for (j, oij) in oi.iter_mut().enumerate() {
            for (k, v) in oij.iter_mut().enumerate() {
                *v = c * n[i] * n[j] * n[k]
                    + d * (delta(i, k) * n[j] + delta(j, k) * n[i] + delta(i, j) * n[k]);
            }
        }
    }
    out
}

/// `K_ε(x)`; errors only at `x = 0` with `ε = 0`.
pub fn eval_k<T: Real>(x: Vec2<T>, p: &AlphaParam<T>, m: &MollifierParam<T>) -> Result<T, KernelError> {
    Kernel::new(*p, *m).k(x)
}

pub fn eval_gradperp_k<T: Real>(
    x: Vec2<T>,
    p: &AlphaParam<T>,
    m: &MollifierParam<T>,
) -> Result<Vec2<T>, KernelError> {
    Kernel::new(*p, *m).gradperp(x)
}

pub fn eval_d_gradperp_k<T: Real>(
    x: Vec2<T>,
    p: &AlphaParam<T>,
    m: &MollifierParam<T>,
) -> Result<Mat2<T>, KernelError> {
    Kernel::new(*p, *m).d_gradperp(x)
}

pub fn eval_d2_gradperp_k<T: Real>(
    x: Vec2<T>,
    p: &AlphaParam<T>,
    m: &MollifierParam<T>,
) -> Result<Bilinear2<T>, KernelError> {
    Kernel::new(*p, *m).d2_gradperp(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quarter() -> AlphaParam<f64> {
        AlphaParam::new(0.25).unwrap()
    }

    #[test]
    fn alpha_range_is_enforced() {
        assert!(AlphaParam::<f64>::new(0.0).is_err());
        assert!(AlphaParam::<f64>::new(0.5).is_err());
        assert!(AlphaParam::<f64>::with_c_alpha(0.2, -1.0).is_err());
        assert!(MollifierParam::<f64>::new(-0.1).is_err());
    }

    #[test]
    fn default_constant_at_quarter() {
        // 2Γ(5/4) / (4^{3/4} π Γ(3/4)), Γ values from tables.
        let want = 2.0 * 0.906_402_477_055_477 / (4f64.powf(0.75) * std::f64::consts::PI * 1.225_416_702_465_178);
        assert!((default_c_alpha(0.25) - want).abs() < 1e-14);
    }

    #[test]
    fn cutoff_profile_shape() {
        assert_eq!(cutoff(0.3_f64), [0.0; 4]);
        assert_eq!(cutoff(1.2_f64)[0], 1.0);
        assert!((cutoff(0.75_f64)[0] - 0.5).abs() < 1e-15);
        let mut prev = 0.0;
        for k in 1..100 {
            let s = 0.5 + 0.005 * k as f64;
            let v = cutoff(s);
            assert!(v[0] >= prev && v[1] >= 0.0);
            prev = v[0];
            // Derivative chain checked by central differences.
            let h = 1e-6;
            for d in 0..3 {
                let fd = (cutoff(s + h)[d] - cutoff(s - h)[d]) / (2.0 * h);
                assert!((fd - v[d + 1]).abs() < 1e-4 * (1.0 + v[d + 1].abs()), "order {d} at {s}");
            }
        }
    }

    #[test]
    fn singular_point_is_rejected() {
        let p = quarter();
        assert_eq!(eval_k(Vec2::zero(), &p, &MollifierParam::none()), Err(KernelError::Singular));
        let m = MollifierParam::new(0.1).unwrap();
        assert_eq!(eval_k(Vec2::zero(), &p, &m), Ok(0.0));
    }

    #[test]
    fn closed_form_values() {
        let p = quarter();
        let c = p.c_alpha();
        let none = MollifierParam::none();
        assert!((eval_k(Vec2::new(1.0, 0.0), &p, &none).unwrap() + c / 0.5).abs() < 1e-15);
        let g = eval_gradperp_k(Vec2::new(1.0, 0.0), &p, &none).unwrap();
        assert!(g.x.abs() < 1e-16 && (g.y - c).abs() < 1e-15);
        let g = eval_gradperp_k(Vec2::new(0.0, 2.0), &p, &none).unwrap();
        assert!((g.x + 2.0 * c / 2f64.powf(2.5)).abs() < 1e-15 && g.y.abs() < 1e-16);
        let m = MollifierParam::new(0.5).unwrap();
        assert_eq!(eval_k(Vec2::new(0.2, 0.0), &p, &m).unwrap(), 0.0);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let p = quarter();
        for &eps in &[0.0, 0.4] {
            let kern = Kernel::new(p, MollifierParam::new(eps).unwrap());
            for &x in &[Vec2::new(1.0, 0.0), Vec2::new(0.23, -0.21), Vec2::new(-1.7, 2.4)] {
                let h = 1e-5;
                let d = kern.d_gradperp(x).unwrap();
                let d2 = kern.d2_gradperp(x).unwrap();
                for j in 0..2 {
                    let e = if j == 0 { Vec2::new(h, 0.0) } else { Vec2::new(0.0, h) };
                    let fd = (kern.gradperp(x + e).unwrap() - kern.gradperp(x - e).unwrap()).scale(0.5 / h);
                    let col = Vec2::new(d.m[0][j], d.m[1][j]);
                    assert!((fd - col).norm() <= 1e-6 * d.norm(), "eps {eps} x {x:?}");
                    let fd2 = (kern.d_gradperp(x + e).unwrap() - kern.d_gradperp(x - e).unwrap()).scale(0.5 / h);
                    for i in 0..2 {
                        for k in 0..2 {
                            assert!((fd2.m[i][k] - d2.t[i][k][j]).abs() <= 1e-6 * d2.norm());
                        }
                    }
                }
                assert!(d.trace().abs() <= 1e-14 * d.norm());
            }
        }
    }
}
