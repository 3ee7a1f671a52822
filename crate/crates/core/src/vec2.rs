//! Small fixed-size linear algebra: planar vectors, 2×2 matrices and
//! vector-valued symmetric bilinear forms.

use std::ops::{Add, AddAssign, Index, Mul, Neg, Sub, SubAssign};

use serde::{Deserialize, Serialize};

use crate::scalar::Real;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Vec2<T> {
    pub x: T,
    pub y: T,
}

impl<T: Real> Vec2<T> {
    #[inline]
    pub fn new(x: T, y: T) -> Self {
        Self { x, y }
    }

    #[inline]
    pub fn zero() -> Self {
        Self::new(T::zero(), T::zero())
    }

    #[inline]
    pub fn dot(self, o: Self) -> T {
        self.x * o.x + self.y * o.y
    }

    /// 2-D cross product `self.x * o.y - self.y * o.x`.
    #[inline]
    pub fn cross(self, o: Self) -> T {
        self.x * o.y - self.y * o.x
    }

    /// Counterclockwise rotation by a right angle: `(x, y)^⊥ = (-y, x)`.
    #[inline]
    pub fn perp(self) -> Self {
        Self::new(-self.y, self.x)
    }

    #[inline]
    pub fn norm_sq(self) -> T {
        self.dot(self)
    }

    #[inline]
    pub fn norm(self) -> T {
        self.x.hypot(self.y)
    }

    #[inline]
    pub fn dist(self, o: Self) -> T {
        (self - o).norm()
    }

    #[inline]
    pub fn scale(self, s: T) -> Self {
        Self::new(self.x * s, self.y * s)
    }

    pub fn normalized(self) -> Self {
        let n = self.norm();
        if n > T::zero() {
            self.scale(n.recip())
        } else {
            self
        }
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn cast<U: Real>(self) -> Vec2<U> {
        Vec2::new(U::lit(self.x.as_f64()), U::lit(self.y.as_f64()))
    }
}

impl<T: Real> Add for Vec2<T> {
    type Output = Self;
    #[inline]
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y)
    }
}

impl<T: Real> Sub for Vec2<T> {
    type Output = Self;
    #[inline]
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y)
    }
}

impl<T: Real> AddAssign for Vec2<T> {
    #[inline]
    fn add_assign(&mut self, o: Self) {
        self.x += o.x;
        self.y += o.y;
    }
}

impl<T: Real> SubAssign for Vec2<T> {
    #[inline]
    fn sub_assign(&mut self, o: Self) {
        self.x -= o.x;
        self.y -= o.y;
    }
}

impl<T: Real> Neg for Vec2<T> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y)
    }
}

impl<T: Real> Mul<T> for Vec2<T> {
    type Output = Self;
    #[inline]
    fn mul(self, s: T) -> Self {
        self.scale(s)
    }
}

/// Row-major 2×2 matrix; `m[(i, j)]` is row `i`, column `j`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Mat2<T> {
    pub m: [[T; 2]; 2],
}

impl<T: Real> Mat2<T> {
    pub fn new(a00: T, a01: T, a10: T, a11: T) -> Self {
        Self {
            m: [[a00, a01], [a10, a11]],
        }
    }

    pub fn zero() -> Self {
        Self::new(T::zero(), T::zero(), T::zero(), T::zero())
    }

    #[inline]
    pub fn apply(&self, h: Vec2<T>) -> Vec2<T> {
        Vec2::new(
            self.m[0][0] * h.x + self.m[0][1] * h.y,
            self.m[1][0] * h.x + self.m[1][1] * h.y,
        )
    }

    pub fn trace(&self) -> T {
        self.m[0][0] + self.m[1][1]
    }

    /// Frobenius norm.
    pub fn norm(&self) -> T {
        self.m
            .iter()
            .flat_map(|r| r.iter())
            .map(|&v| v * v)
            .sum::<T>()
            .sqrt()
    }

    /// Spectral (operator) norm.
    pub fn op_norm(&self) -> T {
        let [[a, b], [c, d]] = self.m;
        let s = a * a + b * b + c * c + d * d;
        let det = a * d - b * c;
        let disc = (s * s - T::lit(4.0) * det * det).max(T::zero()).sqrt();
        ((s + disc) * T::half()).sqrt()
    }

    pub fn scale(&self, s: T) -> Self {
        let mut out = *self;
        for r in out.m.iter_mut() {
            for v in r.iter_mut() {
                *v *= s;
            }
        }
        out
    }

    pub fn transpose(&self) -> Self {
        Self::new(self.m[0][0], self.m[1][0], self.m[0][1], self.m[1][1])
    }
}

impl<T: Real> Add for Mat2<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        let mut out = self;
        out += o;
        out
    }
}

impl<T: Real> AddAssign for Mat2<T> {
    fn add_assign(&mut self, o: Self) {
        for i in 0..2 {
            for j in 0..2 {
                self.m[i][j] += o.m[i][j];
            }
        }
    }
}

impl<T: Real> Sub for Mat2<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        self + o.scale(-T::one())
    }
}

impl<T: Real> Index<(usize, usize)> for Mat2<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.m[i][j]
    }
}

/// Vector-valued bilinear form `t[i][j][k]`: component `i` of
/// `B(h1, h2) = Σ_jk t[i][j][k] h1_j h2_k`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Bilinear2<T> {
    pub t: [[[T; 2]; 2]; 2],
}

impl<T: Real> Bilinear2<T> {
    pub fn zero() -> Self {
        Self {
            t: [[[T::zero(); 2]; 2]; 2],
        }
    }

    pub fn apply(&self, h1: Vec2<T>, h2: Vec2<T>) -> Vec2<T> {
        let a = [h1.x, h1.y];
        let b = [h2.x, h2.y];
        let mut out = [T::zero(); 2];
        for (i, o) in out.iter_mut().enumerate() {
            for (j, aj) in a.iter().enumerate() {
                for (k, bk) in b.iter().enumerate() {
                    *o += self.t[i][j][k] * *aj * *bk;
                }
            }
        }
        Vec2::new(out[0], out[1])
    }

    pub fn scale(&self, s: T) -> Self {
        let mut out = *self;
        out.t
            .iter_mut()
            .flat_map(|a| a.iter_mut())
            .flat_map(|a| a.iter_mut())
            .for_each(|v| *v *= s);
        out
    }

    /// Frobenius norm over all eight entries.
    pub fn norm(&self) -> T {
        self.t
            .iter()
            .flat_map(|a| a.iter())
            .flat_map(|a| a.iter())
            .map(|&v| v * v)
            .sum::<T>()
            .sqrt()
    }
}

impl<T: Real> AddAssign for Bilinear2<T> {
    fn add_assign(&mut self, o: Self) {
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    self.t[i][j][k] += o.t[i][j][k];
                }
            }
        }
    }
}

impl<T: Real> Add for Bilinear2<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        let mut out = self;
        out += o;
        out
    }
}
