//! Area quadrature of the mollified velocity and its derivatives on a
//! uniform grid of cell-averaged `θ`.

use rayon::prelude::*;

use crate::kernel::Kernel;
use crate::layercake::{LayerCake, ThetaValue};
use crate::quadrature::{composite, GaussRule, QuadValue};
use crate::scalar::Real;
use crate::vec2::{Bilinear2, Mat2, Vec2};

/// Cell averages of `θ` on `nx × ny` square cells of side `h`; cell
/// `(i, j)` has center `(x0 + (i + ½)h, y0 + (j + ½)h)`.
///
/// The scanline intervals of every sub-row are kept so that cells close to
/// an evaluation point can be split into `sub × sub` pieces whose coverage
/// is exact along `x`.
#[derive(Debug, Clone)]
pub struct ThetaGrid<T> {
    pub x0: T,
    pub y0: T,
    pub h: T,
    pub nx: usize,
    pub ny: usize,
    pub values: Vec<T>,
    sub: usize,
    intervals: Vec<Vec<(T, T, T)>>,
}

impl<T: Real> ThetaGrid<T> {
    /// Rasterizes the cake: coverage is exact along `x` and sampled on
    /// `sub_rows` lines per cell along `y`.
    pub fn rasterize(cake: &LayerCake<T>, h: T, pad: T, sub_rows: usize) -> Self {
        let sub_rows = sub_rows.max(1);
        let Some(bb) = cake.curves().map(|c| c.bbox()).reduce(|a, b| a.union(b)) else {
            return Self {
                x0: T::zero(),
                y0: T::zero(),
                h,
                nx: 0,
                ny: 0,
                values: Vec::new(),
                sub: sub_rows,
                intervals: Vec::new(),
            };
        };
        let x0 = bb.min.x - pad;
        let y0 = bb.min.y - pad;
        let nx = ((bb.max.x + pad - x0) / h).ceil().to_usize().expect("finite grid") + 1;
        let ny = ((bb.max.y + pad - y0) / h).ceil().to_usize().expect("finite grid") + 1;
        let sub = T::from_usize(sub_rows);
        let intervals: Vec<Vec<(T, T, T)>> = (0..ny * sub_rows)
            .into_par_iter()
            .map(|r| {
                let y = y0 + (T::from_usize(r) + T::half()) / sub * h;
                let mut out = Vec::new();
                for comp in cake.components() {
                    let nodes = comp.curve().nodes();
                    let mut xs = Vec::new();
                    for i in 0..nodes.len() {
                        let (a, b) = (nodes[i], nodes[(i + 1) % nodes.len()]);
                        if (a.y <= y) != (b.y <= y) {
                            xs.push(a.x + (y - a.y) * (b.x - a.x) / (b.y - a.y));
                        }
                    }
                    xs.sort_by(|p, q| p.partial_cmp(q).expect("finite crossing"));
                    out.extend(xs.chunks_exact(2).map(|p| (p[0], p[1], comp.weight())));
                }
                out
            })
            .collect();
        let values = (0..ny)
            .into_par_iter()
            .flat_map_iter(|j| {
                let mut row = vec![T::zero(); nx];
                for rows in &intervals[j * sub_rows..(j + 1) * sub_rows] {
                    for &(xa, xb, w) in rows {
                        deposit(&mut row, x0, h, xa, xb, w / sub);
                    }
                }
                row
            })
            .collect();
        Self { x0, y0, h, nx, ny, values, sub: sub_rows, intervals }
    }

    pub fn center(&self, i: usize, j: usize) -> Vec2<T> {
        Vec2::new(
            self.x0 + (T::from_usize(i) + T::half()) * self.h,
            self.y0 + (T::from_usize(j) + T::half()) * self.h,
        )
    }

    fn corners(&self) -> [Vec2<T>; 4] {
        let x1 = self.x0 + self.h * T::from_usize(self.nx);
        let y1 = self.y0 + self.h * T::from_usize(self.ny);
        [Vec2::new(self.x0, self.y0), Vec2::new(x1, self.y0), Vec2::new(x1, y1), Vec2::new(self.x0, y1)]
    }

    /// Integral of the grid `θ`.
    pub fn mass(&self) -> T {
        self.values.iter().copied().sum::<T>() * self.h * self.h
    }

    /// `Σ_c (θ_c − θ_x) h² f(x − y_c)`, with cells whose center lies within
    /// `near` of `x` split into `sub × sub` pieces.
    fn accumulate<V: QuadValue<T>>(&self, x: Vec2<T>, theta_x: T, near: T, f: impl Fn(Vec2<T>) -> V) -> V {
        let h = self.h;
        let hs = h / T::from_usize(self.sub);
        let mut acc = V::zero();
        let mut fine = V::zero();
        let near_sq = near * near;
        for j in 0..self.ny {
            for i in 0..self.nx {
                let c = self.center(i, j);
                if (c - x).norm_sq() < near_sq {
                    let lo = self.x0 + T::from_usize(i) * h;
                    for k in 0..self.sub {
                        let rows = &self.intervals[j * self.sub + k];
                        let yk = self.y0 + T::from_usize(j) * h + (T::from_usize(k) + T::half()) * hs;
                        for m in 0..self.sub {
                            let a = lo + T::from_usize(m) * hs;
                            let b = a + hs;
                            let cover: T = rows
                                .iter()
                                .map(|&(xa, xb, w)| w * (xb.min(b) - xa.max(a)).max(T::zero()))
                                .sum::<T>()
                                / hs;
                            let dv = cover - theta_x;
                            if dv != T::zero() {
                                fine = fine + f(x - Vec2::new(a + hs * T::half(), yk)).scaled(dv);
                            }
                        }
                    }
                } else {
                    let dv = self.values[j * self.nx + i] - theta_x;
                    if dv != T::zero() {
                        acc = acc + f(x - c).scaled(dv);
                    }
                }
            }
        }
        acc.scaled(h * h) + fine.scaled(hs * hs)
    }
}

/// Adds `w × (covered fraction)` of `[xa, xb]` to the cells of a row.
fn deposit<T: Real>(row: &mut [T], x0: T, h: T, xa: T, xb: T, w: T) {
    let nx = row.len();
    let ia = ((xa - x0) / h).floor().to_isize().unwrap_or(0).clamp(0, nx as isize - 1) as usize;
    let ib = ((xb - x0) / h).floor().to_isize().unwrap_or(0).clamp(0, nx as isize - 1) as usize;
    for (i, cell) in row.iter_mut().enumerate().take(ib + 1).skip(ia) {
        let lo = x0 + T::from_usize(i) * h;
        let hi = lo + h;
        let cover = (xb.min(hi) - xa.max(lo)).max(T::zero());
        *cell += w * cover / h;
    }
}

/// Radius inside which cells are refined: the whole non-smooth part of the
/// mollified kernel plus a margin of two cells.
fn near_radius<T: Real>(grid: &ThetaGrid<T>, kern: &Kernel<T>) -> T {
    kern.epsilon() + grid.h * T::two()
}

/// Value of `θ` used in the difference forms at `x`: the one-sided average
/// on curves.
pub fn theta_at<T: Real>(cake: &LayerCake<T>, x: Vec2<T>) -> T {
    match cake.evaluate_theta(x) {
        ThetaValue::Interior(v) => v,
        ThetaValue::Boundary { inside, outside } => (inside + outside) * T::half(),
    }
}

/// `Σ_c θ_c h² ∇^⊥K_ε(x − y_c)`.
pub fn u_area<T: Real>(grid: &ThetaGrid<T>, kern: &Kernel<T>, x: Vec2<T>) -> Vec2<T> {
    grid.accumulate(x, T::zero(), near_radius(grid, kern), |d| kern.gradperp(d).expect("mollified kernel is regular"))
}

/// Composite rule over the rectangle boundary, panels no longer than `ε/4`.
fn boundary_integral<T: Real, V: QuadValue<T>>(
    grid: &ThetaGrid<T>,
    eps: T,
    f: impl Fn(Vec2<T>, Vec2<T>) -> V,
) -> V {
    let rule = GaussRule::<T>::legendre(8);
    let c = grid.corners();
    let mut acc = V::zero();
    for k in 0..4 {
        let (a, b) = (c[k], c[(k + 1) % 4]);
        let len = a.dist(b);
        let normal = (b - a).scale(T::one() / len).perp().scale(-T::one());
        let panels = (len / (eps * T::lit(0.25))).ceil().to_usize().unwrap_or(1).max(1);
        acc = acc
            + composite(&rule, T::zero(), len, panels, |s| f(a + (b - a).scale(s / len), normal));
    }
    acc
}

/// Difference form `∫ D(∇^⊥K_ε)(x − y)(θ(y) − θ(x)) dy`; the part of the
/// plane outside the grid is handled exactly by Green's theorem on the
/// rectangle.
pub fn grad_area<T: Real>(grid: &ThetaGrid<T>, kern: &Kernel<T>, theta_x: T, x: Vec2<T>) -> Mat2<T> {
    let mut acc = grid.accumulate(x, theta_x, near_radius(grid, kern), |d| kern.d_gradperp(d).expect("regular"));
    if theta_x != T::zero() {
        // ∫_R ∂_j Ψ_i(x − y) dy = −∮ Ψ_i(x − y) n_j dS.
        let rect: Mat2<T> = boundary_integral(grid, kern.epsilon(), |y, n| {
            let g = kern.gradperp(x - y).expect("regular");
            Mat2::new(g.x * n.x, g.x * n.y, g.y * n.x, g.y * n.y)
        });
        acc += rect.scale(-theta_x);
    }
    acc
}

/// Difference form of `D²u_ε(x)` as in [`grad_area`].
pub fn d2_area<T: Real>(grid: &ThetaGrid<T>, kern: &Kernel<T>, theta_x: T, x: Vec2<T>) -> Bilinear2<T> {
    let mut acc = grid.accumulate(x, theta_x, near_radius(grid, kern), |d| kern.d2_gradperp(d).expect("regular"));
    if theta_x != T::zero() {
        // ∫_R ∂_j∂_k Ψ_i(x − y) dy = −∮ ∂_k Ψ_i(x − y) n_j dS.
        let rect: Bilinear2<T> = boundary_integral(grid, kern.epsilon(), |y, n| {
            let d = kern.d_gradperp(x - y).expect("regular");
            let nv = [n.x, n.y];
            let mut b = Bilinear2::zero();
            for i in 0..2 {
                for jj in 0..2 {
                    for k in 0..2 {
                        b.t[i][jj][k] = d.m[i][k] * nv[jj];
                    }
                }
            }
            b
        });
        acc += rect.scale(-theta_x);
    }
    acc
}
