//! Velocity induced by a layer cake, its derivatives, and the mollified
//! variants.
//!
//! Green's theorem turns the area integral `∫ ∇^⊥K(x − y) θ(y) dy` into
//! `u(x) = −Σ_j μ_j ∮ K(x − z_j) T_j ds` over positively oriented curves;
//! the same identity applied to `∇K_ε` and `D²K_ε` gives contour forms of
//! `Du_ε` and `D²u_ε`. Area quadratures on a grid of `θ` are kept as
//! independent oracles.

mod along;
mod area;
mod contour;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::kernel::{Kernel, KernelError, MollifierParam};
use crate::layercake::LayerCake;
use crate::scalar::Real;
use crate::vec2::{Bilinear2, Mat2, Vec2};

pub use along::AlongCurve;
pub use area::{theta_at, ThetaGrid};
pub use contour::{ContourRules, PreparedCurve};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VelocityError {
    #[error("quadrature did not converge: relative increment {achieved:.3e} at depth {depth}")]
    Quadrature { achieved: f64, depth: usize },
    #[error("area grid spacing {h} exceeds epsilon/4 = {limit}")]
    GridTooCoarse { h: f64, limit: f64 },
    #[error("this evaluation needs a mollified kernel (epsilon > 0)")]
    NotMollified,
    #[error("invalid velocity settings: {0}")]
    Settings(String),
    #[error(transparent)]
    Kernel(#[from] KernelError),
}

/// Which velocity drives the dynamics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum VelocityMode {
    /// Bare kernel, contour quadrature.
    #[default]
    Exact,
    /// `K_ε`, contour quadrature.
    MollifiedContour,
    /// `K_ε`, area quadrature on a grid of `θ`.
    MollifiedArea,
}

/// Prescribed velocity added to the induced one (test harness fields).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum ExternalField<T> {
    #[default]
    None,
    Uniform(Vec2<T>),
    /// `rate · (−x, y)`: contracts along `x`, stretches along `y`.
    Strain { rate: T },
}

impl<T: Real> ExternalField<T> {
    pub fn u(&self, x: Vec2<T>) -> Vec2<T> {
        match *self {
            ExternalField::None => Vec2::zero(),
            ExternalField::Uniform(v) => v,
            ExternalField::Strain { rate } => Vec2::new(-rate * x.x, rate * x.y),
        }
    }

    pub fn du(&self) -> Mat2<T> {
        match *self {
            ExternalField::Strain { rate } => Mat2::new(-rate, T::zero(), T::zero(), rate),
            _ => Mat2::zero(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VelocitySettings<T> {
    pub mode: VelocityMode,
    /// Mollification radius for the mollified modes and derivative forms.
    pub epsilon: T,
    /// Relative increment at which adaptive panel refinement stops.
    pub tol: T,
    pub max_depth: usize,
    /// Area-grid spacing; defaults to `ε/4`.
    pub grid_h: Option<T>,
    pub external: ExternalField<T>,
    /// Include the velocity induced by the cake itself.
    pub self_induced: bool,
    /// `−1` integrates the reversed flow.
    pub sign: T,
}

impl<T: Real> Default for VelocitySettings<T> {
    fn default() -> Self {
        Self {
            mode: VelocityMode::Exact,
            epsilon: T::lit(0.1),
            tol: T::lit(1e-8),
            max_depth: 24,
            grid_h: None,
            external: ExternalField::None,
            self_induced: true,
            sign: T::one(),
        }
    }
}

/// Velocity evaluator for one frozen configuration.
#[derive(Debug, Clone)]
pub struct VelocityField<'a, T> {
    cake: &'a LayerCake<T>,
    settings: VelocitySettings<T>,
    bare: Kernel<T>,
    mollified: Kernel<T>,
    curves: Vec<PreparedCurve<T>>,
    rules: ContourRules<T>,
    grid: Option<ThetaGrid<T>>,
}

impl<'a, T: Real> VelocityField<'a, T> {
    pub fn new(cake: &'a LayerCake<T>, settings: VelocitySettings<T>) -> Result<Self, VelocityError> {
        if !(settings.tol > T::zero()) || settings.max_depth == 0 {
            return Err(VelocityError::Settings("tol and max_depth must be positive".into()));
        }
        let alpha = *cake.alpha();
        let bare = Kernel::new(alpha, MollifierParam::none());
        let mollified = Kernel::new(alpha, MollifierParam::new(settings.epsilon)?);
        if settings.mode != VelocityMode::Exact && !mollified.mollifier.is_mollified() {
            return Err(VelocityError::NotMollified);
        }
        let curves = cake.curves().map(PreparedCurve::new).collect();
        let rules = ContourRules::new(alpha.two_alpha(), settings.tol, settings.max_depth);
        let mut field = Self { cake, settings, bare, mollified, curves, rules, grid: None };
        if field.settings.mode == VelocityMode::MollifiedArea {
            field.grid = Some(field.theta_grid()?);
        }
        Ok(field)
    }

    pub fn cake(&self) -> &LayerCake<T> {
        self.cake
    }

    pub fn settings(&self) -> &VelocitySettings<T> {
        &self.settings
    }

    pub fn prepared(&self, curve: usize) -> &PreparedCurve<T> {
        &self.curves[curve]
    }

    fn eps(&self) -> Result<T, VelocityError> {
        let e = self.mollified.epsilon();
        if e > T::zero() {
            Ok(e)
        } else {
            Err(VelocityError::NotMollified)
        }
    }

    /// Grid of cell-averaged `θ` with spacing `grid_h` (default `ε/4`).
    pub fn theta_grid(&self) -> Result<ThetaGrid<T>, VelocityError> {
        let eps = self.eps()?;
        let limit = eps * T::lit(0.25);
        let h = self.settings.grid_h.unwrap_or(limit);
        if h > limit * (T::one() + T::lit(1e-12)) || !(h > T::zero()) {
            return Err(VelocityError::GridTooCoarse { h: h.as_f64(), limit: limit.as_f64() });
        }
        Ok(ThetaGrid::rasterize(self.cake, h, h * T::two(), 8))
    }

    fn node_of(&self, curve: usize, x: Vec2<T>) -> Option<usize> {
        self.cake.components()[curve].curve().nodes().iter().position(|&p| p == x)
    }

    /// Sum over components of `−μ_j ∮ f(x − z_j) T_j ds`.
    fn contour_sum<V, F>(&self, x: Vec2<T>, node: Option<(usize, usize)>, singular: bool, extra: T, f: &F) -> Result<V, VelocityError>
    where
        V: crate::quadrature::QuadValue<T>,
        F: Fn(Vec2<T>, Vec2<T>) -> V,
    {
        let mut acc = V::zero();
        for (j, comp) in self.cake.components().iter().enumerate() {
            let on = match node {
                Some((c, i)) if c == j => Some(i),
                Some(_) => None,
                None => self.node_of(j, x),
            };
            let v = contour::integrate(&self.curves[j], &self.rules, x, on, singular, extra, f)?;
            acc = acc + v.scaled(-comp.weight());
        }
        Ok(acc)
    }

    fn bare_integrand(&self) -> impl Fn(Vec2<T>, Vec2<T>) -> Vec2<T> + '_ {
        let c = -self.bare.alpha.c_alpha() / self.bare.alpha.two_alpha();
        let a = self.bare.alpha.alpha();
        move |d: Vec2<T>, t: Vec2<T>| t.scale(c * d.norm_sq().powf(-a))
    }

    fn mollified_integrand(&self) -> impl Fn(Vec2<T>, Vec2<T>) -> Vec2<T> + '_ {
        move |d: Vec2<T>, t: Vec2<T>| t.scale(self.mollified.k(d).unwrap_or(T::zero()))
    }

    /// Induced velocity with the bare kernel. `x` must be off the curves
    /// or exactly one of their nodes.
    pub fn u_boundary(&self, x: Vec2<T>) -> Result<Vec2<T>, VelocityError> {
        self.contour_sum(x, None, true, T::zero(), &self.bare_integrand())
    }

    /// Induced velocity at node `node` of component `curve`.
    pub fn u_at_node(&self, curve: usize, node: usize) -> Result<Vec2<T>, VelocityError> {
        let x = self.cake.components()[curve].curve().nodes()[node];
        self.contour_sum(x, Some((curve, node)), true, T::zero(), &self.bare_integrand())
    }

    /// `u_ε(x)` by contour quadrature.
    pub fn u_eps_contour(&self, x: Vec2<T>) -> Result<Vec2<T>, VelocityError> {
        let eps = self.eps()?;
        self.contour_sum(x, None, false, eps, &self.mollified_integrand())
    }

    /// `Du_ε(x)` by contour quadrature: `∂_j u_i = −Σ μ ∮ ∂_j K_ε(x − z) T_i ds`.
    pub fn grad_u_eps_contour(&self, x: Vec2<T>) -> Result<Mat2<T>, VelocityError> {
        let eps = self.eps()?;
        let kern = self.mollified;
        let f = move |d: Vec2<T>, t: Vec2<T>| {
            let g = kern.grad(d).unwrap_or(Vec2::zero());
            Mat2::new(t.x * g.x, t.x * g.y, t.y * g.x, t.y * g.y)
        };
        self.contour_sum(x, None, false, eps, &f)
    }

    /// `D²u_ε(x)` by contour quadrature.
    pub fn d2u_eps_contour(&self, x: Vec2<T>) -> Result<Bilinear2<T>, VelocityError> {
        let eps = self.eps()?;
        let kern = self.mollified;
        let f = move |d: Vec2<T>, t: Vec2<T>| {
            let h = kern.hessian(d).unwrap_or(Mat2::zero());
            let tv = [t.x, t.y];
            let mut b = Bilinear2::zero();
            for (i, ti) in tv.iter().enumerate() {
                for j in 0..2 {
                    for k in 0..2 {
                        b.t[i][j][k] = *ti * h.m[j][k];
                    }
                }
            }
            b
        };
        self.contour_sum(x, None, false, eps, &f)
    }

    /// `u_ε(x)` by midpoint quadrature over the `θ` grid.
    pub fn u_eps_area(&self, x: Vec2<T>, grid: &ThetaGrid<T>) -> Result<Vec2<T>, VelocityError> {
        self.check_grid(grid)?;
        Ok(area::u_area(grid, &self.mollified, x))
    }

    /// `Du_ε(x)` by the area difference form.
    pub fn grad_u_area(&self, x: Vec2<T>, grid: &ThetaGrid<T>) -> Result<Mat2<T>, VelocityError> {
        self.check_grid(grid)?;
        Ok(area::grad_area(grid, &self.mollified, theta_at(self.cake, x), x))
    }

    /// `D²u_ε(x)` by the area difference form.
    pub fn d2u_area(&self, x: Vec2<T>, grid: &ThetaGrid<T>) -> Result<Bilinear2<T>, VelocityError> {
        self.check_grid(grid)?;
        Ok(area::d2_area(grid, &self.mollified, theta_at(self.cake, x), x))
    }

    fn check_grid(&self, grid: &ThetaGrid<T>) -> Result<(), VelocityError> {
        let eps = self.eps()?;
        let limit = eps * T::lit(0.25);
        if grid.h > limit * (T::one() + T::lit(1e-12)) {
            return Err(VelocityError::GridTooCoarse { h: grid.h.as_f64(), limit: limit.as_f64() });
        }
        Ok(())
    }

    /// Induced `Du_ε` from the configured mollified backend.
    pub fn grad_u_mollified(&self, x: Vec2<T>) -> Result<Mat2<T>, VelocityError> {
        match &self.grid {
            Some(g) => self.grad_u_area(x, g),
            None => self.grad_u_eps_contour(x),
        }
    }

    /// Induced `D²u_ε(h₁, h₂)` from the configured mollified backend.
    pub fn d2u_mollified(&self, x: Vec2<T>, h1: Vec2<T>, h2: Vec2<T>) -> Result<Vec2<T>, VelocityError> {
        let b = match &self.grid {
            Some(g) => self.d2u_area(x, g)?,
            None => self.d2u_eps_contour(x)?,
        };
        Ok(b.apply(h1, h2))
    }

    /// Induced velocity at `x` in the configured mode (off-curve or node).
    fn induced(&self, x: Vec2<T>, node: Option<(usize, usize)>) -> Result<Vec2<T>, VelocityError> {
        match self.settings.mode {
            VelocityMode::Exact => self.contour_sum(x, node, true, T::zero(), &self.bare_integrand()),
            VelocityMode::MollifiedContour => {
                let eps = self.eps()?;
                self.contour_sum(x, node, false, eps, &self.mollified_integrand())
            }
            VelocityMode::MollifiedArea => {
                Ok(area::u_area(self.grid.as_ref().expect("grid built for area mode"), &self.mollified, x))
            }
        }
    }

    /// Total velocity (induced + external, with the configured sign).
    pub fn velocity(&self, x: Vec2<T>) -> Result<Vec2<T>, VelocityError> {
        self.velocity_inner(x, None)
    }

    fn velocity_inner(&self, x: Vec2<T>, node: Option<(usize, usize)>) -> Result<Vec2<T>, VelocityError> {
        let mut u = self.settings.external.u(x);
        if self.settings.self_induced {
            u += self.induced(x, node)?;
        }
        Ok(u.scale(self.settings.sign))
    }

    /// Total velocity gradient for the along-curve identities; induced part
    /// from the mollified backend.
    pub fn grad_total(&self, x: Vec2<T>) -> Result<Mat2<T>, VelocityError> {
        let mut d = self.settings.external.du();
        if self.settings.self_induced {
            d += self.grad_u_mollified(x)?;
        }
        Ok(d.scale(self.settings.sign))
    }

    pub fn d2_total(&self, x: Vec2<T>) -> Result<Bilinear2<T>, VelocityError> {
        if !self.settings.self_induced {
            return Ok(Bilinear2::zero());
        }
        let b = match &self.grid {
            Some(g) => self.d2u_area(x, g)?,
            None => self.d2u_eps_contour(x)?,
        };
        Ok(b.scale(self.settings.sign))
    }

    /// Velocity at every node, grouped by component.
    pub fn nodal_velocities(&self) -> Result<Vec<Vec<Vec2<T>>>, VelocityError> {
        let targets: Vec<(usize, usize)> = self
            .cake
            .components()
            .iter()
            .enumerate()
            .flat_map(|(j, c)| (0..c.curve().len()).map(move |i| (j, i)))
            .collect();
        let flat: Result<Vec<Vec2<T>>, VelocityError> = targets
            .par_iter()
            .map(|&(j, i)| {
                let x = self.cake.components()[j].curve().nodes()[i];
                self.velocity_inner(x, Some((j, i)))
            })
            .collect();
        let flat = flat?;
        let mut out = Vec::with_capacity(self.cake.len());
        let mut k = 0;
        for c in self.cake.components() {
            out.push(flat[k..k + c.curve().len()].to_vec());
            k += c.curve().len();
        }
        Ok(out)
    }
}

/// Largest difference quotient `|u(x) − u(y)| / |x − y|` over node pairs:
/// all pairs up to `max_all_pairs` points, otherwise neighbours plus
/// `random_pairs` seeded random pairs.
pub fn lipschitz_estimate<T: Real>(
    points: &[Vec2<T>],
    values: &[Vec2<T>],
    max_all_pairs: usize,
    random_pairs: usize,
    seed: u64,
) -> T {
    let n = points.len();
    if n < 2 {
        return T::zero();
    }
    let quotient = |i: usize, j: usize| {
        let d = points[i].dist(points[j]);
        if d > T::zero() {
            values[i].dist(values[j]) / d
        } else {
            T::zero()
        }
    };
    if n <= max_all_pairs {
        return (0..n)
            .into_par_iter()
            .map(|i| (i + 1..n).map(|j| quotient(i, j)).fold(T::zero(), T::max))
            .reduce(T::zero, T::max);
    }
    let mut best = (0..n - 1).map(|i| quotient(i, i + 1)).fold(T::zero(), T::max);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..random_pairs {
        let i = rng.gen_range(0..n);
        let j = rng.gen_range(0..n);
        if i != j {
            best = best.max(quotient(i, j));
        }
    }
    best
}
