//! Velocity derivatives along a curve and the length / curvature-energy
//! rates assembled from them.

use rayon::prelude::*;

use crate::quadrature::GaussRule;
use crate::scalar::Real;
use crate::spline::PeriodicSpline;
use crate::vec2::Vec2;

use super::{VelocityError, VelocityField};

/// Per-node quantities along one curve (unit tangent `T`, normal `N = T^⊥`).
#[derive(Debug, Clone)]
pub struct AlongCurve<T> {
    pub u: Vec<Vec2<T>>,
    /// `∂_s u · T` from spline differentiation of the nodal velocities.
    pub ds_u_t: Vec<T>,
    pub ds_u_n: Vec<T>,
    /// `Du(N) · N` from the mollified backend.
    pub du_nn: Vec<T>,
    /// `D²u(T, T) · N` from the mollified backend.
    pub d2u_ttn: Vec<T>,
    pub kappa: Vec<T>,
    /// Geometry spline of the curve, used to integrate nodal data.
    geometry: PeriodicSpline<T>,
}

impl<T: Real> AlongCurve<T> {
    /// `∮ f ds` for nodal values `f`: the values are interpolated by a
    /// periodic spline on the curve's knots and integrated against the
    /// spline speed, which stays fourth order on nonuniform nodes.
    pub fn integrate(&self, values: &[T]) -> T {
        let geo = &self.geometry;
        let f = PeriodicSpline::new(values.iter().map(|&v| Vec2::new(v, T::zero())).collect(), geo.widths().to_vec());
        let rule = GaussRule::<T>::legendre(8);
        (0..geo.len())
            .map(|s| rule.integrate(T::zero(), geo.width(s), |t| f.eval(s, t).0.x * geo.eval(s, t).1.norm()))
            .sum()
    }

    /// `∮ ∂_s u · T ds`.
    pub fn length_rate(&self) -> T {
        self.integrate(&self.ds_u_t)
    }

    /// Right-hand side of the curvature-energy evolution
    /// `∫ κ² (2 Du(N)·N − 3 ∂_s u·T) ds + 2 ∫ κ D²u(T,T)·N ds`.
    pub fn h2_rate(&self) -> T {
        let two = T::two();
        let three = T::lit(3.0);
        let density: Vec<T> = (0..self.kappa.len())
            .map(|i| {
                let k = self.kappa[i];
                k * k * (two * self.du_nn[i] - three * self.ds_u_t[i]) + two * k * self.d2u_ttn[i]
            })
            .collect();
        self.integrate(&density)
    }
}

impl<'a, T: Real> VelocityField<'a, T> {
    fn velocity_spline(&self, curve: usize, u: &[Vec2<T>]) -> PeriodicSpline<T> {
        let geo = &self.prepared(curve).spline;
        PeriodicSpline::new(u.to_vec(), geo.widths().to_vec())
    }

    /// `∮ ∂_s U · T ds` with `U` the spline of the nodal velocities on the
    /// curve's own knots: the exact time derivative of the spline length
    /// when nodes move with velocities `u` (knots held fixed).
    pub fn length_rate(&self, curve: usize, u: &[Vec2<T>]) -> T {
        let geo = &self.prepared(curve).spline;
        let vel = self.velocity_spline(curve, u);
        let rule = GaussRule::<T>::legendre(8);
        (0..geo.len())
            .map(|s| {
                rule.integrate(T::zero(), geo.width(s), |t| {
                    let d1 = geo.eval(s, t).1;
                    vel.eval(s, t).1.dot(d1) / d1.norm()
                })
            })
            .sum()
    }

    /// Along-curve derivative data at the nodes of `curve`, using the
    /// given nodal velocities.
    pub fn du_along_curve_with(&self, curve: usize, u: &[Vec2<T>]) -> Result<AlongCurve<T>, VelocityError> {
        let geo = &self.prepared(curve).spline;
        let n = geo.len();
        let vel = self.velocity_spline(curve, u);
        let nodes = self.cake().components()[curve].curve().nodes();
        let frames: Vec<(Vec2<T>, Vec2<T>, T)> = (0..n)
            .map(|i| {
                let (_, d1, d2) = geo.eval(i, T::zero());
                let sp = d1.norm();
                let t = d1.scale(T::one() / sp);
                (t, t.perp(), d1.cross(d2) / (sp * sp * sp))
            })
            .collect();
        let derivs: Result<Vec<(T, T)>, VelocityError> = (0..n)
            .into_par_iter()
            .map(|i| {
                let (t, nn, _) = frames[i];
                let du = self.grad_total(nodes[i])?;
                let d2 = self.d2_total(nodes[i])?;
                Ok((du.apply(nn).dot(nn), d2.apply(t, t).dot(nn)))
            })
            .collect();
        let derivs = derivs?;
        let mut out = AlongCurve {
            u: u.to_vec(),
            ds_u_t: Vec::with_capacity(n),
            ds_u_n: Vec::with_capacity(n),
            du_nn: Vec::with_capacity(n),
            d2u_ttn: Vec::with_capacity(n),
            kappa: Vec::with_capacity(n),
            geometry: geo.clone(),
        };
        for i in 0..n {
            let (t, nn, k) = frames[i];
            let speed = geo.eval(i, T::zero()).1.norm();
            let ds_u = vel.derivative_at_node(i).scale(T::one() / speed);
            out.ds_u_t.push(ds_u.dot(t));
            out.ds_u_n.push(ds_u.dot(nn));
            out.du_nn.push(derivs[i].0);
            out.d2u_ttn.push(derivs[i].1);
            out.kappa.push(k);
        }
        Ok(out)
    }

    /// Along-curve derivative data with freshly evaluated nodal velocities.
    pub fn du_along_curve(&self, curve: usize) -> Result<AlongCurve<T>, VelocityError> {
        let n = self.cake().components()[curve].curve().len();
        let u: Result<Vec<Vec2<T>>, VelocityError> = (0..n)
            .into_par_iter()
            .map(|i| {
                let x = self.cake().components()[curve].curve().nodes()[i];
                self.velocity_inner(x, Some((curve, i)))
            })
            .collect();
        self.du_along_curve_with(curve, &u?)
    }
}
