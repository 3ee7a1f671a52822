//! Admissibility integral `∫₀¹ ρ(s) / s^{1+2α} ds` for moduli of continuity.

use crate::kernel::AlphaParam;
use crate::quadrature::{adaptive, GaussRule};
use crate::scalar::Real;

use super::LayerCakeError;

/// Moduli of continuity available as presets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Modulus {
    /// `s^β`.
    Power { beta: f64 },
    /// `s^{2α} max(−ln s, 1)^{−p}`.
    LogCorrected { p: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Admissibility {
    Finite(f64),
    /// Partial integrals do not decay fast enough; `partial` is the
    /// integral over `[2^{-shells}, 1]`.
    Divergent { partial: f64, shells: usize },
}

impl Admissibility {
    pub fn is_finite(&self) -> bool {
        matches!(self, Admissibility::Finite(_))
    }
}

impl Modulus {
    pub fn eval(&self, s: f64, two_alpha: f64) -> f64 {
        match *self {
            Modulus::Power { beta } => s.powf(beta),
            Modulus::LogCorrected { p } => s.powf(two_alpha) * (-s.ln()).max(1.0).powf(-p),
        }
    }

    /// Integrand after `s = e^{−t}`: `ρ(e^{−t}) e^{2αt}`, evaluated in a
    /// form that stays finite for large `t`.
    fn integrand(&self, t: f64, two_alpha: f64) -> f64 {
        match *self {
            Modulus::Power { beta } => (-(beta - two_alpha) * t).exp(),
            Modulus::LogCorrected { p } => t.max(1.0).powf(-p),
        }
    }

    /// Points in `t` where the integrand is not smooth.
    fn kinks(&self) -> &'static [f64] {
        match self {
            Modulus::Power { .. } => &[],
            Modulus::LogCorrected { .. } => &[1.0],
        }
    }

    fn check(&self, two_alpha: f64) -> Result<(), LayerCakeError> {
        let name = format!("{self:?}");
        let params_ok = match *self {
            Modulus::Power { beta } => beta > 0.0 && beta.is_finite(),
            Modulus::LogCorrected { p } => p.is_finite(),
        };
        if !params_ok {
            return Err(LayerCakeError::NonMonotoneModulus(name));
        }
        // Sample on a log grid: nonnegative, nondecreasing, tending to 0.
        let mut prev = 0.0;
        for k in (0..=400).rev() {
            let s = 10f64.powf(-(k as f64) * 0.05);
            let v = self.eval(s, two_alpha);
            if !(v >= prev) || !v.is_finite() {
                return Err(LayerCakeError::NonMonotoneModulus(name));
            }
            prev = v;
        }
        if self.eval(1e-20, two_alpha) > 1e-3 * self.eval(1.0, two_alpha).max(1e-300) {
            return Err(LayerCakeError::NonMonotoneModulus(name));
        }
        Ok(())
    }
}

/// Number of dyadic shells integrated before the tail is extrapolated.
const SHELLS: usize = 4096;

/// Integrates shell by shell over `s ∈ [2^{−k−1}, 2^{−k}]` and classifies
/// the decay of the shell contributions: geometric or power-law decay
/// faster than `k^{−1.05}` is summed with an extrapolated tail; anything
/// slower is reported divergent.
pub fn modulus_admissibility<T: Real>(rho: Modulus, p: &AlphaParam<T>) -> Result<Admissibility, LayerCakeError> {
    let two_alpha = p.two_alpha().as_f64();
    rho.check(two_alpha)?;
    let rule = GaussRule::<f64>::legendre(8);
    let ln2 = std::f64::consts::LN_2;
    let mut f = |t: f64| rho.integrand(t, two_alpha);
    let mut shells = Vec::with_capacity(SHELLS);
    for k in 0..SHELLS {
        let (a, b) = (k as f64 * ln2, (k + 1) as f64 * ln2);
        let mut cuts = vec![a];
        cuts.extend(rho.kinks().iter().copied().filter(|&t| t > a && t < b));
        cuts.push(b);
        let mut v = 0.0;
        for w in cuts.windows(2) {
            let scale = |lo: f64, hi: f64| (hi - lo) * rho.integrand(lo, two_alpha).abs().max(1e-300);
            v += adaptive(&rule, w[0], w[1], 1e-12, 30, &mut f, &scale).unwrap_or_else(|e| {
                log::debug!("shell {k} integrated to {:.1e} only", e.achieved);
                rule.integrate(w[0], w[1], &mut f)
            });
        }
        shells.push(v);
    }
    let partial: f64 = shells.iter().sum();
    let last = shells[SHELLS - 1];
    if last <= partial * 1e-17 {
        return Ok(Admissibility::Finite(partial));
    }
    let mid = shells[SHELLS / 2 - 1];
    // Power-law exponent from shells K/2 and K.
    let q = (mid / last).ln() / 2f64.ln();
    if q > 30.0 {
        // Geometric decay.
        let r = last / shells[SHELLS - 2];
        return Ok(Admissibility::Finite(partial + last * r / (1.0 - r)));
    }
    if q > 1.05 {
        let kf = SHELLS as f64;
        let c = last * (kf - 0.5).powf(q);
        let tail = c * (kf + 0.5).powf(1.0 - q) / (q - 1.0);
        return Ok(Admissibility::Finite(partial + tail));
    }
    Ok(Admissibility::Divergent { partial, shells: SHELLS })
}
