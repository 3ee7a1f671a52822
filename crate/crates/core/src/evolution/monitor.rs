//! Diagnostics records, measured-Lipschitz envelopes and threshold events.
//!
//! The envelopes are the constant-free exponential forms of the a priori
//! bounds: with `I = ∫ Lip(u) dτ` between two records,
//! `e^{−I} L^η(t₀) ≤ L^η(t₁) ≤ e^{I} L^η(t₀)`, the same two-sided bound for
//! every curve length (from `|∂_t ℓ| ≤ Lip(u) ℓ`), and a diameter growth of
//! at most `2 ∫ sup|u| dτ`.

use crate::layercake::Diagnostics;
use crate::scalar::Real;

use super::{Event, EventKind, EvolutionError, SimState};

/// One evaluation of every monitored quantity.
#[derive(Debug, Clone, PartialEq)]
pub struct Record<T> {
    pub step: usize,
    pub t: T,
    pub diagnostics: Diagnostics<T>,
    pub sup_u: T,
    /// Node-set diameter of each curve.
    pub diameters: Vec<T>,
    /// Spline-enclosed area of each curve.
    pub areas: Vec<T>,
    /// `max_j |A_j(t) − A_j(0)| / |A_j(0)|`.
    pub area_drift: T,
    /// `∫₀ᵗ Lip(u)` and `∫₀ᵗ sup|u|` at this record.
    pub lip_integral: T,
    pub sup_u_integral: T,
}

/// Bounds implied by the initial record and the time integrals so far.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Envelopes<T> {
    pub l_eta: (T, T),
    pub lengths: Vec<(T, T)>,
    pub diameters: Vec<T>,
}

impl<T: Real> SimState<T> {
    /// Computes diagnostics, appends a record, refreshes the envelopes and
    /// returns any threshold or envelope events (not yet stored).
    pub fn update_monitors(&mut self) -> Result<Vec<Event>, EvolutionError> {
        let (lip, sup_u) = self.lipschitz_and_sup()?;
        let m = &self.config.monitor;
        let mut diagnostics = self.cake.diagnostics(self.eta, &m.samples, m.self_cell);
        diagnostics.lipschitz_u_est = Some(lip);
        let areas: Vec<T> = self.cake.curves().map(|c| c.enclosed_area()).collect();
        let area_drift = areas
            .iter()
            .zip(&self.initial_areas)
            .map(|(a, a0)| (*a - *a0).abs() / a0.abs())
            .fold(T::zero(), T::max);
        let record = Record {
            step: self.steps,
            t: self.t,
            diagnostics,
            sup_u,
            diameters: self.cake.curves().map(|c| c.diameter()).collect(),
            areas,
            area_drift,
            lip_integral: self.lip_integral,
            sup_u_integral: self.sup_u_integral,
        };
        let mut events = Vec::new();
        if record.diagnostics.l_eta > m.l_max {
            events.push(self.event(EventKind::LMax, Vec::new(), record.diagnostics.l_eta, m.l_max, "L^eta above threshold"));
        }
        if let Some(first) = self.history.first().cloned() {
            self.envelopes = self.envelope_from(&first, &record);
            events.extend(self.check_envelopes(&first, &record, "since t = 0"));
            if let Some(prev) = self.history.last().cloned() {
                if prev.step != first.step {
                    events.extend(self.check_envelopes(&prev, &record, "since the previous record"));
                }
            }
        } else {
            self.envelopes = self.envelope_from(&record, &record);
        }
        self.history.push(record);
        Ok(events)
    }

    fn envelope_from(&self, r0: &Record<T>, r1: &Record<T>) -> Envelopes<T> {
        let slack = self.config.monitor.slack;
        let grow = (r1.lip_integral - r0.lip_integral).exp();
        let two = T::two();
        let d0 = &r0.diagnostics;
        Envelopes {
            l_eta: (d0.l_eta / (grow * slack), d0.l_eta * grow * slack),
            lengths: d0.per_curve.iter().map(|p| (p.length / (grow * slack), p.length * grow * slack)).collect(),
            diameters: r0
                .diameters
                .iter()
                .zip(self.diameter_allowance())
                .map(|(d, tol)| *d + slack * two * (r1.sup_u_integral - r0.sup_u_integral) + tol)
                .collect(),
        }
    }

    /// How far the node-set diameter may sit below the curve's own: the
    /// sagitta `h²κ/4` of a panel of width `h = ℓ/N`.
    fn diameter_allowance(&self) -> Vec<T> {
        self.cake
            .curves()
            .map(|c| {
                let h = c.length() / T::from_usize(c.len());
                h * h * c.max_abs_curvature() * T::lit(0.25)
            })
            .collect()
    }

    fn check_envelopes(&self, r0: &Record<T>, r1: &Record<T>, span: &str) -> Vec<Event> {
        let env = self.envelope_from(r0, r1);
        let mut out = Vec::new();
        let l = r1.diagnostics.l_eta;
        if l < env.l_eta.0 || l > env.l_eta.1 {
            let bound = if l > env.l_eta.1 { env.l_eta.1 } else { env.l_eta.0 };
            out.push(self.event(
                EventKind::EnvelopeViolation,
                vec!["L_eta".to_string()],
                l,
                bound,
                &format!("L^eta outside its exponential envelope {span}"),
            ));
        }
        for (p, (lo, hi)) in r1.diagnostics.per_curve.iter().zip(&env.lengths) {
            if p.length < *lo || p.length > *hi {
                let bound = if p.length > *hi { *hi } else { *lo };
                out.push(self.event(
                    EventKind::EnvelopeViolation,
                    vec![p.label.clone()],
                    p.length,
                    bound,
                    &format!("length outside its exponential envelope {span}"),
                ));
            }
        }
        for ((d, bound), p) in r1.diameters.iter().zip(&env.diameters).zip(&r1.diagnostics.per_curve) {
            if *d > *bound {
                out.push(self.event(
                    EventKind::EnvelopeViolation,
                    vec![p.label.clone()],
                    *d,
                    *bound,
                    &format!("diameter grew faster than 2 sup|u| {span}"),
                ));
            }
        }
        out
    }

    /// Threshold checks that are cheap enough for every step: curve
    /// simplicity, minimum curve separation, `Q` and maximum curvature.
    pub fn detect_events(&self) -> Vec<Event> {
        let m = &self.config.monitor;
        let comps = self.cake.components();
        let mut out = Vec::new();
        for c in comps {
            let report = c.curve().is_simple();
            if !report.simple {
                out.push(self.event(EventKind::Collision, vec![c.label.clone()], T::zero(), T::zero(), "curve is not simple"));
            }
        }
        if comps.len() >= 2 {
            let dist = self.cake.pairwise_distances();
            let mut best = (T::infinity(), 0, 0);
            for (i, row) in dist.iter().enumerate() {
                for (j, d) in row.iter().enumerate().skip(i + 1) {
                    if *d < best.0 {
                        best = (*d, i, j);
                    }
                }
            }
            if best.0 < m.min_delta {
                out.push(self.event(
                    EventKind::MinDelta,
                    vec![comps[best.1].label.clone(), comps[best.2].label.clone()],
                    best.0,
                    m.min_delta,
                    "curves closer than min_delta",
                ));
            }
        }
        let mut q_worst = (T::zero(), 0);
        let mut k_worst = (T::zero(), 0);
        for (j, c) in comps.iter().enumerate() {
            let q = c.curve().length() * c.curve().h2_seminorm_sq();
            if q > q_worst.0 {
                q_worst = (q, j);
            }
            let k = c.curve().max_abs_curvature();
            if k > k_worst.0 {
                k_worst = (k, j);
            }
        }
        if q_worst.0 > m.q_max {
            out.push(self.event(EventKind::QMax, vec![comps[q_worst.1].label.clone()], q_worst.0, m.q_max, "Q above threshold"));
        }
        if k_worst.0 > m.max_curvature {
            out.push(self.event(
                EventKind::MaxCurvature,
                vec![comps[k_worst.1].label.clone()],
                k_worst.0,
                m.max_curvature,
                "curvature above threshold",
            ));
        }
        out
    }

    fn event(&self, kind: EventKind, labels: Vec<String>, value: T, threshold: T, detail: &str) -> Event {
        Event {
            kind,
            t: self.t.as_f64(),
            step: self.steps,
            labels,
            value: value.as_f64(),
            threshold: threshold.as_f64(),
            detail: detail.to_string(),
        }
    }
}
