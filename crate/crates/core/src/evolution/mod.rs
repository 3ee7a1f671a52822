//! Time integration of the curve family under the induced velocity,
//! arclength maintenance, runtime monitors and event detection.
//!
//! Nodes are advanced by classical RK4 (the flow map is realized as node
//! trajectories). A step is accepted only if every curve stays simple and
//! no two curves cross; otherwise `dt` is halved and the step retried.

mod monitor;

use serde::Serialize;
use thiserror::Error;

use crate::geometry::{first_crossing, ClosedCurve, GeometryError};
use crate::layercake::{LayerCake, LayerCakeError, SampleSpec, SelfCell};
use crate::scalar::Real;
use crate::vec2::Vec2;
use crate::velocity::{lipschitz_estimate, VelocityError, VelocityField, VelocitySettings};

pub use monitor::{Envelopes, Record};

#[derive(Debug, Error)]
pub enum EvolutionError {
    #[error(transparent)]
    Velocity(#[from] VelocityError),
    #[error(transparent)]
    LayerCake(#[from] LayerCakeError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("invalid evolution settings: {0}")]
    Settings(String),
    #[error("output sink failed: {0}")]
    Sink(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepperConfig<T> {
    pub velocity: VelocitySettings<T>,
    /// Largest step; `None` leaves the CFL bound in charge.
    pub dt: Option<T>,
    /// `dt ≤ cfl / Lip(u)`.
    pub cfl: T,
    /// Unconditional resampling cadence in steps (0 = only on demand).
    pub resample_every: usize,
    /// Band of segment lengths, relative to the mean, outside which a curve
    /// is resampled.
    pub quasi_uniform: (T, T),
    /// Retries with halved `dt` before a rejected step becomes a collision.
    pub max_halvings: usize,
}

impl<T: Real> Default for StepperConfig<T> {
    fn default() -> Self {
        Self {
            velocity: VelocitySettings::default(),
            dt: None,
            cfl: T::lit(0.1),
            resample_every: 50,
            quasi_uniform: (T::half(), T::two()),
            max_halvings: 8,
        }
    }
}

/// How the Lipschitz constant of `u` is measured from nodal velocities.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LipschitzSampling {
    /// Up to this many nodes every pair is used.
    pub max_all_pairs: usize,
    /// Otherwise: neighbouring nodes plus this many seeded random pairs.
    pub random_pairs: usize,
    pub seed: u64,
}

impl Default for LipschitzSampling {
    fn default() -> Self {
        Self { max_all_pairs: 1024, random_pairs: 4096, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonitorConfig<T> {
    pub lipschitz: LipschitzSampling,
    /// Multiplicative slack on every envelope.
    pub slack: T,
    pub q_max: T,
    pub l_max: T,
    pub min_delta: T,
    pub max_curvature: T,
    /// Full diagnostics every `k_diag` steps.
    pub k_diag: usize,
    /// Fixed `η` for `L^η`/`R^η`; `None` takes the cake's default at `t = 0`.
    pub eta: Option<T>,
    pub samples: SampleSpec,
    pub self_cell: SelfCell,
}

impl<T: Real> Default for MonitorConfig<T> {
    fn default() -> Self {
        Self {
            lipschitz: LipschitzSampling::default(),
            slack: T::lit(1.2),
            q_max: T::lit(1e6),
            l_max: T::lit(1e6),
            min_delta: T::lit(1e-6),
            max_curvature: T::lit(1e6),
            k_diag: 10,
            eta: None,
            samples: SampleSpec::default(),
            self_cell: SelfCell::Exclude,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionConfig<T> {
    pub stepper: StepperConfig<T>,
    pub monitor: MonitorConfig<T>,
    /// Snapshot cadence in steps (0 = none).
    pub k_snap: usize,
}

impl<T: Real> Default for EvolutionConfig<T> {
    fn default() -> Self {
        Self { stepper: StepperConfig::default(), monitor: MonitorConfig::default(), k_snap: 0 }
    }
}

impl<T: Real> EvolutionConfig<T> {
    pub fn validate(&self) -> Result<(), EvolutionError> {
        let s = &self.stepper;
        let m = &self.monitor;
        let mut bad = Vec::new();
        if !(s.cfl > T::zero()) {
            bad.push("cfl must be positive");
        }
        if matches!(s.dt, Some(dt) if !(dt > T::zero())) {
            bad.push("dt must be positive");
        }
        let (lo, hi) = s.quasi_uniform;
        if !(lo > T::zero() && lo < T::one() && hi > T::one()) {
            bad.push("quasi-uniformity band must satisfy 0 < lo < 1 < hi");
        }
        if !(m.slack >= T::one()) {
            bad.push("envelope slack must be at least 1");
        }
        if ![m.q_max, m.l_max, m.min_delta, m.max_curvature].iter().all(|v| *v > T::zero()) {
            bad.push("event thresholds must be positive");
        }
        if m.k_diag == 0 {
            bad.push("k_diag must be at least 1");
        }
        if matches!(m.eta, Some(e) if !(e > T::zero())) {
            bad.push("eta must be positive");
        }
        if bad.is_empty() {
            Ok(())
        } else {
            Err(EvolutionError::Settings(bad.join("; ")))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    /// A step stayed non-simple or crossing after every `dt` halving.
    Collision,
    MinDelta,
    QMax,
    LMax,
    MaxCurvature,
    QuadratureFailure,
    /// A monitored quantity left its measured-Lipschitz envelope.
    EnvelopeViolation,
}

impl EventKind {
    /// Whether the run stops on this event.
    pub fn terminates(self) -> bool {
        !matches!(self, EventKind::EnvelopeViolation)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Event {
    pub kind: EventKind,
    pub t: f64,
    pub step: usize,
    pub labels: Vec<String>,
    pub value: f64,
    pub threshold: f64,
    pub detail: String,
}

/// Why `run_until` returned.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    Completed,
    Event(EventKind),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepReport<T> {
    pub dt: T,
    pub halvings: usize,
    pub resampled: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum StepOutcome<T> {
    Accepted(StepReport<T>),
    /// Rejected at every `dt` down to `dt_tried`; carries the offending labels.
    Collision { labels: Vec<String>, dt_tried: T },
}

/// Receives the streamed outputs of a run.
pub trait OutputSink<T> {
    fn record(&mut self, _record: &Record<T>, _labels: &[String]) -> std::io::Result<()> {
        Ok(())
    }
    fn snapshot(&mut self, _t: T, _step: usize, _cake: &LayerCake<T>) -> std::io::Result<()> {
        Ok(())
    }
    fn event(&mut self, _event: &Event) -> std::io::Result<()> {
        Ok(())
    }
}

/// Discards everything.
#[derive(Debug, Default, Clone, Copy)]
pub struct NullSink;

impl<T> OutputSink<T> for NullSink {}

/// Nodal velocities of the current configuration and what was measured
/// from them.
#[derive(Debug, Clone)]
struct VelocityCache<T> {
    settings: VelocitySettings<T>,
    u: Vec<Vec<Vec2<T>>>,
    lip: T,
    sup_u: T,
}

/// Everything a run carries between steps.
#[derive(Debug, Clone)]
pub struct SimState<T: Real> {
    pub t: T,
    pub steps: usize,
    pub cake: LayerCake<T>,
    /// Monitor records, one per diagnostics evaluation.
    pub history: Vec<Record<T>>,
    /// Current bounds relative to the initial record.
    pub envelopes: Envelopes<T>,
    pub events: Vec<Event>,
    pub config: EvolutionConfig<T>,
    eta: T,
    initial_areas: Vec<T>,
    lip_integral: T,
    sup_u_integral: T,
    cache: Option<VelocityCache<T>>,
}

impl<T: Real> SimState<T> {
    /// Validates the configuration and records the initial diagnostics.
    pub fn new(cake: LayerCake<T>, config: EvolutionConfig<T>) -> Result<Self, EvolutionError> {
        config.validate()?;
        let eta = config.monitor.eta.unwrap_or_else(|| cake.default_eta());
        let initial_areas = cake.curves().map(|c| c.enclosed_area()).collect();
        let mut state = Self {
            t: T::zero(),
            steps: 0,
            cake,
            history: Vec::new(),
            envelopes: Envelopes::default(),
            events: Vec::new(),
            config,
            eta,
            initial_areas,
            lip_integral: T::zero(),
            sup_u_integral: T::zero(),
            cache: None,
        };
        state.update_monitors()?;
        Ok(state)
    }

    /// The `η` used by every `L^η`/`R^η` evaluation of this run.
    pub fn eta(&self) -> T {
        self.eta
    }

    pub fn labels(&self) -> Vec<String> {
        self.cake.components().iter().map(|c| c.label.clone()).collect()
    }

    /// `∫₀ᵗ Lip(u) dτ` by the trapezoid rule over accepted steps.
    pub fn lip_integral(&self) -> T {
        self.lip_integral
    }

    /// Velocities at the current nodes, reusing the cached evaluation when
    /// the settings are unchanged.
    fn current_velocity(&mut self) -> Result<&VelocityCache<T>, VelocityError> {
        let stale = match &self.cache {
            Some(c) => c.settings != self.config.stepper.velocity,
            None => true,
        };
        if stale {
            self.cache = Some(self.measure()?);
        }
        Ok(self.cache.as_ref().expect("cache just filled"))
    }

    fn measure(&self) -> Result<VelocityCache<T>, VelocityError> {
        let settings = self.config.stepper.velocity.clone();
        let u = nodal_velocities(&self.cake, &settings)?;
        let pts: Vec<Vec2<T>> = self.cake.curves().flat_map(|c| c.nodes().iter().copied()).collect();
        let vals: Vec<Vec2<T>> = u.iter().flatten().copied().collect();
        let ls = self.config.monitor.lipschitz;
        let lip = lipschitz_estimate(&pts, &vals, ls.max_all_pairs, ls.random_pairs, ls.seed);
        let sup_u = vals.iter().map(|v| v.norm()).fold(T::zero(), T::max);
        Ok(VelocityCache { settings, u, lip, sup_u })
    }

    /// Measured `Lip(u)` and `sup|u|` over the current nodes.
    pub fn lipschitz_and_sup(&mut self) -> Result<(T, T), VelocityError> {
        let c = self.current_velocity()?;
        Ok((c.lip, c.sup_u))
    }

    /// Largest admissible step: `min(dt, cfl / Lip(u))`.
    pub fn dt_max(&mut self) -> Result<T, VelocityError> {
        let cfl = self.config.stepper.cfl;
        let fixed = self.config.stepper.dt.unwrap_or(T::infinity());
        let lip = self.current_velocity()?.lip;
        Ok(if lip > T::zero() { fixed.min(cfl / lip) } else { fixed })
    }

    /// One RK4 step of size at most `dt`, halving on rejection.
    pub fn step(&mut self, dt: T) -> Result<StepOutcome<T>, EvolutionError> {
        if !(dt > T::zero()) {
            return Err(EvolutionError::Settings(format!("step size must be positive, got {dt}")));
        }
        if self.cake.is_empty() {
            self.t += dt;
            self.steps += 1;
            return Ok(StepOutcome::Accepted(StepReport { dt, halvings: 0, resampled: false }));
        }
        let (k1, lip0, sup0) = {
            let c = self.current_velocity()?;
            (c.u.clone(), c.lip, c.sup_u)
        };
        let settings = self.config.stepper.velocity.clone();
        let mut h = dt;
        let mut offending = Vec::new();
        for halvings in 0..=self.config.stepper.max_halvings {
            match self.try_rk4(&k1, h, &settings)? {
                Ok(curves) => {
                    let mut cake = self.cake.with_curves_unchecked(curves);
                    self.steps += 1;
                    let resampled = self.needs_resample(&cake);
                    if resampled {
                        cake = resample_keeping_counts(&cake)?;
                    }
                    self.cake = cake;
                    self.t += h;
                    self.cache = Some(self.measure()?);
                    let c = self.cache.as_ref().expect("just measured");
                    self.lip_integral += (lip0 + c.lip) * T::half() * h;
                    self.sup_u_integral += (sup0 + c.sup_u) * T::half() * h;
                    return Ok(StepOutcome::Accepted(StepReport { dt: h, halvings, resampled }));
                }
                Err(labels) => {
                    offending = labels;
                    h *= T::half();
                }
            }
        }
        Ok(StepOutcome::Collision { labels: offending, dt_tried: h * T::two() })
    }

    /// Candidate end-of-step curves, or the labels of the curves that
    /// became non-simple or crossed.
    #[allow(clippy::type_complexity)]
    fn try_rk4(
        &self,
        k1: &[Vec<Vec2<T>>],
        h: T,
        settings: &VelocitySettings<T>,
    ) -> Result<Result<Vec<ClosedCurve<T>>, Vec<String>>, EvolutionError> {
        let x0: Vec<&[Vec2<T>]> = self.cake.curves().map(|c| c.nodes()).collect();
        let labels = self.labels();
        let advance = |k: &[Vec<Vec2<T>>], a: T| -> Vec<Vec<Vec2<T>>> {
            x0.iter()
                .zip(k)
                .map(|(xs, ks)| xs.iter().zip(ks).map(|(x, v)| *x + v.scale(a)).collect())
                .collect()
        };
        let stage = |pts: Vec<Vec<Vec2<T>>>| -> Result<Result<Vec<Vec<Vec2<T>>>, Vec<String>>, EvolutionError> {
            let mut curves = Vec::with_capacity(pts.len());
            for (p, label) in pts.into_iter().zip(&labels) {
                match ClosedCurve::new(p) {
                    Ok(c) => curves.push(c),
                    Err(_) => return Ok(Err(vec![label.clone()])),
                }
            }
            let cake = self.cake.with_curves_unchecked(curves);
            Ok(Ok(nodal_velocities(&cake, settings)?))
        };
        let half = h * T::half();
        let k2 = match stage(advance(k1, half))? {
            Ok(k) => k,
            Err(l) => return Ok(Err(l)),
        };
        let k3 = match stage(advance(&k2, half))? {
            Ok(k) => k,
            Err(l) => return Ok(Err(l)),
        };
        let k4 = match stage(advance(&k3, h))? {
            Ok(k) => k,
            Err(l) => return Ok(Err(l)),
        };
        let sixth = h / T::lit(6.0);
        let mut curves = Vec::with_capacity(x0.len());
        for (j, xs) in x0.iter().enumerate() {
            let pts = xs
                .iter()
                .enumerate()
                .map(|(i, x)| {
                    let v = k1[j][i] + (k2[j][i] + k3[j][i]).scale(T::two()) + k4[j][i];
                    *x + v.scale(sixth)
                })
                .collect();
            match ClosedCurve::new(pts) {
                Ok(c) => curves.push(c),
                Err(_) => return Ok(Err(vec![labels[j].clone()])),
            }
        }
        let refs: Vec<&ClosedCurve<T>> = curves.iter().collect();
        if let Some(((a, _), (b, _))) = first_crossing(&refs) {
            let mut l = vec![labels[a].clone()];
            if b != a {
                l.push(labels[b].clone());
            }
            return Ok(Err(l));
        }
        Ok(Ok(curves))
    }

    fn needs_resample(&self, cake: &LayerCake<T>) -> bool {
        let s = &self.config.stepper;
        let (lo, hi) = s.quasi_uniform;
        (s.resample_every > 0 && self.steps.is_multiple_of(s.resample_every))
            || cake.curves().any(|c| !c.is_quasi_uniform_within(lo, hi))
    }

    /// Integrates to `t_end` or until a terminating event, streaming
    /// records, snapshots and events to `sink`.
    pub fn run_until(&mut self, t_end: T, sink: &mut dyn OutputSink<T>) -> Result<Termination, EvolutionError> {
        if !(t_end > self.t) {
            return Err(EvolutionError::Settings(format!("t_end {t_end} must exceed the current time {}", self.t)));
        }
        let labels = self.labels();
        if let Some(first) = self.history.first() {
            if self.steps == 0 {
                sink.record(first, &labels)?;
                if self.config.k_snap > 0 {
                    sink.snapshot(self.t, 0, &self.cake)?;
                }
            }
        }
        let mut last_recorded = self.history.last().map(|r| r.step);
        let outcome = loop {
            let remaining = t_end - self.t;
            if remaining <= T::zero() {
                break Termination::Completed;
            }
            let dt = match self.dt_max() {
                Ok(d) => d,
                Err(e) => break self.quadrature_event(e, sink)?,
            };
            // Land exactly on `t_end` instead of leaving a sliver.
            let last = remaining <= dt * (T::one() + T::lit(1e-6));
            let dt = if last { remaining } else { dt };
            let result = match self.step(dt) {
                Ok(r) => r,
                Err(EvolutionError::Velocity(e)) => break self.quadrature_event(e, sink)?,
                Err(e) => return Err(e),
            };
            match result {
                StepOutcome::Accepted(rep) => {
                    if last && rep.halvings == 0 {
                        self.t = t_end;
                    }
                }
                StepOutcome::Collision { labels, dt_tried } => {
                    let ev = Event {
                        kind: EventKind::Collision,
                        t: self.t.as_f64(),
                        step: self.steps,
                        labels,
                        value: dt_tried.as_f64(),
                        threshold: 0.0,
                        detail: format!("step rejected down to dt = {dt_tried:e}"),
                    };
                    sink.event(&ev)?;
                    self.events.push(ev);
                    break Termination::Event(EventKind::Collision);
                }
            }
            let mut fired = self.detect_events();
            if self.steps.is_multiple_of(self.config.monitor.k_diag) {
                fired.extend(self.monitor_and_stream(sink, &labels)?);
                last_recorded = Some(self.steps);
            }
            if self.config.k_snap > 0 && self.steps.is_multiple_of(self.config.k_snap) {
                sink.snapshot(self.t, self.steps, &self.cake)?;
            }
            let stop = fired.iter().find(|e| e.kind.terminates()).map(|e| e.kind);
            for ev in fired {
                sink.event(&ev)?;
                self.events.push(ev);
            }
            if let Some(kind) = stop {
                break Termination::Event(kind);
            }
        };
        if last_recorded != Some(self.steps) && self.history.last().map(|r| r.step) != Some(self.steps) {
            match self.monitor_and_stream(sink, &labels) {
                Ok(evs) => {
                    for ev in evs {
                        sink.event(&ev)?;
                        self.events.push(ev);
                    }
                }
                // The run already ended; a failed final measurement is reported, not fatal.
                Err(EvolutionError::Velocity(e)) => {
                    if outcome == Termination::Completed {
                        return self.quadrature_event(e, sink);
                    }
                }
                Err(e) => return Err(e),
            }
        }
        Ok(outcome)
    }

    fn monitor_and_stream(&mut self, sink: &mut dyn OutputSink<T>, labels: &[String]) -> Result<Vec<Event>, EvolutionError> {
        let events = self.update_monitors()?;
        sink.record(self.history.last().expect("record just pushed"), labels)?;
        Ok(events)
    }

    fn quadrature_event(&mut self, e: VelocityError, sink: &mut dyn OutputSink<T>) -> Result<Termination, EvolutionError> {
        let (value, threshold) = match e {
            VelocityError::Quadrature { achieved, .. } => (achieved, self.config.stepper.velocity.tol.as_f64()),
            ref other => return Err(EvolutionError::Velocity(other.clone())),
        };
        let ev = Event {
            kind: EventKind::QuadratureFailure,
            t: self.t.as_f64(),
            step: self.steps,
            labels: Vec::new(),
            value,
            threshold,
            detail: e.to_string(),
        };
        sink.event(&ev)?;
        self.events.push(ev);
        Ok(Termination::Event(EventKind::QuadratureFailure))
    }
}

/// Velocities at every node under `settings`.
pub fn nodal_velocities<T: Real>(
    cake: &LayerCake<T>,
    settings: &VelocitySettings<T>,
) -> Result<Vec<Vec<Vec2<T>>>, VelocityError> {
    if cake.is_empty() {
        return Ok(Vec::new());
    }
    VelocityField::new(cake, settings.clone())?.nodal_velocities()
}

/// Resamples every curve at equal spline arclength with its own node count.
fn resample_keeping_counts<T: Real>(cake: &LayerCake<T>) -> Result<LayerCake<T>, EvolutionError> {
    let curves = cake
        .curves()
        .map(|c| c.resample_arclength(c.len()))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(cake.with_curves_unchecked(curves))
}
