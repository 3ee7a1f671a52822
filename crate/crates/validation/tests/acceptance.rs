//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails. Oracles are computed here, independently of the
//! library's own quadrature.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use gsqg_cli::config::RunConfig;
use gsqg_cli::diagnose::{trend_table, TrendRow};
use gsqg_cli::run::run_into;
use gsqg_cli::scaling::scaling_study;
use gsqg_core::evolution::{EvolutionConfig, NullSink, SimState, StepOutcome};
use gsqg_core::kernel::{default_c_alpha, AlphaParam, Kernel, MollifierParam};
use gsqg_core::layercake::{modulus_admissibility, LayerCake, LevelComponent, Modulus};
use gsqg_core::velocity::{VelocityField, VelocityMode, VelocitySettings};
use gsqg_core::{ClosedCurve, Vec2};

/// Outcome of one criterion: pass flag plus the measured numbers.
struct Verdict {
    pass: bool,
    detail: String,
}

type Check = fn() -> Result<Verdict, String>;

fn verdict(pass: bool, detail: impl Into<String>) -> Result<Verdict, String> {
    Ok(Verdict { pass, detail: detail.into() })
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn alpha(a: f64) -> AlphaParam<f64> {
    AlphaParam::new(a).unwrap()
}

fn single(curve: ClosedCurve<f64>, a: f64) -> LayerCake<f64> {
    LayerCake::new(vec![LevelComponent::new("patch", None, 1.0, curve).unwrap()], alpha(a))
}

fn unit_disk(n: usize) -> LayerCake<f64> {
    single(ClosedCurve::circle(Vec2::zero(), 1.0, n).unwrap(), 0.25)
}

fn stepper(dt: f64, settings: VelocitySettings<f64>) -> EvolutionConfig<f64> {
    let mut cfg = EvolutionConfig::default();
    cfg.stepper.dt = Some(dt);
    cfg.stepper.resample_every = 0;
    cfg.stepper.velocity = settings;
    cfg.monitor.k_diag = 1_000_000;
    cfg
}

fn take_step(s: &mut SimState<f64>, dt: f64) -> Result<(), String> {
    match s.step(dt).map_err(err)? {
        StepOutcome::Accepted(r) if r.halvings == 0 => Ok(()),
        other => Err(format!("step at t = {} not taken in full: {other:?}", s.t)),
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// Adaptive double-exponential quadrature on `[a, b]`.
fn de(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    quadrature::integrate(f, a, b, 1e-13).integral
}

/// `∫_a^b f` for an integrand sharply peaked at `p ∈ [a, b]`: both sides of
/// the peak are split into geometrically shrinking panels.
fn peaked(f: impl Fn(f64) -> f64 + Copy, a: f64, b: f64, p: f64) -> f64 {
    let mut total = 0.0;
    for (lo, hi, toward_lo) in [(a, p, false), (p, b, true)] {
        let w = hi - lo;
        if w <= 0.0 {
            continue;
        }
        // Panel edges at distance w·4^{-k} from the peak.
        let mut prev = w;
        for k in 1..=40 {
            let d = w * 0.25f64.powi(k);
            let (x0, x1) = if toward_lo { (p + d, p + prev) } else { (p - prev, p - d) };
            total += de(f, x0, x1);
            prev = d;
        }
        let (x0, x1) = if toward_lo { (p, p + prev) } else { (p - prev, p) };
        total += de(f, x0, x1);
    }
    total
}

/// Radius of the level-`λ` disk of a radial bump.
#[derive(Clone, Copy)]
enum Bump {
    /// `[1 − |x|]_+^β`
    Outer(f64),
    /// `[1 − |x|^β]_+`
    Inner(f64),
}

impl Bump {
    fn radius(self, lambda: f64) -> f64 {
        match self {
            Bump::Outer(b) => 1.0 - lambda.powf(1.0 / b),
            Bump::Inner(b) => (1.0 - lambda).max(0.0).powf(1.0 / b),
        }
    }

    fn level(self, r: f64) -> f64 {
        match self {
            Bump::Outer(b) => (1.0 - r).max(0.0).powf(b),
            Bump::Inner(b) => 1.0 - r.powf(b),
        }
    }

    fn beta(self) -> f64 {
        match self {
            Bump::Outer(b) | Bump::Inner(b) => b,
        }
    }

    fn preset(self) -> &'static str {
        match self {
            Bump::Outer(_) => "bump-pow-outer",
            Bump::Inner(_) => "bump-pow-inner",
        }
    }
}

fn midpoints(m: usize) -> impl Iterator<Item = f64> {
    (0..m).map(move |j| (j as f64 + 0.5) / m as f64)
}

/// Continuum `sup_ρ ∫₀¹ dλ / (|r(λ) − ρ| + η)^{2α}`, the sup taken over the
/// radii of the `m` midpoint levels and the centre.
fn continuum_l(bump: Bump, a: f64, eta: f64, m: usize) -> f64 {
    let two_a = 2.0 * a;
    midpoints(m)
        .map(|l| bump.radius(l))
        .chain([0.0])
        .map(|rho| {
            let f = move |l: f64| ((bump.radius(l) - rho).abs() + eta).powf(-two_a);
            peaked(f, 0.0, 1.0, bump.level(rho).clamp(0.0, 1.0))
        })
        .fold(0.0, f64::max)
}

/// Continuum curve-to-curve functional
/// `sup_λ √r(λ) ∫ dλ' / (√r(λ') (|r(λ) − r(λ')| + η)^{2α})`, the inner
/// integral stopping at the innermost resolved level `1 − 1/(2m)`.
fn continuum_r(bump: Bump, a: f64, eta: f64, m: usize) -> f64 {
    let two_a = 2.0 * a;
    let top = 1.0 - 0.5 / m as f64;
    midpoints(m)
        .map(|l| {
            let ri = bump.radius(l);
            let f = move |lp: f64| {
                let rp = bump.radius(lp);
                1.0 / (rp.sqrt() * ((ri - rp).abs() + eta).powf(two_a))
            };
            ri.sqrt() * peaked(f, 0.0, top, l.min(top))
        })
        .fold(0.0, f64::max)
}

fn c1_velocity_oracle() -> Result<Verdict, String> {
    let cake = unit_disk(256);
    let eps = 0.05;
    let exact = VelocityField::new(&cake, VelocitySettings::default()).map_err(err)?;
    let settings =
        VelocitySettings { mode: VelocityMode::MollifiedArea, epsilon: eps, grid_h: Some(eps / 4.0), ..Default::default() };
    let area = VelocityField::new(&cake, settings).map_err(err)?;
    let grid = area.theta_grid().map_err(err)?;
    // Probes at least ε from the boundary, where the mollified kernel is exact.
    let radii = [0.2, 0.5, 0.8, 0.95, 1.05, 1.2, 1.5, 2.0];
    let golden = PI * (3.0 - 5f64.sqrt());
    let (mut worst, mut umax) = (0.0f64, 0.0f64);
    for k in 0..20 {
        let r = radii[k % radii.len()];
        let phi = k as f64 * golden;
        let x = Vec2::new(r * phi.cos(), r * phi.sin());
        let u = exact.u_boundary(x).map_err(err)?;
        let v = area.u_eps_area(x, &grid).map_err(err)?;
        worst = worst.max((u - v).norm());
        umax = umax.max(u.norm());
    }
    let bound = 1e-2 * umax;
    verdict(worst < bound, format!("max|u - u_eps_area| = {worst:.3e} (bound {bound:.3e}, max|u| = {umax:.4})"))
}

fn c2_scaling_law() -> Result<Verdict, String> {
    let mut pass = true;
    let mut parts = Vec::new();
    for a in [1.0 / 6.0, 0.25, 1.0 / 3.0] {
        let cfg = RunConfig { preset: "disk".into(), alpha: a, ..RunConfig::default() };
        cfg.validate().map_err(err)?;
        let st = scaling_study(&cfg).map_err(err)?;
        let slope = st.slope.ok_or_else(|| format!("alpha {a}: fit skipped: {:?}", st.skipped))?;
        let expected = 1.0 - 2.0 * a;
        pass &= (slope - expected).abs() <= 0.1;
        parts.push(format!("alpha {a:.4}: slope {slope:.4} vs {expected:.4}"));
    }
    verdict(pass, parts.join("; "))
}

/// Rotation rate of the unit disk boundary:
/// `(c/α) ∫₀^π cos φ / (2 sin(φ/2))^{2α} dφ`.
fn disk_rotation_rate(a: f64) -> f64 {
    let c = default_c_alpha(a);
    c / a * de(|phi: f64| phi.cos() / (2.0 * (phi / 2.0).sin()).powf(2.0 * a), 0.0, PI)
}

fn c3_steady_rotation() -> Result<Verdict, String> {
    let omega = disk_rotation_rate(0.25);
    let (dt, t_end) = (1e-3, 1.0);
    let mut s = SimState::new(unit_disk(256), stepper(dt, VelocitySettings::default())).map_err(err)?;
    let start = s.cake.components()[0].curve().nodes().to_vec();
    let mut radial = 0.0f64;
    let steps = (t_end / dt).round() as usize;
    for _ in 0..steps {
        take_step(&mut s, dt)?;
        let nodes = s.cake.components()[0].curve().nodes();
        radial = nodes.iter().map(|x| (x.norm() - 1.0).abs()).fold(radial, f64::max);
    }
    let end = s.cake.components()[0].curve().nodes();
    let turn = start.iter().zip(end).map(|(p, q)| p.cross(*q).atan2(p.dot(*q))).sum::<f64>() / start.len() as f64;
    let rate = turn / s.t;
    let err_rel = rel(rate.abs(), omega);
    verdict(
        radial < 1e-4 && err_rel < 1e-3,
        format!("max radial deviation {radial:.2e}; angular rate {rate:.9} vs oracle {omega:.9} (rel {err_rel:.2e})"),
    )
}

fn ellipse_area_drift(dt: f64, t_end: f64) -> Result<f64, String> {
    let cake = single(ClosedCurve::ellipse(Vec2::zero(), 1.25, 0.8, 256).unwrap(), 0.25);
    let a0 = cake.components()[0].curve().enclosed_area();
    let mut s = SimState::new(cake, stepper(dt, VelocitySettings::default())).map_err(err)?;
    for _ in 0..(t_end / dt).round() as usize {
        take_step(&mut s, dt)?;
    }
    Ok((s.cake.components()[0].curve().enclosed_area() - a0).abs() / s.t)
}

fn c4_conservation_order() -> Result<Verdict, String> {
    let coarse = ellipse_area_drift(1e-3, 1.0)?;
    let fine = ellipse_area_drift(5e-4, 1.0)?;
    let ratio = coarse / fine;
    verdict(
        coarse < 1e-5 && ratio >= 8.0,
        format!("area drift per unit time {coarse:.4e} (dt 1e-3), {fine:.4e} (dt 5e-4); ratio {ratio:.3} (need >= 8)"),
    )
}

struct TrendCase {
    bump: Bump,
    alpha: f64,
}

impl TrendCase {
    /// `(L violated, R violated)` with margin 0.2, or held with margin 0.2;
    /// `None` when the case is too close to its threshold to be classified.
    fn expectations(&self) -> [Option<bool>; 2] {
        let b = self.bump.beta();
        let classify = |threshold: f64| {
            if b <= threshold - 0.2 {
                Some(true)
            } else if b >= threshold + 0.2 {
                Some(false)
            } else {
                None
            }
        };
        [classify(2.0 * self.alpha), classify(f64::max(0.5, 2.0 * self.alpha))]
    }
}

fn c5_finiteness_thresholds() -> Result<Verdict, String> {
    let cases = [
        TrendCase { bump: Bump::Outer(0.3), alpha: 0.25 },
        TrendCase { bump: Bump::Inner(0.3), alpha: 0.25 },
        TrendCase { bump: Bump::Inner(0.3), alpha: 0.1 },
        TrendCase { bump: Bump::Outer(0.8), alpha: 0.25 },
        TrendCase { bump: Bump::Inner(0.8), alpha: 0.25 },
        TrendCase { bump: Bump::Inner(0.7), alpha: 0.25 },
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    for case in &cases {
        let cfg = RunConfig {
            preset: case.bump.preset().into(),
            beta: case.bump.beta(),
            alpha: case.alpha,
            levels: 10,
            trend_doublings: 3,
            nodes: 128,
            ..RunConfig::default()
        };
        cfg.validate().map_err(err)?;
        let rows: Vec<TrendRow> = trend_table(&cfg).map_err(err)?;
        let expect = case.expectations();
        let mut line = format!("{}(beta {}, alpha {}):", case.bump.preset(), case.bump.beta(), case.alpha);
        for (which, violated) in expect.iter().enumerate() {
            let Some(violated) = *violated else { continue };
            let name = if which == 0 { "L" } else { "R" };
            let oracle: Vec<f64> = rows
                .iter()
                .map(|r| {
                    if which == 0 {
                        continuum_l(case.bump, case.alpha, r.eta, r.levels)
                    } else {
                        continuum_r(case.bump, case.alpha, r.eta, r.levels)
                    }
                })
                .collect();
            let mut ok = true;
            let mut shown = Vec::new();
            for k in 1..rows.len() {
                let disc = if which == 0 { rows[k].l_ratio } else { rows[k].r_ratio }.unwrap();
                let cont = oracle[k] / oracle[k - 1];
                let fine = rows[k].levels >= 40;
                if violated {
                    ok &= disc >= 1.5 && cont >= 1.5;
                } else if fine {
                    ok &= disc <= 1.05 && cont <= 1.1;
                }
                // Below 40 levels the on-curve atom (1/M)·η^{-2α}, absent from
                // the continuum, still shifts the discrete ratios noticeably.
                if fine {
                    ok &= (disc - cont).abs() <= 0.1;
                }
                shown.push(format!("{disc:.3}/{cont:.3}"));
            }
            pass &= ok;
            let state = if violated { "violated" } else { "holds" };
            line += &format!(" {name} {state} [{}]{}", shown.join(" "), if ok { "" } else { " <-" });
        }
        parts.push(line);
    }
    verdict(pass, format!("ratios discrete/continuum: {}", parts.join("; ")))
}

fn mollified_ellipse(settings: &VelocitySettings<f64>) -> Result<SimState<f64>, String> {
    let cake = single(ClosedCurve::ellipse(Vec2::zero(), 2.0, 0.5, 256).unwrap(), 0.25);
    let mut s = SimState::new(cake, stepper(0.01, settings.clone())).map_err(err)?;
    for _ in 0..50 {
        take_step(&mut s, 0.01)?;
    }
    let fine = s.cake.resampled(1024).map_err(err)?;
    SimState::new(fine, stepper(1e-3, settings.clone())).map_err(err)
}

/// Central difference of `f(curve)` over one forward and one backward step.
fn central_rate(s: &SimState<f64>, delta: f64, f: impl Fn(&ClosedCurve<f64>) -> f64) -> Result<f64, String> {
    let mut fwd = s.clone();
    take_step(&mut fwd, delta)?;
    let mut back = s.clone();
    back.config.stepper.velocity.sign = -1.0;
    take_step(&mut back, delta)?;
    Ok((f(fwd.cake.components()[0].curve()) - f(back.cake.components()[0].curve())) / (2.0 * delta))
}

fn c6_curvature_identity() -> Result<Verdict, String> {
    let settings = VelocitySettings { mode: VelocityMode::MollifiedContour, epsilon: 0.1, ..Default::default() };
    let s = mollified_ellipse(&settings)?;
    let field = VelocityField::new(&s.cake, settings.clone()).map_err(err)?;
    let rhs = field.du_along_curve(0).map_err(err)?.h2_rate();
    let fd = central_rate(&s, 1e-3, |c| c.h2_seminorm_sq())?;
    let e = rel(fd, rhs);
    verdict(e < 0.05, format!("d/dt |z|^2_H2: finite difference {fd:.6e}, assembled {rhs:.6e} (rel {e:.2e})"))
}

fn c7_length_identity() -> Result<Verdict, String> {
    let settings = VelocitySettings::default();
    let cake = single(ClosedCurve::ellipse(Vec2::zero(), 1.25, 0.8, 256).unwrap(), 0.25);
    let mut s = SimState::new(cake, stepper(0.01, settings.clone())).map_err(err)?;
    for _ in 0..50 {
        take_step(&mut s, 0.01)?;
    }
    let field = VelocityField::new(&s.cake, settings).map_err(err)?;
    let rhs = field.du_along_curve(0).map_err(err)?.length_rate();
    let fd = central_rate(&s, 1e-4, |c| c.arclength())?;
    let gap = (fd - rhs).abs();
    let bound = 1e-3 * fd.abs() + 1e-8;
    verdict(gap < bound, format!("dl/dt: finite difference {fd:.6e}, contour integral {rhs:.6e} (gap {gap:.2e}, bound {bound:.2e})"))
}

fn c8_envelopes() -> Result<Verdict, String> {
    let dir = tempfile::TempDir::new().map_err(err)?;
    let benchmarks = [
        ("disk", 1.0, 128, 20),
        ("ellipse", 1.0, 128, 20),
        ("cone-stack", 0.5, 64, 8),
        ("two-patch-approach", 1.0, 64, 20),
        ("bump-pow-outer", 0.5, 64, 6),
    ];
    let mut total = 0;
    let mut parts = Vec::new();
    for (preset, t_end, nodes, levels) in benchmarks {
        let cfg = RunConfig { preset: preset.into(), t_end, nodes, levels, ..RunConfig::default() };
        cfg.validate().map_err(err)?;
        let out = dir.path().join(preset);
        std::fs::create_dir_all(&out).map_err(err)?;
        let clock = Instant::now();
        let run = run_into(&cfg, &out).map_err(err)?;
        let v = run.envelope_violations();
        total += v;
        parts.push(format!(
            "{preset} t={:.3} ({} steps, {:.1} s): {v}",
            run.state.t,
            run.state.steps,
            clock.elapsed().as_secs_f64()
        ));
    }
    verdict(total == 0, format!("envelope violations: {}", parts.join(", ")))
}

fn c9_geometry() -> Result<Verdict, String> {
    let mut worst = [0.0f64; 4];
    for r in [0.5, 1.0, 3.0] {
        let c = ClosedCurve::circle(Vec2::new(0.3, -0.2), r, 256).map_err(err)?;
        worst[0] = worst[0].max(rel(c.arclength(), 2.0 * PI * r));
        for k in c.curvature_profile() {
            worst[1] = worst[1].max(rel(k, 1.0 / r));
        }
        worst[2] = worst[2].max(rel(c.arclength() * c.h2_seminorm_sq(), 4.0 * PI * PI));
        worst[3] = worst[3].max(rel(c.enclosed_area(), PI * r * r));
    }
    let mut scale_err = 0.0f64;
    let base = ClosedCurve::from_fn(128, |t: f64| {
        let r = 1.0 + 0.15 * (3.0 * t).cos();
        Vec2::new(1.4 * r * t.cos(), 0.9 * r * t.sin())
    })
    .map_err(err)?;
    let q0 = base.arclength() * base.h2_seminorm_sq();
    for s in [0.01, 0.37, 2.5, 80.0] {
        let c = base.scaled(s).map_err(err)?;
        scale_err = scale_err
            .max(rel(c.arclength(), s * base.arclength()))
            .max(rel(c.h2_seminorm_sq(), base.h2_seminorm_sq() / s))
            .max(rel(c.arclength() * c.h2_seminorm_sq(), q0));
    }
    let pass = worst[0] < 1e-4 && worst[1] < 1e-3 && worst[2] < 1e-3 && worst[3] < 1e-3 && scale_err < 1e-10;
    verdict(
        pass,
        format!(
            "circle rel errors: length {:.1e}, curvature {:.1e}, Q {:.1e}, area {:.1e}; scaling identities {scale_err:.1e}",
            worst[0], worst[1], worst[2], worst[3]
        ),
    )
}

fn c10_properties() -> Result<Verdict, String> {
    let mut fails = Vec::new();
    let golden = PI * (3.0 - 5f64.sqrt());

    // Incompressibility of both mollified backends.
    let cake = single(ClosedCurve::ellipse(Vec2::zero(), 1.0, 0.6, 128).unwrap(), 0.25);
    let mut trace = 0.0f64;
    for mode in [VelocityMode::MollifiedContour, VelocityMode::MollifiedArea] {
        let field = VelocityField::new(&cake, VelocitySettings { mode, epsilon: 0.2, ..Default::default() }).map_err(err)?;
        for k in 0..8 {
            let phi = k as f64 * golden;
            let r = 0.3 + 0.2 * k as f64;
            let g = field.grad_u_mollified(Vec2::new(r * phi.cos(), r * phi.sin())).map_err(err)?;
            let size = g.m.iter().flatten().map(|v| v * v).sum::<f64>().sqrt();
            trace = trace.max((g.m[0][0] + g.m[1][1]).abs() / size);
        }
    }
    if trace > 1e-6 {
        fails.push(format!("trace Du {trace:.1e}"));
    }

    // Kernel parity and the exact power decay of the bare kernel.
    let (mut parity, mut decay) = (0.0f64, 0.0f64);
    for a in [1.0 / 6.0, 0.25, 1.0 / 3.0] {
        for eps in [0.0, 0.1] {
            let m = if eps > 0.0 { MollifierParam::new(eps).unwrap() } else { MollifierParam::none() };
            let kern = Kernel::new(alpha(a), m);
            let mut consts = Vec::new();
            for k in 0..40 {
                let r = 10f64.powf(-2.0 + 4.0 * k as f64 / 39.0);
                let phi = k as f64 * golden;
                let x = Vec2::new(r * phi.cos(), r * phi.sin());
                let (p, q) = (kern.gradperp(x).map_err(err)?, kern.gradperp(-x).map_err(err)?);
                parity = parity.max((p + q).norm() / p.norm());
                if eps == 0.0 {
                    consts.push(p.norm() * r.powf(1.0 + 2.0 * a));
                }
            }
            if let (Some(lo), Some(hi)) = (
                consts.iter().copied().reduce(f64::min),
                consts.iter().copied().reduce(f64::max),
            ) {
                decay = decay.max(hi / lo - 1.0);
            }
        }
    }
    if parity > 1e-14 || decay > 1e-12 {
        fails.push(format!("kernel parity {parity:.1e}, decay {decay:.1e}"));
    }

    // Time reversal.
    let cake = single(ClosedCurve::ellipse(Vec2::zero(), 1.2, 0.8, 128).unwrap(), 0.25);
    let start = cake.components()[0].curve().nodes().to_vec();
    let mut s = SimState::new(cake, stepper(1e-3, VelocitySettings::default())).map_err(err)?;
    s.run_until(0.1, &mut NullSink).map_err(err)?;
    s.config.stepper.velocity.sign = -1.0;
    s.run_until(0.2, &mut NullSink).map_err(err)?;
    let back = s.cake.components()[0].curve().nodes();
    let reversal = start.iter().zip(back).map(|(p, q)| p.dist(*q)).fold(0.0, f64::max);
    if reversal > 1e-6 {
        fails.push(format!("time reversal {reversal:.1e}"));
    }

    // Point symmetry of two equal disks.
    let n = 64;
    let disk = |cx: f64| ClosedCurve::circle(Vec2::new(cx, 0.0), 1.0, n).unwrap();
    let pair = LayerCake::new(
        vec![
            LevelComponent::new("left", None, 1.0, disk(-1.5)).unwrap(),
            LevelComponent::new("right", None, 1.0, disk(1.5)).unwrap(),
        ],
        alpha(0.25),
    );
    let mut s = SimState::new(pair, stepper(1e-2, VelocitySettings::default())).map_err(err)?;
    let mut asym = 0.0f64;
    for _ in 0..5 {
        take_step(&mut s, 1e-2)?;
        let l = s.cake.components()[0].curve().nodes();
        let r = s.cake.components()[1].curve().nodes();
        asym = (0..n).map(|k| (l[k] + r[(k + n / 2) % n]).norm()).fold(asym, f64::max);
    }
    if asym > 1e-9 {
        fails.push(format!("symmetry {asym:.1e}"));
    }

    // Admissibility of the bump moduli: finite iff min(β, 1) > 2α.
    let mut wrong = 0;
    for (beta, a) in [(0.8, 0.25), (0.3, 0.25), (0.5, 0.25), (0.45, 0.125), (0.2, 0.125), (1.5, 1.0 / 3.0)] {
        let h: f64 = f64::min(beta, 1.0);
        let adm = modulus_admissibility(Modulus::Power { beta: h }, &alpha(a)).map_err(err)?;
        if adm.is_finite() != (h > 2.0 * a) {
            wrong += 1;
        }
    }
    if wrong > 0 {
        fails.push(format!("{wrong} misclassified moduli"));
    }

    let detail = format!(
        "trace {trace:.1e}, parity {parity:.1e}, decay {decay:.1e}, reversal {reversal:.1e}, symmetry {asym:.1e}, classification errors {wrong}"
    );
    verdict(fails.is_empty(), detail)
}

fn main() -> ExitCode {
    let criteria: [(&str, Check); 10] = [
        ("velocity oracle equivalence", c1_velocity_oracle),
        ("mollifier scaling law", c2_scaling_law),
        ("radial steadiness and rotation", c3_steady_rotation),
        ("conservation order", c4_conservation_order),
        ("finiteness thresholds", c5_finiteness_thresholds),
        ("curvature-energy identity", c6_curvature_identity),
        ("length identity", c7_length_identity),
        ("envelope integrity", c8_envelopes),
        ("geometry analytics", c9_geometry),
        ("property suites", c10_properties),
    ];
    let only: Option<usize> = std::env::var("ACCEPTANCE_ONLY").ok().and_then(|v| v.parse().ok());
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let n = i + 1;
        if only.is_some_and(|o| o != n) {
            continue;
        }
        let start = Instant::now();
        let (pass, detail) = match check() {
            Ok(v) => (v.pass, v.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        let secs = start.elapsed().as_secs_f64();
        failed += usize::from(!pass);
        println!("{} [{n:>2}] {name}: {detail} ({secs:.1} s)", if pass { "PASS" } else { "FAIL" });
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
