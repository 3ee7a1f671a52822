use gsqg_core::kernel::AlphaParam;
use gsqg_core::layercake::{
    modulus_admissibility, Admissibility, LayerCake, Modulus, RadialProfile, SampleSpec, SelfCell,
};
use gsqg_core::Vec2;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn alpha(a: f64) -> AlphaParam<f64> {
    AlphaParam::new(a).unwrap()
}

fn radial(profile: RadialProfile<f64>, levels: usize, nodes: usize) -> LayerCake<f64> {
    LayerCake::from_radial_profile(profile, levels, nodes, alpha(0.25)).unwrap()
}

fn theta(cake: &LayerCake<f64>, x: Vec2<f64>) -> Option<f64> {
    cake.evaluate_theta(x).value()
}

fn min_curve_distance(cake: &LayerCake<f64>, x: Vec2<f64>) -> f64 {
    cake.curves().map(|c| c.dist_point(x)).fold(f64::INFINITY, f64::min)
}

#[test]
fn power_modulus_has_closed_form_integral() {
    for (beta, a) in [(0.8, 0.25), (0.5, 0.1), (0.9, 1.0 / 3.0), (1.0, 1.0 / 6.0)] {
        match modulus_admissibility(Modulus::Power { beta }, &alpha(a)).unwrap() {
            Admissibility::Finite(v) => assert!((v - 1.0 / (beta - 2.0 * a)).abs() < 1e-6, "{v}"),
            other => panic!("beta {beta}: {other:?}"),
        }
    }
}

#[test]
fn critical_and_subcritical_powers_diverge() {
    for (beta, a) in [(0.5, 0.25), (0.3, 0.25), (1.0 / 3.0, 1.0 / 6.0), (0.2, 0.1)] {
        let adm = modulus_admissibility(Modulus::Power { beta }, &alpha(a)).unwrap();
        assert!(!adm.is_finite(), "beta {beta}, alpha {a}: {adm:?}");
    }
}

#[test]
fn log_corrected_modulus_matches_substitution_oracle() {
    // With s = e^{-t} the integral becomes ∫₀^∞ max(t, 1)^{-p} dt = 1 + 1/(p − 1).
    for p in [2.0, 3.0] {
        let expect = 1.0 + 1.0 / (p - 1.0);
        match modulus_admissibility(Modulus::LogCorrected { p }, &alpha(0.25)).unwrap() {
            Admissibility::Finite(v) => assert!((v - expect).abs() < 1e-6 * expect, "p {p}: {v}"),
            other => panic!("p {p}: {other:?}"),
        }
    }
    let marginal = modulus_admissibility(Modulus::LogCorrected { p: 1.0 }, &alpha(0.25)).unwrap();
    assert!(!marginal.is_finite());
}

#[test]
fn bump_presets_classify_by_exponent() {
    // Hölder exponent of the bumps is min(β, 1); admissible iff it exceeds 2α.
    for (beta, a, finite) in [(0.8, 0.25, true), (0.3, 0.25, false), (0.45, 0.125, true), (0.2, 0.125, false)] {
        let adm = modulus_admissibility(Modulus::Power { beta: f64::min(beta, 1.0) }, &alpha(a)).unwrap();
        assert_eq!(adm.is_finite(), finite, "beta {beta}, alpha {a}");
    }
}

#[test]
fn radial_reconstruction_is_within_one_level() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for profile in [
        RadialProfile::BumpPowOuter { beta: 1.0 },
        RadialProfile::BumpPowInner { beta: 0.7 },
        RadialProfile::BumpPowOuter { beta: 0.5 },
    ] {
        for levels in [4, 10, 25] {
            let cake = radial(profile, levels, 256);
            let bound = profile.sup() / levels as f64;
            let mut checked = 0;
            while checked < 300 {
                let x = Vec2::new(rng.gen_range(-1.2..1.2), rng.gen_range(-1.2..1.2));
                if min_curve_distance(&cake, x) <= 1e-6 {
                    continue;
                }
                let got = theta(&cake, x).unwrap();
                let exact = profile.value(x.norm());
                assert!((got - exact).abs() <= bound + 1e-12, "{profile:?} M={levels} x={x:?}: {got} vs {exact}");
                checked += 1;
            }
        }
    }
}

#[test]
fn holder_bound_holds_on_random_pairs() {
    let cake = radial(RadialProfile::BumpPowOuter { beta: 0.8 }, 16, 128);
    let eta = cake.default_eta();
    let l = cake.diag_l_eta(eta, &SampleSpec::default()).value;
    let two_a = cake.alpha().two_alpha();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut pairs = 0;
    while pairs < 1000 {
        let x = Vec2::new(rng.gen_range(-1.2..1.2), rng.gen_range(-1.2..1.2));
        let y = x + Vec2::new(rng.gen_range(-0.3..0.3), rng.gen_range(-0.3..0.3));
        let (Some(tx), Some(ty)) = (theta(&cake, x), theta(&cake, y)) else { continue };
        assert!((tx - ty).abs() <= l * (x.dist(y) + 2.0 * eta).powf(two_a) * (1.0 + 1e-12));
        pairs += 1;
    }
}

#[test]
fn l_eta_tends_to_total_variation_for_large_eta() {
    let cake = radial(RadialProfile::BumpPowInner { beta: 0.8 }, 12, 64);
    let eta = 1e6;
    let l = cake.diag_l_eta(eta, &SampleSpec::default()).value;
    let expect = cake.total_variation() * eta.powf(-cake.alpha().two_alpha());
    assert!((l / expect - 1.0).abs() < 1e-5, "{l} vs {expect}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn smoothed_functionals_do_not_increase_with_eta(e1 in 1e-6f64..1.0, factor in 1.0f64..100.0, beta in 0.3f64..1.5) {
        let cake = radial(RadialProfile::BumpPowOuter { beta }, 8, 64);
        let e2 = e1 * factor;
        let spec = SampleSpec::default();
        let (l1, l2) = (cake.diag_l_eta(e1, &spec).value, cake.diag_l_eta(e2, &spec).value);
        prop_assert!(l2 <= l1 * (1.0 + 1e-12));
        for cell in [SelfCell::Exclude, SelfCell::LevelGap] {
            let (r1, r2) = (cake.diag_r_eta(e1, cell), cake.diag_r_eta(e2, cell));
            prop_assert!(r2 <= r1 * (1.0 + 1e-12));
        }
    }

    #[test]
    fn linear_pushforward_bound(a in 0.6f64..1.6, b in -0.4f64..0.4, c in -0.4f64..0.4, d in 0.6f64..1.6) {
        prop_assume!((a * d - b * c).abs() > 0.2);
        let cake = radial(RadialProfile::BumpPowOuter { beta: 1.0 }, 6, 96);
        let mapped = cake.map_nodes(|p| Vec2::new(a * p.x + b * p.y, c * p.x + d * p.y)).unwrap();
        // Operator norms of the map and its inverse from the singular values.
        let fro = a * a + b * b + c * c + d * d;
        let det = (a * d - b * c).abs();
        let disc = (fro * fro - 4.0 * det * det).max(0.0).sqrt();
        let s_max = ((fro + disc) / 2.0).sqrt();
        let s_min = ((fro - disc) / 2.0).max(0.0).sqrt();
        let (lip, lip_inv) = (s_max, 1.0 / s_min);
        let eta = 0.01;
        let spec = SampleSpec::default();
        let before = cake.diag_l_eta(eta, &spec).value;
        let after = mapped.diag_l_eta(eta * lip, &spec).value;
        let n = 96.0;
        prop_assert!(after <= lip_inv.powf(cake.alpha().two_alpha()) * before * (1.0 + 5.0 / n), "{after} vs {before}");
    }
}
