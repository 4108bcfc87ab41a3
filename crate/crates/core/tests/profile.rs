use std::f64::consts::PI;
use std::sync::Arc;

use pblab_core::operators::{apply, build_ab, Strategy};
use pblab_core::profile::vacua;
use pblab_core::{parse, PbProfile, ProfileKind};
use proptest::prelude::*;

fn builtin(kind: ProfileKind, k: f64) -> PbProfile {
    PbProfile::builtin(kind, k).unwrap()
}

fn figure_profiles() -> Vec<PbProfile> {
    vec![
        builtin(ProfileKind::Constant { alpha: 3.0 }, 2.0),
        builtin(ProfileKind::Quartic { gamma: 0.5 }, 0.5),
        builtin(ProfileKind::Cosine { gamma: 0.5 }, 0.5),
    ]
}

#[test]
fn builtin_examples() {
    assert_eq!(builtin(ProfileKind::Constant { alpha: 3.0 }, 2.0).beta_a(3.0).unwrap(), 1.0);
    // 1 + 0.5/5 by hand
    let q = builtin(ProfileKind::Quartic { gamma: 0.5 }, 0.5);
    assert!((q.beta_a(1.0).unwrap() - 1.1).abs() < 1e-15);
    let c = builtin(ProfileKind::Cosine { gamma: 0.5 }, 0.5);
    assert_eq!(c.beta_a(0.0).unwrap(), 0.0);
    assert!((c.inv_alpha(0.0).unwrap() - 1.5).abs() < 1e-15);
}

#[test]
fn builtin_rejects_out_of_range_parameters() {
    for (kind, k) in [
        (ProfileKind::Cosine { gamma: 1.5 }, 0.5),
        (ProfileKind::Cosine { gamma: -1.0 }, 0.5),
        (ProfileKind::Constant { alpha: 0.0 }, 1.0),
        (ProfileKind::Constant { alpha: -2.0 }, 1.0),
        (ProfileKind::Quartic { gamma: -0.1 }, 1.0),
        (ProfileKind::Quartic { gamma: 0.5 }, 0.0),
        (ProfileKind::Constant { alpha: 1.0 }, -1.0),
    ] {
        assert!(PbProfile::builtin(kind, k).is_err(), "{kind:?}, k = {k}");
    }
}

#[test]
fn custom_examples() {
    let one = PbProfile::parse_custom("1", 1.0).unwrap();
    for i in -80..=80 {
        let x = i as f64 * 0.1;
        assert!((one.beta_a(x).unwrap() - x).abs() <= 1e-12, "x = {x}");
    }
    let q = PbProfile::parse_custom("1/(1+0.5*x^4)", 0.5).unwrap();
    assert!((q.beta_a(1.0).unwrap() - 1.1).abs() <= 1e-9);
    let two = PbProfile::parse_custom("2", 1.0).unwrap();
    assert!((two.beta_a(4.0).unwrap() - 2.0).abs() <= 1e-12);
}

#[test]
fn custom_rejects_non_positive_alpha() {
    assert!(PbProfile::parse_custom("x^2", 1.0).is_err());
    assert!(PbProfile::parse_custom("cos(x)", 1.0).is_err());
    assert!(PbProfile::parse_custom("1/(1+", 1.0).is_err());
}

#[test]
fn numerical_antiderivative_matches_closed_forms() {
    for (src, p) in [
        ("3", builtin(ProfileKind::Constant { alpha: 3.0 }, 2.0)),
        ("1/(1+0.5*x^4)", builtin(ProfileKind::Quartic { gamma: 0.5 }, 0.5)),
        ("1/(1+0.5*cos(x))", builtin(ProfileKind::Cosine { gamma: 0.5 }, 0.5)),
    ] {
        let custom = PbProfile::parse_custom(src, p.k()).unwrap();
        for i in 0..=1200 {
            let x = -6.0 + i as f64 * 0.01;
            let (a, b) = (custom.beta_a(x).unwrap(), p.beta_a(x).unwrap());
            assert!((a - b).abs() <= 1e-9, "{src} at {x}: {a} vs {b}");
        }
    }
}

#[test]
fn inverse_examples() {
    let c = builtin(ProfileKind::Constant { alpha: 3.0 }, 2.0);
    assert!((c.beta_a_inverse(1.0).unwrap() - 3.0).abs() < 1e-12);
    let q = builtin(ProfileKind::Quartic { gamma: 0.5 }, 0.5);
    assert!((q.beta_a_inverse(1.1).unwrap() - 1.0).abs() < 1e-12);
    for p in figure_profiles() {
        assert_eq!(p.beta_a_inverse(0.0).unwrap(), 0.0);
    }
}

#[test]
fn normalization_product() {
    for p in figure_profiles() {
        let target = 1.0 / (2.0 * PI * p.k()).sqrt();
        assert!((p.n_phi() * p.n_psi() - target).abs() <= 4.0 * f64::EPSILON * target);
        assert!((p.n_phi() - (2.0 * PI * p.k()).powf(-0.25)).abs() < 1e-15);
    }
    // figure 1 caption: N = 1/(sqrt(2) pi^(1/4))
    let fig = builtin(ProfileKind::Constant { alpha: 3.0 }, 2.0)
        .with_normalization(Some(1.0 / (2f64.sqrt() * PI.powf(0.25))), None)
        .unwrap();
    assert!((fig.n_psi() - fig.n_phi()).abs() < 1e-15);
    assert!(builtin(ProfileKind::Constant { alpha: 3.0 }, 2.0)
        .with_normalization(Some(1.0), Some(1.0))
        .is_err());
}

#[test]
fn vacua_examples() {
    let c = Arc::new(builtin(ProfileKind::Constant { alpha: 3.0 }, 2.0));
    let (phi0, _) = vacua(&c);
    assert!((phi0.eval(0.0).unwrap() - c.n_phi()).abs() < 1e-15);

    let q = Arc::new(builtin(ProfileKind::Quartic { gamma: 0.5 }, 0.5));
    let (phi0, psi0) = vacua(&q);
    for x in [-2.0f64, -0.5, 0.0, 1.0, 3.0] {
        let want = q.n_psi() * (1.0 + 0.5 * x.powi(4));
        assert!((psi0.eval(x).unwrap() - want).abs() <= 1e-14 * want);
        let b = x + 0.1 * x.powi(5);
        let want = q.n_phi() * (-b * b / (2.0 * q.k())).exp();
        assert!((phi0.eval(x).unwrap() - want).abs() <= 1e-14 * want.max(1e-300));
    }

    let cos = Arc::new(builtin(ProfileKind::Cosine { gamma: 0.5 }, 0.5));
    let (_, psi0) = vacua(&cos);
    assert!((psi0.eval(0.0).unwrap() - 1.5 * cos.n_psi()).abs() < 1e-15);
}

#[test]
fn lowering_operator_kills_the_vacuum() {
    for p in figure_profiles() {
        let p = Arc::new(p);
        let a = build_ab(&p).a;
        let (phi0, _) = vacua(&p);
        for i in 0..401 {
            let x = -5.0 + i as f64 * 0.025;
            let v = apply(&a, &phi0, x, Strategy::Symbolic).unwrap();
            assert!(v.norm() <= 1e-10, "{} at {x}: {v}", p.describe());
        }
    }
}

#[test]
fn alpha_derivatives_are_symbolic() {
    let q = builtin(ProfileKind::Quartic { gamma: 0.5 }, 0.5);
    // d/dx 1/(1+x^4/2) = -2x^3/(1+x^4/2)^2
    let x = 1.3f64;
    let want = -2.0 * x.powi(3) / (1.0 + 0.5 * x.powi(4)).powi(2);
    assert!((q.alpha_prime(x).unwrap() - want).abs() < 1e-14);
    assert!((q.beta_b(x).unwrap() - want).abs() < 1e-14);
    let e = parse("1/(1+0.5*x^4)").unwrap();
    assert!((q.alpha(x).unwrap() - e.eval(x).unwrap()).abs() < 1e-15);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn inverse_round_trips(x in -8.0f64..8.0, which in 0usize..4) {
        let p = match which {
            0 => builtin(ProfileKind::Constant { alpha: 3.0 }, 2.0),
            1 => builtin(ProfileKind::Quartic { gamma: 0.5 }, 0.5),
            2 => builtin(ProfileKind::Cosine { gamma: 0.5 }, 0.5),
            _ => PbProfile::parse_custom("1/(1+x^2/4)", 1.0).unwrap(),
        };
        let y = p.beta_a(x).unwrap();
        let back = p.beta_a_inverse(y).unwrap();
        prop_assert!((back - x).abs() <= 1e-10 * (1.0 + x.abs()), "{x} -> {y} -> {back}");
        prop_assert!((p.beta_a(back).unwrap() - y).abs() <= 1e-12 * (1.0 + y.abs()));
    }

    #[test]
    fn beta_is_increasing(x in -8.0f64..8.0, dx in 1e-3f64..1.0, gamma in -0.99f64..0.99) {
        let p = builtin(ProfileKind::Cosine { gamma }, 0.5);
        prop_assert!(p.beta_a(x + dx).unwrap() > p.beta_a(x).unwrap());
        prop_assert!(p.inv_alpha(x).unwrap() > 0.0);
    }
}
