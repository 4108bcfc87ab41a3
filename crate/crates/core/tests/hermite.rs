use pblab_core::hermite::{hermite, hermite_derivative, pi_n, sigma_n, RecursiveFamily};
use pblab_core::{PbProfile, ProfileKind};
use proptest::prelude::*;

// independent oracle: explicit coefficients of H_n for n <= 6
fn hermite_by_hand(n: usize, u: f64) -> f64 {
    match n {
        0 => 1.0,
        1 => 2.0 * u,
        2 => 4.0 * u * u - 2.0,
        3 => 8.0 * u.powi(3) - 12.0 * u,
        4 => 16.0 * u.powi(4) - 48.0 * u * u + 12.0,
        5 => 32.0 * u.powi(5) - 160.0 * u.powi(3) + 120.0 * u,
        6 => 64.0 * u.powi(6) - 480.0 * u.powi(4) + 720.0 * u * u - 120.0,
        _ => unreachable!(),
    }
}

fn profiles() -> Vec<PbProfile> {
    vec![
        PbProfile::builtin(ProfileKind::Constant { alpha: 3.0 }, 2.0).unwrap(),
        PbProfile::builtin(ProfileKind::Quartic { gamma: 0.5 }, 0.5).unwrap(),
        PbProfile::builtin(ProfileKind::Cosine { gamma: 0.5 }, 0.5).unwrap(),
        PbProfile::parse_custom("1/(1+x^2/4)", 1.0).unwrap(),
    ]
}

#[test]
fn hermite_examples() {
    for u in [-3.0, 0.0, 0.7, 12.0] {
        assert_eq!(hermite(0, u).unwrap(), 1.0);
    }
    assert_eq!(hermite(2, 1.0).unwrap(), 2.0);
    assert_eq!(hermite(3, 0.5).unwrap(), -5.0);
    for n in 0..=6 {
        for u in [-2.1, -0.3, 0.0, 1.7] {
            let (a, b) = (hermite(n, u).unwrap(), hermite_by_hand(n, u));
            assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0), "H_{n}({u})");
        }
    }
}

#[test]
fn hermite_derivative_rule() {
    for n in 1..=10 {
        for u in [-1.5, 0.2, 2.0] {
            let d = hermite_derivative(n, 1, u).unwrap();
            let want = 2.0 * n as f64 * hermite(n - 1, u).unwrap();
            assert!((d - want).abs() <= 1e-12 * want.abs().max(1.0));
        }
    }
}

#[test]
fn overflow_is_an_error() {
    assert!(hermite(200, 1e3).is_err());
    assert!(hermite(200, 1.0).is_ok());
}

#[test]
fn low_order_closed_forms() {
    for p in profiles() {
        let k = p.k();
        for x in [-1.2, 0.0, 0.4, 2.5] {
            let b = p.beta_a(x).unwrap();
            assert_eq!(pi_n(0, b, k).unwrap(), 1.0);
            assert_eq!(sigma_n(0, b, k).unwrap(), 1.0);
            assert!((pi_n(1, b, k).unwrap() - b / k).abs() <= 1e-14 * (1.0 + (b / k).abs()));
            assert!((sigma_n(1, b, k).unwrap() - b).abs() <= 1e-14 * (1.0 + b.abs()));
            assert!((sigma_n(2, b, k).unwrap() - (b * b - k)).abs() <= 1e-13 * (1.0 + b * b));
        }
    }
}

#[test]
fn recursion_matches_closed_form() {
    let family = RecursiveFamily::new(12);
    assert_eq!(family.pi(0, 0.7, 0.5), 1.0);
    for p in profiles() {
        let k = p.k();
        for i in 0..101 {
            let x = -5.0 + i as f64 * 0.1;
            let b = p.beta_a(x).unwrap();
            for n in 0..=12 {
                for (rec, closed) in [
                    (family.pi(n, b, k), pi_n(n, b, k).unwrap()),
                    (family.sigma(n, b, k), sigma_n(n, b, k).unwrap()),
                ] {
                    let rel = (rec - closed).abs() / closed.abs().max(1.0);
                    assert!(rel <= 1e-10, "{} n = {n} x = {x}: {rec} vs {closed}", p.describe());
                }
            }
        }
    }
}

proptest! {
    #[test]
    fn sigma_is_k_power_times_pi(n in 0usize..15, b in -4.0f64..4.0, k in 0.1f64..3.0) {
        let (s, p) = (sigma_n(n, b, k).unwrap(), pi_n(n, b, k).unwrap());
        let want = k.powi(n as i32) * p;
        prop_assert!((s - want).abs() <= 1e-12 * want.abs().max(s.abs()).max(1.0));
    }

    #[test]
    fn pi_has_the_parity_of_n(n in 0usize..15, x in -5.0f64..5.0, which in 0usize..3) {
        let p = &profiles()[which];
        let (bp, bm) = (p.beta_a(x).unwrap(), p.beta_a(-x).unwrap());
        let (a, b) = (pi_n(n, bp, p.k()).unwrap(), pi_n(n, bm, p.k()).unwrap());
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        prop_assert!((b - sign * a).abs() <= 1e-12 * a.abs().max(1.0));
    }
}
