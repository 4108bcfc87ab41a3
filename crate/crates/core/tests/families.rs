use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64 as C64;
use pblab_core::families::{h_minus, h_plus, membership, TowerIndex};
use pblab_core::function::{BumpShape, ClosureFn};
use pblab_core::hermite::{hermite, hermite_derivative, ln_factorial, ln_odd_double_factorial};
use pblab_core::operators::{apply, build_ab, Strategy};
use pblab_core::quadrature::gauss_hermite;
use pblab_core::{inner_product, Bump, FamilyMember, Function1d, Method, PbProfile, ProfileKind, Side};

fn shared(kind: ProfileKind, k: f64) -> Arc<PbProfile> {
    Arc::new(PbProfile::builtin(kind, k).unwrap())
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1e-300)
}

/// Closed forms of beta_a and 1/alpha for the three built-in profiles.
struct Explicit {
    profile: Arc<PbProfile>,
    beta: fn(f64) -> f64,
    inv_alpha: fn(f64) -> f64,
}

fn explicit_profiles() -> Vec<Explicit> {
    vec![
        Explicit {
            profile: shared(ProfileKind::Constant { alpha: 3.0 }, 2.0),
            beta: |x| x / 3.0,
            inv_alpha: |_| 1.0 / 3.0,
        },
        Explicit {
            profile: shared(ProfileKind::Quartic { gamma: 0.5 }, 0.5),
            beta: |x| x + 0.5 * x.powi(5) / 5.0,
            inv_alpha: |x| 1.0 + 0.5 * x.powi(4),
        },
        Explicit {
            profile: shared(ProfileKind::Cosine { gamma: 0.5 }, 0.5),
            beta: |x| x + 0.5 * x.sin(),
            inv_alpha: |x| 1.0 + 0.5 * x.cos(),
        },
    ]
}

fn double_factorial_odd(m: usize) -> f64 {
    (1..=m).map(|i| (2 * i - 1) as f64).product()
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

const XS: [f64; 7] = [-2.3, -1.0, -0.25, 0.0, 0.6, 1.4, 2.9];

#[test]
fn vacua_are_index_zero_members() {
    for e in explicit_profiles() {
        let p = &e.profile;
        for x in XS {
            let u = (e.beta)(x) / (2.0 * p.k()).sqrt();
            let (got, want) = (FamilyMember::phi(p, 0).eval(x).unwrap(), p.n_phi() * (-u * u).exp());
            // exp amplifies rounding of u^2 by u^2
            assert!(close(got, want, 1e-14 + 1e-15 * u * u), "{} at {x}: {got:e} vs {want:e}", p.describe());
            assert!(close(FamilyMember::psi(p, 0).eval(x).unwrap(), p.n_psi() * (e.inv_alpha)(x), 1e-13));
        }
    }
}

#[test]
fn families_match_explicit_formulas() {
    for e in explicit_profiles() {
        let p = &e.profile;
        let k = p.k();
        for n in 0..=8 {
            for x in XS {
                let u = (e.beta)(x) / (2.0 * k).sqrt();
                let h = hermite(n, u).unwrap();
                let phi = p.n_phi() / (factorial(n) * (2.0 * k).powi(n as i32)).sqrt() * h * (-u * u).exp();
                let psi = p.n_psi() * ((k / 2.0).powi(n as i32) / factorial(n)).sqrt() * h * (e.inv_alpha)(x);
                assert!(close(FamilyMember::phi(p, n).eval(x).unwrap(), phi, 1e-12), "{} phi_{n}({x})", p.describe());
                assert!(close(FamilyMember::psi(p, n).eval(x).unwrap(), psi, 1e-12), "{} psi_{n}({x})", p.describe());
            }
        }
    }
}

/// `d/dx H_{n+1}(beta_a(x)/sqrt(2k))` for the cosine profile.
fn cosine_h_prime(n: usize, k: f64, x: f64) -> f64 {
    let s = (2.0 * k).sqrt();
    hermite_derivative(n + 1, 1, (x + 0.5 * x.sin()) / s).unwrap() * (1.0 + 0.5 * x.cos()) / s
}

#[test]
fn cosine_psi_as_a_derivative() {
    // psi_n = N_psi/(2(n+1)) sqrt(2k (k/2)^n / n!) d/dx H_{n+1}(beta_a/sqrt(2k))
    let p = shared(ProfileKind::Cosine { gamma: 0.5 }, 0.5);
    let k = p.k();
    for n in 0..=10 {
        let pre = p.n_psi() / (2.0 * (n + 1) as f64) * (2.0 * k * (k / 2.0).powi(n as i32) / factorial(n)).sqrt();
        for x in XS {
            let direct = FamilyMember::psi(&p, n).eval(x).unwrap();
            let rewritten = pre * cosine_h_prime(n, k, x);
            assert!((direct - rewritten).abs() <= 1e-10 * direct.abs().max(1.0), "n = {n}, x = {x}");
        }
    }
}

#[test]
#[ignore = "the displayed derivative form lacks a factor 1/2: it evaluates to 2 psi_n"]
fn cosine_psi_derivative_form_as_displayed() {
    let p = shared(ProfileKind::Cosine { gamma: 0.5 }, 0.5);
    let k = p.k();
    for n in 0..=10 {
        let pre = p.n_psi() / (n + 1) as f64 * (2.0 * k / factorial(n) * (k / 2.0).powi(n as i32)).sqrt();
        for x in XS {
            let direct = FamilyMember::psi(&p, n).eval(x).unwrap();
            let displayed = pre * cosine_h_prime(n, k, x);
            assert!((direct - displayed).abs() <= 1e-10 * direct.abs().max(1.0), "n = {n}, x = {x}");
        }
    }
}

#[test]
fn towers_match_explicit_formulas() {
    for e in explicit_profiles() {
        let p = &e.profile;
        let (k, s) = (p.k(), (2.0 * p.k()).sqrt());
        for m in 0..=5 {
            let df = double_factorial_odd(m);
            for x in XS {
                let u = (e.beta)(x) / s;
                let (h_even, h_odd) = (hermite(2 * m, u).unwrap(), hermite(2 * m + 1, u).unwrap());
                let g = (-u * u).exp();
                let want = [
                    p.n_phi() / (df * (2.0 * k).powi(m as i32)) * h_even * g,
                    p.n_psi() * df / factorial(2 * m) * (k / 2.0).powi(m as i32) * h_even * (e.inv_alpha)(x),
                    p.n_phi() / (df * (2.0 * k).powf(m as f64 + 0.5)) * h_odd * g,
                    p.n_psi() * df / factorial(2 * m + 1) * (k / 2.0).powf(m as f64 + 0.5) * h_odd * (e.inv_alpha)(x),
                ];
                let got = [
                    FamilyMember::tower(p, Side::Phi, TowerIndex::even(m)),
                    FamilyMember::tower(p, Side::Psi, TowerIndex::even(m)),
                    FamilyMember::tower(p, Side::Phi, TowerIndex::odd(m)),
                    FamilyMember::tower(p, Side::Psi, TowerIndex::odd(m)),
                ];
                for (g, w) in got.iter().zip(want) {
                    let v = g.eval(x).unwrap();
                    assert!((v - w).abs() <= 1e-12 * w.abs().max(1e-300) + 1e-300, "{} {g:?} m = {m} x = {x}: {v} vs {w}", p.describe());
                }
            }
        }
    }
}

#[test]
fn tower_examples() {
    let c = shared(ProfileKind::Constant { alpha: 3.0 }, 2.0);
    for x in XS {
        let t0 = FamilyMember::tower(&c, Side::Phi, TowerIndex::even(0)).eval(x).unwrap();
        assert_eq!(t0, FamilyMember::phi(&c, 0).eval(x).unwrap());
        // m = 1: sqrt(2!)/1!! phi_2 = N_phi/(2k) H_2(u) exp(-u^2)
        let t1 = FamilyMember::tower(&c, Side::Phi, TowerIndex::even(1)).eval(x).unwrap();
        assert!(close(t1, 2f64.sqrt() * FamilyMember::phi(&c, 2).eval(x).unwrap(), 1e-13));
    }
    // H_2(0) = -2 so the m = 1 member at 0 is -2 N_phi/(2k)
    let t1 = FamilyMember::tower(&c, Side::Phi, TowerIndex::even(1)).eval(0.0).unwrap();
    assert!(close(t1, -c.n_phi() / 2.0, 1e-14));

    // psi_{-1/4, 3/4} = psi_1 = a^dagger psi_0 / 1
    let q = shared(ProfileKind::Quartic { gamma: 0.5 }, 0.5);
    let a_dag = build_ab(&q).a_dag;
    let psi0 = FamilyMember::psi(&q, 0);
    let odd0 = FamilyMember::tower(&q, Side::Psi, TowerIndex::odd(0));
    for x in XS {
        let v = odd0.eval(x).unwrap();
        assert!(close(v, FamilyMember::psi(&q, 1).eval(x).unwrap(), 1e-14));
        let image = apply(&a_dag, &psi0, x, Strategy::Symbolic).unwrap();
        assert!((image.re - v).abs() <= 1e-12 * v.abs().max(1.0));
    }
}

#[test]
fn tower_labels() {
    assert_eq!(TowerIndex::even(2).q(), 2.25);
    assert_eq!(TowerIndex::odd(2).q(), 2.75);
    assert_eq!(TowerIndex::J, -0.25);
    assert_eq!(TowerIndex::odd(3).hermite_index(), 7);
}

#[test]
fn log_domain_prefactors_reach_large_m() {
    let p = shared(ProfileKind::Constant { alpha: 1.0 }, 0.5);
    let m = 40;
    let t = FamilyMember::tower(&p, Side::Phi, TowerIndex::even(m));
    let want = 0.5 * ln_factorial(2 * m) - ln_odd_double_factorial(m);
    assert!(close(t.scale().ln(), want, 1e-13));
    assert!(t.eval(0.3).unwrap().is_finite());
    assert!(FamilyMember::psi(&p, 180).eval(0.5).unwrap().is_finite());
}

#[test]
fn oscillator_examples() {
    assert!(close(FamilyMember::oscillator(0).eval(0.0).unwrap(), PI.powf(-0.25), 1e-15));
    let e1 = FamilyMember::oscillator(1);
    for x in [0.3, 1.0, 2.7] {
        assert_eq!(e1.eval(-x).unwrap(), -e1.eval(x).unwrap());
    }
    // Gauss-Hermite with weight exp(-x^2) is exact for e_n e_m exp(x^2)
    let (nodes, weights) = gauss_hermite(20);
    for n in 0..=10 {
        for m in 0..=10 {
            let (en, em) = (FamilyMember::oscillator(n), FamilyMember::oscillator(m));
            let s: f64 = nodes
                .iter()
                .zip(&weights)
                .map(|(&x, &w)| w * (x * x).exp() * en.eval(x).unwrap() * em.eval(x).unwrap())
                .sum();
            let want = if n == m { 1.0 } else { 0.0 };
            assert!((s - want).abs() <= 1e-12, "<e_{n}, e_{m}> = {s}");
        }
    }
}

#[test]
fn bump_is_in_the_common_domain() {
    let p = shared(ProfileKind::Quartic { gamma: 0.5 }, 0.5);
    let bump: Arc<dyn Function1d> = Arc::new(Bump::unit(0.2, 1.0));
    let minus = h_minus(&p, Arc::clone(&bump)).unwrap();
    let (a, b) = minus.support().unwrap();
    assert!(a.is_finite() && b.is_finite() && a < b);
    let m = membership(&p, bump).unwrap();
    assert!(m.converged && m.norm.is_finite() && m.norm > 0.0);
}

#[test]
fn transformed_vacuum_is_bounded() {
    // alpha = 1, k = 1/2: x(u) = u, so h_-(u) = N_phi exp(-u^2) exp(u^2/2)
    let p = shared(ProfileKind::Constant { alpha: 1.0 }, 0.5);
    let minus = h_minus(&p, Arc::new(FamilyMember::phi(&p, 0))).unwrap();
    for u in [-6.0f64, -2.0, 0.0, 1.5, 6.0] {
        let v = minus.value(u).unwrap().re;
        assert!(close(v, p.n_phi() * (-0.5 * u * u).exp(), 1e-13));
        assert!(v <= p.n_phi());
    }
    let m = membership(&p, Arc::new(FamilyMember::phi(&p, 0))).unwrap();
    assert!(m.converged);
    assert!(close(m.norm, p.n_phi() * PI.powf(0.25), 1e-9));
}

#[test]
fn change_of_variables_pairings() {
    for (alpha, k) in [(1.0, 0.5), (3.0, 2.0), (0.7, 1.3)] {
        let p = shared(ProfileKind::Constant { alpha }, k);
        let f = Bump::new(0.3, 1.5, 1.7, BumpShape::Even);
        let scale = |x: f64| (2.0 * k).sqrt() * alpha * x;
        let fr = f.clone();
        // f_+(u) = f(sqrt(2k) alpha u) exp(-u^2/2) and g_-(u) = g(sqrt(2k) alpha u) exp(u^2/2)
        let f_plus = ClosureFn::new("f_plus", move |u: f64| fr.value(scale(u)).unwrap() * (-0.5 * u * u).exp())
            .with_support(-1.8 / ((2.0 * k).sqrt() * alpha), 1.8 / ((2.0 * k).sqrt() * alpha));
        let fr = f.clone();
        let g_minus = ClosureFn::new("g_minus", move |u: f64| fr.value(scale(u)).unwrap() * (0.5 * u * u).exp())
            .with_support(-1.8 / ((2.0 * k).sqrt() * alpha), 1.8 / ((2.0 * k).sqrt() * alpha));
        let root = (2.0 * k * PI.sqrt()).sqrt();
        for n in 0..=6 {
            let e_n = FamilyMember::oscillator(n);
            let kn = k.powf(n as f64 / 2.0);
            let lhs = inner_product(&f, &FamilyMember::phi(&p, n), Method::AdaptiveX).unwrap().value;
            let rhs = p.n_phi() * alpha / kn * root * inner_product(&f_plus, &e_n, Method::AdaptiveX).unwrap().value;
            assert!((lhs - rhs).norm() <= 1e-8, "phi_{n}: {lhs} vs {rhs}");
            let library_plus = h_plus(&p, Arc::new(f.clone())).unwrap();
            let via_library = p.n_phi() / kn * root * inner_product(&library_plus, &e_n, Method::AdaptiveX).unwrap().value;
            assert!((lhs - via_library).norm() <= 1e-8);

            let lhs = inner_product(&FamilyMember::psi(&p, n), &f, Method::AdaptiveX).unwrap().value;
            let rhs = p.n_psi() * kn * root * inner_product(&e_n, &g_minus, Method::AdaptiveX).unwrap().value;
            assert!((lhs - rhs).norm() <= 1e-8 * lhs.norm().max(1.0), "psi_{n}: {lhs} vs {rhs}");
        }
    }
}

#[test]
fn tower_biorthonormality() {
    for e in explicit_profiles() {
        let p = &e.profile;
        for odd in [false, true] {
            for m in 0..=5 {
                for l in 0..=5 {
                    let idx = |i| if odd { TowerIndex::odd(i) } else { TowerIndex::even(i) };
                    let phi = FamilyMember::tower(p, Side::Phi, idx(m));
                    let psi = FamilyMember::tower(p, Side::Psi, idx(l));
                    let v = inner_product(&phi, &psi, Method::TransformedGaussHermite).unwrap().value;
                    let want = if m == l { 1.0 } else { 0.0 };
                    assert!((v - C64::new(want, 0.0)).norm() <= 1e-10, "{} odd={odd} m={m} l={l}: {v}", p.describe());
                }
            }
        }
    }
}

#[test]
fn parity_sectors_are_orthogonal() {
    let even = Bump::new(0.0, 1.7, 2.0, BumpShape::Even);
    let odd = Bump::new(0.0, 1.7, 2.0, BumpShape::Odd);
    for e in explicit_profiles() {
        let p = &e.profile;
        for m in 0..=5 {
            let even_tower = FamilyMember::tower(p, Side::Phi, TowerIndex::even(m));
            let odd_tower = FamilyMember::tower(p, Side::Phi, TowerIndex::odd(m));
            let zero_a = inner_product(&even_tower, &odd, Method::AdaptiveX).unwrap();
            let zero_b = inner_product(&odd_tower, &even, Method::AdaptiveX).unwrap();
            let live = inner_product(&even_tower, &even, Method::AdaptiveX).unwrap();
            assert!(zero_a.value.norm() <= 1e-12 * live.value.norm().max(1.0), "{zero_a:?}");
            assert!(zero_b.value.norm() <= 1e-12, "{zero_b:?}");
        }
    }
}
