use std::sync::Arc;

use num_complex::Complex64 as C64;
use pblab_core::families::TowerIndex;
use pblab_core::function::{standard_test_functions, LinearCombination};
use pblab_core::operators::{
    apply, apply_chain, build_ab, build_squeeze_operators, build_su11, casimir, casimir_sum, ladder_residual,
    relation_ids, squeeze_identity_gaps, OperatorImage, Triple,
};
use pblab_core::{
    inner_product, Bump, BumpShape, DiffOperator, ExprFn, FamilyMember, Function1d, Method, PbProfile, ProfileKind, Side,
    SqueezeParams, Strategy,
};
use proptest::prelude::*;

fn profiles() -> Vec<Arc<PbProfile>> {
    vec![
        Arc::new(PbProfile::builtin(ProfileKind::Constant { alpha: 3.0 }, 2.0).unwrap()),
        Arc::new(PbProfile::builtin(ProfileKind::Quartic { gamma: 0.5 }, 0.5).unwrap()),
        Arc::new(PbProfile::builtin(ProfileKind::Cosine { gamma: 0.5 }, 0.5).unwrap()),
        Arc::new(PbProfile::parse_custom("1/(1+x^2/4)", 1.0).unwrap()),
    ]
}

fn grid() -> impl Iterator<Item = f64> {
    (0..401).map(|i| -5.0 + i as f64 * 0.025)
}

/// `sup |lhs - rhs| / max(1, sup |rhs|)` on the standard grid.
fn relative_sup(mut lhs: impl FnMut(f64) -> C64, mut rhs: impl FnMut(f64) -> C64) -> f64 {
    let (mut diff, mut scale): (f64, f64) = (0.0, 1.0);
    for x in grid() {
        let r = rhs(x);
        diff = diff.max((lhs(x) - r).norm());
        scale = scale.max(r.norm());
    }
    diff / scale
}

fn ev(f: &dyn Function1d, x: f64) -> C64 {
    f.value(x).unwrap()
}

#[test]
fn ab_commutator_is_identity() {
    for p in profiles() {
        let ab = build_ab(&p);
        for f in standard_test_functions() {
            let r = relative_sup(
                |x| {
                    apply_chain(&[&ab.a, &ab.b], f.as_ref(), x, Strategy::Symbolic).unwrap()
                        - apply_chain(&[&ab.b, &ab.a], f.as_ref(), x, Strategy::Symbolic).unwrap()
                },
                |x| ev(f.as_ref(), x),
            );
            assert!(r <= 1e-9, "{} {}: {r:e}", p.describe(), f.label());
        }
        assert!(ladder_residual(&p, "commutator_ab", 5, Strategy::Symbolic).unwrap().max() <= 1e-9);
    }
}

#[test]
fn ladder_action_on_phi() {
    for p in profiles() {
        let ab = build_ab(&p);
        let phi0 = FamilyMember::phi(&p, 0);
        let r = relative_sup(|x| apply(&ab.a, &phi0, x, Strategy::Symbolic).unwrap(), |_| C64::new(0.0, 0.0));
        assert!(r <= 1e-10, "{}: a phi_0 = {r:e}", p.describe());
        for n in 0..=8 {
            let (phi, next) = (FamilyMember::phi(&p, n), FamilyMember::phi(&p, n + 1));
            let c = ((n + 1) as f64).sqrt();
            let r = relative_sup(|x| apply(&ab.b, &phi, x, Strategy::Symbolic).unwrap(), |x| c * ev(&next, x));
            assert!(r <= 1e-10, "{}: b phi_{n} = {r:e}", p.describe());
        }
    }
}

#[test]
fn adjoints_match_the_stated_forms() {
    for p in profiles() {
        let ab = build_ab(&p);
        let k = p.k();
        for x in [-2.0, 0.3, 1.7] {
            let (al, al1, b) = (p.alpha(x).unwrap(), p.alpha_prime(x).unwrap(), p.beta_a(x).unwrap());
            let ad = ab.a_dag.eval_coefficients(x).unwrap();
            let bd = ab.b_dag.eval_coefficients(x).unwrap();
            assert!((ad[1].re + k * al).abs() < 1e-13 && (ad[0].re - (b - k * al1)).abs() < 1e-12);
            assert!((bd[1].re - al).abs() < 1e-13 && (bd[0].re - al1).abs() < 1e-13);
            assert_eq!(ad[2].norm() + bd[2].norm(), 0.0);
        }
    }
}

#[test]
fn adjoint_pairings_agree() {
    let f = Bump::new(0.2, 1.3, 1.0, BumpShape::Even);
    let g = Bump::new(-0.1, 1.6, 0.8, BumpShape::Odd);
    let fa: Arc<dyn Function1d> = Arc::new(f.clone());
    let ga: Arc<dyn Function1d> = Arc::new(g.clone());
    for p in profiles() {
        let ab = build_ab(&p);
        let t = build_su11(&p).unwrap();
        for (op, dag) in [(&ab.a, &ab.a_dag), (&ab.b, &ab.b_dag), (&t.k_plus, &t.k_plus.adjoint())] {
            let left = inner_product(&OperatorImage::new(dag.clone(), Arc::clone(&ga)), fa.as_ref(), Method::AdaptiveX).unwrap();
            let right = inner_product(ga.as_ref(), &OperatorImage::new(op.clone(), Arc::clone(&fa)), Method::AdaptiveX).unwrap();
            assert!((left.value - right.value).norm() <= 1e-8, "{} {}: {} vs {}", p.describe(), op.label(), left.value, right.value);
        }
        assert!(ladder_residual(&p, "adjoint", 5, Strategy::Symbolic).unwrap().max() <= 1e-8);
    }
}

#[test]
fn coefficient_table_examples() {
    let c = build_su11(&PbProfile::builtin(ProfileKind::Constant { alpha: 3.0 }, 2.0).unwrap()).unwrap();
    for x in [-1.0, 0.0, 2.5] {
        let k = c.k_plus.eval_coefficients(x).unwrap();
        assert_eq!((k[2].re, k[1].norm(), k[0].norm()), (4.5, 0.0, 0.0));
    }
    let g = 0.5;
    let q = build_su11(&PbProfile::builtin(ProfileKind::Quartic { gamma: g }, 0.5).unwrap()).unwrap();
    let cs = build_su11(&PbProfile::builtin(ProfileKind::Cosine { gamma: g }, 0.5).unwrap()).unwrap();
    for x in [-1.3f64, 0.4, 2.2] {
        let d = 1.0 + g * x.powi(4);
        let k = q.k_plus.eval_coefficients(x).unwrap();
        assert!((k[2].re - 0.5 / (d * d)).abs() < 1e-14);
        assert!((k[1].re + 0.5 * 4.0 * g * x.powi(3) / d.powi(3)).abs() < 1e-14);
        let d = 1.0 + g * x.cos();
        let k = cs.k_plus.eval_coefficients(x).unwrap();
        assert!((k[2].re - 0.5 / (d * d)).abs() < 1e-14);
        assert!((k[1].re - 0.5 * g * x.sin() / d.powi(3)).abs() < 1e-14);
    }
    for p in profiles() {
        for id in ["table418b", "table419b"] {
            assert!(ladder_residual(&p, id, 0, Strategy::Symbolic).unwrap().max() <= 1e-12, "{id}");
        }
    }
}

#[test]
fn vacuum_tower_examples() {
    for p in profiles() {
        let t = build_su11(&p).unwrap();
        let phi0 = FamilyMember::tower(&p, Side::Phi, TowerIndex::even(0));
        let phi1 = FamilyMember::tower(&p, Side::Phi, TowerIndex::even(1));
        for s in [Strategy::Symbolic, Strategy::FamilyCalculus] {
            let r = relative_sup(|x| apply(&t.k_minus, &phi0, x, s).unwrap(), |_| C64::new(0.0, 0.0));
            assert!(r <= 1e-10, "k_- phi: {r:e}");
            let r = relative_sup(|x| apply(&t.k_plus, &phi0, x, s).unwrap(), |x| 0.5 * ev(&phi1, x));
            assert!(r <= 1e-10, "k_+ phi: {r:e}");
            for m in 0..=5 {
                let tm = FamilyMember::tower(&p, Side::Phi, TowerIndex::even(m));
                let q = m as f64 + 0.25;
                let r = relative_sup(|x| apply(&t.k_zero, &tm, x, s).unwrap(), |x| q * ev(&tm, x));
                assert!(r <= 1e-10, "k_0 on m = {m}: {r:e}");
            }
        }
    }
}

#[test]
fn casimir_is_minus_three_sixteenths() {
    for p in profiles() {
        let t = build_su11(&p).unwrap();
        for which in [Triple::K, Triple::P] {
            let sum = casimir_sum(&t, which);
            for f in standard_test_functions() {
                let r = relative_sup(|x| sum.eval(f.as_ref(), x, Strategy::Symbolic).unwrap(), |x| -3.0 / 16.0 * ev(f.as_ref(), x));
                assert!(r <= 1e-8, "{} {which:?} {}: {r:e}", p.describe(), f.label());
            }
            let op = casimir(&p, which).unwrap();
            for x in [-4.0, 0.0, 1.1] {
                let c = op.eval_coefficients(x).unwrap();
                assert!((c[0] - C64::new(-3.0 / 16.0, 0.0)).norm() <= 1e-12 && c[1].norm() == 0.0 && c[2].norm() == 0.0);
            }
        }
        // j(j+1) with j = -1/4 on the vacuum
        let sum = casimir_sum(&t, Triple::K);
        let phi0 = FamilyMember::phi(&p, 0);
        let j = -0.25;
        let r = relative_sup(|x| sum.eval(&phi0, x, Strategy::FamilyCalculus).unwrap(), |x| j * (j + 1.0) * ev(&phi0, x));
        assert!(r <= 1e-10);
    }
}

#[test]
fn casimir_is_linear() {
    let p = &profiles()[1];
    let sum = casimir_sum(&build_su11(p).unwrap(), Triple::K);
    let fs = standard_test_functions();
    let (c1, c2) = (C64::new(0.7, -0.2), C64::new(-1.3, 0.5));
    let comb = LinearCombination::new(vec![(c1, Arc::clone(&fs[0])), (c2, Arc::clone(&fs[3]))]);
    for x in [-1.0, 0.2, 0.9] {
        let lhs = sum.eval(&comb, x, Strategy::Symbolic).unwrap();
        let rhs = c1 * sum.eval(fs[0].as_ref(), x, Strategy::Symbolic).unwrap()
            + c2 * sum.eval(fs[3].as_ref(), x, Strategy::Symbolic).unwrap();
        assert!((lhs - rhs).norm() <= 1e-12 * rhs.norm().max(1.0));
    }
}

#[test]
fn relation_catalog_passes() {
    for p in profiles() {
        for &(id, _) in relation_ids() {
            let sym = ladder_residual(&p, id, 5, Strategy::Symbolic).unwrap();
            let tol = if id.starts_with("table") { 1e-12 } else { 1e-8 };
            assert!(sym.max() <= tol, "{} {id}: {:e}", p.describe(), sym.max());
            assert!(!sym.entries.is_empty(), "{id} checked nothing");
        }
    }
}

#[test]
fn relation_examples_at_m_zero() {
    let p = &profiles()[2];
    let r = ladder_residual(p, "eq311", 0, Strategy::FamilyCalculus).unwrap();
    assert!(r.entries.iter().any(|e| e.counted) && r.max() <= 1e-10);
    let r = ladder_residual(p, "eq317", 0, Strategy::Symbolic).unwrap();
    assert!(r.max() <= 1e-9);
    // p_- at m = 0 targets an undefined member: reported, not counted
    let r = ladder_residual(p, "eq316", 0, Strategy::Symbolic).unwrap();
    assert!(r.entries.iter().any(|e| !e.counted));
    assert!(ladder_residual(p, "eq999", 0, Strategy::Symbolic).is_err());
}

#[test]
fn strategies_agree() {
    for p in profiles() {
        let ab = build_ab(&p);
        let t = build_su11(&p).unwrap();
        for op in [&ab.a, &ab.b, &ab.a_dag, &ab.b_dag, &t.k_plus, &t.k_minus, &t.k_zero, &t.p_plus, &t.p_minus, &t.p_zero] {
            for side in [Side::Phi, Side::Psi] {
                for n in [0, 3, 6] {
                    let f = FamilyMember::on_side(&p, side, n);
                    let family = match apply(op, &f, 0.0, Strategy::FamilyCalculus) {
                        Ok(_) => true,
                        Err(_) => false,
                    };
                    // fourth-order differences lose about eight digits; scale by the operand's size
                    let scale = grid().map(|x| ev(&f, x).norm()).fold(1.0, f64::max);
                    for x in [-2.0, -0.4, 0.0, 1.3, 2.6] {
                        let s = apply(op, &f, x, Strategy::Symbolic).unwrap();
                        if family {
                            let fc = apply(op, &f, x, Strategy::FamilyCalculus).unwrap();
                            assert!((s - fc).norm() <= 1e-10 * s.norm().max(1.0), "{} {} {side:?} {n}", p.describe(), op.label());
                        }
                        let fd = apply(op, &f, x, Strategy::FiniteDifference).unwrap();
                        assert!((s - fd).norm() <= 1e-5 * s.norm().max(scale), "{} {} fd", p.describe(), op.label());
                    }
                }
            }
        }
    }
}

#[test]
fn number_operators() {
    for p in profiles() {
        let ab = build_ab(&p);
        let n_op = ab.b.compose(&ab.a).unwrap();
        let n_dag = ab.a_dag.compose(&ab.b_dag).unwrap();
        for n in 0..=8 {
            let (phi, psi) = (FamilyMember::phi(&p, n), FamilyMember::psi(&p, n));
            let r = relative_sup(|x| apply(&n_op, &phi, x, Strategy::Symbolic).unwrap(), |x| n as f64 * ev(&phi, x));
            assert!(r <= 1e-9, "{} N phi_{n}: {r:e}", p.describe());
            let r = relative_sup(|x| apply(&n_dag, &psi, x, Strategy::Symbolic).unwrap(), |x| n as f64 * ev(&psi, x));
            assert!(r <= 1e-9, "{} N^dag psi_{n}: {r:e}", p.describe());
        }
    }
}

#[test]
fn squeeze_operator_examples() {
    let p = Arc::new(PbProfile::builtin(ProfileKind::Quartic { gamma: 0.5 }, 1.0).unwrap());
    let ab = build_ab(&p);
    let ops = build_squeeze_operators(&p, &SqueezeParams::new(0.0, 0.0).unwrap()).unwrap();
    let n_op = ab.b.compose(&ab.a).unwrap();
    for x in [-1.5, 0.0, 0.8] {
        for (l, r) in [(&ops.a_op, &ab.a), (&ops.b_op, &ab.b), (&ops.h, &n_op)] {
            let (cl, cr) = (l.eval_coefficients(x).unwrap(), r.eval_coefficients(x).unwrap());
            for j in 0..3 {
                assert!((cl[j] - cr[j]).norm() <= 1e-14, "{} vs {}", l.label(), r.label());
            }
        }
    }
    for z in [SqueezeParams::new(0.3, 0.7).unwrap(), SqueezeParams::new(1.0, 2.0).unwrap()] {
        let gaps = squeeze_identity_gaps(&p, &z).unwrap();
        assert!(gaps.commutator <= 1e-8, "[A,B]: {:e}", gaps.commutator);
        assert!(gaps.hamiltonian <= 1e-10, "H: {:e}", gaps.hamiltonian);
    }
    let wrong_k = PbProfile::builtin(ProfileKind::Quartic { gamma: 0.5 }, 0.5).unwrap();
    assert!(build_squeeze_operators(&wrong_k, &SqueezeParams::new(0.3, 0.0).unwrap()).is_err());
}

#[test]
fn composition_rejects_fourth_order() {
    let p = &profiles()[0];
    let t = build_su11(p).unwrap();
    assert!(t.k_plus.compose(&t.k_minus).is_err());
    let id = DiffOperator::identity();
    assert!(id.compose(&t.k_plus).is_ok());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn application_is_linear(x in -4.0f64..4.0, a in -3.0f64..3.0, b in -3.0f64..3.0, which in 0usize..4, op_idx in 0usize..6) {
        let p = &profiles()[which];
        let t = build_su11(p).unwrap();
        let ops = [&t.k_plus, &t.k_minus, &t.k_zero, &t.p_plus, &t.p_minus, &t.p_zero];
        let f: Arc<dyn Function1d> = Arc::new(ExprFn::parse("exp(-x^2)*cos(x)").unwrap());
        let g: Arc<dyn Function1d> = Arc::new(ExprFn::parse("x/(1+x^2)").unwrap());
        let (ca, cb) = (C64::new(a, 0.0), C64::new(0.0, b));
        let comb = LinearCombination::new(vec![(ca, Arc::clone(&f)), (cb, Arc::clone(&g))]);
        let op = ops[op_idx];
        let lhs = apply(op, &comb, x, Strategy::Symbolic).unwrap();
        let rhs = ca * apply(op, f.as_ref(), x, Strategy::Symbolic).unwrap() + cb * apply(op, g.as_ref(), x, Strategy::Symbolic).unwrap();
        prop_assert!((lhs - rhs).norm() <= 1e-12 * rhs.norm().max(1.0));
    }
}
