use pblab_core::expr::parse;

fn eval(src: &str, x: f64) -> f64 {
    parse(src).unwrap().eval(x).unwrap()
}

#[test]
fn parse_examples() {
    assert_eq!(eval("1/(1+0.5*x^4)", 0.0), 1.0);
    assert_eq!(eval("x + 0.5*sin(x)", 0.0), 0.0);
    // 1/(1 - 0.5) by hand
    assert!((eval("1/(1+0.5*cos(x))", std::f64::consts::PI) - 2.0).abs() < 1e-15);
}

#[test]
fn differentiate_examples() {
    assert_eq!(parse("x^2").unwrap().derivative().eval(3.0).unwrap(), 6.0);
    let d = parse("3").unwrap().derivative();
    for x in [-2.0, 0.0, 5.5] {
        assert_eq!(d.eval(x).unwrap(), 0.0);
    }
    // fourth-order central difference with h = 1e-3
    let e = parse("1/(1+0.5*x^4)").unwrap();
    let h = 1e-3;
    let f = |t: f64| e.eval(t).unwrap();
    let fd = (f(1.0 - 2.0 * h) - 8.0 * f(1.0 - h) + 8.0 * f(1.0 + h) - f(1.0 + 2.0 * h)) / (12.0 * h);
    let exact = e.derivative().eval(1.0).unwrap();
    assert!(((exact - fd) / exact).abs() < 1e-8, "{exact} vs {fd}");
    // closed form -2x^3/(1+0.5x^4)^2 at x = 1
    assert!((exact + 2.0 / 2.25).abs() < 1e-15);
}

#[test]
fn evaluate_examples() {
    assert_eq!(eval("exp(-x^2)", 0.0), 1.0);
    assert_eq!(eval("cosh(x)", 0.0), 1.0);
    assert!((eval("x + (0.5)*x^5/5", 1.0) - 1.1).abs() < 1e-15);
}

#[test]
fn domain_and_syntax_errors_are_reported() {
    assert!(parse("log(x)").unwrap().eval(-1.0).is_err());
    assert!(parse("1/x").unwrap().eval(0.0).is_err());
    assert!(parse("exp(x)").unwrap().eval(1e4).is_err());
    for bad in ["(1+x", "1+", "foo(x)", "sin(x,x)", "", "x^0.5", "2**x"] {
        assert!(parse(bad).is_err(), "{bad:?} should not parse");
    }
    let err = parse("1 + (2*x").unwrap_err();
    assert!(err.to_string().contains('4') || err.to_string().contains('8'), "{err}");
}

#[test]
fn rendering_round_trips() {
    for src in ["1/(1+0.5*x^4)", "x + 0.5*sin(x)", "-x^2*exp(-x)", "sqrt(1+x^2)-tanh(x)/cosh(x)", "pi*sinh(x)^-2"] {
        let e = parse(src).unwrap();
        let back = parse(&e.to_string()).unwrap();
        for x in [-1.3, 0.4, 2.2] {
            let (a, b) = (e.eval(x).unwrap(), back.eval(x).unwrap());
            assert!((a - b).abs() <= 1e-14 * a.abs().max(1.0), "{src}: {a} vs {b}");
        }
    }
}

use proptest::prelude::*;

/// Smooth expressions in `x`: no poles, bounded growth on `|x| <= 2`.
fn smooth_expr() -> impl Strategy<Value = String> {
    let leaf = prop_oneof![Just("x".to_string()), (-3.0f64..3.0).prop_map(|c| format!("({c:.3})"))];
    leaf.prop_recursive(3, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a} + {b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a} - {b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a} * {b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a} / (1 + ({b})^2))")),
            inner.clone().prop_map(|a| format!("sin({a})")),
            inner.clone().prop_map(|a| format!("cos({a})")),
            inner.clone().prop_map(|a| format!("tanh({a})")),
            inner.clone().prop_map(|a| format!("exp(-({a})^2)")),
            (inner, 0u32..4).prop_map(|(a, n)| format!("({a})^{n}")),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn derivative_matches_central_difference(src in smooth_expr(), x in -2.0f64..2.0) {
        let e = parse(&src).unwrap();
        let d = e.derivative().eval(x).unwrap();
        let h = 1e-4;
        let f = |t: f64| e.eval(t).unwrap();
        let fd = (f(x - 2.0 * h) - 8.0 * f(x - h) + 8.0 * f(x + h) - f(x + 2.0 * h)) / (12.0 * h);
        prop_assert!((d - fd).abs() <= 1e-6 * (1.0 + d.abs()), "{src} at {x}: {d} vs {fd}");
    }

    #[test]
    fn parser_never_panics(src in "[-+*/^()x0-9.a-z ,]{0,24}") {
        let _ = parse(&src);
    }

    #[test]
    fn rendered_form_evaluates_identically(src in smooth_expr(), x in -2.0f64..2.0) {
        let e = parse(&src).unwrap();
        let back = parse(&e.to_string()).unwrap();
        let (a, b) = (e.eval(x).unwrap(), back.eval(x).unwrap());
        prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()), "{src} -> {e}");
    }
}
