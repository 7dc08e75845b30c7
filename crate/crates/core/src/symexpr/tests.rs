use proptest::prelude::*;

use super::*;

fn e(s: &str) -> Expr {
    parse_expr(s, &ExprContext::with_params(["l", "a"])).unwrap()
}

fn jc(s: &str, k: u32) -> JetCoordinate {
    JetCoordinate::new(s, k)
}

#[test]
fn pythagoras_is_zero() {
    let z = &(&e("sin(theta)^2") + &e("cos(theta)^2")) - &Expr::one();
    assert!(z.is_zero());
}

#[test]
fn rational_cancellation() {
    assert_eq!(e("(x^2 - 1)/(x - 1)"), e("x + 1"));
    assert_eq!(e("(1 - cos(t)^2)/sin(t)"), e("sin(t)"));
    assert_eq!(e("x*y/(x*z)"), e("y/z"));
}

#[test]
fn print_round_trip_fixed() {
    for s in [
        "-x/cos(theta)^2",
        "(x*sin(theta) + y)/(cos(theta)*(l + x^2))",
        "3/2*dot(x)^2 - ddot(y)",
        "sqrt(1 + x^2)/(1 + x^2)",
        "exp(x) + ln(y) + atan(z^(3))",
    ] {
        let v = e(s);
        assert_eq!(e(&v.to_string()), v, "{}", s);
    }
}

#[test]
fn jet_notations_agree() {
    assert_eq!(e("x'"), e("dot(x)"));
    assert_eq!(e("x''"), e("ddot(x)"));
    assert_eq!(e("x^(2)"), e("ddot(x)"));
    assert_eq!(e("x^(3)"), Expr::jet(&jc("x", 3)));
    assert_ne!(e("x^2"), e("x^(2)"));
}

#[test]
fn tan_total_derivative() {
    let d = e("tan(theta)").total_derivative();
    assert_eq!(d, e("dot(theta)/cos(theta)^2"));
}

#[test]
fn total_derivative_shifts_orders() {
    let d = e("x*dot(y) + l*y").total_derivative();
    assert_eq!(d, e("dot(x)*dot(y) + x*ddot(y) + l*dot(y)"));
}

#[test]
fn partial_of_quotient() {
    let f = e("x/cos(theta)^2");
    assert_eq!(f.partial(&jc("theta", 0)), e("2*x*sin(theta)/cos(theta)^3"));
    assert_eq!(f.partial(&jc("x", 0)), e("1/cos(theta)^2"));
}

#[test]
fn sqrt_normal_form() {
    let r = e("sqrt(1 + x^2)");
    assert_eq!(&r * &r, e("1 + x^2"));
    let inv = r.inv().unwrap();
    assert!(inv.numer().atoms().iter().any(|a| a.is_head(Head::Sqrt)));
    assert!(inv.denom_factors().iter().all(|(f, _)| f.atoms().iter().all(|a| !a.is_head(Head::Sqrt))));
}

#[test]
fn trig_of_atan() {
    assert_eq!(e("tan(atan(x))"), e("x"));
    let s = e("sin(atan(x))");
    let c = e("cos(atan(x))");
    assert!((&(&s * &s) + &(&c * &c) - Expr::one()).is_zero());
}

#[test]
fn odd_and_even_symmetry() {
    assert_eq!(e("sin(-x)"), e("-sin(x)"));
    assert_eq!(e("cos(-x)"), e("cos(x)"));
    assert_eq!(e("atan(-x)"), e("-atan(x)"));
}

#[test]
fn substitution_rejects_cycles() {
    let err = Substitution::new([(jc("x", 0), e("y + 1")), (jc("y", 0), e("x"))]).unwrap_err();
    assert!(matches!(err, ExprError::CyclicSubstitution(_)));
    let ok = Substitution::new([(jc("x", 0), e("y + 1")), (jc("y", 0), e("z^2")), (jc("z", 0), e("z"))]).unwrap();
    assert_eq!(ok.apply(&e("x*z")).unwrap(), e("z^3 + z"));
}

#[test]
fn substitution_inside_functions() {
    let f = e("sin(theta)*dot(x)");
    let g = f.subs(&jc("theta", 0), &e("atan(y)")).unwrap();
    let s = e("y/sqrt(1 + y^2)");
    assert!((&g - &(&s * &e("dot(x)"))).is_zero());
}

#[test]
fn zero_test_statuses() {
    let mut ledger = AssumptionLedger::new();
    assert_eq!(is_zero(&Expr::zero(), &ledger), ZeroStatus::Zero);
    assert_eq!(is_zero(&e("x - y"), &ledger), ZeroStatus::NonZero);
    let tricky = e("sqrt(x^2 + 1)*exp(y)");
    assert_eq!(is_zero(&tricky, &ledger), ZeroStatus::NonZero);
    let scaled = e("1e-12*exp(x)");
    assert_eq!(is_zero(&scaled, &ledger), ZeroStatus::Unknown);
    ledger.assume_nonzero(&scaled);
    assert_eq!(is_zero(&scaled, &ledger), ZeroStatus::NonZero);
}

#[test]
fn numeric_evaluation() {
    let mut pt = NumericPoint::new();
    pt.set(jc("x", 0), 0.5).set(jc("theta", 0), 0.3).set_param("l", 2.0);
    let v = e("l*x/cos(theta)^2").eval(&pt).unwrap();
    assert!((v - 2.0 * 0.5 / 0.3f64.cos().powi(2)).abs() < 1e-12);
    assert!(matches!(e("ln(x - 1)").eval(&pt), Err(ExprError::Domain(_))));
    assert!(matches!(e("y").eval(&pt), Err(ExprError::MissingValue(_))));
}

#[test]
fn parse_errors_have_positions() {
    match parse_expr("x + * y", &ExprContext::default()) {
        Err(ExprError::Parse { span, .. }) => assert_eq!((span.line, span.col), (1, 5)),
        other => panic!("{:?}", other),
    }
    assert!(parse_expr("foo(x)", &ExprContext::default()).is_err());
    assert!(parse_expr("dot(l)", &ExprContext::with_params(["l"])).is_err());
}

#[test]
fn antiderivatives() {
    let th = jc("theta", 0);
    let x = jc("x", 0);
    assert_eq!(antiderivative(&e("-sin(theta)/cos(theta)"), &x).unwrap(), e("-x*sin(theta)/cos(theta)"));
    let r = antiderivative(&e("x/cos(theta)^2"), &th).unwrap();
    assert_eq!(r, e("x*sin(theta)/cos(theta)"));
    let r = antiderivative(&e("a*sin(theta)"), &th).unwrap();
    assert_eq!(r, e("-a*cos(theta)"));
    for s in ["theta*cos(theta)", "theta^2*sin(theta)", "cos(theta)^4", "1/cos(theta)^4", "x^3 + 2*x"] {
        let f = e(s);
        let v = if s.contains("theta") { &th } else { &x };
        let r = antiderivative(&f, v).unwrap();
        assert!((&r.partial(v) - &f).is_zero(), "{}", s);
    }
    assert!(antiderivative(&e("exp(theta^2)"), &th).is_err());
}

fn arb_expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        (-3i64..4).prop_map(Expr::int),
        Just(e("x")),
        Just(e("dot(x)")),
        Just(e("theta")),
        Just(e("l")),
        Just(e("sin(theta)")),
        Just(e("cos(theta)")),
    ];
    leaf.prop_recursive(3, 12, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| &a + &b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| &a * &b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| &a - &b),
            (inner.clone(), inner).prop_map(|(a, b)| match b.inv() {
                Some(i) if b.zero_status(&AssumptionLedger::new()) == ZeroStatus::NonZero => &a * &i,
                _ => a,
            }),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn print_parse_identity(a in arb_expr()) {
        prop_assert_eq!(e(&a.to_string()), a);
    }

    #[test]
    fn leibniz_rule(a in arb_expr(), b in arb_expr()) {
        let lhs = (&a * &b).total_derivative();
        let rhs = &(&a.total_derivative() * &b) + &(&a * &b.total_derivative());
        prop_assert!((&lhs - &rhs).is_zero());
    }

    #[test]
    fn field_axioms(a in arb_expr(), b in arb_expr()) {
        prop_assert!((&(&a + &b) - &(&b + &a)).is_zero());
        prop_assert!((&(&(&a * &b) - &(&b * &a))).is_zero());
        if let Some(i) = b.inv() {
            prop_assert!((&(&(&a * &b) * &i) - &a).is_zero());
        }
    }

    #[test]
    fn numeric_matches_symbolic_sum(a in arb_expr(), b in arb_expr(), xv in -1.0f64..1.0, tv in -1.0f64..1.0) {
        let mut pt = NumericPoint::new();
        pt.set(jc("x", 0), xv).set(jc("x", 1), 0.7).set(jc("theta", 0), tv).set_param("l", 1.3);
        if let (Ok(va), Ok(vb), Ok(vs)) = (a.eval(&pt), b.eval(&pt), (&a + &b).eval(&pt)) {
            prop_assert!((va + vb - vs).abs() <= 1e-6 * (1.0 + va.abs() + vb.abs()));
        }
    }
}
