use proptest::prelude::*;

use super::*;
use crate::ore::OrePoly;
use crate::poly_matrix::OreMatrix;
use crate::symexpr::{AssumptionLedger, Expr, ExprContext, JetCoordinate, ZeroStatus};

fn form(s: &str) -> DiffForm {
    DiffForm::parse(s, &ExprContext::default()).unwrap()
}

fn ex(s: &str) -> Expr {
    s.parse().unwrap()
}

fn vanishes(f: &DiffForm) -> bool {
    f.zero_status(&AssumptionLedger::new()) == ZeroStatus::Zero
}

fn same(a: &DiffForm, b: &DiffForm) -> bool {
    vanishes(&a.sub(b))
}

fn omega() -> Vec<DiffForm> {
    vec![form("-sin(theta)/cos(theta)*d[x] + d[y]"), form("d[theta]")]
}

fn car_mu(eta: &str) -> FormOperator {
    let mut mu = FormOperator::zero(2, 2, 1);
    mu.set(0, 1, vec![form(&format!("1/cos(theta)^2*d[x] + ({eta})*d[theta]"))]);
    mu
}

#[test]
fn wedge_signs() {
    assert!(form("d[x]^d[x]").is_zero());
    assert_eq!(form("d[theta]^d[x]"), form("d[x]^d[theta]").neg());
    let a = form("x*d[x] + d[y]");
    let b = form("d[theta]^d[y]");
    assert_eq!(a.wedge(&b), b.wedge(&a));
    let c = form("d[theta]");
    assert_eq!(a.wedge(&c), c.wedge(&a).neg());
}

#[test]
fn text_forms() {
    let w = omega();
    assert_eq!(form(&w[0].to_string()), w[0]);
    assert_eq!(form("d[theta]^d[x]").to_string(), "d[theta]^d[x]");
    assert_eq!(form("2*d[x]^d[y]").to_string(), "2*d[x]^d[y]");
    let j = form("x*d[y] + d[x]").to_json();
    assert_eq!(j["d[x]"], "1");
    assert_eq!(j["d[y]"], "x");
    assert!(DiffForm::parse("d[x]*d[y]", &ExprContext::default()).is_err());
}

#[test]
fn derivative_of_first_output_form() {
    let d = omega()[0].exterior_d();
    assert!(same(&d, &form("-1/cos(theta)^2*d[theta]^d[x]")));
    assert!(omega()[1].exterior_d().is_zero());
    assert!(form("d[dot(x)]").exterior_d().is_zero());
}

#[test]
fn car_equation_differential() {
    let f = ex("dot(x)*sin(theta) - dot(y)*cos(theta)");
    let df = DiffForm::d_of(&f);
    let want = form("sin(theta)*d[dot(x)] - cos(theta)*d[dot(y)] + (dot(x)*cos(theta) + dot(y)*sin(theta))*d[theta]");
    assert_eq!(df, want);
    assert!(df.exterior_d().is_zero());
}

#[test]
fn lie_derivative_basics() {
    assert_eq!(form("d[x]").lie(), form("d[dot(x)]"));
    assert_eq!(form("3*d[x]").lie(), form("3*d[dot(x)]"));
    let a = form("x*sin(theta)*d[y]");
    assert_eq!(a.lie().exterior_d(), a.exterior_d().lie());
}

#[test]
fn lie_binomial_expansion() {
    let phi = ex("y1*sin(y2) + dot(y1)^2");
    let j = 2;
    let direct = DiffForm::d_of(&phi).lie_n(j);
    let mut closed = DiffForm::zero();
    for c in phi.jets() {
        let a = phi.partial(&c);
        for r in 0..=j {
            let binom = [1, 2, 1][r];
            let coef = &Expr::int(binom) * &a.total_derivative_n(r as u32);
            closed = closed.add(&DiffForm::term(coef, vec![c.shifted((j - r) as u32)]));
        }
    }
    assert!(same(&direct, &closed));
    assert!(same(&direct, &DiffForm::d_of(&phi.total_derivative_n(2))));
}

#[test]
fn pullback_identity_and_car_trivialization() {
    let a = form("x*d[y]^d[theta] + sin(theta)*d[dot(x)]");
    assert_eq!(JetMap::identity().pullback(&a).unwrap(), a);

    let x = ex("-dot(y1)*cos(y2)^2/dot(y2)");
    let y = ex("y1 - dot(y1)*sin(y2)*cos(y2)/dot(y2)");
    let phi = JetMap::new([("x", x), ("y", y), ("theta", ex("y2"))]);
    let df = DiffForm::d_of(&ex("dot(x)*sin(theta) - dot(y)*cos(theta)"));
    assert!(vanishes(&phi.pullback(&df).unwrap()));
}

#[test]
fn pullback_commutes_with_d_and_wedge() {
    let phi = JetMap::new([("x", ex("y1*dot(y2)")), ("theta", ex("y2 + y1^2"))]);
    let a = form("x*d[theta] + sin(theta)*d[x]");
    let b = form("cos(theta)*d[dot(x)]");
    let pa = phi.pullback(&a).unwrap();
    assert!(same(&phi.pullback(&a.exterior_d()).unwrap(), &pa.exterior_d()));
    let pb = phi.pullback(&b).unwrap();
    assert!(same(&phi.pullback(&a.wedge(&b)).unwrap(), &pa.wedge(&pb)));
}

#[test]
fn window_refuses_high_orders() {
    let w = JetWindow::new(1);
    let a = form("d[dot(x)]");
    assert!(w.check_form(&a).is_ok());
    assert!(matches!(w.lie(&a), Err(JetError::WindowExceeded { .. })));
}

#[test]
fn dgoth_of_matrices() {
    let w = omega();
    let zero = dgoth_matrix(&OreMatrix::identity(2), &w).unwrap();
    assert!(zero.iter().all(|f| f.is_zero()));

    let f = ex("x*sin(theta)");
    let h = OreMatrix::from_scalars(vec![vec![f.clone(), Expr::zero()], vec![Expr::zero(), f.clone()]]).unwrap();
    let got = dgoth_matrix(&h, &w).unwrap();
    let df = DiffForm::d_of(&f);
    assert!(same(&got[0], &df.wedge(&w[0])));
    assert!(same(&got[1], &df.wedge(&w[1])));
    let via_op = dgoth_matrix_operator(&h).apply(&w).unwrap();
    assert!(same(&via_op[0], &got[0]) && same(&via_op[1], &got[1]));
}

#[test]
fn car_certificate_identities() {
    let w = omega();
    let m = OreMatrix::from_scalars(vec![
        vec![Expr::one(), ex("-x/cos(theta)^2")],
        vec![Expr::zero(), Expr::one()],
    ])
    .unwrap();
    let mu = car_mu("2*x*sin(theta)/cos(theta)^3");
    // d(omega) = mu omega
    let mw = mu.apply(&w).unwrap();
    for (a, b) in w.iter().zip(&mw) {
        assert!(same(&a.exterior_d(), b));
    }
    assert!(mu.dgoth().is_zero() || mu.dgoth().zero_status(&AssumptionLedger::new()) == ZeroStatus::Zero);
    assert!(mu.compose(&mu).unwrap().is_zero());
    // dgoth(M) omega = -M mu omega
    let lhs = dgoth_matrix(&m, &w).unwrap();
    let rhs = FormOperator::from_matrix(&m).compose(&mu).unwrap().neg().apply(&w).unwrap();
    for (a, b) in lhs.iter().zip(&rhs) {
        assert!(same(a, b));
    }
    // the opposite sign of eta is not closed
    let bad = car_mu("-2*x*sin(theta)/cos(theta)^3");
    assert_eq!(bad.dgoth().zero_status(&AssumptionLedger::new()), ZeroStatus::NonZero);
}

#[test]
fn mu_from_unimodular_satisfies_structure_equation() {
    // H = T(p) with a first-order entry
    let p = OrePoly::parse("x*D + sin(theta)", &ExprContext::default()).unwrap();
    let mut h = OreMatrix::identity(2);
    h.set(0, 1, p.clone());
    let mut hinv = OreMatrix::identity(2);
    hinv.set(0, 1, p.neg());
    let dh = dgoth_matrix_operator(&h);
    let mu = FormOperator::from_matrix(&hinv).compose(&dh).unwrap().neg();
    let lhs = mu.dgoth();
    let rhs = mu.compose(&mu).unwrap();
    assert_eq!(lhs.sub(&rhs).unwrap().zero_status(&AssumptionLedger::new()), ZeroStatus::Zero);
}

#[test]
fn dgoth_entrywise_matches_definition() {
    let mut mu = FormOperator::zero(1, 2, 1);
    mu.set(0, 0, vec![form("x*d[y]"), form("d[theta]")]);
    mu.set(0, 1, vec![DiffForm::zero(), DiffForm::zero(), form("sin(theta)*d[x]")]);
    let kappa = vec![form("y*d[x]"), form("theta*d[y]")];
    let a = mu.dgoth().apply(&kappa).unwrap();
    let b = dgoth_apply(&mu, &kappa).unwrap();
    assert!(same(&a[0], &b[0]));
    assert!(mu.dgoth().dgoth().is_zero());
}

fn arb_coef() -> impl Strategy<Value = Expr> {
    prop_oneof![
        (-3i64..4).prop_map(Expr::int),
        Just(ex("x")),
        Just(ex("dot(x)")),
        Just(ex("sin(theta)")),
        Just(ex("x*y + 1")),
        Just(ex("cos(theta)*dot(y)")),
    ]
}

fn arb_coord() -> impl Strategy<Value = JetCoordinate> {
    (prop_oneof![Just("x"), Just("y"), Just("theta")], 0u32..2).prop_map(|(v, k)| JetCoordinate::new(v, k))
}

fn arb_form(deg: usize) -> impl Strategy<Value = DiffForm> {
    prop::collection::vec((arb_coef(), prop::collection::vec(arb_coord(), deg)), 1..4).prop_map(|ts| {
        let mut f = DiffForm::zero();
        for (c, b) in ts {
            f = f.add(&DiffForm::term(c, b));
        }
        f
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn d_squared_vanishes(a in (0usize..3).prop_flat_map(arb_form)) {
        prop_assert!(a.exterior_d().exterior_d().is_zero());
    }

    #[test]
    fn graded_commutativity(a in arb_form(1), b in arb_form(2)) {
        prop_assert_eq!(a.wedge(&b), b.wedge(&a));
        prop_assert_eq!(a.wedge(&a), DiffForm::zero());
    }

    #[test]
    fn lie_commutes_with_d(a in arb_form(1)) {
        prop_assert!(same(&a.lie().exterior_d(), &a.exterior_d().lie()));
    }

    #[test]
    fn leibniz_for_d(f in arb_coef(), a in arb_form(1)) {
        let lhs = a.scale(&f).exterior_d();
        let rhs = DiffForm::d_of(&f).wedge(&a).add(&a.exterior_d().scale(&f));
        prop_assert!(same(&lhs, &rhs));
    }
}
