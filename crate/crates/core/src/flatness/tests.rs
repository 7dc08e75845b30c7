use super::*;
use crate::jet_forms::{DiffForm, JetMap};
use crate::ore::OrePoly;
use crate::poly_matrix::OreMatrix;
use crate::symexpr::{parse_expr, AssumptionLedger, Expr, ExprContext, JetCoordinate, Sym};

fn ctx() -> ExprContext {
    ExprContext::with_params(["a", "l"])
}

fn ex(s: &str) -> Expr {
    parse_expr(s, &ctx()).unwrap()
}

fn form(s: &str) -> DiffForm {
    DiffForm::parse(s, &ctx()).unwrap()
}

fn explicit(name: &str, states: &[&str], inputs: &[&str], eqs: &[&str]) -> ExplicitSystem {
    ExplicitSystem {
        name: name.into(),
        states: states.iter().map(|s| Sym::new(s)).collect(),
        inputs: inputs.iter().map(|s| Sym::new(s)).collect(),
        params: Vec::new(),
        equations: eqs.iter().map(|e| ex(e)).collect(),
        ledger: AssumptionLedger::new(),
    }
}

fn implicit(name: &str, states: &[&str], m: usize, eqs: &[&str]) -> ImplicitSystem {
    ImplicitSystem::new(name, states, m, eqs.iter().map(|e| ex(e)).collect())
}

fn car() -> ImplicitSystem {
    implicitize(&explicit(
        "car",
        &["x", "y", "theta"],
        &["u", "phi"],
        &["dot(x) - u*cos(theta)", "dot(y) - u*sin(theta)", "dot(theta) - u/l*sin(phi)/cos(phi)"],
    ))
    .unwrap()
}

fn pendulum() -> ImplicitSystem {
    implicit(
        "pendulum",
        &["x", "z", "theta"],
        2,
        &["ddot(x)*cos(theta) - (ddot(z) + 1)*sin(theta) + a*ddot(theta)"],
    )
}

fn chain(extra: &str) -> ImplicitSystem {
    implicitize(&explicit(
        "chain",
        &["x1", "x2", "x3"],
        &["u"],
        &[&format!("dot(x1) - x2{extra}"), "dot(x2) - x3", "dot(x3) - u"],
    ))
    .unwrap()
}

fn run(sys: &ImplicitSystem, seed: u32) -> FlatnessCertificate {
    let cfg = PipelineConfig {
        pivot_seed: seed,
        ..Default::default()
    };
    flatness_pipeline(sys, &cfg).unwrap()
}

#[test]
fn implicitized_car() {
    let sys = car();
    assert_eq!(sys.m, 2);
    assert_eq!(sys.equations, vec![ex("dot(x)*sin(theta) - dot(y)*cos(theta)")]);
    assert!(sys.ledger.contains(&ex("cos(theta)")));
    let p = variational_matrix(&sys);
    assert_eq!(p.get(0, 0), &OrePoly::parse("sin(theta)*D", &ctx()).unwrap());
    assert_eq!(p.get(0, 2), &OrePoly::scalar(ex("dot(x)*cos(theta) + dot(y)*sin(theta)")));
}

#[test]
fn elimination_needs_an_affine_input() {
    let sys = explicit("sq", &["x"], &["u"], &["dot(x) - u^2"]);
    assert_eq!(implicitize(&sys).unwrap_err(), FlatnessError::ManualEliminationRequired("u".into()));
}

#[test]
fn manifold_restriction() {
    let sys = car();
    let mut ledger = sys.ledger.clone();
    let x0 = X0::new(&sys, &mut ledger).unwrap();
    assert_eq!(x0.pivots().collect::<Vec<_>>(), vec![JetCoordinate::new("y", 1)]);
    assert_eq!(x0.value(&JetCoordinate::new("y", 1)).unwrap(), ex("dot(x)*sin(theta)/cos(theta)"));
    let ddy = x0.value(&JetCoordinate::new("y", 2)).unwrap();
    assert!(!x0.is_dependent(&JetCoordinate::new("x", 2)));
    assert_eq!(ddy, ex("ddot(x)*sin(theta)/cos(theta) + dot(x)*dot(theta)/cos(theta)^2"));
    let f = DiffForm::d_of(&sys.equations[0]);
    assert!(x0.restrict_form(&f).unwrap().is_zero());
    assert_eq!(x0.independent(1).len(), 5);
}

#[test]
fn order_reduction() {
    let r = reduce_order(&pendulum());
    assert_eq!(r.n(), 6);
    assert_eq!(r.equations.len(), 4);
    assert_eq!(r.orders(), vec![1; 6]);
    assert!(r.check_shape().is_ok());
}

#[test]
fn car_default_pivots() {
    let c = run(&car(), 0);
    assert_eq!(c.verdict, Verdict::Flat);
    assert_eq!(c.flat_output, vec![ex("y"), ex("x")]);
    assert_eq!(c.check, Some(CertificateCheck::Valid));
    let phi = c.trivialization.unwrap();
    assert_eq!(phi.component(&Sym::new("theta"), 0).unwrap(), Expr::atan(&ex("dot(y1)/dot(y2)")));
}

#[test]
fn car_seeded_certificate() {
    let c = run(&car(), 1);
    assert_eq!(c.verdict, Verdict::Flat);
    assert_eq!(c.flat_output_text(), vec!["y - x*tan(theta)", "theta"]);
    assert_eq!(c.omega, vec![form("-sin(theta)/cos(theta)*d[x] + d[y]"), form("d[theta]")]);
    let mu = c.mu.as_ref().unwrap();
    assert_eq!(mu.entry(0, 1), &[form("1/cos(theta)^2*d[x] + 2*x*sin(theta)/cos(theta)^3*d[theta]")]);
    assert!(mu.entry(0, 0).is_empty() && mu.entry(1, 0).is_empty() && mu.entry(1, 1).is_empty());
    let m = OreMatrix::from_scalars(vec![vec![Expr::one(), ex("-x/cos(theta)^2")], vec![Expr::zero(), Expr::one()]]);
    assert_eq!(c.m, Some(m.unwrap()));
    assert_eq!(c.check, Some(CertificateCheck::Valid));
    let phi = c.trivialization.as_ref().unwrap();
    assert_eq!(phi.component(&Sym::new("x"), 0).unwrap(), ex("-dot(y1)*cos(y2)^2/dot(y2)"));
    assert_eq!(c.sigma, vec![1, 1]);
    assert_eq!(c.static_linearizable, Some(false));
    let j = c.to_json();
    assert_eq!(j["verdict"], "Flat");
    assert_eq!(j["flat_output"][0], "y - x*tan(theta)");
    assert_eq!(j["N"], 2);
}

#[test]
fn pendulum_is_flat() {
    let c = run(&pendulum(), 0);
    assert_eq!(c.verdict, Verdict::Flat);
    assert_eq!(c.flat_output, vec![ex("z + a*cos(theta)"), ex("x + a*sin(theta)")]);
    assert!(c.mu.unwrap().is_zero());
    assert_eq!(c.sigma, vec![2, 2]);
    assert_eq!(c.static_linearizable, Some(false));
    assert!(c.check.unwrap().is_valid());
}

#[test]
fn reduced_pendulum_agrees() {
    let cfg = PipelineConfig {
        order_reduction: true,
        ..Default::default()
    };
    let c = flatness_pipeline(&pendulum(), &cfg).unwrap();
    assert_eq!(c.verdict, Verdict::Flat);
    assert_eq!(c.flat_output, vec![ex("z + a*cos(theta)"), ex("x + a*sin(theta)")]);
    assert!(c.m.unwrap().is_identity());
}

#[test]
fn torsion_is_not_flat() {
    let c = run(&implicit("torsion", &["x1", "x2"], 1, &["dot(x1) - x1"]), 0);
    assert_eq!(c.verdict, Verdict::NotFlat);
    match c.evidence {
        Some(NonFlatEvidence::Torsion(d)) => assert_eq!(d, vec!["D - 1".to_string()]),
        other => panic!("{other:?}"),
    }
}

#[test]
fn chain_is_linearizable() {
    let c = run(&chain(""), 0);
    assert_eq!(c.verdict, Verdict::Flat);
    assert_eq!(c.flat_output, vec![ex("x1")]);
    assert_eq!(c.sigma, vec![2]);
    assert_eq!(c.static_linearizable, Some(true));
}

#[test]
fn quadratic_chain_fails_frobenius() {
    let c = run(&chain(" - x3^2"), 0);
    assert_eq!(c.verdict, Verdict::NotFlat);
    let Some(NonFlatEvidence::Frobenius(t)) = c.evidence else {
        panic!("expected a Frobenius obstruction");
    };
    assert_eq!(t.degree(), Some(3));
}

#[test]
fn exact_forms_integrate() {
    let l = AssumptionLedger::new();
    let psi = integrate_exact(&form("-1/cos(theta)^2*d[x] - 2*x*sin(theta)/cos(theta)^3*d[theta]"), &l).unwrap();
    assert_eq!(psi, ex("-x/cos(theta)^2"));
    assert!(integrate_exact(&form("x*d[y]"), &l).is_err());
}

#[test]
fn wrong_trivialization_is_rejected() {
    let sys = car();
    let psi = vec![ex("y"), ex("x")];
    let phi = JetMap::new([("x", ex("y2")), ("y", ex("y1")), ("theta", ex("dot(y1)"))]);
    let names = vec![Sym::new("y1"), Sym::new("y2")];
    let check = verify_certificate(&sys, &psi, &phi, &names, 5, 7).unwrap();
    assert!(matches!(check, CertificateCheck::Invalid { .. }));
}

#[test]
fn linear_solutions() {
    let l = AssumptionLedger::new();
    let s = solve_linear(&[vec![ex("cos(theta)")]], &[ex("1")], &l).unwrap();
    assert_eq!(s.values, vec![ex("1/cos(theta)")]);
}
