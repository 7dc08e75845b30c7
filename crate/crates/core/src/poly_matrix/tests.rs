use super::*;
use crate::ore::OrePoly;
use crate::symexpr::{Expr, ExprContext};

fn mat(src: &str) -> OreMatrix {
    OreMatrix::parse(src).unwrap()
}

fn car() -> OreMatrix {
    mat("sin(theta)*D; -cos(theta)*D; dot(x)*cos(theta) + dot(y)*sin(theta)")
}

fn pendulum() -> OreMatrix {
    mat("params a\ncos(theta)*D^2; -sin(theta)*D^2; a*D^2 - ddot(x)*sin(theta) - (ddot(z) + 1)*cos(theta)")
}

fn seeded(n: u32) -> SmithOptions {
    SmithOptions {
        pivot_seed: n,
        ..Default::default()
    }
}

fn check_shape(a: &OreMatrix, r: &SmithResult) {
    assert!(r.verify(a), "V A U differs from reduced form");
    for i in 0..r.reduced.rows() {
        for j in 0..r.reduced.cols() {
            if i != j {
                assert!(r.reduced.get(i, j).is_zero(), "off-diagonal ({i},{j}) = {}", r.reduced.get(i, j));
            }
        }
    }
    assert!(r.u.is_consistent() && r.v.is_consistent());
    let ui = unimodular_inverse(&r.u);
    assert!(r.u.matrix().mul(&ui).unwrap().is_identity());
    let vi = unimodular_inverse(&r.v);
    assert!(vi.mul(r.v.matrix()).unwrap().is_identity());
}

#[test]
fn text_round_trip() {
    let a = car();
    let again = mat(&a.to_string());
    assert_eq!(a, again);
    assert_eq!(a.rows(), 1);
    assert_eq!(a.cols(), 3);
    assert!(OreMatrix::parse("D; 1\nD").is_err());
}

#[test]
fn product_and_apply() {
    let a = mat("D; 1\n0; D");
    let b = mat("x; 0\n0; 1");
    let ab = a.mul(&b).unwrap();
    assert_eq!(ab, mat("x*D + dot(x); 1\n0; D"));
    let v = ab.apply(&[Expr::var("y"), Expr::int(0)]).unwrap();
    assert_eq!(v[0], "x*dot(y) + dot(x)*y".parse().unwrap());
    assert!(a.mul(&mat("1; 2; 3")).is_err());
}

#[test]
fn swap_expansion_is_a_swap() {
    let n = 3;
    let swap = Elementary::Swap { i: 0, j: 2 }.matrix(n);
    let expanded = Unimodular::from_factors(n, Elementary::swap_expansion(0, 2));
    assert_eq!(expanded.matrix(), &swap);
}

#[test]
fn elementary_inverses() {
    let ops = [
        Elementary::AddMultiple {
            i: 0,
            j: 1,
            p: OrePoly::parse("x*D + 1", &ExprContext::default()).unwrap(),
        },
        Elementary::Scale { i: 1, u: Expr::var("x") },
        Elementary::Swap { i: 0, j: 1 },
    ];
    for op in ops {
        let m = op.matrix(2).mul(&op.inverse().matrix(2)).unwrap();
        assert!(m.is_identity(), "{op:?}");
    }
}

#[test]
fn simple_row() {
    let a = mat("D; 1");
    let r = smith_decompose(&a, &SmithOptions::default()).unwrap();
    check_shape(&a, &r);
    assert!(r.is_hyper_regular());
    assert_eq!(r.u.matrix(), &mat("0; 1\n1; -D"));
}

#[test]
fn car_default() {
    let a = car();
    let r = right_smith_basis(&a, &SmithOptions::default()).unwrap();
    check_shape(&a, &r);
    let e = "(dot(x)*cos(theta) + dot(y)*sin(theta))";
    let want = mat(&format!("0; 0; 1\n0; 1; 0\n1/{e}; cos(theta)/{e}*D; -sin(theta)/{e}*D"));
    assert_eq!(r.u.matrix(), &want);

    let uhat = r.u.matrix().columns(1..3);
    let l = left_smith_basis(&uhat, &SmithOptions::default()).unwrap();
    check_shape(&uhat, &l);
    let q = mat(&format!("0; 1; 0\n1; 0; 0\nsin(theta)/{e}*D; -cos(theta)/{e}*D; 1"));
    assert_eq!(l.v.matrix(), &q);
}

#[test]
fn car_seeded() {
    let a = car();
    let r = right_smith_basis(&a, &seeded(1)).unwrap();
    check_shape(&a, &r);
    let uhat = r.u.matrix().columns(1..3);
    let l = left_smith_basis(&uhat, &SmithOptions::default()).unwrap();
    check_shape(&uhat, &l);
    let q = l.v.matrix();
    assert_eq!(q.row_block(0..2), mat("-sin(theta)/cos(theta); 1; 0\n0; 0; 1"));
}

#[test]
fn pendulum_decomposition() {
    let a = pendulum();
    let r = right_smith_basis(&a, &SmithOptions::default()).unwrap();
    check_shape(&a, &r);
    let e = "(a*dot(theta)^2 - ddot(x)*sin(theta) - (ddot(z) + 1)*cos(theta))";
    let col0 = mat(&format!("params a\n-a*cos(theta)/{e}\na*sin(theta)/{e}\n1/{e}"));
    assert_eq!(r.u.matrix().columns(0..1), col0);

    let uhat = r.u.matrix().columns(1..3);
    let l = left_smith_basis(&uhat, &SmithOptions::default()).unwrap();
    check_shape(&uhat, &l);
    assert_eq!(l.v.matrix().row_block(0..2), mat("params a\n0; 1; -a*sin(theta)\n1; 0; a*cos(theta)"));
}

#[test]
fn torsion_is_not_hyper_regular() {
    let a = mat("D - 1; 0");
    let r = smith_decompose(&a, &SmithOptions::default()).unwrap();
    check_shape(&a, &r);
    assert_eq!(r.delta.len(), 1);
    assert_eq!(r.delta[0].to_string(), "D - 1");
    assert!(!r.is_hyper_regular());
    assert!(matches!(right_smith_basis(&a, &SmithOptions::default()), Err(MatrixError::NotHyperRegular(_))));
    let j = r.to_json();
    assert_eq!(j["hyper_regular"], false);
    assert_eq!(j["delta"][0], "D - 1");
}

#[test]
fn tall_and_square() {
    let a = mat("D; x\n1; D\nx; 0");
    let r = smith_decompose(&a, &SmithOptions::default()).unwrap();
    check_shape(&a, &r);
    let sq = mat("D; 1\n1; D");
    let r = smith_decompose(&sq, &SmithOptions::default()).unwrap();
    check_shape(&sq, &r);
    assert_eq!(r.delta[0], OrePoly::one());
    assert_eq!(r.delta[1].degree(), Some(2));
}

#[test]
fn zero_matrix() {
    let a = OreMatrix::zeros(2, 3);
    let r = smith_decompose(&a, &SmithOptions::default()).unwrap();
    assert!(r.delta.iter().all(|d| d.is_zero()));
    assert!(!r.is_hyper_regular());
}

fn structured() -> SmithOptions {
    SmithOptions {
        structured: true,
        ..Default::default()
    }
}

#[test]
fn structured_pivots_on_scalars() {
    let a = mat("x*D^2 + D; D; 2");
    let r = smith_decompose(&a, &structured()).unwrap();
    check_shape(&a, &r);
    assert!(r.is_hyper_regular());
    let first = &r.right_actions[0].op;
    assert!(matches!(first, Elementary::AddMultiple { i: 2, .. }), "{first:?}");
}

#[test]
fn structured_clears_multiple_lines() {
    // the second row is D times the first
    let a = mat("x; D\nx*D + dot(x); D^2");
    let r = smith_decompose(&a, &structured()).unwrap();
    check_shape(&a, &r);
    assert!(matches!(&r.left_actions[0].op, Elementary::AddMultiple { i: 1, j: 0, .. }));
    assert_eq!(r.delta[1], OrePoly::zero());
}

#[test]
fn structured_agrees_on_the_examples() {
    for a in [car(), pendulum()] {
        let r = smith_decompose(&a, &structured()).unwrap();
        check_shape(&a, &r);
        assert!(r.is_hyper_regular());
    }
}

#[test]
fn swelling_reduction_fails_fast() {
    let a = mat("(cos(theta)/(sin(theta) + 2))*D + 1; sin(theta)*D^2 + sin(theta)*D; 0");
    let start = std::time::Instant::now();
    let r = smith_decompose(&a, &SmithOptions::default());
    assert!(matches!(r, Err(MatrixError::ExpressionGrowth(_))), "{r:?}");
    assert!(start.elapsed().as_secs() < 5);
}
