//! Closed-form solution of one scalar equation for one coordinate.

use crate::symexpr::{is_zero, Atom, AssumptionLedger, Expr, Head, JetCoordinate, Poly, ZeroStatus};

#[derive(Clone, Debug, PartialEq)]
pub struct Solved {
    pub value: Expr,
    /// The coefficient divided by; it must stay nonzero.
    pub pivot: Expr,
    /// Whether the solution went through `atan`.
    pub angular: bool,
}

fn mentions(a: &Atom, v: &JetCoordinate) -> bool {
    Expr::atom(a.clone()).jets().iter().any(|c| c.var == v.var)
}

/// Solve `e = 0` for `v`, either because `e` is affine in `v` or because it is
/// `A sin(v) + B cos(v)` with `A`, `B` free of `v`. No other jet of the same
/// variable may appear.
pub fn solve_for(e: &Expr, v: &JetCoordinate, ledger: &AssumptionLedger) -> Option<Solved> {
    if e.jets().iter().any(|c| c.var == v.var && c.order != v.order) {
        return None;
    }
    let va = Atom::jet(v);
    let s = Atom::func(Head::Sin, Expr::jet(v));
    let c = Atom::func(Head::Cos, Expr::jet(v));
    let num = e.numer();
    let atoms = num.atoms();
    if !atoms.iter().any(|a| mentions(a, v)) {
        return None;
    }
    let den_ok = |allow_trig: bool| {
        e.denom_factors().iter().all(|(f, _)| {
            f.atoms().iter().all(|a| !mentions(a, v) || (allow_trig && (*a == s || *a == c) && f.len() == 1))
        })
    };
    let affine = atoms.iter().all(|a| *a == va || !mentions(a, v)) && num.degree_in(&va) == 1;
    if affine && den_ok(false) {
        let parts = num.coefficients_in(&va);
        let a = Expr::from_poly(parts.get(&1).cloned().unwrap_or_default());
        let b = Expr::from_poly(parts.get(&0).cloned().unwrap_or_default());
        if is_zero(&a, ledger) != ZeroStatus::NonZero {
            return None;
        }
        return Some(Solved {
            value: (&b / &a).neg(),
            pivot: a,
            angular: false,
        });
    }
    let trig = atoms.iter().all(|a| *a == s || *a == c || !mentions(a, v));
    if trig && den_ok(true) {
        let mut pa = Poly::zero();
        let mut pb = Poly::zero();
        for (m, k) in num.terms() {
            let (es, ec) = (m.exponent(&s), m.exponent(&c));
            let rest = Poly::term(k.clone(), m.with_exponent(&s, 0).with_exponent(&c, 0));
            match (es, ec) {
                (1, 0) => pa = pa.add(&rest),
                (0, 1) => pb = pb.add(&rest),
                _ => return None,
            }
        }
        let a = Expr::from_poly(pa);
        let b = Expr::from_poly(pb);
        if is_zero(&a, ledger) != ZeroStatus::NonZero {
            return None;
        }
        return Some(Solved {
            value: Expr::atan(&(&b / &a).neg()),
            pivot: a,
            angular: true,
        });
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ex(s: &str) -> Expr {
        s.parse().unwrap()
    }

    #[test]
    fn affine_and_angular() {
        let l = AssumptionLedger::new();
        let s = solve_for(&ex("dot(x) - u*cos(theta)"), &JetCoordinate::base("u"), &l).unwrap();
        assert_eq!(s.value, ex("dot(x)/cos(theta)"));
        let t = solve_for(&ex("dot(x)*sin(theta) - dot(y)*cos(theta)"), &JetCoordinate::base("theta"), &l).unwrap();
        assert!(t.angular);
        assert_eq!(t.value, Expr::atan(&ex("dot(y)/dot(x)")));
        assert!(solve_for(&ex("u^2 - x"), &JetCoordinate::base("u"), &l).is_none());
        assert!(solve_for(&ex("dot(x) - x"), &JetCoordinate::base("x"), &l).is_none());
    }
}
