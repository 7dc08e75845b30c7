//! Skew polynomials `sum_k a_k D^k` over the expression field, with
//! `D a = a D + L(a)`.

use std::fmt;

use thiserror::Error;

use crate::symexpr::parse::{eval_recip, eval_scalar, lex, Ast, AstKind, Parser};
use crate::symexpr::{is_zero, AssumptionLedger, Expr, ExprContext, ExprError, ZeroStatus};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OreError {
    #[error("cannot decide whether leading coefficient `{0}` vanishes")]
    InconclusiveCoefficient(String),
    #[error("division by the zero operator")]
    DivisionByZero,
    #[error("division step of size {0} exceeds the growth bound")]
    Growth(usize),
    #[error(transparent)]
    Expr(#[from] ExprError),
}

/// Coefficients sit to the left of the powers of `D`.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct OrePoly {
    coeffs: Vec<Expr>,
}

fn binomial(n: usize, k: usize) -> i64 {
    let mut r: i64 = 1;
    for i in 0..k {
        r = r * (n - i) as i64 / (i + 1) as i64;
    }
    r
}

impl OrePoly {
    pub fn from_coeffs(mut coeffs: Vec<Expr>) -> Self {
        while coeffs.last().map_or(false, |c| c.is_zero()) {
            coeffs.pop();
        }
        OrePoly { coeffs }
    }

    pub fn zero() -> Self {
        OrePoly { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::scalar(Expr::one())
    }

    /// The derivation `D = d/dt`.
    pub fn d() -> Self {
        Self::from_coeffs(vec![Expr::zero(), Expr::one()])
    }

    pub fn d_pow(k: usize) -> Self {
        let mut c = vec![Expr::zero(); k];
        c.push(Expr::one());
        Self::from_coeffs(c)
    }

    pub fn scalar(e: Expr) -> Self {
        Self::from_coeffs(vec![e])
    }

    pub fn monomial(e: Expr, k: usize) -> Self {
        let mut c = vec![Expr::zero(); k];
        c.push(e);
        Self::from_coeffs(c)
    }

    pub fn int(n: i64) -> Self {
        Self::scalar(Expr::int(n))
    }

    pub fn coeffs(&self) -> &[Expr] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> Expr {
        self.coeffs.get(k).cloned().unwrap_or_else(Expr::zero)
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0].is_one()
    }

    /// Degree zero and nonzero: invertible in the ring.
    pub fn is_unit(&self) -> bool {
        self.coeffs.len() == 1
    }

    pub fn as_scalar(&self) -> Option<Expr> {
        match self.coeffs.len() {
            0 => Some(Expr::zero()),
            1 => Some(self.coeffs[0].clone()),
            _ => None,
        }
    }

    pub fn leading(&self) -> Option<&Expr> {
        self.coeffs.last()
    }

    pub fn size(&self) -> usize {
        self.coeffs.iter().map(|c| c.size()).sum()
    }

    pub fn add(&self, other: &OrePoly) -> OrePoly {
        let n = self.coeffs.len().max(other.coeffs.len());
        OrePoly::from_coeffs((0..n).map(|k| &self.coeff(k) + &other.coeff(k)).collect())
    }

    pub fn neg(&self) -> OrePoly {
        OrePoly {
            coeffs: self.coeffs.iter().map(|c| c.neg()).collect(),
        }
    }

    pub fn sub(&self, other: &OrePoly) -> OrePoly {
        self.add(&other.neg())
    }

    /// `e * self`.
    pub fn scale_left(&self, e: &Expr) -> OrePoly {
        OrePoly::from_coeffs(self.coeffs.iter().map(|c| e * c).collect())
    }

    pub fn mul(&self, other: &OrePoly) -> OrePoly {
        if self.is_zero() || other.is_zero() {
            return OrePoly::zero();
        }
        if let Some(e) = self.as_scalar() {
            return other.scale_left(&e);
        }
        let di = self.coeffs.len() - 1;
        let dj = other.coeffs.len() - 1;
        let mut out = vec![Expr::zero(); di + dj + 1];
        // derivs[j][k] = L^k(b_j)
        let derivs: Vec<Vec<Expr>> = other
            .coeffs
            .iter()
            .map(|b| {
                let mut v = vec![b.clone()];
                for _ in 0..di {
                    let next = v.last().unwrap().total_derivative();
                    v.push(next);
                }
                v
            })
            .collect();
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, dv) in derivs.iter().enumerate() {
                for (k, bk) in dv.iter().enumerate().take(i + 1) {
                    if bk.is_zero() {
                        continue;
                    }
                    let c = binomial(i, k);
                    let t = &(a * bk) * &Expr::int(c);
                    let slot = &mut out[i - k + j];
                    *slot = &*slot + &t;
                }
            }
        }
        OrePoly::from_coeffs(out)
    }

    /// `sum_k a_k L^k(e)`.
    pub fn apply(&self, e: &Expr) -> Expr {
        let mut acc = Expr::zero();
        let mut cur = e.clone();
        for (k, a) in self.coeffs.iter().enumerate() {
            if k > 0 {
                cur = cur.total_derivative();
            }
            if !a.is_zero() {
                acc = &acc + &(a * &cur);
            }
        }
        acc
    }

    /// Apply `L` to every coefficient; `D p - p D = L(p)` as operators.
    pub fn total_derivative(&self) -> OrePoly {
        OrePoly::from_coeffs(self.coeffs.iter().map(|c| c.total_derivative()).collect())
    }

    fn check_leading(b: &OrePoly, ledger: &AssumptionLedger) -> Result<Expr, OreError> {
        let beta = b.leading().ok_or(OreError::DivisionByZero)?.clone();
        match is_zero(&beta, ledger) {
            ZeroStatus::NonZero => Ok(beta),
            ZeroStatus::Zero => Err(OreError::DivisionByZero),
            ZeroStatus::Unknown => Err(OreError::InconclusiveCoefficient(beta.to_string())),
        }
    }

    /// `a = b q + r` with `deg r < deg b`.
    pub fn right_divide(a: &OrePoly, b: &OrePoly, ledger: &AssumptionLedger) -> Result<(OrePoly, OrePoly), OreError> {
        Self::divide(a, b, ledger, false, None)
    }

    /// `a = q b + r` with `deg r < deg b`.
    pub fn left_divide(a: &OrePoly, b: &OrePoly, ledger: &AssumptionLedger) -> Result<(OrePoly, OrePoly), OreError> {
        Self::divide(a, b, ledger, true, None)
    }

    /// As [`OrePoly::right_divide`], failing with [`OreError::Growth`] once a
    /// product step would exceed `budget` (size times size times order).
    pub fn right_divide_bounded(
        a: &OrePoly,
        b: &OrePoly,
        ledger: &AssumptionLedger,
        budget: usize,
    ) -> Result<(OrePoly, OrePoly), OreError> {
        Self::divide(a, b, ledger, false, Some(budget))
    }

    pub fn left_divide_bounded(
        a: &OrePoly,
        b: &OrePoly,
        ledger: &AssumptionLedger,
        budget: usize,
    ) -> Result<(OrePoly, OrePoly), OreError> {
        Self::divide(a, b, ledger, true, Some(budget))
    }

    fn divide(
        a: &OrePoly,
        b: &OrePoly,
        ledger: &AssumptionLedger,
        left: bool,
        budget: Option<usize>,
    ) -> Result<(OrePoly, OrePoly), OreError> {
        let beta = Self::check_leading(b, ledger)?;
        let db = b.coeffs.len() - 1;
        let mut q = OrePoly::zero();
        let mut r = a.clone();
        while let Some(dr) = r.degree() {
            if dr < db {
                break;
            }
            let alpha = r.leading().unwrap().clone();
            // b (g D^k) and (g D^k) b both lead with beta g
            let t = OrePoly::monomial(&alpha / &beta, dr - db);
            // the product differentiates the right factor up to the degree of the left one
            let cost = b.size() * t.size() * if left { dr - db + 1 } else { db + 1 };
            if budget.is_some_and(|m| cost > m) {
                return Err(OreError::Growth(cost));
            }
            let sub = if left { t.mul(b) } else { b.mul(&t) };
            let next = r.sub(&sub);
            if next.degree() >= Some(dr) {
                return Err(OreError::InconclusiveCoefficient(alpha.to_string()));
            }
            r = next;
            q = q.add(&t);
        }
        Ok((q, r))
    }

    pub fn parse(src: &str, ctx: &ExprContext) -> Result<OrePoly, OreError> {
        let toks = lex(src)?;
        let mut p = Parser::new(&toks);
        let ast = p.expr()?;
        if !p.at_eof() {
            return Err(p.error(format!("trailing input at {}", p.peek())).into());
        }
        Ok(eval_ore(&ast, ctx)?)
    }

    pub fn max_coeff_order(&self) -> Option<u32> {
        self.coeffs.iter().filter_map(|c| c.max_order()).max()
    }
}

fn mentions_d(a: &Ast) -> bool {
    match &a.kind {
        AstKind::Ident(s) => s == "D",
        AstKind::Num(_) | AstKind::Jet(..) => false,
        AstKind::Call(_, args) => args.iter().any(mentions_d),
        AstKind::Diff(x) | AstKind::Neg(x) | AstKind::Pow(x, _) => mentions_d(x),
        AstKind::Add(l, r) | AstKind::Sub(l, r) | AstKind::Mul(l, r) | AstKind::Div(l, r) | AstKind::Wedge(l, r) => {
            mentions_d(l) || mentions_d(r)
        }
    }
}

/// Evaluate syntax in the Ore algebra; `D` is the derivation.
pub fn eval_ore(a: &Ast, ctx: &ExprContext) -> Result<OrePoly, ExprError> {
    if !mentions_d(a) {
        return Ok(OrePoly::scalar(eval_scalar(a, ctx)?));
    }
    let err = |msg: &str| ExprError::Parse {
        span: a.span,
        msg: msg.into(),
    };
    Ok(match &a.kind {
        AstKind::Ident(_) => OrePoly::d(),
        AstKind::Neg(x) => eval_ore(x, ctx)?.neg(),
        AstKind::Add(l, r) => eval_ore(l, ctx)?.add(&eval_ore(r, ctx)?),
        AstKind::Sub(l, r) => eval_ore(l, ctx)?.sub(&eval_ore(r, ctx)?),
        AstKind::Mul(l, r) => eval_ore(l, ctx)?.mul(&eval_ore(r, ctx)?),
        AstKind::Div(l, r) => {
            if mentions_d(r) {
                return Err(err("cannot divide by an operator"));
            }
            eval_ore(l, ctx)?.mul(&OrePoly::scalar(eval_recip(r, ctx)?))
        }
        AstKind::Pow(b, k) => {
            if *k < 0 {
                return Err(err("negative power of an operator"));
            }
            let base = eval_ore(b, ctx)?;
            let mut out = OrePoly::one();
            for _ in 0..*k {
                out = out.mul(&base);
            }
            out
        }
        _ => return Err(err("`D` may not appear inside a function or differential")),
    })
}

impl fmt::Display for OrePoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let neg = c.leading_negative();
            let mag = if neg { c.neg() } else { c.clone() };
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else if neg {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            first = false;
            let dpart = match k {
                0 => String::new(),
                1 => "D".to_string(),
                _ => format!("D^{}", k),
            };
            if k == 0 {
                let s = mag.to_string();
                if mag.numer().len() > 1 && !mag.denom_factors().is_empty() {
                    write!(f, "{}", s)?;
                } else if mag.numer().len() > 1 {
                    write!(f, "({})", s)?;
                } else {
                    write!(f, "{}", s)?;
                }
            } else if mag.is_one() {
                write!(f, "{}", dpart)?;
            } else if mag.numer().len() > 1 || !mag.denom_factors().is_empty() {
                write!(f, "({})*{}", mag, dpart)?;
            } else {
                write!(f, "{}*{}", mag, dpart)?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for OrePoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl From<Expr> for OrePoly {
    fn from(e: Expr) -> Self {
        OrePoly::scalar(e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ctx() -> ExprContext {
        ExprContext::with_params(["a", "l"])
    }

    fn op(s: &str) -> OrePoly {
        OrePoly::parse(s, &ctx()).unwrap()
    }

    fn ex(s: &str) -> Expr {
        crate::symexpr::parse_expr(s, &ctx()).unwrap()
    }

    #[test]
    fn commutation_rule() {
        let x = OrePoly::scalar(ex("x"));
        let c = OrePoly::d().mul(&x).sub(&x.mul(&OrePoly::d()));
        assert_eq!(c, OrePoly::scalar(ex("dot(x)")));
    }

    #[test]
    fn second_power_past_sine() {
        let lhs = OrePoly::d_pow(2).mul(&OrePoly::scalar(ex("sin(theta)")));
        let rhs = op("sin(theta)*D^2 + 2*dot(theta)*cos(theta)*D + ddot(theta)*cos(theta) - dot(theta)^2*sin(theta)");
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn apply_examples() {
        assert_eq!(OrePoly::d().apply(&ex("x")), ex("dot(x)"));
        let p = op("a*D^2 - (ddot(x)*sin(theta) + (ddot(z) + 1)*cos(theta))");
        assert_eq!(p.apply(&Expr::one()), ex("-(ddot(x)*sin(theta) + (ddot(z) + 1)*cos(theta))"));
    }

    #[test]
    fn right_division_example() {
        let l = AssumptionLedger::new();
        let a = OrePoly::d_pow(2);
        let b = op("D - x");
        let (q, r) = OrePoly::right_divide(&a, &b, &l).unwrap();
        assert_eq!(q, op("D + x"));
        assert_eq!(r, op("x^2 - dot(x)"));
        assert_eq!(b.mul(&q).add(&r), a);
        let (q, r) = OrePoly::left_divide(&a, &b, &l).unwrap();
        assert_eq!(q, op("D + x"));
        assert_eq!(r, op("x^2 + dot(x)"));
        assert_eq!(q.mul(&b).add(&r), a);
    }

    #[test]
    fn division_trivia() {
        let l = AssumptionLedger::new();
        let a = op("x*D^2 + D");
        assert_eq!(OrePoly::right_divide(&a, &a, &l).unwrap(), (OrePoly::one(), OrePoly::zero()));
        let small = op("D + 1");
        assert_eq!(OrePoly::right_divide(&small, &a, &l).unwrap(), (OrePoly::zero(), small.clone()));
        let u = OrePoly::scalar(ex("cos(theta)"));
        let (q, r) = OrePoly::left_divide(&a, &u, &l).unwrap();
        assert!(r.is_zero());
        assert_eq!(q, a.mul(&OrePoly::scalar(ex("1/cos(theta)"))));
        assert_eq!(OrePoly::right_divide(&a, &OrePoly::zero(), &l), Err(OreError::DivisionByZero));
    }

    #[test]
    fn bounded_division() {
        let l = AssumptionLedger::new();
        let a = op("D^2");
        let b = op("D - x");
        assert_eq!(OrePoly::right_divide_bounded(&a, &b, &l, 1000), OrePoly::right_divide(&a, &b, &l));
        assert!(matches!(OrePoly::right_divide_bounded(&a, &b, &l, 2), Err(OreError::Growth(_))));
        assert!(matches!(OrePoly::left_divide_bounded(&a, &b, &l, 2), Err(OreError::Growth(_))));
    }

    #[test]
    fn unknown_leading_coefficient_is_loud() {
        let b = OrePoly::monomial(ex("1e-15*exp(x)"), 1);
        let err = OrePoly::right_divide(&OrePoly::d_pow(2), &b, &AssumptionLedger::new()).unwrap_err();
        assert!(matches!(err, OreError::InconclusiveCoefficient(_)));
    }

    #[test]
    fn text_round_trip() {
        for s in ["sin(theta)*D^2 - cos(theta)*D + x", "-D", "(x/cos(theta)^2)*D + 1", "(x + 1)*D^3 - (y + 2)"] {
            let p = op(s);
            assert_eq!(op(&p.to_string()), p, "{}", s);
        }
    }

    fn arb_coeff() -> impl Strategy<Value = Expr> {
        prop_oneof![
            (-2i64..3).prop_map(Expr::int),
            Just(ex("x")),
            Just(ex("dot(x)")),
            Just(ex("sin(theta)")),
            Just(ex("cos(theta)")),
            Just(ex("x + 1")),
            Just(ex("1/cos(theta)")),
        ]
    }

    fn arb_ore() -> impl Strategy<Value = OrePoly> {
        proptest::collection::vec(arb_coeff(), 0..3).prop_map(OrePoly::from_coeffs)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        #[test]
        fn apply_is_action(p in arb_ore(), q in arb_ore(), e in arb_coeff()) {
            let lhs = p.mul(&q).apply(&e);
            let rhs = p.apply(&q.apply(&e));
            prop_assert!((&lhs - &rhs).is_zero());
            prop_assert!((&p.add(&q).apply(&e) - &(&p.apply(&e) + &q.apply(&e))).is_zero());
        }

        #[test]
        fn associativity(p in arb_ore(), q in arb_ore(), r in arb_ore()) {
            prop_assert_eq!(p.mul(&q).mul(&r), p.mul(&q.mul(&r)));
            prop_assert_eq!(p.mul(&q.add(&r)), p.mul(&q).add(&p.mul(&r)));
        }

        #[test]
        fn division_multiply_back(a in arb_ore(), b in arb_ore()) {
            let l = AssumptionLedger::new();
            if let Ok((q, r)) = OrePoly::right_divide(&a, &b, &l) {
                prop_assert_eq!(b.mul(&q).add(&r), a.clone());
                prop_assert!(r.degree() < b.degree());
            }
            if let Ok((q, r)) = OrePoly::left_divide(&a, &b, &l) {
                prop_assert_eq!(q.mul(&b).add(&r), a);
                prop_assert!(r.degree() < b.degree());
            }
        }
    }
}
