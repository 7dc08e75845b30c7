use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde_json::{Map, Value};

use crate::symexpr::parse::{eval_scalar, lex, Ast, AstKind, Parser};
use crate::symexpr::{is_zero, AssumptionLedger, Expr, ExprContext, ExprError, JetCoordinate, NumericPoint, ZeroStatus};

use super::JetError;

/// A wedge of distinct differentials, kept sorted.
pub type Basis = Vec<JetCoordinate>;

/// A finite sum of `coefficient * dx_1 ^ ... ^ dx_p`.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct DiffForm {
    terms: BTreeMap<Basis, Expr>,
}

/// Sort a wedge, returning the sign of the permutation, or `None` on a repeat.
fn canonical(mut b: Basis) -> Option<(i64, Basis)> {
    let mut sign = 1;
    for i in 1..b.len() {
        let mut j = i;
        while j > 0 && b[j - 1] > b[j] {
            b.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
    }
    if b.windows(2).any(|w| w[0] == w[1]) {
        return None;
    }
    Some((sign, b))
}

pub fn basis_text(b: &[JetCoordinate]) -> String {
    if b.is_empty() {
        return "1".into();
    }
    b.iter().map(|c| format!("d[{}]", c)).collect::<Vec<_>>().join("^")
}

impl DiffForm {
    pub fn zero() -> Self {
        DiffForm::default()
    }

    pub fn scalar(f: Expr) -> Self {
        Self::term(f, Vec::new())
    }

    /// `dx^(j)`.
    pub fn differential(c: &JetCoordinate) -> Self {
        Self::term(Expr::one(), vec![c.clone()])
    }

    pub fn term(coef: Expr, basis: Basis) -> Self {
        let mut out = DiffForm::zero();
        out.add_term(coef, basis);
        out
    }

    fn add_term(&mut self, coef: Expr, basis: Basis) {
        if coef.is_zero_structural() {
            return;
        }
        let Some((sign, b)) = canonical(basis) else {
            return;
        };
        let coef = if sign < 0 { coef.neg() } else { coef };
        match self.terms.get(&b) {
            Some(old) => {
                let s = old + &coef;
                if s.is_zero_structural() {
                    self.terms.remove(&b);
                } else {
                    self.terms.insert(b, s);
                }
            }
            None => {
                self.terms.insert(b, coef);
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Highest degree among the terms.
    pub fn degree(&self) -> Option<usize> {
        self.terms.keys().map(|b| b.len()).max()
    }

    pub fn is_homogeneous(&self) -> bool {
        let mut d = self.terms.keys().map(|b| b.len());
        match d.next() {
            None => true,
            Some(first) => d.all(|x| x == first),
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Basis, &Expr)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, basis: &[JetCoordinate]) -> Expr {
        match canonical(basis.to_vec()) {
            Some((s, b)) => {
                let c = self.terms.get(&b).cloned().unwrap_or_else(Expr::zero);
                if s < 0 {
                    c.neg()
                } else {
                    c
                }
            }
            None => Expr::zero(),
        }
    }

    pub fn add(&self, other: &DiffForm) -> DiffForm {
        let mut out = self.clone();
        for (b, c) in &other.terms {
            out.add_term(c.clone(), b.clone());
        }
        out
    }

    pub fn neg(&self) -> DiffForm {
        DiffForm {
            terms: self.terms.iter().map(|(b, c)| (b.clone(), c.neg())).collect(),
        }
    }

    pub fn sub(&self, other: &DiffForm) -> DiffForm {
        self.add(&other.neg())
    }

    /// `f * self` for a function `f`.
    pub fn scale(&self, f: &Expr) -> DiffForm {
        let mut out = DiffForm::zero();
        for (b, c) in &self.terms {
            out.add_term(f * c, b.clone());
        }
        out
    }

    pub fn wedge(&self, other: &DiffForm) -> DiffForm {
        let mut out = DiffForm::zero();
        for (b1, c1) in &self.terms {
            for (b2, c2) in &other.terms {
                let mut b = b1.clone();
                b.extend(b2.iter().cloned());
                out.add_term(c1 * c2, b);
            }
        }
        out
    }

    /// `df` for a function.
    pub fn d_of(f: &Expr) -> DiffForm {
        let mut out = DiffForm::zero();
        for c in f.jets() {
            out.add_term(f.partial(&c), vec![c]);
        }
        out
    }

    pub fn exterior_d(&self) -> DiffForm {
        let mut out = DiffForm::zero();
        for (b, c) in &self.terms {
            for v in c.jets() {
                let mut nb = vec![v.clone()];
                nb.extend(b.iter().cloned());
                out.add_term(c.partial(&v), nb);
            }
        }
        out
    }

    /// Lie derivative along the total derivative field.
    pub fn lie(&self) -> DiffForm {
        let mut out = DiffForm::zero();
        for (b, c) in &self.terms {
            out.add_term(c.total_derivative(), b.clone());
            for i in 0..b.len() {
                let mut nb = b.clone();
                nb[i] = nb[i].shifted(1);
                out.add_term(c.clone(), nb);
            }
        }
        out
    }

    pub fn lie_n(&self, k: usize) -> DiffForm {
        let mut out = self.clone();
        for _ in 0..k {
            out = out.lie();
        }
        out
    }

    pub fn map_coefficients(&self, f: impl Fn(&Expr) -> Result<Expr, ExprError>) -> Result<DiffForm, ExprError> {
        let mut out = DiffForm::zero();
        for (b, c) in &self.terms {
            out.add_term(f(c)?, b.clone());
        }
        Ok(out)
    }

    /// All jet coordinates appearing in bases or coefficients.
    pub fn jets(&self) -> BTreeSet<JetCoordinate> {
        let mut s = BTreeSet::new();
        for (b, c) in &self.terms {
            s.extend(b.iter().cloned());
            s.extend(c.jets());
        }
        s
    }

    pub fn max_order(&self) -> Option<u32> {
        self.jets().iter().map(|c| c.order).max()
    }

    /// Drop the terms whose basis mentions one of `coords`.
    pub fn without(&self, coords: &BTreeSet<JetCoordinate>) -> DiffForm {
        DiffForm {
            terms: self
                .terms
                .iter()
                .filter(|(b, _)| !b.iter().any(|c| coords.contains(c)))
                .map(|(b, c)| (b.clone(), c.clone()))
                .collect(),
        }
    }

    pub fn zero_status(&self, ledger: &AssumptionLedger) -> ZeroStatus {
        let mut unknown = false;
        for c in self.terms.values() {
            match is_zero(c, ledger) {
                ZeroStatus::NonZero => return ZeroStatus::NonZero,
                ZeroStatus::Unknown => unknown = true,
                ZeroStatus::Zero => {}
            }
        }
        if unknown {
            ZeroStatus::Unknown
        } else {
            ZeroStatus::Zero
        }
    }

    pub fn eval(&self, pt: &NumericPoint) -> Result<BTreeMap<Basis, f64>, ExprError> {
        self.terms.iter().map(|(b, c)| Ok((b.clone(), c.eval(pt)?))).collect()
    }

    pub fn to_json(&self) -> Value {
        let mut m = Map::new();
        for (b, c) in &self.terms {
            m.insert(basis_text(b), Value::String(c.to_string()));
        }
        Value::Object(m)
    }

    pub fn parse(src: &str, ctx: &ExprContext) -> Result<DiffForm, JetError> {
        let toks = lex(src)?;
        let mut p = Parser::new(&toks);
        let ast = p.expr()?;
        if !p.at_eof() {
            return Err(JetError::Expr(p.error(format!("trailing input at {}", p.peek()))));
        }
        eval_form(&ast, ctx)
    }
}

fn mentions_form(a: &Ast) -> bool {
    match &a.kind {
        AstKind::Diff(_) | AstKind::Wedge(..) => true,
        AstKind::Num(_) | AstKind::Ident(_) | AstKind::Jet(..) | AstKind::Call(..) => false,
        AstKind::Neg(x) | AstKind::Pow(x, _) => mentions_form(x),
        AstKind::Add(l, r) | AstKind::Sub(l, r) | AstKind::Mul(l, r) | AstKind::Div(l, r) => {
            mentions_form(l) || mentions_form(r)
        }
    }
}

/// Evaluate syntax as a differential form.
pub fn eval_form(a: &Ast, ctx: &ExprContext) -> Result<DiffForm, JetError> {
    if !mentions_form(a) {
        return Ok(DiffForm::scalar(eval_scalar(a, ctx)?));
    }
    let err = |msg: &str| {
        JetError::Expr(ExprError::Parse {
            span: a.span,
            msg: msg.into(),
        })
    };
    Ok(match &a.kind {
        AstKind::Diff(x) => DiffForm::d_of(&eval_scalar(x, ctx)?),
        AstKind::Wedge(l, r) => eval_form(l, ctx)?.wedge(&eval_form(r, ctx)?),
        AstKind::Neg(x) => eval_form(x, ctx)?.neg(),
        AstKind::Add(l, r) => eval_form(l, ctx)?.add(&eval_form(r, ctx)?),
        AstKind::Sub(l, r) => eval_form(l, ctx)?.sub(&eval_form(r, ctx)?),
        AstKind::Mul(l, r) => {
            let (lf, rf) = (mentions_form(l), mentions_form(r));
            if lf && rf {
                return Err(err("use ^ to multiply two forms"));
            }
            if lf {
                eval_form(l, ctx)?.scale(&eval_scalar(r, ctx)?)
            } else {
                eval_form(r, ctx)?.scale(&eval_scalar(l, ctx)?)
            }
        }
        AstKind::Div(l, r) => {
            if mentions_form(r) {
                return Err(err("cannot divide by a form"));
            }
            let inv = eval_scalar(r, ctx)?.inv().ok_or(JetError::Expr(ExprError::DivisionByZero))?;
            eval_form(l, ctx)?.scale(&inv)
        }
        AstKind::Pow(..) => return Err(err("cannot raise a form to a power")),
        _ => unreachable!("scalar syntax handled above"),
    })
}

fn coef_text(c: &Expr) -> String {
    if c.as_atom().is_some() || (c.is_constant() && !c.leading_negative() && c.is_polynomial()) {
        c.to_string()
    } else {
        format!("({})", c)
    }
}

impl fmt::Display for DiffForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (b, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            if b.is_empty() {
                write!(f, "{}", coef_text(c))?;
            } else if c.is_one() {
                write!(f, "{}", basis_text(b))?;
            } else if c.neg().is_one() {
                write!(f, "-{}", basis_text(b))?;
            } else {
                write!(f, "{}*{}", coef_text(c), basis_text(b))?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for DiffForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

pub fn wedge(a: &DiffForm, b: &DiffForm) -> DiffForm {
    a.wedge(b)
}

pub fn exterior_d(a: &DiffForm) -> DiffForm {
    a.exterior_d()
}

pub fn lie_derivative_form(a: &DiffForm) -> DiffForm {
    a.lie()
}
