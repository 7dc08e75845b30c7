//! Floating point evaluation at a jet point.

use std::collections::{BTreeMap, HashMap};

use num_traits::ToPrimitive;

use super::atom::{Atom, AtomKind, Head, JetCoordinate, Sym};
use super::expr::Expr;
use super::poly::Poly;
use super::ExprError;

/// Values for jet coordinates and parameters.
#[derive(Clone, Debug, Default)]
pub struct NumericPoint {
    pub jets: BTreeMap<JetCoordinate, f64>,
    pub params: BTreeMap<Sym, f64>,
}

impl NumericPoint {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, c: JetCoordinate, v: f64) -> &mut Self {
        self.jets.insert(c, v);
        self
    }

    pub fn set_param(&mut self, p: &str, v: f64) -> &mut Self {
        self.params.insert(Sym::new(p), v);
        self
    }
}

impl Expr {
    pub fn eval(&self, pt: &NumericPoint) -> Result<f64, ExprError> {
        let mut cache = HashMap::new();
        self.eval_cached(pt, &mut cache)
    }

    fn eval_cached(&self, pt: &NumericPoint, cache: &mut HashMap<Atom, f64>) -> Result<f64, ExprError> {
        let num = eval_poly(self.numer(), pt, cache)?;
        let mut den = 1.0;
        for (f, k) in self.denom_factors() {
            den *= eval_poly(f, pt, cache)?.powi(*k as i32);
        }
        if den == 0.0 || !den.is_finite() {
            return Err(ExprError::Pole);
        }
        Ok(num / den)
    }
}

fn eval_atom(a: &Atom, pt: &NumericPoint, cache: &mut HashMap<Atom, f64>) -> Result<f64, ExprError> {
    if let Some(v) = cache.get(a) {
        return Ok(*v);
    }
    let v = match a.kind() {
        AtomKind::Jet(c) => *pt
            .jets
            .get(c)
            .ok_or_else(|| ExprError::MissingValue(c.to_string()))?,
        AtomKind::Param(p) => *pt
            .params
            .get(p)
            .ok_or_else(|| ExprError::MissingValue(p.to_string()))?,
        AtomKind::Func(h, g) => {
            let x = g.eval_cached(pt, cache)?;
            match h {
                Head::Sin => x.sin(),
                Head::Cos => x.cos(),
                Head::Exp => x.exp(),
                Head::Atan => x.atan(),
                Head::Ln => {
                    if x <= 0.0 {
                        return Err(ExprError::Domain(a.to_string()));
                    }
                    x.ln()
                }
                Head::Sqrt => {
                    if x < 0.0 {
                        return Err(ExprError::Domain(a.to_string()));
                    }
                    x.sqrt()
                }
            }
        }
    };
    cache.insert(a.clone(), v);
    Ok(v)
}

fn eval_poly(p: &Poly, pt: &NumericPoint, cache: &mut HashMap<Atom, f64>) -> Result<f64, ExprError> {
    let mut acc = 0.0;
    for (m, c) in p.terms() {
        let mut t = c.to_f64().unwrap_or(f64::NAN);
        for (a, e) in m.factors() {
            t *= eval_atom(a, pt, cache)?.powi(*e as i32);
        }
        acc += t;
    }
    Ok(acc)
}
