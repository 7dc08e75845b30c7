//! Antiderivatives in one jet coordinate.
//!
//! Supported integrands are sums of `K * v^p * sin(v)^a * cos(v)^j` with `K`
//! free of `v`, `a` in {0, 1} and any integer `j`. Every result is checked by
//! differentiation.

use std::collections::BTreeMap;

use super::atom::{Atom, Head, JetCoordinate};
use super::expr::Expr;
use super::poly::Poly;
use super::zero::{is_zero, AssumptionLedger, ZeroStatus};
use super::ExprError;

struct Ctx {
    v: JetCoordinate,
    va: Atom,
    s: Atom,
    c: Atom,
}

impl Ctx {
    fn vx(&self) -> Expr {
        Expr::atom(self.va.clone())
    }
    fn sx(&self) -> Expr {
        Expr::atom(self.s.clone())
    }
    fn cx(&self) -> Expr {
        Expr::atom(self.c.clone())
    }

    fn unsupported(&self, e: &Expr) -> ExprError {
        ExprError::Unintegrable {
            expr: e.to_string(),
            var: self.v.to_string(),
        }
    }

    fn integrate(&self, e: &Expr) -> Result<Expr, ExprError> {
        if !e.jets().contains(&self.v) {
            return Ok(e * &self.vx());
        }
        for a in e.atoms() {
            if a != self.va && a != self.s && a != self.c && Expr::atom(a.clone()).jets().contains(&self.v) {
                return Err(self.unsupported(e));
            }
        }
        let mut const_den = Expr::one();
        let mut ck: i64 = 0;
        let cpoly = Poly::atom(self.c.clone());
        for (f, k) in e.denom_factors() {
            if *f == cpoly {
                ck += *k as i64;
            } else if f.atoms().iter().any(|a| *a == self.va || *a == self.s || *a == self.c) {
                return Err(self.unsupported(e));
            } else {
                const_den = &const_den * &Expr::from_poly(f.clone()).powi(*k as i64);
            }
        }
        let mut groups: BTreeMap<(u32, u32, u32), Poly> = BTreeMap::new();
        for (m, coef) in e.numer().terms() {
            let p = m.exponent(&self.va);
            let a = m.exponent(&self.s);
            let b = m.exponent(&self.c);
            let rest = m.with_exponent(&self.va, 0).with_exponent(&self.s, 0).with_exponent(&self.c, 0);
            let g = groups.entry((p, a, b)).or_default();
            *g = g.add(&Poly::term(coef.clone(), rest));
        }
        let inv_den = const_den.inv().ok_or(ExprError::DivisionByZero)?;
        let mut total = Expr::zero();
        for ((p, a, b), coef) in groups {
            let k = &Expr::from_poly(coef) * &inv_den;
            let mut t = self.basic(p, a, b as i64 - ck)?;
            if a >= 2 {
                return Err(self.unsupported(e));
            }
            t = &k * &t;
            total = &total + &t;
        }
        Ok(total)
    }

    /// Antiderivative of `v^p * sin^a * cos^j`.
    fn basic(&self, p: u32, a: u32, j: i64) -> Result<Expr, ExprError> {
        if p > 0 {
            if a == 0 && j == 0 {
                return Ok(&self.vx().powi(p as i64 + 1) * &Expr::frac(1, p as i64 + 1));
            }
            let g = self.basic(0, a, j)?;
            let vp = self.vx().powi(p as i64);
            let inner = &self.vx().powi(p as i64 - 1) * &g;
            let rest = self.integrate(&inner)?;
            return Ok(&(&vp * &g) - &(&Expr::int(p as i64) * &rest));
        }
        match a {
            1 => {
                if j == -1 {
                    Ok(Expr::ln(&self.cx()).neg())
                } else {
                    Ok(&self.cx().powi(j + 1) * &Expr::frac(-1, j + 1))
                }
            }
            0 => {
                if j == 0 {
                    Ok(self.vx())
                } else if j > 0 {
                    let head = &(&self.cx().powi(j - 1) * &self.sx()) * &Expr::frac(1, j);
                    let tail = &self.basic(0, 0, j - 2)? * &Expr::frac(j - 1, j);
                    Ok(&head + &tail)
                } else if j == -1 {
                    let arg = &(&Expr::one() + &self.sx()) * &self.cx().inv().unwrap();
                    Ok(Expr::ln(&arg))
                } else {
                    let n = -j;
                    let head = &(&self.sx() * &self.cx().powi(-(n - 1))) * &Expr::frac(1, n - 1);
                    let tail = &self.basic(0, 0, -(n - 2))? * &Expr::frac(n - 2, n - 1);
                    Ok(&head + &tail)
                }
            }
            _ => Err(ExprError::Unintegrable {
                expr: format!("sin({})^{}", self.v, a),
                var: self.v.to_string(),
            }),
        }
    }
}

/// An antiderivative of `e` with respect to `v`, without integration constant.
pub fn antiderivative(e: &Expr, v: &JetCoordinate) -> Result<Expr, ExprError> {
    let ctx = Ctx {
        v: v.clone(),
        va: Atom::jet(v),
        s: Atom::func(Head::Sin, Expr::jet(v)),
        c: Atom::func(Head::Cos, Expr::jet(v)),
    };
    let r = ctx.integrate(e)?;
    let check = &r.partial(v) - e;
    match is_zero(&check, &AssumptionLedger::new()) {
        ZeroStatus::NonZero => Err(ctx.unsupported(e)),
        _ => Ok(r),
    }
}
