//! Canonical rational functions in interned atoms.
//!
//! An [`Expr`] is `num / prod(f_i^k_i)` where every denominator factor is a
//! monic polynomial free of square roots. Normal form: sines appear with
//! degree at most one, square roots with degree at most one, and every
//! denominator factor that divides the numerator (modulo the trigonometric
//! relation) has been cancelled.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;
use std::ops;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed};

use super::atom::{Atom, AtomKind, Head, JetCoordinate, Sym};
use super::poly::{rat, Poly, Rat};
use super::ExprError;

#[derive(Clone, PartialEq, Eq, Hash)]
struct Inner {
    num: Poly,
    den: Vec<(Poly, u32)>,
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Expr(Arc<Inner>);

pub type ScalarExpr = Expr;

fn merge_den(a: &[(Poly, u32)], b: &[(Poly, u32)]) -> Vec<(Poly, u32)> {
    let mut out: Vec<(Poly, u32)> = a.to_vec();
    for (f, k) in b {
        match out.iter_mut().find(|(g, _)| g == f) {
            Some((_, j)) => *j += k,
            None => out.push((f.clone(), *k)),
        }
    }
    out.sort_by(|x, y| x.0.cmp(&y.0));
    out
}

fn den_product(den: &[(Poly, u32)]) -> Poly {
    let mut p = Poly::one();
    for (f, k) in den {
        p = p.mul(&f.pow(*k));
    }
    p
}

/// Exact division modulo `sin^2 + cos^2 = 1`.
fn ring_div(num: &Poly, f: &Poly) -> Option<Poly> {
    if let Some(s) = f
        .atoms()
        .into_iter()
        .find(|a| a.is_head(Head::Sin) && f.degree_in(a) > 0)
    {
        let conj = f.flip_sign_of(&s);
        let g = f.mul(&conj).reduce_trig();
        let n = num.mul(&conj).reduce_trig();
        return ring_div(&n, &g);
    }
    num.exact_div(f)
}

fn first_sqrt_power(p: &Poly) -> Option<Atom> {
    for (m, _) in p.terms() {
        for (a, e) in m.factors() {
            if *e >= 2 && a.is_head(Head::Sqrt) {
                return Some(a.clone());
            }
        }
    }
    None
}

fn first_sqrt(p: &Poly) -> Option<Atom> {
    p.atoms().into_iter().find(|a| a.is_head(Head::Sqrt))
}

impl Expr {
    fn raw(num: Poly, den: Vec<(Poly, u32)>) -> Expr {
        if num.is_zero() {
            return Expr(Arc::new(Inner {
                num,
                den: Vec::new(),
            }));
        }
        Expr(Arc::new(Inner { num, den }))
    }

    /// Normalize a numerator over an already canonical denominator.
    fn build(num: Poly, den: Vec<(Poly, u32)>) -> Expr {
        if let Some(w) = first_sqrt_power(&num) {
            let q = match w.kind() {
                AtomKind::Func(Head::Sqrt, q) => q.clone(),
                _ => unreachable!(),
            };
            let mut plain = Poly::zero();
            let mut acc = Expr::zero();
            for (m, c) in num.terms() {
                let e = m.exponent(&w);
                if e >= 2 {
                    let t = Expr::from_poly(Poly::term(c.clone(), m.with_exponent(&w, e % 2)));
                    acc = &acc + &(&t * &q.powi((e / 2) as i64));
                } else {
                    plain = plain.add(&Poly::term(c.clone(), m.clone()));
                }
            }
            let total = &acc + &Expr::from_poly(plain);
            let inv_den = Expr::raw(Poly::one(), den);
            return &total * &inv_den;
        }
        let mut num = num.reduce_trig();
        if num.is_zero() {
            return Expr::zero();
        }
        let mut out = Vec::with_capacity(den.len());
        for (f, mut k) in den {
            while k > 0 {
                match ring_div(&num, &f) {
                    Some(q) => {
                        num = q;
                        k -= 1;
                    }
                    None => break,
                }
            }
            if k > 0 {
                out.push((f, k));
            }
        }
        Expr::raw(num, out)
    }

    pub fn from_poly(p: Poly) -> Expr {
        Expr::build(p, Vec::new())
    }

    pub fn zero() -> Expr {
        Expr::raw(Poly::zero(), Vec::new())
    }

    pub fn one() -> Expr {
        Expr::raw(Poly::one(), Vec::new())
    }

    pub fn int(n: i64) -> Expr {
        Expr::raw(Poly::constant(rat(n)), Vec::new())
    }

    pub fn rational(c: Rat) -> Expr {
        Expr::raw(Poly::constant(c), Vec::new())
    }

    pub fn frac(n: i64, d: i64) -> Expr {
        Expr::rational(BigRational::new(BigInt::from(n), BigInt::from(d)))
    }

    pub fn atom(a: Atom) -> Expr {
        Expr::raw(Poly::atom(a), Vec::new())
    }

    pub fn jet(c: &JetCoordinate) -> Expr {
        Expr::atom(Atom::jet(c))
    }

    /// Base coordinate `x^(0)`.
    pub fn var(name: &str) -> Expr {
        Expr::jet(&JetCoordinate::base(name))
    }

    pub fn jet_of(name: &str, order: u32) -> Expr {
        Expr::jet(&JetCoordinate::new(name, order))
    }

    pub fn param(name: &str) -> Expr {
        Expr::atom(Atom::param(&Sym::new(name)))
    }

    /// `1 / denominator`, keeping the factorization.
    pub(crate) fn recip_denominator(&self) -> Expr {
        Expr::raw(Poly::one(), self.0.den.clone())
    }

    /// `1 / f^k` for a canonical denominator factor.
    pub(crate) fn factor_recip(f: &Poly, k: u32) -> Expr {
        Expr::raw(Poly::one(), vec![(f.clone(), k)])
    }

    pub fn numer(&self) -> &Poly {
        &self.0.num
    }

    pub fn denom_factors(&self) -> &[(Poly, u32)] {
        &self.0.den
    }

    pub fn denominator(&self) -> Expr {
        Expr::raw(den_product(&self.0.den), Vec::new())
    }

    pub fn numerator(&self) -> Expr {
        Expr::raw(self.0.num.clone(), Vec::new())
    }

    pub fn is_zero_structural(&self) -> bool {
        self.0.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.0.den.is_empty() && self.0.num.is_one()
    }

    pub fn is_polynomial(&self) -> bool {
        self.0.den.is_empty()
    }

    pub fn as_rational(&self) -> Option<Rat> {
        if self.0.den.is_empty() {
            self.0.num.as_constant()
        } else {
            None
        }
    }

    pub fn is_constant(&self) -> bool {
        self.as_rational().is_some()
    }

    pub fn as_atom(&self) -> Option<Atom> {
        if !self.0.den.is_empty() || self.0.num.len() != 1 {
            return None;
        }
        let (m, c) = self.0.num.leading()?;
        if !c.is_one() || m.factors().len() != 1 || m.factors()[0].1 != 1 {
            return None;
        }
        Some(m.factors()[0].0.clone())
    }

    pub fn as_jet(&self) -> Option<JetCoordinate> {
        self.as_atom().and_then(|a| a.as_jet().cloned())
    }

    /// Sign of the leading numerator coefficient.
    pub fn leading_negative(&self) -> bool {
        self.0.num.leading_coefficient().is_negative()
    }

    /// Number of terms weighted by degree, over numerator and denominator.
    pub fn size(&self) -> usize {
        self.0.num.size() + self.0.den.iter().map(|(f, _)| f.size()).sum::<usize>()
    }

    /// Atoms appearing at top level (numerator and denominator).
    pub fn atoms(&self) -> BTreeSet<Atom> {
        let mut s = self.0.num.atoms();
        for (f, _) in &self.0.den {
            s.extend(f.atoms());
        }
        s
    }

    /// Jet coordinates appearing anywhere, including inside function arguments.
    pub fn jets(&self) -> BTreeSet<JetCoordinate> {
        let mut out = BTreeSet::new();
        self.collect_leaves(&mut out, &mut BTreeSet::new());
        out
    }

    pub fn params(&self) -> BTreeSet<Sym> {
        let mut out = BTreeSet::new();
        self.collect_leaves(&mut BTreeSet::new(), &mut out);
        out
    }

    fn collect_leaves(&self, jets: &mut BTreeSet<JetCoordinate>, params: &mut BTreeSet<Sym>) {
        for a in self.atoms() {
            match a.kind() {
                AtomKind::Jet(c) => {
                    jets.insert(c.clone());
                }
                AtomKind::Param(p) => {
                    params.insert(p.clone());
                }
                AtomKind::Func(_, g) => g.collect_leaves(jets, params),
            }
        }
    }

    /// Highest derivative order of any jet coordinate (None for no jets).
    pub fn max_order(&self) -> Option<u32> {
        self.jets().iter().map(|c| c.order).max()
    }

    pub fn add(&self, other: &Expr) -> Expr {
        if self.is_zero_structural() {
            return other.clone();
        }
        if other.is_zero_structural() {
            return self.clone();
        }
        if self.0.den == other.0.den {
            return Expr::build(self.0.num.add(&other.0.num), self.0.den.clone());
        }
        let mut den: Vec<(Poly, u32)> = self.0.den.clone();
        for (f, k) in &other.0.den {
            match den.iter_mut().find(|(g, _)| g == f) {
                Some((_, j)) => *j = (*j).max(*k),
                None => den.push((f.clone(), *k)),
            }
        }
        den.sort_by(|x, y| x.0.cmp(&y.0));
        let cofactor = |own: &[(Poly, u32)]| {
            let mut p = Poly::one();
            for (f, k) in &den {
                let have = own.iter().find(|(g, _)| g == f).map_or(0, |(_, j)| *j);
                if *k > have {
                    p = p.mul(&f.pow(k - have));
                }
            }
            p
        };
        let a = self.0.num.mul(&cofactor(&self.0.den));
        let b = other.0.num.mul(&cofactor(&other.0.den));
        Expr::build(a.add(&b), den)
    }

    pub fn neg(&self) -> Expr {
        Expr::raw(self.0.num.neg(), self.0.den.clone())
    }

    pub fn sub(&self, other: &Expr) -> Expr {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Expr) -> Expr {
        if self.is_zero_structural() || other.is_zero_structural() {
            return Expr::zero();
        }
        if self.is_one() {
            return other.clone();
        }
        if other.is_one() {
            return self.clone();
        }
        if let Some(c) = self.as_rational() {
            return Expr::raw(other.0.num.scale(&c), other.0.den.clone());
        }
        if let Some(c) = other.as_rational() {
            return Expr::raw(self.0.num.scale(&c), self.0.den.clone());
        }
        let (na, da) = cross_cancel(&self.0.num, &other.0.den);
        let (nb, db) = cross_cancel(&other.0.num, &self.0.den);
        let den = merge_den(&da, &db);
        Expr::build(na.mul(&nb), den)
    }

    pub fn scale(&self, c: &Rat) -> Expr {
        Expr::raw(self.0.num.scale(c), self.0.den.clone())
    }

    /// Multiplicative inverse; `None` for the zero expression.
    pub fn inv(&self) -> Option<Expr> {
        if self.is_zero_structural() {
            return None;
        }
        let den_expr = Expr::raw(den_product(&self.0.den), Vec::new());
        let n = &self.0.num;
        if let Some(w) = first_sqrt(n) {
            let conj = n.flip_sign_of(&w);
            let prod = Expr::from_poly(n.mul(&conj));
            let rest = prod.inv()?;
            return Some(&(&Expr::from_poly(conj) * &den_expr) * &rest);
        }
        let (lc, monic) = n.monic();
        let content = monic.monomial_content();
        let rest = monic.div_monomial(&content);
        let mut den: Vec<(Poly, u32)> = content
            .factors()
            .iter()
            .map(|(a, e)| (Poly::atom(a.clone()), *e))
            .collect();
        if rest.as_constant().is_none() {
            den.push((rest, 1));
        }
        den.sort_by(|x, y| x.0.cmp(&y.0));
        let num = den_expr.0.num.scale(&(Rat::one() / lc));
        Some(Expr::build(num, den))
    }

    pub fn checked_div(&self, other: &Expr) -> Result<Expr, ExprError> {
        let inv = other.inv().ok_or(ExprError::DivisionByZero)?;
        Ok(self * &inv)
    }

    pub fn powi(&self, e: i64) -> Expr {
        if e < 0 {
            return self
                .inv()
                .expect("negative power of zero")
                .powi(-e);
        }
        let mut out = Expr::one();
        for _ in 0..e {
            out = &out * self;
        }
        out
    }

    pub fn sin(g: &Expr) -> Expr {
        if g.is_zero_structural() {
            return Expr::zero();
        }
        if g.leading_negative() {
            return Expr::sin(&g.neg()).neg();
        }
        if let Some((Head::Atan, r)) = g.as_atom().as_ref().and_then(|a| a.func_parts().map(|(h, r)| (h, r.clone()))) {
            let root = Expr::sqrt(&(&Expr::one() + &(&r * &r)));
            return &r * &root.inv().unwrap();
        }
        Expr::atom(Atom::func(Head::Sin, g.clone()))
    }

    pub fn cos(g: &Expr) -> Expr {
        if g.is_zero_structural() {
            return Expr::one();
        }
        if g.leading_negative() {
            return Expr::cos(&g.neg());
        }
        if let Some((Head::Atan, r)) = g.as_atom().as_ref().and_then(|a| a.func_parts().map(|(h, r)| (h, r.clone()))) {
            let root = Expr::sqrt(&(&Expr::one() + &(&r * &r)));
            return root.inv().unwrap();
        }
        Expr::atom(Atom::func(Head::Cos, g.clone()))
    }

    pub fn tan(g: &Expr) -> Expr {
        &Expr::sin(g) * &Expr::cos(g).inv().expect("cos is nonzero")
    }

    pub fn exp(g: &Expr) -> Expr {
        if g.is_zero_structural() {
            return Expr::one();
        }
        if let Some(a) = g.as_atom() {
            if let Some((Head::Ln, h)) = a.func_parts() {
                return h.clone();
            }
        }
        Expr::atom(Atom::func(Head::Exp, g.clone()))
    }

    pub fn ln(g: &Expr) -> Expr {
        if g.is_one() {
            return Expr::zero();
        }
        if let Some(a) = g.as_atom() {
            if let Some((Head::Exp, h)) = a.func_parts() {
                return h.clone();
            }
        }
        Expr::atom(Atom::func(Head::Ln, g.clone()))
    }

    pub fn atan(g: &Expr) -> Expr {
        if g.is_zero_structural() {
            return Expr::zero();
        }
        if g.leading_negative() {
            return Expr::atan(&g.neg()).neg();
        }
        Expr::atom(Atom::func(Head::Atan, g.clone()))
    }

    pub fn sqrt(q: &Expr) -> Expr {
        if q.is_zero_structural() {
            return Expr::zero();
        }
        if let Some(c) = q.as_rational() {
            if c.is_positive() {
                let (n, d) = (c.numer().clone(), c.denom().clone());
                let (rn, rd) = (n.sqrt(), d.sqrt());
                if &rn * &rn == n && &rd * &rd == d {
                    return Expr::rational(BigRational::new(rn, rd));
                }
            }
        }
        Expr::atom(Atom::func(Head::Sqrt, q.clone()))
    }

    pub fn apply_head(head: Head, g: &Expr) -> Expr {
        match head {
            Head::Sin => Expr::sin(g),
            Head::Cos => Expr::cos(g),
            Head::Exp => Expr::exp(g),
            Head::Ln => Expr::ln(g),
            Head::Atan => Expr::atan(g),
            Head::Sqrt => Expr::sqrt(g),
        }
    }
}

/// Remove from `num` every factor of `den` that divides it.
fn cross_cancel(num: &Poly, den: &[(Poly, u32)]) -> (Poly, Vec<(Poly, u32)>) {
    let mut num = num.clone();
    let mut out = Vec::with_capacity(den.len());
    for (f, k) in den {
        let mut k = *k;
        while k > 0 {
            match ring_div(&num, f) {
                Some(q) => {
                    num = q;
                    k -= 1;
                }
                None => break,
            }
        }
        if k > 0 {
            out.push((f.clone(), k));
        }
    }
    (num, out)
}

impl Ord for Expr {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0
            .num
            .cmp(&other.0.num)
            .then_with(|| self.0.den.cmp(&other.0.den))
    }
}

impl PartialOrd for Expr {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Default for Expr {
    fn default() -> Self {
        Expr::zero()
    }
}

fn factor_is_simple(f: &Poly) -> bool {
    if f.len() != 1 {
        return false;
    }
    let (m, c) = f.leading().unwrap();
    c.is_one() && m.factors().len() == 1 && m.factors()[0].1 == 1
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.den.is_empty() {
            return write!(f, "{}", self.0.num);
        }
        if self.0.num.len() > 1 {
            write!(f, "({})/", self.0.num)?;
        } else {
            write!(f, "{}/", self.0.num)?;
        }
        let wrap = self.0.den.len() > 1;
        if wrap {
            write!(f, "(")?;
        }
        for (i, (p, k)) in self.0.den.iter().enumerate() {
            if i > 0 {
                write!(f, "*")?;
            }
            if factor_is_simple(p) {
                write!(f, "{}", p)?;
            } else {
                write!(f, "({})", p)?;
            }
            if *k > 1 {
                write!(f, "^{}", k)?;
            }
        }
        if wrap {
            write!(f, ")")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl From<i64> for Expr {
    fn from(n: i64) -> Self {
        Expr::int(n)
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $f:ident) => {
        impl ops::$tr<&Expr> for &Expr {
            type Output = Expr;
            fn $m(self, rhs: &Expr) -> Expr {
                Expr::$f(self, rhs)
            }
        }
        impl ops::$tr<Expr> for Expr {
            type Output = Expr;
            fn $m(self, rhs: Expr) -> Expr {
                Expr::$f(&self, &rhs)
            }
        }
        impl ops::$tr<&Expr> for Expr {
            type Output = Expr;
            fn $m(self, rhs: &Expr) -> Expr {
                Expr::$f(&self, rhs)
            }
        }
        impl ops::$tr<Expr> for &Expr {
            type Output = Expr;
            fn $m(self, rhs: Expr) -> Expr {
                Expr::$f(self, &rhs)
            }
        }
    };
}

binop!(Add, add, add);
binop!(Sub, sub, sub);
binop!(Mul, mul, mul);

impl ops::Div<&Expr> for &Expr {
    type Output = Expr;
    fn div(self, rhs: &Expr) -> Expr {
        self.checked_div(rhs).expect("division by zero expression")
    }
}

impl ops::Div<Expr> for Expr {
    type Output = Expr;
    fn div(self, rhs: Expr) -> Expr {
        &self / &rhs
    }
}

impl ops::Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::neg(self)
    }
}

impl ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::neg(&self)
    }
}

impl std::iter::Sum for Expr {
    fn sum<I: Iterator<Item = Expr>>(iter: I) -> Expr {
        iter.fold(Expr::zero(), |a, b| &a + &b)
    }
}
