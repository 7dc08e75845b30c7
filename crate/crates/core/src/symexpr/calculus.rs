//! Derivatives and substitution.

use std::collections::{BTreeMap, BTreeSet, HashMap};


use super::atom::{Atom, AtomKind, Head, JetCoordinate};
use super::expr::Expr;
use super::poly::{rat, Poly};
use super::ExprError;

impl Expr {
    /// Formal partial derivative with respect to one atom, all others held fixed.
    pub fn diff_atom(&self, a: &Atom) -> Expr {
        let num = self.numer();
        let den = self.denom_factors();
        let inv_den = self.recip_denominator();
        let dn = num.diff_atom(a);
        let mut out = &Expr::from_poly(dn) * &inv_den;
        for (f, k) in den {
            let df = f.diff_atom(a);
            if df.is_zero() {
                continue;
            }
            let t = &(&Expr::from_poly(num.mul(&df).scale(&rat(*k as i64))) * &inv_den)
                * &Expr::factor_recip(f, 1);
            out = &out - &t;
        }
        out
    }

    fn chain(&self, cache: &mut HashMap<Atom, Expr>, dir: &dyn Fn(&Atom) -> Option<Expr>) -> Expr {
        let mut total = Expr::zero();
        for a in self.atoms() {
            let da = atom_derivative(&a, cache, dir);
            if da.is_zero_structural() {
                continue;
            }
            total = &total + &(&self.diff_atom(&a) * &da);
        }
        total
    }

    /// The total derivative `L_tau`: shifts every jet coordinate up one order.
    pub fn total_derivative(&self) -> Expr {
        let mut cache = HashMap::new();
        self.chain(&mut cache, &|a| match a.kind() {
            AtomKind::Jet(c) => Some(Expr::jet(&c.shifted(1))),
            AtomKind::Param(_) => Some(Expr::zero()),
            AtomKind::Func(..) => None,
        })
    }

    pub fn total_derivative_n(&self, k: u32) -> Expr {
        let mut e = self.clone();
        for _ in 0..k {
            e = e.total_derivative();
        }
        e
    }

    /// Partial derivative with respect to a jet coordinate.
    pub fn partial(&self, c: &JetCoordinate) -> Expr {
        if !self.jets().contains(c) {
            return Expr::zero();
        }
        let mut cache = HashMap::new();
        self.chain(&mut cache, &|a| match a.kind() {
            AtomKind::Jet(d) => Some(if d == c { Expr::one() } else { Expr::zero() }),
            AtomKind::Param(_) => Some(Expr::zero()),
            AtomKind::Func(..) => None,
        })
    }

    /// Replace atoms according to `f`, recursing into function arguments.
    pub fn map_atoms(&self, f: &dyn Fn(&Atom) -> Option<Expr>) -> Result<Expr, ExprError> {
        let mut cache: HashMap<Atom, Option<Expr>> = HashMap::new();
        self.map_atoms_cached(f, &mut cache)
    }

    fn map_atoms_cached(
        &self,
        f: &dyn Fn(&Atom) -> Option<Expr>,
        cache: &mut HashMap<Atom, Option<Expr>>,
    ) -> Result<Expr, ExprError> {
        let atoms = self.atoms();
        let mut changed = false;
        for a in &atoms {
            if !cache.contains_key(a) {
                let v = match a.kind() {
                    AtomKind::Func(h, g) => {
                        let g2 = g.map_atoms_cached(f, cache)?;
                        if &g2 == g {
                            None
                        } else {
                            Some(Expr::apply_head(*h, &g2))
                        }
                    }
                    _ => f(a),
                };
                cache.insert(a.clone(), v);
            }
            if cache[a].is_some() {
                changed = true;
            }
        }
        if !changed {
            return Ok(self.clone());
        }
        let value = |a: &Atom| cache[a].clone().unwrap_or_else(|| Expr::atom(a.clone()));
        let eval_poly = |p: &Poly| -> Expr {
            let mut acc = Expr::zero();
            for (m, c) in p.terms() {
                let mut t = Expr::rational(c.clone());
                for (a, e) in m.factors() {
                    t = &t * &value(a).powi(*e as i64);
                }
                acc = &acc + &t;
            }
            acc
        };
        let num = eval_poly(self.numer());
        let mut den = Expr::one();
        for (p, k) in self.denom_factors() {
            den = &den * &eval_poly(p).powi(*k as i64);
        }
        num.checked_div(&den)
    }
}

fn atom_derivative(
    a: &Atom,
    cache: &mut HashMap<Atom, Expr>,
    dir: &dyn Fn(&Atom) -> Option<Expr>,
) -> Expr {
    if let Some(v) = cache.get(a) {
        return v.clone();
    }
    let v = match dir(a) {
        Some(v) => v,
        None => {
            let (h, g) = a.func_parts().expect("function atom");
            let dg = g.chain(cache, dir);
            if dg.is_zero_structural() {
                Expr::zero()
            } else {
                let outer = match h {
                    Head::Sin => Expr::cos(g),
                    Head::Cos => Expr::sin(g).neg(),
                    Head::Exp => Expr::atom(a.clone()),
                    Head::Ln => g.inv().expect("ln of zero"),
                    Head::Atan => (&Expr::one() + &(g * g)).inv().unwrap(),
                    Head::Sqrt => (&Expr::int(2) * &Expr::atom(a.clone())).inv().unwrap(),
                };
                &outer * &dg
            }
        }
    };
    cache.insert(a.clone(), v.clone());
    v
}

/// An acyclic set of rewrite rules `x^(j) -> expr`.
#[derive(Clone, Debug, Default)]
pub struct Substitution {
    rules: BTreeMap<JetCoordinate, Expr>,
}

impl Substitution {
    pub fn new(rules: impl IntoIterator<Item = (JetCoordinate, Expr)>) -> Result<Self, ExprError> {
        let mut map = BTreeMap::new();
        for (c, e) in rules {
            if e.as_jet().as_ref() == Some(&c) {
                continue;
            }
            map.insert(c, e);
        }
        let s = Substitution { rules: map };
        s.check_acyclic()?;
        Ok(s)
    }

    fn check_acyclic(&self) -> Result<(), ExprError> {
        fn visit(
            s: &Substitution,
            c: &JetCoordinate,
            path: &mut BTreeSet<JetCoordinate>,
            done: &mut BTreeSet<JetCoordinate>,
        ) -> Result<(), ExprError> {
            if done.contains(c) {
                return Ok(());
            }
            if !path.insert(c.clone()) {
                return Err(ExprError::CyclicSubstitution(c.to_string()));
            }
            if let Some(e) = s.rules.get(c) {
                for d in e.jets() {
                    if s.rules.contains_key(&d) {
                        visit(s, &d, path, done)?;
                    }
                }
            }
            path.remove(c);
            done.insert(c.clone());
            Ok(())
        }
        let mut done = BTreeSet::new();
        for c in self.rules.keys() {
            visit(self, c, &mut BTreeSet::new(), &mut done)?;
        }
        Ok(())
    }

    pub fn insert(&mut self, c: JetCoordinate, e: Expr) -> Result<(), ExprError> {
        if e.as_jet().as_ref() == Some(&c) {
            return Ok(());
        }
        self.rules.insert(c.clone(), e);
        if let Err(err) = self.check_acyclic() {
            self.rules.remove(&c);
            return Err(err);
        }
        Ok(())
    }

    pub fn get(&self, c: &JetCoordinate) -> Option<&Expr> {
        self.rules.get(c)
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&JetCoordinate, &Expr)> {
        self.rules.iter()
    }

    /// Apply the rules until no left-hand side remains.
    pub fn apply(&self, e: &Expr) -> Result<Expr, ExprError> {
        let mut cur = e.clone();
        for _ in 0..=self.rules.len() {
            if !cur.jets().iter().any(|c| self.rules.contains_key(c)) {
                return Ok(cur);
            }
            cur = cur.map_atoms(&|a| a.as_jet().and_then(|c| self.rules.get(c).cloned()))?;
        }
        Ok(cur)
    }
}

impl Expr {
    pub fn substitute(&self, s: &Substitution) -> Result<Expr, ExprError> {
        s.apply(self)
    }

    /// Substitute a single coordinate.
    pub fn subs(&self, c: &JetCoordinate, v: &Expr) -> Result<Expr, ExprError> {
        self.map_atoms(&|a| (a.as_jet() == Some(c)).then(|| v.clone()))
    }
}
