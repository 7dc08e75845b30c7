//! Restriction of functions and forms to the system manifold.
//!
//! Each equation is solved for one top-order jet (its pivot). All higher
//! derivatives of a pivot follow by prolongation, so a jet coordinate is
//! dependent exactly when it is a pivot or one of its derivatives.

use std::collections::{BTreeMap, BTreeSet};

use parking_lot::Mutex;

use crate::jet_forms::DiffForm;
use crate::symexpr::{is_zero, AssumptionLedger, Expr, ExprError, JetCoordinate, Sym, ZeroStatus};

use super::solve::solve_for;
use super::system::ImplicitSystem;
use super::FlatnessError;

const MAX_DEPTH: usize = 48;

#[derive(Debug)]
pub struct X0 {
    states: Vec<Sym>,
    base: BTreeMap<Sym, (u32, Expr)>,
    cache: Mutex<BTreeMap<JetCoordinate, Expr>>,
}

impl X0 {
    pub fn new(sys: &ImplicitSystem, ledger: &mut AssumptionLedger) -> Result<Self, FlatnessError> {
        let mut base: BTreeMap<Sym, (u32, Expr)> = BTreeMap::new();
        for (i, f) in sys.equations.iter().enumerate() {
            let jets = f.jets();
            let mut best: Option<((bool, usize, Sym), JetCoordinate, Expr, Expr)> = None;
            for s in &sys.states {
                if base.contains_key(s) {
                    continue;
                }
                let Some(top) = jets.iter().filter(|c| &c.var == s).max_by_key(|c| c.order) else {
                    continue;
                };
                let Some(sol) = solve_for(f, top, ledger) else {
                    continue;
                };
                if sol.angular || is_zero(&sol.pivot, ledger) != ZeroStatus::NonZero {
                    continue;
                }
                let loose = !sol.pivot.jets().is_empty() && !ledger.contains(&sol.pivot);
                let key = (loose, sol.pivot.size(), s.clone());
                if best.as_ref().map_or(true, |(k, ..)| key < *k) {
                    best = Some((key, top.clone(), sol.value, sol.pivot));
                }
            }
            let Some((_, top, value, pivot)) = best else {
                return Err(FlatnessError::RankDeficient(format!("equation {} has no solvable top-order jet", i + 1)));
            };
            ledger.assume_nonzero(&pivot);
            ledger.assume_nonzero(&value.denominator());
            base.insert(top.var.clone(), (top.order, value));
        }
        Ok(X0 {
            states: sys.states.clone(),
            base,
            cache: Mutex::new(BTreeMap::new()),
        })
    }

    pub fn is_dependent(&self, c: &JetCoordinate) -> bool {
        self.base.get(&c.var).map_or(false, |(r, _)| c.order >= *r)
    }

    /// The pivots `(state, order)`.
    pub fn pivots(&self) -> impl Iterator<Item = JetCoordinate> + '_ {
        self.base.iter().map(|(s, (r, _))| JetCoordinate::new(s.clone(), *r))
    }

    /// Coordinates of the manifold up to order `max`, sorted by name then order.
    pub fn independent(&self, max: u32) -> Vec<JetCoordinate> {
        let mut out = BTreeSet::new();
        for s in &self.states {
            for k in 0..=max {
                let c = JetCoordinate::new(s.clone(), k);
                if !self.is_dependent(&c) {
                    out.insert(c);
                }
            }
        }
        out.into_iter().collect()
    }

    fn rule(&self, c: &JetCoordinate, depth: usize) -> Result<Expr, ExprError> {
        if let Some(e) = self.cache.lock().get(c) {
            return Ok(e.clone());
        }
        if depth > MAX_DEPTH {
            return Err(ExprError::CyclicSubstitution(c.to_string()));
        }
        let (r, base) = &self.base[&c.var];
        let raw = if c.order == *r {
            base.clone()
        } else {
            let prev = JetCoordinate::new(c.var.clone(), c.order - 1);
            self.rule(&prev, depth + 1)?.total_derivative()
        };
        let v = self.restrict_at(&raw, depth + 1)?;
        self.cache.lock().insert(c.clone(), v.clone());
        Ok(v)
    }

    fn restrict_at(&self, e: &Expr, depth: usize) -> Result<Expr, ExprError> {
        let mut cur = e.clone();
        for _ in 0..MAX_DEPTH {
            let deps: Vec<JetCoordinate> = cur.jets().into_iter().filter(|c| self.is_dependent(c)).collect();
            if deps.is_empty() {
                return Ok(cur);
            }
            let mut rules = BTreeMap::new();
            for c in deps {
                let v = self.rule(&c, depth)?;
                rules.insert(c, v);
            }
            cur = cur.map_atoms(&|a| a.as_jet().and_then(|c| rules.get(c).cloned()))?;
        }
        Err(ExprError::CyclicSubstitution(e.to_string()))
    }

    /// The value of a dependent coordinate on the manifold (identity otherwise).
    pub fn value(&self, c: &JetCoordinate) -> Result<Expr, ExprError> {
        if self.is_dependent(c) {
            self.rule(c, 0)
        } else {
            Ok(Expr::jet(c))
        }
    }

    pub fn restrict_expr(&self, e: &Expr) -> Result<Expr, ExprError> {
        self.restrict_at(e, 0)
    }

    /// Restrict coefficients and replace dependent differentials.
    pub fn restrict_form(&self, a: &DiffForm) -> Result<DiffForm, ExprError> {
        let mut out = DiffForm::zero();
        for (b, c) in a.terms() {
            let mut t = DiffForm::scalar(self.restrict_expr(c)?);
            for x in b {
                let dx = if self.is_dependent(x) {
                    DiffForm::d_of(&self.rule(x, 0)?)
                } else {
                    DiffForm::differential(x)
                };
                t = t.wedge(&dx);
            }
            out = out.add(&t);
        }
        Ok(out)
    }
}
