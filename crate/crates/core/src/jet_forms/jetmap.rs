use std::collections::BTreeMap;

use parking_lot::Mutex;

use crate::symexpr::{AtomKind, Expr, ExprError, Sym};

use super::DiffForm;

/// Components `x = phi(y, dot(y), ...)`, prolonged on demand.
/// Variables without a component map to themselves.
pub struct JetMap {
    components: BTreeMap<Sym, Expr>,
    prolonged: Mutex<BTreeMap<Sym, Vec<Expr>>>,
}

impl Clone for JetMap {
    fn clone(&self) -> Self {
        JetMap {
            components: self.components.clone(),
            prolonged: Mutex::new(self.prolonged.lock().clone()),
        }
    }
}

impl std::fmt::Debug for JetMap {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_map().entries(self.components.iter().map(|(k, v)| (k.as_str(), v.to_string()))).finish()
    }
}

impl JetMap {
    pub fn identity() -> Self {
        Self::new(Vec::<(&str, Expr)>::new())
    }

    pub fn new<'a>(pairs: impl IntoIterator<Item = (&'a str, Expr)>) -> Self {
        JetMap {
            components: pairs.into_iter().map(|(k, v)| (Sym::new(k), v)).collect(),
            prolonged: Mutex::new(BTreeMap::new()),
        }
    }

    pub fn components(&self) -> impl Iterator<Item = (&Sym, &Expr)> {
        self.components.iter()
    }

    /// `L^k phi` for variable `var`.
    pub fn component(&self, var: &Sym, k: u32) -> Option<Expr> {
        let base = self.components.get(var)?;
        let mut cache = self.prolonged.lock();
        let v = cache.entry(var.clone()).or_insert_with(|| vec![base.clone()]);
        while v.len() <= k as usize {
            let next = v.last().unwrap().total_derivative();
            v.push(next);
        }
        Some(v[k as usize].clone())
    }

    pub fn pull_expr(&self, e: &Expr) -> Result<Expr, ExprError> {
        e.map_atoms(&|a| match a.kind() {
            AtomKind::Jet(c) => self.component(&c.var, c.order),
            _ => None,
        })
    }

    pub fn pullback(&self, alpha: &DiffForm) -> Result<DiffForm, ExprError> {
        let mut out = DiffForm::zero();
        for (b, c) in alpha.terms() {
            let mut t = DiffForm::scalar(self.pull_expr(c)?);
            for x in b {
                let dx = match self.component(&x.var, x.order) {
                    Some(phi) => DiffForm::d_of(&phi),
                    None => DiffForm::differential(x),
                };
                t = t.wedge(&dx);
            }
            out = out.add(&t);
        }
        Ok(out)
    }
}

pub fn pullback(phi: &JetMap, alpha: &DiffForm) -> Result<DiffForm, ExprError> {
    phi.pullback(alpha)
}
