use std::collections::BTreeSet;

use crate::ore::OrePoly;
use crate::poly_matrix::OreMatrix;
use crate::symexpr::{AssumptionLedger, Expr, JetCoordinate, Sym};

use super::solve::solve_for;
use super::{FlatnessError, Stage};

/// `dot(x) = f(x, u)` style system; each equation is stored as `lhs - rhs`.
#[derive(Clone, Debug)]
pub struct ExplicitSystem {
    pub name: String,
    pub states: Vec<Sym>,
    pub inputs: Vec<Sym>,
    pub params: Vec<Sym>,
    pub equations: Vec<Expr>,
    pub ledger: AssumptionLedger,
}

/// `F(x, dot(x), ...) = 0` with `m` degrees of freedom.
#[derive(Clone, Debug)]
pub struct ImplicitSystem {
    pub name: String,
    pub states: Vec<Sym>,
    pub m: usize,
    pub params: Vec<Sym>,
    pub equations: Vec<Expr>,
    pub ledger: AssumptionLedger,
}

impl ImplicitSystem {
    pub fn new(name: &str, states: &[&str], m: usize, equations: Vec<Expr>) -> Self {
        let mut params = BTreeSet::new();
        for e in &equations {
            params.extend(e.params());
        }
        ImplicitSystem {
            name: name.to_string(),
            states: states.iter().map(|s| Sym::new(s)).collect(),
            m,
            params: params.into_iter().collect(),
            equations,
            ledger: AssumptionLedger::new(),
        }
    }

    pub fn n(&self) -> usize {
        self.states.len()
    }

    /// Highest derivative of each state appearing in the equations.
    pub fn orders(&self) -> Vec<u32> {
        self.states
            .iter()
            .map(|s| {
                self.equations
                    .iter()
                    .flat_map(|e| e.jets())
                    .filter(|c| &c.var == s)
                    .map(|c| c.order)
                    .max()
                    .unwrap_or(0)
            })
            .collect()
    }

    pub fn check_shape(&self) -> Result<(), FlatnessError> {
        if self.equations.len() + self.m != self.n() {
            return Err(FlatnessError::RankDeficient(format!(
                "{} equations for {} states and {} free variables",
                self.equations.len(),
                self.n(),
                self.m
            )));
        }
        let known: BTreeSet<&Sym> = self.states.iter().collect();
        for e in &self.equations {
            if let Some(c) = e.jets().into_iter().find(|c| !known.contains(&c.var)) {
                return Err(FlatnessError::RankDeficient(format!("`{}` is not a state", c.var)));
            }
        }
        Ok(())
    }
}

fn normalize_sign(states: &[Sym], e: Expr) -> Expr {
    let jets = e.jets();
    for s in states {
        if let Some(top) = jets.iter().filter(|c| &c.var == s).max_by_key(|c| c.order) {
            return if e.partial(top).leading_negative() { e.neg() } else { e };
        }
    }
    e
}

/// Eliminate every input, leaving `n - m` implicit equations in the states.
pub fn implicitize(sys: &ExplicitSystem) -> Result<ImplicitSystem, FlatnessError> {
    let mut eqs = sys.equations.clone();
    let mut ledger = sys.ledger.clone();
    let mut pending = sys.inputs.clone();
    while !pending.is_empty() {
        let mut best: Option<(_, usize, usize, super::Solved)> = None;
        for (ii, u) in pending.iter().enumerate() {
            let uc = JetCoordinate::new(u.clone(), 0);
            for (r, e) in eqs.iter().enumerate() {
                let Some(s) = solve_for(e, &uc, &ledger) else {
                    continue;
                };
                let pjets = s.pivot.jets();
                let coupled = pending.iter().any(|w| w != u && pjets.iter().any(|c| &c.var == w));
                let key = (s.angular, coupled, s.pivot.size(), r, ii);
                if best.as_ref().map_or(true, |(k, ..)| key < *k) {
                    best = Some((key, ii, r, s));
                }
            }
        }
        let Some((_, ii, r, s)) = best else {
            return Err(FlatnessError::ManualEliminationRequired(pending[0].to_string()));
        };
        let u = pending.remove(ii);
        ledger.assume_nonzero(&s.pivot);
        eqs.remove(r);
        let value = s.value;
        for e in eqs.iter_mut() {
            *e = e
                .map_atoms(&|a| match a.as_jet() {
                    Some(c) if c.var == u => Some(value.total_derivative_n(c.order)),
                    _ => None,
                })
                .stage("implicitize")?;
        }
    }
    let equations = eqs
        .into_iter()
        .map(|e| {
            ledger.assume_nonzero(&e.denominator());
            normalize_sign(&sys.states, e.numerator())
        })
        .collect();
    Ok(ImplicitSystem {
        name: sys.name.clone(),
        states: sys.states.clone(),
        m: sys.inputs.len(),
        params: sys.params.clone(),
        equations,
        ledger,
    })
}

fn aux_name(x: &Sym, k: u32, taken: &BTreeSet<String>) -> Sym {
    let mut name = format!("{x}_d{k}");
    while taken.contains(&name) {
        name.push('_');
    }
    Sym::new(&name)
}

/// Rewrite every state of order `r >= 2` with auxiliary first-order states.
pub fn reduce_order(sys: &ImplicitSystem) -> ImplicitSystem {
    let orders = sys.orders();
    let mut taken: BTreeSet<String> = sys.states.iter().map(|s| s.to_string()).collect();
    let mut states = sys.states.clone();
    let mut extra = Vec::new();
    let mut chains: Vec<(Sym, Vec<Sym>)> = Vec::new();
    for (x, &r) in sys.states.iter().zip(&orders) {
        if r < 2 {
            continue;
        }
        let mut chain = Vec::new();
        let mut prev = x.clone();
        for k in 1..r {
            let v = aux_name(x, k, &taken);
            taken.insert(v.to_string());
            states.push(v.clone());
            extra.push(&Expr::jet(&JetCoordinate::new(prev.clone(), 1)) - &Expr::jet(&JetCoordinate::new(v.clone(), 0)));
            prev = v.clone();
            chain.push(v);
        }
        chains.push((x.clone(), chain));
    }
    let rewrite = |e: &Expr| {
        e.map_atoms(&|a| {
            let c = a.as_jet()?;
            let (_, chain) = chains.iter().find(|(x, _)| *x == c.var)?;
            if c.order == 0 {
                return None;
            }
            let k = c.order as usize;
            if k <= chain.len() {
                Some(Expr::jet(&JetCoordinate::new(chain[k - 1].clone(), 0)))
            } else {
                Some(Expr::jet(&JetCoordinate::new(chain[chain.len() - 1].clone(), (k - chain.len()) as u32)))
            }
        })
        .expect("rewriting jets is acyclic")
    };
    let mut equations: Vec<Expr> = sys.equations.iter().map(rewrite).collect();
    equations.extend(extra);
    ImplicitSystem {
        name: sys.name.clone(),
        states,
        m: sys.m,
        params: sys.params.clone(),
        equations,
        ledger: sys.ledger.clone(),
    }
}

/// The variational matrix `P(F)`: entry `(i, j)` is `sum_k dF_i/dx_j^(k) D^k`.
pub fn variational_matrix(sys: &ImplicitSystem) -> OreMatrix {
    let mut p = OreMatrix::zeros(sys.equations.len(), sys.n());
    for (i, f) in sys.equations.iter().enumerate() {
        let jets = f.jets();
        for (j, x) in sys.states.iter().enumerate() {
            let top = jets.iter().filter(|c| &c.var == x).map(|c| c.order).max();
            let Some(top) = top else { continue };
            let coeffs = (0..=top).map(|k| f.partial(&JetCoordinate::new(x.clone(), k))).collect();
            p.set(i, j, OrePoly::from_coeffs(coeffs));
        }
    }
    p
}
