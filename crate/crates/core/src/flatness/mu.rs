//! Solving `d(omega) = mu omega` and imposing `dgoth(mu) = mu^2`.

use std::collections::{BTreeMap, BTreeSet};

use crate::jet_forms::{Basis, DiffForm, FormOperator};
use crate::symexpr::{is_zero, AssumptionLedger, Expr, JetCoordinate, Sym, ZeroStatus};

use super::integrate::integrate_partial;
use super::linsolve::solve_linear;
use super::x0::X0;
use super::{FlatnessError, Stage};

/// A coefficient of `mu` left undetermined by `d(omega) = mu omega`.
#[derive(Clone, Debug, PartialEq)]
pub struct FreeFunction {
    pub name: Sym,
    pub row: usize,
    pub col: usize,
    pub power: usize,
    pub coordinate: JetCoordinate,
}

#[derive(Clone, Debug)]
pub struct MuFamily {
    pub mu: FormOperator,
    pub free: Vec<FreeFunction>,
}

pub(crate) fn restrict_operator(x0: &X0, mu: &FormOperator) -> Result<FormOperator, FlatnessError> {
    let mut out = FormOperator::zero(mu.rows(), mu.cols(), mu.degree());
    for i in 0..mu.rows() {
        for j in 0..mu.cols() {
            let e = mu
                .entry(i, j)
                .iter()
                .map(|f| x0.restrict_form(f))
                .collect::<Result<Vec<_>, _>>()
                .stage("restriction")?;
            out.set(i, j, e);
        }
    }
    Ok(out)
}

pub(crate) fn max_order(forms: &[DiffForm]) -> u32 {
    forms.iter().filter_map(|f| f.max_order()).max().unwrap_or(0)
}

fn fresh_name(n: usize, taken: &BTreeSet<Sym>) -> Sym {
    let mut name = format!("eta{n}");
    while taken.contains(&Sym::new(&name)) {
        name.push('_');
    }
    Sym::new(&name)
}

/// Collect `sum_u x_u * columns[u] = target` into linear equations, one per basis.
fn equations(columns: &[DiffForm], target: &DiffForm) -> (Vec<Vec<Expr>>, Vec<Expr>) {
    let mut bases: BTreeSet<Basis> = target.terms().map(|(b, _)| b.clone()).collect();
    for c in columns {
        bases.extend(c.terms().map(|(b, _)| b.clone()));
    }
    let mut a = Vec::new();
    let mut rhs = Vec::new();
    for b in bases {
        a.push(columns.iter().map(|c| c.coefficient(&b)).collect());
        rhs.push(target.coefficient(&b));
    }
    (a, rhs)
}

/// The particular solution of `d(omega) = mu omega` with `mu` of degree at
/// most `degree` in `D`, together with the coefficients it leaves free.
/// `Ok(None)` means no `mu` of that degree exists.
pub fn solve_mu(
    omega: &[DiffForm],
    x0: &X0,
    degree: usize,
    ledger: &AssumptionLedger,
) -> Result<Option<MuFamily>, FlatnessError> {
    let m = omega.len();
    let order = max_order(omega) + degree as u32;
    let coords = x0.independent(order);
    let mut lifted: Vec<Vec<DiffForm>> = Vec::with_capacity(m);
    for w in omega {
        let mut per = vec![x0.restrict_form(w).stage("restriction")?];
        for _ in 0..degree {
            let next = x0.restrict_form(&per.last().unwrap().lie()).stage("restriction")?;
            per.push(next);
        }
        lifted.push(per);
    }
    let mut unknowns = Vec::new();
    for k in 0..=degree {
        for (j, per) in lifted.iter().enumerate() {
            for c in &coords {
                let col = DiffForm::differential(c).wedge(&per[k]);
                unknowns.push(((k, col.len(), j, c.clone()), col));
            }
        }
    }
    unknowns.sort_by(|a, b| a.0.cmp(&b.0));
    let columns: Vec<DiffForm> = unknowns.iter().map(|(_, c)| c.clone()).collect();

    let mut taken: BTreeSet<Sym> = BTreeSet::new();
    for w in omega {
        for (_, c) in w.terms() {
            taken.extend(c.params());
        }
    }
    let mut mu = FormOperator::zero(m, m, 1);
    let mut free = Vec::new();
    for (i, w) in omega.iter().enumerate() {
        let target = x0.restrict_form(&w.exterior_d()).stage("restriction")?;
        let (a, rhs) = equations(&columns, &target);
        let Some(sol) = solve_linear(&a, &rhs, ledger) else {
            return Ok(None);
        };
        let mut entries: BTreeMap<(usize, usize), Vec<DiffForm>> = BTreeMap::new();
        for (((k, _, j, c), _), v) in unknowns.iter().zip(&sol.values) {
            if v.is_zero_structural() {
                continue;
            }
            let e = entries.entry((*j, *k)).or_default();
            e.push(DiffForm::term(v.clone(), vec![c.clone()]));
        }
        for (&(j, k), terms) in &entries {
            let mut acc = terms.iter().fold(DiffForm::zero(), |s, t| s.add(t));
            for ((kk, len, jj, c), _) in &unknowns {
                if (*kk, *jj) != (k, j) || *len != 0 {
                    continue;
                }
                let name = fresh_name(free.len() + 1, &taken);
                taken.insert(name.clone());
                acc = acc.add(&DiffForm::term(Expr::param(name.as_str()), vec![c.clone()]));
                free.push(FreeFunction {
                    name,
                    row: i,
                    col: j,
                    power: k,
                    coordinate: c.clone(),
                });
            }
            let mut entry = mu.entry(i, j).to_vec();
            if entry.len() <= k {
                entry.resize(k + 1, DiffForm::zero());
            }
            entry[k] = acc;
            mu.set(i, j, entry);
        }
    }
    Ok(Some(MuFamily { mu, free }))
}

fn substitute_params(mu: &FormOperator, values: &BTreeMap<Sym, Expr>) -> Result<FormOperator, FlatnessError> {
    let mut out = FormOperator::zero(mu.rows(), mu.cols(), mu.degree());
    for i in 0..mu.rows() {
        for j in 0..mu.cols() {
            let e = mu
                .entry(i, j)
                .iter()
                .map(|f| {
                    f.map_coefficients(|c| {
                        c.map_atoms(&|a| match a.kind() {
                            crate::symexpr::AtomKind::Param(p) => values.get(p).cloned(),
                            _ => None,
                        })
                    })
                })
                .collect::<Result<Vec<_>, _>>()
                .stage("substitution")?;
            out.set(i, j, e);
        }
    }
    Ok(out)
}

/// `dgoth(mu) - mu^2`, restricted.
pub(crate) fn structure_defect(mu: &FormOperator, x0: &X0) -> Result<FormOperator, FlatnessError> {
    let sq = mu.compose(mu).stage("mu^2")?;
    let raw = mu.dgoth().sub(&sq).stage("mu^2")?;
    restrict_operator(x0, &raw)
}

/// Fix the free coefficients of a family so that `dgoth(mu) = mu^2`.
pub fn filter_mu(family: &MuFamily, x0: &X0, ledger: &AssumptionLedger) -> Result<FormOperator, FlatnessError> {
    let defect = structure_defect(&family.mu, x0)?;
    if family.free.is_empty() {
        return match defect.zero_status(ledger) {
            ZeroStatus::Zero => Ok(family.mu.clone()),
            _ => Err(FlatnessError::NotClosed("mu".into())),
        };
    }
    let order = family
        .mu
        .max_order()
        .unwrap_or(0)
        .max(family.free.iter().map(|f| f.coordinate.order).max().unwrap_or(0));
    let coords = x0.independent(order);
    // unknowns g[p][c] with d(eta_p) = sum_c g[p][c] dc
    let mut columns_by_slot: BTreeMap<(usize, usize, usize), Vec<(usize, DiffForm)>> = BTreeMap::new();
    let mut n_unknowns = 0;
    let mut index = Vec::new();
    for (p, f) in family.free.iter().enumerate() {
        for c in &coords {
            let col = DiffForm::differential(c).wedge(&DiffForm::differential(&f.coordinate));
            columns_by_slot.entry((f.row, f.col, f.power)).or_default().push((n_unknowns, col));
            index.push((p, c.clone()));
            n_unknowns += 1;
        }
    }
    let mut a: Vec<Vec<Expr>> = Vec::new();
    let mut rhs = Vec::new();
    for i in 0..defect.rows() {
        for j in 0..defect.cols() {
            let entry = defect.entry(i, j);
            let top = family.free.iter().map(|f| f.power + 1).max().unwrap_or(0);
            for k in 0..entry.len().max(top) {
                let target = entry.get(k).cloned().unwrap_or_else(DiffForm::zero);
                let cols = columns_by_slot.get(&(i, j, k));
                let mut bases: BTreeSet<Basis> = target.terms().map(|(b, _)| b.clone()).collect();
                if let Some(cols) = cols {
                    for (_, c) in cols {
                        bases.extend(c.terms().map(|(b, _)| b.clone()));
                    }
                }
                for b in bases {
                    let mut row = vec![Expr::zero(); n_unknowns];
                    if let Some(cols) = cols {
                        for (u, c) in cols {
                            row[*u] = c.coefficient(&b);
                        }
                    }
                    a.push(row);
                    rhs.push(target.coefficient(&b).neg());
                }
            }
        }
    }
    let Some(sol) = solve_linear(&a, &rhs, ledger) else {
        return Err(FlatnessError::NotClosed("mu".into()));
    };
    let names: BTreeSet<Sym> = family.free.iter().map(|f| f.name.clone()).collect();
    if sol.values.iter().any(|v| v.params().iter().any(|p| names.contains(p))) {
        return Err(FlatnessError::BoundExhausted("free coefficients of mu satisfy a nonlinear system".into()));
    }
    let free_cols: BTreeSet<usize> = sol.free.iter().copied().collect();
    let mut values = BTreeMap::new();
    for (p, f) in family.free.iter().enumerate() {
        let parts: Vec<(JetCoordinate, Expr)> = index
            .iter()
            .zip(&sol.values)
            .enumerate()
            .filter(|(u, ((q, _), _))| *q == p && !free_cols.contains(u))
            .map(|(_, ((_, c), v))| (c.clone(), v.clone()))
            .collect();
        let eta = integrate_partial(&parts, ledger)
            .map_err(|e| FlatnessError::BoundExhausted(format!("cannot integrate d({}): {e}", f.name)))?;
        values.insert(f.name.clone(), eta);
    }
    let mu = substitute_params(&family.mu, &values)?;
    match structure_defect(&mu, x0)?.zero_status(ledger) {
        ZeroStatus::Zero => Ok(mu),
        _ => Err(FlatnessError::NotClosed("mu".into())),
    }
}

pub(crate) fn operator_is_zero(mu: &FormOperator, ledger: &AssumptionLedger) -> bool {
    mu.is_zero() || mu.zero_status(ledger) == ZeroStatus::Zero
}

pub(crate) fn form_is_zero(f: &DiffForm, ledger: &AssumptionLedger) -> bool {
    f.is_zero() || f.terms().all(|(_, c)| is_zero(c, ledger) == ZeroStatus::Zero)
}
