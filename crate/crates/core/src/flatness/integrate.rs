//! Potentials of exact forms and the integrating matrix `M`.

use std::collections::BTreeSet;

use crate::jet_forms::{DiffForm, FormOperator};
use crate::ore::OrePoly;
use crate::poly_matrix::OreMatrix;
use crate::symexpr::{antiderivative, is_zero, AssumptionLedger, Expr, JetCoordinate, ZeroStatus};

use super::mu::{form_is_zero, operator_is_zero};
use super::x0::X0;
use super::{FlatnessError, Stage};

/// A function `psi` with `d(psi) = alpha`, found by iterated antiderivatives
/// over the coordinates in name order. No constant is added.
pub fn integrate_exact(alpha: &DiffForm, ledger: &AssumptionLedger) -> Result<Expr, FlatnessError> {
    if alpha.degree().is_some_and(|d| d != 1) {
        return Err(FlatnessError::NotClosed(format!("{alpha} (not a 1-form)")));
    }
    let mut coords: BTreeSet<JetCoordinate> = alpha.jets();
    for (b, _) in alpha.terms() {
        coords.extend(b.iter().cloned());
    }
    let mut psi = Expr::zero();
    for c in &coords {
        let r = &alpha.coefficient(std::slice::from_ref(c)) - &psi.partial(c);
        if r.is_zero_structural() || is_zero(&r, ledger) == ZeroStatus::Zero {
            continue;
        }
        psi = &psi + &antiderivative(&r, c).stage("integration")?;
    }
    let check = DiffForm::d_of(&psi).sub(alpha);
    if !form_is_zero(&check, ledger) {
        return Err(FlatnessError::NotClosed(alpha.to_string()));
    }
    Ok(psi)
}

/// A function whose partial derivatives along the given coordinates are the
/// given values; derivatives along other coordinates are unconstrained.
pub fn integrate_partial(parts: &[(JetCoordinate, Expr)], ledger: &AssumptionLedger) -> Result<Expr, FlatnessError> {
    let mut psi = Expr::zero();
    for (c, g) in parts {
        let r = g - &psi.partial(c);
        if r.is_zero_structural() || is_zero(&r, ledger) == ZeroStatus::Zero {
            continue;
        }
        psi = &psi + &antiderivative(&r, c).stage("integration")?;
    }
    for (c, g) in parts {
        if is_zero(&(g - &psi.partial(c)), ledger) != ZeroStatus::Zero {
            return Err(FlatnessError::NotClosed(format!("partial derivatives {:?}", parts)));
        }
    }
    Ok(psi)
}

/// Potentials of the restricted forms `M omega`.
pub fn integrate_flat_output(
    m: &OreMatrix,
    omega: &[DiffForm],
    x0: &X0,
    ledger: &AssumptionLedger,
) -> Result<Vec<Expr>, FlatnessError> {
    let kappa = FormOperator::from_matrix(m).apply(omega).stage("M omega")?;
    kappa
        .iter()
        .map(|k| {
            let k = x0.restrict_form(k).stage("restriction")?;
            if !form_is_zero(&x0.restrict_form(&k.exterior_d()).stage("restriction")?, ledger) {
                return Err(FlatnessError::NotClosed(k.to_string()));
            }
            integrate_exact(&k, ledger)
        })
        .collect()
}

fn topological_order(mu: &FormOperator) -> Option<Vec<usize>> {
    let m = mu.rows();
    let edge = |l: usize, j: usize| mu.entry(l, j).iter().any(|f| !f.is_zero());
    let mut order = Vec::new();
    let mut placed = vec![false; m];
    while order.len() < m {
        let next = (0..m).find(|&j| !placed[j] && (0..m).all(|l| placed[l] || !edge(l, j)))?;
        placed[next] = true;
        order.push(next);
    }
    Some(order)
}

/// A degree-zero `M` with `dgoth(M) = -M mu`, when `mu` is a single closed
/// 1-form or nilpotent with scalar entries. `Ok(None)` means outside that class.
pub fn solve_m(mu: &FormOperator, x0: &X0, ledger: &AssumptionLedger) -> Result<Option<OreMatrix>, FlatnessError> {
    let m = mu.rows();
    if operator_is_zero(mu, ledger) {
        return Ok(Some(OreMatrix::identity(m)));
    }
    if (0..m).any(|i| (0..m).any(|j| mu.entry(i, j).len() > 1)) {
        return Ok(None);
    }
    let one_form = |i: usize, j: usize| mu.entry(i, j).first().cloned().unwrap_or_else(DiffForm::zero);
    if m == 1 {
        let Ok(g) = integrate_exact(&one_form(0, 0), ledger) else {
            return Ok(None);
        };
        return Ok(Some(OreMatrix::from_scalars(vec![vec![Expr::exp(&g.neg())]]).stage("M")?));
    }
    let Some(order) = topological_order(mu) else {
        return Ok(None);
    };
    let mut rows = vec![vec![Expr::zero(); m]; m];
    for (i, r) in rows.iter_mut().enumerate() {
        r[i] = Expr::one();
    }
    for (pos, &j) in order.iter().enumerate() {
        for i in 0..m {
            if i == j {
                continue;
            }
            let mut alpha = DiffForm::zero();
            for &l in &order[..pos] {
                if !rows[i][l].is_zero_structural() {
                    alpha = alpha.sub(&one_form(l, j).scale(&rows[i][l]));
                }
            }
            let alpha = x0.restrict_form(&alpha).stage("restriction")?;
            if form_is_zero(&alpha, ledger) {
                continue;
            }
            match integrate_exact(&alpha, ledger) {
                Ok(v) => rows[i][j] = v,
                Err(_) => return Ok(None),
            }
        }
    }
    let mut out = OreMatrix::zeros(m, m);
    for (i, r) in rows.into_iter().enumerate() {
        for (j, e) in r.into_iter().enumerate() {
            out.set(i, j, OrePoly::scalar(e));
        }
    }
    Ok(Some(out))
}
