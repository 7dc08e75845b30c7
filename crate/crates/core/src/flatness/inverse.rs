//! Expressing the states through a flat output and checking the result.

use std::collections::BTreeSet;

use rand::rngs::StdRng;
use rand::SeedableRng;

use crate::jet_forms::JetMap;
use crate::symexpr::{sample_point, AssumptionLedger, Expr, JetCoordinate, Sym};

use super::solve::solve_for;
use super::system::ImplicitSystem;
use super::{FlatnessError, Stage};

const NUMERIC_TOLERANCE: f64 = 1e-7;

/// Names for the flat output components, avoiding clashes with the system.
pub(crate) fn flat_names(sys: &ImplicitSystem) -> Vec<Sym> {
    let taken: BTreeSet<&str> = sys.states.iter().chain(&sys.params).map(|s| s.as_str()).collect();
    let clash = (1..=sys.m).any(|i| taken.contains(format!("y{i}").as_str()));
    let prefix = if clash { "flat_y" } else { "y" };
    (1..=sys.m).map(|i| Sym::new(&format!("{prefix}{i}"))).collect()
}

fn substitute_state(e: &Expr, s: &Sym, value: &Expr) -> Result<Expr, FlatnessError> {
    e.map_atoms(&|a| match a.as_jet() {
        Some(c) if &c.var == s => Some(value.total_derivative_n(c.order)),
        _ => None,
    })
    .stage("inversion")
}

/// Solve `psi(x) = y` together with the system equations for the states.
pub fn invert_flat_output(
    sys: &ImplicitSystem,
    psi: &[Expr],
    ledger: &mut AssumptionLedger,
) -> Result<(JetMap, Vec<Sym>), FlatnessError> {
    let names = flat_names(sys);
    let mut eqs: Vec<Expr> = psi.iter().zip(&names).map(|(p, y)| p - &Expr::var(y.as_str())).collect();
    eqs.extend(sys.equations.iter().cloned());
    let mut unknown: Vec<Sym> = sys.states.clone();
    let mut solved: Vec<(Sym, Expr)> = Vec::new();
    while !unknown.is_empty() {
        let mut best: Option<(_, usize, usize, super::Solved)> = None;
        for (r, e) in eqs.iter().enumerate() {
            for (si, s) in unknown.iter().enumerate() {
                let Some(sol) = solve_for(e, &JetCoordinate::new(s.clone(), 0), ledger) else {
                    continue;
                };
                let vj = sol.value.jets();
                let open = unknown.iter().filter(|u| *u != s && vj.iter().any(|c| &c.var == *u)).count();
                let key = (sol.angular, open, sol.pivot.size(), r, si);
                if best.as_ref().map_or(true, |(k, ..)| key < *k) {
                    best = Some((key, r, si, sol));
                }
            }
        }
        let Some((_, r, si, sol)) = best else {
            let rest: Vec<String> = unknown.iter().map(|s| s.to_string()).collect();
            return Err(FlatnessError::Inversion(format!("no equation determines {}", rest.join(", "))));
        };
        let s = unknown.remove(si);
        eqs.remove(r);
        ledger.assume_nonzero(&sol.pivot);
        for e in eqs.iter_mut() {
            *e = substitute_state(e, &s, &sol.value)?;
        }
        for (_, v) in solved.iter_mut() {
            *v = substitute_state(v, &s, &sol.value)?;
        }
        solved.push((s, sol.value));
    }
    let map = JetMap::new(solved.iter().map(|(s, v)| (s.as_str(), v.clone())));
    Ok((map, names))
}

#[derive(Clone, Debug, PartialEq)]
pub enum CertificateCheck {
    /// Every identity holds exactly.
    Valid,
    /// Some identity is only confirmed at random points.
    ValidNumericOnly { max_residual: f64 },
    Invalid { max_residual: f64 },
}

impl CertificateCheck {
    pub fn is_valid(&self) -> bool {
        !matches!(self, CertificateCheck::Invalid { .. })
    }
}

/// Check `F(phi) = 0` and `psi(phi) = y`, symbolically and at `samples`
/// random flat-output jets.
pub fn verify_certificate(
    sys: &ImplicitSystem,
    psi: &[Expr],
    phi: &JetMap,
    names: &[Sym],
    samples: usize,
    seed: u64,
) -> Result<CertificateCheck, FlatnessError> {
    let mut residuals = Vec::new();
    for f in &sys.equations {
        residuals.push(phi.pull_expr(f).stage("verification")?);
    }
    for (p, y) in psi.iter().zip(names) {
        residuals.push(&phi.pull_expr(p).stage("verification")? - &Expr::var(y.as_str()));
    }
    let exact = residuals.iter().all(|r| r.is_zero_structural());
    let mut rng = StdRng::seed_from_u64(seed);
    let refs: Vec<&Expr> = residuals.iter().collect();
    let mut max_residual: f64 = 0.0;
    let mut taken = 0;
    let empty = AssumptionLedger::new();
    for _ in 0..samples.max(1) * 20 {
        if taken == samples {
            break;
        }
        let Some(pt) = sample_point(&refs, &empty, &mut rng) else {
            break;
        };
        let vals: Result<Vec<f64>, _> = residuals.iter().map(|r| r.eval(&pt)).collect();
        match vals {
            Ok(v) if v.iter().all(|x| x.is_finite()) => {
                taken += 1;
                max_residual = v.iter().fold(max_residual, |m, x| m.max(x.abs()));
            }
            _ => {}
        }
    }
    if exact {
        return Ok(CertificateCheck::Valid);
    }
    if taken < samples || max_residual > NUMERIC_TOLERANCE {
        return Ok(CertificateCheck::Invalid { max_residual });
    }
    Ok(CertificateCheck::ValidNumericOnly { max_residual })
}
