use serde_json::json;

use crate::jet_forms::{DiffForm, FormOperator, JetMap};
use crate::ore::OrePoly;
use crate::poly_matrix::{left_smith_basis, right_smith_basis, smith_decompose, OreMatrix, SmithOptions, SmithResult};
use crate::symexpr::{AssumptionLedger, Expr, JetCoordinate, NumericPoint, Sym};

use super::certificate::{FlatnessCertificate, NonFlatEvidence, Verdict};
use super::integrate::{integrate_flat_output, solve_m};
use super::linsolve::solve_linear;
use super::inverse::{invert_flat_output, verify_certificate};
use super::mu::{filter_mu, form_is_zero, solve_mu};
use super::system::{reduce_order, variational_matrix, ImplicitSystem};
use super::x0::X0;
use super::{FlatnessError, Stage};

#[derive(Clone, Debug)]
pub struct PipelineConfig {
    pub pivot_seed: u32,
    /// Highest power of `D` tried in `mu`.
    pub mu_degree: usize,
    /// Highest jet order any intermediate form may reach.
    pub jet_order: u32,
    /// Highest power of `D` allowed in `M`; only 0 is searched.
    pub m_degree: usize,
    pub base_point: Option<NumericPoint>,
    pub numeric_samples: usize,
    pub order_reduction: bool,
    pub seed: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            pivot_seed: 0,
            mu_degree: 1,
            jet_order: 6,
            m_degree: 0,
            base_point: None,
            numeric_samples: 5,
            order_reduction: false,
            seed: 0x00f1_a7e5,
        }
    }
}

#[derive(Clone, Debug)]
pub enum Controllability {
    Controllable,
    Torsion(Vec<OrePoly>),
}

pub fn controllability_check(p: &OreMatrix, ledger: &AssumptionLedger) -> Result<Controllability, FlatnessError> {
    let opts = SmithOptions {
        ledger: ledger.clone(),
        structured: true,
        ..Default::default()
    };
    let r = smith_decompose(p, &opts).stage("controllability")?;
    let bad: Vec<OrePoly> = r.delta.iter().filter(|d| !d.is_one()).cloned().collect();
    if bad.is_empty() && r.delta.len() == p.rows() {
        Ok(Controllability::Controllable)
    } else {
        Ok(Controllability::Torsion(bad))
    }
}

#[derive(Clone, Debug)]
pub struct OmegaData {
    pub u: SmithResult,
    pub q: SmithResult,
    /// `omega = Q_hat dx`, not yet restricted.
    pub omega: Vec<DiffForm>,
}

impl OmegaData {
    pub fn u_hat(&self) -> OreMatrix {
        let u = self.u.u.matrix();
        u.columns(u.cols() - self.omega.len()..u.cols())
    }

    pub fn q_hat(&self) -> OreMatrix {
        self.q.v.matrix().row_block(0..self.omega.len())
    }
}

fn apply_to_differentials(row: &[OrePoly], states: &[Sym]) -> DiffForm {
    let mut out = DiffForm::zero();
    for (p, x) in row.iter().zip(states) {
        for (k, c) in p.coeffs().iter().enumerate() {
            out = out.add(&DiffForm::term(c.clone(), vec![JetCoordinate::new(x.clone(), k as u32)]));
        }
    }
    out
}

/// `U` from a right Smith basis of `P(F)`, `Q` from a left basis of its last
/// `m` columns, and `omega` from the first `m` rows of `Q`.
pub fn build_omega(
    sys: &ImplicitSystem,
    p: &OreMatrix,
    pivot_seed: u32,
    structured: bool,
    ledger: &AssumptionLedger,
) -> Result<OmegaData, FlatnessError> {
    let m = sys.m;
    let n = sys.n();
    let opts = SmithOptions {
        pivot_seed,
        ledger: ledger.clone(),
        structured,
    };
    let u = right_smith_basis(p, &opts).stage("right Smith basis")?;
    let uhat = u.u.matrix().columns(n - m..n);
    let kernel = p.mul(&uhat).stage("kernel")?;
    if !kernel.is_zero() {
        return Err(FlatnessError::RankDeficient("P(F) U does not annihilate the last columns".into()));
    }
    let opts = SmithOptions {
        pivot_seed: 0,
        ledger: u.ledger.clone(),
        structured,
    };
    let q = left_smith_basis(&uhat, &opts).stage("left Smith basis")?;
    let omega = (0..m).map(|i| apply_to_differentials(q.v.matrix().row(i), &sys.states)).collect();
    Ok(OmegaData { u, q, omega })
}

#[derive(Clone, Debug)]
pub enum SingleInput {
    Integrable,
    Frobenius(DiffForm),
}

/// For one input, `d(omega) ^ omega` must vanish on the system.
pub fn single_input_check(omega: &DiffForm, x0: &X0, ledger: &AssumptionLedger) -> Result<SingleInput, FlatnessError> {
    let w = x0.restrict_form(omega).stage("restriction")?;
    let t = x0.restrict_form(&w.exterior_d().wedge(&w)).stage("restriction")?;
    if form_is_zero(&t, ledger) {
        Ok(SingleInput::Integrable)
    } else {
        Ok(SingleInput::Frobenius(t))
    }
}

fn jacobian_of_map(phi: &JetMap, states: &[Sym], names: &[Sym]) -> OreMatrix {
    let mut out = OreMatrix::zeros(states.len(), names.len());
    for (i, x) in states.iter().enumerate() {
        let e = phi.component(x, 0).unwrap_or_else(|| Expr::var(x.as_str()));
        let jets = e.jets();
        for (j, y) in names.iter().enumerate() {
            let top = jets.iter().filter(|c| &c.var == y).map(|c| c.order).max();
            let Some(top) = top else { continue };
            let coeffs = (0..=top).map(|k| e.partial(&JetCoordinate::new(y.clone(), k))).collect();
            out.set(i, j, OrePoly::from_coeffs(coeffs));
        }
    }
    out
}

/// `sigma_j` is the highest derivative of `y_j` needed by the states;
/// the system is static feedback linearizable when `n = m + sum sigma_j`.
pub fn static_linearizability(phi: &JetMap, states: &[Sym], names: &[Sym]) -> (Vec<usize>, bool) {
    let p = jacobian_of_map(phi, states, names);
    let sigma: Vec<usize> = (0..names.len()).map(|j| p.column_degree(j).unwrap_or(0)).collect();
    let total: usize = sigma.iter().sum();
    (sigma, states.len() == names.len() + total)
}

/// `M^-1 d(M omega)` wedged with all of `omega`, restricted to the system.
/// `M` must have scalar entries.
pub fn nonflat_residual(
    m: &OreMatrix,
    omega: &[DiffForm],
    x0: &X0,
    ledger: &AssumptionLedger,
) -> Result<Vec<DiffForm>, FlatnessError> {
    let kappa = FormOperator::from_matrix(m).apply(omega).stage("residual")?;
    let dk: Vec<DiffForm> = kappa
        .iter()
        .map(|k| x0.restrict_form(&k.exterior_d()))
        .collect::<Result<_, _>>()
        .stage("residual")?;
    let a: Vec<Vec<Expr>> = (0..m.rows())
        .map(|i| (0..m.cols()).map(|j| m.get(i, j).as_scalar()).collect::<Option<Vec<_>>>())
        .collect::<Option<_>>()
        .ok_or_else(|| FlatnessError::RankDeficient("M has entries of positive degree".into()))?;
    let mut z = vec![DiffForm::zero(); dk.len()];
    for (j, f) in dk.iter().enumerate() {
        let mut e = vec![Expr::zero(); dk.len()];
        e[j] = Expr::one();
        let col = solve_linear(&a, &e, ledger).ok_or_else(|| FlatnessError::RankDeficient("M is singular".into()))?;
        for (i, c) in col.values.iter().enumerate() {
            z[i] = z[i].add(&f.scale(c));
        }
    }
    let all = omega.iter().fold(DiffForm::scalar(Expr::one()), |acc, w| acc.wedge(w));
    z.iter().map(|f| x0.restrict_form(&f.wedge(&all)).stage("residual")).collect()
}

/// `omega` restricted to the system, with the manifold and the ledger it
/// was computed under.
pub fn restricted_omega(sys: &ImplicitSystem, cfg: &PipelineConfig) -> Result<(Vec<DiffForm>, X0, AssumptionLedger), FlatnessError> {
    let sys = if cfg.order_reduction { reduce_order(sys) } else { sys.clone() };
    sys.check_shape()?;
    let mut ledger = sys.ledger.clone();
    let p = variational_matrix(&sys);
    let data = build_omega(&sys, &p, cfg.pivot_seed, cfg.order_reduction, &ledger)?;
    ledger.merge(&data.q.ledger);
    let x0 = X0::new(&sys, &mut ledger)?;
    let omega = data
        .omega
        .iter()
        .map(|w| x0.restrict_form(w))
        .collect::<Result<_, _>>()
        .stage("restriction")?;
    Ok((omega, x0, ledger))
}

fn inconclusive(
    cert: &mut FlatnessCertificate,
    omega: &[DiffForm],
    x0: &X0,
    ledger: &AssumptionLedger,
    note: String,
) -> Result<(), FlatnessError> {
    cert.verdict = Verdict::Inconclusive;
    cert.residual = nonflat_residual(&OreMatrix::identity(omega.len()), omega, x0, ledger)?;
    cert.notes.push(note);
    Ok(())
}

/// The full test: controllability, `omega`, `mu`, `M`, the flat output, its
/// inverse and the certificate check.
pub fn flatness_pipeline(sys: &ImplicitSystem, cfg: &PipelineConfig) -> Result<FlatnessCertificate, FlatnessError> {
    let sys = if cfg.order_reduction { reduce_order(sys) } else { sys.clone() };
    sys.check_shape()?;
    let mut ledger = sys.ledger.clone();
    let mut cert = FlatnessCertificate::new(&sys.name, Verdict::Inconclusive);
    cert.bounds = json!({
        "mu_degree": cfg.mu_degree,
        "jet_order": cfg.jet_order,
        "m_degree": cfg.m_degree,
        "pivot_seed": cfg.pivot_seed,
        "order_reduction": cfg.order_reduction,
    });
    let p = variational_matrix(&sys);
    if let Controllability::Torsion(d) = controllability_check(&p, &ledger)? {
        cert.verdict = Verdict::NotFlat;
        cert.evidence = Some(NonFlatEvidence::Torsion(d.iter().map(|x| x.to_string()).collect()));
        cert.assumptions = ledger.entries().to_vec();
        return Ok(cert);
    }
    let data = build_omega(&sys, &p, cfg.pivot_seed, cfg.order_reduction, &ledger)?;
    ledger.merge(&data.q.ledger);
    let x0 = X0::new(&sys, &mut ledger)?;
    let omega: Vec<DiffForm> = data
        .omega
        .iter()
        .map(|w| x0.restrict_form(w))
        .collect::<Result<_, _>>()
        .stage("restriction")?;
    cert.omega = omega.clone();
    cert.u = Some(data.u.clone());
    cert.q = Some(data.q.clone());
    let finish = |cert: &mut FlatnessCertificate, ledger: &AssumptionLedger| {
        cert.assumptions = ledger.entries().to_vec();
    };

    if sys.m == 1 {
        if let SingleInput::Frobenius(t) = single_input_check(&omega[0], &x0, &ledger)? {
            cert.verdict = Verdict::NotFlat;
            cert.evidence = Some(NonFlatEvidence::Frobenius(t));
            finish(&mut cert, &ledger);
            return Ok(cert);
        }
    }

    let closed = omega
        .iter()
        .map(|w| x0.restrict_form(&w.exterior_d()).map(|d| form_is_zero(&d, &ledger)))
        .collect::<Result<Vec<_>, _>>()
        .stage("restriction")?
        .into_iter()
        .all(|b| b);
    let mut mu = None;
    if closed {
        mu = Some(FormOperator::zero(sys.m, sys.m, 1));
    } else {
        for k in 0..=cfg.mu_degree {
            let Some(family) = solve_mu(&omega, &x0, k, &ledger)? else {
                continue;
            };
            match filter_mu(&family, &x0, &ledger) {
                Ok(found) => {
                    mu = Some(found);
                    break;
                }
                Err(FlatnessError::NotClosed(_) | FlatnessError::BoundExhausted(_)) => continue,
                Err(e) => return Err(e),
            }
        }
    }
    let Some(mu) = mu else {
        inconclusive(&mut cert, &omega, &x0, &ledger, format!("no mu of degree <= {} closes the forms", cfg.mu_degree))?;
        finish(&mut cert, &ledger);
        return Ok(cert);
    };
    cert.mu = Some(mu.clone());
    let Some(m) = solve_m(&mu, &x0, &ledger)? else {
        inconclusive(&mut cert, &omega, &x0, &ledger, "no degree-0 M integrates mu".into())?;
        finish(&mut cert, &ledger);
        return Ok(cert);
    };
    cert.m = Some(m.clone());
    let psi = match integrate_flat_output(&m, &omega, &x0, &ledger) {
        Ok(psi) => psi,
        Err(e) => {
            inconclusive(&mut cert, &omega, &x0, &ledger, format!("M omega is not integrable: {e}"))?;
            finish(&mut cert, &ledger);
            return Ok(cert);
        }
    };
    cert.flat_output = psi.clone();
    let (phi, names) = match invert_flat_output(&sys, &psi, &mut ledger) {
        Ok(v) => v,
        Err(e) => {
            cert.notes.push(e.to_string());
            finish(&mut cert, &ledger);
            return Ok(cert);
        }
    };
    let check = verify_certificate(&sys, &psi, &phi, &names, cfg.numeric_samples, cfg.seed)?;
    let (sigma, linearizable) = static_linearizability(&phi, &sys.states, &names);
    cert.sigma = sigma;
    cert.static_linearizable = Some(linearizable);
    cert.flat_names = names;
    cert.trivialization = Some(phi);
    cert.verdict = if check.is_valid() { Verdict::Flat } else { Verdict::Inconclusive };
    cert.check = Some(check);
    finish(&mut cert, &ledger);
    Ok(cert)
}
