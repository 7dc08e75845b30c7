use std::fmt;

use crate::poly_matrix::OreMatrix;
use crate::symexpr::{AssumptionLedger, Expr, ZeroStatus};

use super::{DiffForm, JetError};

fn binomial(n: usize, k: usize) -> i64 {
    let mut r: i64 = 1;
    for i in 0..k {
        r = r * (n - i) as i64 / (i + 1) as i64;
    }
    r
}

/// Entry `sum_k eta_k ^ D^k`, stored as the list of `eta_k`.
pub type OperatorEntry = Vec<DiffForm>;

fn trim(mut e: OperatorEntry) -> OperatorEntry {
    while e.last().is_some_and(|f| f.is_zero()) {
        e.pop();
    }
    e
}

/// A matrix of operators `kappa -> sum_k eta_k ^ L^k(kappa)` of form degree `q`.
#[derive(Clone, PartialEq, Eq)]
pub struct FormOperator {
    rows: usize,
    cols: usize,
    degree: usize,
    entries: Vec<OperatorEntry>,
}

impl FormOperator {
    pub fn zero(rows: usize, cols: usize, degree: usize) -> Self {
        FormOperator {
            rows,
            cols,
            degree,
            entries: vec![Vec::new(); rows * cols],
        }
    }

    pub fn identity(m: usize) -> Self {
        let mut out = Self::zero(m, m, 0);
        for i in 0..m {
            out.set(i, i, vec![DiffForm::scalar(Expr::one())]);
        }
        out
    }

    /// A matrix over the Ore ring as an operator of degree 0.
    pub fn from_matrix(h: &OreMatrix) -> Self {
        let mut out = Self::zero(h.rows(), h.cols(), 0);
        for i in 0..h.rows() {
            for j in 0..h.cols() {
                let e = h.get(i, j).coeffs().iter().map(|c| DiffForm::scalar(c.clone())).collect();
                out.set(i, j, e);
            }
        }
        out
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn entry(&self, i: usize, j: usize) -> &[DiffForm] {
        &self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, e: OperatorEntry) {
        self.entries[i * self.cols + j] = trim(e);
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|e| e.is_empty())
    }

    fn check_shape(&self, other: &FormOperator) -> Result<(), JetError> {
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return Err(JetError::Dimension(format!(
                "{}x{} against {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &FormOperator) -> Result<FormOperator, JetError> {
        self.check_shape(other)?;
        let mut out = self.clone();
        for (idx, e) in other.entries.iter().enumerate() {
            let mine = &mut out.entries[idx];
            for (k, f) in e.iter().enumerate() {
                if mine.len() <= k {
                    mine.resize(k + 1, DiffForm::zero());
                }
                mine[k] = mine[k].add(f);
            }
            *mine = trim(std::mem::take(mine));
        }
        if self.is_zero() {
            out.degree = other.degree;
        }
        Ok(out)
    }

    pub fn neg(&self) -> FormOperator {
        FormOperator {
            entries: self.entries.iter().map(|e| e.iter().map(|f| f.neg()).collect()).collect(),
            ..self.clone()
        }
    }

    pub fn sub(&self, other: &FormOperator) -> Result<FormOperator, JetError> {
        self.add(&other.neg())
    }

    /// `(mu kappa)_i = sum_j sum_k eta_k^{ij} ^ L^k(kappa_j)`.
    pub fn apply(&self, kappa: &[DiffForm]) -> Result<Vec<DiffForm>, JetError> {
        if kappa.len() != self.cols {
            return Err(JetError::Dimension(format!("{} columns against {} forms", self.cols, kappa.len())));
        }
        let maxk = self.entries.iter().map(|e| e.len()).max().unwrap_or(0);
        let mut lies: Vec<Vec<DiffForm>> = kappa.iter().map(|k| vec![k.clone()]).collect();
        for l in lies.iter_mut() {
            for k in 1..maxk {
                let next = l[k - 1].lie();
                l.push(next);
            }
        }
        Ok((0..self.rows)
            .map(|i| {
                let mut acc = DiffForm::zero();
                for (j, lj) in lies.iter().enumerate() {
                    for (k, eta) in self.entry(i, j).iter().enumerate() {
                        if !eta.is_zero() {
                            acc = acc.add(&eta.wedge(&lj[k]));
                        }
                    }
                }
                acc
            })
            .collect())
    }

    /// `(eta ^ D^a)(zeta ^ D^b) = sum_r C(a, r) eta ^ L^r(zeta) ^ D^(a - r + b)`.
    pub fn compose(&self, other: &FormOperator) -> Result<FormOperator, JetError> {
        if self.cols != other.rows {
            return Err(JetError::Dimension(format!(
                "{}x{} after {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = FormOperator::zero(self.rows, other.cols, self.degree + other.degree);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc: OperatorEntry = Vec::new();
                for l in 0..self.cols {
                    let a_e = self.entry(i, l);
                    let b_e = other.entry(l, j);
                    if a_e.is_empty() || b_e.is_empty() {
                        continue;
                    }
                    for (b, zeta) in b_e.iter().enumerate() {
                        if zeta.is_zero() {
                            continue;
                        }
                        let mut lz = zeta.clone();
                        let mut lies = vec![lz.clone()];
                        for _ in 1..a_e.len() {
                            lz = lz.lie();
                            lies.push(lz.clone());
                        }
                        for (a, eta) in a_e.iter().enumerate() {
                            if eta.is_zero() {
                                continue;
                            }
                            for (r, lr) in lies.iter().enumerate().take(a + 1) {
                                let term = eta.wedge(lr).scale(&Expr::int(binomial(a, r)));
                                let k = a - r + b;
                                if acc.len() <= k {
                                    acc.resize(k + 1, DiffForm::zero());
                                }
                                acc[k] = acc[k].add(&term);
                            }
                        }
                    }
                }
                out.set(i, j, acc);
            }
        }
        Ok(out)
    }

    /// Entrywise exterior derivative of the `eta_k`.
    pub fn dgoth(&self) -> FormOperator {
        FormOperator {
            rows: self.rows,
            cols: self.cols,
            degree: self.degree + 1,
            entries: self
                .entries
                .iter()
                .map(|e| trim(e.iter().map(|f| f.exterior_d()).collect()))
                .collect(),
        }
    }

    pub fn zero_status(&self, ledger: &AssumptionLedger) -> ZeroStatus {
        let mut unknown = false;
        for f in self.entries.iter().flatten() {
            match f.zero_status(ledger) {
                ZeroStatus::NonZero => return ZeroStatus::NonZero,
                ZeroStatus::Unknown => unknown = true,
                ZeroStatus::Zero => {}
            }
        }
        if unknown {
            ZeroStatus::Unknown
        } else {
            ZeroStatus::Zero
        }
    }

    pub fn max_order(&self) -> Option<u32> {
        self.entries.iter().flatten().filter_map(|f| f.max_order()).max()
    }
}

fn entry_text(e: &[DiffForm]) -> String {
    let parts: Vec<String> = e
        .iter()
        .enumerate()
        .filter(|(_, f)| !f.is_zero())
        .map(|(k, f)| match k {
            0 => format!("({})", f),
            1 => format!("({})^D", f),
            _ => format!("({})^D^{}", f, k),
        })
        .collect();
    if parts.is_empty() {
        "0".into()
    } else {
        parts.join(" + ")
    }
}

impl fmt::Display for FormOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|j| entry_text(self.entry(i, j))).collect();
            writeln!(f, "{}", row.join("; "))?;
        }
        Ok(())
    }
}

impl fmt::Debug for FormOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FormOperator(q={}) {}", self.degree, self)
    }
}

/// `dgoth(H) kappa = d(H kappa) - H d(kappa)`.
pub fn dgoth_matrix(h: &OreMatrix, kappa: &[DiffForm]) -> Result<Vec<DiffForm>, JetError> {
    let op = FormOperator::from_matrix(h);
    let hk = op.apply(kappa)?;
    let dk: Vec<DiffForm> = kappa.iter().map(|k| k.exterior_d()).collect();
    let hdk = op.apply(&dk)?;
    Ok(hk.iter().zip(&hdk).map(|(a, b)| a.exterior_d().sub(b)).collect())
}

/// The degree-one operator `dgoth(H)`.
pub fn dgoth_matrix_operator(h: &OreMatrix) -> FormOperator {
    FormOperator::from_matrix(h).dgoth()
}

/// `dgoth(mu) kappa = d(mu kappa) - (-1)^q mu d(kappa)`.
pub fn dgoth_operator(mu: &FormOperator) -> FormOperator {
    mu.dgoth()
}

pub fn operator_compose(mu: &FormOperator, nu: &FormOperator) -> Result<FormOperator, JetError> {
    mu.compose(nu)
}

/// Apply `dgoth(mu)` through its definition, for checking the entrywise rule.
pub fn dgoth_apply(mu: &FormOperator, kappa: &[DiffForm]) -> Result<Vec<DiffForm>, JetError> {
    let mk = mu.apply(kappa)?;
    let dk: Vec<DiffForm> = kappa.iter().map(|k| k.exterior_d()).collect();
    let mdk = mu.apply(&dk)?;
    let sign = if mu.degree() % 2 == 0 { 1 } else { -1 };
    Ok(mk
        .iter()
        .zip(&mdk)
        .map(|(a, b)| a.exterior_d().sub(&b.scale(&Expr::int(sign))))
        .collect())
}
