use num_traits::One;
use serde_json::{json, Value};

use crate::jet_forms::{DiffForm, FormOperator, JetMap};
use crate::poly_matrix::{OreMatrix, SmithResult};
use crate::symexpr::{Atom, AtomKind, Expr, Head, Monomial, Poly, Sym};

use super::inverse::CertificateCheck;

pub const CERTIFICATE_SCHEMA: u32 = 1;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Flat,
    NotFlat,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Flat => "Flat",
            Verdict::NotFlat => "NotFlat",
            Verdict::Inconclusive => "Inconclusive",
        }
    }
}

#[derive(Clone, Debug)]
pub enum NonFlatEvidence {
    /// `P(F)` has non-unit invariant factors.
    Torsion(Vec<String>),
    /// Single-input case with `d(omega) ^ omega != 0`.
    Frobenius(DiffForm),
}

impl NonFlatEvidence {
    pub fn to_json(&self) -> Value {
        match self {
            NonFlatEvidence::Torsion(d) => json!({"kind": "torsion", "invariant_factors": d}),
            NonFlatEvidence::Frobenius(f) => json!({"kind": "frobenius", "d_omega_wedge_omega": f.to_string()}),
        }
    }
}

#[derive(Clone, Debug)]
pub struct FlatnessCertificate {
    pub system: String,
    pub system_hash: Option<String>,
    pub verdict: Verdict,
    pub flat_output: Vec<Expr>,
    pub flat_names: Vec<Sym>,
    pub m: Option<OreMatrix>,
    pub mu: Option<FormOperator>,
    pub omega: Vec<DiffForm>,
    pub assumptions: Vec<Expr>,
    pub bounds: Value,
    pub u: Option<SmithResult>,
    pub q: Option<SmithResult>,
    pub trivialization: Option<JetMap>,
    pub check: Option<CertificateCheck>,
    pub sigma: Vec<usize>,
    pub static_linearizable: Option<bool>,
    pub evidence: Option<NonFlatEvidence>,
    pub residual: Vec<DiffForm>,
    pub notes: Vec<String>,
}

impl FlatnessCertificate {
    pub(crate) fn new(system: &str, verdict: Verdict) -> Self {
        FlatnessCertificate {
            system: system.to_string(),
            system_hash: None,
            verdict,
            flat_output: Vec::new(),
            flat_names: Vec::new(),
            m: None,
            mu: None,
            omega: Vec::new(),
            assumptions: Vec::new(),
            bounds: Value::Null,
            u: None,
            q: None,
            trivialization: None,
            check: None,
            sigma: Vec::new(),
            static_linearizable: None,
            evidence: None,
            residual: Vec::new(),
            notes: Vec::new(),
        }
    }

    /// `N = sum sigma_i`.
    pub fn n_total(&self) -> usize {
        self.sigma.iter().sum()
    }

    /// Each assumption as `e != 0`, using the numerator with a positive
    /// leading term and dropping repeats.
    pub fn assumption_texts(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for e in &self.assumptions {
            let Some(n) = assumption_form(e) else { continue };
            let t = format!("{n} != 0");
            if !out.contains(&t) {
                out.push(t);
            }
        }
        out
    }

    pub fn flat_output_text(&self) -> Vec<String> {
        self.flat_output.iter().map(pretty).collect()
    }

    pub fn to_json(&self) -> Value {
        let check = self.check.as_ref().map(|c| match c {
            CertificateCheck::Valid => json!({"status": "valid"}),
            CertificateCheck::ValidNumericOnly { max_residual } => {
                json!({"status": "valid_numeric_only", "max_residual": max_residual})
            }
            CertificateCheck::Invalid { max_residual } => json!({"status": "invalid", "max_residual": max_residual}),
        });
        json!({
            "schema": CERTIFICATE_SCHEMA,
            "system": self.system,
            "system_hash": self.system_hash,
            "verdict": self.verdict.as_str(),
            "flat_output": self.flat_output_text(),
            "flat_names": self.flat_names.iter().map(|s| s.to_string()).collect::<Vec<_>>(),
            "M": self.m.as_ref().map(|m| m.to_rows_text()),
            "mu": self.mu.as_ref().map(|m| operator_json(m)),
            "omega": self.omega.iter().map(|w| w.to_string()).collect::<Vec<_>>(),
            "assumptions": self.assumption_texts(),
            "bounds": self.bounds,
            "U": self.u.as_ref().map(|r| r.u.matrix().to_rows_text()),
            "Q": self.q.as_ref().map(|r| r.v.matrix().to_rows_text()),
            "actions": {
                "U": self.u.as_ref().map(|r| r.right_actions.iter().map(|a| a.to_json()).collect::<Vec<_>>()),
                "Q": self.q.as_ref().map(|r| r.left_actions.iter().map(|a| a.to_json()).collect::<Vec<_>>()),
            },
            "trivialization": self.trivialization.as_ref().map(|t| {
                t.components().map(|(k, v)| (k.to_string(), Value::String(pretty(v)))).collect::<serde_json::Map<_, _>>()
            }),
            "check": check,
            "sigma": self.sigma,
            "N": self.n_total(),
            "static_linearizable": self.static_linearizable,
            "evidence": self.evidence.as_ref().map(|e| e.to_json()),
            "residual": self.residual.iter().map(|w| w.to_string()).collect::<Vec<_>>(),
            "notes": self.notes,
        })
    }
}

/// The numerator of a nonvanishing assumption with a positive leading term,
/// or `None` when nothing is assumed.
pub fn assumption_form(e: &Expr) -> Option<Expr> {
    let n = e.numerator();
    let n = if n.leading_negative() { n.neg() } else { n };
    (!n.is_constant()).then_some(n)
}

fn operator_json(mu: &FormOperator) -> Value {
    let rows: Vec<Vec<Vec<String>>> = (0..mu.rows())
        .map(|i| {
            (0..mu.cols())
                .map(|j| mu.entry(i, j).iter().map(|f| f.to_string()).collect())
                .collect()
        })
        .collect();
    json!(rows)
}

fn cos_argument(den: &[(Poly, u32)]) -> Option<(Atom, Expr)> {
    let [(f, 1)] = den else { return None };
    let [(m, k)] = f.terms().collect::<Vec<_>>()[..] else {
        return None;
    };
    if !k.is_one() {
        return None;
    }
    let [(a, 1)] = m.factors() else { return None };
    match a.kind() {
        AtomKind::Func(Head::Cos, g) => Some((a.clone(), g.clone())),
        _ => None,
    }
}

fn has_function(e: &Expr) -> bool {
    e.atoms().iter().any(|a| matches!(a.kind(), AtomKind::Func(..)))
}

/// Text for an expression, writing `K sin(a)/cos(a)` as `K*tan(a)`.
pub fn pretty(e: &Expr) -> String {
    let Some((c, g)) = cos_argument(e.denom_factors()) else {
        return e.to_string();
    };
    let s = Expr::sin(&g).as_atom();
    let Some(s) = s else { return e.to_string() };
    let mut pieces: Vec<(Expr, bool)> = Vec::new();
    for (m, k) in e.numer().terms() {
        let (es, ec) = (m.exponent(&s), m.exponent(&c));
        let rest = |mm: Monomial| Expr::from_poly(Poly::term(k.clone(), mm));
        match (es, ec) {
            (0, ec) if ec >= 1 => pieces.push((rest(m.with_exponent(&c, ec - 1)), false)),
            (1, 0) => pieces.push((rest(m.with_exponent(&s, 0)), true)),
            _ => return e.to_string(),
        }
    }
    let mut plain = Expr::zero();
    let mut tan_coef = Expr::zero();
    for (p, t) in pieces {
        if t {
            tan_coef = &tan_coef + &p;
        } else {
            plain = &plain + &p;
        }
    }
    let tan = format!("tan({})", g);
    let mut parts: Vec<(bool, String)> = Vec::new();
    for (m, k) in plain.numer().terms() {
        let t = Expr::from_poly(Poly::term(k.clone(), m.clone()));
        parts.push((has_function(&t), t.to_string()));
    }
    if !plain.denom_factors().is_empty() {
        return e.to_string();
    }
    if !tan_coef.is_zero_structural() {
        let neg = tan_coef.leading_negative();
        let c = if neg { tan_coef.neg() } else { tan_coef.clone() };
        let body = if c.is_one() {
            tan.clone()
        } else if c.as_atom().is_some() || c.is_constant() {
            format!("{c}*{tan}")
        } else {
            format!("({c})*{tan}")
        };
        parts.push((true, if neg { format!("-{body}") } else { body }));
    }
    parts.sort_by_key(|(f, _)| *f);
    let mut out = String::new();
    for (i, (_, p)) in parts.iter().enumerate() {
        match (i, p.strip_prefix('-')) {
            (0, _) => out.push_str(p),
            (_, Some(rest)) => {
                out.push_str(" - ");
                out.push_str(rest);
            }
            (_, None) => {
                out.push_str(" + ");
                out.push_str(p);
            }
        }
    }
    if out.is_empty() {
        "0".into()
    } else {
        out
    }
}
