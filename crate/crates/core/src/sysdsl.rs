//! Text format for control systems.
//!
//! ```text
//! system car explicit
//! states x, y, theta
//! inputs u, phi
//! params l
//! equations
//!   dot(x) = u*cos(theta)
//!   dot(y) = u*sin(theta)
//!   dot(theta) = u/l*tan(phi)
//! assume cos(phi) != 0
//! point x = 0.1, y = 0.2, theta = 0.3
//! options pivot_seed = 1
//! ```
//!
//! Implicit systems declare their number of free variables in the header,
//! `system pendulum implicit m = 2`, and have no `inputs` line. Keyword lines
//! start in the first column; indented lines continue the previous block.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde_json::Value;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::flatness::{
    assumption_form, implicitize, reduce_order, verify_certificate, CertificateCheck, ExplicitSystem, FlatnessError, ImplicitSystem,
    PipelineConfig,
};
use crate::jet_forms::JetMap;
use crate::symexpr::{parse_expr, AssumptionLedger, Expr, ExprContext, ExprError, NumericPoint, Span, Sym};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    pub span: Span,
    pub msg: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.span, self.msg)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("{}", .0.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("\n"))]
pub struct DslError(pub Vec<Diagnostic>);

impl DslError {
    pub fn messages(&self) -> impl Iterator<Item = &str> {
        self.0.iter().map(|d| d.msg.as_str())
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CertificateError {
    #[error("the certificate was issued for a different system (hash {0})")]
    DifferentSystem(String),
    #[error("only Flat certificates carry a trivialization to verify")]
    NotFlat,
    #[error("malformed certificate: {0}")]
    Malformed(String),
    #[error(transparent)]
    Flatness(#[from] FlatnessError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SystemKind {
    Explicit,
    Implicit { m: usize },
}

#[derive(Clone, Debug)]
pub struct Decl {
    pub name: Sym,
    pub span: Span,
}

#[derive(Clone, Debug)]
pub struct Equation {
    /// `lhs - rhs`.
    pub expr: Expr,
    pub span: Span,
}

#[derive(Clone, Debug)]
pub struct Assumption {
    pub expr: Expr,
    pub span: Span,
}

#[derive(Clone, Debug)]
pub struct Point {
    pub values: NumericPoint,
    pub span: Span,
}

/// Settings from the `options` block. Unset fields keep the pipeline default.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DslOptions {
    pub pivot_seed: Option<u32>,
    pub mu_degree: Option<usize>,
    pub jet_order: Option<u32>,
    pub m_degree: Option<usize>,
    pub numeric_samples: Option<usize>,
    pub order_reduction: Option<bool>,
    pub seed: Option<u64>,
}

const OPTION_KEYS: &[&str] = &[
    "jet_order",
    "m_degree",
    "mu_degree",
    "order_reduction",
    "pivot_seed",
    "seed",
    "verify_numeric_samples",
];

impl DslOptions {
    fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<Option<T>, String> {
            v.parse().map(Some).map_err(|_| format!("option `{key}` needs a non-negative integer, got `{v}`"))
        }
        match key {
            "pivot_seed" => self.pivot_seed = num(key, value)?,
            "mu_degree" => self.mu_degree = num(key, value)?,
            "jet_order" => self.jet_order = num(key, value)?,
            "m_degree" => self.m_degree = num(key, value)?,
            "verify_numeric_samples" => self.numeric_samples = num(key, value)?,
            "seed" => self.seed = num(key, value)?,
            "order_reduction" => {
                self.order_reduction = Some(match value {
                    "true" => true,
                    "false" => false,
                    _ => return Err(format!("option `{key}` needs `true` or `false`, got `{value}`")),
                })
            }
            _ => return Err(format!("unknown option `{key}`")),
        }
        Ok(())
    }

    fn entries(&self) -> Vec<(&'static str, String)> {
        let mut out = Vec::new();
        let mut push = |k: &'static str, v: Option<String>| {
            if let Some(v) = v {
                out.push((k, v));
            }
        };
        push("jet_order", self.jet_order.map(|v| v.to_string()));
        push("m_degree", self.m_degree.map(|v| v.to_string()));
        push("mu_degree", self.mu_degree.map(|v| v.to_string()));
        push("order_reduction", self.order_reduction.map(|v| v.to_string()));
        push("pivot_seed", self.pivot_seed.map(|v| v.to_string()));
        push("seed", self.seed.map(|v| v.to_string()));
        push("verify_numeric_samples", self.numeric_samples.map(|v| v.to_string()));
        debug_assert!(out.iter().all(|(k, _)| OPTION_KEYS.contains(k)));
        out
    }

    pub fn apply(&self, cfg: &mut PipelineConfig) {
        if let Some(v) = self.pivot_seed {
            cfg.pivot_seed = v;
        }
        if let Some(v) = self.mu_degree {
            cfg.mu_degree = v;
        }
        if let Some(v) = self.jet_order {
            cfg.jet_order = v;
        }
        if let Some(v) = self.m_degree {
            cfg.m_degree = v;
        }
        if let Some(v) = self.numeric_samples {
            cfg.numeric_samples = v;
        }
        if let Some(v) = self.order_reduction {
            cfg.order_reduction = v;
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
    }
}

#[derive(Clone, Debug)]
pub struct SystemSource {
    pub name: String,
    pub kind: SystemKind,
    pub states: Vec<Decl>,
    pub inputs: Vec<Decl>,
    pub params: Vec<Decl>,
    pub equations: Vec<Equation>,
    pub assumptions: Vec<Assumption>,
    pub points: Vec<Point>,
    pub options: DslOptions,
}

fn names(d: &[Decl]) -> Vec<Sym> {
    d.iter().map(|d| d.name.clone()).collect()
}

impl SystemSource {
    pub fn state_names(&self) -> Vec<Sym> {
        names(&self.states)
    }

    pub fn input_names(&self) -> Vec<Sym> {
        names(&self.inputs)
    }

    pub fn param_names(&self) -> Vec<Sym> {
        names(&self.params)
    }

    /// Hex SHA-256 of the canonical text.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_string().as_bytes()))
    }

    fn ledger(&self) -> AssumptionLedger {
        let mut l = AssumptionLedger::new();
        for a in &self.assumptions {
            l.assume_nonzero(&a.expr);
        }
        l
    }

    pub fn explicit(&self) -> Option<ExplicitSystem> {
        (self.kind == SystemKind::Explicit).then(|| ExplicitSystem {
            name: self.name.clone(),
            states: self.state_names(),
            inputs: self.input_names(),
            params: self.param_names(),
            equations: self.equations.iter().map(|e| e.expr.clone()).collect(),
            ledger: self.ledger(),
        })
    }

    /// The implicit form, eliminating inputs for explicit systems.
    pub fn to_implicit(&self) -> Result<ImplicitSystem, FlatnessError> {
        match self.kind {
            SystemKind::Explicit => implicitize(&self.explicit().expect("explicit")),
            SystemKind::Implicit { m } => Ok(ImplicitSystem {
                name: self.name.clone(),
                states: self.state_names(),
                m,
                params: self.param_names(),
                equations: self.equations.iter().map(|e| e.expr.clone()).collect(),
                ledger: self.ledger(),
            }),
        }
    }

    pub fn context(&self) -> ExprContext {
        ExprContext {
            params: self.params.iter().map(|d| d.name.to_string()).collect(),
            vars: Some(self.states.iter().chain(&self.inputs).map(|d| d.name.to_string()).collect()),
        }
    }

    /// A point such as `x = 0.1, dot(y) = 2, l = 1` over this system's names.
    pub fn parse_point(&self, text: &str) -> Result<NumericPoint, DslError> {
        let mut ps = Parser { diags: Vec::new() };
        let p = ps.point(Piece { text, line: 1, col: 1 }.trim(), &self.context());
        if ps.diags.is_empty() {
            Ok(p)
        } else {
            Err(DslError(ps.diags))
        }
    }

    /// Source text for an implicit system, keeping its assumptions.
    pub fn from_implicit(sys: &ImplicitSystem) -> SystemSource {
        let decl = |s: &Sym| Decl {
            name: s.clone(),
            span: Span::default(),
        };
        SystemSource {
            name: sys.name.clone(),
            kind: SystemKind::Implicit { m: sys.m },
            states: sys.states.iter().map(decl).collect(),
            inputs: Vec::new(),
            params: sys.params.iter().map(decl).collect(),
            equations: sys.equations.iter().map(|e| Equation { expr: e.clone(), span: Span::default() }).collect(),
            assumptions: {
                let mut seen = Vec::new();
                for e in sys.ledger.entries().iter().filter_map(assumption_form) {
                    if !seen.contains(&e) {
                        seen.push(e);
                    }
                }
                seen.into_iter().map(|expr| Assumption { expr, span: Span::default() }).collect()
            },
            points: Vec::new(),
            options: DslOptions::default(),
        }
    }

    /// Defaults overridden by the `options` block; the first point becomes
    /// the base point.
    pub fn pipeline_config(&self) -> PipelineConfig {
        let mut cfg = PipelineConfig::default();
        self.options.apply(&mut cfg);
        cfg.base_point = self.points.first().map(|p| p.values.clone());
        cfg
    }
}

fn strings(v: &Value, key: &str) -> Result<Vec<String>, CertificateError> {
    v[key]
        .as_array()
        .ok_or_else(|| CertificateError::Malformed(format!("no `{key}` list")))?
        .iter()
        .map(|s| s.as_str().map(String::from).ok_or_else(|| CertificateError::Malformed(format!("`{key}` holds a non-string"))))
        .collect()
}

impl SystemSource {
    /// Re-check a JSON certificate against this system. `samples` overrides
    /// the configured number of numeric samples.
    pub fn verify_json(&self, cert: &Value, samples: Option<usize>) -> Result<CertificateCheck, CertificateError> {
        if let Some(h) = cert["system_hash"].as_str() {
            if h != self.hash() {
                return Err(CertificateError::DifferentSystem(h.to_string()));
            }
        }
        if cert["verdict"] != "Flat" {
            return Err(CertificateError::NotFlat);
        }
        let mut sys = self.to_implicit()?;
        if cert["bounds"]["order_reduction"] == true {
            sys = reduce_order(&sys);
        }
        let cfg = self.pipeline_config();
        let ctx = ExprContext::with_params(self.params.iter().map(|d| d.name.to_string()));
        let parse = |what: &str, s: &str| parse_expr(s, &ctx).map_err(|e| CertificateError::Malformed(format!("{what} `{s}`: {e}")));
        let psi = strings(cert, "flat_output")?
            .iter()
            .map(|s| parse("flat output", s))
            .collect::<Result<Vec<_>, _>>()?;
        let names: Vec<Sym> = strings(cert, "flat_names")?.iter().map(|s| Sym::new(s)).collect();
        let triv = cert["trivialization"]
            .as_object()
            .ok_or_else(|| CertificateError::Malformed("no trivialization".into()))?;
        let mut pairs = Vec::new();
        for (k, v) in triv {
            let text = v
                .as_str()
                .ok_or_else(|| CertificateError::Malformed(format!("trivialization of `{k}` is not a string")))?;
            pairs.push((k.as_str(), parse("trivialization", text)?));
        }
        let phi = JetMap::new(pairs);
        Ok(verify_certificate(&sys, &psi, &phi, &names, samples.unwrap_or(cfg.numeric_samples), cfg.seed)?)
    }
}

fn join(d: &[Decl]) -> String {
    d.iter().map(|d| d.name.to_string()).collect::<Vec<_>>().join(", ")
}

impl fmt::Display for SystemSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            SystemKind::Explicit => writeln!(f, "system {} explicit", self.name)?,
            SystemKind::Implicit { m } => writeln!(f, "system {} implicit m = {}", self.name, m)?,
        }
        writeln!(f, "states {}", join(&self.states))?;
        if !self.inputs.is_empty() {
            writeln!(f, "inputs {}", join(&self.inputs))?;
        }
        if !self.params.is_empty() {
            writeln!(f, "params {}", join(&self.params))?;
        }
        writeln!(f, "equations")?;
        for e in &self.equations {
            writeln!(f, "  {}", e.expr)?;
        }
        for a in &self.assumptions {
            writeln!(f, "assume {} != 0", a.expr)?;
        }
        for p in &self.points {
            let mut items: Vec<String> = p.values.jets.iter().map(|(c, v)| format!("{c} = {v}")).collect();
            items.extend(p.values.params.iter().map(|(s, v)| format!("{s} = {v}")));
            writeln!(f, "point {}", items.join(", "))?;
        }
        let opts = self.options.entries();
        if !opts.is_empty() {
            let items: Vec<String> = opts.iter().map(|(k, v)| format!("{k} = {v}")).collect();
            writeln!(f, "options {}", items.join(", "))?;
        }
        Ok(())
    }
}

/// A piece of a line with its position.
#[derive(Clone, Copy)]
struct Piece<'a> {
    text: &'a str,
    line: u32,
    col: u32,
}

impl<'a> Piece<'a> {
    fn span(&self) -> Span {
        Span {
            line: self.line,
            col: self.col,
        }
    }

    fn trim(self) -> Piece<'a> {
        let lead = self.text.len() - self.text.trim_start().len();
        Piece {
            text: self.text.trim(),
            line: self.line,
            col: self.col + self.text[..lead].chars().count() as u32,
        }
    }

    fn split_at(self, i: usize, skip: usize) -> (Piece<'a>, Piece<'a>) {
        let left = Piece { text: &self.text[..i], ..self };
        let right = Piece {
            text: &self.text[i + skip..],
            col: self.col + self.text[..i + skip].chars().count() as u32,
            ..self
        };
        (left, right)
    }

    fn split(self, sep: char) -> Vec<Piece<'a>> {
        let mut out = Vec::new();
        let mut rest = self;
        while let Some(i) = rest.text.find(sep) {
            let (l, r) = rest.split_at(i, sep.len_utf8());
            out.push(l.trim());
            rest = r;
        }
        out.push(rest.trim());
        out
    }

    /// Split once at a lone `=` (not part of `!=` or `==`).
    fn split_eq(self) -> Result<Option<(Piece<'a>, Piece<'a>)>, ()> {
        let b = self.text.as_bytes();
        let hits: Vec<usize> = (0..b.len())
            .filter(|&i| b[i] == b'=' && (i == 0 || !matches!(b[i - 1], b'!' | b'=')) && b.get(i + 1) != Some(&b'='))
            .collect();
        match hits[..] {
            [] => Ok(None),
            [i] => {
                let (l, r) = self.split_at(i, 1);
                Ok(Some((l.trim(), r.trim())))
            }
            _ => Err(()),
        }
    }
}

struct Parser {
    diags: Vec<Diagnostic>,
}

impl Parser {
    fn error(&mut self, span: Span, msg: impl Into<String>) {
        self.diags.push(Diagnostic { span, msg: msg.into() });
    }

    fn expr(&mut self, p: Piece, ctx: &ExprContext) -> Option<Expr> {
        match parse_expr(p.text, ctx) {
            Ok(e) => Some(e),
            Err(ExprError::Parse { span, msg }) => {
                let span = Span {
                    line: p.line + span.line.saturating_sub(1),
                    col: if span.line <= 1 { p.col + span.col.saturating_sub(1) } else { span.col },
                };
                self.error(span, msg);
                None
            }
            Err(e) => {
                self.error(p.span(), e.to_string());
                None
            }
        }
    }

    fn ident(&mut self, p: Piece) -> Option<Sym> {
        let ok = p.text.chars().next().is_some_and(|c| c.is_alphabetic() || c == '_')
            && p.text.chars().all(|c| c.is_alphanumeric() || c == '_');
        if ok {
            Some(Sym::new(p.text))
        } else {
            self.error(p.span(), format!("expected a name, found `{}`", p.text));
            None
        }
    }

    fn decls(&mut self, p: Piece, out: &mut Vec<Decl>) {
        if p.text.is_empty() {
            return;
        }
        for item in p.split(',') {
            if let Some(name) = self.ident(item) {
                out.push(Decl { name, span: item.span() });
            }
        }
    }
}

impl Parser {
    fn point(&mut self, p: Piece, ctx: &ExprContext) -> NumericPoint {
        let mut values = NumericPoint::new();
        for item in p.split(',') {
            let Ok(Some((k, v))) = item.split_eq() else {
                self.error(item.span(), "expected `coordinate = value`");
                continue;
            };
            let Ok(num) = v.text.parse::<f64>() else {
                self.error(v.span(), format!("`{}` is not a number", v.text));
                continue;
            };
            let Some(key) = self.expr(k, ctx) else { continue };
            if let Some(c) = key.as_jet() {
                values.set(c, num);
            } else if let Some(s) = key.params().into_iter().next().filter(|s| key == Expr::param(s.as_str())) {
                values.set_param(s.as_str(), num);
            } else {
                self.error(k.span(), format!("`{}` is not a coordinate or parameter", k.text));
            }
        }
        values
    }
}

fn is_keyword(s: &str) -> bool {
    matches!(s, "system" | "states" | "inputs" | "params" | "equations" | "assume" | "point" | "options")
}

/// Parse a system description. Every problem found is reported, not only the first.
pub fn parse_system(text: &str) -> Result<SystemSource, DslError> {
    let mut ps = Parser { diags: Vec::new() };
    let mut header: Option<(String, SystemKind)> = None;
    let (mut states, mut inputs, mut params) = (Vec::new(), Vec::new(), Vec::new());
    let mut eq_pieces: Vec<Piece> = Vec::new();
    let mut assume_pieces: Vec<Piece> = Vec::new();
    let mut point_pieces: Vec<Piece> = Vec::new();
    let mut option_pieces: Vec<Piece> = Vec::new();
    let mut block: Option<&str> = None;
    let mut eq_block_span: Option<Span> = None;

    for (ln, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("");
        let piece = Piece {
            text: line,
            line: ln as u32 + 1,
            col: 1,
        };
        if line.trim().is_empty() {
            continue;
        }
        let indented = line.starts_with([' ', '\t']);
        let body = piece.trim();
        if indented {
            match block {
                Some("equations") => eq_pieces.push(body),
                Some("assume") => assume_pieces.push(body),
                Some("point") => point_pieces.push(body),
                Some("options") => option_pieces.push(body),
                _ => ps.error(body.span(), "indented line outside a block"),
            }
            continue;
        }
        let kw_len = body.text.find(char::is_whitespace).unwrap_or(body.text.len());
        let (kw, rest) = body.split_at(kw_len, 0);
        let rest = rest.trim();
        if !is_keyword(kw.text) {
            ps.error(kw.span(), format!("unknown keyword `{}`", kw.text));
            block = None;
            continue;
        }
        block = Some(match kw.text {
            "system" => "system",
            "states" => "states",
            "inputs" => "inputs",
            "params" => "params",
            "equations" => "equations",
            "assume" => "assume",
            "point" => "point",
            _ => "options",
        });
        match kw.text {
            "system" => {
                if header.is_some() {
                    ps.error(kw.span(), "second `system` line");
                }
                let words: Vec<&str> = rest.text.split_whitespace().collect();
                let kind = match words[..] {
                    [_, "explicit"] => Some(SystemKind::Explicit),
                    [_, "implicit", "m", "=", m] => m.parse().ok().map(|m| SystemKind::Implicit { m }),
                    [_, "implicit", m] => m.strip_prefix("m=").unwrap_or(m).parse().ok().map(|m| SystemKind::Implicit { m }),
                    _ => None,
                };
                match (words.first(), kind) {
                    (Some(name), Some(kind)) => header = Some((name.to_string(), kind)),
                    _ => ps.error(rest.span(), "expected `system <name> explicit` or `system <name> implicit m = <count>`"),
                }
            }
            "states" => ps.decls(rest, &mut states),
            "inputs" => ps.decls(rest, &mut inputs),
            "params" => ps.decls(rest, &mut params),
            "equations" => {
                eq_block_span = Some(kw.span());
                if !rest.text.is_empty() {
                    eq_pieces.extend(rest.split(';').into_iter().filter(|p| !p.text.is_empty()));
                }
            }
            "assume" => {
                if !rest.text.is_empty() {
                    assume_pieces.push(rest);
                }
            }
            "point" => point_pieces.push(rest),
            _ => {
                if !rest.text.is_empty() {
                    option_pieces.push(rest);
                }
            }
        }
    }

    let Some((name, kind)) = header else {
        ps.error(Span { line: 1, col: 1 }, "missing `system` line");
        return Err(DslError(ps.diags));
    };

    // declarations
    let mut seen: BTreeMap<String, Span> = BTreeMap::new();
    for d in states.iter().chain(&inputs).chain(&params) {
        let key = d.name.to_string();
        if key == "D" || crate::symexpr::parse::head_of(&key).is_some() || key == "tan" {
            ps.error(d.span, format!("`{key}` is reserved"));
        }
        if let Some(first) = seen.get(&key) {
            ps.error(d.span, format!("`{key}` already declared at {first}"));
        } else {
            seen.insert(key, d.span);
        }
    }
    if states.is_empty() {
        ps.error(Span { line: 1, col: 1 }, "no states declared");
    }
    if let SystemKind::Implicit { .. } = kind {
        if let Some(d) = inputs.first() {
            ps.error(d.span, "implicit systems have no inputs; give the count in the header");
        }
    }

    let ctx = ExprContext {
        params: params.iter().map(|d| d.name.to_string()).collect(),
        vars: Some(states.iter().chain(&inputs).map(|d| d.name.to_string()).collect::<BTreeSet<_>>()),
    };

    let mut equations = Vec::new();
    for p in &eq_pieces {
        let expr = match p.split_eq() {
            Ok(Some((l, r))) => match (ps.expr(l, &ctx), ps.expr(r, &ctx)) {
                (Some(l), Some(r)) => Some(&l - &r),
                _ => None,
            },
            Ok(None) => ps.expr(*p, &ctx),
            Err(()) => {
                ps.error(p.span(), "more than one `=` in an equation");
                None
            }
        };
        if let Some(expr) = expr {
            if expr.is_zero_structural() {
                ps.error(p.span(), "equation is identically zero");
            }
            equations.push(Equation { expr, span: p.span() });
        }
    }
    let expected = match kind {
        SystemKind::Explicit => Some(states.len()),
        SystemKind::Implicit { m } => states.len().checked_sub(m),
    };
    if eq_pieces.len() != expected.unwrap_or(usize::MAX) {
        let span = eq_block_span.unwrap_or(Span { line: 1, col: 1 });
        let want = expected.map_or("a non-negative number of".to_string(), |e| e.to_string());
        ps.error(span, format!("equation count mismatch: expected {want}, found {}", eq_pieces.len()));
    }

    let mut assumptions = Vec::new();
    for p in &assume_pieces {
        let p = match p.text.strip_suffix("!= 0").or_else(|| p.text.strip_suffix("!=0")) {
            Some(t) => Piece { text: t, ..*p }.trim(),
            None => *p,
        };
        if let Some(expr) = ps.expr(p, &ctx) {
            if expr.is_zero_structural() {
                ps.error(p.span(), "assumption is identically zero");
            } else {
                assumptions.push(Assumption { expr, span: p.span() });
            }
        }
    }

    let points = point_pieces
        .iter()
        .map(|p| Point {
            values: ps.point(*p, &ctx),
            span: p.span(),
        })
        .collect();

    let mut options = DslOptions::default();
    for p in &option_pieces {
        for item in p.split(',').into_iter().flat_map(|q| q.split(';')).filter(|q| !q.text.is_empty()) {
            match item.split_eq() {
                Ok(Some((k, v))) => {
                    if let Err(msg) = options.set(k.text, v.text) {
                        ps.error(item.span(), msg);
                    }
                }
                _ => ps.error(item.span(), "expected `key = value`"),
            }
        }
    }

    if !ps.diags.is_empty() {
        ps.diags.sort_by_key(|d| (d.span.line, d.span.col));
        return Err(DslError(ps.diags));
    }
    Ok(SystemSource {
        name,
        kind,
        states,
        inputs,
        params,
        equations,
        assumptions,
        points,
        options,
    })
}

/// The worked examples and a few small systems used by the tests.
pub mod fixtures {
    pub const CAR: &str = include_str!("../fixtures/car.sys");
    pub const CAR_SEEDED: &str = include_str!("../fixtures/car_seeded.sys");
    pub const PENDULUM: &str = include_str!("../fixtures/pendulum.sys");
    pub const PENDULUM_REDUCED: &str = include_str!("../fixtures/pendulum_reduced.sys");
    pub const TORSION: &str = include_str!("../fixtures/torsion.sys");
    pub const CHAIN: &str = include_str!("../fixtures/chain.sys");
    pub const NONFLAT: &str = include_str!("../fixtures/nonflat.sys");
    pub const PVTOL: &str = include_str!("../fixtures/pvtol.sys");
    pub const MONGE: &str = include_str!("../fixtures/monge.sys");
    pub const TORSION_MAT: &str = include_str!("../fixtures/torsion.mat");

    /// The three worked examples, by file name.
    pub const EXAMPLES: &[(&str, &str)] = &[("car.sys", CAR), ("car_seeded.sys", CAR_SEEDED), ("pendulum.sys", PENDULUM)];

    /// Every system fixture, by file name.
    pub const ALL: &[(&str, &str)] = &[
        ("car.sys", CAR),
        ("car_seeded.sys", CAR_SEEDED),
        ("pendulum.sys", PENDULUM),
        ("pendulum_reduced.sys", PENDULUM_REDUCED),
        ("torsion.sys", TORSION),
        ("chain.sys", CHAIN),
        ("nonflat.sys", NONFLAT),
        ("pvtol.sys", PVTOL),
        ("monge.sys", MONGE),
    ];
}
