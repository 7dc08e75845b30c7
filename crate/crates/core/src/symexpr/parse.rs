//! Tokens and expression syntax shared by the text formats.
//!
//! Jets are written `x`, `dot(x)`, `ddot(x)`, `x'` or `x^(k)`. A caret
//! followed by a parenthesized integer directly after a bare identifier is a
//! derivative order; anywhere else it is a power. `d[x]` is the differential
//! of a coordinate and `^` between differentials is the wedge product.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;

use super::atom::{Head, JetCoordinate};
use super::expr::Expr;
use super::poly::Rat;
use super::ExprError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct Span {
    pub line: u32,
    pub col: u32,
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Tok {
    Ident(String),
    Num(Rat),
    Punct(&'static str),
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{}`", s),
            Tok::Num(n) => write!(f, "`{}`", n),
            Tok::Punct(p) => write!(f, "`{}`", p),
            Tok::Eof => write!(f, "end of input"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Token {
    pub tok: Tok,
    pub span: Span,
}

const PUNCT: &[&str] = &[
    "!=", "==", "+", "-", "*", "/", "^", "(", ")", "[", "]", "{", "}", ",", ";", "=", "'", ":",
];

fn parse_number(text: &str) -> Option<Rat> {
    let (mant, exp) = match text.find(['e', 'E']) {
        Some(i) => (&text[..i], text[i + 1..].parse::<i32>().ok()?),
        None => (text, 0),
    };
    let (int, frac) = match mant.find('.') {
        Some(i) => (&mant[..i], &mant[i + 1..]),
        None => (mant, ""),
    };
    let digits = format!("{}{}", int, frac);
    let n: BigInt = digits.parse().ok()?;
    let ten = BigInt::from(10);
    let mut r = BigRational::from_integer(n) / BigRational::from_integer(num_traits::pow(ten.clone(), frac.len()));
    if exp >= 0 {
        r *= BigRational::from_integer(num_traits::pow(ten, exp as usize));
    } else {
        r /= BigRational::from_integer(num_traits::pow(ten, (-exp) as usize));
    }
    Some(r)
}

pub fn lex(src: &str) -> Result<Vec<Token>, ExprError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1u32, 1u32);
    while i < chars.len() {
        let c = chars[i];
        let span = Span { line, col };
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '#' || (c == '/' && chars.get(i + 1) == Some(&'/')) {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).map_or(false, |d| d.is_ascii_digit())) {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '-' || chars[j] == '+') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text: String = chars[start..i].iter().collect();
            let n = parse_number(&text).ok_or_else(|| ExprError::Parse {
                span,
                msg: format!("malformed number `{}`", text),
            })?;
            col += (i - start) as u32;
            out.push(Token { tok: Tok::Num(n), span });
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let text: String = chars[start..i].iter().collect();
            col += (i - start) as u32;
            out.push(Token { tok: Tok::Ident(text), span });
            continue;
        }
        let rest: String = chars[i..chars.len().min(i + 2)].iter().collect();
        match PUNCT.iter().find(|p| rest.starts_with(**p)) {
            Some(p) => {
                i += p.len();
                col += p.len() as u32;
                out.push(Token { tok: Tok::Punct(p), span });
            }
            None => {
                return Err(ExprError::Parse {
                    span,
                    msg: format!("unexpected character `{}`", c),
                })
            }
        }
    }
    out.push(Token {
        tok: Tok::Eof,
        span: Span { line, col },
    });
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub enum AstKind {
    Num(Rat),
    Ident(String),
    Jet(String, u32),
    Call(String, Vec<Ast>),
    Diff(Box<Ast>),
    Neg(Box<Ast>),
    Add(Box<Ast>, Box<Ast>),
    Sub(Box<Ast>, Box<Ast>),
    Mul(Box<Ast>, Box<Ast>),
    Div(Box<Ast>, Box<Ast>),
    Pow(Box<Ast>, i64),
    Wedge(Box<Ast>, Box<Ast>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Ast {
    pub kind: AstKind,
    pub span: Span,
}

impl Ast {
    fn new(kind: AstKind, span: Span) -> Ast {
        Ast { kind, span }
    }
}

/// Recursive descent over a token slice.
pub struct Parser<'a> {
    toks: &'a [Token],
    pos: usize,
}

impl<'a> Parser<'a> {
    pub fn new(toks: &'a [Token]) -> Self {
        Parser { toks, pos: 0 }
    }

    pub fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    pub fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.pos + k).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    pub fn span(&self) -> Span {
        self.toks[self.pos].span
    }

    pub fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    pub fn at_punct(&self, p: &str) -> bool {
        matches!(self.peek(), Tok::Punct(q) if *q == p)
    }

    pub fn eat_punct(&mut self, p: &str) -> bool {
        if self.at_punct(p) {
            self.bump();
            true
        } else {
            false
        }
    }

    pub fn error(&self, msg: impl Into<String>) -> ExprError {
        ExprError::Parse {
            span: self.span(),
            msg: msg.into(),
        }
    }

    pub fn expect_punct(&mut self, p: &str) -> Result<(), ExprError> {
        if self.eat_punct(p) {
            Ok(())
        } else {
            Err(self.error(format!("expected `{}`, found {}", p, self.peek())))
        }
    }

    pub fn expect_ident(&mut self) -> Result<(String, Span), ExprError> {
        let span = self.span();
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok((s, span))
            }
            t => Err(self.error(format!("expected identifier, found {}", t))),
        }
    }

    pub fn at_eof(&self) -> bool {
        matches!(self.peek(), Tok::Eof)
    }

    pub fn expr(&mut self) -> Result<Ast, ExprError> {
        let mut lhs = self.term()?;
        loop {
            let span = self.span();
            if self.eat_punct("+") {
                let rhs = self.term()?;
                lhs = Ast::new(AstKind::Add(Box::new(lhs), Box::new(rhs)), span);
            } else if self.eat_punct("-") {
                let rhs = self.term()?;
                lhs = Ast::new(AstKind::Sub(Box::new(lhs), Box::new(rhs)), span);
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Ast, ExprError> {
        let mut lhs = self.unary()?;
        loop {
            let span = self.span();
            if self.eat_punct("*") {
                let rhs = self.unary()?;
                lhs = Ast::new(AstKind::Mul(Box::new(lhs), Box::new(rhs)), span);
            } else if self.eat_punct("/") {
                let rhs = self.unary()?;
                lhs = Ast::new(AstKind::Div(Box::new(lhs), Box::new(rhs)), span);
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Ast, ExprError> {
        let span = self.span();
        if self.eat_punct("-") {
            let inner = self.unary()?;
            return Ok(Ast::new(AstKind::Neg(Box::new(inner)), span));
        }
        if self.eat_punct("+") {
            return self.unary();
        }
        self.postfix()
    }

    fn small_int(&mut self) -> Result<i64, ExprError> {
        let neg = self.eat_punct("-");
        match self.peek().clone() {
            Tok::Num(n) if n.is_integer() => {
                self.bump();
                let v: i64 = n
                    .to_integer()
                    .try_into()
                    .map_err(|_| self.error("exponent too large"))?;
                Ok(if neg { -v } else { v })
            }
            t => Err(self.error(format!("expected integer, found {}", t))),
        }
    }

    fn postfix(&mut self) -> Result<Ast, ExprError> {
        let mut base = self.primary()?;
        loop {
            let span = self.span();
            if self.at_punct("'") {
                self.bump();
                base = match base.kind {
                    AstKind::Ident(s) => Ast::new(AstKind::Jet(s, 1), base.span),
                    AstKind::Jet(s, k) => Ast::new(AstKind::Jet(s, k + 1), base.span),
                    _ => return Err(ExprError::Parse { span, msg: "prime applies to a variable".into() }),
                };
                continue;
            }
            if !self.at_punct("^") {
                return Ok(base);
            }
            self.bump();
            if matches!(self.peek(), Tok::Ident(s) if s == "d") && matches!(self.peek_at(1), Tok::Punct("[")) {
                let rhs = self.postfix()?;
                base = Ast::new(AstKind::Wedge(Box::new(base), Box::new(rhs)), span);
                continue;
            }
            if self.at_punct("(") {
                self.bump();
                let k = self.small_int()?;
                self.expect_punct(")")?;
                base = match base.kind {
                    AstKind::Ident(s) if k >= 0 => Ast::new(AstKind::Jet(s, k as u32), base.span),
                    _ => Ast::new(AstKind::Pow(Box::new(base), k), span),
                };
                continue;
            }
            let k = self.small_int()?;
            base = Ast::new(AstKind::Pow(Box::new(base), k), span);
        }
    }

    fn primary(&mut self) -> Result<Ast, ExprError> {
        let span = self.span();
        match self.peek().clone() {
            Tok::Num(n) => {
                self.bump();
                Ok(Ast::new(AstKind::Num(n), span))
            }
            Tok::Punct("(") => {
                self.bump();
                let e = self.expr()?;
                self.expect_punct(")")?;
                Ok(e)
            }
            Tok::Ident(name) => {
                self.bump();
                if name == "d" && self.at_punct("[") {
                    self.bump();
                    let inner = self.expr()?;
                    self.expect_punct("]")?;
                    return Ok(Ast::new(AstKind::Diff(Box::new(inner)), span));
                }
                if self.at_punct("(") {
                    self.bump();
                    let mut args = Vec::new();
                    if !self.at_punct(")") {
                        args.push(self.expr()?);
                        while self.eat_punct(",") {
                            args.push(self.expr()?);
                        }
                    }
                    self.expect_punct(")")?;
                    let order = match name.as_str() {
                        "dot" => Some(1),
                        "ddot" => Some(2),
                        "dddot" => Some(3),
                        _ => None,
                    };
                    if let Some(k) = order {
                        return match args.as_slice() {
                            [Ast { kind: AstKind::Ident(v), .. }] => Ok(Ast::new(AstKind::Jet(v.clone(), k), span)),
                            [Ast { kind: AstKind::Jet(v, j), .. }] => Ok(Ast::new(AstKind::Jet(v.clone(), j + k), span)),
                            _ => Err(ExprError::Parse { span, msg: format!("`{}` takes a variable", name) }),
                        };
                    }
                    return Ok(Ast::new(AstKind::Call(name, args), span));
                }
                Ok(Ast::new(AstKind::Ident(name), span))
            }
            t => Err(self.error(format!("unexpected {}", t))),
        }
    }
}

/// Name resolution for scalar expressions.
#[derive(Clone, Debug, Default)]
pub struct ExprContext {
    pub params: BTreeSet<String>,
    /// When set, only these names may appear as jet variables.
    pub vars: Option<BTreeSet<String>>,
}

impl ExprContext {
    pub fn with_params<I: IntoIterator<Item = S>, S: Into<String>>(params: I) -> Self {
        ExprContext {
            params: params.into_iter().map(Into::into).collect(),
            vars: None,
        }
    }

    pub fn jet(&self, name: &str, order: u32, span: Span) -> Result<Expr, ExprError> {
        if self.params.contains(name) {
            if order == 0 {
                return Ok(Expr::param(name));
            }
            return Err(ExprError::Parse {
                span,
                msg: format!("parameter `{}` has no derivatives", name),
            });
        }
        if let Some(vars) = &self.vars {
            if !vars.contains(name) {
                return Err(ExprError::Parse {
                    span,
                    msg: format!("unknown variable `{}`", name),
                });
            }
        }
        Ok(Expr::jet(&JetCoordinate::new(name, order)))
    }
}

pub fn head_of(name: &str) -> Option<Head> {
    Some(match name {
        "sin" => Head::Sin,
        "cos" => Head::Cos,
        "exp" => Head::Exp,
        "ln" | "log" => Head::Ln,
        "atan" | "arctan" => Head::Atan,
        "sqrt" => Head::Sqrt,
        _ => return None,
    })
}

fn flatten_factors<'a>(a: &'a Ast, out: &mut Vec<(&'a Ast, i64)>) {
    match &a.kind {
        AstKind::Mul(l, r) => {
            flatten_factors(l, out);
            flatten_factors(r, out);
        }
        AstKind::Pow(b, k) if *k > 0 => out.push((b, *k)),
        _ => out.push((a, 1)),
    }
}

/// `1 / a`, inverting each syntactic factor separately so that printed
/// denominators parse back to the same factorization.
pub fn eval_recip(a: &Ast, ctx: &ExprContext) -> Result<Expr, ExprError> {
    let mut factors = Vec::new();
    flatten_factors(a, &mut factors);
    let mut acc = Expr::one();
    for (f, k) in factors {
        let v = eval_scalar(f, ctx)?;
        let inv = v.inv().ok_or(ExprError::DivisionByZero)?;
        acc = &acc * &inv.powi(k);
    }
    Ok(acc)
}

pub fn eval_scalar(a: &Ast, ctx: &ExprContext) -> Result<Expr, ExprError> {
    let err = |msg: String| ExprError::Parse { span: a.span, msg };
    Ok(match &a.kind {
        AstKind::Num(n) => Expr::rational(n.clone()),
        AstKind::Ident(s) => {
            if s == "D" {
                return Err(err("operator `D` in a scalar expression".into()));
            }
            if s == "pi" {
                return Err(err("`pi` is not supported; use a parameter".into()));
            }
            ctx.jet(s, 0, a.span)?
        }
        AstKind::Jet(s, k) => ctx.jet(s, *k, a.span)?,
        AstKind::Call(f, args) => {
            if args.len() != 1 {
                return Err(err(format!("`{}` takes one argument", f)));
            }
            let g = eval_scalar(&args[0], ctx)?;
            if f == "tan" {
                Expr::tan(&g)
            } else {
                let h = head_of(f).ok_or_else(|| err(format!("unknown function `{}`", f)))?;
                Expr::apply_head(h, &g)
            }
        }
        AstKind::Diff(_) | AstKind::Wedge(..) => return Err(err("differential form in a scalar expression".into())),
        AstKind::Neg(x) => eval_scalar(x, ctx)?.neg(),
        AstKind::Add(l, r) => &eval_scalar(l, ctx)? + &eval_scalar(r, ctx)?,
        AstKind::Sub(l, r) => &eval_scalar(l, ctx)? - &eval_scalar(r, ctx)?,
        AstKind::Mul(l, r) => &eval_scalar(l, ctx)? * &eval_scalar(r, ctx)?,
        AstKind::Div(l, r) => &eval_scalar(l, ctx)? * &eval_recip(r, ctx)?,
        AstKind::Pow(b, k) => {
            let v = eval_scalar(b, ctx)?;
            if *k < 0 && v.is_zero_structural() {
                return Err(ExprError::DivisionByZero);
            }
            v.powi(*k)
        }
    })
}

/// Parse a complete scalar expression.
pub fn parse_expr(src: &str, ctx: &ExprContext) -> Result<Expr, ExprError> {
    let toks = lex(src)?;
    let mut p = Parser::new(&toks);
    let ast = p.expr()?;
    if !p.at_eof() {
        return Err(p.error(format!("trailing input at {}", p.peek())));
    }
    eval_scalar(&ast, ctx)
}

impl std::str::FromStr for Expr {
    type Err = ExprError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_expr(s, &ExprContext::default())
    }
}
