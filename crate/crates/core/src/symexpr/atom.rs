//! Interned atoms: jet coordinates, named parameters and transcendental heads.
//!
//! Every atom is hash-consed in a process-wide table keyed by its canonical
//! text, so two atoms are equal exactly when they share an allocation.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use once_cell::sync::Lazy;
use parking_lot::Mutex;


use super::expr::Expr;

/// A variable name (state, flat output or parameter).
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Sym(Arc<str>);

impl Sym {
    pub fn new(name: &str) -> Self {
        Sym(Arc::from(name))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Debug for Sym {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for Sym {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Sym {
    fn from(s: &str) -> Self {
        Sym::new(s)
    }
}

/// The coordinate `x_i^(j)` of the jet manifold.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct JetCoordinate {
    pub var: Sym,
    pub order: u32,
}

impl JetCoordinate {
    pub fn new(var: impl Into<Sym>, order: u32) -> Self {
        JetCoordinate {
            var: var.into(),
            order,
        }
    }

    pub fn base(var: &str) -> Self {
        Self::new(var, 0)
    }

    /// `x^(j)` -> `x^(j+1)`.
    pub fn shifted(&self, by: u32) -> Self {
        JetCoordinate {
            var: self.var.clone(),
            order: self.order + by,
        }
    }
}

impl fmt::Debug for JetCoordinate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for JetCoordinate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.order {
            0 => write!(f, "{}", self.var),
            1 => write!(f, "dot({})", self.var),
            2 => write!(f, "ddot({})", self.var),
            k => write!(f, "{}^({})", self.var, k),
        }
    }
}

impl From<&str> for JetCoordinate {
    fn from(s: &str) -> Self {
        JetCoordinate::base(s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Head {
    Sin,
    Cos,
    Exp,
    Ln,
    Atan,
    Sqrt,
}

impl Head {
    pub fn name(self) -> &'static str {
        match self {
            Head::Sin => "sin",
            Head::Cos => "cos",
            Head::Exp => "exp",
            Head::Ln => "ln",
            Head::Atan => "atan",
            Head::Sqrt => "sqrt",
        }
    }
}

#[derive(Clone, Debug)]
pub enum AtomKind {
    Jet(JetCoordinate),
    Param(Sym),
    Func(Head, Expr),
}

pub struct AtomData {
    kind: AtomKind,
    key: Arc<str>,
}

/// Handle to an interned atom.
#[derive(Clone)]
pub struct Atom(Arc<AtomData>);

static TABLE: Lazy<Mutex<HashMap<Arc<str>, Atom>>> = Lazy::new(|| Mutex::new(HashMap::new()));

fn intern(key: String, kind: AtomKind) -> Atom {
    let mut table = TABLE.lock();
    if let Some(a) = table.get(key.as_str()) {
        return a.clone();
    }
    let key: Arc<str> = Arc::from(key);
    let atom = Atom(Arc::new(AtomData {
        kind,
        key: key.clone(),
    }));
    table.insert(key, atom.clone());
    atom
}

impl Atom {
    pub fn jet(c: &JetCoordinate) -> Atom {
        intern(format!("jet:{}", c), AtomKind::Jet(c.clone()))
    }

    pub fn param(name: &Sym) -> Atom {
        intern(format!("par:{}", name), AtomKind::Param(name.clone()))
    }

    /// Raw constructor; prefer the simplifying builders on [`Expr`].
    pub(crate) fn func(head: Head, arg: Expr) -> Atom {
        let key = format!("{}({})", head.name(), arg);
        intern(key, AtomKind::Func(head, arg))
    }

    pub fn kind(&self) -> &AtomKind {
        &self.0.kind
    }

    pub fn as_jet(&self) -> Option<&JetCoordinate> {
        match &self.0.kind {
            AtomKind::Jet(c) => Some(c),
            _ => None,
        }
    }

    pub fn func_parts(&self) -> Option<(Head, &Expr)> {
        match &self.0.kind {
            AtomKind::Func(h, a) => Some((*h, a)),
            _ => None,
        }
    }

    pub fn is_head(&self, head: Head) -> bool {
        matches!(&self.0.kind, AtomKind::Func(h, _) if *h == head)
    }

    fn rank(&self) -> u8 {
        match self.0.kind {
            AtomKind::Jet(_) => 0,
            AtomKind::Param(_) => 1,
            AtomKind::Func(..) => 2,
        }
    }

    /// The cosine partner of a sine atom (and vice versa).
    pub(crate) fn trig_partner(&self) -> Option<Atom> {
        match &self.0.kind {
            AtomKind::Func(Head::Sin, a) => Some(Atom::func(Head::Cos, a.clone())),
            AtomKind::Func(Head::Cos, a) => Some(Atom::func(Head::Sin, a.clone())),
            _ => None,
        }
    }
}

impl PartialEq for Atom {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }
}

impl Eq for Atom {}

impl Hash for Atom {
    fn hash<H: Hasher>(&self, state: &mut H) {
        (Arc::as_ptr(&self.0) as usize).hash(state)
    }
}

impl Ord for Atom {
    fn cmp(&self, other: &Self) -> Ordering {
        if Arc::ptr_eq(&self.0, &other.0) {
            return Ordering::Equal;
        }
        match (&self.0.kind, &other.0.kind) {
            (AtomKind::Jet(a), AtomKind::Jet(b)) => a.cmp(b),
            (AtomKind::Param(a), AtomKind::Param(b)) => a.cmp(b),
            _ => self
                .rank()
                .cmp(&other.rank())
                .then_with(|| self.0.key.cmp(&other.0.key)),
        }
    }
}

impl PartialOrd for Atom {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0.kind {
            AtomKind::Jet(c) => write!(f, "{}", c),
            AtomKind::Param(p) => write!(f, "{}", p),
            AtomKind::Func(h, a) => write!(f, "{}({})", h.name(), a),
        }
    }
}

impl fmt::Debug for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}
