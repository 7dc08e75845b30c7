use serde_json::{json, Value};

use crate::ore::OrePoly;
use crate::symexpr::Expr;

use super::OreMatrix;

/// An elementary matrix. Indices are zero-based.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Elementary {
    /// `I + p e_i e_j^T`.
    AddMultiple { i: usize, j: usize, p: OrePoly },
    /// Identity with `u` at position `(i, i)`.
    Scale { i: usize, u: Expr },
    Swap { i: usize, j: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// An elementary matrix together with the side it multiplied on.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ElementaryAction {
    pub side: Side,
    pub op: Elementary,
}

impl Elementary {
    pub fn inverse(&self) -> Elementary {
        match self {
            Elementary::AddMultiple { i, j, p } => Elementary::AddMultiple {
                i: *i,
                j: *j,
                p: p.neg(),
            },
            Elementary::Scale { i, u } => Elementary::Scale {
                i: *i,
                u: u.inv().expect("scale factors are nonzero"),
            },
            Elementary::Swap { i, j } => Elementary::Swap { i: *i, j: *j },
        }
    }

    pub fn matrix(&self, n: usize) -> OreMatrix {
        let mut m = OreMatrix::identity(n);
        self.apply_right(&mut m);
        m
    }

    /// `m <- m * self`.
    pub fn apply_right(&self, m: &mut OreMatrix) {
        match self {
            Elementary::AddMultiple { i, j, p } => m.add_col_multiple(*i, *j, p),
            Elementary::Scale { i, u } => m.scale_col(*i, u),
            Elementary::Swap { i, j } => m.swap_cols(*i, *j),
        }
    }

    /// `m <- self * m`.
    pub fn apply_left(&self, m: &mut OreMatrix) {
        match self {
            Elementary::AddMultiple { i, j, p } => m.add_row_multiple(*i, *j, p),
            Elementary::Scale { i, u } => m.scale_row(*i, u),
            Elementary::Swap { i, j } => m.swap_rows(*i, *j),
        }
    }

    /// A swap written with additions and one sign change.
    pub fn swap_expansion(i: usize, j: usize) -> Vec<Elementary> {
        vec![
            Elementary::AddMultiple { i, j, p: OrePoly::one() },
            Elementary::AddMultiple { i: j, j: i, p: OrePoly::int(-1) },
            Elementary::AddMultiple { i, j, p: OrePoly::one() },
            Elementary::Scale { i, u: Expr::int(-1) },
        ]
    }

    pub fn to_json(&self) -> Value {
        match self {
            Elementary::AddMultiple { i, j, p } => json!({"kind": "add", "i": i + 1, "j": j + 1, "p": p.to_string()}),
            Elementary::Scale { i, u } => json!({"kind": "scale", "i": i + 1, "u": u.to_string()}),
            Elementary::Swap { i, j } => json!({"kind": "swap", "i": i + 1, "j": j + 1}),
        }
    }
}

impl ElementaryAction {
    pub fn to_json(&self) -> Value {
        let mut v = self.op.to_json();
        v["side"] = json!(match self.side {
            Side::Left => "left",
            Side::Right => "right",
        });
        v
    }
}

/// A unimodular matrix kept together with a factorization
/// `matrix = factors[0] * factors[1] * ...`.
#[derive(Clone, Debug)]
pub struct Unimodular {
    matrix: OreMatrix,
    factors: Vec<Elementary>,
}

impl Unimodular {
    pub fn identity(n: usize) -> Self {
        Unimodular {
            matrix: OreMatrix::identity(n),
            factors: Vec::new(),
        }
    }

    pub fn from_factors(n: usize, factors: Vec<Elementary>) -> Self {
        let mut matrix = OreMatrix::identity(n);
        for f in &factors {
            f.apply_right(&mut matrix);
        }
        Unimodular { matrix, factors }
    }

    pub fn matrix(&self) -> &OreMatrix {
        &self.matrix
    }

    pub fn factors(&self) -> &[Elementary] {
        &self.factors
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub(crate) fn push_right(&mut self, e: Elementary) {
        e.apply_right(&mut self.matrix);
        self.factors.push(e);
    }

    pub(crate) fn push_left(&mut self, e: Elementary) {
        e.apply_left(&mut self.matrix);
        self.factors.insert(0, e);
    }

    pub fn inverse(&self) -> Unimodular {
        let factors = self.factors.iter().rev().map(|f| f.inverse()).collect();
        Unimodular::from_factors(self.dim(), factors)
    }

    /// Whether the stored factors multiply out to the stored matrix.
    pub fn is_consistent(&self) -> bool {
        Unimodular::from_factors(self.dim(), self.factors.clone()).matrix == self.matrix
    }
}

/// The inverse of a unimodular matrix, from its factorization.
pub fn unimodular_inverse(u: &Unimodular) -> OreMatrix {
    u.inverse().matrix
}
