use std::fmt;

use crate::ore::OrePoly;
use crate::symexpr::parse::{lex, Parser};
use crate::symexpr::{Expr, ExprContext};

use super::MatrixError;

/// Dense matrix over the Ore ring, row-major.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct OreMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<OrePoly>,
}

impl OreMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        OreMatrix {
            rows,
            cols,
            entries: vec![OrePoly::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, OrePoly::one());
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<OrePoly>>) -> Result<Self, MatrixError> {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        if rows.iter().any(|x| x.len() != c) {
            return Err(MatrixError::Ragged);
        }
        Ok(OreMatrix {
            rows: r,
            cols: c,
            entries: rows.into_iter().flatten().collect(),
        })
    }

    pub fn from_scalars(rows: Vec<Vec<Expr>>) -> Result<Self, MatrixError> {
        Self::from_rows(
            rows.into_iter()
                .map(|r| r.into_iter().map(OrePoly::scalar).collect())
                .collect(),
        )
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &OrePoly {
        &self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, p: OrePoly) {
        self.entries[i * self.cols + j] = p;
    }

    pub fn row(&self, i: usize) -> &[OrePoly] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    pub fn entries(&self) -> impl Iterator<Item = &OrePoly> {
        self.entries.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|p| p.is_zero())
    }

    pub fn is_identity(&self) -> bool {
        self.rows == self.cols
            && (0..self.rows).all(|i| {
                (0..self.cols).all(|j| {
                    let p = self.get(i, j);
                    if i == j {
                        p.is_one()
                    } else {
                        p.is_zero()
                    }
                })
            })
    }

    pub fn mul(&self, other: &OreMatrix) -> Result<OreMatrix, MatrixError> {
        if self.cols != other.rows {
            return Err(MatrixError::Dimension {
                op: "mul",
                left: (self.rows, self.cols),
                right: (other.rows, other.cols),
            });
        }
        let mut out = OreMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc = OrePoly::zero();
                for k in 0..self.cols {
                    let a = self.get(i, k);
                    let b = other.get(k, j);
                    if a.is_zero() || b.is_zero() {
                        continue;
                    }
                    acc = acc.add(&a.mul(b));
                }
                out.set(i, j, acc);
            }
        }
        Ok(out)
    }

    fn zip(&self, other: &OreMatrix, op: &'static str, f: impl Fn(&OrePoly, &OrePoly) -> OrePoly) -> Result<OreMatrix, MatrixError> {
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return Err(MatrixError::Dimension {
                op,
                left: (self.rows, self.cols),
                right: (other.rows, other.cols),
            });
        }
        Ok(OreMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().zip(&other.entries).map(|(a, b)| f(a, b)).collect(),
        })
    }

    pub fn add(&self, other: &OreMatrix) -> Result<OreMatrix, MatrixError> {
        self.zip(other, "add", |a, b| a.add(b))
    }

    pub fn sub(&self, other: &OreMatrix) -> Result<OreMatrix, MatrixError> {
        self.zip(other, "sub", |a, b| a.sub(b))
    }

    pub fn neg(&self) -> OreMatrix {
        OreMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|p| p.neg()).collect(),
        }
    }

    /// Columns `range` of the matrix.
    pub fn columns(&self, cols: std::ops::Range<usize>) -> OreMatrix {
        let mut out = OreMatrix::zeros(self.rows, cols.len());
        for i in 0..self.rows {
            for (jj, j) in cols.clone().enumerate() {
                out.set(i, jj, self.get(i, j).clone());
            }
        }
        out
    }

    /// Rows `range` of the matrix.
    pub fn row_block(&self, rows: std::ops::Range<usize>) -> OreMatrix {
        let mut out = OreMatrix::zeros(rows.len(), self.cols);
        for (ii, i) in rows.enumerate() {
            for j in 0..self.cols {
                out.set(ii, j, self.get(i, j).clone());
            }
        }
        out
    }

    /// Apply each entry as an operator to a vector of functions.
    pub fn apply(&self, v: &[Expr]) -> Result<Vec<Expr>, MatrixError> {
        if v.len() != self.cols {
            return Err(MatrixError::Dimension {
                op: "apply",
                left: (self.rows, self.cols),
                right: (v.len(), 1),
            });
        }
        Ok((0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.get(i, j).apply(&v[j])).sum())
            .collect())
    }

    pub fn max_degree(&self) -> Option<usize> {
        self.entries.iter().filter_map(|p| p.degree()).max()
    }

    /// Highest degree in column `j`.
    pub fn column_degree(&self, j: usize) -> Option<usize> {
        (0..self.rows).filter_map(|i| self.get(i, j).degree()).max()
    }

    // In-place elementary operations.

    /// `col_j += col_i * p`.
    pub(crate) fn add_col_multiple(&mut self, i: usize, j: usize, p: &OrePoly) {
        for r in 0..self.rows {
            let a = self.get(r, i);
            if a.is_zero() {
                continue;
            }
            let v = self.get(r, j).add(&a.mul(p));
            self.set(r, j, v);
        }
    }

    /// `row_i += p * row_j`.
    pub(crate) fn add_row_multiple(&mut self, i: usize, j: usize, p: &OrePoly) {
        for c in 0..self.cols {
            let a = self.get(j, c);
            if a.is_zero() {
                continue;
            }
            let v = self.get(i, c).add(&p.mul(a));
            self.set(i, c, v);
        }
    }

    /// `col_i *= u` (on the right).
    pub(crate) fn scale_col(&mut self, i: usize, u: &Expr) {
        let s = OrePoly::scalar(u.clone());
        for r in 0..self.rows {
            let v = self.get(r, i).mul(&s);
            self.set(r, i, v);
        }
    }

    /// `row_i = u * row_i`.
    pub(crate) fn scale_row(&mut self, i: usize, u: &Expr) {
        for c in 0..self.cols {
            let v = self.get(i, c).scale_left(u);
            self.set(i, c, v);
        }
    }

    pub(crate) fn swap_cols(&mut self, i: usize, j: usize) {
        for r in 0..self.rows {
            self.entries.swap(r * self.cols + i, r * self.cols + j);
        }
    }

    pub(crate) fn swap_rows(&mut self, i: usize, j: usize) {
        for c in 0..self.cols {
            self.entries.swap(i * self.cols + c, j * self.cols + c);
        }
    }

    /// Parse the text format: one row per line, entries separated by `;`.
    /// A line `params a, l` declares parameter names.
    pub fn parse(src: &str) -> Result<OreMatrix, MatrixError> {
        let mut params: Vec<String> = Vec::new();
        let mut rows = Vec::new();
        for line in src.lines() {
            let line = line.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix("params") {
                params.extend(rest.trim().trim_end_matches(';').split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()));
                continue;
            }
            rows.push(line.to_string());
        }
        let ctx = ExprContext::with_params(params);
        Self::parse_rows(&rows, &ctx)
    }

    pub fn parse_rows(rows: &[String], ctx: &ExprContext) -> Result<OreMatrix, MatrixError> {
        let mut out = Vec::new();
        for (ln, row) in rows.iter().enumerate() {
            let toks = lex(row)?;
            let mut p = Parser::new(&toks);
            let mut entries = Vec::new();
            loop {
                let ast = p.expr()?;
                entries.push(crate::ore::eval_ore(&ast, ctx)?);
                if p.eat_punct(";") {
                    if p.at_eof() {
                        break;
                    }
                    continue;
                }
                if p.at_eof() {
                    break;
                }
                return Err(MatrixError::Syntax {
                    row: ln + 1,
                    msg: format!("unexpected {}", p.peek()),
                });
            }
            out.push(entries);
        }
        Self::from_rows(out)
    }

    pub fn to_rows_text(&self) -> Vec<Vec<String>> {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.get(i, j).to_string()).collect())
            .collect()
    }
}

impl fmt::Display for OreMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|j| self.get(i, j).to_string()).collect();
            writeln!(f, "{}", row.join("; "))?;
        }
        Ok(())
    }
}

impl fmt::Debug for OreMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, " | ")?;
            }
            let row: Vec<String> = (0..self.cols).map(|j| self.get(i, j).to_string()).collect();
            write!(f, "{}", row.join("; "))?;
        }
        write!(f, "]")
    }
}
