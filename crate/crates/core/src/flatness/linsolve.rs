//! Gaussian elimination over symbolic expressions.

use crate::symexpr::{is_zero, AssumptionLedger, Expr, ZeroStatus};

#[derive(Clone, Debug, PartialEq)]
pub struct LinearSolution {
    /// One solution, with every free unknown set to zero.
    pub values: Vec<Expr>,
    pub pivots: Vec<usize>,
    pub free: Vec<usize>,
}

/// Solve `a x = b`. Only provably nonzero entries are used as pivots; `None`
/// means a reduced row `0 = r` with `r` not provably zero.
pub fn solve_linear(a: &[Vec<Expr>], b: &[Expr], ledger: &AssumptionLedger) -> Option<LinearSolution> {
    let rows = a.len();
    let cols = a.first().map_or(0, |r| r.len());
    let mut m: Vec<Vec<Expr>> = a
        .iter()
        .zip(b)
        .map(|(r, v)| {
            let mut r = r.clone();
            r.push(v.clone());
            r
        })
        .collect();
    let mut pivots = Vec::new();
    let mut free = Vec::new();
    let mut next = 0;
    for c in 0..cols {
        let pick = (next..rows)
            .filter(|&r| !m[r][c].is_zero_structural() && is_zero(&m[r][c], ledger) == ZeroStatus::NonZero)
            .min_by_key(|&r| (m[r][c].size(), r));
        let Some(p) = pick else {
            free.push(c);
            continue;
        };
        m.swap(p, next);
        let inv = m[next][c].inv().expect("pivot is nonzero");
        let row: Vec<Expr> = m[next].iter().map(|e| e * &inv).collect();
        for r in 0..rows {
            if r == next || m[r][c].is_zero_structural() {
                continue;
            }
            let f = m[r][c].clone();
            for k in c..=cols {
                if !row[k].is_zero_structural() {
                    m[r][k] = &m[r][k] - &(&f * &row[k]);
                }
            }
        }
        m[next] = row;
        pivots.push(c);
        next += 1;
    }
    for r in next..rows {
        if is_zero(&m[r][cols], ledger) != ZeroStatus::Zero {
            return None;
        }
    }
    let mut values = vec![Expr::zero(); cols];
    for (r, &c) in pivots.iter().enumerate() {
        values[c] = m[r][cols].clone();
    }
    Some(LinearSolution { values, pivots, free })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ex(s: &str) -> Expr {
        s.parse().unwrap()
    }

    #[test]
    fn symbolic_system() {
        let a = vec![vec![ex("x"), ex("1")], vec![ex("1"), ex("-1")]];
        let b = vec![ex("y"), ex("0")];
        let s = solve_linear(&a, &b, &AssumptionLedger::new()).unwrap();
        assert_eq!(s.values[0], ex("y/(x + 1)"));
        assert_eq!(s.values[1], ex("y/(x + 1)"));
        let a = vec![vec![ex("1"), ex("x")], vec![ex("2"), ex("2*x")]];
        assert!(solve_linear(&a, &[ex("1"), ex("3")], &AssumptionLedger::new()).is_none());
        let s = solve_linear(&a, &[ex("1"), ex("2")], &AssumptionLedger::new()).unwrap();
        assert_eq!(s.free, vec![1]);
    }
}
