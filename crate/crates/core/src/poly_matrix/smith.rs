//! Smith reduction over the Ore ring by elementary row and column actions.

use serde_json::{json, Value};

use crate::ore::{OreError, OrePoly};
use crate::symexpr::{is_zero, AssumptionLedger, Expr, ZeroStatus};

use super::elementary::{Elementary, ElementaryAction, Side, Unimodular};
use super::{MatrixError, OreMatrix};

#[derive(Clone, Debug, Default)]
pub struct SmithOptions {
    /// 0 keeps the natural pivot order. `k >= 1` first cancels the leading
    /// terms of the k-th pair of equal-degree entries in the first line.
    pub pivot_seed: u32,
    pub ledger: AssumptionLedger,
    /// Clear lines that are exact multiples of other lines, and move nonzero
    /// scalars to the pivot position before anything else. Keeps
    /// coefficients small on sparse matrices such as order-reduced systems.
    /// Without it, a reduction that hits the growth bound is retried with it.
    pub structured: bool,
}

/// `V A U = (Delta, 0)` or its transpose shape, with `Delta` diagonal.
#[derive(Clone, Debug)]
pub struct SmithResult {
    pub v: Unimodular,
    pub u: Unimodular,
    pub delta: Vec<OrePoly>,
    pub reduced: OreMatrix,
    pub left_actions: Vec<ElementaryAction>,
    pub right_actions: Vec<ElementaryAction>,
    pub ledger: AssumptionLedger,
    /// False when the diagonal could not be brought into a divisibility chain.
    pub divisibility_chain: bool,
}

impl SmithResult {
    pub fn is_hyper_regular(&self) -> bool {
        self.delta.iter().all(|d| d.is_one())
    }

    /// Check `V A U` against the reduced form, entrywise.
    pub fn verify(&self, a: &OreMatrix) -> bool {
        let prod = self.v.matrix().mul(a).and_then(|x| x.mul(self.u.matrix()));
        matches!(prod, Ok(p) if p == self.reduced)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "delta": self.delta.iter().map(|d| d.to_string()).collect::<Vec<_>>(),
            "hyper_regular": self.is_hyper_regular(),
            "divisibility_chain": self.divisibility_chain,
            "V": self.v.matrix().to_rows_text(),
            "U": self.u.matrix().to_rows_text(),
            "left_actions": self.left_actions.iter().map(|a| a.to_json()).collect::<Vec<_>>(),
            "right_actions": self.right_actions.iter().map(|a| a.to_json()).collect::<Vec<_>>(),
            "assumptions": self.ledger.entries().iter().map(|e| e.to_string()).collect::<Vec<_>>(),
        })
    }
}

/// `a b`, unless differentiating the coefficients of `b` up to the degree
/// of `a` is likely to swell.
fn cheap_mul(a: &OrePoly, b: &OrePoly) -> Option<OrePoly> {
    (a.size() * b.size() * (a.degree().unwrap_or(0) + 1) <= MAX_PRODUCT_SIZE).then(|| a.mul(b))
}

struct Work {
    a: OreMatrix,
    v: Unimodular,
    u: Unimodular,
    left: Vec<ElementaryAction>,
    right: Vec<ElementaryAction>,
    ledger: AssumptionLedger,
    /// Primary lines are rows (column actions clear them).
    row_first: bool,
    structured: bool,
}

const MAX_STEP_ITERATIONS: usize = 64;
const MAX_CHAIN_REPAIRS: usize = 8;
/// Entries larger than this abort the reduction instead of letting
/// coefficients swell without bound.
const MAX_ENTRY_SIZE: usize = 600;
/// Bound on entry size times multiplier size for a single action.
const MAX_PRODUCT_SIZE: usize = 6_000;

impl Work {
    fn act(&mut self, side: Side, op: Elementary) -> Result<(), MatrixError> {
        let acc = match side {
            Side::Left => self.v.matrix(),
            Side::Right => self.u.matrix(),
        };
        let big = self.a.entries().chain(acc.entries()).map(|p| p.size()).max().unwrap_or(0);
        if big > MAX_ENTRY_SIZE {
            return Err(MatrixError::ExpressionGrowth(big));
        }
        let factor = match &op {
            Elementary::AddMultiple { p, .. } => p.size() * (p.degree().unwrap_or(0) + 1),
            Elementary::Scale { u, .. } if side == Side::Left => 1 + u.size() / big.max(1),
            Elementary::Scale { u, .. } => u.size(),
            Elementary::Swap { .. } => 1,
        };
        if big * factor > MAX_PRODUCT_SIZE {
            return Err(MatrixError::ExpressionGrowth(big * factor));
        }
        match side {
            Side::Left => {
                op.apply_left(&mut self.a);
                self.v.push_left(op.clone());
            }
            Side::Right => {
                op.apply_right(&mut self.a);
                self.u.push_right(op.clone());
            }
        }
        self.left_or_right(side).push(ElementaryAction { side, op });
        Ok(())
    }

    fn left_or_right(&mut self, side: Side) -> &mut Vec<ElementaryAction> {
        match side {
            Side::Left => &mut self.left,
            Side::Right => &mut self.right,
        }
    }

    fn prim_side(&self) -> Side {
        if self.row_first {
            Side::Right
        } else {
            Side::Left
        }
    }

    fn sec_side(&self) -> Side {
        if self.row_first {
            Side::Left
        } else {
            Side::Right
        }
    }

    fn prim_len(&self) -> usize {
        if self.row_first {
            self.a.cols()
        } else {
            self.a.rows()
        }
    }

    fn sec_len(&self) -> usize {
        if self.row_first {
            self.a.rows()
        } else {
            self.a.cols()
        }
    }

    /// Entry `t` of primary line `k`.
    fn prim(&self, k: usize, t: usize) -> &OrePoly {
        if self.row_first {
            self.a.get(k, t)
        } else {
            self.a.get(t, k)
        }
    }

    fn sec(&self, k: usize, t: usize) -> &OrePoly {
        if self.row_first {
            self.a.get(t, k)
        } else {
            self.a.get(k, t)
        }
    }

    /// The operation adding `p` times line `s` to line `t`, as seen from `side`.
    fn add_op(side: Side, t: usize, s: usize, p: OrePoly) -> Elementary {
        match side {
            Side::Right => Elementary::AddMultiple { i: s, j: t, p },
            Side::Left => Elementary::AddMultiple { i: t, j: s, p },
        }
    }

    /// `e_t + e_s * alpha` for column actions, `e_t + alpha * e_s` for row
    /// actions; `None` when the product would be too expensive.
    fn combine(side: Side, et: &OrePoly, es: &OrePoly, alpha: &OrePoly) -> Option<OrePoly> {
        Some(match side {
            Side::Right => et.add(&cheap_mul(es, alpha)?),
            Side::Left => et.add(&cheap_mul(alpha, es)?),
        })
    }

    fn divide(&self, side: Side, a: &OrePoly, b: &OrePoly) -> Result<(OrePoly, OrePoly), MatrixError> {
        let r = match side {
            Side::Right => OrePoly::right_divide_bounded(a, b, &self.ledger, MAX_PRODUCT_SIZE),
            Side::Left => OrePoly::left_divide_bounded(a, b, &self.ledger, MAX_PRODUCT_SIZE),
        };
        r.map_err(|e| match e {
            OreError::Growth(n) => MatrixError::ExpressionGrowth(n),
            e => e.into(),
        })
    }

    fn nonzero_leading(&self, p: &OrePoly) -> Result<(), MatrixError> {
        let l = p.leading().expect("nonzero entry");
        match is_zero(l, &self.ledger) {
            ZeroStatus::NonZero => Ok(()),
            _ => Err(MatrixError::InconclusivePivot(l.to_string())),
        }
    }

    fn seed(&mut self, seed: u32) -> Result<(), MatrixError> {
        if seed == 0 || self.prim_len() == 0 || self.sec_len() == 0 {
            return Ok(());
        }
        let n = self.prim_len();
        let mut pairs = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                let (di, dj) = (self.prim(0, i).degree(), self.prim(0, j).degree());
                if di.is_some() && di == dj && di >= Some(1) {
                    pairs.push((i, j));
                }
            }
        }
        if pairs.is_empty() {
            return Ok(());
        }
        let (i, j) = pairs[(seed as usize - 1) % pairs.len()];
        let li = self.prim(0, i).leading().unwrap().clone();
        let lj = self.prim(0, j).leading().unwrap().clone();
        let side = self.prim_side();
        self.ledger.assume_nonzero(&lj);
        self.act(side, Elementary::Scale { i, u: lj.neg() })?;
        self.act(side, Self::add_op(side, i, j, OrePoly::scalar(li)))?;
        Ok(())
    }

    /// Several entries share the lowest degree `d`: look for a combination of
    /// them whose leading terms cancel down to degree `d - 2` or lower.
    fn combine_step(&mut self, k: usize) -> Result<bool, MatrixError> {
        let side = self.prim_side();
        let idx: Vec<usize> = (k..self.prim_len()).filter(|&t| !self.prim(k, t).is_zero()).collect();
        let Some(d) = idx.iter().filter_map(|&t| self.prim(k, t).degree()).min() else {
            return Ok(false);
        };
        let tied: Vec<usize> = idx.iter().copied().filter(|&t| self.prim(k, t).degree() == Some(d)).collect();
        if d < 2 || tied.len() < 2 {
            return Ok(false);
        }
        let lead = |t: usize| self.prim(k, t).leading().unwrap().clone();
        // (degree, entry size, multiplier size, target, sources)
        let mut best: Option<(usize, usize, usize, usize, Vec<(usize, OrePoly)>)> = None;
        let mut consider = |cand: (usize, usize, usize, usize, Vec<(usize, OrePoly)>)| {
            let better = match &best {
                None => true,
                Some(b) => (cand.0, cand.1, cand.2) < (b.0, b.1, b.2),
            };
            if better {
                best = Some(cand);
            }
        };
        for &t in &tied {
            for &s in &tied {
                if s == t {
                    continue;
                }
                let alpha = OrePoly::scalar((&lead(t) / &lead(s)).neg());
                let Some(r) = Self::combine(side, self.prim(k, t), self.prim(k, s), &alpha) else {
                    continue;
                };
                if let Some(dr) = r.degree() {
                    if dr + 2 <= d {
                        consider((dr, r.size(), alpha.size(), t, vec![(s, alpha)]));
                    }
                }
            }
            if tied.len() >= 3 {
                let others: Vec<usize> = tied.iter().copied().filter(|&s| s != t).collect();
                let norm: Expr = others.iter().map(|&s| &lead(s) * &lead(s)).sum();
                if is_zero(&norm, &self.ledger) != ZeroStatus::NonZero {
                    continue;
                }
                let ninv = norm.inv().unwrap();
                let mut r = Some(self.prim(k, t).clone());
                let mut alphas = Vec::new();
                let mut asize = 0;
                for &s in &others {
                    let alpha = OrePoly::scalar((&(&lead(t) * &lead(s)) * &ninv).neg());
                    r = r.and_then(|r| Self::combine(side, &r, self.prim(k, s), &alpha));
                    asize += alpha.size();
                    alphas.push((s, alpha));
                }
                if let Some((dr, r)) = r.and_then(|r| Some((r.degree()?, r))) {
                    if dr + 2 <= d {
                        consider((dr, r.size(), asize, t, alphas));
                    }
                }
            }
        }
        let Some((_, _, _, t, alphas)) = best else {
            return Ok(false);
        };
        for (s, alpha) in alphas {
            if let Some(l) = alpha.as_scalar() {
                if !l.denom_factors().is_empty() {
                    self.ledger.assume_nonzero(&l.denominator());
                }
            }
            self.act(side, Self::add_op(side, t, s, alpha))?;
        }
        Ok(true)
    }

    fn pick(entries: impl Iterator<Item = (usize, OrePoly)>) -> Option<usize> {
        entries
            .filter(|(_, p)| !p.is_zero())
            .min_by_key(|(t, p)| (p.degree().unwrap(), p.size(), *t))
            .map(|(t, _)| t)
    }

    fn line(&self, side: Side, t: usize) -> Vec<OrePoly> {
        match side {
            Side::Left => self.a.row(t).to_vec(),
            Side::Right => (0..self.a.rows()).map(|i| self.a.get(i, t).clone()).collect(),
        }
    }

    /// `q` with `line_t = q line_s` (rows) or `line_t = line_s q` (columns).
    fn multiple_of(&self, side: Side, t: &[OrePoly], s: &[OrePoly]) -> Option<OrePoly> {
        let j = s.iter().position(|p| !p.is_zero())?;
        let (q, r) = self.divide(side, &t[j], &s[j]).ok()?;
        if !r.is_zero() || q.is_zero() {
            return None;
        }
        let exact = t.iter().zip(s).all(|(a, b)| {
            let qb = match side {
                Side::Left => cheap_mul(&q, b),
                Side::Right => cheap_mul(b, &q),
            };
            qb.is_some_and(|qb| a.sub(&qb).coeffs().iter().all(|c| is_zero(c, &self.ledger) == ZeroStatus::Zero))
        });
        exact.then_some(q)
    }

    fn clear_multiples(&mut self, side: Side) -> Result<(), MatrixError> {
        let n = match side {
            Side::Left => self.a.rows(),
            Side::Right => self.a.cols(),
        };
        for t in 0..n {
            for s in 0..n {
                let (lt, ls) = (self.line(side, t), self.line(side, s));
                if s == t || lt.iter().all(|p| p.is_zero()) {
                    continue;
                }
                if let Some(q) = self.multiple_of(side, &lt, &ls) {
                    self.act(side, Self::add_op(side, t, s, q.neg()))?;
                }
            }
        }
        Ok(())
    }

    /// The block entry of lowest degree and then smallest size whose leading
    /// coefficient is known to be nonzero, preferring rational constants.
    fn small_pivot(&self, k: usize) -> Option<(usize, usize)> {
        (k..self.a.rows())
            .flat_map(|i| (k..self.a.cols()).map(move |j| (i, j)))
            .filter_map(|(i, j)| {
                let p = self.a.get(i, j);
                let lead = p.leading()?;
                if is_zero(lead, &self.ledger) != ZeroStatus::NonZero {
                    return None;
                }
                let constant = p.as_scalar().is_some_and(|c| c.is_constant());
                Some(((p.degree()?, !constant, p.size(), i, j), (i, j)))
            })
            .min_by(|a, b| a.0.cmp(&b.0))
            .map(|(_, ij)| ij)
    }

    /// Bring the block starting at `(k, k)` into the form `diag(delta, *)`
    /// with the rest of line `k` cleared. Returns false if the block is zero.
    fn step(&mut self, k: usize) -> Result<bool, MatrixError> {
        if let Some((i, j)) = self.small_pivot(k).filter(|_| self.structured) {
            if i != k {
                self.act(Side::Left, Elementary::Swap { i: k, j: i })?;
            }
            if j != k {
                self.act(Side::Right, Elementary::Swap { i: k, j })?;
            }
        }
        for _ in 0..MAX_STEP_ITERATIONS {
            let prim_nz = (k..self.prim_len()).any(|t| !self.prim(k, t).is_zero());
            if !prim_nz {
                // find any nonzero entry in the block and move its line here
                let mut best: Option<(usize, usize, usize, usize)> = None;
                for i in k..self.a.rows() {
                    for j in k..self.a.cols() {
                        let p = self.a.get(i, j);
                        if let Some(dg) = p.degree() {
                            let key = (dg, p.size(), i, j);
                            if best.as_ref().map_or(true, |b| key < *b) {
                                best = Some(key);
                            }
                        }
                    }
                }
                let Some((_, _, i, j)) = best else {
                    return Ok(false);
                };
                let t = if self.row_first { i } else { j };
                let side = self.sec_side();
                self.act(side, Elementary::Swap { i: k, j: t })?;
                continue;
            }
            self.combine_step(k)?;
            let side = self.prim_side();
            let pv = Self::pick((k..self.prim_len()).map(|t| (t, self.prim(k, t).clone()))).unwrap();
            self.nonzero_leading(self.prim(k, pv))?;
            if pv != k {
                self.act(side, Elementary::Swap { i: k, j: pv })?;
            }
            let lead = self.prim(k, k).leading().unwrap().clone();
            self.ledger.assume_nonzero(&lead);
            if self.structured {
                // scaling a row from the left multiplies coefficients without
                // differentiating them, so a monic pivot comes for free
                if !lead.is_one() {
                    if let Some(u) = lead.inv() {
                        self.act(Side::Left, Elementary::Scale { i: k, u })?;
                    }
                }
            }
            let pivot = self.prim(k, k).clone();
            let mut dirty = false;
            for t in k + 1..self.prim_len() {
                let e = self.prim(k, t).clone();
                if e.is_zero() {
                    continue;
                }
                let (q, r) = self.divide(side, &e, &pivot)?;
                if !q.is_zero() {
                    self.act(side, Self::add_op(side, t, k, q.neg()))?;
                }
                dirty |= !r.is_zero();
            }
            if dirty {
                continue;
            }
            let sside = self.sec_side();
            for t in k + 1..self.sec_len() {
                let e = self.sec(k, t).clone();
                if e.is_zero() {
                    continue;
                }
                let (q, r) = self.divide(sside, &e, &pivot)?;
                if !q.is_zero() {
                    self.act(sside, Self::add_op(sside, t, k, q.neg()))?;
                }
                dirty |= !r.is_zero();
            }
            if dirty {
                let t = Self::pick((k + 1..self.sec_len()).map(|t| (t, self.sec(k, t).clone()))).unwrap();
                self.act(sside, Elementary::Swap { i: k, j: t })?;
                continue;
            }
            // normalize
            let lead = pivot.leading().unwrap().clone();
            if !lead.is_one() {
                let u = lead.inv().ok_or_else(|| MatrixError::InconclusivePivot(lead.to_string()))?;
                self.act(side, Elementary::Scale { i: k, u })?;
            }
            return Ok(true);
        }
        Err(MatrixError::IterationLimit)
    }

    fn diagonal(&self) -> Vec<OrePoly> {
        (0..self.a.rows().min(self.a.cols())).map(|i| self.a.get(i, i).clone()).collect()
    }

    fn run(&mut self, from: usize) -> Result<(), MatrixError> {
        let n = self.a.rows().min(self.a.cols());
        for k in from..n {
            if !self.step(k)? {
                break;
            }
        }
        Ok(())
    }

    /// First index `i` where `delta_i` does not divide `delta_{i+1}`.
    fn chain_break(&self) -> Result<Option<usize>, MatrixError> {
        let d = self.diagonal();
        for i in 0..d.len().saturating_sub(1) {
            if d[i].is_zero() || d[i + 1].is_zero() || d[i].is_unit() {
                continue;
            }
            let side = self.prim_side();
            let (_, r) = self.divide(side, &d[i + 1], &d[i])?;
            if !r.is_zero() {
                return Ok(Some(i));
            }
        }
        Ok(None)
    }
}

/// Reduce `a` to Smith form by elementary actions on both sides.
pub fn smith_decompose(a: &OreMatrix, opts: &SmithOptions) -> Result<SmithResult, MatrixError> {
    match reduce(a, opts) {
        Err(MatrixError::ExpressionGrowth(_)) if !opts.structured => reduce(
            a,
            &SmithOptions {
                structured: true,
                ..opts.clone()
            },
        ),
        r => r,
    }
}

fn reduce(a: &OreMatrix, opts: &SmithOptions) -> Result<SmithResult, MatrixError> {
    let mut w = Work {
        a: a.clone(),
        v: Unimodular::identity(a.rows()),
        u: Unimodular::identity(a.cols()),
        left: Vec::new(),
        right: Vec::new(),
        ledger: opts.ledger.clone(),
        row_first: a.rows() <= a.cols(),
        structured: opts.structured,
    };
    w.seed(opts.pivot_seed)?;
    if w.structured {
        w.clear_multiples(Side::Left)?;
        w.clear_multiples(Side::Right)?;
    }
    w.run(0)?;
    let mut chain = true;
    let mut repairs = 0;
    while let Some(i) = w.chain_break()? {
        if repairs == MAX_CHAIN_REPAIRS {
            chain = false;
            break;
        }
        repairs += 1;
        // move delta_{i+1} into line i and reduce again
        let side = w.prim_side();
        w.act(side, Work::add_op(side, i, i + 1, OrePoly::one()))?;
        w.run(i)?;
    }
    Ok(SmithResult {
        delta: w.diagonal(),
        reduced: w.a,
        v: w.v,
        u: w.u,
        left_actions: w.left,
        right_actions: w.right,
        ledger: w.ledger,
        divisibility_chain: chain,
    })
}

pub fn is_hyper_regular(a: &OreMatrix, ledger: &AssumptionLedger) -> Result<bool, MatrixError> {
    let opts = SmithOptions {
        ledger: ledger.clone(),
        ..Default::default()
    };
    Ok(smith_decompose(a, &opts)?.is_hyper_regular())
}

fn require_hyper_regular(r: &SmithResult) -> Result<(), MatrixError> {
    if r.is_hyper_regular() {
        Ok(())
    } else {
        Err(MatrixError::NotHyperRegular(r.delta.iter().map(|d| d.to_string()).collect()))
    }
}

/// For a wide matrix, `(V, U)` with `V A U = (I, 0)`.
pub fn right_smith_basis(a: &OreMatrix, opts: &SmithOptions) -> Result<SmithResult, MatrixError> {
    if a.rows() > a.cols() {
        return Err(MatrixError::Shape(format!("right basis needs rows <= cols, got {}x{}", a.rows(), a.cols())));
    }
    let r = smith_decompose(a, opts)?;
    require_hyper_regular(&r)?;
    Ok(r)
}

/// For a tall matrix, `(Q, R)` with `Q A R = (I; 0)`.
pub fn left_smith_basis(a: &OreMatrix, opts: &SmithOptions) -> Result<SmithResult, MatrixError> {
    if a.rows() < a.cols() {
        return Err(MatrixError::Shape(format!("left basis needs rows >= cols, got {}x{}", a.rows(), a.cols())));
    }
    let r = smith_decompose(a, opts)?;
    require_hyper_regular(&r)?;
    Ok(r)
}
