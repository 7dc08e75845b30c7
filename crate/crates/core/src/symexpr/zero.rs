//! Zero testing with an assumption ledger.
//!
//! The exact test is structural: the canonical numerator vanishes. When it
//! does not, and the expression lies outside the algebraically free fragment
//! (jets, parameters, sine and cosine of single atoms), the decision falls
//! back to seeded random evaluation.

use std::collections::BTreeSet;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use super::atom::{AtomKind, Head};
use super::expr::Expr;
use super::numeric::NumericPoint;
use super::poly::Poly;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ZeroStatus {
    Zero,
    NonZero,
    Unknown,
}

/// Expressions assumed to be nonzero on the working domain.
#[derive(Clone, Debug, Default)]
pub struct AssumptionLedger {
    entries: Vec<Expr>,
    keys: BTreeSet<Poly>,
}

fn ledger_key(e: &Expr) -> Poly {
    e.numer().monic().1
}

impl AssumptionLedger {
    pub fn new() -> Self {
        Self::default()
    }

    /// Record `e != 0`. Constants are ignored.
    pub fn assume_nonzero(&mut self, e: &Expr) {
        if e.is_constant() {
            return;
        }
        if self.keys.insert(ledger_key(e)) {
            self.entries.push(e.clone());
        }
        for (f, _) in e.denom_factors() {
            let fe = Expr::from_poly(f.clone());
            if self.keys.insert(ledger_key(&fe)) {
                self.entries.push(fe);
            }
        }
    }

    pub fn contains(&self, e: &Expr) -> bool {
        self.keys.contains(&ledger_key(e))
    }

    pub fn entries(&self) -> &[Expr] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn merge(&mut self, other: &AssumptionLedger) {
        for e in &other.entries {
            self.assume_nonzero(e);
        }
    }
}

const SAMPLES: usize = 8;
const TOLERANCE: f64 = 1e-9;
const LEDGER_GUARD: f64 = 1e-3;

fn in_free_fragment(e: &Expr) -> bool {
    e.atoms().iter().all(|a| match a.kind() {
        AtomKind::Jet(_) | AtomKind::Param(_) => true,
        AtomKind::Func(Head::Sin | Head::Cos, g) => g
            .as_atom()
            .map_or(false, |b| !matches!(b.kind(), AtomKind::Func(..))),
        AtomKind::Func(..) => false,
    })
}

/// Draw a random point for the leaves of `exprs`, away from ledger zeros.
pub fn sample_point(exprs: &[&Expr], ledger: &AssumptionLedger, rng: &mut StdRng) -> Option<NumericPoint> {
    let mut jets = BTreeSet::new();
    let mut params = BTreeSet::new();
    for e in exprs.iter().copied().chain(ledger.entries().iter()) {
        jets.extend(e.jets());
        params.extend(e.params());
    }
    'attempt: for _ in 0..64 {
        let mut pt = NumericPoint::new();
        for c in &jets {
            pt.jets.insert(c.clone(), rng.gen_range(-2.0..2.0));
        }
        for p in &params {
            pt.params.insert(p.clone(), rng.gen_range(0.5..2.0));
        }
        for l in ledger.entries() {
            match l.eval(&pt) {
                Ok(v) if v.abs() >= LEDGER_GUARD => {}
                _ => continue 'attempt,
            }
        }
        return Some(pt);
    }
    None
}

pub fn is_zero(e: &Expr, ledger: &AssumptionLedger) -> ZeroStatus {
    if e.is_zero_structural() {
        return ZeroStatus::Zero;
    }
    if e.is_constant() || ledger.contains(e) || in_free_fragment(e) {
        return ZeroStatus::NonZero;
    }
    let mut rng = StdRng::seed_from_u64(0x5eed_f1a7);
    let mut seen = 0;
    for _ in 0..SAMPLES * 4 {
        if seen == SAMPLES {
            break;
        }
        let Some(pt) = sample_point(&[e], ledger, &mut rng) else {
            break;
        };
        match e.eval(&pt) {
            Ok(v) if v.is_finite() => {
                seen += 1;
                if v.abs() > TOLERANCE {
                    return ZeroStatus::NonZero;
                }
            }
            _ => {}
        }
    }
    ZeroStatus::Unknown
}

impl Expr {
    pub fn zero_status(&self, ledger: &AssumptionLedger) -> ZeroStatus {
        is_zero(self, ledger)
    }

    pub fn is_zero(&self) -> bool {
        self.is_zero_structural()
    }
}
