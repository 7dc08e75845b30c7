//! Exterior calculus on the jet manifold.

mod form;
mod jetmap;
mod operator;

#[cfg(test)]
mod tests;

pub use form::{basis_text, eval_form, exterior_d, lie_derivative_form, wedge, Basis, DiffForm};
pub use jetmap::{pullback, JetMap};
pub use operator::{
    dgoth_apply, dgoth_matrix, dgoth_matrix_operator, dgoth_operator, operator_compose, FormOperator, OperatorEntry,
};

use thiserror::Error;

use crate::symexpr::{Expr, ExprError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum JetError {
    #[error("`{coordinate}` lies outside the jet window of order {max}")]
    WindowExceeded { coordinate: String, max: u32 },
    #[error("shape mismatch: {0}")]
    Dimension(String),
    #[error(transparent)]
    Expr(#[from] ExprError),
}

/// Highest derivative order a computation may touch.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct JetWindow {
    pub max_order: u32,
}

impl JetWindow {
    pub fn new(max_order: u32) -> Self {
        JetWindow { max_order }
    }

    fn check_coords<'a>(&self, it: impl IntoIterator<Item = &'a crate::symexpr::JetCoordinate>) -> Result<(), JetError> {
        for c in it {
            if c.order > self.max_order {
                return Err(JetError::WindowExceeded {
                    coordinate: c.to_string(),
                    max: self.max_order,
                });
            }
        }
        Ok(())
    }

    pub fn check_expr(&self, e: &Expr) -> Result<(), JetError> {
        self.check_coords(&e.jets())
    }

    pub fn check_form(&self, f: &DiffForm) -> Result<(), JetError> {
        self.check_coords(&f.jets())
    }

    pub fn check_operator(&self, mu: &FormOperator) -> Result<(), JetError> {
        match mu.max_order() {
            Some(k) if k > self.max_order => Err(JetError::WindowExceeded {
                coordinate: format!("order {}", k),
                max: self.max_order,
            }),
            _ => Ok(()),
        }
    }

    /// Lie derivative that refuses to leave the window.
    pub fn lie(&self, f: &DiffForm) -> Result<DiffForm, JetError> {
        let out = f.lie();
        self.check_form(&out)?;
        Ok(out)
    }
}
