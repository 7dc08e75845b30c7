//! The flatness test: implicit systems, the module-theoretic construction of
//! the candidate forms, strong closedness, flat outputs and their certificates.

mod certificate;
mod integrate;
mod inverse;
mod linsolve;
mod mu;
mod pipeline;
mod solve;
mod system;
mod x0;

#[cfg(test)]
mod tests;

pub use certificate::{assumption_form, FlatnessCertificate, NonFlatEvidence, Verdict, CERTIFICATE_SCHEMA};
pub use integrate::{integrate_exact, integrate_flat_output, solve_m};
pub use inverse::{invert_flat_output, verify_certificate, CertificateCheck};
pub use linsolve::{solve_linear, LinearSolution};
pub use mu::{filter_mu, solve_mu, FreeFunction, MuFamily};
pub use pipeline::{
    build_omega, controllability_check, flatness_pipeline, nonflat_residual, restricted_omega, single_input_check, static_linearizability,
    Controllability, OmegaData, PipelineConfig, SingleInput,
};
pub use solve::{solve_for, Solved};
pub use system::{implicitize, reduce_order, variational_matrix, ExplicitSystem, ImplicitSystem};
pub use x0::X0;

use thiserror::Error;

use crate::jet_forms::JetError;
use crate::poly_matrix::MatrixError;
use crate::symexpr::ExprError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FlatnessError {
    #[error("input `{0}` cannot be eliminated; manual elimination required")]
    ManualEliminationRequired(String),
    #[error("equations are not regular: {0}")]
    RankDeficient(String),
    #[error("{0} is not closed")]
    NotClosed(String),
    #[error("cannot invert the flat output: {0}")]
    Inversion(String),
    #[error("search bound exhausted: {0}")]
    BoundExhausted(String),
    #[error("{stage}: {source}")]
    Matrix {
        stage: &'static str,
        #[source]
        source: MatrixError,
    },
    #[error("{stage}: {source}")]
    Jet {
        stage: &'static str,
        #[source]
        source: JetError,
    },
    #[error("{stage}: {source}")]
    Expr {
        stage: &'static str,
        #[source]
        source: ExprError,
    },
}

pub(crate) trait Stage<T> {
    fn stage(self, stage: &'static str) -> Result<T, FlatnessError>;
}

impl<T> Stage<T> for Result<T, MatrixError> {
    fn stage(self, stage: &'static str) -> Result<T, FlatnessError> {
        self.map_err(|source| FlatnessError::Matrix { stage, source })
    }
}

impl<T> Stage<T> for Result<T, JetError> {
    fn stage(self, stage: &'static str) -> Result<T, FlatnessError> {
        self.map_err(|source| FlatnessError::Jet { stage, source })
    }
}

impl<T> Stage<T> for Result<T, ExprError> {
    fn stage(self, stage: &'static str) -> Result<T, FlatnessError> {
        self.map_err(|source| FlatnessError::Expr { stage, source })
    }
}
