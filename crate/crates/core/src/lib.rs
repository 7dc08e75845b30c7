//! Symbolic differential flatness checking for implicit control systems.

pub mod flatness;
pub mod jet_forms;
pub mod ore;
pub mod poly_matrix;
pub mod symexpr;
pub mod sysdsl;

pub use jet_forms::{DiffForm, FormOperator, JetError, JetMap, JetWindow};
pub use ore::{OreError, OrePoly};
pub use poly_matrix::{MatrixError, OreMatrix, SmithOptions, SmithResult};
pub use symexpr::{Expr, JetCoordinate, ScalarExpr};
pub use sysdsl::{parse_system, CertificateError, DslError, SystemSource};
pub use flatness::{flatness_pipeline, FlatnessCertificate, FlatnessError, PipelineConfig, Verdict};
