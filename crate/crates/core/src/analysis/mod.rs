//! Resource bound inference: constraint generation, LP solving, bounds.

pub mod bound;
pub mod certificate;
pub mod effects;
pub mod gen;
pub mod infer;

pub use bound::{eval_bound, BoundPolynomial, Measure, SizeVar, Step};
pub use certificate::{check_certificate, CertificateError};
pub use effects::effect_set_of;
pub use gen::{gen_constraints, ConstraintSystem, Template};
pub use infer::{infer_bound, AnalysisResult, LpStats, Status};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AnalysisError {
    #[error("effect `{label}` performed in `{site}` is not in its signature")]
    EffectNotInSignature { label: String, site: String },
    #[error("handler branch captures `{var}`, which is linear or carries potential")]
    LinearContextInHandler { var: String },
    #[error("effect label `{0}` is neither handled nor declared")]
    UnhandledLabelNotDeclared(String),
    #[error("unsupported program: {0}")]
    Unsupported(String),
}
