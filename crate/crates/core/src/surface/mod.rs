//! The user-facing language and the passes that turn it into analyzable core.

pub mod ast;
pub mod desugar;
mod lexer;
pub mod lower;
pub mod parser;
pub mod print;
pub mod sharing;
pub mod ticks;

pub use desugar::desugar_exceptions;
pub use lower::lower_to_fine_grain;
pub use parser::{parse, parse_expr, parse_stype};
pub use print::{print_expr, print_program};
pub use sharing::{insert_sharing, linearity_violations};
pub use ticks::{insert_ticks, CostMetric};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SurfaceError {
    #[error("{line}:{col}: syntax error: {msg}")]
    Syntax { line: u32, col: u32, msg: String },
    #[error("{line}:{col}: duplicate name `{name}`")]
    DuplicateName { name: String, line: u32, col: u32 },
    #[error("{line}:{col}: unknown effect label `{label}`")]
    UnknownEffectLabel { label: String, line: u32, col: u32 },
    #[error("{line}:{col}: unbound variable `{name}`")]
    Scope { name: String, line: u32, col: u32 },
    #[error("{line}:{col}: type error: {msg}")]
    Type { line: u32, col: u32, msg: String },
    #[error("continuation `{0}` is used more than once")]
    LinearReuse(String),
}

impl SurfaceError {
    /// Source position, if the error has one.
    pub fn position(&self) -> Option<(u32, u32)> {
        match self {
            SurfaceError::Syntax { line, col, .. }
            | SurfaceError::DuplicateName { line, col, .. }
            | SurfaceError::UnknownEffectLabel { line, col, .. }
            | SurfaceError::Scope { line, col, .. }
            | SurfaceError::Type { line, col, .. } => Some((*line, *col)),
            SurfaceError::LinearReuse(_) => None,
        }
    }
}
