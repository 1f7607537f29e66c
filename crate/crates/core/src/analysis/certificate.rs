//! Independent re-checking of solved annotations.

use num_traits::Signed;

use crate::analysis::gen::gen_constraints;
use crate::analysis::AnalysisError;
use crate::lp::Assignment;
use crate::rational::fmt_rat;
use crate::syntax::Program;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CertificateError {
    #[error("violated at {tag}: {constraint}")]
    Violated { tag: String, constraint: String },
    #[error("annotation {var} is negative ({value})")]
    Negative { var: String, value: String },
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
}

/// Regenerates the constraints of `entry` and checks each one under `a`
/// with exact arithmetic. Unbound variables count as violations.
pub fn check_certificate(p: &Program, entry: &str, a: &Assignment) -> Result<(), CertificateError> {
    let sys = gen_constraints(p, entry)?;
    for (v, q) in a.iter() {
        if q.is_negative() {
            return Err(CertificateError::Negative {
                var: v.to_string(),
                value: fmt_rat(q),
            });
        }
    }
    for c in sys.constraints() {
        let ok = c.holds(a).unwrap_or(false);
        if !ok {
            return Err(CertificateError::Violated {
                tag: c.tag.to_string(),
                constraint: c.to_string(),
            });
        }
    }
    Ok(())
}
