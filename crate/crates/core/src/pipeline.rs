//! Source text to analyzable core: parse, lower, desugar exceptions, insert
//! sharing and ticks, then check.

use crate::analysis::{infer_bound, AnalysisError, AnalysisResult};
use crate::check::{check_program, TypeError};
use crate::surface::{
    desugar_exceptions, insert_sharing, insert_ticks, lower_to_fine_grain, parse, CostMetric,
    SurfaceError,
};
use crate::syntax::Program;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PipelineError {
    #[error(transparent)]
    Surface(#[from] SurfaceError),
    #[error("type error: {0}")]
    Type(#[from] TypeError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error("unknown function `{0}`")]
    UnknownEntry(String),
}

#[derive(Debug, Clone)]
pub struct Compiled {
    /// Lowered program with `raise`/`try` still present.
    pub lowered: Program,
    /// Desugared, shared, ticked and checked.
    pub program: Program,
}

/// Runs the whole front end.
pub fn compile(src: &str, metric: CostMetric) -> Result<Compiled, PipelineError> {
    let lowered = lower_to_fine_grain(&parse(src)?)?;
    let desugared = desugar_exceptions(&lowered)?;
    let shared = insert_sharing(&desugared)?;
    let program = insert_ticks(&shared, metric);
    check_program(&program)?;
    Ok(Compiled { lowered, program })
}

/// Parses, lowers, desugars and ticks without the linearity pass or the
/// checker, so that ill-formed programs can still be executed.
pub fn compile_unchecked(src: &str, metric: CostMetric) -> Result<Program, PipelineError> {
    let lowered = lower_to_fine_grain(&parse(src)?)?;
    Ok(insert_ticks(&desugar_exceptions(&lowered)?, metric))
}

/// Analyzes `entry`, or every function in declaration order.
pub fn analyze_program(p: &Program, entry: Option<&str>) -> Result<Vec<AnalysisResult>, PipelineError> {
    match entry {
        Some(e) => {
            if p.fun(e).is_none() {
                return Err(PipelineError::UnknownEntry(e.to_string()));
            }
            Ok(vec![infer_bound(p, e)?])
        }
        None => p
            .funs
            .iter()
            .map(|d| infer_bound(p, &d.name).map_err(PipelineError::from))
            .collect(),
    }
}

pub fn analyze_source(
    src: &str,
    metric: CostMetric,
    entry: Option<&str>,
) -> Result<Vec<AnalysisResult>, PipelineError> {
    analyze_program(&compile(src, metric)?.program, entry)
}
