//! Serializable reports. Rationals are strings such as `3` or `1/2`; field
//! order is fixed, so output is byte-deterministic apart from timings.

use serde::Serialize;

use aara_fx::analysis::{AnalysisResult, BoundPolynomial, LpStats, Status};
use aara_fx::rational::{fmt_rat, Rational};

pub fn rat(q: &Rational) -> String {
    fmt_rat(q)
}

#[derive(Debug, Clone, Serialize)]
pub struct MetricReport {
    pub tick_calls: bool,
    pub tick_handlers: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct AnalyzeReport {
    pub file: String,
    pub metric: MetricReport,
    pub functions: Vec<FunctionReport>,
}

#[derive(Debug, Clone, Serialize)]
pub struct FunctionReport {
    pub name: String,
    pub status: &'static str,
    pub signature: Option<String>,
    pub bound: Option<BoundReport>,
    pub lp: LpReport,
    pub time_ms: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    pub pretty: String,
    pub constant: String,
    pub terms: Vec<TermReport>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TermReport {
    pub size: String,
    pub coefficient: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct LpReport {
    pub vars: usize,
    pub constraints: usize,
    pub pivots: usize,
}

pub fn status_name(s: Status) -> &'static str {
    match s {
        Status::Bounded => "bounded",
        Status::Unsolvable => "unsolvable",
    }
}

impl From<&BoundPolynomial> for BoundReport {
    fn from(b: &BoundPolynomial) -> BoundReport {
        BoundReport {
            pretty: b.to_string(),
            constant: rat(&b.constant),
            terms: b
                .terms
                .iter()
                .map(|(v, c)| TermReport {
                    size: v.display(&b.root).to_string(),
                    coefficient: rat(c),
                })
                .collect(),
        }
    }
}

impl From<LpStats> for LpReport {
    fn from(s: LpStats) -> LpReport {
        LpReport {
            vars: s.vars,
            constraints: s.constraints,
            pivots: s.pivots,
        }
    }
}

impl From<&AnalysisResult> for FunctionReport {
    fn from(r: &AnalysisResult) -> FunctionReport {
        FunctionReport {
            name: r.entry.clone(),
            status: status_name(r.status),
            signature: r.signature.as_ref().map(|s| s.display_fun().to_string()),
            bound: r.bound.as_ref().map(BoundReport::from),
            lp: r.lp_stats.into(),
            time_ms: r.elapsed.as_secs_f64() * 1000.0,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub program: String,
    pub entry: String,
    pub seed: u64,
    pub trials: u32,
    pub tight_trials: u32,
    pub bound: String,
    /// Least `bound - high_water` over all trials.
    pub min_slack: Option<String>,
    pub violations: Vec<Violation>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Violation {
    pub input: String,
    pub bound: String,
    pub high_water: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchReport {
    pub corpus: String,
    pub trials: u32,
    pub programs: Vec<BenchEntry>,
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchEntry {
    pub name: String,
    pub entry: String,
    pub expected: String,
    /// `bounded`, `unsolvable`, `rejected` or `error`.
    pub observed: String,
    pub signature: Option<String>,
    pub bound: Option<String>,
    pub matches: bool,
    pub mismatches: Vec<String>,
    pub mean_ms: f64,
}
