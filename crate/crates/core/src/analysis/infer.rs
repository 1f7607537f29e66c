//! Bound inference: solve the entry's constraint system with a weighted
//! objective and read off the concrete signature and bound.

use std::time::{Duration, Instant};

use num_traits::{One, Zero};

use crate::analysis::bound::BoundPolynomial;
use crate::analysis::gen::{gen_constraints, ConstraintSystem, VAnn, VArrow, VTy};
use crate::analysis::AnalysisError;
use crate::lp::{solve, Assignment, LpError, Objective, Var};
use crate::rational::Rational;
use crate::syntax::Program;
use crate::types::{ConcreteArrow, Ty};

/// Weight multiplier per list nesting level in the entry argument.
pub const DEPTH_WEIGHT: i64 = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Bounded,
    Unsolvable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct LpStats {
    pub vars: usize,
    pub constraints: usize,
    pub pivots: usize,
}

#[derive(Debug, Clone)]
pub struct AnalysisResult {
    pub entry: String,
    pub status: Status,
    /// Present when bounded.
    pub signature: Option<ConcreteArrow>,
    pub bound: Option<BoundPolynomial>,
    /// The solved annotation assignment, a checkable certificate.
    pub assignment: Option<Assignment>,
    pub lp_stats: LpStats,
    pub elapsed: Duration,
}

impl AnalysisResult {
    pub fn is_bounded(&self) -> bool {
        self.status == Status::Bounded
    }
}

fn weigh_ty(obj: &mut Objective, t: &VTy, w: &Rational) {
    match t {
        Ty::Unit | Ty::Void | Ty::Int | Ty::Fun(_) => {}
        Ty::Prod(a, b) | Ty::Sum(a, b) => {
            weigh_ann(obj, a, w);
            weigh_ann(obj, b, w);
        }
        Ty::List(e) => weigh_ann(obj, e, &(w * Rational::from_integer(DEPTH_WEIGHT.into()))),
        Ty::LinFun(arrow) => weigh_arrow(obj, arrow, w),
    }
}

fn weigh_ann(obj: &mut Objective, a: &VAnn, w: &Rational) {
    obj.add(a.pot, w.clone());
    weigh_ty(obj, &a.ty, w);
}

fn weigh_arrow(obj: &mut Objective, a: &VArrow, w: &Rational) {
    weigh_ann(obj, &a.arg, w);
    weigh_ann(obj, &a.res, w);
    for e in &a.effects.entries {
        weigh_ann(obj, &e.input, w);
        weigh_ann(obj, &e.output, w);
    }
}

/// Weight 1 on constants, multiplied by 64 per list level of the argument;
/// result and effect annotations of the entry weigh 1.
pub fn objective_for(arrow: &VArrow) -> Objective {
    let mut obj = Objective::new();
    weigh_ann(&mut obj, &arrow.arg, &Rational::one());
    let mut rest: Vec<Var> = Vec::new();
    arrow.res.for_each_pot(&mut |v| rest.push(*v));
    arrow.effects.for_each_pot(&mut |v| rest.push(*v));
    for v in rest {
        obj.add(v, Rational::one());
    }
    obj
}

pub fn concretize(arrow: &VArrow, a: &Assignment) -> ConcreteArrow {
    arrow.map(&mut |v| a.get(*v).cloned().unwrap_or_else(Rational::zero))
}

/// Infers the best linear bound for `entry`.
pub fn infer_bound(p: &Program, entry: &str) -> Result<AnalysisResult, AnalysisError> {
    let start = Instant::now();
    let sys = gen_constraints(p, entry)?;
    let (r, _) = solve_system(p, entry, &sys, start)?;
    Ok(r)
}

/// Solves a generated system; also returns the system for inspection.
pub fn solve_system(
    p: &Program,
    entry: &str,
    sys: &ConstraintSystem,
    start: Instant,
) -> Result<(AnalysisResult, Objective), AnalysisError> {
    let t = sys.entry_template();
    let obj = objective_for(&t.arrow);
    let constraints = sys.constraints();
    let mut vars: Vec<Var> = constraints.iter().flat_map(|c| c.expr.vars()).collect();
    vars.extend(obj.weights().map(|(v, _)| v));
    vars.sort();
    vars.dedup();
    let mut stats = LpStats {
        vars: vars.len(),
        constraints: constraints.len(),
        pivots: 0,
    };
    let root = p.fun(entry).map(|d| d.param.to_string()).unwrap_or_else(|| "x".into());
    let result = match solve(constraints, &obj) {
        Ok(sol) => {
            stats.pivots = sol.pivots;
            let mut assignment = sol.assignment;
            // variables of the signature not mentioned by any constraint
            let mut sig_vars = Vec::new();
            t.arrow.for_each_pot(&mut |v| sig_vars.push(*v));
            for v in sig_vars {
                if assignment.get(v).is_none() {
                    assignment.set(v, Rational::zero());
                }
            }
            let signature = concretize(&t.arrow, &assignment);
            let bound = BoundPolynomial::from_signature(&root, &signature.arg);
            AnalysisResult {
                entry: entry.to_string(),
                status: Status::Bounded,
                signature: Some(signature),
                bound: Some(bound),
                assignment: Some(assignment),
                lp_stats: stats,
                elapsed: start.elapsed(),
            }
        }
        Err(LpError::Infeasible) => AnalysisResult {
            entry: entry.to_string(),
            status: Status::Unsolvable,
            signature: None,
            bound: None,
            assignment: None,
            lp_stats: stats,
            elapsed: start.elapsed(),
        },
        Err(LpError::Internal(m)) => return Err(AnalysisError::Unsupported(format!("LP solver: {m}"))),
    };
    Ok((result, obj))
}
