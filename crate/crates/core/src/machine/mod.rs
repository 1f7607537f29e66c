//! The K-machine: a stack machine with binder and handler frames, effect
//! propagation that captures delimited continuations, and a tick counter.

pub mod structure;
pub mod trace;

use std::fmt;
use std::sync::Arc;

use num_traits::Zero;

use crate::rational::{fmt_rat, Rational};
use crate::subst::{free_var_set, subst_comp, Subst};
use crate::syntax::{Computation, Dcont, Frame, Label, Program, PrimOp, SType, Value};

pub use structure::{check_state_structure, StructuralViolation};
pub use trace::TraceWriter;

/// Default bound on the number of transitions of a run.
pub const DEFAULT_STEP_LIMIT: u64 = 10_000_000;

/// Environment variable overriding the default step limit.
pub const STEP_LIMIT_ENV: &str = "AARA_FX_STEP_LIMIT";

pub fn step_limit_from_env() -> u64 {
    std::env::var(STEP_LIMIT_ENV)
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .unwrap_or(DEFAULT_STEP_LIMIT)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Focus {
    /// `k ▷ e`
    Eval(Computation),
    /// `k ◁ v`
    Return(Value),
    /// `k ◀ (ℓ, v, k')`; `captured` is kept top frame first.
    Propagate {
        label: Label,
        payload: Value,
        captured: Vec<Frame>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Mode {
    /// Resources available must cover every tick.
    Metered(Rational),
    /// Unlimited resources; only the counters are kept.
    Profile,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Counters {
    /// Remaining resources in metered mode.
    pub available: Option<Rational>,
    /// Sum of tick amounts so far.
    pub net: Rational,
    /// Maximum of `net` over all prefixes, at least 0.
    pub high_water: Rational,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MachineState {
    /// Bottom frame first.
    pub stack: Vec<Frame>,
    pub focus: Focus,
    pub counters: Counters,
    pub steps: u64,
    /// Type the empty stack expects, when known.
    pub result_ty: Option<SType>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Stuck {
    #[error("continuation applied a second time")]
    OneShotViolation,
    #[error("no transition applies: {0}")]
    UnhandledPrimitive(String),
    #[error("step limit of {0} exceeded")]
    StepLimit(u64),
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MachineError {
    #[error("initial computation has free variables: {0}")]
    OpenTerm(String),
    #[error("unknown entry function `{0}`")]
    UnknownEntry(String),
}

#[derive(Debug, Clone, PartialEq)]
pub enum OutcomeKind {
    Value(Value),
    UnhandledEffect { label: Label, payload: Value },
    ResourceExhausted { step: u64 },
    RuntimeError(Stuck),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub kind: OutcomeKind,
    pub net_cost: Rational,
    pub high_water: Rational,
    /// Resources left over in metered mode.
    pub remaining: Option<Rational>,
    pub steps: u64,
}

impl fmt::Display for OutcomeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OutcomeKind::Value(v) => write!(f, "value {v}"),
            OutcomeKind::UnhandledEffect { label, payload } => write!(f, "unhandled effect {label} {payload}"),
            OutcomeKind::ResourceExhausted { step } => write!(f, "resources exhausted at step {step}"),
            OutcomeKind::RuntimeError(s) => write!(f, "runtime error: {s}"),
        }
    }
}

/// Result of one transition.
#[derive(Debug, Clone, PartialEq)]
pub enum StepResult {
    /// A transition by the named rule.
    Next(&'static str),
    Final(OutcomeKind),
    Stuck(Stuck),
}

pub fn init_state(e: Computation, mode: Mode) -> Result<MachineState, MachineError> {
    let free = free_var_set(&e);
    if !free.is_empty() {
        let names: Vec<&str> = free.iter().map(|x| &**x).collect();
        return Err(MachineError::OpenTerm(names.join(", ")));
    }
    Ok(MachineState {
        stack: Vec::new(),
        focus: Focus::Eval(e),
        counters: Counters {
            available: match mode {
                Mode::Metered(b) => Some(b),
                Mode::Profile => None,
            },
            net: Rational::zero(),
            high_water: Rational::zero(),
        },
        steps: 0,
        result_ty: None,
    })
}

/// Initial state for `entry` applied to `arg`, with the entry's result
/// type recorded for structural checks.
pub fn init_entry_state(p: &Program, entry: &str, arg: Value, mode: Mode) -> Result<MachineState, MachineError> {
    let mut s = init_state(entry_call(p, entry, arg)?, mode)?;
    s.result_ty = p.fun(entry).map(|d| d.result_ty.clone());
    Ok(s)
}

fn stuck(msg: impl Into<String>) -> StepResult {
    StepResult::Stuck(Stuck::UnhandledPrimitive(msg.into()))
}

fn subst1(e: &Computation, x: &crate::syntax::Name, v: Value) -> Computation {
    subst_comp(e, &Subst::single(x.clone(), v))
}

fn prim(op: PrimOp, a: i64, b: i64) -> Value {
    let truth = |t: bool| if t { Value::inl(Value::Unit) } else { Value::inr(Value::Unit) };
    match op {
        PrimOp::Add => Value::Int(a.wrapping_add(b)),
        PrimOp::Sub => Value::Int(a.wrapping_sub(b)),
        PrimOp::Mul => Value::Int(a.wrapping_mul(b)),
        PrimOp::Lt => truth(a < b),
        PrimOp::Eq => truth(a == b),
    }
}

/// Performs one transition in place.
pub fn step(p: &Program, s: &mut MachineState) -> StepResult {
    let focus = std::mem::replace(&mut s.focus, Focus::Return(Value::Unit));
    let (next, rule) = match focus {
        Focus::Eval(e) => match eval(p, s, e) {
            Ok(r) => r,
            Err(r) => return r,
        },
        Focus::Return(v) => match s.stack.pop() {
            None => {
                s.focus = Focus::Return(v.clone());
                return StepResult::Final(OutcomeKind::Value(v));
            }
            Some(Frame::Bind { var, body, .. }) => (Focus::Eval(subst1(&body, &var, v)), "D-seq"),
            Some(Frame::Handler(h)) => (Focus::Eval(subst1(&h.ret_body, &h.ret_var, v)), "D-normal"),
        },
        Focus::Propagate {
            label,
            payload,
            mut captured,
        } => match s.stack.pop() {
            None => {
                s.focus = Focus::Propagate {
                    label: label.clone(),
                    payload: payload.clone(),
                    captured,
                };
                return StepResult::Final(OutcomeKind::UnhandledEffect { label, payload });
            }
            Some(f @ Frame::Bind { .. }) => {
                captured.push(f);
                (
                    Focus::Propagate {
                        label,
                        payload,
                        captured,
                    },
                    "D-capture",
                )
            }
            Some(Frame::Handler(h)) => {
                let Some(b) = h.branch(&label) else {
                    s.stack.push(Frame::Handler(h));
                    return stuck(format!("handler does not cover effect `{label}`"));
                };
                let body = b.body.clone();
                let (x, c) = (b.payload.clone(), b.cont.clone());
                let mut frames = Vec::with_capacity(captured.len() + 1);
                frames.push(Frame::Handler(h));
                frames.extend(captured.into_iter().rev());
                let d = Value::Dcont(Arc::new(Dcont::new(frames)));
                let sub = Subst::new().with(x, payload).with(c, d);
                (Focus::Eval(subst_comp(&body, &sub)), "D-handle")
            }
        },
    };
    s.focus = next;
    s.steps += 1;
    StepResult::Next(rule)
}

type Transition = Result<(Focus, &'static str), StepResult>;

fn eval(p: &Program, s: &mut MachineState, e: Computation) -> Transition {
    let restore = |s: &mut MachineState, e: Computation, r: StepResult| {
        s.focus = Focus::Eval(e);
        Err(r)
    };
    match e {
        Computation::Ret(v) => Ok((Focus::Return(v), "D-ret")),
        Computation::Let { var, ty, bound, body } => {
            s.stack.push(Frame::Bind {
                var,
                ty,
                body: Arc::new(*body),
            });
            Ok((Focus::Eval(*bound), "D-let"))
        }
        Computation::Tick(q) => {
            let c = &mut s.counters;
            if let Some(avail) = &mut c.available {
                if *avail < q {
                    let at = s.steps;
                    return restore(
                        s,
                        Computation::Tick(q),
                        StepResult::Final(OutcomeKind::ResourceExhausted { step: at }),
                    );
                }
                *avail -= &q;
            }
            c.net += &q;
            if c.net > c.high_water {
                c.high_water = c.net.clone();
            }
            Ok((Focus::Return(Value::Unit), "D-tick"))
        }
        Computation::App(Value::Fun(f), v) => match p.fun(&f) {
            Some(d) => Ok((Focus::Eval(subst1(&d.body, &d.param, v)), "D-fun")),
            None => restore(s, Computation::App(Value::Fun(f.clone()), v), stuck(format!("unknown function `{f}`"))),
        },
        Computation::LinApp(Value::LinLam(l), v) => Ok((Focus::Eval(subst1(&l.body, &l.param, v)), "D-linfun")),
        Computation::LinApp(Value::Dcont(d), v) => {
            if !d.take() {
                return restore(
                    s,
                    Computation::LinApp(Value::Dcont(d), v),
                    StepResult::Stuck(Stuck::OneShotViolation),
                );
            }
            s.stack.extend(d.frames.iter().cloned());
            Ok((Focus::Return(v), "D-dcont"))
        }
        Computation::CasePair { scrut: Value::Pair(a, b), left, right, body, .. } => {
            let sub = Subst::new().with(left, (*a).clone()).with(right, (*b).clone());
            Ok((Focus::Eval(subst_comp(&body, &sub)), "D-pair"))
        }
        Computation::CaseSum { scrut: Value::Inl(v), left, left_body, .. } => {
            Ok((Focus::Eval(subst1(&left_body, &left, (*v).clone())), "D-inl"))
        }
        Computation::CaseSum { scrut: Value::Inr(v), right, right_body, .. } => {
            Ok((Focus::Eval(subst1(&right_body, &right, (*v).clone())), "D-inr"))
        }
        Computation::CaseList { scrut: Value::Nil, nil_body, .. } => Ok((Focus::Eval(*nil_body), "D-nil")),
        Computation::CaseList { scrut: Value::Cons(h, t), head, tail, cons_body, .. } => {
            let sub = Subst::new().with(head, (*h).clone()).with(tail, (*t).clone());
            Ok((Focus::Eval(subst_comp(&cons_body, &sub)), "D-cons"))
        }
        Computation::Do { label, payload } => Ok((
            Focus::Propagate {
                label,
                payload,
                captured: Vec::new(),
            },
            "D-do",
        )),
        Computation::Handle { body, handler } => {
            s.stack.push(Frame::Handler(handler));
            Ok((Focus::Eval(*body), "D-try"))
        }
        Computation::Prim { op, left: Value::Int(a), right: Value::Int(b) } => {
            Ok((Focus::Return(prim(op, a, b)), "D-prim"))
        }
        Computation::Share { value, left, right, body, .. } => {
            let sub = Subst::new().with(left, value.clone()).with(right, value);
            Ok((Focus::Eval(subst_comp(&body, &sub)), "D-share"))
        }
        other => {
            let msg = format!("cannot evaluate `{}`", short(&other));
            restore(s, other, stuck(msg))
        }
    }
}

fn short(e: &Computation) -> String {
    let text = e.to_string();
    let line = text.lines().next().unwrap_or_default();
    if line.len() > 60 {
        format!("{}...", &line[..line.char_indices().nth(60).map_or(line.len(), |(i, _)| i)])
    } else {
        line.to_string()
    }
}

/// Options for a run beyond the resource mode.
#[derive(Default)]
pub struct RunOptions<'a> {
    pub step_limit: Option<u64>,
    /// Per-step structural check; the first violation aborts the run.
    pub check_structure: bool,
    pub trace: Option<&'a mut TraceWriter>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("step {step}: {violation}")]
pub struct StructureFailure {
    pub step: u64,
    pub violation: StructuralViolation,
}

/// Runs a closed computation to a final state or error.
pub fn run_comp(p: &Program, e: Computation, mode: Mode, opts: RunOptions<'_>) -> Result<Outcome, MachineError> {
    run_checked(p, e, mode, opts).map(|(o, _)| o)
}

/// Like `run_comp`, also returning the first structural violation seen.
pub fn run_checked(
    p: &Program,
    e: Computation,
    mode: Mode,
    mut opts: RunOptions<'_>,
) -> Result<(Outcome, Option<StructureFailure>), MachineError> {
    let result_ty = match &e {
        Computation::App(Value::Fun(f), _) => p.fun(f).map(|d| d.result_ty.clone()),
        _ => None,
    };
    let mut s = init_state(e, mode)?;
    s.result_ty = result_ty;
    let limit = opts.step_limit.unwrap_or(DEFAULT_STEP_LIMIT);
    let mut failure = None;
    let kind = loop {
        if opts.check_structure && failure.is_none() {
            if let Err(v) = check_state_structure(p, &s) {
                failure = Some(StructureFailure {
                    step: s.steps,
                    violation: v,
                });
            }
        }
        if s.steps >= limit {
            break OutcomeKind::RuntimeError(Stuck::StepLimit(limit));
        }
        match step(p, &mut s) {
            StepResult::Next(rule) => {
                if let Some(t) = opts.trace.as_deref_mut() {
                    t.record(s.steps, rule, &s);
                }
            }
            StepResult::Final(k) => break k,
            StepResult::Stuck(r) => break OutcomeKind::RuntimeError(r),
        }
    };
    Ok((
        Outcome {
            kind,
            net_cost: s.counters.net,
            high_water: s.counters.high_water,
            remaining: s.counters.available,
            steps: s.steps,
        },
        failure,
    ))
}

/// The computation that applies `entry` to `arg`.
pub fn entry_call(p: &Program, entry: &str, arg: Value) -> Result<Computation, MachineError> {
    let d = p.fun(entry).ok_or_else(|| MachineError::UnknownEntry(entry.to_string()))?;
    Ok(Computation::App(Value::Fun(d.name.clone()), arg))
}

pub fn run(p: &Program, entry: &str, arg: Value, mode: Mode, opts: RunOptions<'_>) -> Result<Outcome, MachineError> {
    run_comp(p, entry_call(p, entry, arg)?, mode, opts)
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "outcome: {}", self.kind)?;
        writeln!(f, "net cost: {}", fmt_rat(&self.net_cost))?;
        writeln!(f, "high-water mark: {}", fmt_rat(&self.high_water))?;
        if let Some(r) = &self.remaining {
            writeln!(f, "remaining: {}", fmt_rat(r))?;
        }
        write!(f, "steps: {}", self.steps)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{rat, ratio};
    use crate::syntax::{name, Branch, HandlerDef, SType};

    fn seq(a: Computation, b: Computation) -> Computation {
        Computation::let_(name("_"), SType::Unit, a, b)
    }

    fn profile(e: Computation) -> Outcome {
        run_comp(&Program::default(), e, Mode::Profile, RunOptions::default()).unwrap()
    }

    fn metered(e: Computation, b: Rational) -> Outcome {
        run_comp(&Program::default(), e, Mode::Metered(b), RunOptions::default()).unwrap()
    }

    #[test]
    fn ret_is_immediately_final() {
        let o = metered(Computation::Ret(Value::Unit), rat(0));
        assert_eq!(o.kind, OutcomeKind::Value(Value::Unit));
        assert_eq!(o.remaining, Some(rat(0)));
    }

    #[test]
    fn tick_consumes_budget() {
        let o = metered(Computation::Tick(rat(1)), rat(1));
        assert_eq!(o.kind, OutcomeKind::Value(Value::Unit));
        assert_eq!(o.remaining, Some(rat(0)));
        let o = metered(Computation::Tick(rat(1)), ratio(1, 2));
        assert_eq!(o.kind, OutcomeKind::ResourceExhausted { step: 0 });
    }

    #[test]
    fn profile_tracks_high_water() {
        let o = profile(seq(Computation::Tick(rat(1)), Computation::Tick(rat(-1))));
        assert_eq!(o.net_cost, rat(0));
        assert_eq!(o.high_water, rat(1));
    }

    #[test]
    fn let_pushes_a_bind_frame() {
        let e = Computation::let_(name("x"), SType::Unit, Computation::Ret(Value::Unit), Computation::Ret(Value::Var(name("x"))));
        let mut s = init_state(e, Mode::Profile).unwrap();
        assert_eq!(step(&Program::default(), &mut s), StepResult::Next("D-let"));
        assert_eq!(s.stack.len(), 1);
        assert_eq!(s.focus, Focus::Eval(Computation::Ret(Value::Unit)));
    }

    #[test]
    fn capture_moves_frames_below_the_accumulator() {
        let body = Arc::new(Computation::Ret(Value::Unit));
        let bind = |x: &str| Frame::Bind {
            var: name(x),
            ty: SType::Unit,
            body: body.clone(),
        };
        let mut s = init_state(Computation::Ret(Value::Unit), Mode::Profile).unwrap();
        s.stack = vec![bind("a"), bind("b")];
        s.focus = Focus::Propagate {
            label: name("L"),
            payload: Value::Unit,
            captured: vec![],
        };
        let p = Program::default();
        assert_eq!(step(&p, &mut s), StepResult::Next("D-capture"));
        assert_eq!(step(&p, &mut s), StepResult::Next("D-capture"));
        let Focus::Propagate { captured, .. } = &s.focus else { panic!() };
        assert_eq!(captured, &vec![bind("b"), bind("a")]);
    }

    #[test]
    fn unhandled_effect_is_final() {
        let o = profile(Computation::Do {
            label: name("L"),
            payload: Value::Int(3),
        });
        assert_eq!(
            o.kind,
            OutcomeKind::UnhandledEffect {
                label: name("L"),
                payload: Value::Int(3)
            }
        );
    }

    #[test]
    fn second_resume_is_a_one_shot_violation() {
        let k = name("k");
        let handler = HandlerDef {
            body_ty: SType::Unit,
            branches: vec![Branch {
                label: name("L"),
                payload: name("x"),
                cont: k.clone(),
                body: seq(
                    Computation::LinApp(Value::Var(k.clone()), Value::Unit),
                    Computation::LinApp(Value::Var(k), Value::Unit),
                ),
            }],
            ret_var: name("y"),
            ret_body: Computation::Ret(Value::Var(name("y"))),
            res_ty: SType::Unit,
            ambient: Default::default(),
        };
        let e = Computation::Handle {
            body: Box::new(Computation::Do {
                label: name("L"),
                payload: Value::Unit,
            }),
            handler: Arc::new(handler),
        };
        assert_eq!(profile(e).kind, OutcomeKind::RuntimeError(Stuck::OneShotViolation));
    }

    #[test]
    fn open_terms_are_rejected() {
        let e = Computation::Ret(Value::Var(name("x")));
        assert!(matches!(init_state(e, Mode::Profile), Err(MachineError::OpenTerm(_))));
    }
}
