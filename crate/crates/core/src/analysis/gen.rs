//! Constraint generation: the algorithmic typing rules with structural
//! rules folded in. Each judgment is checked against an expected annotated
//! result and yields the input potential it requires; weakening makes any
//! larger input acceptable.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use num_traits::{Signed, Zero};

use crate::analysis::AnalysisError;
use crate::lp::{Constraint, LinExpr, Var, VarPool};
use crate::subst::free_vars;
use crate::syntax::{Computation, FnType, HandlerDef, LabelSet, LinLam, Name, Program, SType, Value};
use crate::types::{Ann, Arrow, EffectSig, FunRef, SigEntry, Ty};

pub type VAnn = Ann<Var>;
pub type VTy = Ty<Var>;
pub type VArrow = Arrow<Var>;
pub type VSig = EffectSig<Var>;

/// The constraint family of one function: its annotated arrow over the
/// variables it owns, plus every constraint generated for its body,
/// including inlined instances of its callees.
#[derive(Debug, Clone)]
pub struct Template {
    pub name: Name,
    pub arrow: VArrow,
    /// Variables `lo..hi` were allocated while generating this template.
    pub vars: (u32, u32),
    /// Function-type slots `lo..hi` likewise.
    pub slots: (usize, usize),
    pub constraints: Vec<Constraint>,
}

/// Templates for an entry function and everything it calls.
#[derive(Debug, Clone)]
pub struct ConstraintSystem {
    pub entry: Name,
    pub pool: VarPool,
    /// Monomorphic arrows standing for function-typed positions.
    pub slots: Vec<VArrow>,
    /// Dependency order; the entry comes last.
    pub templates: Vec<Arc<Template>>,
}

impl ConstraintSystem {
    pub fn entry_template(&self) -> &Template {
        self.templates.last().expect("entry template")
    }

    /// The constraints of the entry's template, which form the LP.
    pub fn constraints(&self) -> &[Constraint] {
        &self.entry_template().constraints
    }

    pub fn template(&self, name: &str) -> Option<&Template> {
        self.templates.iter().find(|t| &*t.name == name).map(|t| &**t)
    }
}

/// Generates the constraint system of `entry` and the functions it reaches.
pub fn gen_constraints(p: &Program, entry: &str) -> Result<ConstraintSystem, AnalysisError> {
    let order = dependency_order(p, entry)?;
    let mut g = Gen {
        prog: p,
        pool: VarPool::new(),
        slots: Vec::new(),
        templates: BTreeMap::new(),
        current: None,
        out: Vec::new(),
        site: Arc::from(""),
    };
    let mut templates = Vec::new();
    for f in order {
        let t = Arc::new(g.template(&f)?);
        g.templates.insert(f, t.clone());
        templates.push(t);
    }
    Ok(ConstraintSystem {
        entry: Arc::from(entry),
        pool: g.pool,
        slots: g.slots,
        templates,
    })
}

fn referenced_funs(c: &Computation) -> Vec<Name> {
    let mut out = Vec::new();
    c.for_each_value(&mut |v| collect_funs(v, &mut out));
    out
}

fn collect_funs(v: &Value, out: &mut Vec<Name>) {
    match v {
        Value::Fun(f) => {
            if !out.contains(f) {
                out.push(f.clone());
            }
        }
        Value::Pair(a, b) | Value::Cons(a, b) => {
            collect_funs(a, out);
            collect_funs(b, out);
        }
        Value::Inl(a) | Value::Inr(a) => collect_funs(a, out),
        Value::LinLam(l) => {
            for f in referenced_funs(&l.body) {
                if !out.contains(&f) {
                    out.push(f);
                }
            }
        }
        _ => {}
    }
}

/// Callees before callers; self-recursion is allowed, mutual recursion is not.
fn dependency_order(p: &Program, entry: &str) -> Result<Vec<Name>, AnalysisError> {
    fn visit(p: &Program, f: &Name, on_path: &mut Vec<Name>, done: &mut Vec<Name>) -> Result<(), AnalysisError> {
        if done.contains(f) {
            return Ok(());
        }
        if on_path.contains(f) {
            return Err(AnalysisError::Unsupported(format!("mutual recursion through `{f}`")));
        }
        let d = p
            .fun(f)
            .ok_or_else(|| AnalysisError::Unsupported(format!("unknown function `{f}`")))?;
        on_path.push(f.clone());
        for g in referenced_funs(&d.body) {
            if &g != f {
                visit(p, &g, on_path, done)?;
            }
        }
        on_path.pop();
        done.push(f.clone());
        Ok(())
    }
    let mut done = Vec::new();
    visit(p, &Arc::from(entry), &mut Vec::new(), &mut done)?;
    Ok(done)
}

type Env = Vec<(Name, VTy)>;

fn lookup<'a>(env: &'a Env, x: &str) -> Option<&'a VTy> {
    env.iter().rev().find(|(n, _)| &**n == x).map(|(_, t)| t)
}

fn with_env<T>(env: &mut Env, binders: Vec<(Name, VTy)>, f: impl FnOnce(&mut Env) -> T) -> T {
    let depth = env.len();
    env.extend(binders);
    let r = f(env);
    env.truncate(depth);
    r
}

fn unsupported<T>(msg: impl Into<String>) -> Result<T, AnalysisError> {
    Err(AnalysisError::Unsupported(msg.into()))
}

struct Gen<'p> {
    prog: &'p Program,
    pool: VarPool,
    slots: Vec<VArrow>,
    templates: BTreeMap<Name, Arc<Template>>,
    /// Function being generated and its own arrow, used for self-calls.
    current: Option<(Name, VArrow)>,
    out: Vec<Constraint>,
    site: Arc<str>,
}

impl<'p> Gen<'p> {
    fn tag(&self, rule: &str) -> String {
        format!("{}: {rule}", self.site)
    }

    fn ge(&mut self, e: LinExpr, rule: &str) {
        if e.is_constant() && !e.constant_part().is_negative() {
            return;
        }
        let tag = self.tag(rule);
        self.out.push(Constraint::ge(e, tag));
    }

    fn eq(&mut self, e: LinExpr, rule: &str) {
        if e.is_constant() && e.constant_part().is_zero() {
            return;
        }
        let tag = self.tag(rule);
        self.out.push(Constraint::eq(e, tag));
    }

    fn fresh(&mut self, tag: &str) -> Var {
        self.pool.new_var(format!("{}.{tag}", self.site))
    }

    /// A variable at least `e`, or `e` itself when it is visibly nonnegative.
    fn nonneg(&mut self, e: LinExpr, rule: &str) -> LinExpr {
        if !e.constant_part().is_negative() && e.terms().all(|(_, c)| !c.is_negative()) {
            return e;
        }
        let v = self.fresh(rule);
        self.ge(LinExpr::var(v).minus(&e), rule);
        LinExpr::var(v)
    }

    // -- fresh annotated types ------------------------------------------------

    fn fresh_ty(&mut self, s: &SType, tag: &str) -> Result<VTy, AnalysisError> {
        Ok(match s {
            SType::Unit => Ty::Unit,
            SType::Void => Ty::Void,
            SType::Int => Ty::Int,
            SType::Prod(a, b) => Ty::Prod(
                Box::new(self.fresh_ann(a, &format!("{tag}.0"))?),
                Box::new(self.fresh_ann(b, &format!("{tag}.1"))?),
            ),
            SType::Sum(a, b) => Ty::Sum(
                Box::new(self.fresh_ann(a, &format!("{tag}.inl"))?),
                Box::new(self.fresh_ann(b, &format!("{tag}.inr"))?),
            ),
            SType::List(a) => Ty::List(Box::new(self.fresh_ann(a, &format!("{tag}[i]"))?)),
            SType::Fun(ft) => {
                let arrow = self.fresh_arrow(ft, tag)?;
                let id = u32::try_from(self.slots.len()).expect("slot count");
                self.slots.push(arrow);
                Ty::Fun(FunRef {
                    id,
                    shape: Arc::new((**ft).clone()),
                })
            }
            SType::LinFun(ft) => Ty::LinFun(Box::new(self.fresh_arrow(ft, tag)?)),
        })
    }

    fn fresh_ann(&mut self, s: &SType, tag: &str) -> Result<VAnn, AnalysisError> {
        let pot = self.fresh(tag);
        Ok(Ann {
            ty: self.fresh_ty(s, tag)?,
            pot,
        })
    }

    fn fresh_sig(&mut self, labels: &LabelSet, tag: &str) -> Result<VSig, AnalysisError> {
        let mut entries = Vec::new();
        for l in self.prog.ordered_labels(labels) {
            let d = self
                .prog
                .effect(&l)
                .ok_or_else(|| AnalysisError::UnhandledLabelNotDeclared(l.to_string()))?;
            let (i, o) = (d.input.clone(), d.output.clone());
            entries.push(SigEntry {
                input: self.fresh_ann(&i, &format!("{tag}.{l}.in"))?,
                output: self.fresh_ann(&o, &format!("{tag}.{l}.out"))?,
                label: l,
            });
        }
        Ok(EffectSig { entries })
    }

    fn fresh_arrow(&mut self, ft: &FnType, tag: &str) -> Result<VArrow, AnalysisError> {
        Ok(Arrow {
            arg: self.fresh_ann(&ft.arg, &format!("{tag}.arg"))?,
            res: self.fresh_ann(&ft.res, &format!("{tag}.res"))?,
            effects: self.fresh_sig(&ft.effects, tag)?,
        })
    }

    /// A type of the same shape with fresh annotations; function slots are
    /// shared since function types carry no potential.
    fn fresh_like(&mut self, t: &VTy, tag: &str) -> Result<VTy, AnalysisError> {
        Ok(match t {
            Ty::Unit => Ty::Unit,
            Ty::Void => Ty::Void,
            Ty::Int => Ty::Int,
            Ty::Prod(a, b) => Ty::Prod(Box::new(self.fresh_ann_like(a, tag)?), Box::new(self.fresh_ann_like(b, tag)?)),
            Ty::Sum(a, b) => Ty::Sum(Box::new(self.fresh_ann_like(a, tag)?), Box::new(self.fresh_ann_like(b, tag)?)),
            Ty::List(a) => Ty::List(Box::new(self.fresh_ann_like(a, tag)?)),
            Ty::Fun(r) => Ty::Fun(r.clone()),
            Ty::LinFun(_) => return unsupported("linear function values cannot be copied"),
        })
    }

    fn fresh_ann_like(&mut self, a: &VAnn, tag: &str) -> Result<VAnn, AnalysisError> {
        Ok(Ann {
            pot: self.fresh(tag),
            ty: self.fresh_like(&a.ty, tag)?,
        })
    }

    // -- relations between annotated types ---------------------------------

    fn ann_eq(&mut self, a: &VAnn, b: &VAnn, rule: &str) -> Result<(), AnalysisError> {
        if a.pot != b.pot {
            self.eq(LinExpr::var(a.pot).minus_var(b.pot), rule);
        }
        self.ty_eq(&a.ty, &b.ty, rule)
    }

    fn ty_eq(&mut self, a: &VTy, b: &VTy, rule: &str) -> Result<(), AnalysisError> {
        match (a, b) {
            (Ty::Unit, Ty::Unit) | (Ty::Void, Ty::Void) | (Ty::Int, Ty::Int) => Ok(()),
            (Ty::Prod(a1, a2), Ty::Prod(b1, b2)) | (Ty::Sum(a1, a2), Ty::Sum(b1, b2)) => {
                self.ann_eq(a1, b1, rule)?;
                self.ann_eq(a2, b2, rule)
            }
            (Ty::List(a), Ty::List(b)) => self.ann_eq(a, b, rule),
            (Ty::Fun(r), Ty::Fun(s)) => self.slot_eq(r.id, s.id, rule),
            (Ty::LinFun(x), Ty::LinFun(y)) => self.arrow_eq(x, y, rule),
            _ => unsupported(format!("annotated types of different shape: `{}` and `{}`", a.erase(), b.erase())),
        }
    }

    fn slot_eq(&mut self, r: u32, s: u32, rule: &str) -> Result<(), AnalysisError> {
        if r == s {
            return Ok(());
        }
        let (x, y) = (self.slots[r as usize].clone(), self.slots[s as usize].clone());
        self.arrow_eq(&x, &y, rule)
    }

    fn arrow_eq(&mut self, x: &VArrow, y: &VArrow, rule: &str) -> Result<(), AnalysisError> {
        self.ann_eq(&x.arg, &y.arg, rule)?;
        self.ann_eq(&x.res, &y.res, rule)?;
        if x.effects.entries.len() != y.effects.entries.len() {
            return unsupported("effect signatures of different shape");
        }
        for (e, f) in x.effects.entries.iter().zip(&y.effects.entries) {
            if e.label != f.label {
                return unsupported("effect signatures of different shape");
            }
            self.ann_eq(&e.input, &f.input, rule)?;
            self.ann_eq(&e.output, &f.output, rule)?;
        }
        Ok(())
    }

    /// A value of type `from` used at type `to`: sharing into `to` and a
    /// discarded remainder, so positive annotations may only decrease.
    fn flow(&mut self, from: &VTy, to: &VTy, rule: &str) -> Result<(), AnalysisError> {
        match (from, to) {
            (Ty::Unit, Ty::Unit) | (Ty::Void, Ty::Void) | (Ty::Int, Ty::Int) => Ok(()),
            (Ty::Prod(a1, a2), Ty::Prod(b1, b2)) | (Ty::Sum(a1, a2), Ty::Sum(b1, b2)) => {
                self.flow_ann(a1, b1, rule)?;
                self.flow_ann(a2, b2, rule)
            }
            (Ty::List(a), Ty::List(b)) => self.flow_ann(a, b, rule),
            _ => self.ty_eq(from, to, rule),
        }
    }

    fn flow_ann(&mut self, from: &VAnn, to: &VAnn, rule: &str) -> Result<(), AnalysisError> {
        if from.pot != to.pot {
            self.ge(LinExpr::var(from.pot).minus_var(to.pot), rule);
        }
        self.flow(&from.ty, &to.ty, rule)
    }

    /// Flows a callee's result into `out`; the context may top up the constant
    /// potential, and the returned expression is that top-up.
    fn frame(&mut self, from: &VAnn, to: &VAnn, rule: &str) -> Result<LinExpr, AnalysisError> {
        self.flow(&from.ty, &to.ty, rule)?;
        if from.pot == to.pot {
            return Ok(LinExpr::zero());
        }
        Ok(self.nonneg(LinExpr::var(to.pot).minus_var(from.pot), rule))
    }

    /// Pointwise `whole ≥ left + right` over every annotation.
    fn share(&mut self, whole: &VTy, left: &VTy, right: &VTy) -> Result<(), AnalysisError> {
        let mut w = Vec::new();
        let mut l = Vec::new();
        let mut r = Vec::new();
        whole.for_each_pot(&mut |v| w.push(*v));
        left.for_each_pot(&mut |v| l.push(*v));
        right.for_each_pot(&mut |v| r.push(*v));
        for ((a, b), c) in w.into_iter().zip(l).zip(r) {
            self.ge(LinExpr::var(a).minus_var(b).minus_var(c), "share");
        }
        Ok(())
    }

    /// A potential-free copy of a variable captured by a handler branch.
    fn zeroed(&mut self, x: &Name, t: &VTy) -> Result<VTy, AnalysisError> {
        if t.contains_linear() {
            return Err(AnalysisError::LinearContextInHandler { var: x.to_string() });
        }
        let z = self.fresh_like(t, &format!("zero.{x}"))?;
        let mut vars = Vec::new();
        z.for_each_pot(&mut |v| vars.push(*v));
        for v in vars {
            self.eq(LinExpr::var(v), "zeroing");
        }
        Ok(z)
    }

    /// Every callee entry must coincide with the ambient entry of its label.
    fn sig_within(&mut self, callee: &VSig, ambient: &VSig, rule: &str) -> Result<(), AnalysisError> {
        for e in &callee.entries {
            let Some(d) = ambient.get(&e.label) else {
                return Err(AnalysisError::EffectNotInSignature {
                    label: e.label.to_string(),
                    site: self.site.to_string(),
                });
            };
            let d = d.clone();
            self.ann_eq(&e.input, &d.input, rule)?;
            self.ann_eq(&e.output, &d.output, rule)?;
        }
        Ok(())
    }

    // -- templates -----------------------------------------------------------

    fn template(&mut self, f: &Name) -> Result<Template, AnalysisError> {
        let d = self.prog.fun(f).expect("ordered function").clone();
        self.site = f.clone();
        let lo = self.pool.len() as u32;
        let slot_lo = self.slots.len();
        let arrow = self.fresh_arrow(&d.fn_type(), "sig")?;
        self.current = Some((f.clone(), arrow.clone()));
        self.out.clear();
        let mut env = vec![(d.param.clone(), arrow.arg.ty.clone())];
        let req = self.comp(&mut env, &d.body, &arrow.res, &arrow.effects)?;
        self.ge(LinExpr::var(arrow.arg.pot).minus(&req), "T-Fun");
        self.current = None;
        Ok(Template {
            name: f.clone(),
            arrow,
            vars: (lo, self.pool.len() as u32),
            slots: (slot_lo, self.slots.len()),
            constraints: std::mem::take(&mut self.out),
        })
    }

    /// A fresh copy of `f`'s constraint family; self-calls reuse the
    /// defining template (monomorphic recursion).
    fn arrow_of(&mut self, f: &Name) -> Result<VArrow, AnalysisError> {
        if let Some((g, arrow)) = &self.current {
            if g == f {
                return Ok(arrow.clone());
            }
        }
        let t = self
            .templates
            .get(f)
            .cloned()
            .ok_or_else(|| AnalysisError::Unsupported(format!("unknown function `{f}`")))?;
        let (lo, hi) = t.vars;
        let base = self.pool.len() as u32;
        for v in lo..hi {
            let tag = self.pool.shared_tag(Var(v)).expect("template variable");
            self.pool.new_var(tag);
        }
        let var = move |v: Var| if v.0 >= lo && v.0 < hi { Var(v.0 - lo + base) } else { v };
        let (slo, shi) = t.slots;
        let sbase = self.slots.len();
        let slot = move |id: u32| {
            let i = id as usize;
            if i >= slo && i < shi {
                (i - slo + sbase) as u32
            } else {
                id
            }
        };
        for i in slo..shi {
            let a = rename_arrow(&self.slots[i], &var, &slot);
            self.slots.push(a);
        }
        for c in &t.constraints {
            self.out.push(Constraint {
                expr: c.expr.rename(&var),
                rel: c.rel,
                tag: c.tag.clone(),
            });
        }
        Ok(rename_arrow(&t.arrow, &var, &slot))
    }

    // -- values ----------------------------------------------------------------

    /// Potential needed to type `v` at `expected`.
    fn value(&mut self, env: &mut Env, v: &Value, expected: &VTy) -> Result<LinExpr, AnalysisError> {
        match (v, expected) {
            (Value::Var(x), _) => {
                let t = lookup(env, x)
                    .cloned()
                    .ok_or_else(|| AnalysisError::Unsupported(format!("unbound variable `{x}`")))?;
                self.flow(&t, expected, "T-Var")?;
                Ok(LinExpr::zero())
            }
            (Value::Unit, Ty::Unit) | (Value::Int(_), Ty::Int) | (Value::Nil, Ty::List(_)) => Ok(LinExpr::zero()),
            (Value::Pair(a, b), Ty::Prod(ta, tb)) => {
                let ra = self.value(env, a, &ta.ty)?;
                let rb = self.value(env, b, &tb.ty)?;
                Ok(ra.plus(&rb).plus_var(ta.pot).plus_var(tb.pot))
            }
            (Value::Inl(a), Ty::Sum(ta, _)) => Ok(self.value(env, a, &ta.ty)?.plus_var(ta.pot)),
            (Value::Inr(b), Ty::Sum(_, tb)) => Ok(self.value(env, b, &tb.ty)?.plus_var(tb.pot)),
            (Value::Cons(h, t), Ty::List(e)) => {
                let rh = self.value(env, h, &e.ty)?;
                let rt = self.value(env, t, expected)?;
                Ok(rh.plus(&rt).plus_var(e.pot))
            }
            (Value::Fun(f), Ty::Fun(slot)) => {
                let arrow = self.arrow_of(f)?;
                let s = self.slots[slot.id as usize].clone();
                self.arrow_eq(&arrow, &s, "T-Fun")?;
                Ok(LinExpr::zero())
            }
            (Value::LinLam(l), Ty::LinFun(arrow)) => self.lin_lam(env, l, arrow),
            _ => unsupported(format!("value `{v}` at type `{}`", expected.erase())),
        }
    }

    fn lin_lam(&mut self, env: &mut Env, l: &LinLam, arrow: &VArrow) -> Result<LinExpr, AnalysisError> {
        let req = with_env(env, vec![(l.param.clone(), arrow.arg.ty.clone())], |env| {
            self.comp(env, &l.body, &arrow.res, &arrow.effects)
        })?;
        Ok(self.nonneg(req.minus_var(arrow.arg.pot), "T-LinFun"))
    }

    /// Type of a scrutinee and the potential needed to produce it.
    fn scrutinee(&mut self, env: &mut Env, v: &Value, s: &SType) -> Result<(VTy, LinExpr), AnalysisError> {
        if let Value::Var(x) = v {
            if let Some(t) = lookup(env, x) {
                return Ok((t.clone(), LinExpr::zero()));
            }
        }
        let t = self.fresh_ty(s, "scrut")?;
        let r = self.value(env, v, &t)?;
        Ok((t, r))
    }

    // -- computations ----------------------------------------------------------

    /// Potential needed to run `e` and return `out` with effects in `delta`.
    fn comp(&mut self, env: &mut Env, e: &Computation, out: &VAnn, delta: &VSig) -> Result<LinExpr, AnalysisError> {
        match e {
            Computation::Ret(v) => Ok(self.value(env, v, &out.ty)?.plus_var(out.pot)),
            Computation::Let { var, ty, bound, body } => {
                let x = self.fresh_ann(ty, &format!("let.{var}"))?;
                let r2 = with_env(env, vec![(var.clone(), x.ty.clone())], |env| self.comp(env, body, out, delta))?;
                self.ge(LinExpr::var(x.pot).minus(&r2), "T-Let");
                self.comp(env, bound, &x, delta)
            }
            Computation::Tick(q) => {
                self.flow(&Ty::Unit, &out.ty, "T-Tick")?;
                let need = LinExpr::var(out.pot).plus(&LinExpr::constant(q.clone()));
                if q.is_negative() {
                    Ok(self.nonneg(need, "T-Tick-"))
                } else {
                    Ok(need)
                }
            }
            Computation::App(f, a) => {
                let arrow = match f {
                    Value::Fun(g) => self.arrow_of(g)?,
                    Value::Var(x) => match lookup(env, x) {
                        Some(Ty::Fun(r)) => self.slots[r.id as usize].clone(),
                        _ => return unsupported(format!("`{x}` is not a function")),
                    },
                    other => return unsupported(format!("cannot apply `{other}`")),
                };
                let ra = self.value(env, a, &arrow.arg.ty)?;
                let top = self.frame(&arrow.res, out, "T-App")?;
                self.sig_within(&arrow.effects, delta, "T-App")?;
                Ok(ra.plus(&top).plus_var(arrow.arg.pot))
            }
            Computation::LinApp(f, a) => {
                let (arrow, rf) = match f {
                    Value::Var(x) => match lookup(env, x) {
                        Some(Ty::LinFun(arrow)) => ((**arrow).clone(), LinExpr::zero()),
                        _ => return unsupported(format!("`{x}` is not a linear function")),
                    },
                    Value::LinLam(l) => {
                        let arrow = self.fresh_arrow(&l.ty, "lam")?;
                        let r = self.lin_lam(env, l, &arrow)?;
                        (arrow, r)
                    }
                    other => return unsupported(format!("cannot apply `{other}`")),
                };
                let ra = self.value(env, a, &arrow.arg.ty)?;
                let top = self.frame(&arrow.res, out, "T-Linapp")?;
                self.sig_within(&arrow.effects, delta, "T-Linapp")?;
                Ok(rf.plus(&ra).plus(&top).plus_var(arrow.arg.pot))
            }
            Computation::CasePair { scrut, ty, left, right, body } => {
                let (t, r1) = self.scrutinee(env, scrut, ty)?;
                let Ty::Prod(a, b) = t else {
                    return unsupported("pair case on a non-product");
                };
                let binders = vec![(left.clone(), a.ty.clone()), (right.clone(), b.ty.clone())];
                let rb = with_env(env, binders, |env| self.comp(env, body, out, delta))?;
                let r2 = self.nonneg(rb.minus_var(a.pot).minus_var(b.pot), "T-Casepair");
                Ok(r1.plus(&r2))
            }
            Computation::CaseSum { scrut, ty, left, left_body, right, right_body } => {
                let (t, r1) = self.scrutinee(env, scrut, ty)?;
                let Ty::Sum(a, b) = t else {
                    return unsupported("sum case on a non-sum");
                };
                let rl = with_env(env, vec![(left.clone(), a.ty.clone())], |env| self.comp(env, left_body, out, delta))?;
                let rr = with_env(env, vec![(right.clone(), b.ty.clone())], |env| {
                    self.comp(env, right_body, out, delta)
                })?;
                let q2 = self.fresh("case");
                self.ge(LinExpr::var(q2).plus_var(a.pot).minus(&rl), "T-Casesum");
                self.ge(LinExpr::var(q2).plus_var(b.pot).minus(&rr), "T-Casesum");
                Ok(r1.plus_var(q2))
            }
            Computation::CaseList { scrut, ty, nil_body, head, tail, cons_body } => {
                let (t, r1) = self.scrutinee(env, scrut, ty)?;
                let Ty::List(elem) = &t else {
                    return unsupported("list case on a non-list");
                };
                let rn = self.comp(env, nil_body, out, delta)?;
                let binders = vec![(head.clone(), elem.ty.clone()), (tail.clone(), t.clone())];
                let rc = with_env(env, binders, |env| self.comp(env, cons_body, out, delta))?;
                let q2 = self.fresh("case");
                self.ge(LinExpr::var(q2).minus(&rn), "T-Caselist");
                self.ge(LinExpr::var(q2).plus_var(elem.pot).minus(&rc), "T-Caselist");
                Ok(r1.plus_var(q2))
            }
            Computation::CaseVoid { scrut, .. } => self.value(env, scrut, &Ty::Void),
            Computation::Do { label, payload } => {
                let Some(entry) = delta.get(label).cloned() else {
                    return Err(AnalysisError::EffectNotInSignature {
                        label: label.to_string(),
                        site: self.site.to_string(),
                    });
                };
                let r = self.value(env, payload, &entry.input.ty)?;
                let top = self.frame(&entry.output, out, "T-Do")?;
                Ok(r.plus(&top).plus_var(entry.input.pot))
            }
            Computation::Handle { body, handler } => {
                // constant potential of the context may bypass the handler
                let inner = Ann::new(out.ty.clone(), self.fresh("handle.out"));
                let top = self.nonneg(LinExpr::var(out.pot).minus_var(inner.pot), "T-Handle frame");
                Ok(self.handle(env, body, handler, &inner, delta)?.plus(&top))
            }
            Computation::Prim { op, left, right } => {
                self.value(env, left, &Ty::Int)?;
                self.value(env, right, &Ty::Int)?;
                match (&out.ty, op.result_type()) {
                    (Ty::Int, SType::Int) => Ok(LinExpr::var(out.pot)),
                    (Ty::Sum(a, b), _) => {
                        let q = self.fresh("prim");
                        self.ge(LinExpr::var(q).minus_var(out.pot).minus_var(a.pot), "T-Prim");
                        self.ge(LinExpr::var(q).minus_var(out.pot).minus_var(b.pot), "T-Prim");
                        Ok(LinExpr::var(q))
                    }
                    _ => unsupported(format!("primitive `{}` at type `{}`", op.symbol(), out.ty.erase())),
                }
            }
            Computation::Share { value, left, right, body, .. } => {
                let Value::Var(x) = value else {
                    return unsupported(format!("sharing of non-variable `{value}`"));
                };
                let t = lookup(env, x)
                    .cloned()
                    .ok_or_else(|| AnalysisError::Unsupported(format!("unbound variable `{x}`")))?;
                let l = self.fresh_like(&t, &format!("share.{left}"))?;
                let r = self.fresh_like(&t, &format!("share.{right}"))?;
                self.share(&t, &l, &r)?;
                with_env(env, vec![(left.clone(), l), (right.clone(), r)], |env| self.comp(env, body, out, delta))
            }
            Computation::Raise { .. } | Computation::Try { .. } => {
                unsupported("exceptions must be desugared before analysis")
            }
        }
    }

    fn handle(
        &mut self,
        env: &mut Env,
        body: &Computation,
        h: &HandlerDef,
        out: &VAnn,
        delta: &VSig,
    ) -> Result<LinExpr, AnalysisError> {
        // fresh contract for the handled labels, local to this handler
        let inner = self.fresh_sig(&h.labels(), "handler")?;
        let res = self.fresh_ann(&h.body_ty, "handled")?;
        let rb = self.comp(env, body, &res, &inner)?;

        let rr = with_env(env, vec![(h.ret_var.clone(), res.ty.clone())], |env| {
            self.comp(env, &h.ret_body, out, delta)
        })?;
        self.ge(LinExpr::var(res.pot).minus(&rr), "T-Handle return");

        let mut cont_effects = Vec::new();
        for l in self.prog.ordered_labels(&h.ambient) {
            match delta.get(&l) {
                Some(e) => cont_effects.push(e.clone()),
                None => {
                    return Err(AnalysisError::EffectNotInSignature {
                        label: l.to_string(),
                        site: self.site.to_string(),
                    })
                }
            }
        }
        let cont_effects = EffectSig { entries: cont_effects };
        for b in &h.branches {
            let entry = inner.get(&b.label).cloned().expect("handled label");
            let mut free = BTreeSet::new();
            free_vars(&b.body, &mut free);
            free.remove(&b.payload);
            free.remove(&b.cont);
            let mut benv = Env::new();
            for x in &free {
                if let Some(t) = lookup(env, x).cloned() {
                    let z = self.zeroed(x, &t)?;
                    benv.push((x.clone(), z));
                }
            }
            let cont = Ty::LinFun(Box::new(Arrow {
                arg: entry.output.clone(),
                res: out.clone(),
                effects: cont_effects.clone(),
            }));
            benv.push((b.payload.clone(), entry.input.ty.clone()));
            benv.push((b.cont.clone(), cont));
            let r = self.comp(&mut benv, &b.body, out, delta)?;
            self.ge(LinExpr::var(entry.input.pot).minus(&r), &format!("T-Handle {}", b.label));
        }
        Ok(rb)
    }
}

fn rename_ty(t: &VTy, var: &impl Fn(Var) -> Var, slot: &impl Fn(u32) -> u32) -> VTy {
    match t {
        Ty::Unit => Ty::Unit,
        Ty::Void => Ty::Void,
        Ty::Int => Ty::Int,
        Ty::Prod(a, b) => Ty::Prod(Box::new(rename_ann(a, var, slot)), Box::new(rename_ann(b, var, slot))),
        Ty::Sum(a, b) => Ty::Sum(Box::new(rename_ann(a, var, slot)), Box::new(rename_ann(b, var, slot))),
        Ty::List(a) => Ty::List(Box::new(rename_ann(a, var, slot))),
        Ty::Fun(r) => Ty::Fun(FunRef {
            id: slot(r.id),
            shape: r.shape.clone(),
        }),
        Ty::LinFun(a) => Ty::LinFun(Box::new(rename_arrow(a, var, slot))),
    }
}

fn rename_ann(a: &VAnn, var: &impl Fn(Var) -> Var, slot: &impl Fn(u32) -> u32) -> VAnn {
    Ann {
        ty: rename_ty(&a.ty, var, slot),
        pot: var(a.pot),
    }
}

fn rename_arrow(a: &VArrow, var: &impl Fn(Var) -> Var, slot: &impl Fn(u32) -> u32) -> VArrow {
    Arrow {
        arg: rename_ann(&a.arg, var, slot),
        res: rename_ann(&a.res, var, slot),
        effects: EffectSig {
            entries: a
                .effects
                .entries
                .iter()
                .map(|e| SigEntry {
                    label: e.label.clone(),
                    input: rename_ann(&e.input, var, slot),
                    output: rename_ann(&e.output, var, slot),
                })
                .collect(),
        },
    }
}
