//! Big-step reference interpreter for the surface language. Effects are
//! results carrying a one-shot continuation; deep handlers re-wrap it. It
//! shares no code with lowering or the abstract machine.

use std::cell::RefCell;
use std::collections::HashMap;
use std::rc::Rc;

use aara_fx::rational::{zero, Rational};
use aara_fx::surface::ast::{Expr, ExprKind, HandleExpr, SurfaceProgram};
use aara_fx::syntax::{Name, PrimOp, Value};

const EXC: &str = "exc";

#[derive(Clone)]
pub enum RVal {
    Unit,
    Int(i64),
    Pair(Rc<RVal>, Rc<RVal>),
    Inl(Rc<RVal>),
    Inr(Rc<RVal>),
    Nil,
    Cons(Rc<RVal>, Rc<RVal>),
    Fun(Name),
    Closure(Name, Rc<Expr>, Env),
    Cont(Rc<RefCell<Option<Kont>>>),
}

type Kont = Box<dyn FnOnce(RVal) -> Res>;

pub enum Res {
    Val(RVal),
    Eff(Name, RVal, Kont),
    Stuck(String),
}

#[derive(Clone, Default)]
pub struct Env(Option<Rc<(Name, RVal, Env)>>);

impl Env {
    fn with(&self, x: &Name, v: RVal) -> Env {
        Env(Some(Rc::new((x.clone(), v, self.clone()))))
    }

    fn get(&self, x: &str) -> Option<RVal> {
        let mut cur = &self.0;
        while let Some(node) = cur {
            if &*node.0 == x {
                return Some(node.1.clone());
            }
            cur = &node.2 .0;
        }
        None
    }
}

#[derive(Default)]
pub struct Counters {
    pub net: Rational,
    pub high_water: Rational,
}

struct Interp {
    funs: HashMap<Name, (Name, Rc<Expr>)>,
    counters: RefCell<Counters>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum RefOutcome {
    Value(Value),
    Unhandled { label: String, payload: Value },
    Stuck(String),
}

pub fn to_value(v: &RVal) -> Value {
    match v {
        RVal::Unit => Value::Unit,
        RVal::Int(n) => Value::Int(*n),
        RVal::Pair(a, b) => Value::pair(to_value(a), to_value(b)),
        RVal::Inl(a) => Value::inl(to_value(a)),
        RVal::Inr(a) => Value::inr(to_value(a)),
        RVal::Nil => Value::Nil,
        RVal::Cons(h, t) => Value::Cons(to_value(h).into(), to_value(t).into()),
        RVal::Fun(f) => Value::Fun(f.clone()),
        RVal::Closure(..) | RVal::Cont(_) => Value::Var("<function>".into()),
    }
}

pub fn from_value(v: &Value) -> RVal {
    match v {
        Value::Unit => RVal::Unit,
        Value::Int(n) => RVal::Int(*n),
        Value::Pair(a, b) => RVal::Pair(from_value(a).into(), from_value(b).into()),
        Value::Inl(a) => RVal::Inl(from_value(a).into()),
        Value::Inr(a) => RVal::Inr(from_value(a).into()),
        Value::Nil => RVal::Nil,
        Value::Cons(h, t) => RVal::Cons(from_value(h).into(), from_value(t).into()),
        Value::Fun(f) => RVal::Fun(f.clone()),
        other => panic!("not a first-order input: {other}"),
    }
}

/// Runs `entry` on `arg`; returns the outcome with net cost and high-water mark.
pub fn eval_entry(p: &SurfaceProgram, entry: &str, arg: &Value) -> (RefOutcome, Rational, Rational) {
    let interp = Rc::new(Interp {
        funs: p
            .funs
            .iter()
            .map(|d| (d.name.clone(), (d.param.clone(), Rc::new(d.body.clone()))))
            .collect(),
        counters: RefCell::new(Counters {
            net: zero(),
            high_water: zero(),
        }),
    });
    let r = Interp::apply(&interp, RVal::Fun(entry.into()), from_value(arg));
    let out = match r {
        Res::Val(v) => RefOutcome::Value(to_value(&v)),
        Res::Eff(l, v, _) => RefOutcome::Unhandled {
            label: l.to_string(),
            payload: to_value(&v),
        },
        Res::Stuck(m) => RefOutcome::Stuck(m),
    };
    let c = interp.counters.borrow();
    (out, c.net.clone(), c.high_water.clone())
}

fn bind(r: Res, f: Kont) -> Res {
    match r {
        Res::Val(v) => f(v),
        Res::Eff(l, p, k) => Res::Eff(l, p, Box::new(move |x| bind(k(x), f))),
        s @ Res::Stuck(_) => s,
    }
}

fn truth(t: bool) -> RVal {
    if t {
        RVal::Inl(RVal::Unit.into())
    } else {
        RVal::Inr(RVal::Unit.into())
    }
}

impl Interp {
    fn apply(this: &Rc<Interp>, f: RVal, arg: RVal) -> Res {
        match f {
            RVal::Fun(name) => {
                let Some((param, body)) = this.funs.get(&name).cloned() else {
                    return Res::Stuck(format!("unknown function {name}"));
                };
                Interp::eval(this, &body, &Env::default().with(&param, arg))
            }
            RVal::Closure(x, body, env) => Interp::eval(this, &body, &env.with(&x, arg)),
            RVal::Cont(cell) => match cell.borrow_mut().take() {
                Some(k) => k(arg),
                None => Res::Stuck("continuation resumed twice".into()),
            },
            _ => Res::Stuck("application of a non-function".into()),
        }
    }

    /// Evaluates `a` then `b`, then `k` on both values.
    fn eval2(this: &Rc<Interp>, a: &Expr, b: &Expr, env: &Env, k: impl FnOnce(RVal, RVal) -> Res + 'static) -> Res {
        let (this2, b, env2) = (this.clone(), Rc::new(b.clone()), env.clone());
        bind(
            Interp::eval(this, a, env),
            Box::new(move |va| bind(Interp::eval(&this2, &b, &env2), Box::new(move |vb| k(va, vb)))),
        )
    }

    fn eval1(this: &Rc<Interp>, a: &Expr, env: &Env, k: impl FnOnce(RVal) -> Res + 'static) -> Res {
        bind(Interp::eval(this, a, env), Box::new(k))
    }

    fn eval(this: &Rc<Interp>, e: &Expr, env: &Env) -> Res {
        match &e.kind {
            ExprKind::Var(x) => match env.get(x) {
                Some(v) => Res::Val(v),
                None if this.funs.contains_key(x) => Res::Val(RVal::Fun(x.clone())),
                None => Res::Stuck(format!("unbound {x}")),
            },
            ExprKind::Int(n) => Res::Val(RVal::Int(*n)),
            ExprKind::Unit => Res::Val(RVal::Unit),
            ExprKind::Nil => Res::Val(RVal::Nil),
            ExprKind::Pair(a, b) => Interp::eval2(this, a, b, env, |x, y| Res::Val(RVal::Pair(x.into(), y.into()))),
            ExprKind::Cons(a, b) => Interp::eval2(this, a, b, env, |x, y| Res::Val(RVal::Cons(x.into(), y.into()))),
            ExprKind::Inl(a) => Interp::eval1(this, a, env, |x| Res::Val(RVal::Inl(x.into()))),
            ExprKind::Inr(a) => Interp::eval1(this, a, env, |x| Res::Val(RVal::Inr(x.into()))),
            ExprKind::Annot(a, _) => Interp::eval(this, a, env),
            ExprKind::Let(x, a, b) => {
                let (this2, x, b, env2) = (this.clone(), x.clone(), Rc::new((**b).clone()), env.clone());
                Interp::eval1(this, a, env, move |v| Interp::eval(&this2, &b, &env2.with(&x, v)))
            }
            ExprKind::Tick(q) => {
                let mut c = this.counters.borrow_mut();
                c.net += q;
                if c.net > c.high_water {
                    c.high_water = c.net.clone();
                }
                Res::Val(RVal::Unit)
            }
            ExprKind::Do(l, a) => {
                let l = l.clone();
                Interp::eval1(this, a, env, move |v| Res::Eff(l, v, Box::new(Res::Val)))
            }
            ExprKind::Raise(a) => Interp::eval1(this, a, env, |v| {
                Res::Eff(EXC.into(), v, Box::new(|_| Res::Stuck("resumed an exception".into())))
            }),
            ExprKind::Try(body, x, h) => {
                let r = Interp::eval(this, body, env);
                Interp::catch(this.clone(), r, x.clone(), Rc::new((**h).clone()), env.clone())
            }
            ExprKind::Handle(h) => {
                let r = Interp::eval(this, &h.body, env);
                Interp::handle(this.clone(), r, Rc::new((**h).clone()), env.clone())
            }
            ExprKind::MatchList {
                scrut,
                nil,
                head,
                tail,
                cons,
            } => {
                let (this2, nil, head, tail, cons, env2) = (
                    this.clone(),
                    Rc::new((**nil).clone()),
                    head.clone(),
                    tail.clone(),
                    Rc::new((**cons).clone()),
                    env.clone(),
                );
                Interp::eval1(this, scrut, env, move |v| match v {
                    RVal::Nil => Interp::eval(&this2, &nil, &env2),
                    RVal::Cons(h, t) => {
                        let env3 = env2.with(&head, (*h).clone()).with(&tail, (*t).clone());
                        Interp::eval(&this2, &cons, &env3)
                    }
                    _ => Res::Stuck("match on a non-list".into()),
                })
            }
            ExprKind::MatchSum {
                scrut,
                left,
                left_body,
                right,
                right_body,
            } => {
                let (this2, left, lb, right, rb, env2) = (
                    this.clone(),
                    left.clone(),
                    Rc::new((**left_body).clone()),
                    right.clone(),
                    Rc::new((**right_body).clone()),
                    env.clone(),
                );
                Interp::eval1(this, scrut, env, move |v| match v {
                    RVal::Inl(a) => Interp::eval(&this2, &lb, &env2.with(&left, (*a).clone())),
                    RVal::Inr(b) => Interp::eval(&this2, &rb, &env2.with(&right, (*b).clone())),
                    _ => Res::Stuck("match on a non-sum".into()),
                })
            }
            ExprKind::MatchPair {
                scrut,
                left,
                right,
                body,
            } => {
                let (this2, left, right, body, env2) =
                    (this.clone(), left.clone(), right.clone(), Rc::new((**body).clone()), env.clone());
                Interp::eval1(this, scrut, env, move |v| match v {
                    RVal::Pair(a, b) => {
                        let env3 = env2.with(&left, (*a).clone()).with(&right, (*b).clone());
                        Interp::eval(&this2, &body, &env3)
                    }
                    _ => Res::Stuck("match on a non-pair".into()),
                })
            }
            ExprKind::Absurd(a) => Interp::eval1(this, a, env, |_| Res::Stuck("absurd reached".into())),
            ExprKind::Fn(x, body) => Res::Val(RVal::Closure(x.clone(), Rc::new((**body).clone()), env.clone())),
            ExprKind::BinOp(op, a, b) => {
                let op = *op;
                Interp::eval2(this, a, b, env, move |x, y| match (x, y) {
                    (RVal::Int(a), RVal::Int(b)) => Res::Val(match op {
                        PrimOp::Add => RVal::Int(a.wrapping_add(b)),
                        PrimOp::Sub => RVal::Int(a.wrapping_sub(b)),
                        PrimOp::Mul => RVal::Int(a.wrapping_mul(b)),
                        PrimOp::Lt => truth(a < b),
                        PrimOp::Eq => truth(a == b),
                    }),
                    _ => Res::Stuck("arithmetic on non-integers".into()),
                })
            }
            ExprKind::App(f, a) => {
                let this2 = this.clone();
                Interp::eval2(this, f, a, env, move |vf, va| Interp::apply(&this2, vf, va))
            }
        }
    }

    fn handle(this: Rc<Interp>, r: Res, h: Rc<HandleExpr>, env: Env) -> Res {
        match r {
            Res::Val(v) => Interp::eval(&this, &h.ret_body, &env.with(&h.ret_var, v)),
            Res::Eff(l, p, k) => {
                let (this2, h2, env2) = (this.clone(), h.clone(), env.clone());
                let rewrapped: Kont = Box::new(move |x| Interp::handle(this2, k(x), h2, env2));
                match h.branches.iter().find(|b| b.label == l) {
                    Some(b) => {
                        let cont = RVal::Cont(Rc::new(RefCell::new(Some(rewrapped))));
                        Interp::eval(&this, &b.body, &env.with(&b.payload, p).with(&b.cont, cont))
                    }
                    None => Res::Eff(l, p, rewrapped),
                }
            }
            s @ Res::Stuck(_) => s,
        }
    }

    fn catch(this: Rc<Interp>, r: Res, x: Name, h: Rc<Expr>, env: Env) -> Res {
        match r {
            Res::Eff(l, p, _) if &*l == EXC => Interp::eval(&this, &h, &env.with(&x, p)),
            Res::Eff(l, p, k) => Res::Eff(l, p, Box::new(move |v| Interp::catch(this, k(v), x, h, env))),
            other => other,
        }
    }
}
