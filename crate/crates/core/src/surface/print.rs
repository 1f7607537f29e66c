//! Pretty-printer for surface programs. Output re-parses to the same tree.

use std::fmt::Write;

use super::ast::*;
use crate::rational::fmt_rat;
use crate::syntax::{LabelSet, PrimOp};

// precedence levels
const PREFIX: u8 = 0;
const CMP: u8 = 1;
const CONS: u8 = 2;
const ADD: u8 = 3;
const MUL: u8 = 4;
const APP: u8 = 5;
const ATOM: u8 = 6;

pub fn print_program(p: &SurfaceProgram) -> String {
    let mut out = String::new();
    for e in &p.effects {
        writeln!(out, "effect {} : {} => {};", e.label, e.input, e.output).unwrap();
    }
    if let Some(t) = &p.exception {
        writeln!(out, "exception {t};").unwrap();
    }
    for f in &p.funs {
        let result = match f.result_ty {
            crate::syntax::SType::Fun(_) | crate::syntax::SType::LinFun(_) => {
                format!("({})", f.result_ty)
            }
            _ => f.result_ty.to_string(),
        };
        write!(out, "fun {} ({}: {}): {result}", f.name, f.param, f.param_ty).unwrap();
        if !f.effects.is_empty() {
            write!(out, " / {}", label_set(&f.effects)).unwrap();
        }
        out.push_str(" =\n  ");
        expr(&mut out, &f.body, PREFIX, 1);
        out.push_str(";\n");
    }
    if let Some(m) = &p.main {
        out.push_str("main =\n  ");
        expr(&mut out, m, PREFIX, 1);
        out.push_str(";\n");
    }
    out
}

pub fn print_expr(e: &Expr) -> String {
    let mut out = String::new();
    expr(&mut out, e, PREFIX, 0);
    out
}

fn label_set(set: &LabelSet) -> String {
    let v: Vec<&str> = set.iter().map(|l| &**l).collect();
    format!("{{{}}}", v.join(", "))
}

fn newline(out: &mut String, ind: usize) {
    out.push('\n');
    for _ in 0..ind {
        out.push_str("  ");
    }
}

fn level(e: &Expr) -> u8 {
    match &e.kind {
        ExprKind::Let(..)
        | ExprKind::Do(..)
        | ExprKind::Handle(_)
        | ExprKind::Raise(_)
        | ExprKind::Try(..)
        | ExprKind::MatchList { .. }
        | ExprKind::MatchSum { .. }
        | ExprKind::MatchPair { .. }
        | ExprKind::Absurd(_)
        | ExprKind::Fn(..) => PREFIX,
        ExprKind::BinOp(PrimOp::Lt | PrimOp::Eq, ..) => CMP,
        ExprKind::Cons(..) if list_items(e).is_none() => CONS,
        ExprKind::BinOp(PrimOp::Add | PrimOp::Sub, ..) => ADD,
        ExprKind::BinOp(PrimOp::Mul, ..) => MUL,
        ExprKind::App(..) => APP,
        _ => ATOM,
    }
}

fn list_items(e: &Expr) -> Option<Vec<&Expr>> {
    let mut items = Vec::new();
    let mut cur = e;
    loop {
        match &cur.kind {
            ExprKind::Nil => return Some(items),
            ExprKind::Cons(h, t) => {
                items.push(&**h);
                cur = t;
            }
            _ => return None,
        }
    }
}

fn expr(out: &mut String, e: &Expr, ctx: u8, ind: usize) {
    let paren = level(e) < ctx;
    if paren {
        out.push('(');
    }
    match &e.kind {
        ExprKind::Var(x) => out.push_str(x),
        ExprKind::Int(n) => {
            if *n < 0 {
                write!(out, "({n})").unwrap();
            } else {
                write!(out, "{n}").unwrap();
            }
        }
        ExprKind::Unit => out.push_str("()"),
        ExprKind::Nil => out.push_str("[]"),
        ExprKind::Pair(a, b) => {
            out.push('(');
            expr(out, a, PREFIX, ind + 1);
            out.push_str(", ");
            expr(out, b, PREFIX, ind + 1);
            out.push(')');
        }
        ExprKind::Inl(a) => {
            out.push_str("inl ");
            expr(out, a, ATOM, ind);
        }
        ExprKind::Inr(a) => {
            out.push_str("inr ");
            expr(out, a, ATOM, ind);
        }
        ExprKind::Cons(h, t) => match list_items(e) {
            Some(items) => {
                out.push('[');
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    expr(out, item, PREFIX, ind + 1);
                }
                out.push(']');
            }
            None => {
                expr(out, h, ADD, ind);
                out.push_str(" :: ");
                expr(out, t, CONS, ind);
            }
        },
        ExprKind::Let(x, a, b) => {
            write!(out, "let {x} = ").unwrap();
            expr(out, a, PREFIX, ind + 1);
            out.push_str(" in");
            newline(out, ind);
            expr(out, b, PREFIX, ind);
        }
        ExprKind::Tick(q) => write!(out, "tick {}", fmt_rat(q)).unwrap(),
        ExprKind::Do(l, a) => {
            write!(out, "do {l} ").unwrap();
            expr(out, a, PREFIX, ind);
        }
        ExprKind::Raise(a) => {
            out.push_str("raise ");
            expr(out, a, PREFIX, ind);
        }
        ExprKind::Absurd(a) => {
            out.push_str("absurd ");
            expr(out, a, PREFIX, ind);
        }
        ExprKind::Fn(x, a) => {
            write!(out, "fn {x} -> ").unwrap();
            expr(out, a, PREFIX, ind);
        }
        ExprKind::Try(a, x, b) => {
            out.push_str("try ");
            expr(out, a, PREFIX, ind + 1);
            newline(out, ind);
            write!(out, "catch {x} -> ").unwrap();
            expr(out, b, PREFIX, ind + 1);
        }
        ExprKind::Handle(h) => {
            out.push_str("handle ");
            expr(out, &h.body, PREFIX, ind + 1);
            out.push_str(" {");
            newline(out, ind + 1);
            write!(out, "return {} -> ", h.ret_var).unwrap();
            expr(out, &h.ret_body, PREFIX, ind + 2);
            for b in &h.branches {
                newline(out, ind + 1);
                write!(out, "| {} {} {} -> ", b.label, b.payload, b.cont).unwrap();
                expr(out, &b.body, PREFIX, ind + 2);
            }
            for (l, _) in &h.forwards {
                newline(out, ind + 1);
                write!(out, "| forward {l}").unwrap();
            }
            newline(out, ind);
            out.push('}');
        }
        ExprKind::MatchList {
            scrut,
            nil,
            head,
            tail,
            cons,
        } => {
            out.push_str("match ");
            expr(out, scrut, PREFIX, ind + 1);
            out.push_str(" {");
            newline(out, ind + 1);
            out.push_str("[] -> ");
            expr(out, nil, PREFIX, ind + 2);
            newline(out, ind + 1);
            write!(out, "| {head} :: {tail} -> ").unwrap();
            expr(out, cons, PREFIX, ind + 2);
            newline(out, ind);
            out.push('}');
        }
        ExprKind::MatchSum {
            scrut,
            left,
            left_body,
            right,
            right_body,
        } => {
            out.push_str("match ");
            expr(out, scrut, PREFIX, ind + 1);
            out.push_str(" {");
            newline(out, ind + 1);
            write!(out, "inl {left} -> ").unwrap();
            expr(out, left_body, PREFIX, ind + 2);
            newline(out, ind + 1);
            write!(out, "| inr {right} -> ").unwrap();
            expr(out, right_body, PREFIX, ind + 2);
            newline(out, ind);
            out.push('}');
        }
        ExprKind::MatchPair {
            scrut,
            left,
            right,
            body,
        } => {
            out.push_str("match ");
            expr(out, scrut, PREFIX, ind + 1);
            write!(out, " {{ ({left}, {right}) -> ").unwrap();
            expr(out, body, PREFIX, ind + 1);
            out.push_str(" }");
        }
        ExprKind::BinOp(op, a, b) => {
            let (l, r) = match op {
                PrimOp::Lt | PrimOp::Eq => (CONS, CONS),
                PrimOp::Add | PrimOp::Sub => (ADD, MUL),
                PrimOp::Mul => (MUL, APP),
            };
            expr(out, a, l, ind);
            write!(out, " {} ", op.symbol()).unwrap();
            expr(out, b, r, ind);
        }
        ExprKind::App(f, a) => {
            expr(out, f, APP, ind);
            out.push(' ');
            expr(out, a, ATOM, ind);
        }
        ExprKind::Annot(a, t) => {
            out.push('(');
            expr(out, a, PREFIX, ind + 1);
            write!(out, " : {t})").unwrap();
        }
    }
    if paren {
        out.push(')');
    }
}
