//! Recursive-descent parser for the surface language.
//!
//! Expression precedence, loosest first: prefix forms (`let`, `match`,
//! `handle`, `try`, `raise`, `do`, `absurd`, `fn`), comparisons, `::`
//! (right associative), `+`/`-`, `*`, application, atoms.

use std::collections::BTreeSet;
use std::sync::Arc;

use super::ast::*;
use super::lexer::{tokenize, Tok};
use super::SurfaceError;
use crate::rational::Rational;
use crate::syntax::{Label, LabelSet, Name, PrimOp, SType, EXC};

pub fn parse(src: &str) -> Result<SurfaceProgram, SurfaceError> {
    let toks = tokenize(src)?;
    let mut p = Parser { toks, pos: 0 };
    let prog = p.program()?;
    validate(&prog)?;
    Ok(prog)
}

/// Parses a single expression, e.g. an input literal.
pub fn parse_expr(src: &str) -> Result<Expr, SurfaceError> {
    let toks = tokenize(src)?;
    let mut p = Parser { toks, pos: 0 };
    let e = p.expr()?;
    p.expect(Tok::Eof)?;
    Ok(e)
}

pub fn parse_stype(src: &str) -> Result<SType, SurfaceError> {
    let toks = tokenize(src)?;
    let mut p = Parser { toks, pos: 0 };
    let t = p.stype()?;
    p.expect(Tok::Eof)?;
    Ok(t)
}

struct Parser {
    toks: Vec<(Tok, Span)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.pos + k).min(self.toks.len() - 1);
        &self.toks[i].0
    }

    fn span(&self) -> Span {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, msg: impl Into<String>) -> SurfaceError {
        let s = self.span();
        SurfaceError::Syntax {
            line: s.line,
            col: s.col,
            msg: msg.into(),
        }
    }

    fn unexpected(&self, wanted: &str) -> SurfaceError {
        self.error(format!("expected {wanted}, found {}", self.peek().describe()))
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == t {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, t: Tok) -> Result<(), SurfaceError> {
        if self.eat(&t) {
            Ok(())
        } else {
            Err(self.unexpected(&t.describe()))
        }
    }

    fn lident(&mut self) -> Result<Name, SurfaceError> {
        match self.peek().clone() {
            Tok::LIdent(s) => {
                self.bump();
                Ok(Arc::from(s.as_str()))
            }
            _ => Err(self.unexpected("a lowercase identifier")),
        }
    }

    fn uident(&mut self) -> Result<Label, SurfaceError> {
        match self.peek().clone() {
            Tok::UIdent(s) => {
                self.bump();
                Ok(Arc::from(s.as_str()))
            }
            _ => Err(self.unexpected("an effect label")),
        }
    }

    /// An effect label in a declared effect set: uppercase, or `exc`.
    fn set_label(&mut self) -> Result<Label, SurfaceError> {
        match self.peek().clone() {
            Tok::LIdent(s) if s == EXC => {
                self.bump();
                Ok(Arc::from(EXC))
            }
            _ => self.uident(),
        }
    }

    fn program(&mut self) -> Result<SurfaceProgram, SurfaceError> {
        let mut prog = SurfaceProgram::default();
        loop {
            let span = self.span();
            match self.peek() {
                Tok::Eof => return Ok(prog),
                Tok::Effect => {
                    self.bump();
                    let label = self.uident()?;
                    self.expect(Tok::Colon)?;
                    let input = self.stype()?;
                    self.expect(Tok::FatArrow)?;
                    let output = self.stype()?;
                    self.expect(Tok::Semi)?;
                    prog.effects.push(EffectDeclS {
                        label,
                        input,
                        output,
                        span,
                    });
                }
                Tok::Exception => {
                    self.bump();
                    let t = self.stype()?;
                    self.expect(Tok::Semi)?;
                    if prog.exception.is_some() {
                        return Err(SurfaceError::DuplicateName {
                            name: EXC.to_string(),
                            line: span.line,
                            col: span.col,
                        });
                    }
                    prog.exception = Some(t);
                }
                Tok::Fun => {
                    self.bump();
                    let name = self.lident()?;
                    self.expect(Tok::LParen)?;
                    let param = self.lident()?;
                    self.expect(Tok::Colon)?;
                    let param_ty = self.stype()?;
                    self.expect(Tok::RParen)?;
                    self.expect(Tok::Colon)?;
                    let result_ty = self.stype_no_effects()?;
                    let effects = if self.eat(&Tok::Slash) {
                        self.label_set()?
                    } else {
                        LabelSet::new()
                    };
                    self.expect(Tok::Eq)?;
                    let body = self.expr()?;
                    self.expect(Tok::Semi)?;
                    prog.funs.push(FunDeclS {
                        name,
                        param,
                        param_ty,
                        result_ty,
                        effects,
                        body,
                        span,
                    });
                }
                Tok::Main => {
                    self.bump();
                    self.expect(Tok::Eq)?;
                    let body = self.expr()?;
                    self.expect(Tok::Semi)?;
                    if prog.main.is_some() {
                        return Err(SurfaceError::DuplicateName {
                            name: "main".to_string(),
                            line: span.line,
                            col: span.col,
                        });
                    }
                    prog.main = Some(body);
                }
                _ => return Err(self.unexpected("a declaration")),
            }
        }
    }

    fn label_set(&mut self) -> Result<LabelSet, SurfaceError> {
        self.expect(Tok::LBrace)?;
        let mut set = BTreeSet::new();
        if !self.eat(&Tok::RBrace) {
            loop {
                set.insert(self.set_label()?);
                if self.eat(&Tok::RBrace) {
                    break;
                }
                self.expect(Tok::Comma)?;
            }
        }
        Ok(set)
    }

    // ---- types ----

    fn stype(&mut self) -> Result<SType, SurfaceError> {
        let left = self.stype_sum()?;
        self.stype_arrow_tail(left, true)
    }

    /// A type whose trailing `/ {..}` belongs to the enclosing declaration.
    fn stype_no_effects(&mut self) -> Result<SType, SurfaceError> {
        let left = self.stype_sum()?;
        self.stype_arrow_tail(left, false)
    }

    fn stype_arrow_tail(&mut self, left: SType, effects_here: bool) -> Result<SType, SurfaceError> {
        let linear = match self.peek() {
            Tok::Arrow => false,
            Tok::LinArrow => true,
            _ => return Ok(left),
        };
        self.bump();
        let res = self.stype_sum()?;
        let res = self.stype_arrow_tail(res, effects_here)?;
        let effects = if effects_here && self.eat(&Tok::Slash) {
            self.label_set()?
        } else {
            LabelSet::new()
        };
        Ok(if linear {
            SType::linfun(left, res, effects)
        } else {
            SType::fun(left, res, effects)
        })
    }

    fn stype_sum(&mut self) -> Result<SType, SurfaceError> {
        let mut t = self.stype_prod()?;
        while self.eat(&Tok::Plus) {
            let r = self.stype_prod()?;
            t = SType::sum(t, r);
        }
        Ok(t)
    }

    fn stype_prod(&mut self) -> Result<SType, SurfaceError> {
        let mut t = self.stype_atom()?;
        while self.eat(&Tok::Star) {
            let r = self.stype_atom()?;
            t = SType::prod(t, r);
        }
        Ok(t)
    }

    fn stype_atom(&mut self) -> Result<SType, SurfaceError> {
        match self.peek() {
            Tok::TUnit => {
                self.bump();
                Ok(SType::Unit)
            }
            Tok::TVoid => {
                self.bump();
                Ok(SType::Void)
            }
            Tok::TInt => {
                self.bump();
                Ok(SType::Int)
            }
            Tok::TList => {
                self.bump();
                self.expect(Tok::LParen)?;
                let t = self.stype()?;
                self.expect(Tok::RParen)?;
                Ok(SType::list(t))
            }
            Tok::LParen => {
                self.bump();
                let t = self.stype()?;
                self.expect(Tok::RParen)?;
                Ok(t)
            }
            _ => Err(self.unexpected("a type")),
        }
    }

    // ---- expressions ----

    fn expr(&mut self) -> Result<Expr, SurfaceError> {
        let span = self.span();
        let kind = match self.peek() {
            Tok::Let => {
                self.bump();
                let x = self.lident()?;
                self.expect(Tok::Eq)?;
                let e1 = self.expr()?;
                self.expect(Tok::In)?;
                let e2 = self.expr()?;
                ExprKind::Let(x, Box::new(e1), Box::new(e2))
            }
            Tok::Do => {
                self.bump();
                let l = self.uident()?;
                let e = self.expr()?;
                ExprKind::Do(l, Box::new(e))
            }
            Tok::Raise => {
                self.bump();
                ExprKind::Raise(Box::new(self.expr()?))
            }
            Tok::Absurd => {
                self.bump();
                ExprKind::Absurd(Box::new(self.expr()?))
            }
            Tok::Fn => {
                self.bump();
                let x = self.lident()?;
                self.expect(Tok::Arrow)?;
                ExprKind::Fn(x, Box::new(self.expr()?))
            }
            Tok::Try => {
                self.bump();
                let e1 = self.expr()?;
                self.expect(Tok::Catch)?;
                let x = self.lident()?;
                self.expect(Tok::Arrow)?;
                let e2 = self.expr()?;
                ExprKind::Try(Box::new(e1), x, Box::new(e2))
            }
            Tok::Handle => {
                self.bump();
                return self.handle(span);
            }
            Tok::Match => {
                self.bump();
                return self.match_(span);
            }
            _ => return self.cmp(),
        };
        Ok(Expr::new(kind, span))
    }

    fn handle(&mut self, span: Span) -> Result<Expr, SurfaceError> {
        let body = self.expr()?;
        self.expect(Tok::LBrace)?;
        self.expect(Tok::Return)?;
        let ret_var = self.lident()?;
        self.expect(Tok::Arrow)?;
        let ret_body = self.expr()?;
        let mut branches = Vec::new();
        let mut forwards = Vec::new();
        while self.eat(&Tok::Bar) {
            let bspan = self.span();
            if self.eat(&Tok::Forward) {
                forwards.push((self.uident()?, bspan));
                continue;
            }
            if !forwards.is_empty() {
                return Err(self.error("handler branches must precede `forward` clauses"));
            }
            let label = self.uident()?;
            let payload = self.lident()?;
            let cont = self.lident()?;
            self.expect(Tok::Arrow)?;
            let body = self.expr()?;
            branches.push(HandlerBranch {
                label,
                payload,
                cont,
                body,
                span: bspan,
            });
        }
        self.expect(Tok::RBrace)?;
        Ok(Expr::new(
            ExprKind::Handle(Box::new(HandleExpr {
                body,
                ret_var,
                ret_body,
                branches,
                forwards,
            })),
            span,
        ))
    }

    fn match_(&mut self, span: Span) -> Result<Expr, SurfaceError> {
        let scrut = Box::new(self.expr()?);
        self.expect(Tok::LBrace)?;
        let kind = match self.peek() {
            Tok::LBracket => {
                self.bump();
                self.expect(Tok::RBracket)?;
                self.expect(Tok::Arrow)?;
                let nil = Box::new(self.expr()?);
                self.expect(Tok::Bar)?;
                let head = self.lident()?;
                self.expect(Tok::ColonColon)?;
                let tail = self.lident()?;
                self.expect(Tok::Arrow)?;
                let cons = Box::new(self.expr()?);
                ExprKind::MatchList {
                    scrut,
                    nil,
                    head,
                    tail,
                    cons,
                }
            }
            Tok::Inl => {
                self.bump();
                let left = self.lident()?;
                self.expect(Tok::Arrow)?;
                let left_body = Box::new(self.expr()?);
                self.expect(Tok::Bar)?;
                self.expect(Tok::Inr)?;
                let right = self.lident()?;
                self.expect(Tok::Arrow)?;
                let right_body = Box::new(self.expr()?);
                ExprKind::MatchSum {
                    scrut,
                    left,
                    left_body,
                    right,
                    right_body,
                }
            }
            Tok::LParen => {
                self.bump();
                let left = self.lident()?;
                self.expect(Tok::Comma)?;
                let right = self.lident()?;
                self.expect(Tok::RParen)?;
                self.expect(Tok::Arrow)?;
                let body = Box::new(self.expr()?);
                ExprKind::MatchPair {
                    scrut,
                    left,
                    right,
                    body,
                }
            }
            _ => return Err(self.unexpected("a match pattern (`[]`, `inl` or a pair)")),
        };
        self.expect(Tok::RBrace)?;
        Ok(Expr::new(kind, span))
    }

    fn cmp(&mut self) -> Result<Expr, SurfaceError> {
        let left = self.cons()?;
        let op = match self.peek() {
            Tok::Lt => PrimOp::Lt,
            Tok::EqEq => PrimOp::Eq,
            _ => return Ok(left),
        };
        let span = self.span();
        self.bump();
        let right = self.cons()?;
        Ok(Expr::new(
            ExprKind::BinOp(op, Box::new(left), Box::new(right)),
            span,
        ))
    }

    fn cons(&mut self) -> Result<Expr, SurfaceError> {
        let head = self.additive()?;
        if self.peek() == &Tok::ColonColon {
            let span = self.span();
            self.bump();
            let tail = self.cons_operand()?;
            return Ok(Expr::new(ExprKind::Cons(Box::new(head), Box::new(tail)), span));
        }
        Ok(head)
    }

    fn cons_operand(&mut self) -> Result<Expr, SurfaceError> {
        self.cons()
    }

    fn additive(&mut self) -> Result<Expr, SurfaceError> {
        let mut left = self.multiplicative()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => PrimOp::Add,
                Tok::Minus => PrimOp::Sub,
                // `a -o` in expression position is `a - o`
                Tok::LinArrow => PrimOp::Sub,
                _ => return Ok(left),
            };
            let span = self.span();
            let right = if self.bump() == Tok::LinArrow {
                Expr::new(ExprKind::Var(Arc::from("o")), span)
            } else {
                self.multiplicative()?
            };
            left = Expr::new(ExprKind::BinOp(op, Box::new(left), Box::new(right)), span);
        }
    }

    fn multiplicative(&mut self) -> Result<Expr, SurfaceError> {
        let mut left = self.application()?;
        while self.peek() == &Tok::Star {
            let span = self.span();
            self.bump();
            let right = self.application()?;
            left = Expr::new(
                ExprKind::BinOp(PrimOp::Mul, Box::new(left), Box::new(right)),
                span,
            );
        }
        Ok(left)
    }

    fn starts_atom(&self) -> bool {
        matches!(
            self.peek(),
            Tok::LIdent(_)
                | Tok::Int(_)
                | Tok::LParen
                | Tok::LBracket
                | Tok::Tick
                | Tok::Inl
                | Tok::Inr
        )
    }

    fn application(&mut self) -> Result<Expr, SurfaceError> {
        let mut f = if self.peek() == &Tok::Minus && matches!(self.peek_at(1), Tok::Int(_)) {
            self.negative_literal()?
        } else {
            self.atom()?
        };
        while self.starts_atom() {
            let span = self.span();
            let arg = self.atom()?;
            f = Expr::new(ExprKind::App(Box::new(f), Box::new(arg)), span);
        }
        Ok(f)
    }

    fn negative_literal(&mut self) -> Result<Expr, SurfaceError> {
        let span = self.span();
        self.expect(Tok::Minus)?;
        let Tok::Int(n) = self.bump() else {
            return Err(self.unexpected("an integer"));
        };
        let v = i64::try_from(-(n as i128)).map_err(|_| self.error("integer literal out of range"))?;
        Ok(Expr::new(ExprKind::Int(v), span))
    }

    fn rat(&mut self) -> Result<Rational, SurfaceError> {
        let neg = self.eat(&Tok::Minus);
        let Tok::Int(n) = self.bump() else {
            return Err(self.unexpected("a rational literal"));
        };
        let mut q = Rational::from_integer(n.into());
        if self.peek() == &Tok::Slash && matches!(self.peek_at(1), Tok::Int(_)) {
            self.bump();
            let Tok::Int(d) = self.bump() else { unreachable!() };
            if d == 0 {
                return Err(self.error("zero denominator"));
            }
            q /= Rational::from_integer(d.into());
        }
        Ok(if neg { -q } else { q })
    }

    fn atom(&mut self) -> Result<Expr, SurfaceError> {
        let span = self.span();
        let kind = match self.peek().clone() {
            Tok::LIdent(s) => {
                self.bump();
                ExprKind::Var(Arc::from(s.as_str()))
            }
            Tok::Int(n) => {
                self.bump();
                ExprKind::Int(i64::try_from(n).map_err(|_| self.error("integer literal out of range"))?)
            }
            Tok::Tick => {
                self.bump();
                ExprKind::Tick(self.rat()?)
            }
            Tok::Inl => {
                self.bump();
                ExprKind::Inl(Box::new(self.atom_or_negative()?))
            }
            Tok::Inr => {
                self.bump();
                ExprKind::Inr(Box::new(self.atom_or_negative()?))
            }
            Tok::LBracket => {
                self.bump();
                let mut items = Vec::new();
                if !self.eat(&Tok::RBracket) {
                    loop {
                        items.push(self.expr()?);
                        if self.eat(&Tok::RBracket) {
                            break;
                        }
                        self.expect(Tok::Comma)?;
                    }
                }
                let end = self.toks[self.pos - 1].1;
                let mut list = Expr::new(ExprKind::Nil, end);
                for item in items.into_iter().rev() {
                    let s = item.span;
                    list = Expr::new(ExprKind::Cons(Box::new(item), Box::new(list)), s);
                }
                return Ok(Expr { span, ..list });
            }
            Tok::LParen => {
                self.bump();
                if self.eat(&Tok::RParen) {
                    ExprKind::Unit
                } else {
                    let e = self.expr()?;
                    if self.eat(&Tok::Comma) {
                        let e2 = self.expr()?;
                        self.expect(Tok::RParen)?;
                        ExprKind::Pair(Box::new(e), Box::new(e2))
                    } else if self.eat(&Tok::Colon) {
                        let t = self.stype()?;
                        self.expect(Tok::RParen)?;
                        ExprKind::Annot(Box::new(e), t)
                    } else {
                        self.expect(Tok::RParen)?;
                        return Ok(e);
                    }
                }
            }
            _ => return Err(self.unexpected("an expression")),
        };
        Ok(Expr::new(kind, span))
    }

    fn atom_or_negative(&mut self) -> Result<Expr, SurfaceError> {
        if self.peek() == &Tok::Minus && matches!(self.peek_at(1), Tok::Int(_)) {
            self.negative_literal()
        } else {
            self.atom()
        }
    }
}

// ---------------------------------------------------------------------------
// Declaration-level validation

fn validate(prog: &SurfaceProgram) -> Result<(), SurfaceError> {
    let mut labels: BTreeSet<Label> = BTreeSet::new();
    for e in &prog.effects {
        if !labels.insert(e.label.clone()) {
            return Err(SurfaceError::DuplicateName {
                name: e.label.to_string(),
                line: e.span.line,
                col: e.span.col,
            });
        }
    }
    if prog.exception.is_some() {
        labels.insert(Arc::from(EXC));
    }
    let mut names: BTreeSet<Name> = BTreeSet::new();
    for f in &prog.funs {
        if &*f.name == "main" || !names.insert(f.name.clone()) {
            return Err(SurfaceError::DuplicateName {
                name: f.name.to_string(),
                line: f.span.line,
                col: f.span.col,
            });
        }
    }
    let check_set = |set: &LabelSet, span: Span| -> Result<(), SurfaceError> {
        for l in set {
            if !labels.contains(l) {
                return Err(SurfaceError::UnknownEffectLabel {
                    label: l.to_string(),
                    line: span.line,
                    col: span.col,
                });
            }
        }
        Ok(())
    };
    let check_type = |t: &SType, span: Span| -> Result<(), SurfaceError> {
        let mut result = Ok(());
        walk_type_sets(t, &mut |set| {
            if result.is_ok() {
                result = check_set(set, span);
            }
        });
        result
    };
    for e in &prog.effects {
        check_type(&e.input, e.span)?;
        check_type(&e.output, e.span)?;
    }
    if let Some(t) = &prog.exception {
        check_type(t, Span::default())?;
    }
    for f in &prog.funs {
        check_set(&f.effects, f.span)?;
        check_type(&f.param_ty, f.span)?;
        check_type(&f.result_ty, f.span)?;
        check_expr_labels(&f.body, &labels, &check_type)?;
    }
    if let Some(m) = &prog.main {
        check_expr_labels(m, &labels, &check_type)?;
    }
    Ok(())
}

fn walk_type_sets(t: &SType, f: &mut impl FnMut(&LabelSet)) {
    match t {
        SType::Unit | SType::Void | SType::Int => {}
        SType::Prod(a, b) | SType::Sum(a, b) => {
            walk_type_sets(a, f);
            walk_type_sets(b, f);
        }
        SType::List(a) => walk_type_sets(a, f),
        SType::Fun(ft) | SType::LinFun(ft) => {
            f(&ft.effects);
            walk_type_sets(&ft.arg, f);
            walk_type_sets(&ft.res, f);
        }
    }
}

fn check_expr_labels(
    e: &Expr,
    labels: &BTreeSet<Label>,
    check_type: &impl Fn(&SType, Span) -> Result<(), SurfaceError>,
) -> Result<(), SurfaceError> {
    let unknown = |l: &Label, span: Span| SurfaceError::UnknownEffectLabel {
        label: l.to_string(),
        line: span.line,
        col: span.col,
    };
    let rec = |x: &Expr| check_expr_labels(x, labels, check_type);
    match &e.kind {
        ExprKind::Var(_) | ExprKind::Int(_) | ExprKind::Unit | ExprKind::Nil | ExprKind::Tick(_) => {
            Ok(())
        }
        ExprKind::Pair(a, b) | ExprKind::Cons(a, b) | ExprKind::BinOp(_, a, b) | ExprKind::App(a, b) => {
            rec(a)?;
            rec(b)
        }
        ExprKind::Let(_, a, b) | ExprKind::Try(a, _, b) => {
            rec(a)?;
            rec(b)
        }
        ExprKind::Inl(a) | ExprKind::Inr(a) | ExprKind::Raise(a) | ExprKind::Absurd(a) | ExprKind::Fn(_, a) => {
            rec(a)
        }
        ExprKind::Annot(a, t) => {
            check_type(t, e.span)?;
            rec(a)
        }
        ExprKind::Do(l, a) => {
            if !labels.contains(l) || &**l == EXC {
                return Err(unknown(l, e.span));
            }
            rec(a)
        }
        ExprKind::Handle(h) => {
            rec(&h.body)?;
            rec(&h.ret_body)?;
            let mut seen = BTreeSet::new();
            for b in &h.branches {
                if !labels.contains(&b.label) || &*b.label == EXC {
                    return Err(unknown(&b.label, b.span));
                }
                if !seen.insert(b.label.clone()) {
                    return Err(SurfaceError::DuplicateName {
                        name: b.label.to_string(),
                        line: b.span.line,
                        col: b.span.col,
                    });
                }
                rec(&b.body)?;
            }
            for (l, span) in &h.forwards {
                if !labels.contains(l) || &**l == EXC {
                    return Err(unknown(l, *span));
                }
                if !seen.insert(l.clone()) {
                    return Err(SurfaceError::DuplicateName {
                        name: l.to_string(),
                        line: span.line,
                        col: span.col,
                    });
                }
            }
            Ok(())
        }
        ExprKind::MatchList { scrut, nil, cons, .. } => {
            rec(scrut)?;
            rec(nil)?;
            rec(cons)
        }
        ExprKind::MatchSum {
            scrut,
            left_body,
            right_body,
            ..
        } => {
            rec(scrut)?;
            rec(left_body)?;
            rec(right_body)
        }
        ExprKind::MatchPair { scrut, body, .. } => {
            rec(scrut)?;
            rec(body)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_function() {
        let p = parse("fun id (x: unit): unit = x;").unwrap();
        assert_eq!(p.funs.len(), 1);
        assert_eq!(p.funs[0].body.kind, ExprKind::Var(Arc::from("x")));
    }

    #[test]
    fn effect_declaration() {
        let p = parse("effect Insert : list(int) => unit;").unwrap();
        assert_eq!(p.effects.len(), 1);
        assert_eq!(p.effects[0].input, SType::list(SType::Int));
    }

    #[test]
    fn unbound_variables_parse() {
        assert!(parse("fun f (x: unit): unit = y;").is_ok());
    }

    #[test]
    fn syntax_error_position() {
        let err = parse("fun f (x: unit): unit =\n  let = 3;").unwrap_err();
        assert!(matches!(err, SurfaceError::Syntax { line: 2, col: 7, .. }), "{err:?}");
    }

    #[test]
    fn duplicate_and_unknown_names() {
        assert!(matches!(
            parse("effect A : unit => unit; effect A : unit => unit;"),
            Err(SurfaceError::DuplicateName { .. })
        ));
        assert!(matches!(
            parse("fun f (x: unit): unit / {B} = x;"),
            Err(SurfaceError::UnknownEffectLabel { .. })
        ));
        assert!(matches!(
            parse("fun f (x: unit): unit = do B x;"),
            Err(SurfaceError::UnknownEffectLabel { .. })
        ));
    }

    #[test]
    fn precedence() {
        let e = parse_expr("f x + 1 :: t").unwrap();
        let ExprKind::Cons(h, _) = e.kind else { panic!() };
        let ExprKind::BinOp(PrimOp::Add, l, _) = h.kind else { panic!() };
        assert!(matches!(l.kind, ExprKind::App(..)));
        let e = parse_expr("a - 1 - 2").unwrap();
        let ExprKind::BinOp(PrimOp::Sub, l, _) = e.kind else { panic!() };
        assert!(matches!(l.kind, ExprKind::BinOp(PrimOp::Sub, ..)));
    }

    #[test]
    fn types_and_effect_sets() {
        let t = parse_stype("int -o unit -> unit / {A, B}").unwrap();
        let SType::LinFun(ft) = t else { panic!() };
        assert_eq!(ft.effects.len(), 0);
        let SType::Fun(inner) = &ft.res else { panic!() };
        assert_eq!(inner.effects.len(), 2);
        let t = parse_stype("int -o (unit -> unit) / {A}").unwrap();
        let SType::LinFun(ft) = t else { panic!() };
        assert_eq!(ft.effects.len(), 1);
        let p = parse("effect A : unit => unit; fun f (x: unit): unit -> unit / {A} = x;").unwrap();
        assert_eq!(p.funs[0].result_ty, SType::fun(SType::Unit, SType::Unit, LabelSet::new()));
        assert_eq!(p.funs[0].effects.len(), 1);
    }

    #[test]
    fn list_literals_and_negatives() {
        let e = parse_expr("[1, -2]").unwrap();
        let ExprKind::Cons(h, t) = e.kind else { panic!() };
        assert_eq!(h.kind, ExprKind::Int(1));
        let ExprKind::Cons(h2, _) = t.kind else { panic!() };
        assert_eq!(h2.kind, ExprKind::Int(-2));
    }
}
