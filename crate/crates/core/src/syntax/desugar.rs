use std::collections::HashSet;
use std::sync::Arc;

use super::ast::{annotate_names, Expr, ExprKind, FunDef, Name, Tau};
use super::surface::{BinOp, Def, SourceProgram, SurfExpr, SurfKind};
use super::{Span, SyntaxError};
use crate::stdlib::{Builtin, SENSE_DIST};
use crate::value::Literal;

/// Whether free identifiers are rejected or treated as inputs read from the
/// sensor state at run time.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DesugarMode {
    Closed,
    Harness,
}

#[derive(Clone, Debug)]
pub struct Desugared {
    /// Core expression, already name-annotated.
    pub expr: Expr,
    /// Top-level definitions in source order.
    pub defs: Vec<(Name, Span)>,
    /// Free identifiers resolved through the sensor state, in order of first use.
    pub inputs: Vec<Name>,
}

struct Cx {
    mode: DesugarMode,
    scope: Vec<Name>,
    inputs: Vec<Name>,
    fresh: u32,
}

fn mk(span: &Span, kind: ExprKind) -> Expr {
    Expr::new(span.clone(), kind)
}

fn lit(span: &Span, l: Literal) -> Expr {
    mk(span, ExprKind::Lit(l))
}

fn builtin(span: &Span, b: Builtin) -> Expr {
    lit(span, Literal::Builtin(b))
}

fn app(span: &Span, callee: Expr, args: Vec<Expr>) -> Expr {
    mk(span, ExprKind::App(Box::new(callee), args))
}

fn fun(span: &Span, name: Name, params: Vec<Name>, body: Expr) -> Expr {
    mk(span, ExprKind::Fun(Arc::new(FunDef { tau: Tau(0), name, params, body })))
}

fn check_params(span: &Span, params: &[String]) -> Result<(), SyntaxError> {
    let mut seen = HashSet::new();
    for p in params {
        if !seen.insert(p.as_str()) {
            return Err(SyntaxError::desugar(span.clone(), format!("duplicate parameter `{p}`")));
        }
    }
    Ok(())
}

impl Cx {
    fn fresh(&mut self, prefix: char) -> Name {
        let n = self.fresh;
        self.fresh += 1;
        Arc::from(format!("%{prefix}{n}"))
    }

    fn bound(&self, x: &str) -> bool {
        self.scope.iter().any(|n| &**n == x)
    }

    fn resolve_builtin(&self, x: &str) -> Option<Builtin> {
        if self.bound(x) {
            None
        } else {
            Builtin::from_name(x)
        }
    }

    fn with_bound<T>(&mut self, names: &[Name], f: impl FnOnce(&mut Self) -> T) -> T {
        let mark = self.scope.len();
        self.scope.extend(names.iter().cloned());
        let out = f(self);
        self.scope.truncate(mark);
        out
    }

    fn function(&mut self, span: &Span, name: Name, params: &[String], body: &SurfExpr) -> Result<Expr, SyntaxError> {
        check_params(span, params)?;
        let params: Vec<Name> = params.iter().map(|p| Arc::from(p.as_str())).collect();
        let mut names = vec![name.clone()];
        names.extend(params.iter().cloned());
        let body = self.with_bound(&names, |cx| cx.expr(body))?;
        Ok(fun(span, name, params, body))
    }

    fn lambda(&mut self, span: &Span, params: &[String], body: &SurfExpr) -> Result<Expr, SyntaxError> {
        let name = self.fresh('f');
        self.function(span, name, params, body)
    }

    /// `a < b` and `a > b` are rewritten onto `>=`/`<=` and `mux`.
    fn strict_compare(&self, span: &Span, op: BinOp, l: Expr, r: Expr) -> Expr {
        let flip = if op == BinOp::Lt { Builtin::Ge } else { Builtin::Le };
        let test = app(span, builtin(span, flip), vec![l, r]);
        app(
            span,
            builtin(span, Builtin::Mux),
            vec![test, lit(span, Literal::Bool(false)), lit(span, Literal::Bool(true))],
        )
    }

    fn op_value(&mut self, span: &Span, op: BinOp) -> Expr {
        match op {
            BinOp::Lt | BinOp::Gt => {
                let (a, b): (Name, Name) = (Arc::from("a"), Arc::from("b"));
                let body = self.strict_compare(
                    span,
                    op,
                    mk(span, ExprKind::Var(a.clone())),
                    mk(span, ExprKind::Var(b.clone())),
                );
                let name = self.fresh('f');
                fun(span, name, vec![a, b], body)
            }
            _ => builtin(span, op_builtin(op)),
        }
    }

    fn expr(&mut self, e: &SurfExpr) -> Result<Expr, SyntaxError> {
        let span = &e.span;
        Ok(match &e.kind {
            SurfKind::Num(n) => lit(span, Literal::Num(*n)),
            SurfKind::Bool(b) => lit(span, Literal::Bool(*b)),
            SurfKind::Ident(x) => self.ident(span, x)?,
            SurfKind::Op(op) => self.op_value(span, *op),
            SurfKind::Binary(op, l, r) => {
                let (l, r) = (self.expr(l)?, self.expr(r)?);
                match op {
                    BinOp::Lt | BinOp::Gt => self.strict_compare(span, *op, l, r),
                    _ => app(span, builtin(span, op_builtin(*op)), vec![l, r]),
                }
            }
            SurfKind::Neg(inner) => {
                let inner = self.expr(inner)?;
                app(span, builtin(span, Builtin::Sub), vec![lit(span, Literal::Num(0.0)), inner])
            }
            SurfKind::Call(callee, args) => self.call(span, callee, args)?,
            SurfKind::Val(x, bound, body) => {
                let bound = self.expr(bound)?;
                let x: Name = Arc::from(x.as_str());
                let body = self.with_bound(std::slice::from_ref(&x), |cx| cx.expr(body))?;
                mk(span, ExprKind::Val(x, Box::new(bound), Box::new(body)))
            }
            SurfKind::Def(def, rest) => {
                let name: Name = Arc::from(def.name.as_str());
                let f = self.function(&def.span, name.clone(), &def.params, &def.body)?;
                let rest = self.with_bound(std::slice::from_ref(&name), |cx| cx.expr(rest))?;
                mk(span, ExprKind::Val(name, Box::new(f), Box::new(rest)))
            }
            SurfKind::Fun(name, params, body) => self.function(span, Arc::from(name.as_str()), params, body)?,
            SurfKind::Lambda(params, body) => self.lambda(span, params, body)?,
            SurfKind::If(c, then, other) => {
                let c = self.expr(c)?;
                let t = self.lambda(&then.span, &[], then)?;
                let o = self.lambda(&other.span, &[], other)?;
                let pick = app(span, builtin(span, Builtin::Mux), vec![c, t, o]);
                app(span, pick, vec![])
            }
            SurfKind::RetSend(inner) => {
                let a = self.expr(inner)?;
                let b = self.expr(inner)?;
                pair(span, a, b)
            }
            SurfKind::ReturnSend(ret, send) => {
                let a = self.expr(ret)?;
                let b = self.expr(send)?;
                pair(span, a, b)
            }
        })
    }

    fn ident(&mut self, span: &Span, x: &str) -> Result<Expr, SyntaxError> {
        if self.bound(x) {
            return Ok(mk(span, ExprKind::Var(Arc::from(x))));
        }
        if let Some(b) = Builtin::from_name(x) {
            return Ok(builtin(span, b));
        }
        if x == SENSE_DIST {
            return Ok(mk(span, ExprKind::Var(Arc::from(x))));
        }
        match self.mode {
            DesugarMode::Closed => Err(SyntaxError::desugar(span.clone(), format!("unbound variable `{x}`"))),
            DesugarMode::Harness => {
                let name: Name = Arc::from(x);
                if !self.inputs.contains(&name) {
                    self.inputs.push(name.clone());
                }
                Ok(mk(span, ExprKind::Var(name)))
            }
        }
    }

    fn call(&mut self, span: &Span, callee: &SurfExpr, args: &[SurfExpr]) -> Result<Expr, SyntaxError> {
        let target = match &callee.kind {
            SurfKind::Ident(x) => self.resolve_builtin(x),
            _ => None,
        };
        let mut out = Vec::with_capacity(args.len());
        for (i, a) in args.iter().enumerate() {
            let arg = match (&a.kind, target) {
                // A handler naming only the neighbour argument gets an unused
                // first parameter for the old value.
                (SurfKind::Lambda(params, body), Some(Builtin::Exchange)) if i == 1 && params.len() == 1 => {
                    let old = self.fresh('o');
                    check_params(&a.span, params)?;
                    let name = self.fresh('f');
                    let params: Vec<Name> = std::iter::once(old)
                        .chain(params.iter().map(|p| Arc::from(p.as_str())))
                        .collect();
                    let mut names = vec![name.clone()];
                    names.extend(params.iter().cloned());
                    let body = self.with_bound(&names, |cx| cx.expr(body))?;
                    fun(&a.span, name, params, body)
                }
                _ => self.expr(a)?,
            };
            out.push(arg);
        }
        if target == Some(Builtin::PairCtor) && out.len() == 2 {
            return Ok(pair(span, out.remove(0), out.remove(0)));
        }
        let callee = self.expr(callee)?;
        Ok(app(span, callee, out))
    }
}

/// `Pair` applied to two literals is itself a literal.
fn pair(span: &Span, a: Expr, b: Expr) -> Expr {
    match (&a.kind, &b.kind) {
        (ExprKind::Lit(x), ExprKind::Lit(y)) => lit(span, Literal::pair(x.clone(), y.clone())),
        _ => app(span, builtin(span, Builtin::PairCtor), vec![a, b]),
    }
}

fn op_builtin(op: BinOp) -> Builtin {
    match op {
        BinOp::Add => Builtin::Add,
        BinOp::Sub => Builtin::Sub,
        BinOp::Mul => Builtin::Mul,
        BinOp::Div => Builtin::Div,
        BinOp::Eq => Builtin::Eq,
        BinOp::Le => Builtin::Le,
        BinOp::Ge => Builtin::Ge,
        BinOp::And => Builtin::And,
        BinOp::Or => Builtin::Or,
        BinOp::Lt | BinOp::Gt => unreachable!("strict comparisons are rewritten"),
    }
}

/// Lowers a parsed program to a closed (or harness-open) core expression.
///
/// Top-level definitions become a `val` chain around the main expression.
/// Without a main expression the last definition is applied to its own
/// parameter names, which then become inputs.
pub fn desugar(p: &SourceProgram, mode: DesugarMode) -> Result<Desugared, SyntaxError> {
    let mut seen = HashSet::new();
    for d in &p.defs {
        if !seen.insert(d.name.as_str()) {
            return Err(SyntaxError::desugar(d.span.clone(), format!("duplicate definition `{}`", d.name)));
        }
    }

    let mut cx = Cx { mode, scope: Vec::new(), inputs: Vec::new(), fresh: 0 };
    let mut funs = Vec::with_capacity(p.defs.len());
    for d in &p.defs {
        let name: Name = Arc::from(d.name.as_str());
        let f = cx.function(&d.span, name.clone(), &d.params, &d.body)?;
        cx.scope.push(name.clone());
        funs.push((name, d.span.clone(), f));
    }

    let main = match (&p.main, p.defs.last()) {
        (Some(main), _) => cx.expr(main)?,
        (None, Some(last)) => implicit_main(&mut cx, last)?,
        (None, None) => {
            let span = Span::new(Arc::from("<program>"), 1, 1);
            return Err(SyntaxError::desugar(span, "empty program"));
        }
    };

    let defs = funs.iter().map(|(n, s, _)| (n.clone(), s.clone())).collect();
    let mut expr = main;
    for (name, span, f) in funs.into_iter().rev() {
        expr = mk(&span, ExprKind::Val(name, Box::new(f), Box::new(expr)));
    }
    Ok(Desugared { expr: annotate_names(&expr), defs, inputs: cx.inputs })
}

fn implicit_main(cx: &mut Cx, last: &Def) -> Result<Expr, SyntaxError> {
    let callee = mk(&last.span, ExprKind::Var(Arc::from(last.name.as_str())));
    let mut args = Vec::new();
    for p in &last.params {
        // A parameter named after a sensor reads that sensor.
        if let Some(b) = Builtin::from_name(p).filter(|b| b.is_sensor()) {
            args.push(app(&last.span, builtin(&last.span, b), vec![]));
            continue;
        }
        if cx.mode == DesugarMode::Closed {
            return Err(SyntaxError::desugar(
                last.span.clone(),
                format!("no main expression, and `{}` needs argument `{p}`", last.name),
            ));
        }
        args.push(cx.ident(&last.span, p)?);
    }
    Ok(app(&last.span, callee, args))
}
