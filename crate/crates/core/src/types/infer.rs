use std::collections::HashMap;
use std::fmt;

use super::{Scheme, TyVar, Type, VarFlags};
use crate::stdlib::{Builtin, SENSE_DIST};
use crate::syntax::{Desugared, Expr, ExprKind, FunDef, Name, Span};
use crate::value::Literal;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TypeErrorKind {
    Unbound(String),
    Mismatch { expected: String, found: String },
    Occurs { var: String, ty: String },
    NotComparable(String),
    NestedField(String),
    Arity { expected: usize, found: usize },
    NotAFunction(String),
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("{span}: type error: {kind}")]
pub struct TypeError {
    pub span: Span,
    pub kind: TypeErrorKind,
}

impl fmt::Display for TypeErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TypeErrorKind::Unbound(x) => write!(f, "unbound variable `{x}`"),
            TypeErrorKind::Mismatch { expected, found } => write!(f, "expected `{expected}`, found `{found}`"),
            TypeErrorKind::Occurs { var, ty } => write!(f, "infinite type: `{var}` occurs in `{ty}`"),
            TypeErrorKind::NotComparable(t) => write!(f, "`{t}` is not comparable (it contains a function or field)"),
            TypeErrorKind::NestedField(t) => write!(f, "field of field type: `{t}` where a local type is required"),
            TypeErrorKind::Arity { expected, found } => {
                write!(f, "function takes {expected} argument(s) but {found} were supplied")
            }
            TypeErrorKind::NotAFunction(t) => write!(f, "`{t}` is not a function"),
        }
    }
}

/// A place where a local value flows into a field position.
#[derive(Clone, Debug, PartialEq)]
pub struct LiftMark {
    pub span: Option<Span>,
    pub local: Type,
}

#[derive(Clone, Debug)]
pub struct Unifier {
    pub subst: HashMap<TyVar, Type>,
    pub lifts: Vec<LiftMark>,
}

#[derive(Clone, Debug)]
pub struct TypedProgram {
    pub defs: Vec<(Name, Scheme)>,
    pub main: Type,
    pub inputs: Vec<(Name, Type)>,
    pub lifts: Vec<LiftMark>,
}

#[derive(Debug)]
enum UErr {
    Mismatch(Type, Type),
    Occurs(TyVar, Type),
    NotComparable(Type),
    NestedField(Type),
}

enum Undo {
    Bind(u32),
    Flags(u32, VarFlags),
    Solved(usize),
}

struct Pending {
    expected: Type,
    actual: Type,
    span: Option<Span>,
    solved: bool,
}

struct Snapshot {
    trail: usize,
    lifts: usize,
    pending: usize,
}

struct Infer {
    bind: Vec<Option<Type>>,
    flags: Vec<VarFlags>,
    trail: Vec<Undo>,
    lifts: Vec<LiftMark>,
    /// Deferred `actual ⊑ field[x]` constraints whose actual side was still an
    /// unknown variable: it may end up local (and be promoted) or a field.
    pending: Vec<Pending>,
    env: Vec<(Name, Scheme)>,
    span: Option<Span>,
}

impl Infer {
    fn new() -> Self {
        Infer {
            bind: Vec::new(),
            flags: Vec::new(),
            trail: Vec::new(),
            lifts: Vec::new(),
            pending: Vec::new(),
            env: Vec::new(),
            span: None,
        }
    }

    fn fresh(&mut self, flags: VarFlags) -> Type {
        self.bind.push(None);
        self.flags.push(flags);
        Type::Var(TyVar(self.bind.len() as u32 - 1))
    }

    fn reserve(&mut self, upto: u32) {
        while (self.bind.len() as u32) < upto {
            self.fresh(VarFlags::NONE);
        }
    }

    fn snapshot(&self) -> Snapshot {
        Snapshot { trail: self.trail.len(), lifts: self.lifts.len(), pending: self.pending.len() }
    }

    fn restore(&mut self, s: Snapshot) {
        while self.trail.len() > s.trail {
            match self.trail.pop().unwrap() {
                Undo::Bind(v) => self.bind[v as usize] = None,
                Undo::Flags(v, old) => self.flags[v as usize] = old,
                Undo::Solved(i) => {
                    if let Some(p) = self.pending.get_mut(i) {
                        p.solved = false
                    }
                }
            }
        }
        self.lifts.truncate(s.lifts);
        self.pending.truncate(s.pending);
    }

    fn resolve(&self, t: &Type) -> Type {
        let mut t = t.clone();
        while let Type::Var(v) = t {
            match &self.bind[v.0 as usize] {
                Some(b) => t = b.clone(),
                None => break,
            }
        }
        t
    }

    fn zonk(&self, t: &Type) -> Type {
        match self.resolve(t) {
            Type::Var(v) => Type::Var(v),
            Type::Data(c, args) => Type::Data(c, args.iter().map(|a| self.zonk(a)).collect()),
            Type::Field(e) => Type::field(self.zonk(&e)),
            Type::Arrow(ps, r) => Type::arrow(ps.iter().map(|p| self.zonk(p)).collect(), self.zonk(&r)),
        }
    }

    fn occurs(&self, v: TyVar, t: &Type) -> bool {
        match self.resolve(t) {
            Type::Var(w) => v == w,
            Type::Data(_, args) => args.iter().any(|a| self.occurs(v, a)),
            Type::Field(e) => self.occurs(v, &e),
            Type::Arrow(ps, r) => ps.iter().any(|p| self.occurs(v, p)) || self.occurs(v, &r),
        }
    }

    fn set_flags(&mut self, v: TyVar, flags: VarFlags) {
        let old = self.flags[v.0 as usize];
        let new = old.merge(flags);
        if new != old {
            self.trail.push(Undo::Flags(v.0, old));
            self.flags[v.0 as usize] = new;
        }
    }

    /// Imposes variable flags on a type.
    fn constrain(&mut self, t: &Type, flags: VarFlags) -> Result<(), UErr> {
        if flags == VarFlags::NONE {
            return Ok(());
        }
        match self.resolve(t) {
            Type::Var(v) => {
                self.set_flags(v, flags);
                Ok(())
            }
            t @ Type::Field(_) if flags.comparable => Err(UErr::NotComparable(t)),
            t @ Type::Field(_) => Err(UErr::NestedField(t)),
            t @ Type::Arrow(..) if flags.comparable => Err(UErr::NotComparable(t)),
            Type::Arrow(..) => Ok(()),
            Type::Data(_, args) => {
                if flags.comparable {
                    for a in &args {
                        self.constrain(a, VarFlags::COMPARABLE)?;
                    }
                }
                Ok(())
            }
        }
    }

    fn bind_var(&mut self, v: TyVar, t: Type) -> Result<(), UErr> {
        if let Type::Var(w) = t {
            if w == v {
                return Ok(());
            }
        }
        if self.occurs(v, &t) {
            return Err(UErr::Occurs(v, t));
        }
        let flags = self.flags[v.0 as usize];
        self.constrain(&t, flags).map_err(|e| match e {
            UErr::NestedField(_) | UErr::NotComparable(_) if !flags.comparable => UErr::NestedField(t.clone()),
            other => other,
        })?;
        self.bind[v.0 as usize] = Some(t);
        self.trail.push(Undo::Bind(v.0));
        Ok(())
    }

    fn unify(&mut self, a: &Type, b: &Type) -> Result<(), UErr> {
        let (a, b) = (self.resolve(a), self.resolve(b));
        match (&a, &b) {
            (Type::Var(v), _) => self.bind_var(*v, b),
            (_, Type::Var(w)) => self.bind_var(*w, a),
            (Type::Data(c, xs), Type::Data(d, ys)) if c == d && xs.len() == ys.len() => {
                for (x, y) in xs.iter().zip(ys) {
                    self.unify(x, y)?;
                }
                Ok(())
            }
            (Type::Field(x), Type::Field(y)) => self.unify(x, y),
            (Type::Arrow(ps, r), Type::Arrow(qs, s)) if ps.len() == qs.len() => {
                for (p, q) in ps.iter().zip(qs) {
                    self.unify(p, q)?;
                }
                self.unify(r, s)
            }
            _ => Err(UErr::Mismatch(a, b)),
        }
    }

    /// `actual` may be used where `expected` is required. The only coercion is
    /// promotion of a local value into a field.
    fn subsume(&mut self, expected: &Type, actual: &Type) -> Result<(), UErr> {
        let (e, a) = (self.resolve(expected), self.resolve(actual));
        match (&e, &a) {
            (Type::Field(x), Type::Var(v)) if !self.flags[v.0 as usize].local => {
                self.pending.push(Pending { expected: e.clone(), actual: a.clone(), span: self.span.clone(), solved: false });
                let _ = x;
                Ok(())
            }
            // A local variable under a field is promoted like any local.
            (Type::Var(_), _) | (_, Type::Var(_)) if !matches!(e, Type::Field(_)) => self.unify(&e, &a),
            (Type::Field(x), Type::Field(y)) => self.subsume(x, y),
            (Type::Field(x), _) => {
                self.constrain(x, VarFlags::LOCAL)?;
                self.subsume(x, &a)?;
                self.lifts.push(LiftMark { span: self.span.clone(), local: a.clone() });
                Ok(())
            }
            (Type::Data(c, xs), Type::Data(d, ys)) if c == d && xs.len() == ys.len() => {
                for (x, y) in xs.iter().zip(ys) {
                    self.subsume(x, y)?;
                }
                Ok(())
            }
            (Type::Arrow(ps, r), Type::Arrow(qs, s)) if ps.len() == qs.len() => {
                for (p, q) in ps.iter().zip(qs) {
                    self.subsume(q, p)?;
                }
                self.subsume(r, s)
            }
            _ => Err(UErr::Mismatch(e, a)),
        }
    }

    /// Re-examines deferred promotions whose unknown side has since been
    /// determined.
    fn settle(&mut self) -> Result<(), UErr> {
        loop {
            let mut progress = false;
            for i in 0..self.pending.len() {
                if self.pending[i].solved {
                    continue;
                }
                let actual = self.resolve(&self.pending[i].actual);
                if matches!(actual, Type::Var(v) if !self.flags[v.0 as usize].local) {
                    continue;
                }
                self.pending[i].solved = true;
                self.trail.push(Undo::Solved(i));
                let expected = self.pending[i].expected.clone();
                let saved = std::mem::replace(&mut self.span, self.pending[i].span.clone());
                let r = self.subsume(&expected, &actual);
                self.span = saved;
                r?;
                progress = true;
            }
            if !progress {
                return Ok(());
            }
        }
    }

    /// Commits still-undetermined promotions to the field reading, which
    /// accepts both locals and fields at every use. With `keep`, variables
    /// still free in the environment are left alone.
    fn default_pending(&mut self, only: Option<&[TyVar]>) -> Result<(), UErr> {
        self.settle()?;
        for i in 0..self.pending.len() {
            if self.pending[i].solved {
                continue;
            }
            let actual = self.resolve(&self.pending[i].actual);
            let Type::Var(v) = actual else { continue };
            if only.is_some_and(|vs| !vs.contains(&v)) {
                continue;
            }
            self.pending[i].solved = true;
            self.trail.push(Undo::Solved(i));
            let expected = self.pending[i].expected.clone();
            self.unify(&Type::Var(v), &expected)?;
            self.settle()?;
        }
        Ok(())
    }

    fn instantiate(&mut self, s: &Scheme) -> Type {
        if s.vars.is_empty() {
            return s.ty.clone();
        }
        let mut map = HashMap::new();
        for (v, flags) in &s.vars {
            let fresh = self.fresh(*flags);
            map.insert(*v, fresh);
        }
        s.ty.substitute(&map)
    }

    fn env_vars(&self) -> Vec<TyVar> {
        let mut out = Vec::new();
        for (_, s) in &self.env {
            let mut fv = Vec::new();
            self.zonk(&s.ty).free_vars(&mut fv);
            for v in fv {
                if !s.vars.iter().any(|(w, _)| *w == v) && !out.contains(&v) {
                    out.push(v);
                }
            }
        }
        out
    }

    fn generalize(&mut self, t: &Type) -> Result<Scheme, UErr> {
        let env = self.env_vars();
        let mut fv = Vec::new();
        self.zonk(t).free_vars(&mut fv);
        let local: Vec<TyVar> = fv.iter().copied().filter(|v| !env.contains(v)).collect();
        self.default_pending(Some(&local))?;
        let ty = self.zonk(t);
        let mut fv = Vec::new();
        ty.free_vars(&mut fv);
        let vars = fv
            .into_iter()
            .filter(|v| !env.contains(v))
            .map(|v| (v, self.flags[v.0 as usize]))
            .collect();
        Ok(Scheme { vars, ty })
    }

    fn lookup(&self, x: &str) -> Option<&Scheme> {
        self.env.iter().rev().find(|(n, _)| &**n == x).map(|(_, s)| s)
    }

    fn err(&self, span: &Span, e: UErr) -> TypeError {
        let kind = match e {
            UErr::Mismatch(a, b) => TypeErrorKind::Mismatch {
                expected: self.zonk(&a).to_string(),
                found: self.zonk(&b).to_string(),
            },
            UErr::Occurs(v, t) => TypeErrorKind::Occurs {
                var: Type::Var(v).to_string(),
                ty: self.zonk(&t).to_string(),
            },
            UErr::NotComparable(t) => TypeErrorKind::NotComparable(self.zonk(&t).to_string()),
            UErr::NestedField(t) => TypeErrorKind::NestedField(self.zonk(&t).to_string()),
        };
        TypeError { span: span.clone(), kind }
    }

    fn at<T>(&mut self, span: &Span, f: impl FnOnce(&mut Self) -> Result<T, UErr>) -> Result<T, TypeError> {
        let saved = self.span.replace(span.clone());
        let r = f(self);
        self.span = saved;
        r.map_err(|e| self.err(span, e))
    }

    fn synth(&mut self, e: &Expr, hint: Option<&Type>) -> Result<Type, TypeError> {
        match &e.kind {
            ExprKind::Var(x) => match self.lookup(x) {
                Some(s) => {
                    let s = s.clone();
                    Ok(self.instantiate(&s))
                }
                None => Err(TypeError { span: e.span.clone(), kind: TypeErrorKind::Unbound(x.to_string()) }),
            },
            ExprKind::Lit(l) => self.literal(&e.span, l, hint),
            ExprKind::Fun(def) => self.function(&e.span, def, hint),
            ExprKind::App(callee, args) => self.application(&e.span, callee, args),
            ExprKind::Val(x, bound, body) => {
                let t1 = self.synth(bound, None)?;
                let scheme = self.at(&bound.span, |cx| cx.generalize(&t1))?;
                self.env.push((x.clone(), scheme));
                let t2 = self.synth(body, hint);
                self.env.pop();
                t2
            }
        }
    }

    fn literal(&mut self, span: &Span, l: &Literal, hint: Option<&Type>) -> Result<Type, TypeError> {
        match l {
            Literal::Num(_) => Ok(Type::num()),
            Literal::Bool(_) => Ok(Type::bool()),
            Literal::Data(_, args) => {
                let ts = args.iter().map(|a| self.literal(span, a, None)).collect::<Result<Vec<_>, _>>()?;
                Ok(Type::pair(ts[0].clone(), ts[1].clone()))
            }
            Literal::Builtin(b) => {
                let plain = self.instantiate(&b.scheme());
                let (Some(hint), Some(lifted)) = (hint, b.lifted_scheme()) else { return Ok(plain) };
                let snap = self.snapshot();
                let fits = self.at(span, |cx| {
                    cx.subsume(hint, &plain)?;
                    cx.settle()
                });
                self.restore(snap);
                if fits.is_ok() {
                    Ok(plain)
                } else {
                    Ok(self.instantiate(&lifted))
                }
            }
            Literal::Fun(c) => self.function(span, &c.def, hint),
        }
    }

    fn function(&mut self, span: &Span, def: &FunDef, hint: Option<&Type>) -> Result<Type, TypeError> {
        let expected = hint.map(|h| self.resolve(h));
        let (params, ret_hint) = match &expected {
            Some(Type::Arrow(ps, r)) if ps.len() == def.params.len() => (ps.clone(), Some((**r).clone())),
            _ => ((0..def.params.len()).map(|_| self.fresh(VarFlags::NONE)).collect(), None),
        };
        let ret = self.fresh(VarFlags::NONE);
        let fty = Type::arrow(params.clone(), ret.clone());
        let mark = self.env.len();
        self.env.push((def.name.clone(), Scheme::mono(fty.clone())));
        for (p, t) in def.params.iter().zip(&params) {
            self.env.push((p.clone(), Scheme::mono(t.clone())));
        }
        let body = self.synth(&def.body, ret_hint.as_ref());
        self.env.truncate(mark);
        let body = body?;
        self.at(&def.body.span, |cx| cx.subsume(&ret, &body))?;
        let _ = span;
        Ok(fty)
    }

    fn application(&mut self, span: &Span, callee: &Expr, args: &[Expr]) -> Result<Type, TypeError> {
        // Arguments whose typing depends on the expected parameter type are
        // checked per attempt; everything else is synthesised once.
        let deferred = |a: &Expr| matches!(a.kind, ExprKind::Fun(_) | ExprKind::Lit(Literal::Builtin(_)));

        if let ExprKind::Lit(Literal::Builtin(b)) = &callee.kind {
            let mut arg_types = Vec::with_capacity(args.len());
            for a in args {
                arg_types.push(if deferred(a) { None } else { Some(self.synth(a, None)?) });
            }
            self.check_comparable(*b, args, &arg_types)?;
            let mut schemes = vec![b.scheme()];
            schemes.extend(b.lifted_scheme());
            let mut first_err = None;
            for s in schemes {
                let snap = self.snapshot();
                let t = self.instantiate(&s);
                match self.apply(span, callee, &t, args, &arg_types) {
                    Ok(r) => return Ok(r),
                    Err(e) => {
                        self.restore(snap);
                        first_err.get_or_insert(e);
                    }
                }
            }
            return Err(first_err.unwrap());
        }

        if let ExprKind::Fun(_) = &callee.kind {
            // A function applied on the spot takes its parameter types from
            // the arguments, so locals and fields are told apart.
            let mut arg_types = Vec::with_capacity(args.len());
            for a in args {
                arg_types.push(if deferred(a) { None } else { Some(self.synth(a, None)?) });
            }
            let ps = arg_types.iter().map(|t| t.clone().unwrap_or_else(|| self.fresh(VarFlags::NONE))).collect();
            let hint = Type::arrow(ps, self.fresh(VarFlags::NONE));
            let t = self.synth(callee, Some(&hint))?;
            return self.apply(span, callee, &t, args, &arg_types);
        }

        let t = self.synth(callee, None)?;
        let mut arg_types = Vec::with_capacity(args.len());
        for a in args {
            arg_types.push(if deferred(a) { None } else { Some(self.synth(a, None)?) });
        }
        self.apply(span, callee, &t, args, &arg_types)
    }

    fn check_comparable(&mut self, b: Builtin, args: &[Expr], arg_types: &[Option<Type>]) -> Result<(), TypeError> {
        if !b.is_comparison() {
            return Ok(());
        }
        for (a, t) in args.iter().zip(arg_types) {
            let bad = match t {
                None => matches!(a.kind, ExprKind::Fun(_) | ExprKind::Lit(Literal::Builtin(_))),
                Some(t) => match self.resolve(t) {
                    Type::Arrow(..) => true,
                    Type::Field(e) => matches!(self.resolve(&e), Type::Arrow(..)),
                    _ => false,
                },
            };
            if bad {
                let shown = t.as_ref().map(|t| self.zonk(t).to_string()).unwrap_or_else(|| "function".into());
                return Err(TypeError { span: a.span.clone(), kind: TypeErrorKind::NotComparable(shown) });
            }
        }
        Ok(())
    }

    fn apply(
        &mut self,
        span: &Span,
        callee: &Expr,
        t: &Type,
        args: &[Expr],
        arg_types: &[Option<Type>],
    ) -> Result<Type, TypeError> {
        let mut f = self.resolve(t);
        // A field of functions is applied through the executing device's own
        // entry.
        if let Type::Field(inner) = &f {
            f = self.resolve(inner);
        }
        if let Type::Var(_) = f {
            let ps: Vec<Type> = args.iter().map(|_| self.fresh(VarFlags::NONE)).collect();
            let r = self.fresh(VarFlags::NONE);
            let arrow = Type::arrow(ps, r);
            self.at(&callee.span, |cx| cx.unify(&f, &arrow))?;
            f = arrow;
        }
        let Type::Arrow(ps, r) = f else {
            let shown = self.zonk(&f).to_string();
            return Err(TypeError { span: callee.span.clone(), kind: TypeErrorKind::NotAFunction(shown) });
        };
        if ps.len() != args.len() {
            return Err(TypeError {
                span: span.clone(),
                kind: TypeErrorKind::Arity { expected: ps.len(), found: args.len() },
            });
        }
        for ((a, at), p) in args.iter().zip(arg_types).zip(&ps) {
            let actual = match at {
                Some(t) => t.clone(),
                None => self.synth(a, Some(p))?,
            };
            self.at(&a.span, |cx| cx.subsume(p, &actual))?;
        }
        self.at(span, |cx| cx.settle())?;
        Ok(*r)
    }
}

fn base_env(cx: &mut Infer) {
    cx.env.push((Name::from(SENSE_DIST), Scheme::mono(Type::field(Type::num()))));
}

/// Infers the type of a single expression; free variables other than the
/// sensor `senseDist` are given monomorphic unknown types.
pub fn typecheck_expr(e: &Expr) -> Result<Type, TypeError> {
    let mut cx = Infer::new();
    base_env(&mut cx);
    for x in crate::syntax::free_vars(e) {
        if cx.lookup(&x).is_none() {
            let t = cx.fresh(VarFlags::NONE);
            cx.env.push((x, Scheme::mono(t)));
        }
    }
    let t = cx.synth(e, None)?;
    cx.at(&e.span, |cx| cx.default_pending(None))?;
    Ok(cx.zonk(&t))
}

/// Types a desugared program, reporting the scheme of each top-level
/// definition, the main expression's type and the inferred input types.
pub fn typecheck(d: &Desugared) -> Result<TypedProgram, TypeError> {
    let mut cx = Infer::new();
    base_env(&mut cx);
    let mut inputs = Vec::new();
    for x in &d.inputs {
        let t = cx.fresh(VarFlags::NONE);
        cx.env.push((x.clone(), Scheme::mono(t.clone())));
        inputs.push((x.clone(), t));
    }

    let mut defs = Vec::new();
    let mut e = &d.expr;
    let mut pending_defs = d.defs.iter().map(|(n, _)| n.clone()).peekable();
    while let ExprKind::Val(x, bound, body) = &e.kind {
        if pending_defs.peek() != Some(x) {
            break;
        }
        pending_defs.next();
        let t1 = cx.synth(bound, None)?;
        let scheme = cx.at(&bound.span, |cx| cx.generalize(&t1))?;
        defs.push((x.clone(), scheme.clone()));
        cx.env.push((x.clone(), scheme));
        e = body;
    }
    let main = cx.synth(e, None)?;
    cx.at(&e.span, |cx| cx.default_pending(None))?;

    let defs = defs
        .into_iter()
        .map(|(n, s)| {
            let ty = cx.zonk(&s.ty);
            (n, Scheme { vars: s.vars, ty })
        })
        .collect();
    Ok(TypedProgram {
        defs,
        main: cx.zonk(&main),
        inputs: inputs.into_iter().map(|(n, t)| (n, cx.zonk(&t))).collect(),
        lifts: cx.lifts.clone(),
    })
}

/// Directional unification of `expected` against `actual`, allowing a local
/// type to be promoted where a field is expected.
pub fn unify(expected: &Type, actual: &Type) -> Result<Unifier, TypeError> {
    let span = Span::synthetic();
    let mut cx = Infer::new();
    let mut vars = Vec::new();
    expected.free_vars(&mut vars);
    actual.free_vars(&mut vars);
    cx.reserve(vars.iter().map(|v| v.0 + 1).max().unwrap_or(0));
    cx.at(&span, |cx| {
        well_formed(cx, expected)?;
        well_formed(cx, actual)?;
        cx.subsume(expected, actual)?;
        cx.default_pending(None)
    })?;
    let subst = vars.iter().map(|v| (*v, cx.zonk(&Type::Var(*v)))).filter(|(v, t)| *t != Type::Var(*v)).collect();
    Ok(Unifier { subst, lifts: cx.lifts })
}

fn well_formed(cx: &mut Infer, t: &Type) -> Result<(), UErr> {
    match t {
        Type::Var(_) => Ok(()),
        Type::Data(_, args) => args.iter().try_for_each(|a| well_formed(cx, a)),
        Type::Field(e) => {
            if e.is_field() {
                return Err(UErr::NestedField(t.clone()));
            }
            cx.constrain(e, VarFlags::LOCAL)?;
            well_formed(cx, e)
        }
        Type::Arrow(ps, r) => {
            ps.iter().try_for_each(|p| well_formed(cx, p))?;
            well_formed(cx, r)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{desugar, parse, DesugarMode};

    fn program(src: &str) -> Result<TypedProgram, TypeError> {
        let d = desugar(&parse("t", src).unwrap(), DesugarMode::Harness).unwrap();
        typecheck(&d)
    }

    fn main_type(src: &str) -> String {
        program(src).unwrap().main.to_string()
    }

    fn def_type(src: &str, name: &str) -> String {
        let p = program(src).unwrap();
        p.defs.iter().find(|(n, _)| &**n == name).unwrap().1.ty.to_string()
    }

    #[test]
    fn literals_and_arithmetic() {
        assert_eq!(main_type("1 + 2"), "num");
        assert_eq!(main_type("Pair(1, True)"), "PAIR[num, bool]");
        assert_eq!(main_type("1 <= 2 and True"), "bool");
        assert_eq!(main_type("if (True) { 1 } else { 2 }"), "num");
    }

    #[test]
    fn let_polymorphism() {
        assert_eq!(main_type("val id = fun id(x) { x }; pair(id(1), id(True))"), "PAIR[num, bool]");
        assert_eq!(def_type("def id(x) { x }", "id"), "(A) -> A");
    }

    #[test]
    fn promotion_and_lifting() {
        assert_eq!(main_type("senseDist + 1"), "field[num]");
        assert_eq!(main_type("nfold(min, senseDist, Infinity)"), "num");
        assert_eq!(main_type("self(senseDist) + 1"), "num");
        assert_eq!(main_type("mux(True, 1, senseDist)"), "field[num]");
        assert_eq!(main_type("nfold(+, 1, 1)"), "num");
        assert_eq!(def_type("def f(n) { nfold(min, n + senseDist, Infinity) }", "f"), "(field[num]) -> num");
    }

    #[test]
    fn exchange_typing() {
        assert_eq!(main_type("exchange(0, (o, n) => retsend n + 1)"), "field[num]");
        assert_eq!(main_type("exchange(0, (o, n) => retsend self(o) + 1)"), "num");
        assert_eq!(main_type("exchange(0, (o, n) => return self(n) send o)"), "num");
    }

    #[test]
    fn errors() {
        let e = program("1 + True").unwrap_err();
        assert!(matches!(e.kind, TypeErrorKind::Mismatch { .. }), "{e}");
        let e = program("1 == (fun f(x) { x })").unwrap_err();
        assert!(matches!(e.kind, TypeErrorKind::NotComparable(_)), "{e}");
        let e = program("val f = (x) => x; f(1, 2)").unwrap_err();
        assert!(matches!(e.kind, TypeErrorKind::Arity { expected: 1, found: 2 }), "{e}");
        let e = program("1(2)").unwrap_err();
        assert!(matches!(e.kind, TypeErrorKind::NotAFunction(_)), "{e}");
        let e = program("fun f(x) { x(x) }").unwrap_err();
        assert!(matches!(e.kind, TypeErrorKind::Occurs { .. }), "{e}");
        let e = program("senseDist == fun g() { 1 }").unwrap_err();
        assert!(matches!(e.kind, TypeErrorKind::NotComparable(_)), "{e}");
    }

    #[test]
    fn comparisons_on_fields_are_pointwise() {
        assert_eq!(main_type("senseDist == 1"), "field[bool]");
        assert_eq!(main_type("senseDist < 1"), "field[bool]");
    }

    #[test]
    fn directional_unifier() {
        let a = Type::Var(TyVar(0));
        let u = unify(&a, &Type::num()).unwrap();
        assert_eq!(u.subst[&TyVar(0)], Type::num());
        assert!(u.lifts.is_empty());
        let u = unify(&Type::field(Type::num()), &Type::num()).unwrap();
        assert_eq!(u.lifts.len(), 1);
        let nested = Type::field(Type::field(Type::Var(TyVar(1))));
        let e = unify(&Type::field(a), &nested).unwrap_err();
        assert!(matches!(e.kind, TypeErrorKind::NestedField(_)), "{e}");
        assert!(unify(&Type::num(), &Type::field(Type::num())).is_err());
    }

    #[test]
    fn inputs_are_monomorphic() {
        let p = program("mux(src, 0, 1)").unwrap();
        assert_eq!(p.inputs[0].1, Type::bool());
        assert!(program("mux(src, src, 1)").is_err());
    }
}
