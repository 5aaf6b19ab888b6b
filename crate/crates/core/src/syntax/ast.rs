use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use super::Span;
use crate::value::Literal;

pub type Name = Arc<str>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub u32);

/// Alignment name of a function expression.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Tau(pub u32);

impl fmt::Display for Tau {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "τ{}", self.0)
    }
}

impl Tau {
    pub fn parse(text: &str) -> Option<Tau> {
        text.strip_prefix('τ')?.parse().ok().map(Tau)
    }
}

#[derive(Clone, Debug)]
pub struct Expr {
    pub id: NodeId,
    pub span: Span,
    pub kind: ExprKind,
}

#[derive(Clone, Debug)]
pub enum ExprKind {
    Var(Name),
    Fun(Arc<FunDef>),
    App(Box<Expr>, Vec<Expr>),
    Val(Name, Box<Expr>, Box<Expr>),
    Lit(Literal),
}

#[derive(Debug)]
pub struct FunDef {
    pub tau: Tau,
    pub name: Name,
    pub params: Vec<Name>,
    pub body: Expr,
}

impl Expr {
    pub fn new(span: Span, kind: ExprKind) -> Self {
        Expr { id: NodeId(0), span, kind }
    }

    /// Calls `visit` on every node in pre-order.
    pub fn walk<'a>(&'a self, visit: &mut impl FnMut(&'a Expr)) {
        visit(self);
        match &self.kind {
            ExprKind::Var(_) | ExprKind::Lit(_) => {}
            ExprKind::Fun(def) => def.body.walk(visit),
            ExprKind::App(callee, args) => {
                callee.walk(visit);
                for a in args {
                    a.walk(visit);
                }
            }
            ExprKind::Val(_, bound, body) => {
                bound.walk(visit);
                body.walk(visit);
            }
        }
    }

    /// All alignment names in pre-order.
    pub fn taus(&self) -> Vec<Tau> {
        let mut out = Vec::new();
        self.walk(&mut |e| {
            if let ExprKind::Fun(def) = &e.kind {
                out.push(def.tau);
            }
        });
        out
    }

    pub fn node_count(&self) -> usize {
        let mut n = 0;
        self.walk(&mut |_| n += 1);
        n
    }
}

/// Renumbers node ids and alignment names sequentially in pre-order.
pub fn annotate_names(e: &Expr) -> Expr {
    fn go(e: &Expr, next_id: &mut u32, next_tau: &mut u32) -> Expr {
        let id = NodeId(*next_id);
        *next_id += 1;
        let kind = match &e.kind {
            ExprKind::Var(x) => ExprKind::Var(x.clone()),
            ExprKind::Lit(l) => ExprKind::Lit(l.clone()),
            ExprKind::Fun(def) => {
                let tau = Tau(*next_tau);
                *next_tau += 1;
                ExprKind::Fun(Arc::new(FunDef {
                    tau,
                    name: def.name.clone(),
                    params: def.params.clone(),
                    body: go(&def.body, next_id, next_tau),
                }))
            }
            ExprKind::App(callee, args) => {
                let callee = go(callee, next_id, next_tau);
                let args = args.iter().map(|a| go(a, next_id, next_tau)).collect();
                ExprKind::App(Box::new(callee), args)
            }
            ExprKind::Val(x, bound, body) => {
                let bound = go(bound, next_id, next_tau);
                let body = go(body, next_id, next_tau);
                ExprKind::Val(x.clone(), Box::new(bound), Box::new(body))
            }
        };
        Expr { id, span: e.span.clone(), kind }
    }
    go(e, &mut 0, &mut 0)
}

/// Free variables of a core expression.
pub fn free_vars(e: &Expr) -> BTreeSet<Name> {
    match &e.kind {
        ExprKind::Var(x) => BTreeSet::from([x.clone()]),
        ExprKind::Lit(_) => BTreeSet::new(),
        ExprKind::Fun(def) => {
            let mut fv = free_vars(&def.body);
            fv.remove(&def.name);
            for p in &def.params {
                fv.remove(p);
            }
            fv
        }
        ExprKind::App(callee, args) => {
            let mut fv = free_vars(callee);
            for a in args {
                fv.extend(free_vars(a));
            }
            fv
        }
        ExprKind::Val(x, bound, body) => {
            let mut rest = free_vars(body);
            rest.remove(x);
            let mut fv = free_vars(bound);
            fv.extend(rest);
            fv
        }
    }
}

/// Structural equality up to consistent renaming of bound variables, ignoring
/// alignment names, node ids and spans.
pub fn alpha_eq(a: &Expr, b: &Expr) -> bool {
    fn lit_eq(a: &Literal, b: &Literal) -> bool {
        match (a, b) {
            (Literal::Num(x), Literal::Num(y)) => x.to_bits() == y.to_bits() || x == y,
            _ => a == b,
        }
    }

    fn go(a: &Expr, b: &Expr, left: &mut Vec<(Name, usize)>, right: &mut Vec<(Name, usize)>, depth: &mut usize) -> bool {
        match (&a.kind, &b.kind) {
            (ExprKind::Var(x), ExprKind::Var(y)) => {
                let bx = left.iter().rev().find(|(n, _)| n == x).map(|p| p.1);
                let by = right.iter().rev().find(|(n, _)| n == y).map(|p| p.1);
                match (bx, by) {
                    (Some(i), Some(j)) => i == j,
                    (None, None) => x == y,
                    _ => false,
                }
            }
            (ExprKind::Lit(x), ExprKind::Lit(y)) => lit_eq(x, y),
            (ExprKind::Fun(f), ExprKind::Fun(g)) => {
                if f.params.len() != g.params.len() {
                    return false;
                }
                let (ml, mr) = (left.len(), right.len());
                *depth += 1;
                left.push((f.name.clone(), *depth));
                right.push((g.name.clone(), *depth));
                for (p, q) in f.params.iter().zip(&g.params) {
                    *depth += 1;
                    left.push((p.clone(), *depth));
                    right.push((q.clone(), *depth));
                }
                let ok = go(&f.body, &g.body, left, right, depth);
                left.truncate(ml);
                right.truncate(mr);
                ok
            }
            (ExprKind::App(c1, a1), ExprKind::App(c2, a2)) => {
                a1.len() == a2.len()
                    && go(c1, c2, left, right, depth)
                    && a1.iter().zip(a2).all(|(x, y)| go(x, y, left, right, depth))
            }
            (ExprKind::Val(x, b1, e1), ExprKind::Val(y, b2, e2)) => {
                if !go(b1, b2, left, right, depth) {
                    return false;
                }
                *depth += 1;
                left.push((x.clone(), *depth));
                right.push((y.clone(), *depth));
                let ok = go(e1, e2, left, right, depth);
                left.pop();
                right.pop();
                ok
            }
            _ => false,
        }
    }
    go(a, b, &mut Vec::new(), &mut Vec::new(), &mut 0)
}

/// Index from alignment name to function definition.
pub(crate) fn fun_index(e: &Expr) -> HashMap<Tau, Arc<FunDef>> {
    let mut out = HashMap::new();
    e.walk(&mut |n| {
        if let ExprKind::Fun(def) = &n.kind {
            out.insert(def.tau, def.clone());
        }
    });
    out
}
