use std::collections::{HashMap, HashSet};
use std::fmt::Write;

use super::ast::{free_vars, Expr, ExprKind, Name};
use crate::stdlib::Builtin;
use crate::value::Literal;

/// Renders a core expression as surface text that parses and desugars back to
/// an alpha-equivalent expression. Fresh compiler names are replaced by
/// surface names that do not occur in the program.
pub fn pretty_print(e: &Expr) -> String {
    let mut used = HashSet::new();
    let mut fresh = Vec::new();
    e.walk(&mut |n| match &n.kind {
        ExprKind::Var(x) => {
            used.insert(x.to_string());
        }
        ExprKind::Val(x, _, _) => {
            used.insert(x.to_string());
        }
        ExprKind::Fun(def) => {
            for x in std::iter::once(&def.name).chain(&def.params) {
                if x.starts_with('%') {
                    fresh.push(x.clone());
                } else {
                    used.insert(x.to_string());
                }
            }
        }
        ExprKind::Lit(_) | ExprKind::App(..) => {}
    });

    let mut rename = HashMap::new();
    let mut counter = 0;
    for x in fresh {
        if rename.contains_key(&x) {
            continue;
        }
        let name = loop {
            let candidate = format!("_v{counter}");
            counter += 1;
            if !used.contains(&candidate) {
                break candidate;
            }
        };
        rename.insert(x, name);
    }

    let mut out = String::new();
    Printer { rename }.body(e, &mut out);
    out
}

struct Printer {
    rename: HashMap<Name, String>,
}

fn binary_symbol(b: Builtin) -> Option<&'static str> {
    Some(match b {
        Builtin::Add => "+",
        Builtin::Sub => "-",
        Builtin::Mul => "*",
        Builtin::Div => "/",
        Builtin::Eq => "==",
        Builtin::Le => "<=",
        Builtin::Ge => ">=",
        Builtin::And => "and",
        Builtin::Or => "or",
        _ => return None,
    })
}

pub(crate) fn write_num(n: f64, out: &mut String) {
    if n == f64::INFINITY {
        out.push_str("Infinity");
    } else if n == f64::NEG_INFINITY {
        out.push_str("-Infinity");
    } else if n.is_nan() {
        out.push_str("NaN");
    } else if n == 0.0 && n.is_sign_negative() {
        out.push_str("-0");
    } else {
        write!(out, "{n}").unwrap();
    }
}

impl Printer {
    fn name<'a>(&'a self, x: &'a Name) -> &'a str {
        self.rename.get(x).map(|s| s.as_str()).unwrap_or(x)
    }

    /// Positions where a `val` chain needs no parentheses: the whole program,
    /// function bodies and the continuation of another `val`.
    fn body(&self, e: &Expr, out: &mut String) {
        match &e.kind {
            ExprKind::Val(x, bound, rest) => {
                write!(out, "val {} = ", self.name(x)).unwrap();
                self.expr(bound, out);
                out.push_str("; ");
                self.body(rest, out);
            }
            _ => self.expr(e, out),
        }
    }

    /// Operands of calls may be bare operator symbols; elsewhere they need
    /// parentheses to parse as values.
    fn arg(&self, e: &Expr, out: &mut String) {
        match &e.kind {
            ExprKind::Lit(Literal::Builtin(b)) if binary_symbol(*b).is_some() => {
                out.push_str(binary_symbol(*b).unwrap())
            }
            _ => self.expr(e, out),
        }
    }

    fn expr(&self, e: &Expr, out: &mut String) {
        match &e.kind {
            ExprKind::Var(x) => out.push_str(self.name(x)),
            ExprKind::Lit(l) => self.literal(l, out),
            ExprKind::Val(x, bound, body) => {
                write!(out, "(val {} = ", self.name(x)).unwrap();
                self.expr(bound, out);
                out.push_str("; ");
                self.body(body, out);
                out.push(')');
            }
            ExprKind::Fun(def) => {
                let params: Vec<&str> = def.params.iter().map(|p| self.name(p)).collect();
                let anonymous = def.name.starts_with('%') && !free_vars(&def.body).contains(&def.name);
                if anonymous {
                    write!(out, "(({}) => {{ ", params.join(", ")).unwrap();
                } else {
                    write!(out, "fun {}({}) {{ ", self.name(&def.name), params.join(", ")).unwrap();
                }
                self.body(&def.body, out);
                out.push_str(if anonymous { " })" } else { " }" });
            }
            ExprKind::App(callee, args) => {
                if let (ExprKind::Lit(Literal::Builtin(b)), [l, r]) = (&callee.kind, args.as_slice()) {
                    if let Some(sym) = binary_symbol(*b) {
                        out.push('(');
                        self.operand(l, out);
                        write!(out, " {sym} ").unwrap();
                        self.operand(r, out);
                        out.push(')');
                        return;
                    }
                }
                match &callee.kind {
                    ExprKind::Lit(Literal::Num(_)) => {
                        out.push('(');
                        self.expr(callee, out);
                        out.push(')');
                    }
                    _ => self.expr(callee, out),
                }
                out.push('(');
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    self.arg(a, out);
                }
                out.push(')');
            }
        }
    }

    fn operand(&self, e: &Expr, out: &mut String) {
        match &e.kind {
            ExprKind::Lit(Literal::Builtin(b)) if binary_symbol(*b).is_some() => {
                write!(out, "({})", binary_symbol(*b).unwrap()).unwrap()
            }
            _ => self.expr(e, out),
        }
    }

    fn literal(&self, l: &Literal, out: &mut String) {
        match l {
            Literal::Num(n) => write_num(*n, out),
            Literal::Bool(true) => out.push_str("True"),
            Literal::Bool(false) => out.push_str("False"),
            Literal::Builtin(b) => match binary_symbol(*b) {
                Some(sym) => write!(out, "({sym})").unwrap(),
                None => out.push_str(b.name()),
            },
            Literal::Data(ctor, args) => {
                write!(out, "{}(", ctor.name()).unwrap();
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    self.literal(a, out);
                }
                out.push(')');
            }
            Literal::Fun(c) => write!(out, "{}", c.def.tau).unwrap(),
        }
    }
}
