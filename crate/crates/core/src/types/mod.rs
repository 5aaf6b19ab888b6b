//! Types, schemes and Hindley-Milner inference with field types.

mod infer;

use std::collections::HashMap;
use std::fmt;

pub use infer::{typecheck, typecheck_expr, unify, LiftMark, TypeError, TypeErrorKind, TypedProgram, Unifier};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TyVar(pub u32);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TypeCon {
    Num,
    Bool,
    Pair,
    List,
}

impl TypeCon {
    pub fn name(self) -> &'static str {
        match self {
            TypeCon::Num => "num",
            TypeCon::Bool => "bool",
            TypeCon::Pair => "PAIR",
            TypeCon::List => "LIST",
        }
    }

    pub fn arity(self) -> usize {
        match self {
            TypeCon::Num | TypeCon::Bool => 0,
            TypeCon::List => 1,
            TypeCon::Pair => 2,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Type {
    Var(TyVar),
    Data(TypeCon, Vec<Type>),
    Field(Box<Type>),
    Arrow(Vec<Type>, Box<Type>),
}

impl Type {
    pub fn num() -> Type {
        Type::Data(TypeCon::Num, vec![])
    }

    pub fn bool() -> Type {
        Type::Data(TypeCon::Bool, vec![])
    }

    pub fn pair(a: Type, b: Type) -> Type {
        Type::Data(TypeCon::Pair, vec![a, b])
    }

    pub fn field(t: Type) -> Type {
        Type::Field(Box::new(t))
    }

    pub fn arrow(params: Vec<Type>, ret: Type) -> Type {
        Type::Arrow(params, Box::new(ret))
    }

    pub fn is_field(&self) -> bool {
        matches!(self, Type::Field(_))
    }

    pub fn free_vars(&self, out: &mut Vec<TyVar>) {
        match self {
            Type::Var(v) => {
                if !out.contains(v) {
                    out.push(*v)
                }
            }
            Type::Data(_, args) => args.iter().for_each(|a| a.free_vars(out)),
            Type::Field(t) => t.free_vars(out),
            Type::Arrow(ps, r) => {
                ps.iter().for_each(|p| p.free_vars(out));
                r.free_vars(out);
            }
        }
    }

    /// The type with every field constructor removed.
    pub fn erase_fields(&self) -> Type {
        match self {
            Type::Var(v) => Type::Var(*v),
            Type::Data(c, args) => Type::Data(*c, args.iter().map(Type::erase_fields).collect()),
            Type::Field(t) => t.erase_fields(),
            Type::Arrow(ps, r) => Type::arrow(ps.iter().map(Type::erase_fields).collect(), r.erase_fields()),
        }
    }

    pub fn substitute(&self, map: &HashMap<TyVar, Type>) -> Type {
        match self {
            Type::Var(v) => map.get(v).cloned().unwrap_or(Type::Var(*v)),
            Type::Data(c, args) => Type::Data(*c, args.iter().map(|a| a.substitute(map)).collect()),
            Type::Field(t) => Type::field(t.substitute(map)),
            Type::Arrow(ps, r) => Type::arrow(ps.iter().map(|p| p.substitute(map)).collect(), r.substitute(map)),
        }
    }

    fn write(&self, names: &mut Vec<TyVar>, out: &mut String) {
        match self {
            Type::Var(v) => {
                let i = match names.iter().position(|n| n == v) {
                    Some(i) => i,
                    None => {
                        names.push(*v);
                        names.len() - 1
                    }
                };
                out.push_str(&var_name(i));
            }
            Type::Data(c, args) => {
                out.push_str(c.name());
                if !args.is_empty() {
                    out.push('[');
                    for (i, a) in args.iter().enumerate() {
                        if i > 0 {
                            out.push_str(", ");
                        }
                        a.write(names, out);
                    }
                    out.push(']');
                }
            }
            Type::Field(t) => {
                out.push_str("field[");
                t.write(names, out);
                out.push(']');
            }
            Type::Arrow(ps, r) => {
                out.push('(');
                for (i, p) in ps.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    p.write(names, out);
                }
                out.push_str(") -> ");
                r.write(names, out);
            }
        }
    }
}

fn var_name(i: usize) -> String {
    const LETTERS: &[u8] = b"ABCDEFGHIJKLMNOPQRSTUVWXYZ";
    let letter = LETTERS[i % LETTERS.len()] as char;
    match i / LETTERS.len() {
        0 => letter.to_string(),
        n => format!("{letter}{n}"),
    }
}

/// Type variables are named `A`, `B`, … in order of first appearance.
impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut out = String::new();
        self.write(&mut Vec::new(), &mut out);
        f.write_str(&out)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct VarFlags {
    /// May not contain functions or fields.
    pub comparable: bool,
    /// May not be a field.
    pub local: bool,
}

impl VarFlags {
    pub const NONE: VarFlags = VarFlags { comparable: false, local: false };
    pub const LOCAL: VarFlags = VarFlags { comparable: false, local: true };
    pub const COMPARABLE: VarFlags = VarFlags { comparable: true, local: true };

    pub fn merge(self, other: VarFlags) -> VarFlags {
        VarFlags { comparable: self.comparable || other.comparable, local: self.local || other.local }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Scheme {
    pub vars: Vec<(TyVar, VarFlags)>,
    pub ty: Type,
}

impl Scheme {
    pub fn mono(ty: Type) -> Scheme {
        Scheme { vars: Vec::new(), ty }
    }

    /// Quantifies every variable of `ty` with the given flags.
    pub fn poly(ty: Type, flags: &[(TyVar, VarFlags)]) -> Scheme {
        let mut fv = Vec::new();
        ty.free_vars(&mut fv);
        let vars = fv
            .into_iter()
            .map(|v| (v, flags.iter().find(|(w, _)| *w == v).map(|p| p.1).unwrap_or_default()))
            .collect();
        Scheme { vars, ty }
    }

    /// The pointwise version of a builtin scheme: every parameter and the
    /// result become fields of local types.
    pub fn lifted(&self) -> Option<Scheme> {
        match &self.ty {
            Type::Arrow(ps, r) => Some(Scheme {
                vars: self.vars.iter().map(|(v, f)| (*v, f.merge(VarFlags::LOCAL))).collect(),
                ty: Type::arrow(ps.iter().map(|p| Type::field(p.clone())).collect(), Type::field((**r).clone())),
            }),
            _ => None,
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut names: Vec<TyVar> = Vec::new();
        let mut body = String::new();
        self.ty.write(&mut names, &mut body);
        let quantified: Vec<String> = names
            .iter()
            .enumerate()
            .filter(|(_, v)| self.vars.iter().any(|(w, _)| w == *v))
            .map(|(i, v)| {
                let flags = self.vars.iter().find(|(w, _)| w == v).map(|p| p.1).unwrap_or_default();
                if flags.comparable {
                    format!("{}: comparable", var_name(i))
                } else {
                    var_name(i)
                }
            })
            .collect();
        if quantified.is_empty() {
            f.write_str(&body)
        } else {
            write!(f, "forall {}. {body}", quantified.join(", "))
        }
    }
}
