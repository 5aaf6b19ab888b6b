//! Builtin functions, their type schemes and literal-level semantics, plus the
//! bundled program corpus.

mod corpus;

use std::cmp::Ordering;

use crate::types::{Scheme, TyVar, Type, VarFlags};
use crate::value::Literal;

pub use corpus::{corpus, corpus_program, CorpusProgram, PRELUDE};

/// Name of the neighbour-distance sensor, which is a field rather than a
/// nullary function.
pub const SENSE_DIST: &str = "senseDist";

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Builtin {
    Mux,
    Add,
    Sub,
    Mul,
    Div,
    And,
    Or,
    Eq,
    Le,
    Ge,
    Min,
    Max,
    /// The `pair` function.
    Pair,
    Fst,
    Snd,
    /// The `Pair` data constructor used as a function.
    PairCtor,
    Exchange,
    Nfold,
    SelfB,
    UpdateSelf,
    UpdateDef,
    Uid,
    Gps,
    Time,
    Temperature,
}

impl Builtin {
    pub const ALL: [Builtin; 25] = [
        Builtin::Mux,
        Builtin::Add,
        Builtin::Sub,
        Builtin::Mul,
        Builtin::Div,
        Builtin::And,
        Builtin::Or,
        Builtin::Eq,
        Builtin::Le,
        Builtin::Ge,
        Builtin::Min,
        Builtin::Max,
        Builtin::Pair,
        Builtin::Fst,
        Builtin::Snd,
        Builtin::PairCtor,
        Builtin::Exchange,
        Builtin::Nfold,
        Builtin::SelfB,
        Builtin::UpdateSelf,
        Builtin::UpdateDef,
        Builtin::Uid,
        Builtin::Gps,
        Builtin::Time,
        Builtin::Temperature,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Builtin::Mux => "mux",
            Builtin::Add => "+",
            Builtin::Sub => "-",
            Builtin::Mul => "*",
            Builtin::Div => "/",
            Builtin::And => "and",
            Builtin::Or => "or",
            Builtin::Eq => "==",
            Builtin::Le => "<=",
            Builtin::Ge => ">=",
            Builtin::Min => "min",
            Builtin::Max => "max",
            Builtin::Pair => "pair",
            Builtin::Fst => "fst",
            Builtin::Snd => "snd",
            Builtin::PairCtor => "Pair",
            Builtin::Exchange => "exchange",
            Builtin::Nfold => "nfold",
            Builtin::SelfB => "self",
            Builtin::UpdateSelf => "updateSelf",
            Builtin::UpdateDef => "updateDef",
            Builtin::Uid => "uid",
            Builtin::Gps => "gps",
            Builtin::Time => "time",
            Builtin::Temperature => "temperature",
        }
    }

    pub fn from_name(name: &str) -> Option<Builtin> {
        Builtin::ALL.iter().copied().find(|b| b.name() == name)
    }

    pub fn arity(self) -> usize {
        match self {
            Builtin::Uid | Builtin::Gps | Builtin::Time | Builtin::Temperature => 0,
            Builtin::Fst | Builtin::Snd | Builtin::SelfB => 1,
            Builtin::Mux | Builtin::Nfold => 3,
            _ => 2,
        }
    }

    /// Sensors are nullary builtins whose value comes from the device.
    pub fn is_sensor(self) -> bool {
        matches!(self, Builtin::Uid | Builtin::Gps | Builtin::Time | Builtin::Temperature)
    }

    pub fn is_comparison(self) -> bool {
        matches!(self, Builtin::Eq | Builtin::Le | Builtin::Ge)
    }

    /// Pure builtins also apply pointwise to neighbouring values.
    pub fn is_liftable(self) -> bool {
        !self.is_theta_dependent()
    }

    /// Builtins whose result depends on the device, its sensors or its
    /// aligned neighbours rather than on the argument values alone.
    pub fn is_theta_dependent(self) -> bool {
        matches!(
            self,
            Builtin::Exchange
                | Builtin::Nfold
                | Builtin::SelfB
                | Builtin::UpdateSelf
                | Builtin::UpdateDef
                | Builtin::Uid
                | Builtin::Gps
                | Builtin::Time
                | Builtin::Temperature
        )
    }

    pub fn scheme(self) -> Scheme {
        let a = Type::Var(TyVar(0));
        let b = Type::Var(TyVar(1));
        let num = Type::num;
        let bool = Type::bool;
        let field = Type::field;
        let arrow = Type::arrow;
        let local = |v: u32| (TyVar(v), VarFlags::LOCAL);
        match self {
            Builtin::Mux => Scheme::poly(arrow(vec![bool(), a.clone(), a.clone()], a), &[]),
            Builtin::Add | Builtin::Sub | Builtin::Mul | Builtin::Div | Builtin::Min | Builtin::Max => {
                Scheme::mono(arrow(vec![num(), num()], num()))
            }
            Builtin::And | Builtin::Or => Scheme::mono(arrow(vec![bool(), bool()], bool())),
            Builtin::Eq | Builtin::Le | Builtin::Ge => {
                Scheme::poly(arrow(vec![a.clone(), a], bool()), &[(TyVar(0), VarFlags::COMPARABLE)])
            }
            Builtin::Pair | Builtin::PairCtor => {
                Scheme::poly(arrow(vec![a.clone(), b.clone()], Type::pair(a, b)), &[])
            }
            Builtin::Fst => Scheme::poly(arrow(vec![Type::pair(a.clone(), b)], a), &[]),
            Builtin::Snd => Scheme::poly(arrow(vec![Type::pair(a, b.clone())], b), &[]),
            Builtin::Exchange => {
                let handler = arrow(vec![field(a.clone()), field(a.clone())], Type::pair(b.clone(), field(a.clone())));
                Scheme::poly(arrow(vec![a, handler], b), &[local(0)])
            }
            Builtin::Nfold => Scheme::poly(
                arrow(vec![arrow(vec![a.clone(), b.clone()], a.clone()), field(b), a.clone()], a),
                &[local(0), local(1)],
            ),
            Builtin::SelfB => Scheme::poly(arrow(vec![field(a.clone())], a), &[local(0)]),
            Builtin::UpdateSelf | Builtin::UpdateDef => {
                Scheme::poly(arrow(vec![field(a.clone()), a.clone()], field(a)), &[local(0)])
            }
            Builtin::Uid | Builtin::Time | Builtin::Temperature => Scheme::mono(arrow(vec![], num())),
            Builtin::Gps => Scheme::mono(arrow(vec![], Type::pair(num(), num()))),
        }
    }

    /// The pointwise scheme, for builtins that have one.
    pub fn lifted_scheme(self) -> Option<Scheme> {
        if self.is_liftable() {
            self.scheme().lifted()
        } else {
            None
        }
    }

    /// Applies a pure builtin to literal arguments.
    pub fn apply_literal(self, args: &[&Literal]) -> Result<Literal, String> {
        if args.len() != self.arity() {
            return Err(format!("`{}` takes {} argument(s), got {}", self.name(), self.arity(), args.len()));
        }
        let num = |i: usize| args[i].as_num().ok_or_else(|| format!("`{}` expects a number, got {}", self.name(), args[i]));
        let boolean =
            |i: usize| args[i].as_bool().ok_or_else(|| format!("`{}` expects a boolean, got {}", self.name(), args[i]));
        Ok(match self {
            Builtin::Mux => {
                if boolean(0)? {
                    args[1].clone()
                } else {
                    args[2].clone()
                }
            }
            Builtin::Add => Literal::Num(num(0)? + num(1)?),
            Builtin::Sub => Literal::Num(num(0)? - num(1)?),
            Builtin::Mul => Literal::Num(num(0)? * num(1)?),
            Builtin::Div => Literal::Num(num(0)? / num(1)?),
            Builtin::Min => Literal::Num(num(0)?.min(num(1)?)),
            Builtin::Max => Literal::Num(num(0)?.max(num(1)?)),
            Builtin::And => Literal::Bool(boolean(0)? && boolean(1)?),
            Builtin::Or => Literal::Bool(boolean(0)? || boolean(1)?),
            Builtin::Eq => Literal::Bool(data_eq(args[0], args[1])?),
            Builtin::Le => Literal::Bool(matches!(data_cmp(args[0], args[1])?, Some(Ordering::Less | Ordering::Equal))),
            Builtin::Ge => {
                Literal::Bool(matches!(data_cmp(args[0], args[1])?, Some(Ordering::Greater | Ordering::Equal)))
            }
            Builtin::Pair | Builtin::PairCtor => Literal::pair(args[0].clone(), args[1].clone()),
            Builtin::Fst | Builtin::Snd => {
                let (x, y) = args[0].as_pair().ok_or_else(|| format!("`{}` expects a pair, got {}", self.name(), args[0]))?;
                if self == Builtin::Fst {
                    x.clone()
                } else {
                    y.clone()
                }
            }
            _ => return Err(format!("`{}` depends on the device and has no literal semantics", self.name())),
        })
    }
}

fn data_eq(a: &Literal, b: &Literal) -> Result<bool, String> {
    match (a, b) {
        (Literal::Builtin(_) | Literal::Fun(_), _) | (_, Literal::Builtin(_) | Literal::Fun(_)) => {
            Err("functions cannot be compared".into())
        }
        (Literal::Data(c, xs), Literal::Data(d, ys)) => {
            if c != d || xs.len() != ys.len() {
                return Ok(false);
            }
            for (x, y) in xs.iter().zip(ys.iter()) {
                if !data_eq(x, y)? {
                    return Ok(false);
                }
            }
            Ok(true)
        }
        _ => Ok(a == b),
    }
}

/// Ordering on comparable literals: numbers numerically, `False < True`, and
/// data lexicographically. `None` when NaN is involved.
fn data_cmp(a: &Literal, b: &Literal) -> Result<Option<Ordering>, String> {
    match (a, b) {
        (Literal::Num(x), Literal::Num(y)) => Ok(x.partial_cmp(y)),
        (Literal::Bool(x), Literal::Bool(y)) => Ok(Some(x.cmp(y))),
        (Literal::Data(c, xs), Literal::Data(d, ys)) if c == d && xs.len() == ys.len() => {
            for (x, y) in xs.iter().zip(ys.iter()) {
                match data_cmp(x, y)? {
                    Some(Ordering::Equal) => continue,
                    other => return Ok(other),
                }
            }
            Ok(Some(Ordering::Equal))
        }
        _ => Err(format!("cannot order {a} and {b}")),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EntryKind {
    Function,
    Constructor,
    Sensor,
}

/// One row of the initial typing environment.
#[derive(Clone, Debug)]
pub struct BuiltinEntry {
    pub name: &'static str,
    pub kind: EntryKind,
    pub builtin: Option<Builtin>,
    pub scheme: Scheme,
    pub liftable: bool,
    pub theta_dependent: bool,
}

/// Every builtin function, constructor and sensor with its scheme.
pub fn registry() -> Vec<BuiltinEntry> {
    let mut out: Vec<BuiltinEntry> = Builtin::ALL
        .iter()
        .map(|&b| BuiltinEntry {
            name: b.name(),
            kind: if b.is_sensor() {
                EntryKind::Sensor
            } else if b == Builtin::PairCtor {
                EntryKind::Constructor
            } else {
                EntryKind::Function
            },
            builtin: Some(b),
            scheme: b.scheme(),
            liftable: b.is_liftable(),
            theta_dependent: b.is_theta_dependent(),
        })
        .collect();
    let constant = |name, ty| BuiltinEntry {
        name,
        kind: EntryKind::Constructor,
        builtin: None,
        scheme: Scheme::mono(ty),
        liftable: false,
        theta_dependent: false,
    };
    out.push(constant("True", Type::bool()));
    out.push(constant("False", Type::bool()));
    out.push(constant("Infinity", Type::num()));
    out.push(BuiltinEntry {
        name: SENSE_DIST,
        kind: EntryKind::Sensor,
        builtin: None,
        scheme: Scheme::mono(Type::field(Type::num())),
        liftable: false,
        theta_dependent: true,
    });
    out
}

pub fn lookup(name: &str) -> Option<BuiltinEntry> {
    registry().into_iter().find(|e| e.name == name)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn n(x: f64) -> Literal {
        Literal::Num(x)
    }

    fn call(b: Builtin, args: &[Literal]) -> Literal {
        b.apply_literal(&args.iter().collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn names_round_trip() {
        for b in Builtin::ALL {
            assert_eq!(Builtin::from_name(b.name()), Some(b));
        }
        assert_eq!(Builtin::from_name("<"), None);
    }

    #[test]
    fn schemes() {
        assert_eq!(lookup("mux").unwrap().scheme.to_string(), "forall A. (bool, A, A) -> A");
        assert_eq!(lookup("pair").unwrap().scheme.to_string(), "forall A, B. (A, B) -> PAIR[A, B]");
        assert_eq!(lookup("senseDist").unwrap().scheme.to_string(), "field[num]");
        assert_eq!(
            Builtin::Exchange.scheme().to_string(),
            "forall A, B. (A, (field[A], field[A]) -> PAIR[B, field[A]]) -> B"
        );
        assert_eq!(Builtin::Nfold.scheme().to_string(), "forall A, B. ((A, B) -> A, field[B], A) -> A");
        assert_eq!(Builtin::Eq.scheme().to_string(), "forall A: comparable. (A, A) -> bool");
        assert_eq!(Builtin::Gps.scheme().to_string(), "() -> PAIR[num, num]");
        assert!(Builtin::Add.lifted_scheme().is_some());
        assert!(Builtin::Nfold.lifted_scheme().is_none());
    }

    #[test]
    fn literal_semantics() {
        assert_eq!(call(Builtin::Fst, &[Literal::pair(n(1.0), n(2.0))]), n(1.0));
        assert_eq!(call(Builtin::Mux, &[Literal::Bool(true), n(1.0), n(2.0)]), n(1.0));
        assert_eq!(call(Builtin::Mux, &[Literal::Bool(false), n(1.0), n(2.0)]), n(2.0));
        assert_eq!(call(Builtin::And, &[Literal::Bool(true), Literal::Bool(false)]), Literal::Bool(false));
        assert_eq!(call(Builtin::Div, &[n(1.0), n(0.0)]), n(f64::INFINITY));
        assert_eq!(call(Builtin::Eq, &[n(f64::NAN), n(f64::NAN)]), Literal::Bool(false));
        let p = |a, b| Literal::pair(n(a), n(b));
        assert_eq!(call(Builtin::Le, &[p(1.0, 5.0), p(2.0, 0.0)]), Literal::Bool(true));
        assert_eq!(call(Builtin::Ge, &[Literal::Bool(false), Literal::Bool(true)]), Literal::Bool(false));
        assert!(Builtin::Eq.apply_literal(&[&Literal::Builtin(Builtin::Add), &n(1.0)]).is_err());
    }
}
