//! Runtime literals, closures and device identifiers.

use std::fmt;
use std::sync::Arc;

use crate::stdlib::Builtin;
use crate::syntax::{FunDef, Name, Tau};

pub use crate::nvalue::NValue;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DeviceId(pub u32);

impl fmt::Display for DeviceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Ctor {
    Pair,
}

impl Ctor {
    pub fn name(self) -> &'static str {
        match self {
            Ctor::Pair => "Pair",
        }
    }
}

#[derive(Clone, Debug)]
pub enum Literal {
    Num(f64),
    Bool(bool),
    Data(Ctor, Arc<[Literal]>),
    Builtin(Builtin),
    Fun(Arc<Closure>),
}

/// What a function value is called for alignment purposes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FunName {
    Builtin(Builtin),
    Tau(Tau),
}

#[derive(Debug)]
pub struct Closure {
    pub def: Arc<FunDef>,
    pub env: Env,
}

impl PartialEq for Literal {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Literal::Num(a), Literal::Num(b)) => a == b,
            (Literal::Bool(a), Literal::Bool(b)) => a == b,
            (Literal::Data(c, xs), Literal::Data(d, ys)) => c == d && xs == ys,
            (Literal::Builtin(a), Literal::Builtin(b)) => a == b,
            (Literal::Fun(f), Literal::Fun(g)) => f.def.tau == g.def.tau,
            _ => false,
        }
    }
}

impl Literal {
    pub fn pair(a: Literal, b: Literal) -> Literal {
        Literal::Data(Ctor::Pair, Arc::from(vec![a, b]))
    }

    pub fn as_num(&self) -> Option<f64> {
        match self {
            Literal::Num(n) => Some(*n),
            _ => None,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Literal::Bool(b) => Some(*b),
            _ => None,
        }
    }

    pub fn as_pair(&self) -> Option<(&Literal, &Literal)> {
        match self {
            Literal::Data(Ctor::Pair, args) if args.len() == 2 => Some((&args[0], &args[1])),
            _ => None,
        }
    }

    pub fn fun_name(&self) -> Option<FunName> {
        match self {
            Literal::Builtin(b) => Some(FunName::Builtin(*b)),
            Literal::Fun(c) => Some(FunName::Tau(c.def.tau)),
            _ => None,
        }
    }

    /// Identical payload, including the bit pattern of numbers. Used where
    /// reproducibility matters more than IEEE equality.
    pub fn same(&self, other: &Literal) -> bool {
        match (self, other) {
            (Literal::Num(a), Literal::Num(b)) => a.to_bits() == b.to_bits(),
            (Literal::Data(c, xs), Literal::Data(d, ys)) => {
                c == d && xs.len() == ys.len() && xs.iter().zip(ys.iter()).all(|(x, y)| x.same(y))
            }
            _ => self == other,
        }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Literal::Num(n) => {
                let mut s = String::new();
                crate::syntax::pretty::write_num(*n, &mut s);
                f.write_str(&s)
            }
            Literal::Bool(true) => f.write_str("True"),
            Literal::Bool(false) => f.write_str("False"),
            Literal::Data(c, args) => {
                write!(f, "{}(", c.name())?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
            Literal::Builtin(b) => f.write_str(b.name()),
            Literal::Fun(c) => write!(f, "{}", c.def.tau),
        }
    }
}

/// Persistent variable environment captured by closures.
#[derive(Clone, Default)]
pub struct Env(Option<Arc<EnvNode>>);

struct EnvNode {
    name: Name,
    value: NValue,
    next: Env,
}

impl Env {
    pub fn bind(&self, name: Name, value: NValue) -> Env {
        Env(Some(Arc::new(EnvNode { name, value, next: self.clone() })))
    }

    pub fn lookup(&self, name: &str) -> Option<&NValue> {
        let mut cur = &self.0;
        while let Some(node) = cur {
            if &*node.name == name {
                return Some(&node.value);
            }
            cur = &node.next.0;
        }
        None
    }
}

impl fmt::Debug for Env {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut names = Vec::new();
        let mut cur = &self.0;
        while let Some(node) = cur {
            names.push(node.name.clone());
            cur = &node.next.0;
        }
        f.debug_list().entries(names).finish()
    }
}
