//! Random well-typed programs, for fuzzing the evaluator.
//!
//! Generation is type-directed: every subexpression is produced for a target
//! type, so the output type-checks by construction. Programs are closed apart
//! from the sensors `gps`, `time`, `temperature` and `senseDist`.

use rand::Rng;

#[derive(Clone, Debug, PartialEq)]
pub enum GenType {
    Num,
    Bool,
    /// Pairs of local values.
    Pair(Box<GenType>, Box<GenType>),
    /// Fields of `num` or `bool`.
    Field(Box<GenType>),
    Fun(Vec<GenType>, Box<GenType>),
}

use GenType::*;

impl GenType {
    fn is_local(&self) -> bool {
        match self {
            Num | Bool => true,
            Pair(a, b) => a.is_local() && b.is_local(),
            Field(_) | Fun(..) => false,
        }
    }

    fn field(t: GenType) -> GenType {
        Field(Box::new(t))
    }
}

pub struct Generator<'r, R: Rng> {
    rng: &'r mut R,
    env: Vec<(String, GenType)>,
    /// Functions whose bodies are being generated. Calls to them recurse,
    /// which mostly just exhausts the budget, so they are rare.
    recursive: Vec<String>,
    fresh: u32,
}

/// A program of at most `depth` nested constructs, ending in a main
/// expression.
pub fn program<R: Rng>(rng: &mut R, depth: u32) -> String {
    let mut g = Generator { rng, env: Vec::new(), recursive: Vec::new(), fresh: 0 };
    g.program(depth)
}

impl<R: Rng> Generator<'_, R> {
    fn name(&mut self, prefix: &str) -> String {
        self.fresh += 1;
        format!("{prefix}{}", self.fresh)
    }

    fn chance(&mut self, p: f64) -> bool {
        self.rng.gen_bool(p)
    }

    fn pick<'a, T>(&mut self, xs: &'a [T]) -> &'a T {
        &xs[self.rng.gen_range(0..xs.len())]
    }

    fn program(&mut self, depth: u32) -> String {
        let mut out = String::new();
        for _ in 0..self.rng.gen_range(0..3) {
            let ps: Vec<GenType> = (0..self.rng.gen_range(0..3)).map(|_| self.value_type(1)).collect();
            let r = self.value_type(1);
            let name = self.name("d");
            let params: Vec<String> = ps.iter().map(|_| self.name("p")).collect();
            // Definitions see their own name, so they may recurse.
            self.env.push((name.clone(), Fun(ps.clone(), Box::new(r.clone()))));
            let defs_mark = self.env.len();
            self.env.extend(params.iter().cloned().zip(ps.iter().cloned()));
            self.recursive.push(name.clone());
            let body = self.expr(&r, depth.saturating_sub(1));
            self.recursive.pop();
            self.env.truncate(defs_mark);
            out.push_str(&format!("def {name}({}) {{\n  {body}\n}}\n", params.join(", ")));
        }
        let t = self.value_type(2);
        out.push_str(&self.expr(&t, depth));
        out.push('\n');
        out
    }

    fn local_type(&mut self, depth: u32) -> GenType {
        match self.rng.gen_range(0..10) {
            0..=5 => Num,
            6..=8 => Bool,
            _ if depth > 0 => Pair(Box::new(self.local_type(depth - 1)), Box::new(self.local_type(depth - 1))),
            _ => Num,
        }
    }

    /// A type for a value in a program: locals, fields or functions.
    fn value_type(&mut self, depth: u32) -> GenType {
        match self.rng.gen_range(0..10) {
            0..=5 => self.local_type(depth),
            6..=8 => GenType::field(if self.chance(0.75) { Num } else { Bool }),
            _ if depth > 0 => {
                let ps = (0..self.rng.gen_range(0..3)).map(|_| self.value_type(0)).collect();
                Fun(ps, Box::new(self.value_type(0)))
            }
            _ => Num,
        }
    }

    fn vars_of(&self, t: &GenType) -> Vec<String> {
        self.env.iter().filter(|(_, u)| u == t).map(|(x, _)| x.clone()).collect()
    }

    fn bind<T>(&mut self, xs: &[(String, GenType)], f: impl FnOnce(&mut Self) -> T) -> T {
        let mark = self.env.len();
        self.env.extend(xs.iter().cloned());
        let r = f(self);
        self.env.truncate(mark);
        r
    }

    pub fn expr(&mut self, t: &GenType, depth: u32) -> String {
        if depth == 0 || self.chance(0.12) {
            return self.leaf(t);
        }
        let d = depth - 1;
        match self.rng.gen_range(0..20) {
            0 | 1 => {
                let u = self.value_type(1);
                let x = self.name("v");
                let bound = self.expr(&u, d);
                let body = self.bind(&[(x.clone(), u)], |g| g.expr(t, d));
                format!("(val {x} = {bound}; {body})")
            }
            2 | 3 => {
                let c = self.expr(&Bool, d);
                let (a, b) = (self.expr(t, d), self.expr(t, d));
                format!("if ({c}) {{ {a} }} else {{ {b} }}")
            }
            4 => {
                let c = self.expr(&Bool, d);
                let (a, b) = (self.expr(t, d), self.expr(t, d));
                format!("mux({c}, {a}, {b})")
            }
            5 | 6 => self.call(t, d),
            7 => {
                // A local definition used in its scope.
                let ps: Vec<GenType> = (0..self.rng.gen_range(1..3)).map(|_| self.value_type(0)).collect();
                let fty = Fun(ps.clone(), Box::new(t.clone()));
                let name = self.name("f");
                let params: Vec<(String, GenType)> = ps.iter().map(|p| (self.name("p"), p.clone())).collect();
                let body = self.bind(&params, |g| g.expr(t, d));
                let names: Vec<&str> = params.iter().map(|(x, _)| x.as_str()).collect();
                let rest = self.bind(&[(name.clone(), fty.clone())], |g| g.call_named(&name, &fty, d));
                format!("(def {name}({}) {{ {body} }} {rest})", names.join(", "))
            }
            8 if t.is_local() => {
                let other = self.local_type(0);
                let (a, b) = (self.expr(t, d), self.expr(&other, d));
                if self.chance(0.5) {
                    format!("fst(pair({a}, {b}))")
                } else {
                    format!("snd(Pair({b}, {a}))")
                }
            }
            9 if !matches!(t, Fun(..)) => self.exchange(t, d),
            _ => self.specific(t, d),
        }
    }

    fn leaf(&mut self, t: &GenType) -> String {
        let vars = self.vars_of(t);
        if !vars.is_empty() && self.chance(0.5) {
            return self.pick(&vars).clone();
        }
        match t {
            Num => match self.rng.gen_range(0..9) {
                0 => "uid()".into(),
                1 => "time()".into(),
                2 => "temperature()".into(),
                3 => "Infinity".into(),
                4 => "fst(gps())".into(),
                5 => "-1".into(),
                6 => "0.5".into(),
                _ => self.rng.gen_range(0..4).to_string(),
            },
            Bool => if self.chance(0.5) { "True" } else { "False" }.into(),
            Pair(a, b) => {
                let (a, b) = (self.leaf(a), self.leaf(b));
                format!("pair({a}, {b})")
            }
            Field(inner) => match **inner {
                Num => "senseDist".into(),
                _ => {
                    let (a, b) = (self.leaf(inner), self.leaf(inner));
                    format!("nbr({a}, {b})")
                }
            },
            Fun(ps, r) => self.lambda(ps, r, 0),
        }
    }

    /// A function value of the given type.
    fn lambda(&mut self, ps: &[GenType], r: &GenType, depth: u32) -> String {
        if ps.len() == 2 && ps[0] == Num && ps[1] == Num && *r == Num && self.chance(0.3) {
            return self.pick(&["(+)", "(-)", "(*)", "min", "max"]).to_string();
        }
        let params: Vec<(String, GenType)> = ps.iter().map(|p| (self.name("a"), p.clone())).collect();
        let names: Vec<&str> = params.iter().map(|(x, _)| x.as_str()).collect();
        let names = names.join(", ");
        if self.chance(0.25) {
            let f = self.name("g");
            let mut scope = params.clone();
            scope.push((f.clone(), Fun(ps.to_vec(), Box::new(r.clone()))));
            self.recursive.push(f.clone());
            let body = self.bind(&scope, |g| g.expr(r, depth));
            self.recursive.pop();
            format!("fun {f}({names}) {{ {body} }}")
        } else {
            let body = self.bind(&params, |g| g.expr(r, depth));
            format!("(({names}) => {body})")
        }
    }

    fn args(&mut self, ps: &[GenType], depth: u32) -> String {
        let args: Vec<String> = ps.iter().map(|p| self.expr(p, depth)).collect();
        args.join(", ")
    }

    /// Applies some function returning `t`.
    fn call(&mut self, t: &GenType, depth: u32) -> String {
        let recurse = self.chance(0.05);
        let known: Vec<(String, GenType)> = self
            .env
            .iter()
            .filter(|(f, u)| matches!(u, Fun(_, r) if **r == *t) && (recurse || !self.recursive.contains(f)))
            .cloned()
            .collect();
        if !known.is_empty() && self.chance(0.6) {
            let (f, fty) = self.pick(&known).clone();
            return self.call_named(&f, &fty, depth);
        }
        let ps: Vec<GenType> = (0..self.rng.gen_range(0..3)).map(|_| self.value_type(0)).collect();
        let f = self.lambda(&ps, t, depth);
        let args = self.args(&ps, depth);
        format!("({f})({args})")
    }

    fn call_named(&mut self, f: &str, fty: &GenType, depth: u32) -> String {
        let Fun(ps, _) = fty else { unreachable!() };
        let args = self.args(ps, depth);
        format!("{f}({args})")
    }

    /// An exchange, or one of the library patterns built on it, of type `t`.
    fn exchange(&mut self, t: &GenType, d: u32) -> String {
        let a = if let Field(inner) = t { (**inner).clone() } else { self.local_type(0) };
        let fa = GenType::field(a.clone());
        let init = self.expr(&a, d);
        if let Field(_) = t {
            if self.chance(0.4) {
                let f = if self.chance(0.5) { "nbr" } else { "old" };
                let v = self.expr(&a, d);
                return format!("{f}({init}, {v})");
            }
        }
        let (o, n) = (self.name("o"), self.name("n"));
        let one_param = self.chance(0.2);
        let scope = if one_param { vec![(n.clone(), fa.clone())] } else { vec![(o.clone(), fa.clone()), (n.clone(), fa.clone())] };
        let body = self.bind(&scope, |g| {
            if *t == fa && g.chance(0.5) {
                format!("retsend {}", g.expr(t, d))
            } else {
                let (r, s) = (g.expr(t, d), g.expr(&fa, d));
                format!("return {r} send {s}")
            }
        });
        let params = if one_param { n } else { format!("{o}, {n}") };
        format!("exchange({init}, ({params}) => {body})")
    }

    /// Forms particular to the target type.
    fn specific(&mut self, t: &GenType, d: u32) -> String {
        match t {
            Num => match self.rng.gen_range(0..6) {
                0 | 1 => {
                    let op = self.pick(&["+", "-", "*", "/"]).to_string();
                    let (a, b) = (self.expr(&Num, d), self.expr(&Num, d));
                    format!("({a} {op} {b})")
                }
                2 => {
                    let f = self.pick(&["min", "max"]).to_string();
                    let (a, b) = (self.expr(&Num, d), self.expr(&Num, d));
                    format!("{f}({a}, {b})")
                }
                3 => format!("-({})", self.expr(&Num, d)),
                4 => format!("self({})", self.expr(&GenType::field(Num), d)),
                _ => {
                    let b = if self.chance(0.7) { Num } else { Bool };
                    let f = self.lambda(&[Num, b.clone()], &Num, d);
                    let w = self.expr(&GenType::field(b), d);
                    let init = self.expr(&Num, d);
                    format!("nfold({f}, {w}, {init})")
                }
            },
            Bool => match self.rng.gen_range(0..4) {
                0 | 1 => {
                    let op = self.pick(&["==", "<=", ">=", "<", ">"]).to_string();
                    let u = if op.len() == 1 { Num } else { self.local_type(1) };
                    let (a, b) = (self.expr(&u, d), self.expr(&u, d));
                    format!("({a} {op} {b})")
                }
                2 => {
                    let op = self.pick(&["and", "or"]).to_string();
                    let (a, b) = (self.expr(&Bool, d), self.expr(&Bool, d));
                    format!("({a} {op} {b})")
                }
                _ => format!("self({})", self.expr(&GenType::field(Bool), d)),
            },
            Pair(a, b) => {
                let (x, y) = (self.expr(a, d), self.expr(b, d));
                if self.chance(0.5) {
                    format!("pair({x}, {y})")
                } else {
                    format!("Pair({x}, {y})")
                }
            }
            Field(inner) => match self.rng.gen_range(0..5) {
                0 | 1 if **inner == Num => {
                    let op = self.pick(&["+", "-", "*"]).to_string();
                    let fld = self.expr(t, d);
                    let other = if self.chance(0.5) { self.expr(t, d) } else { self.expr(&Num, d) };
                    if self.chance(0.5) {
                        format!("({fld} {op} {other})")
                    } else {
                        format!("({other} {op} {fld})")
                    }
                }
                0 | 1 => {
                    let n = GenType::field(Num);
                    let op = self.pick(&["<=", ">=", "<", ">"]).to_string();
                    let (a, b) = (self.expr(&n, d), self.expr(&Num, d));
                    format!("({a} {op} {b})")
                }
                2 => {
                    let f = self.pick(&["updateSelf", "updateDef"]).to_string();
                    let (w, v) = (self.expr(t, d), self.expr(inner, d));
                    format!("{f}({w}, {v})")
                }
                _ => self.exchange(t, d),
            },
            Fun(ps, r) => self.lambda(ps, r, d),
        }
    }
}
