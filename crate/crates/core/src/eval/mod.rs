//! Big-step evaluation of one device round.

mod tree;

use std::collections::HashMap;
use std::sync::Arc;

use crate::nvalue::NValue;
use crate::stdlib::Builtin;
use crate::syntax::{Expr, ExprKind, Name};
use crate::value::{Closure, DeviceId, Env, FunName, Literal};

pub use tree::{DecodeError, Site, VTEnv, ValueTree};

/// Sensor readings and harness inputs for one round, by name.
#[derive(Clone, Debug, Default)]
pub struct SensorState(HashMap<String, NValue>);

impl SensorState {
    pub fn new() -> Self {
        SensorState(HashMap::new())
    }

    pub fn set(&mut self, name: impl Into<String>, w: NValue) -> &mut Self {
        self.0.insert(name.into(), w);
        self
    }

    pub fn with(mut self, name: impl Into<String>, w: NValue) -> Self {
        self.set(name, w);
        self
    }

    pub fn get(&self, name: &str) -> Option<&NValue> {
        self.0.get(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.0.keys().map(String::as_str)
    }
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum EvalError {
    /// A value of the wrong shape reached an operation. Well-typed programs
    /// never raise this.
    #[error("runtime type error: {0}")]
    RuntimeType(String),
    #[error("no value for sensor or input `{0}`")]
    MissingSensor(String),
    #[error("evaluation budget exhausted ({0})")]
    Budget(String),
}

impl EvalError {
    pub fn is_budget(&self) -> bool {
        matches!(self, EvalError::Budget(_))
    }
}

/// Limits that turn divergence into an aborted round.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Budget {
    pub steps: u64,
    /// Maximum nesting of function applications.
    pub depth: u32,
}

impl Default for Budget {
    fn default() -> Self {
        Budget { steps: 1_000_000, depth: 10_000 }
    }
}

/// An exchange performed during a round.
#[derive(Clone, Debug)]
pub struct ExchangeEvent {
    pub device: DeviceId,
    /// Alignment names of the user functions being applied, outermost first.
    pub stack: Vec<FunName>,
    /// Devices whose messages reached this exchange, including this device's
    /// own previous message if present.
    pub aligned: Vec<DeviceId>,
    pub result: NValue,
}

/// Hooks for instrumenting a round.
pub trait Observer {
    fn exchange(&mut self, _event: &ExchangeEvent) {}
    /// A `val` binder received a value.
    fn bound(&mut self, _name: &Name, _value: &NValue) {}
}

impl Observer for () {}

/// Evaluates `e` on device `me` against neighbour trees `theta`.
pub fn eval(
    me: DeviceId,
    theta: &VTEnv,
    sigma: &SensorState,
    e: &Expr,
    budget: Budget,
    observer: &mut dyn Observer,
) -> Result<(NValue, ValueTree), EvalError> {
    let mut m = Machine { me, sigma, budget, steps: 0, depth: 0, stack: Vec::new(), observer };
    m.eval(e, theta, &Env::default())
}

/// Applies a function value to argument nvalues, as the auxiliary rules do.
pub fn apply_function(
    me: DeviceId,
    theta: &VTEnv,
    sigma: &SensorState,
    f: &Literal,
    args: &[NValue],
    budget: Budget,
) -> Result<(NValue, ValueTree), EvalError> {
    let mut m = Machine { me, sigma, budget, steps: 0, depth: 0, stack: Vec::new(), observer: &mut () };
    m.apply(f, args, theta)
}

struct Machine<'a> {
    me: DeviceId,
    sigma: &'a SensorState,
    budget: Budget,
    steps: u64,
    depth: u32,
    stack: Vec<FunName>,
    observer: &'a mut dyn Observer,
}

type Res = Result<(NValue, ValueTree), EvalError>;

fn type_error(msg: impl Into<String>) -> EvalError {
    EvalError::RuntimeType(msg.into())
}

/// In debug builds, every tree a node is evaluated against must have been
/// produced by the same node.
fn check_alignment(theta: &VTEnv, site: Site) {
    if cfg!(debug_assertions) {
        for (d, t) in theta.entries() {
            assert!(
                t.site() == site || t.site() == Site::UNKNOWN,
                "misaligned tree from device {d}: produced at {:?}, consumed at {:?}",
                t.site(),
                site
            );
        }
    }
}

impl Machine<'_> {
    fn tick(&mut self) -> Result<(), EvalError> {
        self.steps += 1;
        if self.steps > self.budget.steps {
            return Err(EvalError::Budget(format!("more than {} steps", self.budget.steps)));
        }
        Ok(())
    }

    fn eval(&mut self, e: &Expr, theta: &VTEnv, env: &Env) -> Res {
        self.tick()?;
        let site = Site(e.id.0);
        check_alignment(theta, site);
        match &e.kind {
            ExprKind::Lit(l) => Ok((NValue::lift(l.clone()), ValueTree::leaf(site))),
            ExprKind::Fun(def) => {
                let c = Closure { def: def.clone(), env: env.clone() };
                Ok((NValue::lift(Literal::Fun(Arc::new(c))), ValueTree::leaf(site)))
            }
            ExprKind::Var(x) => {
                let w = match env.lookup(x) {
                    Some(w) => w.clone(),
                    None => self.sigma.get(x).cloned().ok_or_else(|| EvalError::MissingSensor(x.to_string()))?,
                };
                Ok((w, ValueTree::leaf(site)))
            }
            ExprKind::Val(x, bound, body) => {
                let (w1, t1) = self.eval(bound, &theta.project(1), env)?;
                self.observer.bound(x, &w1);
                let (w2, t2) = self.eval(body, &theta.project(2), &env.bind(x.clone(), w1))?;
                Ok((w2, ValueTree::with_site(site, None, vec![t1, t2])))
            }
            ExprKind::App(callee, args) => {
                let mut children = Vec::with_capacity(args.len() + 2);
                let (w0, t0) = self.eval(callee, &theta.project(1), env)?;
                children.push(t0);
                let mut ws = Vec::with_capacity(args.len());
                for (i, a) in args.iter().enumerate() {
                    let (w, t) = self.eval(a, &theta.project(i + 2), env)?;
                    ws.push(w);
                    children.push(t);
                }
                let f = w0.lookup(self.me).clone();
                let (w, t) = self.application(&f, &ws, theta, args.len())?;
                children.push(t);
                Ok((w, ValueTree::with_site(site, Some(NValue::lift(f)), children)))
            }
        }
    }

    /// The last premise of E-APP: the aux rule under the environment
    /// filtered by function name and projected past the arguments.
    fn application(&mut self, f: &Literal, ws: &[NValue], theta: &VTEnv, n: usize) -> Res {
        let name = f.fun_name().ok_or_else(|| type_error(format!("cannot apply {f}")))?;
        let aux = theta.filter_name(name).project(n + 2);
        self.apply(f, ws, &aux)
    }

    fn apply(&mut self, f: &Literal, ws: &[NValue], theta: &VTEnv) -> Res {
        match f {
            Literal::Fun(c) => {
                if c.def.params.len() != ws.len() {
                    return Err(type_error(format!(
                        "{} takes {} argument(s), got {}",
                        c.def.tau,
                        c.def.params.len(),
                        ws.len()
                    )));
                }
                if self.depth >= self.budget.depth {
                    return Err(EvalError::Budget(format!("call depth above {}", self.budget.depth)));
                }
                let mut env = c.env.bind(c.def.name.clone(), NValue::lift(f.clone()));
                for (p, w) in c.def.params.iter().zip(ws) {
                    env = env.bind(p.clone(), w.clone());
                }
                self.depth += 1;
                self.stack.push(FunName::Tau(c.def.tau));
                let r = stacker::maybe_grow(64 * 1024, 2 * 1024 * 1024, || self.eval(&c.def.body, theta, &env));
                self.stack.pop();
                self.depth -= 1;
                r
            }
            Literal::Builtin(b) => self.builtin(*b, ws, theta),
            other => Err(type_error(format!("cannot apply {other}"))),
        }
    }

    fn builtin(&mut self, b: Builtin, ws: &[NValue], theta: &VTEnv) -> Res {
        let site = Site::builtin(b);
        check_alignment(theta, site);
        if ws.len() != b.arity() {
            return Err(type_error(format!("`{}` takes {} argument(s), got {}", b.name(), b.arity(), ws.len())));
        }
        let leaf = |w: NValue| Ok((w, ValueTree::leaf(site)));
        let me = self.me;
        match b {
            Builtin::Exchange => self.exchange(&ws[0], &ws[1], theta),
            Builtin::Nfold => leaf(NValue::lift(self.nfold(&ws[0], &ws[1], &ws[2], theta)?)),
            Builtin::SelfB => leaf(NValue::lift(ws[0].lookup(me).clone())),
            Builtin::UpdateSelf => leaf(ws[0].update_self(me, ws[1].lookup(me).clone())),
            Builtin::UpdateDef => {
                let present = theta.keys().filter(|d| *d != me);
                leaf(ws[0].update_def_over(present, ws[1].lookup(me).clone()))
            }
            Builtin::Uid => leaf(NValue::lift(Literal::Num(me.0 as f64))),
            Builtin::Gps | Builtin::Time | Builtin::Temperature => {
                let w = self.sigma.get(b.name()).ok_or_else(|| EvalError::MissingSensor(b.name().into()))?;
                leaf(w.clone())
            }
            _ => {
                let refs: Vec<&NValue> = ws.iter().collect();
                leaf(NValue::pointwise(&refs, |ls| b.apply_literal(ls)).map_err(type_error)?)
            }
        }
    }

    fn exchange(&mut self, init: &NValue, handler: &NValue, theta: &VTEnv) -> Res {
        let me = self.me;
        let mut sends: Vec<(DeviceId, &NValue)> = Vec::with_capacity(theta.len());
        for (d, t) in theta.entries() {
            // A tree without a payload cannot come from an exchange and
            // simply does not align.
            if let Some(w) = t.root() {
                sends.push((*d, w));
            }
        }
        let keys: Vec<DeviceId> = sends.iter().map(|(d, _)| *d).collect();
        let mut nbr = init.clone();
        for (d, w) in &sends {
            nbr = nbr.update_self(*d, w.lookup(me).clone());
        }
        let old = match sends.iter().find(|(d, _)| *d == me) {
            Some((_, w)) => w.restrict(&keys),
            None => init.clone(),
        };

        // The handler call is an application of nvalues, evaluated under the
        // first child of each aligned exchange node.
        let inner = theta.project(1);
        check_alignment(&inner, Site::HANDLER);
        let f = handler.lookup(me).clone();
        let (result, t_app) = self.application(&f, &[old, nbr], &inner, 2)?;
        let leaf = || ValueTree::leaf(Site::UNKNOWN);
        let t_handler =
            ValueTree::with_site(Site::HANDLER, Some(NValue::lift(f)), vec![leaf(), leaf(), leaf(), t_app]);

        let part = |i: usize| {
            NValue::pointwise(&[&result], |ls| match ls[0].as_pair() {
                Some((a, b)) => Ok(if i == 0 { a.clone() } else { b.clone() }),
                None => Err(type_error(format!("exchange handler returned {} instead of a pair", ls[0]))),
            })
        };
        let (ret, send) = (part(0)?, part(1)?);
        self.observer.exchange(&ExchangeEvent {
            device: me,
            stack: self.stack.clone(),
            aligned: keys,
            result: ret.clone(),
        });
        Ok((ret, ValueTree::with_site(Site::builtin(Builtin::Exchange), Some(send), vec![t_handler])))
    }

    fn nfold(&mut self, f: &NValue, w: &NValue, init: &NValue, theta: &VTEnv) -> Result<Literal, EvalError> {
        let me = self.me;
        let f = f.lookup(me).clone();
        let mut acc = init.lookup(me).clone();
        for d in theta.keys() {
            if d == me {
                continue;
            }
            let args = [NValue::lift(acc), NValue::lift(w.lookup(d).clone())];
            let (r, _) = self.apply(&f, &args, &VTEnv::new())?;
            acc = r.lookup(me).clone();
        }
        Ok(acc)
    }
}
