//! A checked program ready to run rounds.

use std::collections::HashMap;
use std::sync::Arc;

use crate::eval::{self, Budget, EvalError, Observer, SensorState, VTEnv, ValueTree};
use crate::nvalue::NValue;
use crate::stdlib::PRELUDE;
use crate::syntax::{self, lexer::Tok, DesugarMode, Desugared, Expr, FunDef, Name, SourceProgram, SyntaxError, Tau};
use crate::types::{self, Type, TypeError, TypedProgram};
use crate::value::{Closure, DeviceId, Env, Literal};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CompileError {
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error(transparent)]
    Type(#[from] TypeError),
}

#[derive(Debug)]
pub struct Program {
    pub source: String,
    pub surface: SourceProgram,
    pub core: Desugared,
    pub typed: TypedProgram,
    /// Names of the definitions written in the source, in order.
    pub own_defs: Vec<Name>,
    funs: HashMap<Tau, Arc<FunDef>>,
}

impl Program {
    /// Parses, desugars and type-checks `src`. Library definitions such as
    /// `nbr` and `old` are added when the program mentions them without
    /// defining them. Free variables become inputs read from the sensor
    /// state.
    pub fn compile(file: &str, src: &str) -> Result<Program, CompileError> {
        let mut surface = syntax::parse(file, src)?;
        let own_defs: Vec<Name> = surface.defs.iter().map(|d| Name::from(d.name.as_str())).collect();

        let file_name: Arc<str> = Arc::from(file);
        let mentioned: Vec<String> = syntax::lexer::tokenize(&file_name, src)?
            .into_iter()
            .filter_map(|t| match t.tok {
                Tok::Ident(x) => Some(x),
                _ => None,
            })
            .collect();
        let prelude = syntax::parse("<prelude>", PRELUDE)?;
        let extra: Vec<_> = prelude
            .defs
            .into_iter()
            .filter(|d| mentioned.contains(&d.name) && !own_defs.iter().any(|n| **n == *d.name))
            .collect();
        surface.defs.splice(0..0, extra);

        let core = syntax::desugar(&surface, DesugarMode::Harness)?;
        let typed = types::typecheck(&core)?;
        let funs = syntax::fun_index(&core.expr);
        Ok(Program { source: src.to_string(), surface, core, typed, own_defs, funs })
    }

    pub fn expr(&self) -> &Expr {
        &self.core.expr
    }

    pub fn main_type(&self) -> &Type {
        &self.typed.main
    }

    /// Free variables of the program, read from the sensor state each round.
    pub fn inputs(&self) -> &[(Name, Type)] {
        &self.typed.inputs
    }

    /// Whether the program reads `senseDist`.
    pub fn uses_sense_dist(&self) -> bool {
        syntax::free_vars(&self.core.expr).contains(crate::stdlib::SENSE_DIST)
    }

    /// Rebuilds a function value from its rendered alignment name. Captured
    /// variables are not recoverable from the name, so the closure has an
    /// empty environment.
    pub fn closure(&self, text: &str) -> Option<Literal> {
        let def = self.funs.get(&Tau::parse(text)?)?;
        Some(Literal::Fun(Arc::new(Closure { def: def.clone(), env: Env::default() })))
    }

    pub fn parse_nvalue(&self, text: &str) -> Result<NValue, SyntaxError> {
        NValue::parse_with(text, &|s| self.closure(s))
    }

    pub fn decode_tree(&self, bytes: &[u8]) -> Result<ValueTree, eval::DecodeError> {
        ValueTree::decode(bytes, &|s| self.closure(s))
    }

    /// One round on device `me`.
    pub fn round(
        &self,
        me: DeviceId,
        theta: &VTEnv,
        sigma: &SensorState,
        budget: Budget,
        observer: &mut dyn Observer,
    ) -> Result<(NValue, ValueTree), EvalError> {
        eval::eval(me, theta, sigma, &self.core.expr, budget, observer)
    }
}
