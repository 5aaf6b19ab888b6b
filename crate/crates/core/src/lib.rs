//! The eXchange Calculus: syntax, types, neighbouring values and the
//! device-round evaluator.

pub mod eval;
pub mod gen;
pub mod nvalue;
pub mod program;
pub mod stdlib;
pub mod syntax;
pub mod types;
pub mod value;

pub use eval::{Budget, EvalError, SensorState, VTEnv, ValueTree};
pub use nvalue::NValue;
pub use program::{CompileError, Program};
pub use value::{DeviceId, Literal};
