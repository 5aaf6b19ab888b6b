//! Deterministic discrete-event simulation of a network of devices running
//! one XC program.
//!
//! Devices fire asynchronously. Each round consumes the latest unexpired
//! message from every neighbour, runs the program, and broadcasts the
//! resulting value tree to everyone in range. Messages arrive instantly and
//! wait in buffers; asynchrony comes only from scheduling.

mod config;
mod sim;
mod trace;

pub use config::{DeviceTime, NetworkConfig, Placement, SensorConfig, Waypoint};
pub use sim::{run, run_observed, SimObserver, Simulation};
pub use trace::{
    read_trace_csv, snapshot, stabilisation, validate_trace, write_snapshot_csv, Axiom, EventId, EventRecord, EventTrace,
    TraceMeta, Violation,
};

#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error(transparent)]
    Compile(#[from] xc_core::CompileError),
    #[error("device {device} at time {time}: {error}")]
    Eval { device: u32, time: f64, error: xc_core::EvalError },
    #[error("malformed trace: {0}")]
    Trace(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
