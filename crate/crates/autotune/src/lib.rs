//! Online tuning of the FMM parameters θ and `n_levels` between iterations
//! of a time-marching simulation.
//!
//! A controller observes the runtime of each iteration and occasionally
//! proposes a small change of one parameter (a move). A move that makes the
//! next iteration slower is undone. See [`tuner`] for the four controllers.

pub mod error;
pub mod harness;
pub mod oracle;
pub mod tuner;

pub use error::{Result, TuneError};
pub use harness::{run_controller, ProbeAccount, TraceRow, Trajectory};
pub use oracle::{Basin, WorkloadOracle};
pub use tuner::{
    fib, filter_noise, Autotuner, Decision, Measurement, MoveKind, Params, Proposal, TunerConfig, TunerKind,
    TunerStats, TuningState,
};
