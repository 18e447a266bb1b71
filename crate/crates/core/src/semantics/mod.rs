//! Operational semantics: normal forms, labelled transitions and execution.

pub mod config;
pub mod run;
pub mod step;

pub use config::{normalize, Configuration};
pub use run::{run, store_value, Outcome, RunError, RunOptions, Schedule, DEFAULT_FUEL, DEFAULT_STATE_CAP};
pub use step::{transitions, RuntimeError, TransitionLabel};
