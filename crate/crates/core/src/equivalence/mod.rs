//! Behavioural equivalence of processes: finite LTS construction and
//! (weak) bisimulation checking.

pub mod bisim;
pub mod lts;

pub use bisim::{strong_bisimilar, weak_bisimilar, BisimError, Distinction, Side, Verdict};
pub use lts::{build_lts, default_value_domain, Lts, LtsError, LtsOptions, DEFAULT_LTS_FUEL};

use thiserror::Error;

use crate::sesscalc::Process;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EquivError {
    #[error(transparent)]
    Lts(#[from] LtsError),
    #[error(transparent)]
    Bisim(#[from] BisimError),
}

/// Builds both systems under `opts` and compares them weakly.
pub fn equivalent(p: &Process, q: &Process, opts: &LtsOptions) -> Result<Verdict, EquivError> {
    let a = build_lts(p, opts)?;
    let b = build_lts(q, opts)?;
    Ok(weak_bisimilar(&a, &b)?)
}

#[cfg(test)]
mod tests;
