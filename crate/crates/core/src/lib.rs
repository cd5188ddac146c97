//! Contextual bandits with group-level societal bias.
//!
//! Observed rewards of a sensitive group of arms are shifted by an unknown
//! linear bias. The group-fair policies estimate that bias from pooled group
//! observations and correct for it, so arms are compared on bias-free utility.
//!
//! The crate is `no_std` with `alloc`; IO, configuration and parallel sweeps
//! live in the `groupfair` companion crate.

#![no_std]
extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod bandit;
pub mod env;
mod error;
pub mod numerics;
pub mod policy;
pub mod trial;

pub use bandit::{BanditInstance, BiasSign, CoefficientLayout, GroupPartition, Slate, SyntheticConfig};
pub use env::{Environment, Regrets, Round};
pub use error::{Error, Result};
pub use numerics::{Purpose, RngStream, StreamId};
pub use policy::{Decision, Policy, PolicyConfig, PolicyKind};
pub use trial::{cumulative_regret, run_trial, sensitive_pull_fraction, trailing_window, RegretKind, RoundOutcome, Trajectory};
