//! Batched Thompson sampling for multi-armed bandits.
//!
//! The agent plays Gaussian-prior Thompson sampling but only sees rewards at
//! the end of a batch. Batches are sized adaptively from *cycles*: a cycle is
//! the shortest run of steps in which exactly two distinct arms are played.
//! Each arm carries a cycle count `M_i`, and a batch closes at the first cycle
//! end where some arm's count reaches its limit `U_i = max(1, ceil(alpha * M_i))`
//! fixed at the previous batch end.
//!
//! The crate is `no_std` (it needs `alloc`). Parallel execution, file formats
//! and the command line live in the companion `bts` crate, which plugs a
//! thread pool in through [`sim::Replicator`].
//!
//! Arms are indexed from zero and time steps from one.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod cycle;
pub mod env;
mod error;
pub mod policy;
pub mod rng;
pub mod sim;
pub mod stats;
pub mod verify;

pub use cycle::{BatchSummary, ClosedCycle, CycleBatchState, CycleEvent};
pub use env::{ArmSpec, EnvironmentSpec};
pub use error::{Error, Result};
pub use policy::{select_action, Mode, PolicyConfig, PosteriorState, Variant};
pub use sim::{
    run_episode, run_episode_with, run_monte_carlo, AggregateResult, EpisodeObserver, Replicator,
    RunConfig, RunTrace, Sequential, StepView, TracePoint,
};
