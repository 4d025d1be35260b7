// SPDX-License-Identifier: Apache-2.0

//! Executable model of an enclave platform extended with `Snapshot` and
//! `Clone`, plus a checking layer for its platform invariants and its
//! observational-determinism security properties.
//!
//! The crate is `no_std` (it needs `alloc`). Everything here is a pure
//! function of a [`PlatformState`] value; IO, scenario files and the CLI
//! live in the companion `tapc` crate.
//!
//! Layout:
//!
//! * [`config`], [`state`], [`measure`]: the platform state, its projections
//!   and the measurement function.
//! * [`ops`]: lifecycle operations as total transition functions.
//! * [`machine`]: a tiny instruction set that gives enclaves real steps,
//!   including the copy-on-write fault path.
//! * [`adversary`]: the havocing adversary and seeded schedule generation.
//! * [`properties`]: invariant checks, two-trace harnesses, the eager-copy
//!   differential oracle and a bounded exhaustive explorer.

#![no_std]

extern crate alloc;

pub mod adversary;
mod canonical;
pub mod config;
pub mod machine;
pub mod measure;
pub mod ops;
pub mod properties;
pub mod rng;
pub mod state;

pub use adversary::{adversary_execute, generate_schedule, AdversaryAction, AdversarySchedule};
pub use config::{ConfigError, PlatformConfig, Word};
pub use machine::{decode, encode, FaultCode, Instruction, StepOutcome};
pub use measure::{fnv1a64, measure, Measurement};
pub use ops::{
    Action, CopyPolicy, Effect, LaunchArgs, Mutation, OpError, OpResult, Platform, Step, Trace,
    TraceStep,
};
pub use state::{
    EnclaveId, EnclaveMetadata, EnclaveStateView, Observation, PageTable, Perm, PlatformState, Pte,
    StateError,
};
