// SPDX-License-Identifier: Apache-2.0

//! Std companion to `tapc-core`: the scenario file format, scenario
//! execution with trace records, witness files, the clone benchmark and
//! the `tapc` command line.

pub mod bench;
pub mod cli;
pub mod run;
pub mod scenario;
pub mod witness;

pub use bench::{bench_clone, BenchError, BenchReport};
pub use cli::run_cli;
pub use run::{run_scenario, RunOptions, RunOutcome, TraceRecord};
pub use scenario::{parse_scenario, Scenario, ScenarioError};
