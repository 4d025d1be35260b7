// SPDX-License-Identifier: Apache-2.0

//! The checking layer.
//!
//! * [`invariants`]: single-state platform invariants.
//! * [`measurement`]: the measurement biconditional over initial views.
//! * [`two_trace`]: lockstep self-composition for integrity, measurement
//!   determinism and confidentiality.
//! * [`oracle`]: lazy copy-on-write against eager copying.
//! * [`explore`]: bounded breadth-first exploration from the initial state.
//! * [`revert`]: failing preconditions must leave the state untouched.

pub mod driver;
pub mod explore;
pub mod invariants;
pub mod measurement;
pub mod oracle;
pub mod programs;
pub mod revert;
pub mod two_trace;

pub use explore::{explore, ActionBounds, ExploreError, ExploreReport};
pub use invariants::{
    check_invariants, invariant_violations, CheckOutcome, Invariant, InvariantReport, Violation,
};
pub use measurement::{check_measurement_pair, measurement_campaign, MeasurementReport};
pub use oracle::{oracle_equivalence, OracleReport};
pub use revert::{check_atomic_revert, revert_cases, RevertCase, RevertReport};
pub use two_trace::{
    run_campaign, run_two_trace, CampaignConfig, CampaignReport, HarnessMisuse, Mode,
    TwoTraceConfig, TwoTraceOutcome, Witness,
};

use crate::rng::SplitMix64;

/// Per-trial seed derived from a campaign seed; trials are independent
/// so campaigns can be split across threads.
pub fn trial_seed(seed: u64, trial: u64) -> u64 {
    SplitMix64::new(seed ^ trial.wrapping_mul(SplitMix64::GAMMA).rotate_left(17)).next_u64()
}
