// SPDX-License-Identifier: Apache-2.0

//! Differential check of lazy copy-on-write clones against eager copying.
//!
//! Both platforms run the same steps. Physical placement and ownership of
//! cloned pages may differ; everything an enclave can tell about itself
//! (its view with physical addresses erased, its outputs) and every
//! operation result must not.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::driver::{all_runnable, Decision, Driver};
use super::invariants::{invariant_violations, InvariantReport, Violation};
use super::trial_seed;
use crate::adversary::{generate_schedule_with, ScheduleParams};
use crate::config::PlatformConfig;
use crate::ops::{Action, Effect, Mutation, OpResult, Platform, Step};
use crate::rng::SplitMix64;
use crate::state::{EnclaveId, PlatformState};

/// Name of the lazy/eager agreement check.
pub const ORACLE_CHECK: &str = "oracle-equivalence";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleReport {
    pub trials: u64,
    pub steps: u64,
    /// Clones performed, and pages they copied, on the lazy platform.
    pub clones: u64,
    pub lazy_pages_copied: u64,
    pub eager_pages_copied: u64,
    /// Agreement plus every invariant on the lazy platform.
    pub report: InvariantReport,
    /// Trial and steps of the first mismatch.
    pub first_mismatch: Option<(u64, Vec<Step>)>,
}

impl OracleReport {
    pub fn all_pass(&self) -> bool {
        self.report.all_pass()
    }

    pub fn mismatches(&self) -> u64 {
        self.report.outcome(ORACLE_CHECK).map_or(0, |o| o.failures)
    }
}

fn same_result(a: &OpResult, b: &OpResult) -> bool {
    match (a, b) {
        (Ok(Effect::Cloned { .. }), Ok(Effect::Cloned { .. })) => true,
        _ => a == b,
    }
}

fn first_difference(
    cfg: &PlatformConfig,
    lazy: &PlatformState,
    eager: &PlatformState,
) -> Option<(Option<EnclaveId>, String)> {
    if lazy.current != eager.current {
        return Some((
            None,
            format!("current {} vs {}", lazy.current, eager.current),
        ));
    }
    for slot in 1..=cfg.max_enclaves {
        let e = EnclaveId::from_slot(slot);
        let a = lazy.project_enclave(e).ok().map(|v| v.virtual_only());
        let b = eager.project_enclave(e).ok().map(|v| v.virtual_only());
        if a != b {
            return Some((Some(e), format!("enclave view {a:?} vs {b:?}")));
        }
        if lazy.output_tapes[slot] != eager.output_tapes[slot] {
            return Some((Some(e), String::from("output tape")));
        }
    }
    None
}

/// Runs `trials` random step sequences of `len` schedule entries on the
/// small configuration; `mutation` is injected into the lazy platform.
pub fn oracle_equivalence(
    seed: u64,
    trials: u64,
    len: usize,
    mutation: Option<Mutation>,
) -> OracleReport {
    oracle_equivalence_on(PlatformConfig::small(), seed, trials, len, mutation)
}

pub fn oracle_equivalence_on(
    cfg: PlatformConfig,
    seed: u64,
    trials: u64,
    len: usize,
    mutation: Option<Mutation>,
) -> OracleReport {
    let lazy = Platform::new(cfg).with_mutation(mutation);
    let eager = Platform::eager(cfg);
    let mut report = InvariantReport::for_invariants();
    report.record_name(ORACLE_CHECK);
    let mut out = OracleReport {
        trials,
        steps: 0,
        clones: 0,
        lazy_pages_copied: 0,
        eager_pages_copied: 0,
        report,
        first_mismatch: None,
    };
    // Clone page sets as large as the address space so that eager copies
    // never run out of room where lazy ones would not.
    let params = ScheduleParams {
        clone_pages: Some(cfg.n_va),
    };
    let mut scratch = Vec::new();
    for t in 0..trials {
        let mut rng = SplitMix64::new(trial_seed(seed, t));
        let schedule = generate_schedule_with(rng.next_u64(), &cfg, len, params);
        let mut driver = Driver::new(rng.next_u64());
        let mut a = lazy.initial_state();
        let mut b = eager.initial_state();
        let mut steps: Vec<Step> = Vec::new();
        let budget = 4 * len;
        while steps.len() < budget {
            let candidates = all_runnable(&a);
            let Some(d) = driver.decide(&a, &schedule, &candidates) else {
                break;
            };
            let action = match d {
                Decision::Schedule(x) | Decision::Preempt { action: x, .. } => x,
                Decision::Step => Action::EnclaveStep,
                // every enclave page is off limits to the adversary
                Decision::Adversary { index } => Action::AdversaryStep {
                    protected: EnclaveId::Invalid,
                    act: schedule.actions[index].clone(),
                },
            };
            let ra = lazy.apply_in_place(&mut a, &action);
            let rb = eager.apply_in_place(&mut b, &action);
            steps.push(Step::Act(action));
            out.steps += 1;
            out.report.evaluated += 1;
            if let (
                Ok(Effect::Cloned { pages_copied: x }),
                Ok(Effect::Cloned { pages_copied: y }),
            ) = (&ra, &rb)
            {
                out.clones += 1;
                out.lazy_pages_copied += *x as u64;
                out.eager_pages_copied += *y as u64;
            }
            let index = steps.len() - 1;
            invariant_violations(&a, index, &mut scratch);
            for v in scratch.drain(..) {
                out.report.record(v);
            }
            let mismatch = if !same_result(&ra, &rb) {
                Some((None, format!("results {ra:?} vs {rb:?}")))
            } else {
                first_difference(&cfg, &a, &b)
            };
            if let Some((enclave, detail)) = mismatch {
                out.report.record(Violation {
                    check: ORACLE_CHECK,
                    index,
                    enclave,
                    address: None,
                    detail,
                });
                if out.first_mismatch.is_none() {
                    out.first_mismatch = Some((t, steps.clone()));
                }
                break;
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn short_campaign_agrees() {
        let r = oracle_equivalence(1, 200, 40, None);
        assert!(r.all_pass(), "{:?}", r.report);
        assert!(r.clones > 0);
        assert!(r.lazy_pages_copied <= r.eager_pages_copied);
    }

    #[test]
    fn shared_writes_are_caught() {
        let r = oracle_equivalence(1, 2000, 40, Some(Mutation::CowWritesShared));
        assert!(r.mismatches() > 0);
    }
}
