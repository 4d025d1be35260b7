// SPDX-License-Identifier: Apache-2.0

//! Interleaving of adversary schedules with enclave execution.
//!
//! While the OS runs, the driver either schedules one of a set of
//! candidate enclaves or hands the next schedule entry to the adversary.
//! While an enclave runs it keeps stepping until the schedule preempts it
//! with `Pause`, `Exit` or `Snapshot`.

use crate::adversary::{AdversaryAction, AdversarySchedule};
use crate::ops::Action;
use crate::rng::SplitMix64;
use crate::state::{EnclaveId, PlatformState};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Decision {
    /// Enter or resume a candidate enclave.
    Schedule(Action),
    /// Schedule entry `index`, executed by the adversary.
    Adversary { index: usize },
    /// Schedule entry `index` preempts the running enclave with `action`.
    Preempt { index: usize, action: Action },
    /// One instruction of the running enclave.
    Step,
}

#[derive(Debug, Clone)]
pub struct Driver {
    rng: SplitMix64,
    next: usize,
    /// Chance, out of 8, of scheduling a candidate while the OS runs.
    schedule_eighths: usize,
}

impl Driver {
    pub fn new(seed: u64) -> Self {
        Driver {
            rng: SplitMix64::new(seed),
            next: 0,
            schedule_eighths: 2,
        }
    }

    /// Index of the next unconsumed schedule entry.
    pub fn position(&self) -> usize {
        self.next
    }

    /// Next decision for state `s`, or `None` once the schedule is used up.
    /// `candidates` are the enclaves the driver may enter or resume.
    pub fn decide(
        &mut self,
        s: &PlatformState,
        schedule: &AdversarySchedule,
        candidates: &[EnclaveId],
    ) -> Option<Decision> {
        if self.next >= schedule.actions.len() {
            return None;
        }
        if s.current.is_valid() {
            if let AdversaryAction::CallOp(a) = &schedule.actions[self.next] {
                if matches!(**a, Action::Pause | Action::Exit | Action::Snapshot) {
                    let index = self.next;
                    self.next += 1;
                    return Some(Decision::Preempt {
                        index,
                        action: (**a).clone(),
                    });
                }
            }
            return Some(Decision::Step);
        }
        let runnable: alloc::vec::Vec<EnclaveId> = candidates
            .iter()
            .copied()
            .filter(|&e| s.meta_of(e).is_some_and(|m| m.active && !m.is_snapshot))
            .collect();
        if !runnable.is_empty() && self.rng.chance(self.schedule_eighths, 8) {
            let e = runnable[self.rng.below(runnable.len())];
            let paused = s.meta_of(e).is_some_and(|m| m.paused);
            return Some(Decision::Schedule(if paused {
                Action::Resume(e)
            } else {
                Action::Enter(e)
            }));
        }
        let index = self.next;
        self.next += 1;
        Some(Decision::Adversary { index })
    }
}

/// Candidates for the driver when no enclave is singled out: every active
/// non-snapshot enclave.
pub fn all_runnable(s: &PlatformState) -> alloc::vec::Vec<EnclaveId> {
    (1..s.meta.len())
        .map(EnclaveId::from_slot)
        .filter(|&e| s.meta_of(e).is_some_and(|m| m.active && !m.is_snapshot))
        .collect()
}
