// SPDX-License-Identifier: Apache-2.0

//! Bounded breadth-first exploration.
//!
//! Every state reachable from the initial state within `depth` actions of
//! a finite alphabet is visited once (states are deduplicated by their
//! canonical bytes) and checked against every invariant.

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;

use hashbrown::HashMap;
use thiserror::Error;

use super::invariants::{invariant_violations, InvariantReport};
use crate::adversary::AdversaryAction;
use crate::config::{PlatformConfig, Word};
use crate::ops::{Action, LaunchArgs, Platform};
use crate::state::{EnclaveId, PageTable, Perm, PlatformState, Pte};

/// Limits that make the action alphabet finite.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionBounds {
    /// Words the adversary may write to memory.
    pub tamper_words: Vec<Word>,
    /// Permissions for private addresses in launches.
    pub launch_perms: Vec<Perm>,
    /// OS page-table rewrites `(va, pa, perm)` available to the adversary.
    pub page_table_tampers: Vec<(usize, usize, Perm)>,
    /// Largest page set offered to `Clone`.
    pub max_clone_pages: usize,
    /// Visited-state limit.
    pub cap: usize,
}

impl ActionBounds {
    pub fn for_config(cfg: &PlatformConfig) -> Self {
        ActionBounds {
            tamper_words: vec![0, 1],
            launch_perms: vec![Perm::RX, Perm::RWX],
            page_table_tampers: vec![(0, 0, Perm::RW)],
            max_clone_pages: cfg.n_va,
            cap: 20_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum ExploreError {
    #[error("more than {cap} states reachable within depth {depth}")]
    BudgetExceeded { cap: usize, depth: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExploreReport {
    pub depth: usize,
    /// Distinct states visited, the initial state included.
    pub visited: usize,
    /// New states first reached at each depth.
    pub per_depth: Vec<usize>,
    /// Successful transitions taken, duplicates included.
    pub transitions: u64,
    pub alphabet: usize,
    pub report: InvariantReport,
    /// Actions leading from the initial state to the first violating state.
    pub witness: Option<Vec<Action>>,
}

impl ExploreReport {
    pub fn all_pass(&self) -> bool {
        self.report.all_pass()
    }
}

/// Launch argument sets: every injective map of private addresses to
/// pages with the bounded permissions. Address 0 is the entrypoint and
/// always mapped; the page set is exactly the image of the map.
fn launches(cfg: &PlatformConfig, perms: &[Perm]) -> Vec<LaunchArgs> {
    let mut maps: Vec<Vec<Option<Pte>>> = vec![Vec::new()];
    for va in 0..cfg.n_va {
        let mut next = Vec::new();
        for m in &maps {
            if va > 0 {
                let mut u = m.clone();
                u.push(None);
                next.push(u);
            }
            for pa in 0..cfg.n_pa {
                if m.iter().flatten().any(|p| p.pa == pa) {
                    continue;
                }
                for &perm in perms {
                    let mut u = m.clone();
                    u.push(Some(Pte { pa, perm }));
                    next.push(u);
                }
            }
        }
        maps = next;
    }
    let mut out = Vec::new();
    for id in 1..=cfg.max_enclaves {
        for m in &maps {
            out.push(LaunchArgs {
                id: EnclaveId::from_slot(id),
                ep: 0,
                page_table: PageTable(m.clone()),
                private: m.iter().map(Option::is_some).collect(),
                pages: m.iter().flatten().map(|p| p.pa).collect(),
            });
        }
    }
    out
}

fn subsets(n: usize, max: usize) -> Vec<BTreeSet<usize>> {
    (0u32..1 << n)
        .filter(|b| b.count_ones() as usize <= max)
        .map(|b| (0..n).filter(|i| b >> i & 1 == 1).collect())
        .collect()
}

/// The finite action alphabet.
pub fn alphabet(cfg: &PlatformConfig, bounds: &ActionBounds) -> Vec<Action> {
    let ids: Vec<EnclaveId> = (1..=cfg.max_enclaves).map(EnclaveId::from_slot).collect();
    let mut out: Vec<Action> = launches(cfg, &bounds.launch_perms)
        .into_iter()
        .map(Action::Launch)
        .collect();
    for &e in &ids {
        out.push(Action::Destroy(e));
        out.push(Action::Enter(e));
        out.push(Action::Resume(e));
    }
    out.extend([
        Action::Exit,
        Action::Pause,
        Action::Snapshot,
        Action::EnclaveStep,
    ]);
    for pages in subsets(cfg.n_pa, bounds.max_clone_pages) {
        for &parent in &ids {
            for &child in &ids {
                if parent != child {
                    out.push(Action::Clone {
                        parent,
                        child,
                        pages: pages.clone(),
                    });
                }
            }
        }
    }
    let adversary = |act| Action::AdversaryStep {
        protected: EnclaveId::Invalid,
        act,
    };
    for pa in 0..cfg.n_pa {
        for &word in &bounds.tamper_words {
            out.push(adversary(AdversaryAction::TamperMem { pa, word }));
        }
    }
    for &(va, pa, perm) in &bounds.page_table_tampers {
        out.push(adversary(AdversaryAction::TamperOsPageTable {
            va,
            pa,
            perm,
        }));
    }
    out
}

/// Explores every state within `depth` actions of the initial state.
///
/// Violations do not stop the search; the report counts every violating
/// state and keeps a path to the first one found.
pub fn explore(
    platform: &Platform,
    depth: usize,
    bounds: &ActionBounds,
) -> Result<ExploreReport, ExploreError> {
    let cfg = &platform.cfg;
    let actions = alphabet(cfg, bounds);
    let init = platform.initial_state();

    let mut seen: HashMap<Vec<u8>, u32> = HashMap::new();
    // (parent index, action index) per visited state
    let mut parents: Vec<(u32, u32)> = vec![(u32::MAX, u32::MAX)];
    seen.insert(init.canonical_bytes(cfg), 0);

    let mut report = InvariantReport::for_invariants();
    let mut witness_at: Option<u32> = None;
    let mut scratch_v = Vec::new();
    let mut check = |s: &PlatformState, idx: u32, report: &mut InvariantReport| {
        invariant_violations(s, idx as usize, &mut scratch_v);
        report.evaluated += 1;
        let bad = !scratch_v.is_empty();
        for v in scratch_v.drain(..) {
            report.record(v);
        }
        if bad && witness_at.is_none() {
            witness_at = Some(idx);
        }
    };
    check(&init, 0, &mut report);

    let mut frontier: Vec<(u32, PlatformState)> = vec![(0, init)];
    let mut per_depth = vec![1];
    let mut transitions = 0u64;
    let mut key = Vec::new();
    for d in 1..=depth {
        let mut next = Vec::new();
        for (idx, s) in &frontier {
            let mut scratch = s.clone();
            for (ai, a) in actions.iter().enumerate() {
                if platform.apply_in_place(&mut scratch, a).is_err() {
                    // reverted: scratch still equals s
                    continue;
                }
                transitions += 1;
                key.clear();
                scratch.encode(cfg, &mut key);
                if !seen.contains_key(key.as_slice()) {
                    let new_idx = parents.len() as u32;
                    if parents.len() >= bounds.cap {
                        return Err(ExploreError::BudgetExceeded {
                            cap: bounds.cap,
                            depth: d,
                        });
                    }
                    seen.insert(key.clone(), new_idx);
                    parents.push((*idx, ai as u32));
                    check(&scratch, new_idx, &mut report);
                    next.push((new_idx, core::mem::replace(&mut scratch, s.clone())));
                } else {
                    scratch.clone_from(s);
                }
            }
        }
        per_depth.push(next.len());
        frontier = next;
        if frontier.is_empty() {
            break;
        }
    }
    while per_depth.len() <= depth {
        per_depth.push(0);
    }

    let witness = witness_at.map(|mut i| {
        let mut path = Vec::new();
        while i != 0 {
            let (p, a) = parents[i as usize];
            path.push(actions[a as usize].clone());
            i = p;
        }
        path.reverse();
        path
    });
    Ok(ExploreReport {
        depth,
        visited: parents.len(),
        per_depth,
        transitions,
        alphabet: actions.len(),
        report,
        witness,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ops::Mutation;

    fn cfg() -> PlatformConfig {
        PlatformConfig::explorer(2, 4).unwrap()
    }

    #[test]
    fn depth_zero_visits_only_the_initial_state() {
        let p = Platform::new(cfg());
        let r = explore(&p, 0, &ActionBounds::for_config(&p.cfg)).unwrap();
        assert_eq!(r.visited, 1);
        assert_eq!(r.per_depth, vec![1]);
        assert_eq!(r.report.evaluated, 1);
        assert!(r.all_pass());
    }

    #[test]
    fn launch_enumeration() {
        // va0: 4 pages x 2 perms; va1: unmapped or one of 3 pages x 2 perms
        let l = launches(&cfg(), &[Perm::RX, Perm::RWX]);
        assert_eq!(l.len(), 2 * 8 * 7);
    }

    #[test]
    fn shallow_search_passes() {
        let p = Platform::new(cfg());
        let r = explore(&p, 3, &ActionBounds::for_config(&p.cfg)).unwrap();
        assert!(r.all_pass(), "{:?}", r.report);
        assert!(r.visited > 100);
    }

    #[test]
    fn cap_is_enforced() {
        let p = Platform::new(cfg());
        let mut b = ActionBounds::for_config(&p.cfg);
        b.cap = 50;
        assert_eq!(
            explore(&p, 3, &b),
            Err(ExploreError::BudgetExceeded { cap: 50, depth: 1 })
        );
    }

    #[test]
    fn unguarded_destroy_is_found() {
        let p = Platform::new(cfg()).with_mutation(Some(Mutation::DestroyIgnoresChildren));
        let r = explore(&p, 5, &ActionBounds::for_config(&p.cfg)).unwrap();
        let o = r.report.outcome("root-snapshot-live").unwrap();
        assert!(o.failures > 0);
        let path = r.witness.unwrap();
        assert!(path.len() <= 5);
        assert!(matches!(path.last(), Some(Action::Destroy(_))));
    }
}
