// SPDX-License-Identifier: Apache-2.0

//! Atomic revert: a failing step leaves the state byte-identical.
//!
//! [`revert_cases`] enumerates, per operation, each failing precondition
//! on a small platform carrying a snapshot, a child of it and a plain
//! enclave. A few preconditions can only fail in states no operation
//! sequence reaches (a running snapshot, say); those cases start from a
//! hand-edited state, since the contract is stated for every state.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::adversary::AdversaryAction;
use crate::config::{PlatformConfig, Word};
use crate::machine::{encode, Instruction};
use crate::ops::{Action, LaunchArgs, OpError, Platform, Step};
use crate::state::{EnclaveId, PageTable, Perm, PlatformState, Pte};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RevertCase {
    pub name: &'static str,
    pub state: PlatformState,
    pub step: Step,
    pub expected: OpError,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RevertReport {
    pub cases: usize,
    /// `name: detail` for each case that did not fail as expected or
    /// changed the state.
    pub failures: Vec<String>,
    /// Error codes produced by at least one passing case.
    pub covered: BTreeSet<&'static str>,
}

impl RevertReport {
    pub fn all_pass(&self) -> bool {
        self.failures.is_empty()
    }

    /// Codes no case produced.
    pub fn uncovered(&self) -> Vec<&'static str> {
        OpError::ALL
            .iter()
            .map(|e| e.name())
            .filter(|n| !self.covered.contains(n))
            .collect()
    }
}

/// 8 addresses, 16 pages, 2 registers, byte words, 4 enclave ids.
pub fn revert_config() -> PlatformConfig {
    PlatformConfig::new(8, 16, 2, 8, 4).expect("fixed config is valid")
}

fn id(i: u8) -> EnclaveId {
    EnclaveId::Id(i)
}

fn set(p: &[usize]) -> BTreeSet<usize> {
    p.iter().copied().collect()
}

fn launch_args(
    cfg: &PlatformConfig,
    e: EnclaveId,
    map: &[(usize, usize, Perm)],
    pages: &[usize],
) -> LaunchArgs {
    let mut page_table = PageTable::empty(cfg.n_va);
    let mut private = vec![false; cfg.n_va];
    for &(va, pa, perm) in map {
        page_table.set(va, Some(Pte { pa, perm }));
        private[va] = true;
    }
    LaunchArgs {
        id: e,
        ep: 0,
        page_table,
        private,
        pages: set(pages),
    }
}

fn program(
    p: &Platform,
    s: &mut PlatformState,
    e: EnclaveId,
    base: usize,
    code: &[Instruction],
    data: &[(usize, usize)],
) {
    let words: Vec<Word> = code
        .iter()
        .flat_map(|i| {
            let (a, b) = encode(i);
            [a, b]
        })
        .collect();
    let mut map: Vec<(usize, usize, Perm)> =
        (0..words.len()).map(|i| (i, base + i, Perm::RX)).collect();
    map.extend(data.iter().map(|&(va, pa)| (va, pa, Perm::RW)));
    let pages: Vec<usize> = map.iter().map(|m| m.1).collect();
    p.execute_in_place(s, &Step::OsWrite { pa: base, words })
        .expect("staging code");
    p.apply_in_place(s, &Action::Launch(launch_args(&p.cfg, e, &map, &pages)))
        .expect("launch");
}

/// Base states: `os` with the OS running, `running` with the plain
/// enclave 3 running, `child` with the snapshot's child 2 running.
struct Bases {
    os: PlatformState,
    running: PlatformState,
    child: PlatformState,
}

fn bases(p: &Platform) -> Bases {
    let mut s = p.initial_state();
    // 1: snapshot on pages 0..=4; 2: its child with pages 5, 6
    program(
        p,
        &mut s,
        id(1),
        0,
        &[Instruction::Snap, Instruction::Exit],
        &[(7, 4)],
    );
    let must = |s: &mut PlatformState, a: Action| {
        p.apply_in_place(s, &a).expect("base setup");
    };
    must(&mut s, Action::Enter(id(1)));
    must(&mut s, Action::Snapshot);
    must(
        &mut s,
        Action::Clone {
            parent: id(1),
            child: id(2),
            pages: set(&[5, 6]),
        },
    );
    // 3: plain enclave on pages 8..=11; 12..=15 stay with the OS
    program(
        p,
        &mut s,
        id(3),
        8,
        &[Instruction::LoadI { r: 0, imm: 1 }, Instruction::Exit],
        &[],
    );
    let mut running = s.clone();
    must(&mut running, Action::Enter(id(3)));
    let mut child = s.clone();
    must(&mut child, Action::Resume(id(2)));
    Bases {
        os: s,
        running,
        child,
    }
}

/// Every enumerated failing precondition.
pub fn revert_cases() -> Vec<RevertCase> {
    let p = Platform::new(revert_config());
    let cfg = p.cfg;
    let b = bases(&p);
    let free = id(4);
    let good = launch_args(
        &cfg,
        free,
        &[(0, 12, Perm::RX), (1, 13, Perm::RW)],
        &[12, 13],
    );
    let launch = |f: &dyn Fn(&mut LaunchArgs)| {
        let mut a = good.clone();
        f(&mut a);
        Step::Act(Action::Launch(a))
    };
    let clone = |parent, child, pages: &[usize]| {
        Step::Act(Action::Clone {
            parent,
            child,
            pages: set(pages),
        })
    };
    let adv = |protected, act| Step::Act(Action::AdversaryStep { protected, act });
    let act = Step::Act;

    // states no operation sequence reaches
    let mut running_snapshot = b.running.clone();
    running_snapshot.meta[3].is_snapshot = true;
    let mut running_inactive = b.running.clone();
    running_inactive.meta[3].active = false;

    let os = &b.os;
    let run = &b.running;
    let mut out = Vec::new();
    let mut case = |name, state: &PlatformState, step, expected| {
        out.push(RevertCase {
            name,
            state: state.clone(),
            step,
            expected,
        })
    };

    case(
        "launch while an enclave runs",
        run,
        launch(&|_| {}),
        OpError::NotOs,
    );
    case(
        "launch the OS id",
        os,
        launch(&|a| a.id = EnclaveId::Os),
        OpError::InvalidId,
    );
    case(
        "launch the invalid id",
        os,
        launch(&|a| a.id = EnclaveId::Invalid),
        OpError::InvalidId,
    );
    case(
        "launch an active id",
        os,
        launch(&|a| a.id = id(3)),
        OpError::AlreadyActive,
    );
    case(
        "launch onto enclave pages",
        os,
        launch(&|a| {
            a.pages.insert(0);
        }),
        OpError::PageNotOsOwned,
    );
    case(
        "launch with aliased private addresses",
        os,
        launch(&|a| {
            a.page_table.set(
                1,
                Some(Pte {
                    pa: 12,
                    perm: Perm::RW,
                }),
            )
        }),
        OpError::BadArguments,
    );
    case(
        "launch with an unmapped private address",
        os,
        launch(&|a| a.private[2] = true),
        OpError::BadArguments,
    );
    case(
        "launch with a private page outside the page set",
        os,
        launch(&|a| {
            a.pages.remove(&13);
        }),
        OpError::BadArguments,
    );
    case(
        "launch with a non-executable entrypoint",
        os,
        launch(&|a| a.ep = 1),
        OpError::BadArguments,
    );
    case(
        "launch with a public entrypoint",
        os,
        launch(&|a| {
            a.ep = 2;
            a.page_table.set(
                2,
                Some(Pte {
                    pa: 14,
                    perm: Perm::RX,
                }),
            );
        }),
        OpError::BadArguments,
    );
    case(
        "launch with an out-of-range page",
        os,
        launch(&|a| {
            a.pages.insert(16);
        }),
        OpError::BadArguments,
    );
    case(
        "launch with an out-of-range id",
        os,
        launch(&|a| a.id = id(5)),
        OpError::BadArguments,
    );

    case(
        "destroy while an enclave runs",
        run,
        act(Action::Destroy(id(3))),
        OpError::NotOs,
    );
    case(
        "destroy the invalid id",
        os,
        act(Action::Destroy(EnclaveId::Invalid)),
        OpError::InvalidId,
    );
    case(
        "destroy an inactive enclave",
        os,
        act(Action::Destroy(free)),
        OpError::NotActive,
    );
    case(
        "destroy a snapshot with children",
        os,
        act(Action::Destroy(id(1))),
        OpError::SnapshotHasChildren,
    );
    case(
        "destroy an out-of-range id",
        os,
        act(Action::Destroy(id(9))),
        OpError::BadArguments,
    );

    case(
        "enter while an enclave runs",
        run,
        act(Action::Enter(id(3))),
        OpError::NotOs,
    );
    case(
        "enter the OS",
        os,
        act(Action::Enter(EnclaveId::Os)),
        OpError::InvalidId,
    );
    case(
        "enter an inactive enclave",
        os,
        act(Action::Enter(free)),
        OpError::NotActive,
    );
    case(
        "enter a snapshot",
        os,
        act(Action::Enter(id(1))),
        OpError::IsSnapshot,
    );
    case(
        "enter a paused enclave",
        os,
        act(Action::Enter(id(2))),
        OpError::BadArguments,
    );

    case(
        "resume while an enclave runs",
        run,
        act(Action::Resume(id(2))),
        OpError::NotOs,
    );
    case(
        "resume the invalid id",
        os,
        act(Action::Resume(EnclaveId::Invalid)),
        OpError::InvalidId,
    );
    case(
        "resume an inactive enclave",
        os,
        act(Action::Resume(free)),
        OpError::NotActive,
    );
    case(
        "resume a snapshot",
        os,
        act(Action::Resume(id(1))),
        OpError::IsSnapshot,
    );
    case(
        "resume an enclave that is not paused",
        os,
        act(Action::Resume(id(3))),
        OpError::NotPaused,
    );

    case(
        "exit from the OS",
        os,
        act(Action::Exit),
        OpError::NotEnclave,
    );
    case(
        "pause from the OS",
        os,
        act(Action::Pause),
        OpError::NotEnclave,
    );

    case(
        "snapshot from the OS",
        os,
        act(Action::Snapshot),
        OpError::NotEnclave,
    );
    case(
        "snapshot a snapshot child",
        &b.child,
        act(Action::Snapshot),
        OpError::HasRootSnapshot,
    );
    case(
        "snapshot a running snapshot",
        &running_snapshot,
        act(Action::Snapshot),
        OpError::AlreadySnapshot,
    );
    case(
        "snapshot an inactive current enclave",
        &running_inactive,
        act(Action::Snapshot),
        OpError::NotActive,
    );

    case(
        "clone while an enclave runs",
        run,
        clone(id(1), free, &[12]),
        OpError::NotOs,
    );
    case(
        "clone from the OS",
        os,
        clone(EnclaveId::Os, free, &[12]),
        OpError::InvalidId,
    );
    case(
        "clone into the invalid id",
        os,
        clone(id(1), EnclaveId::Invalid, &[12]),
        OpError::InvalidId,
    );
    case(
        "clone an inactive parent",
        os,
        clone(free, id(3), &[12]),
        OpError::NotActive,
    );
    case(
        "clone into an active child",
        os,
        clone(id(1), id(3), &[12]),
        OpError::AlreadyActive,
    );
    case(
        "clone onto itself",
        os,
        clone(id(1), id(1), &[12]),
        OpError::SelfClone,
    );
    case(
        "clone onto enclave pages",
        os,
        clone(id(1), free, &[8]),
        OpError::PageNotOsOwned,
    );
    case(
        "clone without room for the copy",
        os,
        clone(id(3), free, &[12, 13]),
        OpError::InsufficientMemory,
    );
    case(
        "clone with an out-of-range page",
        os,
        clone(id(1), free, &[16]),
        OpError::BadArguments,
    );

    case(
        "step from the OS",
        os,
        act(Action::EnclaveStep),
        OpError::NotEnclave,
    );
    case(
        "step a running snapshot",
        &running_snapshot,
        act(Action::EnclaveStep),
        OpError::IsSnapshot,
    );
    case(
        "SNAP in a snapshot child",
        &b.child,
        act(Action::EnclaveStep),
        OpError::HasRootSnapshot,
    );

    case(
        "adversary while an enclave runs",
        run,
        adv(EnclaveId::Invalid, AdversaryAction::Observe),
        OpError::NotOs,
    );
    case(
        "tamper a protected page",
        os,
        adv(id(3), AdversaryAction::TamperMem { pa: 8, word: 1 }),
        OpError::ProtectedTarget,
    );
    case(
        "tamper an enclave page with no enclave singled out",
        os,
        adv(
            EnclaveId::Invalid,
            AdversaryAction::TamperMem { pa: 0, word: 1 },
        ),
        OpError::ProtectedTarget,
    );
    case(
        "tamper with an over-wide word",
        os,
        adv(
            EnclaveId::Invalid,
            AdversaryAction::TamperMem {
                pa: 12,
                word: 0x100,
            },
        ),
        OpError::BadArguments,
    );
    case(
        "nested adversary call",
        os,
        adv(
            EnclaveId::Invalid,
            AdversaryAction::CallOp(alloc::boxed::Box::new(Action::AdversaryStep {
                protected: EnclaveId::Invalid,
                act: AdversaryAction::Observe,
            })),
        ),
        OpError::BadArguments,
    );
    case(
        "adversary call that fails",
        os,
        adv(
            EnclaveId::Invalid,
            AdversaryAction::CallOp(alloc::boxed::Box::new(Action::Destroy(id(1)))),
        ),
        OpError::SnapshotHasChildren,
    );

    case(
        "OS write while an enclave runs",
        run,
        Step::OsWrite {
            pa: 12,
            words: vec![1],
        },
        OpError::NotOs,
    );
    case(
        "OS write past the last page",
        os,
        Step::OsWrite {
            pa: 15,
            words: vec![1, 2],
        },
        OpError::BadArguments,
    );
    case(
        "OS write of an over-wide word",
        os,
        Step::OsWrite {
            pa: 12,
            words: vec![0x100],
        },
        OpError::BadArguments,
    );
    case(
        "OS write to an enclave page",
        os,
        Step::OsWrite {
            pa: 11,
            words: vec![1],
        },
        OpError::PageNotOsOwned,
    );
    case(
        "input for the OS",
        os,
        Step::Input {
            id: EnclaveId::Os,
            words: vec![1],
        },
        OpError::InvalidId,
    );
    case(
        "input for an out-of-range id",
        os,
        Step::Input {
            id: id(9),
            words: vec![1],
        },
        OpError::BadArguments,
    );
    out
}

/// Runs every case on `p` (which must use [`revert_config`]).
pub fn check_atomic_revert(p: &Platform, cases: &[RevertCase]) -> RevertReport {
    let mut r = RevertReport::default();
    for c in cases {
        r.cases += 1;
        let before = c.state.canonical_bytes(&p.cfg);
        let mut s = c.state.clone();
        let got = p.execute_in_place(&mut s, &c.step);
        if got != Err(c.expected) {
            r.failures.push(format!(
                "{}: expected {}, got {got:?}",
                c.name,
                c.expected.name()
            ));
            continue;
        }
        if s.canonical_bytes(&p.cfg) != before || s != c.state {
            r.failures.push(format!("{}: state changed", c.name));
            continue;
        }
        r.covered.insert(c.expected.name());
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_covers_every_code() {
        let p = Platform::new(revert_config());
        let r = check_atomic_revert(&p, &revert_cases());
        assert!(r.all_pass(), "{:?}", r.failures);
        assert!(r.uncovered().is_empty(), "{:?}", r.uncovered());
    }
}
