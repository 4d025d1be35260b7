// SPDX-License-Identifier: Apache-2.0

//! Lifecycle operations on hand-built scenarios.

mod common;

use common::*;
use tapc_core::machine::Instruction::*;
use tapc_core::*;

fn platform() -> Platform {
    Platform::new(cfg())
}

#[test]
fn enter_before_any_launch() {
    let p = platform();
    let mut s = p.initial_state();
    fails(&p, &mut s, Action::Enter(id(1)), OpError::NotActive);
}

#[test]
fn launch_with_bad_entrypoint_index() {
    let p = platform();
    let mut s = p.initial_state();
    let Action::Launch(mut a) = launch(&p.cfg, 1, 0, &[(0, 2, Perm::RX)], &[2]) else {
        unreachable!()
    };
    a.ep = p.cfg.n_va;
    fails(&p, &mut s, Action::Launch(a), OpError::BadArguments);
}

#[test]
fn apply_is_deterministic() {
    let p = platform();
    let s = p.initial_state();
    let a = launch(&p.cfg, 1, 0, &[(0, 2, Perm::RX), (1, 3, Perm::RW)], &[2, 3]);
    assert_eq!(p.apply(&s, &a), p.apply(&s, &a));
}

#[test]
fn launch_assigns_pages() {
    let p = platform();
    let mut s = p.initial_state();
    let a = launch(&p.cfg, 1, 0, &[(0, 2, Perm::RX), (1, 3, Perm::RW)], &[2, 3]);
    ok(&p, &mut s, a.clone());
    assert_eq!(s.owner[2], id(1));
    assert_eq!(s.owner[3], id(1));
    let m = s.meta_of(id(1)).unwrap();
    assert!(m.active && !m.paused && !m.is_snapshot);
    assert_eq!(m.root_snapshot, EnclaveId::Invalid);
    assert!(m.measurement.is_some());
    assert_eq!(s.current, EnclaveId::Os);
    fails(&p, &mut s, a, OpError::AlreadyActive);
}

#[test]
fn launch_map_outside_pages() {
    let p = platform();
    let mut s = p.initial_state();
    let a = launch(&p.cfg, 1, 0, &[(0, 2, Perm::RX), (1, 3, Perm::RW)], &[2]);
    fails(&p, &mut s, a, OpError::BadArguments);
    // aliasing two private addresses onto one page
    let a = launch(&p.cfg, 1, 0, &[(0, 2, Perm::RX), (1, 2, Perm::RW)], &[2]);
    fails(&p, &mut s, a, OpError::BadArguments);
    // entrypoint not executable
    let a = launch(&p.cfg, 1, 1, &[(0, 2, Perm::RX), (1, 3, Perm::RW)], &[2, 3]);
    fails(&p, &mut s, a, OpError::BadArguments);
}

#[test]
fn enter_pause_resume_round_trip() {
    let p = platform();
    let mut s = p.initial_state();
    load(
        &p,
        &mut s,
        1,
        0,
        &[LoadI { r: 0, imm: 7 }, Add { dst: 0, src: 0 }, Exit],
        &[],
    );
    ok(&p, &mut s, Action::Enter(id(1)));
    assert_eq!(step(&p, &mut s), StepOutcome::Continued);
    ok(&p, &mut s, Action::Pause);
    assert_eq!(s.current, EnclaveId::Os);
    let saved = s.meta_of(id(1)).unwrap().pc;
    assert_eq!(saved, 2);
    fails(&p, &mut s, Action::Enter(id(1)), OpError::BadArguments);
    ok(&p, &mut s, Action::Resume(id(1)));
    assert_eq!(s.pc, saved);
    assert_eq!(s.regs[0], 7);
    ok(&p, &mut s, Action::Exit);
    fails(&p, &mut s, Action::Resume(id(1)), OpError::NotPaused);
    // exit restarts from the entrypoint
    ok(&p, &mut s, Action::Enter(id(1)));
    assert_eq!(s.pc, 0);
}

/// Enclave 1 with code at pages 8.. and a private data page 3 holding 7,
/// frozen as a snapshot before it runs.
fn snapshot_family() -> (Platform, PlatformState) {
    let p = platform();
    let mut s = p.initial_state();
    ok(
        &p,
        &mut s,
        Step::OsWrite {
            pa: 3,
            words: vec![7],
        },
    );
    let prog = [
        LoadI { r: 0, imm: 9 },
        Store { r: 0, va: 7 },
        Store { r: 0, va: 7 },
    ];
    load(&p, &mut s, 1, 8, &prog, &[(7, 3)]);
    fails(&p, &mut s, Action::Snapshot, OpError::NotEnclave);
    ok(&p, &mut s, Action::Enter(id(1)));
    ok(&p, &mut s, Action::Snapshot);
    assert!(s.meta_of(id(1)).unwrap().is_snapshot);
    assert_eq!(s.current, EnclaveId::Os);
    fails(&p, &mut s, Action::Enter(id(1)), OpError::IsSnapshot);
    fails(&p, &mut s, Action::Resume(id(1)), OpError::IsSnapshot);
    (p, s)
}

#[test]
fn clone_of_snapshot_shares_everything() {
    let (p, mut s) = snapshot_family();
    assert!(p.sufficient_mem(&s, id(1), &pages(&[4, 5])));
    fails(
        &p,
        &mut s,
        Action::Clone {
            parent: id(1),
            child: id(1),
            pages: pages(&[4]),
        },
        OpError::SelfClone,
    );
    let n = copied(ok(
        &p,
        &mut s,
        Action::Clone {
            parent: id(1),
            child: id(2),
            pages: pages(&[4, 5]),
        },
    ));
    assert_eq!(n, 0);
    let (m1, m2) = (s.meta_of(id(1)).unwrap(), s.meta_of(id(2)).unwrap());
    assert_eq!(m2.page_table, m1.page_table);
    assert_eq!(m2.root_snapshot, id(1));
    assert_eq!(m1.child_count, 1);
    assert_eq!(m2.measurement, m1.measurement);
    let free: Vec<usize> = (0..16).filter(|&q| m2.pa_free[q]).collect();
    assert_eq!(free, vec![4, 5]);
    assert_eq!(s.project_enclave(id(1)), s.project_enclave(id(2)));
}

#[test]
fn copy_on_write_then_second_level_clone() {
    let (p, mut s) = snapshot_family();
    ok(
        &p,
        &mut s,
        Action::Clone {
            parent: id(1),
            child: id(2),
            pages: pages(&[4, 5]),
        },
    );
    ok(&p, &mut s, Action::Resume(id(2)));
    assert_eq!(step(&p, &mut s), StepOutcome::Continued);
    // first store: the snapshot page is copied to the lowest free page
    assert_eq!(step(&p, &mut s), StepOutcome::Continued);
    assert_eq!(s.mem[4], 9);
    assert_eq!(s.mem[3], 7);
    assert_eq!(s.page_table.get(7).unwrap().pa, 4);
    assert_eq!(s.meta_of(id(2)).unwrap().page_table.get(7).unwrap().pa, 4);
    assert!(!s.meta_of(id(2)).unwrap().pa_free[4]);
    // second store: already private, no further copy
    assert_eq!(step(&p, &mut s), StepOutcome::Continued);
    assert!(s.meta_of(id(2)).unwrap().pa_free[5]);
    // running off the code faults and hands control back
    assert_eq!(step(&p, &mut s), StepOutcome::Fault(FaultCode::Unmapped));
    assert_eq!(s.current, EnclaveId::Os);

    // RS stays the snapshot; only the diverged page is copied
    let n = copied(ok(
        &p,
        &mut s,
        Action::Clone {
            parent: id(2),
            child: id(3),
            pages: pages(&[6, 7]),
        },
    ));
    assert_eq!(n, 1);
    assert_eq!(s.meta_of(id(3)).unwrap().root_snapshot, id(1));
    assert_eq!(s.meta_of(id(1)).unwrap().child_count, 2);
    let a = s.project_enclave(id(2)).unwrap().virtual_only();
    let b = s.project_enclave(id(3)).unwrap().virtual_only();
    assert_eq!(a, b);

    // a snapshot descendant cannot snapshot
    ok(&p, &mut s, Action::Resume(id(3)));
    fails(&p, &mut s, Action::Snapshot, OpError::HasRootSnapshot);
    ok(&p, &mut s, Action::Pause);

    fails(
        &p,
        &mut s,
        Action::Destroy(id(1)),
        OpError::SnapshotHasChildren,
    );
    ok(&p, &mut s, Action::Destroy(id(2)));
    assert_eq!(s.meta_of(id(1)).unwrap().child_count, 1);
    assert_eq!(s.owner[4], EnclaveId::Os);
    assert_eq!(s.mem[4], 0);
    ok(&p, &mut s, Action::Destroy(id(3)));
    ok(&p, &mut s, Action::Destroy(id(1)));
    assert_eq!(s, PlatformState::new(&p.cfg));
}

#[test]
fn sufficient_mem_of_plain_parent() {
    let p = platform();
    let mut s = p.initial_state();
    let map = [(0, 2, Perm::RX), (1, 3, Perm::RW), (2, 4, Perm::RW)];
    ok(&p, &mut s, launch(&p.cfg, 1, 0, &map, &[2, 3, 4]));
    assert!(!p.sufficient_mem(&s, id(1), &pages(&[8, 9])));
    assert!(p.sufficient_mem(&s, id(1), &pages(&[8, 9, 10])));
    fails(
        &p,
        &mut s,
        Action::Clone {
            parent: id(1),
            child: id(2),
            pages: pages(&[8, 9]),
        },
        OpError::InsufficientMemory,
    );
    // a plain clone is a full copy with no root snapshot
    let n = copied(ok(
        &p,
        &mut s,
        Action::Clone {
            parent: id(1),
            child: id(2),
            pages: pages(&[8, 9, 10]),
        },
    ));
    assert_eq!(n, 3);
    let m2 = s.meta_of(id(2)).unwrap();
    assert_eq!(m2.root_snapshot, EnclaveId::Invalid);
    let remapped: Vec<usize> = m2.private_mapped().map(|(_, pte)| pte.pa).collect();
    assert_eq!(remapped, vec![8, 9, 10]);
    assert_eq!(
        s.project_enclave(id(1)).unwrap().virtual_only(),
        s.project_enclave(id(2)).unwrap().virtual_only()
    );
    // the parent may still snapshot later
    ok(&p, &mut s, Action::Enter(id(1)));
    ok(&p, &mut s, Action::Snapshot);
}

#[test]
fn eager_policy_copies_every_private_page() {
    let (_, s) = snapshot_family();
    let eager = Platform::eager(cfg());
    let mut t = s.clone();
    let n = copied(ok(
        &eager,
        &mut t,
        Action::Clone {
            parent: id(1),
            child: id(2),
            pages: pages(&[0, 1, 2, 4, 5, 6, 7]),
        },
    ));
    assert_eq!(n, 7);
}
