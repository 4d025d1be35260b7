// SPDX-License-Identifier: Apache-2.0

mod common;

use common::*;
use tapc_core::machine::{decode, encode, Instruction::*};
use tapc_core::*;

#[test]
fn load_immediate_then_add() {
    let p = Platform::new(cfg());
    let mut s = p.initial_state();
    load(
        &p,
        &mut s,
        1,
        0,
        &[
            LoadI { r: 0, imm: 7 },
            Add { dst: 0, src: 0 },
            Out { r: 0 },
            Exit,
        ],
        &[],
    );
    ok(&p, &mut s, Action::Enter(id(1)));
    step(&p, &mut s);
    step(&p, &mut s);
    assert_eq!(s.regs[0], 14);
    assert_eq!(step(&p, &mut s), StepOutcome::Output(14));
    assert_eq!(step(&p, &mut s), StepOutcome::Exited);
    assert_eq!(s.output_tapes[1], vec![14]);
    assert_eq!(s.current, EnclaveId::Os);
}

#[test]
fn store_without_write_permission_faults() {
    let p = Platform::new(cfg());
    let mut s = p.initial_state();
    // address 1 is code: readable and executable, not writable
    load(&p, &mut s, 1, 0, &[Store { r: 0, va: 1 }], &[]);
    ok(&p, &mut s, Action::Enter(id(1)));
    let view = s.project_enclave(id(1)).unwrap();
    let mem = s.mem.clone();
    assert_eq!(step(&p, &mut s), StepOutcome::Fault(FaultCode::PermDenied));
    assert_eq!(s.current, EnclaveId::Os);
    assert_eq!(s.mem, mem);
    let m = s.meta_of(id(1)).unwrap();
    assert!(m.paused);
    assert_eq!(m.pc, view.pc);
    assert_eq!(m.regs, view.regs);
}

#[test]
fn input_exhausted() {
    let p = Platform::new(cfg());
    let mut s = p.initial_state();
    load(&p, &mut s, 1, 0, &[In { r: 1 }, In { r: 1 }], &[]);
    ok(
        &p,
        &mut s,
        Step::Input {
            id: id(1),
            words: vec![5],
        },
    );
    ok(&p, &mut s, Action::Enter(id(1)));
    assert_eq!(step(&p, &mut s), StepOutcome::Continued);
    assert_eq!(s.regs[1], 5);
    assert_eq!(
        step(&p, &mut s),
        StepOutcome::Fault(FaultCode::InputExhausted)
    );
}

#[test]
fn copy_on_write_out_of_pages() {
    let p = Platform::new(cfg());
    let mut s = p.initial_state();
    ok(
        &p,
        &mut s,
        Step::OsWrite {
            pa: 3,
            words: vec![7],
        },
    );
    load(
        &p,
        &mut s,
        1,
        8,
        &[LoadI { r: 0, imm: 9 }, Store { r: 0, va: 7 }],
        &[(7, 3)],
    );
    ok(&p, &mut s, Action::Enter(id(1)));
    ok(&p, &mut s, Action::Snapshot);
    ok(
        &p,
        &mut s,
        Action::Clone {
            parent: id(1),
            child: id(2),
            pages: pages(&[]),
        },
    );
    ok(&p, &mut s, Action::Resume(id(2)));
    step(&p, &mut s);
    let before = s.project_enclave(id(2)).unwrap();
    let mem = s.mem.clone();
    assert_eq!(step(&p, &mut s), StepOutcome::Fault(FaultCode::Oom));
    assert_eq!(s.mem, mem);
    assert_eq!(s.current, EnclaveId::Os);
    let m = s.meta_of(id(2)).unwrap();
    assert_eq!(m.page_table, before.page_table);
    assert_eq!((m.pc, &m.regs), (before.pc, &before.regs));
}

#[test]
fn snapshot_instruction_freezes_the_enclave() {
    let p = Platform::new(cfg());
    let mut s = p.initial_state();
    load(
        &p,
        &mut s,
        1,
        0,
        &[LoadI { r: 0, imm: 3 }, Snap, Out { r: 0 }],
        &[],
    );
    ok(&p, &mut s, Action::Enter(id(1)));
    step(&p, &mut s);
    assert_eq!(step(&p, &mut s), StepOutcome::Snapshotted);
    assert!(s.meta_of(id(1)).unwrap().is_snapshot);
    ok(
        &p,
        &mut s,
        Action::Clone {
            parent: id(1),
            child: id(2),
            pages: pages(&[]),
        },
    );
    ok(&p, &mut s, Action::Resume(id(2)));
    // the clone continues after SNAP with the saved registers
    assert_eq!(step(&p, &mut s), StepOutcome::Output(3));
}

#[test]
fn failing_snap_keeps_running() {
    let p = Platform::new(cfg());
    let mut s = p.initial_state();
    load(&p, &mut s, 1, 0, &[Snap, Exit], &[]);
    ok(&p, &mut s, Action::Enter(id(1)));
    ok(&p, &mut s, Action::Snapshot);
    ok(
        &p,
        &mut s,
        Action::Clone {
            parent: id(1),
            child: id(2),
            pages: pages(&[]),
        },
    );
    ok(&p, &mut s, Action::Resume(id(2)));
    fails(&p, &mut s, Action::EnclaveStep, OpError::HasRootSnapshot);
    assert_eq!(s.current, id(2));
}

#[test]
fn decode_examples() {
    let c = cfg();
    assert_eq!(decode(&c, 0x01, 7 << 4), Ok(LoadI { r: 0, imm: 7 }));
    assert_eq!(decode(&c, 0xff, 0), Err(FaultCode::BadInstr));
    for op in 1..=9u32 {
        for operand in 0..=0xffu32 {
            if let Ok(i) = decode(&c, op, operand) {
                assert_eq!(encode(&i), (op, operand));
            }
        }
    }
}
