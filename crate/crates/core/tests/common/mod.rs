// SPDX-License-Identifier: Apache-2.0

#![allow(dead_code)]

use std::collections::BTreeSet;

use tapc_core::machine::{encode, Instruction};
use tapc_core::*;

/// 8 addresses, 16 pages, 2 registers, byte words, 3 enclave ids.
pub fn cfg() -> PlatformConfig {
    PlatformConfig::new(8, 16, 2, 8, 3).unwrap()
}

pub fn id(i: u8) -> EnclaveId {
    EnclaveId::Id(i)
}

pub fn pages(p: &[usize]) -> BTreeSet<usize> {
    p.iter().copied().collect()
}

/// Launch arguments with every mapped address private.
pub fn launch(
    cfg: &PlatformConfig,
    e: u8,
    ep: usize,
    map: &[(usize, usize, Perm)],
    owned: &[usize],
) -> Action {
    let mut page_table = PageTable::empty(cfg.n_va);
    let mut private = vec![false; cfg.n_va];
    for &(va, pa, perm) in map {
        page_table.set(va, Some(Pte { pa, perm }));
        private[va] = true;
    }
    Action::Launch(LaunchArgs {
        id: id(e),
        ep,
        page_table,
        private,
        pages: pages(owned),
    })
}

pub fn image(program: &[Instruction]) -> Vec<Word> {
    program
        .iter()
        .flat_map(|i| {
            let (a, b) = encode(i);
            [a, b]
        })
        .collect()
}

/// Writes `program` at `base` and launches enclave `e` with the code at
/// addresses `0..` (RX) and `data` as `(va, pa)` RW pages.
pub fn load(
    p: &Platform,
    s: &mut PlatformState,
    e: u8,
    base: usize,
    program: &[Instruction],
    data: &[(usize, usize)],
) {
    let words = image(program);
    ok(
        p,
        s,
        Step::OsWrite {
            pa: base,
            words: words.clone(),
        },
    );
    let mut map: Vec<(usize, usize, Perm)> =
        (0..words.len()).map(|i| (i, base + i, Perm::RX)).collect();
    map.extend(data.iter().map(|&(va, pa)| (va, pa, Perm::RW)));
    let owned: Vec<usize> = map.iter().map(|m| m.1).collect();
    ok(p, s, launch(&p.cfg, e, 0, &map, &owned));
}

pub fn ok(p: &Platform, s: &mut PlatformState, step: impl Into<Step>) -> Effect {
    let step = step.into();
    match p.execute_in_place(s, &step) {
        Ok(e) => e,
        Err(e) => panic!("{step:?} failed: {e}"),
    }
}

/// Asserts `step` fails with `want` and leaves the state byte-identical.
pub fn fails(p: &Platform, s: &mut PlatformState, step: impl Into<Step>, want: OpError) {
    let step = step.into();
    let before = s.clone();
    let bytes = s.canonical_bytes(&p.cfg);
    assert_eq!(p.execute_in_place(s, &step), Err(want), "{step:?}");
    assert_eq!(
        s.canonical_bytes(&p.cfg),
        bytes,
        "{step:?} changed the state"
    );
    assert_eq!(*s, before);
}

pub fn step(p: &Platform, s: &mut PlatformState) -> StepOutcome {
    match ok(p, s, Action::EnclaveStep) {
        Effect::Step(o) => o,
        other => panic!("unexpected {other:?}"),
    }
}

pub fn copied(e: Effect) -> usize {
    match e {
        Effect::Cloned { pages_copied } => pages_copied,
        other => panic!("unexpected {other:?}"),
    }
}
