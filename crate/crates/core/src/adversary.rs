// SPDX-License-Identifier: Apache-2.0

//! The havocing adversary.
//!
//! Havoc is an explicit, enumerable list of actions so that runs can be
//! replayed exactly: memory tampering outside the protected set, rewrites
//! of the OS page table, arbitrary operation calls, and observation.

use alloc::boxed::Box;
use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;

use crate::config::{PlatformConfig, Word};
use crate::machine::{encode, Instruction};
use crate::ops::{Action, Effect, LaunchArgs, OpError, OpResult, Platform};
use crate::rng::SplitMix64;
use crate::state::{EnclaveId, PageTable, Perm, PlatformState, Pte};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum AdversaryAction {
    TamperMem { pa: usize, word: Word },
    TamperOsPageTable { va: usize, pa: usize, perm: Perm },
    CallOp(Box<Action>),
    Observe,
}

/// Executes one adversary action while the OS runs.
///
/// `protected` selects the tamper/observe boundary: a valid id protects
/// that enclave's protected set; a sentinel protects every enclave page.
pub fn adversary_execute(
    p: &Platform,
    s: &mut PlatformState,
    protected: EnclaveId,
    act: &AdversaryAction,
) -> OpResult {
    if s.current != EnclaveId::Os {
        return Err(OpError::NotOs);
    }
    match act {
        AdversaryAction::TamperMem { pa, word } => {
            if !p.tamper_allowed(s, protected, *pa) {
                return Err(OpError::ProtectedTarget);
            }
            s.mem[*pa] = *word;
            Ok(Effect::Done)
        }
        AdversaryAction::TamperOsPageTable { va, pa, perm } => {
            s.page_table.set(
                *va,
                Some(Pte {
                    pa: *pa,
                    perm: *perm,
                }),
            );
            Ok(Effect::Done)
        }
        AdversaryAction::CallOp(a) => p.apply_in_place(s, a),
        AdversaryAction::Observe => Ok(Effect::Observed(p.observe(s, protected))),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdversarySchedule {
    pub seed: u64,
    pub actions: Vec<AdversaryAction>,
}

/// Knobs for schedule generation beyond the uniform defaults.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ScheduleParams {
    /// Fixed size for `Clone` page sets; uniform in `0..=n_va` when unset.
    pub clone_pages: Option<usize>,
}

/// Deterministic schedule of `len` adversary actions.
///
/// Top-level variants are uniform; `CallOp` picks uniformly among the nine
/// operations. Arguments are drawn so that a useful fraction is
/// well-formed (launch maps into a contiguous page window, tampering
/// writes instruction-shaped words) while every in-range value stays
/// reachable.
pub fn generate_schedule(seed: u64, cfg: &PlatformConfig, len: usize) -> AdversarySchedule {
    generate_schedule_with(seed, cfg, len, ScheduleParams::default())
}

pub fn generate_schedule_with(
    seed: u64,
    cfg: &PlatformConfig,
    len: usize,
    params: ScheduleParams,
) -> AdversarySchedule {
    let mut rng = SplitMix64::new(seed);
    let mut actions = Vec::with_capacity(len + 1);
    while actions.len() < len {
        gen_action(&mut rng, cfg, &params, &mut actions);
    }
    actions.truncate(len);
    AdversarySchedule { seed, actions }
}

fn gen_action(
    rng: &mut SplitMix64,
    cfg: &PlatformConfig,
    params: &ScheduleParams,
    out: &mut Vec<AdversaryAction>,
) {
    match rng.below(4) {
        0 => match rng.below(3) {
            0 => out.push(AdversaryAction::TamperMem {
                pa: rng.below(cfg.n_pa),
                word: random_word(rng, cfg),
            }),
            1 if cfg.n_pa >= 2 => {
                // an instruction planted at two consecutive pages
                let pa = rng.below(cfg.n_pa - 1);
                let (w0, w1) = encode(&random_instruction(rng, cfg));
                out.push(AdversaryAction::TamperMem { pa, word: w0 });
                out.push(AdversaryAction::TamperMem {
                    pa: pa + 1,
                    word: w1,
                });
            }
            _ => plant_enclave(rng, cfg, out),
        },
        1 => out.push(AdversaryAction::TamperOsPageTable {
            va: rng.below(cfg.n_va),
            pa: rng.below(cfg.n_pa),
            perm: Perm::from_bits(rng.below(8) as u8),
        }),
        2 => out.push(AdversaryAction::CallOp(Box::new(random_op(
            rng, cfg, params,
        )))),
        _ => out.push(AdversaryAction::Observe),
    }
}

pub(crate) fn random_id(rng: &mut SplitMix64, cfg: &PlatformConfig) -> EnclaveId {
    EnclaveId::Id(1 + rng.below(cfg.max_enclaves) as u8)
}

/// A third opcodes, a third well-formed operands, a third uniform words.
pub(crate) fn random_word(rng: &mut SplitMix64, cfg: &PlatformConfig) -> Word {
    match rng.below(3) {
        0 => 1 + rng.below(9) as Word,
        1 => (rng.below(cfg.n_regs) | rng.below(cfg.n_va) << 4) as Word,
        _ => (rng.next_u64() as Word) & cfg.word_mask(),
    }
}

pub(crate) fn random_instruction(rng: &mut SplitMix64, cfg: &PlatformConfig) -> Instruction {
    let r = rng.below(cfg.n_regs);
    let va = rng.below(cfg.n_va);
    match rng.below(9) {
        0 => Instruction::LoadI {
            r,
            imm: rng.below(cfg.operand_field_limit()) as Word,
        },
        1 => Instruction::Load { r, va },
        2 => Instruction::Store { r, va },
        3 => Instruction::Add {
            dst: r,
            src: rng.below(cfg.n_regs),
        },
        4 => Instruction::Jnz { r, va },
        5 => Instruction::In { r },
        6 => Instruction::Out { r },
        7 => Instruction::Snap,
        _ => Instruction::Exit,
    }
}

fn random_pages(rng: &mut SplitMix64, cfg: &PlatformConfig, n: usize) -> BTreeSet<usize> {
    let base = rng.below(cfg.n_pa);
    (0..n.min(cfg.n_pa))
        .map(|i| (base + i) % cfg.n_pa)
        .collect()
}

/// Plants a short program at consecutive pages, launches an enclave over
/// it and enters it. Public addresses of the new enclave point anywhere,
/// so its stores probe the ownership checks.
fn plant_enclave(rng: &mut SplitMix64, cfg: &PlatformConfig, out: &mut Vec<AdversaryAction>) {
    let max_ins = (cfg.n_va / 2).min(cfg.n_pa / 2).min(3);
    if max_ins == 0 {
        out.push(AdversaryAction::Observe);
        return;
    }
    let n = 2 * (1 + rng.below(max_ins));
    let base = rng.below(cfg.n_pa - n + 1);
    for i in 0..n / 2 {
        let (w0, w1) = encode(&random_instruction(rng, cfg));
        out.push(AdversaryAction::TamperMem {
            pa: base + 2 * i,
            word: w0,
        });
        out.push(AdversaryAction::TamperMem {
            pa: base + 2 * i + 1,
            word: w1,
        });
    }
    let id = random_id(rng, cfg);
    let mut page_table = PageTable::empty(cfg.n_va);
    let mut private = vec![false; cfg.n_va];
    for va in 0..cfg.n_va {
        if va < n {
            private[va] = true;
            page_table.set(
                va,
                Some(Pte {
                    pa: base + va,
                    perm: Perm::RWX,
                }),
            );
        } else if rng.coin() {
            let perm = [Perm::R, Perm::RW][rng.below(2)];
            page_table.set(
                va,
                Some(Pte {
                    pa: rng.below(cfg.n_pa),
                    perm,
                }),
            );
        }
    }
    let args = LaunchArgs {
        id,
        ep: 0,
        page_table,
        private,
        pages: (base..base + n).collect(),
    };
    out.push(AdversaryAction::CallOp(Box::new(Action::Launch(args))));
    out.push(AdversaryAction::CallOp(Box::new(Action::Enter(id))));
}

fn random_launch(rng: &mut SplitMix64, cfg: &PlatformConfig) -> LaunchArgs {
    let id = random_id(rng, cfg);
    let mut page_table = PageTable::empty(cfg.n_va);
    let mut private = vec![false; cfg.n_va];
    if rng.chance(1, 16) {
        // unconstrained arguments
        for va in 0..cfg.n_va {
            private[va] = rng.coin();
            if rng.coin() {
                page_table.set(
                    va,
                    Some(Pte {
                        pa: rng.below(cfg.n_pa),
                        perm: Perm::from_bits(rng.below(8) as u8),
                    }),
                );
            }
        }
        let pages = (0..cfg.n_pa).filter(|_| rng.coin()).collect();
        return LaunchArgs {
            id,
            ep: rng.below(cfg.n_va),
            page_table,
            private,
            pages,
        };
    }
    let k = 1 + rng.below(cfg.n_va);
    let base = rng.below(cfg.n_pa);
    let mut pages = BTreeSet::new();
    for va in 0..cfg.n_va {
        if va < k {
            private[va] = true;
            let perm = if va < 2 {
                [Perm::RX, Perm::RWX][rng.below(2)]
            } else {
                [Perm::R, Perm::RW, Perm::RWX, Perm::RX][rng.below(4)]
            };
            let pa = (base + va) % cfg.n_pa;
            pages.insert(pa);
            page_table.set(va, Some(Pte { pa, perm }));
        } else if rng.coin() {
            page_table.set(
                va,
                Some(Pte {
                    pa: rng.below(cfg.n_pa),
                    perm: [Perm::R, Perm::RW][rng.below(2)],
                }),
            );
        }
    }
    LaunchArgs {
        id,
        ep: 0,
        page_table,
        private,
        pages,
    }
}

fn random_op(rng: &mut SplitMix64, cfg: &PlatformConfig, params: &ScheduleParams) -> Action {
    match rng.below(9) {
        0 => Action::Launch(random_launch(rng, cfg)),
        1 => Action::Destroy(random_id(rng, cfg)),
        2 => Action::Enter(random_id(rng, cfg)),
        3 => Action::Exit,
        4 => Action::Pause,
        5 => Action::Resume(random_id(rng, cfg)),
        6 => Action::Snapshot,
        7 => {
            let n = params
                .clone_pages
                .unwrap_or_else(|| rng.below(cfg.n_va + 1));
            Action::Clone {
                parent: random_id(rng, cfg),
                child: random_id(rng, cfg),
                pages: random_pages(rng, cfg, n),
            }
        }
        _ => Action::EnclaveStep,
    }
}

/// Replaces roughly half of the tampered words with fresh ones drawn from
/// `seed`, leaving writes to the `fixed` pages alone. Used to give the
/// second trace of an integrity run a different adversary while keeping
/// the operation skeleton identical.
pub fn perturb_tampering(
    schedule: &AdversarySchedule,
    cfg: &PlatformConfig,
    seed: u64,
    fixed: &[usize],
) -> AdversarySchedule {
    let mut rng = SplitMix64::new(seed);
    let actions = schedule
        .actions
        .iter()
        .map(|a| match a {
            AdversaryAction::TamperMem { pa, word } if !fixed.contains(pa) => {
                let word = if rng.coin() {
                    random_word(&mut rng, cfg)
                } else {
                    *word
                };
                AdversaryAction::TamperMem { pa: *pa, word }
            }
            other => other.clone(),
        })
        .collect();
    AdversarySchedule {
        seed: schedule.seed,
        actions,
    }
}

/// Swaps two enclave ids everywhere in an action.
pub fn swap_ids(a: &Action, x: EnclaveId, y: EnclaveId) -> Action {
    let sw = |e: EnclaveId| {
        if e == x {
            y
        } else if e == y {
            x
        } else {
            e
        }
    };
    match a {
        Action::Launch(args) => Action::Launch(LaunchArgs {
            id: sw(args.id),
            ..args.clone()
        }),
        Action::Destroy(e) => Action::Destroy(sw(*e)),
        Action::Enter(e) => Action::Enter(sw(*e)),
        Action::Resume(e) => Action::Resume(sw(*e)),
        Action::Clone {
            parent,
            child,
            pages,
        } => Action::Clone {
            parent: sw(*parent),
            child: sw(*child),
            pages: pages.clone(),
        },
        Action::AdversaryStep { protected, act } => Action::AdversaryStep {
            protected: sw(*protected),
            act: match act {
                AdversaryAction::CallOp(inner) => {
                    AdversaryAction::CallOp(Box::new(swap_ids(inner, x, y)))
                }
                other => other.clone(),
            },
        },
        other => other.clone(),
    }
}
