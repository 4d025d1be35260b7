// SPDX-License-Identifier: Apache-2.0

//! Protected programs for the two-trace harness.
//!
//! The protected enclave uses a fixed layout: private addresses
//! `0..n_va-1` are backed by the same-numbered pages, the last virtual
//! address is a read-only window onto the last physical page (the
//! public input), and the private range is split into code, two data
//! words and one secret word:
//!
//! ```text
//! va:  0 .. n_va-4   n_va-4  n_va-3   n_va-2   n_va-1
//!      code (rx)     data (rw)        secret   public (r, pa n_pa-1)
//! ```

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;

use crate::config::{PlatformConfig, Word};
use crate::machine::{encode, Instruction};
use crate::ops::{Action, LaunchArgs, Step};
use crate::rng::SplitMix64;
use crate::state::{EnclaveId, PageTable, Perm, Pte};

/// Address plan of the protected enclave.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Layout {
    pub code_vas: usize,
    pub data: [usize; 2],
    pub secret: usize,
    pub public_va: usize,
    pub public_pa: usize,
}

impl Layout {
    /// `None` when the configuration is too small for the layout.
    pub fn for_config(cfg: &PlatformConfig) -> Option<Layout> {
        if cfg.n_va < 6 || cfg.n_pa < cfg.n_va + 1 || cfg.n_regs < 2 {
            return None;
        }
        let n = cfg.n_va;
        Some(Layout {
            code_vas: (n - 4) & !1,
            data: [n - 4, n - 3],
            secret: n - 2,
            public_va: n - 1,
            public_pa: cfg.n_pa - 1,
        })
    }

    pub fn private_vas(&self) -> usize {
        self.public_va
    }

    /// Physical pages of the protected enclave.
    pub fn pages(&self) -> BTreeSet<usize> {
        (0..self.private_vas()).collect()
    }

    pub fn launch_args(&self, cfg: &PlatformConfig, id: EnclaveId) -> LaunchArgs {
        let mut page_table = PageTable::empty(cfg.n_va);
        let mut private = vec![false; cfg.n_va];
        for va in 0..self.private_vas() {
            let perm = if va < self.data[0] {
                Perm::RX
            } else {
                Perm::RW
            };
            page_table.set(va, Some(Pte { pa: va, perm }));
            private[va] = true;
        }
        page_table.set(
            self.public_va,
            Some(Pte {
                pa: self.public_pa,
                perm: Perm::R,
            }),
        );
        LaunchArgs {
            id,
            ep: 0,
            page_table,
            private,
            pages: self.pages(),
        }
    }
}

/// Initial contents and inputs of one protected enclave.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Program {
    /// One word per private address.
    pub image: Vec<Word>,
    pub tape: Vec<Word>,
    /// Initial word on the public input page.
    pub public: Word,
}

impl Program {
    pub fn secret(&self, layout: &Layout) -> Word {
        self.image[layout.secret]
    }

    pub fn with_secret(&self, layout: &Layout, w: Word) -> Program {
        let mut p = self.clone();
        p.image[layout.secret] = w;
        p
    }

    /// Steps that stage memory and the input tape, then launch `id`.
    pub fn setup(&self, cfg: &PlatformConfig, layout: &Layout, id: EnclaveId) -> Vec<Step> {
        vec![
            Step::OsWrite {
                pa: 0,
                words: self.image.clone(),
            },
            Step::OsWrite {
                pa: layout.public_pa,
                words: vec![self.public],
            },
            Step::Input {
                id,
                words: self.tape.clone(),
            },
            Step::Act(Action::Launch(layout.launch_args(cfg, id))),
        ]
    }
}

/// How freely a generated program may use its secret.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Discipline {
    /// Any instruction sequence.
    Free,
    /// The secret never reaches a public register, a branch condition or
    /// an output; the last register is the only one allowed to hold it.
    SecretIsolated,
}

/// Random program over the protected layout.
pub fn random_program(
    rng: &mut SplitMix64,
    cfg: &PlatformConfig,
    layout: &Layout,
    discipline: Discipline,
) -> Program {
    let n_ins = layout.code_vas / 2;
    let mut image = Vec::with_capacity(layout.private_vas());
    for i in 0..n_ins {
        let ins = if i + 1 == n_ins {
            // close with an exit or a backwards branch on a public register
            if rng.coin() {
                Instruction::Exit
            } else {
                Instruction::Jnz {
                    r: rng.below(cfg.n_regs - 1),
                    va: 2 * rng.below(n_ins),
                }
            }
        } else {
            random_instruction(rng, cfg, layout, discipline)
        };
        let (w0, w1) = encode(&ins);
        image.push(w0);
        image.push(w1);
    }
    while image.len() < layout.private_vas() {
        image.push(word(rng, cfg));
    }
    let tape = (0..16).map(|_| word(rng, cfg)).collect();
    Program {
        image,
        tape,
        public: word(rng, cfg),
    }
}

fn word(rng: &mut SplitMix64, cfg: &PlatformConfig) -> Word {
    (rng.next_u64() as Word) & cfg.word_mask()
}

fn random_instruction(
    rng: &mut SplitMix64,
    cfg: &PlatformConfig,
    layout: &Layout,
    discipline: Discipline,
) -> Instruction {
    let secret_reg = cfg.n_regs - 1;
    let any_reg = |rng: &mut SplitMix64| rng.below(cfg.n_regs);
    let public_reg = |rng: &mut SplitMix64| match discipline {
        Discipline::Free => rng.below(cfg.n_regs),
        Discipline::SecretIsolated => rng.below(cfg.n_regs - 1),
    };
    let readable = [
        layout.data[0],
        layout.data[1],
        layout.secret,
        layout.public_va,
    ];
    let writable = [layout.data[0], layout.data[1], layout.secret];
    let isolated = discipline == Discipline::SecretIsolated;
    let imm_limit = cfg.operand_field_limit().min(cfg.word_mask() as usize + 1);
    match rng.below(10) {
        0 => Instruction::LoadI {
            r: any_reg(rng),
            imm: rng.below(imm_limit) as Word,
        },
        1 | 2 => {
            let va = readable[rng.below(readable.len())];
            let r = if isolated && va == layout.secret {
                secret_reg
            } else {
                any_reg(rng)
            };
            Instruction::Load { r, va }
        }
        3 | 4 => {
            let va = writable[rng.below(writable.len())];
            let r = if isolated && va != layout.secret {
                public_reg(rng)
            } else {
                any_reg(rng)
            };
            Instruction::Store { r, va }
        }
        5 => {
            let dst = any_reg(rng);
            let src = if isolated && dst != secret_reg {
                public_reg(rng)
            } else {
                any_reg(rng)
            };
            Instruction::Add { dst, src }
        }
        6 => Instruction::In { r: any_reg(rng) },
        7 => Instruction::Out { r: public_reg(rng) },
        8 => Instruction::Snap,
        _ => Instruction::Load {
            r: public_reg(rng),
            va: layout.public_va,
        },
    }
}
