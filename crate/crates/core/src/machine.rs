// SPDX-License-Identifier: Apache-2.0

//! A minimal deterministic instruction set for enclave steps.
//!
//! Instructions are two words: an opcode word and an operand word. The
//! operand packs a register index in its low nibble and a second field
//! (register, immediate or virtual address) in the remaining high bits.
//!
//! | opcode | mnemonic      | operand             |
//! |--------|---------------|---------------------|
//! | 0x01   | `LOADI r imm` | `r \| imm << 4`     |
//! | 0x02   | `LOAD r va`   | `r \| va << 4`      |
//! | 0x03   | `STORE r va`  | `r \| va << 4`      |
//! | 0x04   | `ADD rd rs`   | `rd \| rs << 4`     |
//! | 0x05   | `JNZ r va`    | `r \| va << 4`      |
//! | 0x06   | `IN r`        | `r`                 |
//! | 0x07   | `OUT r`       | `r`                 |
//! | 0x08   | `SNAP`        | `0`                 |
//! | 0x09   | `EXIT`        | `0`                 |

use core::fmt;

use crate::config::{PlatformConfig, Word, REG_FIELD_BITS};
use crate::ops::{Effect, Mutation, OpError, OpResult, Platform};
use crate::state::{EnclaveId, PlatformState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Instruction {
    LoadI { r: usize, imm: Word },
    Load { r: usize, va: usize },
    Store { r: usize, va: usize },
    Add { dst: usize, src: usize },
    Jnz { r: usize, va: usize },
    In { r: usize },
    Out { r: usize },
    Snap,
    Exit,
}

impl Instruction {
    pub const OPCODES: [Word; 9] = [1, 2, 3, 4, 5, 6, 7, 8, 9];
}

impl fmt::Display for Instruction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Instruction::LoadI { r, imm } => write!(f, "LOADI r{r} {imm}"),
            Instruction::Load { r, va } => write!(f, "LOAD r{r} {va}"),
            Instruction::Store { r, va } => write!(f, "STORE r{r} {va}"),
            Instruction::Add { dst, src } => write!(f, "ADD r{dst} r{src}"),
            Instruction::Jnz { r, va } => write!(f, "JNZ r{r} {va}"),
            Instruction::In { r } => write!(f, "IN r{r}"),
            Instruction::Out { r } => write!(f, "OUT r{r}"),
            Instruction::Snap => f.write_str("SNAP"),
            Instruction::Exit => f.write_str("EXIT"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FaultCode {
    PermDenied,
    Unmapped,
    Oom,
    BadInstr,
    InputExhausted,
}

impl FaultCode {
    pub fn name(self) -> &'static str {
        match self {
            FaultCode::PermDenied => "PermDenied",
            FaultCode::Unmapped => "Unmapped",
            FaultCode::Oom => "OOM",
            FaultCode::BadInstr => "BadInstr",
            FaultCode::InputExhausted => "InputExhausted",
        }
    }

    pub fn from_name(s: &str) -> Option<FaultCode> {
        [
            FaultCode::PermDenied,
            FaultCode::Unmapped,
            FaultCode::Oom,
            FaultCode::BadInstr,
            FaultCode::InputExhausted,
        ]
        .into_iter()
        .find(|c| c.name() == s)
    }
}

/// Result of one enclave step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StepOutcome {
    Continued,
    Output(Word),
    Exited,
    Snapshotted,
    /// The step was rolled back and the enclave paused at the faulting pc.
    Fault(FaultCode),
}

fn pack(a: usize, b: usize) -> Word {
    (a as Word) | ((b as Word) << REG_FIELD_BITS)
}

pub fn encode(ins: &Instruction) -> (Word, Word) {
    match *ins {
        Instruction::LoadI { r, imm } => (1, pack(r, imm as usize)),
        Instruction::Load { r, va } => (2, pack(r, va)),
        Instruction::Store { r, va } => (3, pack(r, va)),
        Instruction::Add { dst, src } => (4, pack(dst, src)),
        Instruction::Jnz { r, va } => (5, pack(r, va)),
        Instruction::In { r } => (6, pack(r, 0)),
        Instruction::Out { r } => (7, pack(r, 0)),
        Instruction::Snap => (8, 0),
        Instruction::Exit => (9, 0),
    }
}

/// Decodes an instruction. Unassigned opcodes, out-of-range fields and
/// non-zero unused fields are all `BadInstr`, which makes decoding
/// injective on its domain.
pub fn decode(cfg: &PlatformConfig, w0: Word, w1: Word) -> Result<Instruction, FaultCode> {
    if w1 & !cfg.word_mask() != 0 {
        return Err(FaultCode::BadInstr);
    }
    let a = (w1 & ((1 << REG_FIELD_BITS) - 1)) as usize;
    let b = (w1 >> REG_FIELD_BITS) as usize;
    let reg = |r: usize| {
        if r < cfg.n_regs {
            Ok(r)
        } else {
            Err(FaultCode::BadInstr)
        }
    };
    let va = |v: usize| {
        if v < cfg.n_va {
            Ok(v)
        } else {
            Err(FaultCode::BadInstr)
        }
    };
    let zero = |v: usize| {
        if v == 0 {
            Ok(())
        } else {
            Err(FaultCode::BadInstr)
        }
    };
    Ok(match w0 {
        1 => Instruction::LoadI {
            r: reg(a)?,
            imm: b as Word,
        },
        2 => Instruction::Load {
            r: reg(a)?,
            va: va(b)?,
        },
        3 => Instruction::Store {
            r: reg(a)?,
            va: va(b)?,
        },
        4 => Instruction::Add {
            dst: reg(a)?,
            src: reg(b)?,
        },
        5 => Instruction::Jnz {
            r: reg(a)?,
            va: va(b)?,
        },
        6 => {
            zero(b)?;
            Instruction::In { r: reg(a)? }
        }
        7 => {
            zero(b)?;
            Instruction::Out { r: reg(a)? }
        }
        8 => {
            zero(w1 as usize)?;
            Instruction::Snap
        }
        9 => {
            zero(w1 as usize)?;
            Instruction::Exit
        }
        _ => return Err(FaultCode::BadInstr),
    })
}

enum StepError {
    Fault(FaultCode),
    Op(OpError),
}

impl From<FaultCode> for StepError {
    fn from(f: FaultCode) -> Self {
        StepError::Fault(f)
    }
}

/// Executes one instruction of the running enclave.
///
/// A fault leaves the enclave exactly as before the step and then pauses
/// it, handing control to the OS. A failing `SNAP` is reverted and the
/// enclave keeps running; the error is reported as the result.
pub(crate) fn enclave_step(p: &Platform, s: &mut PlatformState) -> OpResult {
    let e = s.current;
    if !e.is_valid() {
        return Err(OpError::NotEnclave);
    }
    if s.meta[e.slot().unwrap()].is_snapshot {
        return Err(OpError::IsSnapshot);
    }
    match execute(p, s, e) {
        Ok(outcome) => Ok(Effect::Step(outcome)),
        Err(StepError::Fault(code)) => {
            p.pause(s).expect("enclave is running");
            Ok(Effect::Step(StepOutcome::Fault(code)))
        }
        Err(StepError::Op(err)) => Err(err),
    }
}

fn fetch(s: &PlatformState, e: EnclaveId, va: usize) -> Result<Word, FaultCode> {
    let pte = s.page_table.get(va).ok_or(FaultCode::Unmapped)?;
    let private = s.meta[e.slot().unwrap()].private[va];
    if !pte.perm.execute || !private || !s.in_protected_set(e, pte.pa) {
        return Err(FaultCode::PermDenied);
    }
    Ok(s.mem[pte.pa])
}

fn resolve_read(s: &PlatformState, e: EnclaveId, va: usize) -> Result<usize, FaultCode> {
    let pte = s.page_table.get(va).ok_or(FaultCode::Unmapped)?;
    if !pte.perm.read {
        return Err(FaultCode::PermDenied);
    }
    let private = s.meta[e.slot().unwrap()].private[va];
    let allowed = if private {
        s.in_protected_set(e, pte.pa)
    } else {
        s.owner[pte.pa] == EnclaveId::Os
    };
    if allowed {
        Ok(pte.pa)
    } else {
        Err(FaultCode::PermDenied)
    }
}

enum WriteTarget {
    Direct(usize),
    CopyOnWrite,
}

fn resolve_write(
    p: &Platform,
    s: &PlatformState,
    e: EnclaveId,
    va: usize,
) -> Result<WriteTarget, FaultCode> {
    let pte = s.page_table.get(va).ok_or(FaultCode::Unmapped)?;
    if !pte.perm.write {
        return Err(FaultCode::PermDenied);
    }
    let m = &s.meta[e.slot().unwrap()];
    let owner = s.owner[pte.pa];
    let skip_owner_check = p.mutated(Mutation::StoreSkipsOwnership);
    if m.private[va] {
        if owner.is_valid() && owner == m.root_snapshot {
            if p.mutated(Mutation::CowWritesShared) {
                return Ok(WriteTarget::Direct(pte.pa));
            }
            if m.lowest_free().is_none() {
                return Err(FaultCode::Oom);
            }
            return Ok(WriteTarget::CopyOnWrite);
        }
        if owner == e || skip_owner_check {
            return Ok(WriteTarget::Direct(pte.pa));
        }
    } else if owner == EnclaveId::Os || skip_owner_check {
        return Ok(WriteTarget::Direct(pte.pa));
    }
    Err(FaultCode::PermDenied)
}

/// Gives `e` a private copy of the snapshot page behind `va`: takes the
/// lowest free page, copies the word and remaps `va` (both in the
/// enclave's metadata and, if `e` is running, in the active page table).
///
/// Fails with `Oom` when no free page is left and with `PermDenied` when
/// `va` is not backed by a page of `e`'s root snapshot.
pub fn cow_fault(s: &mut PlatformState, e: EnclaveId, va: usize) -> Result<usize, FaultCode> {
    let slot = e
        .slot()
        .filter(|_| s.in_range(e))
        .ok_or(FaultCode::PermDenied)?;
    let m = &s.meta[slot];
    let mut pte = m.page_table.get(va).ok_or(FaultCode::Unmapped)?;
    let rs = m.root_snapshot;
    if !rs.is_valid() || s.owner[pte.pa] != rs {
        return Err(FaultCode::PermDenied);
    }
    let q = m.lowest_free().ok_or(FaultCode::Oom)?;
    let src = pte.pa;
    s.mem[q] = s.mem[src];
    pte.pa = q;
    let m = &mut s.meta[slot];
    m.pa_free[q] = false;
    m.page_table.set(va, Some(pte));
    if s.current == e {
        s.page_table.set(va, Some(pte));
    }
    Ok(q)
}

fn execute(p: &Platform, s: &mut PlatformState, e: EnclaveId) -> Result<StepOutcome, StepError> {
    let cfg = &p.cfg;
    let pc = s.pc;
    if pc + 1 >= cfg.n_va {
        return Err(FaultCode::Unmapped.into());
    }
    let w0 = fetch(s, e, pc)?;
    let w1 = fetch(s, e, pc + 1)?;
    let ins = decode(cfg, w0, w1)?;
    let next = pc + 2;
    let slot = e.slot().unwrap();
    let outcome = match ins {
        Instruction::LoadI { r, imm } => {
            s.regs[r] = imm & cfg.word_mask();
            StepOutcome::Continued
        }
        Instruction::Load { r, va } => {
            let pa = resolve_read(s, e, va)?;
            s.regs[r] = s.mem[pa];
            StepOutcome::Continued
        }
        Instruction::Store { r, va } => {
            let pa = match resolve_write(p, s, e, va)? {
                WriteTarget::Direct(pa) => pa,
                WriteTarget::CopyOnWrite => cow_fault(s, e, va)?,
            };
            s.mem[pa] = s.regs[r];
            StepOutcome::Continued
        }
        Instruction::Add { dst, src } => {
            s.regs[dst] = s.regs[dst].wrapping_add(s.regs[src]) & cfg.word_mask();
            StepOutcome::Continued
        }
        Instruction::Jnz { r, va } => {
            s.pc = if s.regs[r] != 0 { va } else { next };
            return Ok(StepOutcome::Continued);
        }
        Instruction::In { r } => {
            let w = s.input_tapes[slot]
                .pop_front()
                .ok_or(FaultCode::InputExhausted)?;
            s.regs[r] = w;
            StepOutcome::Continued
        }
        Instruction::Out { r } => {
            let w = s.regs[r];
            s.output_tapes[slot].push(w);
            StepOutcome::Output(w)
        }
        Instruction::Snap => {
            Platform::snapshot_check(s).map_err(StepError::Op)?;
            s.pc = next;
            p.snapshot(s).expect("checked");
            return Ok(StepOutcome::Snapshotted);
        }
        Instruction::Exit => {
            s.pc = next;
            p.exit(s).expect("enclave is running");
            return Ok(StepOutcome::Exited);
        }
    };
    s.pc = next;
    Ok(outcome)
}
