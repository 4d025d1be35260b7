// SPDX-License-Identifier: Apache-2.0

//! Platform state, enclave metadata and the projections over them.

use alloc::collections::{BTreeSet, VecDeque};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

use crate::canonical::Encoder;
use crate::config::{PlatformConfig, Word};
use crate::measure::{fnv1a64, Measurement};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum StateError {
    #[error("enclave id {0} is not a valid, active enclave")]
    InvalidEnclave(EnclaveId),
    #[error("enclave view is not in its initial state")]
    NotInitialState,
}

/// Identifier of an execution context.
///
/// `Os` and `Invalid` are sentinels; `Id(i)` carries an index in
/// `1..=max_enclaves`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EnclaveId {
    Os,
    Invalid,
    Id(u8),
}

impl EnclaveId {
    pub fn is_valid(self) -> bool {
        matches!(self, EnclaveId::Id(_))
    }

    /// Slot in [`PlatformState::meta`]; the OS checkpoint lives at 0.
    pub fn slot(self) -> Option<usize> {
        match self {
            EnclaveId::Os => Some(0),
            EnclaveId::Id(i) => Some(i as usize),
            EnclaveId::Invalid => None,
        }
    }

    pub fn from_slot(slot: usize) -> Self {
        if slot == 0 {
            EnclaveId::Os
        } else {
            EnclaveId::Id(slot as u8)
        }
    }

    fn tag(self) -> u8 {
        match self {
            EnclaveId::Os => 0,
            EnclaveId::Invalid => 0xff,
            EnclaveId::Id(i) => i,
        }
    }
}

impl fmt::Display for EnclaveId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EnclaveId::Os => f.write_str("os"),
            EnclaveId::Invalid => f.write_str("invalid"),
            EnclaveId::Id(i) => write!(f, "{i}"),
        }
    }
}

/// Read/write/execute flags of one virtual address.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Perm {
    pub read: bool,
    pub write: bool,
    pub execute: bool,
}

impl Perm {
    pub const NONE: Perm = Perm::from_bits(0);
    pub const R: Perm = Perm::from_bits(1);
    pub const RW: Perm = Perm::from_bits(3);
    pub const RX: Perm = Perm::from_bits(5);
    pub const RWX: Perm = Perm::from_bits(7);

    /// Bit 0 read, bit 1 write, bit 2 execute.
    pub const fn bits(self) -> u8 {
        self.read as u8 | (self.write as u8) << 1 | (self.execute as u8) << 2
    }

    pub const fn from_bits(b: u8) -> Perm {
        Perm {
            read: b & 1 != 0,
            write: b & 2 != 0,
            execute: b & 4 != 0,
        }
    }
}

impl fmt::Display for Perm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.bits() == 0 {
            return f.write_str("-");
        }
        for (on, c) in [(self.read, 'r'), (self.write, 'w'), (self.execute, 'x')] {
            if on {
                write!(f, "{c}")?;
            }
        }
        Ok(())
    }
}

/// One page-table entry: backing physical address and permissions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Pte {
    pub pa: usize,
    pub perm: Perm,
}

/// Virtual-to-physical map with per-address permissions. An unmapped
/// address has no permissions.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PageTable(pub Vec<Option<Pte>>);

impl PageTable {
    pub fn empty(n_va: usize) -> Self {
        PageTable(vec![None; n_va])
    }

    pub fn get(&self, va: usize) -> Option<Pte> {
        self.0.get(va).copied().flatten()
    }

    pub fn set(&mut self, va: usize, pte: Option<Pte>) {
        self.0[va] = pte;
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    fn clear(&mut self) {
        self.0.iter_mut().for_each(|e| *e = None);
    }
}

/// Per-enclave record. Slot 0 of [`PlatformState::meta`] reuses the
/// `pc`/`regs`/`page_table` fields as the OS checkpoint.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct EnclaveMetadata {
    pub ep: usize,
    pub page_table: PageTable,
    /// Private (enclave-visible) virtual addresses.
    pub private: Vec<bool>,
    pub pc: usize,
    pub regs: Vec<Word>,
    pub paused: bool,
    pub is_snapshot: bool,
    /// Number of active enclaves whose root snapshot is this one.
    pub child_count: u32,
    pub root_snapshot: EnclaveId,
    /// Pages assigned to the enclave but not yet backing any address.
    pub pa_free: Vec<bool>,
    pub measurement: Option<Measurement>,
    pub active: bool,
}

impl EnclaveMetadata {
    pub fn inactive(cfg: &PlatformConfig) -> Self {
        EnclaveMetadata {
            ep: 0,
            page_table: PageTable::empty(cfg.n_va),
            private: vec![false; cfg.n_va],
            pc: 0,
            regs: vec![0; cfg.n_regs],
            paused: false,
            is_snapshot: false,
            child_count: 0,
            root_snapshot: EnclaveId::Invalid,
            pa_free: vec![false; cfg.n_pa],
            measurement: None,
            active: false,
        }
    }

    pub(crate) fn reset(&mut self) {
        self.ep = 0;
        self.page_table.clear();
        self.private.iter_mut().for_each(|b| *b = false);
        self.pc = 0;
        self.regs.iter_mut().for_each(|r| *r = 0);
        self.paused = false;
        self.is_snapshot = false;
        self.child_count = 0;
        self.root_snapshot = EnclaveId::Invalid;
        self.pa_free.iter_mut().for_each(|b| *b = false);
        self.measurement = None;
        self.active = false;
    }

    /// Virtual addresses that are private and mapped, ascending.
    pub fn private_mapped(&self) -> impl Iterator<Item = (usize, Pte)> + '_ {
        self.page_table
            .0
            .iter()
            .enumerate()
            .filter_map(|(va, pte)| match pte {
                Some(p) if self.private[va] => Some((va, *p)),
                _ => None,
            })
    }

    /// Lowest-index page marked free for this enclave.
    pub fn lowest_free(&self) -> Option<usize> {
        self.pa_free.iter().position(|&f| f)
    }
}

/// The whole platform: live context, memory, ownership and metadata.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PlatformState {
    pub pc: usize,
    pub regs: Vec<Word>,
    pub mem: Vec<Word>,
    /// Active page table: the OS's while the OS runs, the enclave's otherwise.
    pub page_table: PageTable,
    pub current: EnclaveId,
    pub owner: Vec<EnclaveId>,
    /// Indexed by [`EnclaveId::slot`]; slot 0 is the OS checkpoint.
    pub meta: Vec<EnclaveMetadata>,
    pub input_tapes: Vec<VecDeque<Word>>,
    pub output_tapes: Vec<Vec<Word>>,
}

impl PlatformState {
    /// The initial platform state: everything owned by the OS, all zero.
    pub fn new(cfg: &PlatformConfig) -> Self {
        let slots = cfg.max_enclaves + 1;
        PlatformState {
            pc: 0,
            regs: vec![0; cfg.n_regs],
            mem: vec![0; cfg.n_pa],
            page_table: PageTable::empty(cfg.n_va),
            current: EnclaveId::Os,
            owner: vec![EnclaveId::Os; cfg.n_pa],
            meta: vec![EnclaveMetadata::inactive(cfg); slots],
            input_tapes: vec![VecDeque::new(); slots],
            output_tapes: vec![Vec::new(); slots],
        }
    }

    /// `Id(i)` with `i` within the configured range.
    pub fn in_range(&self, e: EnclaveId) -> bool {
        matches!(e, EnclaveId::Id(i) if i >= 1 && (i as usize) < self.meta.len())
    }

    pub fn is_active(&self, e: EnclaveId) -> bool {
        self.in_range(e) && self.meta[e.slot().unwrap()].active
    }

    pub fn meta_of(&self, e: EnclaveId) -> Option<&EnclaveMetadata> {
        e.slot().and_then(|s| self.meta.get(s))
    }

    pub(crate) fn meta_mut(&mut self, e: EnclaveId) -> &mut EnclaveMetadata {
        &mut self.meta[e.slot().expect("sentinel has no metadata")]
    }

    pub fn root_snapshot(&self, e: EnclaveId) -> EnclaveId {
        self.meta_of(e)
            .map_or(EnclaveId::Invalid, |m| m.root_snapshot)
    }

    /// Whether `pa` is owned by `e` or by `e`'s root snapshot.
    pub fn in_protected_set(&self, e: EnclaveId, pa: usize) -> bool {
        let o = self.owner[pa];
        o == e || (o.is_valid() && o == self.root_snapshot(e))
    }

    /// Pages owned by `e` or by its root snapshot.
    pub fn protected_set(&self, e: EnclaveId) -> Result<BTreeSet<usize>, StateError> {
        if !self.in_range(e) {
            return Err(StateError::InvalidEnclave(e));
        }
        Ok((0..self.owner.len())
            .filter(|&p| self.in_protected_set(e, p))
            .collect())
    }

    /// The adversary's view of memory: everything outside the protected
    /// set of `e`.
    pub fn observe(&self, e: EnclaveId) -> Result<Observation, StateError> {
        if !self.in_range(e) {
            return Err(StateError::InvalidEnclave(e));
        }
        Ok(self.observe_unchecked(|p| self.in_protected_set(e, p)))
    }

    pub(crate) fn observe_unchecked(&self, hidden: impl Fn(usize) -> bool) -> Observation {
        Observation {
            view: self
                .mem
                .iter()
                .enumerate()
                .map(|(p, &w)| if hidden(p) { None } else { Some(w) })
                .collect(),
        }
    }

    /// The enclave-state projection of `e`. While `e` executes, `pc` and
    /// `regs` are the live registers; otherwise the saved ones.
    pub fn project_enclave(&self, e: EnclaveId) -> Result<EnclaveStateView, StateError> {
        if !self.is_active(e) {
            return Err(StateError::InvalidEnclave(e));
        }
        let m = &self.meta[e.slot().unwrap()];
        let (pc, regs) = if self.current == e {
            (self.pc, self.regs.clone())
        } else {
            (m.pc, m.regs.clone())
        };
        let vmem = (0..m.private.len())
            .map(|va| match m.page_table.get(va) {
                Some(pte) if m.private[va] => Some(self.mem[pte.pa]),
                _ => None,
            })
            .collect();
        Ok(EnclaveStateView {
            ep: m.ep,
            page_table: m.page_table.clone(),
            private: m.private.clone(),
            pc,
            regs,
            vmem,
        })
    }

    /// Canonical serialization: fixed field order, enclave slots ascending.
    pub fn canonical_bytes(&self, cfg: &PlatformConfig) -> Vec<u8> {
        let mut out = Vec::with_capacity(64 + 8 * cfg.n_pa + 32 * self.meta.len() * cfg.n_va);
        self.encode(cfg, &mut out);
        out
    }

    pub fn encode(&self, cfg: &PlatformConfig, out: &mut Vec<u8>) {
        let mut enc = Encoder::new(out, cfg.word_bytes());
        enc.index(self.pc);
        self.regs.iter().for_each(|&r| enc.word(r));
        self.mem.iter().for_each(|&w| enc.word(w));
        encode_page_table(&mut enc, &self.page_table);
        enc.byte(self.current.tag());
        self.owner.iter().for_each(|o| enc.byte(o.tag()));
        for m in &self.meta {
            enc.flag(m.active);
            enc.index(m.ep);
            encode_page_table(&mut enc, &m.page_table);
            m.private.iter().for_each(|&b| enc.flag(b));
            enc.index(m.pc);
            m.regs.iter().for_each(|&r| enc.word(r));
            enc.flag(m.paused);
            enc.flag(m.is_snapshot);
            enc.index(m.child_count as usize);
            enc.byte(m.root_snapshot.tag());
            m.pa_free.iter().for_each(|&b| enc.flag(b));
            match &m.measurement {
                Some(meas) => {
                    enc.flag(true);
                    enc.index(meas.canonical.len());
                    meas.canonical.iter().for_each(|&b| enc.byte(b));
                }
                None => enc.flag(false),
            }
        }
        for tape in &self.input_tapes {
            enc.index(tape.len());
            tape.iter().for_each(|&w| enc.word(w));
        }
        for tape in &self.output_tapes {
            enc.index(tape.len());
            tape.iter().for_each(|&w| enc.word(w));
        }
    }

    /// FNV-1a over [`Self::canonical_bytes`].
    pub fn digest(&self, cfg: &PlatformConfig) -> u64 {
        fnv1a64(&self.canonical_bytes(cfg))
    }
}

fn encode_page_table(enc: &mut Encoder<'_>, pt: &PageTable) {
    for pte in &pt.0 {
        match pte {
            Some(p) => {
                enc.flag(true);
                enc.index(p.pa);
                enc.byte(p.perm.bits());
            }
            None => enc.flag(false),
        }
    }
}

/// Enclave state `E_e(σ)`: metadata fields plus private virtual memory.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct EnclaveStateView {
    pub ep: usize,
    pub page_table: PageTable,
    pub private: Vec<bool>,
    pub pc: usize,
    pub regs: Vec<Word>,
    /// `None` exactly where the address is not private.
    pub vmem: Vec<Option<Word>>,
}

impl EnclaveStateView {
    /// Initial state: at the entrypoint with zeroed registers.
    pub fn is_initial(&self) -> bool {
        self.pc == self.ep && self.regs.iter().all(|&r| r == 0)
    }

    /// The view with physical placement of private addresses erased.
    /// Two platforms that lay memory out differently agree on this.
    pub fn virtual_only(&self) -> EnclaveStateView {
        let mut v = self.clone();
        for (va, pte) in v.page_table.0.iter_mut().enumerate() {
            if let Some(p) = pte {
                if self.private[va] {
                    p.pa = 0;
                }
            }
        }
        v
    }
}

/// What the adversary sees of physical memory; `None` is unobservable.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Observation {
    pub view: Vec<Option<Word>>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> PlatformConfig {
        PlatformConfig::new(4, 8, 2, 8, 2).unwrap()
    }

    #[test]
    fn validity() {
        assert!(!EnclaveId::Os.is_valid());
        assert!(!EnclaveId::Invalid.is_valid());
        assert!(EnclaveId::Id(1).is_valid());
        assert_ne!(EnclaveId::Os, EnclaveId::Invalid);
    }

    #[test]
    fn perm_bits_round_trip() {
        for b in 0..8 {
            assert_eq!(Perm::from_bits(b).bits(), b);
        }
        assert_eq!(alloc::format!("{}", Perm::RX), "rx");
        assert_eq!(alloc::format!("{}", Perm::NONE), "-");
    }

    #[test]
    fn protected_set_cases() {
        let c = cfg();
        let mut s = PlatformState::new(&c);
        let e1 = EnclaveId::Id(1);
        let e2 = EnclaveId::Id(2);
        assert!(s.protected_set(e1).unwrap().is_empty());
        s.owner[2] = e1;
        s.owner[3] = e1;
        assert_eq!(s.protected_set(e1).unwrap(), BTreeSet::from([2, 3]));
        s.owner[4] = e2;
        s.meta[2].root_snapshot = e1;
        assert_eq!(s.protected_set(e2).unwrap(), BTreeSet::from([2, 3, 4]));
        assert_eq!(
            s.protected_set(EnclaveId::Os),
            Err(StateError::InvalidEnclave(EnclaveId::Os))
        );
    }

    #[test]
    fn observe_hides_protected_pages() {
        let c = cfg();
        let mut s = PlatformState::new(&c);
        let e1 = EnclaveId::Id(1);
        s.mem[0] = 5;
        s.mem[2] = 9;
        s.owner[2] = e1;
        let obs = s.observe(e1).unwrap();
        assert_eq!(obs.view[0], Some(5));
        assert_eq!(obs.view[2], None);
    }

    #[test]
    fn canonical_distinguishes_fields() {
        let c = cfg();
        let a = PlatformState::new(&c);
        let mut b = a.clone();
        assert_eq!(a.canonical_bytes(&c), b.canonical_bytes(&c));
        b.meta[1].pa_free[3] = true;
        assert_ne!(a.canonical_bytes(&c), b.canonical_bytes(&c));
        let mut d = a.clone();
        d.output_tapes[1].push(0);
        assert_ne!(a.canonical_bytes(&c), d.canonical_bytes(&c));
    }
}
