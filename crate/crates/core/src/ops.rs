// SPDX-License-Identifier: Apache-2.0

//! Platform operations as total transition functions.
//!
//! Every operation validates all of its preconditions before touching the
//! state, so an `Err` result always leaves the state exactly as it was.

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

use crate::adversary::{adversary_execute, AdversaryAction};
use crate::config::{PlatformConfig, Word};
use crate::machine::{self, StepOutcome};
use crate::measure::measure;
use crate::state::{EnclaveId, Observation, PageTable, PlatformState};

/// Operation error codes. On any of these the state is unchanged.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Error)]
pub enum OpError {
    #[error("operation requires the OS to be executing")]
    NotOs,
    #[error("operation requires an enclave to be executing")]
    NotEnclave,
    #[error("enclave id is a sentinel")]
    InvalidId,
    #[error("enclave is not active")]
    NotActive,
    #[error("enclave is already active")]
    AlreadyActive,
    #[error("enclave is already a snapshot")]
    AlreadySnapshot,
    #[error("enclave already has a root snapshot")]
    HasRootSnapshot,
    #[error("enclave is a snapshot and cannot execute")]
    IsSnapshot,
    #[error("enclave is not paused")]
    NotPaused,
    #[error("page is not owned by the OS")]
    PageNotOsOwned,
    #[error("not enough pages to copy the parent")]
    InsufficientMemory,
    #[error("parent and child are the same enclave")]
    SelfClone,
    #[error("snapshot still has children")]
    SnapshotHasChildren,
    #[error("argument out of range or malformed")]
    BadArguments,
    #[error("target lies inside the protected set")]
    ProtectedTarget,
}

impl OpError {
    pub const ALL: [OpError; 15] = [
        OpError::NotOs,
        OpError::NotEnclave,
        OpError::InvalidId,
        OpError::NotActive,
        OpError::AlreadyActive,
        OpError::AlreadySnapshot,
        OpError::HasRootSnapshot,
        OpError::IsSnapshot,
        OpError::NotPaused,
        OpError::PageNotOsOwned,
        OpError::InsufficientMemory,
        OpError::SelfClone,
        OpError::SnapshotHasChildren,
        OpError::BadArguments,
        OpError::ProtectedTarget,
    ];

    /// Stable name used in scenario files and trace output.
    pub fn name(self) -> &'static str {
        match self {
            OpError::NotOs => "NotOS",
            OpError::NotEnclave => "NotEnclave",
            OpError::InvalidId => "InvalidId",
            OpError::NotActive => "NotActive",
            OpError::AlreadyActive => "AlreadyActive",
            OpError::AlreadySnapshot => "AlreadySnapshot",
            OpError::HasRootSnapshot => "HasRootSnapshot",
            OpError::IsSnapshot => "IsSnapshot",
            OpError::NotPaused => "NotPaused",
            OpError::PageNotOsOwned => "PageNotOSOwned",
            OpError::InsufficientMemory => "InsufficientMemory",
            OpError::SelfClone => "SelfClone",
            OpError::SnapshotHasChildren => "SnapshotHasChildren",
            OpError::BadArguments => "BadArguments",
            OpError::ProtectedTarget => "ProtectedTarget",
        }
    }

    pub fn from_name(s: &str) -> Option<OpError> {
        Self::ALL.into_iter().find(|e| e.name() == s)
    }
}

/// Successful results.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Effect {
    Done,
    Cloned { pages_copied: usize },
    Step(StepOutcome),
    Observed(Observation),
}

pub type OpResult = Result<Effect, OpError>;

/// Arguments of `Launch`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LaunchArgs {
    pub id: EnclaveId,
    pub ep: usize,
    pub page_table: PageTable,
    pub private: Vec<bool>,
    pub pages: BTreeSet<usize>,
}

/// One platform transition request.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Action {
    Launch(LaunchArgs),
    Destroy(EnclaveId),
    Enter(EnclaveId),
    Exit,
    Pause,
    Resume(EnclaveId),
    Snapshot,
    Clone {
        parent: EnclaveId,
        child: EnclaveId,
        pages: BTreeSet<usize>,
    },
    EnclaveStep,
    AdversaryStep {
        protected: EnclaveId,
        act: AdversaryAction,
    },
}

impl Action {
    pub fn kind(&self) -> &'static str {
        match self {
            Action::Launch(_) => "launch",
            Action::Destroy(_) => "destroy",
            Action::Enter(_) => "enter",
            Action::Exit => "exit",
            Action::Pause => "pause",
            Action::Resume(_) => "resume",
            Action::Snapshot => "snapshot",
            Action::Clone { .. } => "clone",
            Action::EnclaveStep => "step",
            Action::AdversaryStep { .. } => "adversary",
        }
    }
}

/// A scripted step: a platform action, or an environment write that
/// stages OS memory or an enclave's input tape.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Step {
    OsWrite { pa: usize, words: Vec<Word> },
    Input { id: EnclaveId, words: Vec<Word> },
    Act(Action),
}

impl From<Action> for Step {
    fn from(a: Action) -> Self {
        Step::Act(a)
    }
}

/// How `Clone` populates the child.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum CopyPolicy {
    /// Copy only pages the parent owns; share root-snapshot pages and
    /// copy them on first write.
    #[default]
    Lazy,
    /// Copy every private mapped page at clone time. Reference semantics
    /// for the differential oracle.
    Eager,
}

/// Deliberate bugs, used to show that the checkers are not vacuous.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mutation {
    /// `STORE` skips the page-ownership check.
    StoreSkipsOwnership,
    /// The observation function leaks protected pages.
    ObserveExposesProtected,
    /// Copy-on-write is skipped: writes land on the shared snapshot page.
    CowWritesShared,
    /// `Destroy` ignores the snapshot child-count guard.
    DestroyIgnoresChildren,
}

impl Mutation {
    pub const ALL: [Mutation; 4] = [
        Mutation::StoreSkipsOwnership,
        Mutation::ObserveExposesProtected,
        Mutation::CowWritesShared,
        Mutation::DestroyIgnoresChildren,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Mutation::StoreSkipsOwnership => "store-ownership",
            Mutation::ObserveExposesProtected => "observe-protected",
            Mutation::CowWritesShared => "cow-shared",
            Mutation::DestroyIgnoresChildren => "destroy-children",
        }
    }

    pub fn from_name(s: &str) -> Option<Mutation> {
        Self::ALL.into_iter().find(|m| m.name() == s)
    }
}

impl fmt::Display for Mutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// The transition system: a configuration plus the clone policy and an
/// optional injected bug. States are plain values passed in and out.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Platform {
    pub cfg: PlatformConfig,
    pub policy: CopyPolicy,
    pub mutation: Option<Mutation>,
}

impl Platform {
    pub fn new(cfg: PlatformConfig) -> Self {
        Platform {
            cfg,
            policy: CopyPolicy::Lazy,
            mutation: None,
        }
    }

    pub fn eager(cfg: PlatformConfig) -> Self {
        Platform {
            policy: CopyPolicy::Eager,
            ..Platform::new(cfg)
        }
    }

    pub fn with_mutation(mut self, m: Option<Mutation>) -> Self {
        self.mutation = m;
        self
    }

    pub(crate) fn mutated(&self, m: Mutation) -> bool {
        self.mutation == Some(m)
    }

    pub fn initial_state(&self) -> PlatformState {
        PlatformState::new(&self.cfg)
    }

    /// Applies `a` to a copy of `s`. On error the returned state equals `s`.
    pub fn apply(&self, s: &PlatformState, a: &Action) -> (PlatformState, OpResult) {
        let mut next = s.clone();
        let r = self.apply_in_place(&mut next, a);
        (next, r)
    }

    /// Applies `a` to `s` in place; leaves `s` untouched on error.
    pub fn apply_in_place(&self, s: &mut PlatformState, a: &Action) -> OpResult {
        self.check_bounds(s, a)?;
        match a {
            Action::Launch(args) => self.launch(s, args),
            Action::Destroy(id) => self.destroy(s, *id),
            Action::Enter(id) => self.enter(s, *id),
            Action::Exit => self.exit(s),
            Action::Pause => self.pause(s),
            Action::Resume(id) => self.resume(s, *id),
            Action::Snapshot => self.snapshot(s),
            Action::Clone {
                parent,
                child,
                pages,
            } => self.clone_enclave(s, *parent, *child, pages),
            Action::EnclaveStep => machine::enclave_step(self, s),
            Action::AdversaryStep { protected, act } => adversary_execute(self, s, *protected, act),
        }
    }

    /// Executes a scripted step; environment writes follow the same
    /// revert-on-error contract as actions.
    pub fn execute_in_place(&self, s: &mut PlatformState, step: &Step) -> OpResult {
        match step {
            Step::Act(a) => self.apply_in_place(s, a),
            Step::OsWrite { pa, words } => {
                if s.current != EnclaveId::Os {
                    return Err(OpError::NotOs);
                }
                let mask = self.cfg.word_mask();
                if pa
                    .checked_add(words.len())
                    .is_none_or(|end| end > self.cfg.n_pa)
                    || words.iter().any(|&w| w & !mask != 0)
                {
                    return Err(OpError::BadArguments);
                }
                if (*pa..pa + words.len()).any(|p| s.owner[p] != EnclaveId::Os) {
                    return Err(OpError::PageNotOsOwned);
                }
                s.mem[*pa..pa + words.len()].copy_from_slice(words);
                Ok(Effect::Done)
            }
            Step::Input { id, words } => {
                if !id.is_valid() {
                    return Err(OpError::InvalidId);
                }
                let mask = self.cfg.word_mask();
                if !s.in_range(*id) || words.iter().any(|&w| w & !mask != 0) {
                    return Err(OpError::BadArguments);
                }
                s.input_tapes[id.slot().unwrap()].extend(words.iter().copied());
                Ok(Effect::Done)
            }
        }
    }

    pub fn execute(&self, s: &PlatformState, step: &Step) -> (PlatformState, OpResult) {
        let mut next = s.clone();
        let r = self.execute_in_place(&mut next, step);
        (next, r)
    }

    /// The adversary's memory view. With a valid `protected` enclave the
    /// hidden set is its protected set; otherwise every enclave-owned page
    /// is hidden.
    pub fn observe(&self, s: &PlatformState, protected: EnclaveId) -> Observation {
        if self.mutated(Mutation::ObserveExposesProtected) {
            return s.observe_unchecked(|_| false);
        }
        s.observe_unchecked(|p| !self.tamper_allowed(s, protected, p))
    }

    pub(crate) fn tamper_allowed(
        &self,
        s: &PlatformState,
        protected: EnclaveId,
        pa: usize,
    ) -> bool {
        if s.in_range(protected) {
            !s.in_protected_set(protected, pa)
        } else {
            s.owner[pa] == EnclaveId::Os
        }
    }

    fn id_in_bounds(&self, id: EnclaveId) -> bool {
        match id {
            EnclaveId::Id(i) => i >= 1 && (i as usize) <= self.cfg.max_enclaves,
            _ => true,
        }
    }

    fn check_bounds(&self, s: &PlatformState, a: &Action) -> Result<(), OpError> {
        let cfg = &self.cfg;
        let ok = match a {
            Action::Launch(args) => {
                self.id_in_bounds(args.id)
                    && args.ep < cfg.n_va
                    && args.page_table.len() == cfg.n_va
                    && args.private.len() == cfg.n_va
                    && args.page_table.0.iter().flatten().all(|p| p.pa < cfg.n_pa)
                    && args.pages.iter().all(|&p| p < cfg.n_pa)
            }
            Action::Destroy(id) | Action::Enter(id) | Action::Resume(id) => self.id_in_bounds(*id),
            Action::Clone {
                parent,
                child,
                pages,
            } => {
                self.id_in_bounds(*parent)
                    && self.id_in_bounds(*child)
                    && pages.iter().all(|&p| p < cfg.n_pa)
            }
            Action::Exit | Action::Pause | Action::Snapshot | Action::EnclaveStep => true,
            Action::AdversaryStep { protected, act } => {
                self.id_in_bounds(*protected)
                    && match act {
                        AdversaryAction::TamperMem { pa, word } => {
                            *pa < cfg.n_pa && word & !cfg.word_mask() == 0
                        }
                        AdversaryAction::TamperOsPageTable { va, pa, .. } => {
                            *va < cfg.n_va && *pa < cfg.n_pa
                        }
                        AdversaryAction::CallOp(inner) => {
                            if matches!(**inner, Action::AdversaryStep { .. }) {
                                false
                            } else {
                                return self.check_bounds(s, inner);
                            }
                        }
                        AdversaryAction::Observe => true,
                    }
            }
        };
        if ok {
            Ok(())
        } else {
            Err(OpError::BadArguments)
        }
    }

    fn require_os(s: &PlatformState) -> Result<(), OpError> {
        if s.current == EnclaveId::Os {
            Ok(())
        } else {
            Err(OpError::NotOs)
        }
    }

    fn require_valid(id: EnclaveId) -> Result<(), OpError> {
        if id.is_valid() {
            Ok(())
        } else {
            Err(OpError::InvalidId)
        }
    }

    fn launch(&self, s: &mut PlatformState, args: &LaunchArgs) -> OpResult {
        Self::require_os(s)?;
        Self::require_valid(args.id)?;
        if s.is_active(args.id) {
            return Err(OpError::AlreadyActive);
        }
        if args.pages.iter().any(|&p| s.owner[p] != EnclaveId::Os) {
            return Err(OpError::PageNotOsOwned);
        }
        // Private addresses must be mapped, injectively, into the pages.
        let mut used = vec![false; self.cfg.n_pa];
        for (va, &private) in args.private.iter().enumerate() {
            if !private {
                continue;
            }
            let pte = args.page_table.get(va).ok_or(OpError::BadArguments)?;
            if !args.pages.contains(&pte.pa) || used[pte.pa] {
                return Err(OpError::BadArguments);
            }
            used[pte.pa] = true;
        }
        let ep_ok =
            args.private[args.ep] && args.page_table.get(args.ep).is_some_and(|p| p.perm.execute);
        if !ep_ok {
            return Err(OpError::BadArguments);
        }

        for &p in &args.pages {
            s.owner[p] = args.id;
        }
        let slot = args.id.slot().unwrap();
        let m = &mut s.meta[slot];
        m.reset();
        m.ep = args.ep;
        m.page_table = args.page_table.clone();
        m.private = args.private.clone();
        m.pc = args.ep;
        m.active = true;
        let view = s
            .project_enclave(args.id)
            .expect("launched enclave is active");
        let measurement = measure(&self.cfg, &view).expect("fresh enclave is initial");
        s.meta[slot].measurement = Some(measurement);
        s.output_tapes[slot].clear();
        Ok(Effect::Done)
    }

    fn destroy(&self, s: &mut PlatformState, id: EnclaveId) -> OpResult {
        Self::require_os(s)?;
        Self::require_valid(id)?;
        if !s.is_active(id) {
            return Err(OpError::NotActive);
        }
        let slot = id.slot().unwrap();
        if s.meta[slot].child_count > 0 && !self.mutated(Mutation::DestroyIgnoresChildren) {
            return Err(OpError::SnapshotHasChildren);
        }
        for p in 0..self.cfg.n_pa {
            if s.owner[p] == id {
                s.mem[p] = 0;
                s.owner[p] = EnclaveId::Os;
            }
        }
        let rs = s.meta[slot].root_snapshot;
        if s.in_range(rs) {
            let cc = &mut s.meta_mut(rs).child_count;
            *cc = cc.saturating_sub(1);
        }
        s.meta[slot].reset();
        s.input_tapes[slot].clear();
        s.output_tapes[slot].clear();
        Ok(Effect::Done)
    }

    fn check_runnable(s: &PlatformState, id: EnclaveId) -> Result<(), OpError> {
        Self::require_os(s)?;
        Self::require_valid(id)?;
        if !s.is_active(id) {
            return Err(OpError::NotActive);
        }
        if s.meta[id.slot().unwrap()].is_snapshot {
            return Err(OpError::IsSnapshot);
        }
        Ok(())
    }

    /// Saves the OS context and switches to `id` at `pc` with `regs`.
    fn switch_to_enclave(s: &mut PlatformState, id: EnclaveId, pc: usize, regs: Vec<Word>) {
        let os = &mut s.meta[0];
        os.pc = s.pc;
        os.regs.clone_from(&s.regs);
        os.page_table.clone_from(&s.page_table);
        let m = &s.meta[id.slot().unwrap()];
        s.page_table.clone_from(&m.page_table);
        s.pc = pc;
        s.regs = regs;
        s.current = id;
    }

    fn restore_os(s: &mut PlatformState) {
        let os = &s.meta[0];
        s.pc = os.pc;
        s.regs.clone_from(&os.regs);
        s.page_table.clone_from(&os.page_table);
        s.current = EnclaveId::Os;
    }

    fn enter(&self, s: &mut PlatformState, id: EnclaveId) -> OpResult {
        Self::check_runnable(s, id)?;
        let m = &s.meta[id.slot().unwrap()];
        if m.paused {
            return Err(OpError::BadArguments);
        }
        let (ep, regs) = (m.ep, m.regs.clone());
        Self::switch_to_enclave(s, id, ep, regs);
        Ok(Effect::Done)
    }

    fn resume(&self, s: &mut PlatformState, id: EnclaveId) -> OpResult {
        Self::check_runnable(s, id)?;
        let m = &mut s.meta[id.slot().unwrap()];
        if !m.paused {
            return Err(OpError::NotPaused);
        }
        m.paused = false;
        let (pc, regs) = (m.pc, m.regs.clone());
        Self::switch_to_enclave(s, id, pc, regs);
        Ok(Effect::Done)
    }

    fn running_enclave(s: &PlatformState) -> Result<EnclaveId, OpError> {
        if s.current.is_valid() {
            Ok(s.current)
        } else {
            Err(OpError::NotEnclave)
        }
    }

    /// Exit: registers are kept, the continuation is dropped.
    pub(crate) fn exit(&self, s: &mut PlatformState) -> OpResult {
        let e = Self::running_enclave(s)?;
        let regs = s.regs.clone();
        let m = s.meta_mut(e);
        m.regs = regs;
        m.pc = m.ep;
        m.paused = false;
        Self::restore_os(s);
        Ok(Effect::Done)
    }

    pub(crate) fn pause(&self, s: &mut PlatformState) -> OpResult {
        let e = Self::running_enclave(s)?;
        Self::save_continuation(s, e);
        Self::restore_os(s);
        Ok(Effect::Done)
    }

    fn save_continuation(s: &mut PlatformState, e: EnclaveId) {
        let (pc, regs) = (s.pc, s.regs.clone());
        let m = s.meta_mut(e);
        m.pc = pc;
        m.regs = regs;
        m.paused = true;
    }

    pub(crate) fn snapshot_check(s: &PlatformState) -> Result<EnclaveId, OpError> {
        let e = Self::running_enclave(s)?;
        if !s.is_active(e) {
            return Err(OpError::NotActive);
        }
        let m = &s.meta[e.slot().unwrap()];
        if m.is_snapshot {
            return Err(OpError::AlreadySnapshot);
        }
        if m.root_snapshot.is_valid() {
            return Err(OpError::HasRootSnapshot);
        }
        Ok(e)
    }

    /// Freezes the running enclave. Its continuation is saved as paused so
    /// clones can `Resume` from it.
    pub(crate) fn snapshot(&self, s: &mut PlatformState) -> OpResult {
        let e = Self::snapshot_check(s)?;
        s.meta_mut(e).is_snapshot = true;
        Self::save_continuation(s, e);
        Self::restore_os(s);
        Ok(Effect::Done)
    }

    /// Virtual addresses whose pages `Clone` copies into the child, ascending.
    pub fn pages_to_copy(&self, s: &PlatformState, parent: EnclaveId) -> Vec<usize> {
        let Some(m) = s.meta_of(parent) else {
            return Vec::new();
        };
        match self.policy {
            CopyPolicy::Lazy if m.is_snapshot => Vec::new(),
            CopyPolicy::Lazy => m
                .private_mapped()
                .filter(|(_, pte)| s.owner[pte.pa] == parent)
                .map(|(va, _)| va)
                .collect(),
            CopyPolicy::Eager => m.private_mapped().map(|(va, _)| va).collect(),
        }
    }

    /// Whether `pages` can hold every page `Clone` must copy.
    pub fn sufficient_mem(
        &self,
        s: &PlatformState,
        parent: EnclaveId,
        pages: &BTreeSet<usize>,
    ) -> bool {
        pages.len() >= self.pages_to_copy(s, parent).len()
    }

    fn clone_enclave(
        &self,
        s: &mut PlatformState,
        parent: EnclaveId,
        child: EnclaveId,
        pages: &BTreeSet<usize>,
    ) -> OpResult {
        Self::require_os(s)?;
        Self::require_valid(parent)?;
        Self::require_valid(child)?;
        if !s.is_active(parent) {
            return Err(OpError::NotActive);
        }
        if child == parent {
            return Err(OpError::SelfClone);
        }
        if s.is_active(child) {
            return Err(OpError::AlreadyActive);
        }
        if pages.iter().any(|&p| s.owner[p] != EnclaveId::Os) {
            return Err(OpError::PageNotOsOwned);
        }
        let to_copy = self.pages_to_copy(s, parent);
        if pages.len() < to_copy.len() {
            return Err(OpError::InsufficientMemory);
        }

        let pm = s.meta[parent.slot().unwrap()].clone();
        let rs = if pm.is_snapshot {
            parent
        } else if pm.root_snapshot.is_valid() {
            pm.root_snapshot
        } else {
            EnclaveId::Invalid
        };
        let cslot = child.slot().unwrap();
        {
            let cm = &mut s.meta[cslot];
            cm.reset();
            cm.ep = pm.ep;
            cm.page_table = pm.page_table.clone();
            cm.private = pm.private.clone();
            cm.pc = pm.pc;
            cm.regs = pm.regs.clone();
            cm.paused = pm.paused;
            cm.measurement = pm.measurement.clone();
            cm.root_snapshot = rs;
            cm.active = true;
            for &p in pages {
                cm.pa_free[p] = true;
            }
        }
        for &p in pages {
            s.owner[p] = child;
        }
        if rs.is_valid() {
            s.meta_mut(rs).child_count += 1;
        }
        for &va in &to_copy {
            let src = pm.page_table.get(va).expect("copied address is mapped").pa;
            let cm = &mut s.meta[cslot];
            let q = cm.lowest_free().expect("sufficient_mem checked");
            cm.pa_free[q] = false;
            let mut pte = cm.page_table.get(va).unwrap();
            pte.pa = q;
            cm.page_table.set(va, Some(pte));
            s.mem[q] = s.mem[src];
        }
        let tape = s.input_tapes[parent.slot().unwrap()].clone();
        s.input_tapes[cslot] = tape;
        s.output_tapes[cslot].clear();
        Ok(Effect::Cloned {
            pages_copied: to_copy.len(),
        })
    }
}

/// One recorded transition: the pre-state, the step and its result.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceStep {
    pub state: PlatformState,
    pub step: Step,
    pub result: OpResult,
}

/// A finite execution prefix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    pub steps: Vec<TraceStep>,
    pub last: PlatformState,
}

impl Trace {
    pub fn run<'a>(
        platform: &Platform,
        init: PlatformState,
        steps: impl IntoIterator<Item = &'a Step>,
    ) -> Trace {
        let mut state = init;
        let mut out = Vec::new();
        for step in steps {
            let (next, result) = platform.execute(&state, step);
            out.push(TraceStep {
                state,
                step: step.clone(),
                result,
            });
            state = next;
        }
        Trace {
            steps: out,
            last: state,
        }
    }

    /// States `π^0 .. π^n`, the final one included.
    pub fn states(&self) -> impl Iterator<Item = &PlatformState> {
        self.steps
            .iter()
            .map(|t| &t.state)
            .chain(core::iter::once(&self.last))
    }
}
