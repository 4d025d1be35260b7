// SPDX-License-Identifier: Apache-2.0

//! Single-state platform invariants.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::state::{EnclaveId, EnclaveMetadata, PlatformState};

/// The checked invariants. The first seven are the sharing-specific
/// platform invariants; the rest are structural invariants of this model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Invariant {
    /// An active enclave's entrypoint is backed by its own page or its
    /// root snapshot's.
    EntrypointOwnership,
    /// Every mapped private address is backed by the enclave's own page
    /// or its root snapshot's.
    MemoryOwnership,
    /// A page marked free for `e` is owned by `e`.
    FreeMemoryOwnership,
    /// No enclave is its own root snapshot.
    RootNotSelf,
    /// Snapshots have no root snapshot.
    SnapshotHasNoRoot,
    /// The root snapshot of an active enclave is a snapshot with a
    /// positive child count.
    RootSnapshotLive,
    /// The executing context is never a snapshot.
    NoRunningSnapshot,
    /// Every page is owned by the OS or by an active enclave.
    OwnershipPartition,
    /// `child_count[s]` equals the number of active enclaves rooted at `s`,
    /// and every valid root snapshot is active.
    ChildCountExact,
    /// Private addresses of an enclave map to distinct pages.
    PrivateMapInjective,
    /// While an enclave runs, the active page table is its own.
    ActivePageTable,
    /// Inactive slots hold default metadata.
    InactiveDefault,
    /// The executing context is the OS or an active, unpaused enclave.
    CurrentContext,
}

impl Invariant {
    pub const ALL: [Invariant; 13] = [
        Invariant::EntrypointOwnership,
        Invariant::MemoryOwnership,
        Invariant::FreeMemoryOwnership,
        Invariant::RootNotSelf,
        Invariant::SnapshotHasNoRoot,
        Invariant::RootSnapshotLive,
        Invariant::NoRunningSnapshot,
        Invariant::OwnershipPartition,
        Invariant::ChildCountExact,
        Invariant::PrivateMapInjective,
        Invariant::ActivePageTable,
        Invariant::InactiveDefault,
        Invariant::CurrentContext,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Invariant::EntrypointOwnership => "entrypoint-ownership",
            Invariant::MemoryOwnership => "memory-ownership",
            Invariant::FreeMemoryOwnership => "free-memory-ownership",
            Invariant::RootNotSelf => "root-not-self",
            Invariant::SnapshotHasNoRoot => "snapshot-has-no-root",
            Invariant::RootSnapshotLive => "root-snapshot-live",
            Invariant::NoRunningSnapshot => "no-running-snapshot",
            Invariant::OwnershipPartition => "ownership-partition",
            Invariant::ChildCountExact => "child-count-exact",
            Invariant::PrivateMapInjective => "private-map-injective",
            Invariant::ActivePageTable => "active-page-table",
            Invariant::InactiveDefault => "inactive-default",
            Invariant::CurrentContext => "current-context",
        }
    }
}

/// One failed check with enough context to find it again.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub check: &'static str,
    /// Index of the offending state (or step) in the run that produced it.
    pub index: usize,
    pub enclave: Option<EnclaveId>,
    pub address: Option<usize>,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} violated at #{}", self.check, self.index)?;
        if let Some(e) = self.enclave {
            write!(f, " enclave={e}")?;
        }
        if let Some(a) = self.address {
            write!(f, " address={a}")?;
        }
        if !self.detail.is_empty() {
            write!(f, ": {}", self.detail)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub failures: u64,
    pub first: Option<Violation>,
}

/// Per-check pass/fail over every evaluated state or step.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct InvariantReport {
    pub evaluated: u64,
    pub outcomes: Vec<CheckOutcome>,
}

impl InvariantReport {
    pub fn new(names: impl IntoIterator<Item = &'static str>) -> Self {
        InvariantReport {
            evaluated: 0,
            outcomes: names
                .into_iter()
                .map(|name| CheckOutcome {
                    name,
                    failures: 0,
                    first: None,
                })
                .collect(),
        }
    }

    pub fn for_invariants() -> Self {
        Self::new(Invariant::ALL.iter().map(|i| i.name()))
    }

    pub fn all_pass(&self) -> bool {
        self.outcomes.iter().all(|o| o.failures == 0)
    }

    pub fn failed(&self) -> impl Iterator<Item = &CheckOutcome> {
        self.outcomes.iter().filter(|o| o.failures > 0)
    }

    pub fn outcome(&self, name: &str) -> Option<&CheckOutcome> {
        self.outcomes.iter().find(|o| o.name == name)
    }

    /// Lists a check with no failures so far.
    pub fn record_name(&mut self, name: &'static str) {
        if !self.outcomes.iter().any(|o| o.name == name) {
            self.outcomes.push(CheckOutcome {
                name,
                failures: 0,
                first: None,
            });
        }
    }

    /// Records a violation, adding the check if it is not yet listed.
    pub fn record(&mut self, v: Violation) {
        let idx = match self.outcomes.iter().position(|o| o.name == v.check) {
            Some(i) => i,
            None => {
                self.outcomes.push(CheckOutcome {
                    name: v.check,
                    failures: 0,
                    first: None,
                });
                self.outcomes.len() - 1
            }
        };
        let o = &mut self.outcomes[idx];
        o.failures += 1;
        if o.first.is_none() {
            o.first = Some(v);
        }
    }

    pub fn absorb(&mut self, other: &InvariantReport) {
        self.evaluated += other.evaluated;
        for o in &other.outcomes {
            if !self.outcomes.iter().any(|x| x.name == o.name) {
                self.outcomes.push(CheckOutcome {
                    name: o.name,
                    failures: 0,
                    first: None,
                });
            }
            let mine = self.outcomes.iter_mut().find(|x| x.name == o.name).unwrap();
            mine.failures += o.failures;
            if mine.first.is_none() {
                mine.first.clone_from(&o.first);
            }
        }
    }
}

struct Sink<'a> {
    index: usize,
    out: &'a mut Vec<Violation>,
}

impl Sink<'_> {
    fn fail(&mut self, inv: Invariant, e: Option<EnclaveId>, addr: Option<usize>, detail: String) {
        self.out.push(Violation {
            check: inv.name(),
            index: self.index,
            enclave: e,
            address: addr,
            detail,
        });
    }
}

/// Evaluates every invariant on `s`, appending violations tagged `index`.
pub fn invariant_violations(s: &PlatformState, index: usize, out: &mut Vec<Violation>) {
    let mut sink = Sink { index, out };
    let n_pa = s.owner.len();
    let n_slots = s.meta.len();

    for slot in 1..n_slots {
        let e = EnclaveId::from_slot(slot);
        let m = &s.meta[slot];
        let rs = m.root_snapshot;
        let self_or_root = |pa: usize| s.owner[pa] == e || (rs.is_valid() && s.owner[pa] == rs);

        if rs == e {
            sink.fail(Invariant::RootNotSelf, Some(e), None, String::new());
        }
        for (pa, &free) in m.pa_free.iter().enumerate() {
            if free && s.owner[pa] != e {
                sink.fail(
                    Invariant::FreeMemoryOwnership,
                    Some(e),
                    Some(pa),
                    format!("owner is {}", s.owner[pa]),
                );
            }
        }
        if !m.active {
            if *m != EnclaveMetadata::inactive_like(m) {
                sink.fail(Invariant::InactiveDefault, Some(e), None, String::new());
            }
            continue;
        }

        match m.page_table.get(m.ep) {
            Some(pte) if self_or_root(pte.pa) => {}
            Some(pte) => sink.fail(
                Invariant::EntrypointOwnership,
                Some(e),
                Some(pte.pa),
                format!("owner is {}", s.owner[pte.pa]),
            ),
            None => sink.fail(
                Invariant::EntrypointOwnership,
                Some(e),
                None,
                String::from("entrypoint unmapped"),
            ),
        }
        let mut used = vec![false; n_pa];
        for (va, pte) in m.private_mapped() {
            if !self_or_root(pte.pa) {
                sink.fail(
                    Invariant::MemoryOwnership,
                    Some(e),
                    Some(pte.pa),
                    format!("va {va} backed by page of {}", s.owner[pte.pa]),
                );
            }
            if used[pte.pa] {
                sink.fail(
                    Invariant::PrivateMapInjective,
                    Some(e),
                    Some(pte.pa),
                    format!("va {va} aliases another private address"),
                );
            }
            used[pte.pa] = true;
        }
        if let Some(rm) = s.meta_of(rs).filter(|_| rs.is_valid()) {
            if !rm.is_snapshot || rm.child_count == 0 {
                sink.fail(
                    Invariant::RootSnapshotLive,
                    Some(e),
                    None,
                    format!(
                        "root {rs}: is_snapshot={} child_count={}",
                        rm.is_snapshot, rm.child_count
                    ),
                );
            }
        }
        if m.is_snapshot && rs != EnclaveId::Invalid {
            sink.fail(
                Invariant::SnapshotHasNoRoot,
                Some(e),
                None,
                format!("root is {rs}"),
            );
        }
        if rs.is_valid() && !s.is_active(rs) {
            sink.fail(
                Invariant::ChildCountExact,
                Some(e),
                None,
                format!("root snapshot {rs} is not active"),
            );
        }
    }

    for slot in 1..n_slots {
        let sid = EnclaveId::from_slot(slot);
        let rooted = s.meta[1..]
            .iter()
            .filter(|m| m.active && m.root_snapshot == sid)
            .count() as u32;
        let cc = s.meta[slot].child_count;
        if cc != rooted {
            sink.fail(
                Invariant::ChildCountExact,
                Some(sid),
                None,
                format!("child_count={cc}, rooted clones={rooted}"),
            );
        }
    }

    if let Some(m) = s.meta_of(s.current) {
        if m.is_snapshot {
            sink.fail(
                Invariant::NoRunningSnapshot,
                Some(s.current),
                None,
                String::new(),
            );
        }
    }

    for (pa, &o) in s.owner.iter().enumerate() {
        if o != EnclaveId::Os && !s.is_active(o) {
            sink.fail(
                Invariant::OwnershipPartition,
                Some(o),
                Some(pa),
                String::from("owner is neither the OS nor an active enclave"),
            );
        }
    }

    match s.current {
        EnclaveId::Os => {}
        e if s.is_active(e) => {
            let m = &s.meta[e.slot().unwrap()];
            if m.paused || m.is_snapshot {
                sink.fail(
                    Invariant::CurrentContext,
                    Some(e),
                    None,
                    String::from("running enclave is paused or a snapshot"),
                );
            }
            if s.page_table != m.page_table {
                sink.fail(Invariant::ActivePageTable, Some(e), None, String::new());
            }
        }
        e => sink.fail(
            Invariant::CurrentContext,
            Some(e),
            None,
            String::from("current context is not a live enclave"),
        ),
    }
}

/// Evaluates every invariant on a single state.
pub fn check_invariants(s: &PlatformState) -> InvariantReport {
    let mut report = InvariantReport::for_invariants();
    let mut v = Vec::new();
    invariant_violations(s, 0, &mut v);
    report.evaluated = 1;
    for x in v {
        report.record(x);
    }
    report
}

impl EnclaveMetadata {
    fn inactive_like(m: &EnclaveMetadata) -> EnclaveMetadata {
        let mut d = m.clone();
        d.reset();
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::PlatformConfig;

    #[test]
    fn fresh_state_passes() {
        let cfg = PlatformConfig::explorer(2, 4).unwrap();
        let r = check_invariants(&PlatformState::new(&cfg));
        assert!(r.all_pass(), "{r:?}");
        assert_eq!(r.outcomes.len(), Invariant::ALL.len());
    }

    #[test]
    fn free_page_not_owned() {
        let cfg = PlatformConfig::new(4, 8, 2, 8, 2).unwrap();
        let mut s = PlatformState::new(&cfg);
        s.meta[2].pa_free[6] = true;
        let r = check_invariants(&s);
        let o = r.outcome("free-memory-ownership").unwrap();
        assert_eq!(o.failures, 1);
        let v = o.first.as_ref().unwrap();
        assert_eq!(v.enclave, Some(EnclaveId::Id(2)));
        assert_eq!(v.address, Some(6));
    }

    #[test]
    fn root_self_and_orphaned_owner() {
        let cfg = PlatformConfig::new(4, 8, 2, 8, 2).unwrap();
        let mut s = PlatformState::new(&cfg);
        s.meta[1].root_snapshot = EnclaveId::Id(1);
        s.owner[3] = EnclaveId::Id(2);
        let r = check_invariants(&s);
        assert!(r.outcome("root-not-self").unwrap().failures > 0);
        assert!(r.outcome("ownership-partition").unwrap().failures > 0);
    }
}
