// SPDX-License-Identifier: Apache-2.0

//! Clone cost as a function of snapshot size and divergence.
//!
//! A snapshot `S` of `K` pages is cloned into a child `C`; `C` then
//! diverges on `D` addresses through copy-on-write. Cloning `C` copies only
//! the pages `C` owns, so the count is `D` whatever `K` is.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use tapc_core::machine::{cow_fault, FaultCode};
use tapc_core::ops::{Action, Effect, LaunchArgs, OpError, Platform};
use tapc_core::{ConfigError, EnclaveId, PageTable, Perm, PlatformConfig, PlatformState, Pte};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BenchError {
    #[error("snapshot pages must be at least 1")]
    NoSnapshotPages,
    #[error("diverged pages ({diverged}) exceed snapshot pages ({snapshot_pages})")]
    TooManyDiverged {
        snapshot_pages: usize,
        diverged: usize,
    },
    #[error("platform does not fit: {0}")]
    Config(#[from] ConfigError),
    #[error("{stage} failed: {err}")]
    Op { stage: &'static str, err: OpError },
    #[error("copy-on-write fault: {0}")]
    Fault(&'static str),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BenchReport {
    pub snapshot_pages: usize,
    pub diverged: usize,
    /// Pages copied by the measured clone.
    pub pages_copied: usize,
    /// Pages copied when the child was cloned from the snapshot.
    pub first_clone_copied: usize,
    /// Fastest of the timed repetitions.
    pub wall_time: Duration,
    pub repetitions: u32,
}

const S: EnclaveId = EnclaveId::Id(1);
const C: EnclaveId = EnclaveId::Id(2);
const G: EnclaveId = EnclaveId::Id(3);

fn op(
    p: &Platform,
    s: &mut PlatformState,
    stage: &'static str,
    a: Action,
) -> Result<Effect, BenchError> {
    p.apply_in_place(s, &a)
        .map_err(|err| BenchError::Op { stage, err })
}

fn range(a: usize, b: usize) -> BTreeSet<usize> {
    (a..b).collect()
}

/// The state just before the measured clone, and the platform.
pub fn prepare(
    snapshot_pages: usize,
    diverged: usize,
) -> Result<(Platform, PlatformState, usize), BenchError> {
    let k = snapshot_pages;
    if k == 0 {
        return Err(BenchError::NoSnapshotPages);
    }
    if diverged > k {
        return Err(BenchError::TooManyDiverged {
            snapshot_pages: k,
            diverged,
        });
    }
    // S, C and G each get K pages.
    let cfg = PlatformConfig::new(k, 3 * k, 1, 32, 3)?;
    let p = Platform::new(cfg);
    let mut s = p.initial_state();
    let mut pt = PageTable::empty(k);
    for va in 0..k {
        pt.set(
            va,
            Some(Pte {
                pa: va,
                perm: Perm::RWX,
            }),
        );
    }
    op(
        &p,
        &mut s,
        "launch",
        Action::Launch(LaunchArgs {
            id: S,
            ep: 0,
            page_table: pt,
            private: vec![true; k],
            pages: range(0, k),
        }),
    )?;
    op(&p, &mut s, "enter", Action::Enter(S))?;
    op(&p, &mut s, "snapshot", Action::Snapshot)?;
    let first = match op(
        &p,
        &mut s,
        "clone",
        Action::Clone {
            parent: S,
            child: C,
            pages: range(k, 2 * k),
        },
    )? {
        Effect::Cloned { pages_copied } => pages_copied,
        _ => unreachable!("clone reports its copy count"),
    };
    for va in 0..diverged {
        cow_fault(&mut s, C, va).map_err(|f: FaultCode| BenchError::Fault(f.name()))?;
    }
    Ok((p, s, first))
}

/// Clones the diverged child and reports how many pages were copied.
pub fn bench_clone(snapshot_pages: usize, diverged: usize) -> Result<BenchReport, BenchError> {
    let (p, s, first) = prepare(snapshot_pages, diverged)?;
    let k = snapshot_pages;
    let clone = Action::Clone {
        parent: C,
        child: G,
        pages: range(2 * k, 3 * k),
    };
    let repetitions = 5;
    let mut best = Duration::MAX;
    let mut copied = 0;
    for _ in 0..repetitions {
        let mut t = s.clone();
        let start = Instant::now();
        let r = p.apply_in_place(&mut t, &clone);
        let elapsed = start.elapsed();
        best = best.min(elapsed);
        copied = match r {
            Ok(Effect::Cloned { pages_copied }) => pages_copied,
            Ok(_) => unreachable!("clone reports its copy count"),
            Err(err) => {
                return Err(BenchError::Op {
                    stage: "clone",
                    err,
                })
            }
        };
    }
    Ok(BenchReport {
        snapshot_pages,
        diverged,
        pages_copied: copied,
        first_clone_copied: first,
        wall_time: best,
        repetitions,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn copies_equal_divergence() {
        for (k, d) in [(4, 2), (64, 2), (16, 0), (1, 1)] {
            let r = bench_clone(k, d).unwrap();
            assert_eq!(r.pages_copied, d, "K={k}");
            assert_eq!(r.first_clone_copied, 0);
        }
    }

    #[test]
    fn range_errors() {
        assert_eq!(bench_clone(0, 0), Err(BenchError::NoSnapshotPages));
        assert_eq!(
            bench_clone(4, 5),
            Err(BenchError::TooManyDiverged {
                snapshot_pages: 4,
                diverged: 5
            })
        );
    }
}
