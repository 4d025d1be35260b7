// SPDX-License-Identifier: Apache-2.0

//! The measurement biconditional: two initial views measure the same
//! exactly when they are equal.

use alloc::vec;
use alloc::vec::Vec;

use crate::config::PlatformConfig;
use crate::measure::measure;
use crate::rng::SplitMix64;
use crate::state::{EnclaveStateView, PageTable, Perm, Pte, StateError};

/// Whether `measure(a) == measure(b)` agrees with `a == b`.
pub fn check_measurement_pair(
    cfg: &PlatformConfig,
    a: &EnclaveStateView,
    b: &EnclaveStateView,
) -> Result<bool, StateError> {
    let same_measure = measure(cfg, a)? == measure(cfg, b)?;
    Ok(same_measure == (a == b))
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct MeasurementReport {
    /// Pairs checked, mutants included.
    pub checked: u64,
    /// Pairs whose views were equal.
    pub equal_pairs: u64,
    pub failures: u64,
    pub first_failure: Option<(EnclaveStateView, EnclaveStateView)>,
}

impl MeasurementReport {
    pub fn all_pass(&self) -> bool {
        self.failures == 0
    }
}

/// A random well-formed initial view: content is present exactly at
/// private mapped addresses.
pub fn random_initial_view(rng: &mut SplitMix64, cfg: &PlatformConfig) -> EnclaveStateView {
    let mut page_table = PageTable::empty(cfg.n_va);
    let mut private = vec![false; cfg.n_va];
    for va in 0..cfg.n_va {
        if rng.chance(3, 4) {
            page_table.set(
                va,
                Some(Pte {
                    pa: rng.below(cfg.n_pa),
                    perm: Perm::from_bits(rng.below(8) as u8),
                }),
            );
        }
        private[va] = rng.coin();
    }
    let ep = rng.below(cfg.n_va);
    let mut v = EnclaveStateView {
        ep,
        page_table,
        private,
        pc: ep,
        regs: vec![0; cfg.n_regs],
        vmem: vec![None; cfg.n_va],
    };
    refill(&mut v, rng, cfg);
    v
}

/// Re-derives `vmem` presence after a shape change, drawing fresh words
/// where content appears.
fn refill(v: &mut EnclaveStateView, rng: &mut SplitMix64, cfg: &PlatformConfig) {
    for va in 0..v.vmem.len() {
        let present = v.private[va] && v.page_table.get(va).is_some();
        match (present, v.vmem[va]) {
            (true, None) => v.vmem[va] = Some(word(rng, cfg)),
            (false, Some(_)) => v.vmem[va] = None,
            _ => {}
        }
    }
}

fn word(rng: &mut SplitMix64, cfg: &PlatformConfig) -> u32 {
    (rng.next_u64() as u32) & cfg.word_mask()
}

/// Every single-field mutant of `v` that stays a well-formed initial view.
pub fn single_field_mutants(
    v: &EnclaveStateView,
    rng: &mut SplitMix64,
    cfg: &PlatformConfig,
) -> Vec<EnclaveStateView> {
    let mut out = Vec::new();
    let mut push = |mut m: EnclaveStateView, rng: &mut SplitMix64| {
        refill(&mut m, rng, cfg);
        out.push(m);
    };
    // entrypoint (the pc follows it in an initial view)
    let mut m = v.clone();
    m.ep = (v.ep + 1 + rng.below(cfg.n_va.max(2) - 1)) % cfg.n_va;
    m.pc = m.ep;
    push(m, rng);
    for va in 0..cfg.n_va {
        let mut m = v.clone();
        m.private[va] = !m.private[va];
        push(m, rng);

        let mut m = v.clone();
        match v.page_table.get(va) {
            Some(pte) => {
                m.page_table.set(va, None);
                push(m, rng);
                let mut m = v.clone();
                let bit = 1 << rng.below(3);
                m.page_table.set(
                    va,
                    Some(Pte {
                        perm: Perm::from_bits(pte.perm.bits() ^ bit),
                        ..pte
                    }),
                );
                push(m, rng);
                if cfg.n_pa > 1 {
                    let mut m = v.clone();
                    let pa = (pte.pa + 1 + rng.below(cfg.n_pa - 1)) % cfg.n_pa;
                    m.page_table.set(va, Some(Pte { pa, ..pte }));
                    push(m, rng);
                }
            }
            None => {
                m.page_table.set(
                    va,
                    Some(Pte {
                        pa: rng.below(cfg.n_pa),
                        perm: Perm::from_bits(rng.below(8) as u8),
                    }),
                );
                push(m, rng);
            }
        }
        if let Some(w) = v.vmem[va] {
            let mut m = v.clone();
            let bit = 1 << rng.below(cfg.word_bits as usize);
            m.vmem[va] = Some(w ^ bit);
            push(m, rng);
        }
    }
    out
}

/// Checks the biconditional on `pairs` random pairs. Each round checks a
/// view against an independent view, against a copy of itself, and
/// against every single-field mutant of itself.
pub fn measurement_campaign(cfg: &PlatformConfig, seed: u64, pairs: u64) -> MeasurementReport {
    let mut rng = SplitMix64::new(seed);
    let mut report = MeasurementReport::default();
    for _ in 0..pairs {
        let a = random_initial_view(&mut rng, cfg);
        let b = random_initial_view(&mut rng, cfg);
        let mut candidates = single_field_mutants(&a, &mut rng, cfg);
        candidates.push(b);
        candidates.push(a.clone());
        for c in candidates {
            report.checked += 1;
            if a == c {
                report.equal_pairs += 1;
            }
            let ok = check_measurement_pair(cfg, &a, &c).expect("generated views are initial");
            if !ok {
                report.failures += 1;
                if report.first_failure.is_none() {
                    report.first_failure = Some((a.clone(), c));
                }
            }
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mutants_differ_and_stay_initial() {
        let cfg = PlatformConfig::small();
        let mut rng = SplitMix64::new(3);
        for _ in 0..50 {
            let v = random_initial_view(&mut rng, &cfg);
            for m in single_field_mutants(&v, &mut rng, &cfg) {
                assert_ne!(m, v);
                assert!(m.is_initial());
            }
        }
    }

    #[test]
    fn non_initial_is_rejected() {
        let cfg = PlatformConfig::small();
        let mut rng = SplitMix64::new(1);
        let mut v = random_initial_view(&mut rng, &cfg);
        v.regs[0] = 1;
        assert_eq!(
            check_measurement_pair(&cfg, &v, &v),
            Err(StateError::NotInitialState)
        );
    }
}
