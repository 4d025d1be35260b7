// SPDX-License-Identifier: Apache-2.0

//! Property tests over seeded random traces on the small configuration.

use proptest::prelude::*;
use tapc_core::properties::driver::{all_runnable, Decision, Driver};
use tapc_core::properties::measurement::{random_initial_view, single_field_mutants};
use tapc_core::properties::{check_invariants, check_measurement_pair};
use tapc_core::rng::SplitMix64;
use tapc_core::*;

struct Transition {
    pre: PlatformState,
    action: Action,
    result: OpResult,
    post: PlatformState,
}

/// A driven random run: adversary schedule entries interleaved with
/// enclave steps, every enclave page off limits to tampering.
fn random_trace(p: &Platform, seed: u64, len: usize) -> Vec<Transition> {
    let mut rng = SplitMix64::new(seed);
    let schedule = generate_schedule(rng.next_u64(), &p.cfg, len);
    let mut driver = Driver::new(rng.next_u64());
    let mut s = p.initial_state();
    let mut out = Vec::new();
    while out.len() < 4 * len {
        let candidates = all_runnable(&s);
        let Some(d) = driver.decide(&s, &schedule, &candidates) else {
            break;
        };
        let action = match d {
            Decision::Schedule(a) | Decision::Preempt { action: a, .. } => a,
            Decision::Step => Action::EnclaveStep,
            Decision::Adversary { index } => Action::AdversaryStep {
                protected: EnclaveId::Invalid,
                act: schedule.actions[index].clone(),
            },
        };
        let (post, result) = p.apply(&s, &action);
        out.push(Transition {
            pre: s,
            action,
            result,
            post: post.clone(),
        });
        s = post;
    }
    out
}

fn small() -> Platform {
    Platform::new(PlatformConfig::small())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn errors_leave_the_state_untouched(seed in any::<u64>()) {
        let p = small();
        for t in random_trace(&p, seed, 30) {
            if t.result.is_err() {
                prop_assert_eq!(t.pre.canonical_bytes(&p.cfg), t.post.canonical_bytes(&p.cfg));
                prop_assert!(t.pre == t.post);
            }
        }
    }

    #[test]
    fn invariants_hold_on_every_state(seed in any::<u64>()) {
        let p = small();
        for t in random_trace(&p, seed, 30) {
            let r = check_invariants(&t.post);
            prop_assert!(r.all_pass(), "after {:?}: {:?}", t.action, r.failed().collect::<Vec<_>>());
        }
    }

    #[test]
    fn replay_is_deterministic(seed in any::<u64>()) {
        let p = small();
        let a = random_trace(&p, seed, 20);
        let steps: Vec<Step> = a.iter().map(|t| Step::Act(t.action.clone())).collect();
        let replay = Trace::run(&p, p.initial_state(), &steps);
        for (t, r) in a.iter().zip(&replay.steps) {
            prop_assert_eq!(&t.pre, &r.state);
            prop_assert_eq!(&t.result, &r.result);
        }
        prop_assert_eq!(a.last().map(|t| t.post.digest(&p.cfg)), a.last().map(|_| replay.last.digest(&p.cfg)));
    }

    #[test]
    fn clones_equal_their_parent(seed in any::<u64>()) {
        let p = small();
        for t in random_trace(&p, seed, 40) {
            if let (Action::Clone { parent, child, .. }, Ok(_)) = (&t.action, &t.result) {
                let a = t.post.project_enclave(*parent).unwrap();
                let b = t.post.project_enclave(*child).unwrap();
                prop_assert_eq!(a.virtual_only(), b.virtual_only());
                prop_assert_eq!(
                    &t.post.meta_of(*parent).unwrap().measurement,
                    &t.post.meta_of(*child).unwrap().measurement
                );
            }
        }
    }

    #[test]
    fn snapshot_pages_are_immutable(seed in any::<u64>()) {
        let p = small();
        for t in random_trace(&p, seed, 40) {
            for pa in 0..p.cfg.n_pa {
                let o = t.pre.owner[pa];
                let frozen = t.pre.meta_of(o).is_some_and(|m| m.active && m.is_snapshot);
                if frozen && t.post.owner[pa] == o {
                    prop_assert_eq!(t.pre.mem[pa], t.post.mem[pa], "snapshot page {} after {:?}", pa, t.action);
                }
            }
        }
    }

    #[test]
    fn enclave_steps_write_only_their_own_pages(seed in any::<u64>()) {
        let p = small();
        for t in random_trace(&p, seed, 40) {
            if !matches!(t.action, Action::EnclaveStep) {
                continue;
            }
            let me = t.pre.current;
            for pa in 0..p.cfg.n_pa {
                let o = t.pre.owner[pa];
                if o != me && (o == EnclaveId::Os || t.pre.is_active(o)) {
                    prop_assert_eq!(t.pre.mem[pa], t.post.mem[pa], "{} wrote page {} of {}", me, pa, o);
                }
            }
        }
    }

    #[test]
    fn projection_ignores_other_owners(seed in any::<u64>(), word in 0u32..256) {
        let p = small();
        let trace = random_trace(&p, seed, 30);
        let Some(last) = trace.last() else { return Ok(()); };
        let s = &last.post;
        for slot in 1..=p.cfg.max_enclaves {
            let e = EnclaveId::from_slot(slot);
            let Ok(view) = s.project_enclave(e) else { continue };
            prop_assert_eq!(s.project_enclave(e).unwrap(), view.clone());
            let mut t = s.clone();
            for pa in 0..p.cfg.n_pa {
                if !s.in_protected_set(e, pa) {
                    t.mem[pa] = word;
                }
            }
            prop_assert_eq!(t.project_enclave(e).unwrap(), view);
        }
    }

    #[test]
    fn measurement_is_exact(seed in any::<u64>()) {
        let cfg = PlatformConfig::small();
        let mut rng = SplitMix64::new(seed);
        let v = random_initial_view(&mut rng, &cfg);
        prop_assert!(check_measurement_pair(&cfg, &v, &v.clone()).unwrap());
        for m in single_field_mutants(&v, &mut rng, &cfg) {
            prop_assert!(check_measurement_pair(&cfg, &v, &m).unwrap());
            prop_assert_ne!(measure(&cfg, &v).unwrap(), measure(&cfg, &m).unwrap());
        }
    }
}
