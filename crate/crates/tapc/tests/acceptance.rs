// SPDX-License-Identifier: Apache-2.0

//! Acceptance run: one line per criterion, nonzero exit if any fails.
//!
//! `cargo test -p tapc --test acceptance`; the target has its own `main`,
//! so its output is never captured.

use std::collections::BTreeSet;
use std::path::Path;
use std::process::{Command, ExitCode, Output};
use std::time::{Duration, Instant};

use tapc::bench::bench_clone;
use tapc_core::adversary::{generate_schedule_with, AdversaryAction, ScheduleParams};
use tapc_core::ops::{Action, Effect, Mutation, Platform, Step};
use tapc_core::properties::driver::{all_runnable, Decision, Driver};
use tapc_core::properties::revert::revert_config;
use tapc_core::properties::{
    check_atomic_revert, explore, measurement_campaign, oracle_equivalence, revert_cases,
    run_campaign, trial_seed, ActionBounds, CampaignConfig, Mode,
};
use tapc_core::rng::SplitMix64;
use tapc_core::{EnclaveId, OpError, PlatformConfig};

const SEED: u64 = 1;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn exhaustive_invariants() -> Verdict {
    let cfg = PlatformConfig::explorer(2, 4).expect("explorer config");
    let p = Platform::new(cfg);
    let bounds = ActionBounds::for_config(&cfg);
    let start = Instant::now();
    let r = match explore(&p, 6, &bounds) {
        Ok(r) => r,
        Err(e) => return verdict(false, format!("incomplete: {e}")),
    };
    let t = start.elapsed();
    let violations: u64 = r.report.outcomes.iter().map(|o| o.failures).sum();
    verdict(
        r.all_pass() && violations == 0 && t < Duration::from_secs(300),
        format!(
            "visited={} violations={violations} checks={} time={:.1?}",
            r.visited,
            r.report.outcomes.len(),
            t
        ),
    )
}

fn oracle() -> Verdict {
    let r = oracle_equivalence(SEED, 10_000, 40, None);
    verdict(
        r.all_pass() && r.mismatches() == 0 && r.clones > 0,
        format!(
            "trials={} steps={} clones={} mismatches={} failed_checks={}",
            r.trials,
            r.steps,
            r.clones,
            r.mismatches(),
            r.report.failed().count()
        ),
    )
}

fn campaign(
    mode: Mode,
    trials: u64,
    mutation: Option<Mutation>,
) -> tapc_core::properties::CampaignReport {
    let mut c = CampaignConfig::new(mode, SEED, trials, 20);
    c.mutation = mutation;
    run_campaign(&c)
}

fn integrity() -> Verdict {
    let clean = campaign(Mode::Integrity, 10_000, None);
    let bad = campaign(Mode::Integrity, 10_000, Some(Mutation::StoreSkipsOwnership));
    verdict(
        clean.all_pass() && bad.failed_trials > 0,
        format!(
            "clean: trials={} failed={} misuse={}; store-ownership caught at trial {:?}",
            clean.trials, clean.failed_trials, clean.misuse, bad.first_failed_trial
        ),
    )
}

fn confidentiality() -> Verdict {
    let clean = campaign(Mode::Confidentiality, 10_000, None);
    let bad = campaign(
        Mode::Confidentiality,
        1_000,
        Some(Mutation::ObserveExposesProtected),
    );
    verdict(
        clean.all_pass() && bad.failed_trials > 0,
        format!(
            "clean: trials={} failed={} misuse={}; observe-protected caught at trial {:?}",
            clean.trials, clean.failed_trials, clean.misuse, bad.first_failed_trial
        ),
    )
}

/// Random driven traces on the small config; every successful clone must
/// leave the child with its parent's measurement.
fn clone_measurements(trials: u64, len: usize) -> (u64, u64) {
    let cfg = PlatformConfig::small();
    let p = Platform::new(cfg);
    let params = ScheduleParams {
        clone_pages: Some(cfg.n_va),
    };
    let (mut clones, mut bad) = (0, 0);
    for t in 0..trials {
        let mut rng = SplitMix64::new(trial_seed(SEED, t));
        let schedule = generate_schedule_with(rng.next_u64(), &cfg, len, params);
        let mut driver = Driver::new(rng.next_u64());
        let mut s = p.initial_state();
        for _ in 0..4 * len {
            let Some(d) = driver.decide(&s, &schedule, &all_runnable(&s)) else {
                break;
            };
            let action = match d {
                Decision::Schedule(x) | Decision::Preempt { action: x, .. } => x,
                Decision::Step => Action::EnclaveStep,
                Decision::Adversary { index } => Action::AdversaryStep {
                    protected: EnclaveId::Invalid,
                    act: schedule.actions[index].clone(),
                },
            };
            let inner = match &action {
                Action::AdversaryStep {
                    act: AdversaryAction::CallOp(a),
                    ..
                } => Some((**a).clone()),
                Action::AdversaryStep { .. } => None,
                a => Some(a.clone()),
            };
            let r = p.apply_in_place(&mut s, &action);
            if let (Ok(Effect::Cloned { .. }), Some(Action::Clone { parent, child, .. })) =
                (r, inner)
            {
                clones += 1;
                let m = |e| s.meta_of(e).and_then(|m| m.measurement.clone());
                if m(parent).is_none() || m(parent) != m(child) {
                    bad += 1;
                }
            }
        }
    }
    (clones, bad)
}

fn measurement() -> Verdict {
    let cfg = PlatformConfig::small();
    let bicond = measurement_campaign(&cfg, SEED, 1_000);
    let lockstep = campaign(Mode::Measurement, 1_000, None);
    let lockstep_clone = lockstep
        .report
        .outcome("clone-measurement")
        .map_or(u64::MAX, |o| o.failures);
    let (clones, bad) = clone_measurements(2_000, 40);
    verdict(
        bicond.all_pass()
            && bicond.checked > 1_000
            && lockstep.all_pass()
            && lockstep_clone == 0
            && clones > 0
            && bad == 0,
        format!(
            "biconditional checked={} failures={}; lockstep trials={} failed={}; clones={} measurement mismatches={}",
            bicond.checked, bicond.failures, lockstep.trials, lockstep.failed_trials, clones, bad
        ),
    )
}

fn clone_cost() -> Verdict {
    let mut cells = Vec::new();
    let mut pass = true;
    for d in [0, 2] {
        let mut seen = BTreeSet::new();
        for k in [4, 16, 64] {
            match bench_clone(k, d) {
                Ok(r) => {
                    pass &= r.pages_copied == d;
                    seen.insert(r.pages_copied);
                    cells.push(format!("K={k},D={d}:{}", r.pages_copied));
                }
                Err(e) => {
                    pass = false;
                    cells.push(format!("K={k},D={d}:{e}"));
                }
            }
        }
        pass &= seen.len() == 1;
    }
    verdict(pass, format!("pages_copied {}", cells.join(" ")))
}

fn atomic_revert() -> Verdict {
    let p = Platform::new(revert_config());
    let cases = revert_cases();
    let r = check_atomic_revert(&p, &cases);
    let ops: BTreeSet<&str> = cases
        .iter()
        .map(|c| match &c.step {
            Step::Act(a) => a.kind(),
            Step::OsWrite { .. } => "os-write",
            Step::Input { .. } => "input",
        })
        .collect();
    let uncovered = r.uncovered();
    verdict(
        r.all_pass() && uncovered.is_empty() && r.covered.len() == OpError::ALL.len(),
        format!(
            "cases={} failures={} codes={}/{} operations={} uncovered={:?}{}",
            r.cases,
            r.failures.len(),
            r.covered.len(),
            OpError::ALL.len(),
            ops.len(),
            uncovered,
            r.failures
                .first()
                .map(|f| format!(" first: {f}"))
                .unwrap_or_default()
        ),
    )
}

fn tapc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tapc"))
        .args(args)
        .env_remove("TAPC_SEED")
        .output()
        .expect("spawn tapc")
}

/// Replays `file` twice; both runs must pass every digest expectation and
/// print the same trace.
fn replays(file: &Path) -> Result<usize, String> {
    let f = file.to_str().unwrap();
    if !file.exists() {
        return Err(format!("{f} not written"));
    }
    let a = tapc(&["run", "--scenario", f]);
    let b = tapc(&["run", "--scenario", f]);
    if a.status.code() != Some(0) {
        return Err(format!(
            "{f}: {}",
            String::from_utf8_lossy(&a.stderr).trim()
        ));
    }
    if a.stdout != b.stdout {
        return Err(format!("{f}: traces differ between runs"));
    }
    Ok(a.stdout.iter().filter(|&&c| c == b'\n').count())
}

fn reproducibility() -> Verdict {
    let dir = match tempfile::tempdir() {
        Ok(d) => d,
        Err(e) => return verdict(false, format!("tempdir: {e}")),
    };
    let w = dir.path().to_str().unwrap();
    let mut problems = Vec::new();

    let checks: [&[&str]; 4] = [
        &["check-integrity", "--seed", "1", "--trials", "500"],
        &["check-confidentiality", "--seed", "1", "--trials", "500"],
        &["check-measurement", "--seed", "1", "--trials", "500"],
        &[
            "check-oracle",
            "--seed",
            "1",
            "--trials",
            "500",
            "--len",
            "40",
        ],
    ];
    for args in checks {
        let a = tapc(args);
        let b = tapc(args);
        if a.status.code() != Some(0) || a.stdout != b.stdout || a.stdout.is_empty() {
            problems.push(format!("{} not deterministic", args[0]));
        }
    }

    let witnesses: [(&[&str], &[&str]); 4] = [
        (
            &[
                "check-integrity",
                "--seed",
                "1",
                "--trials",
                "10000",
                "--inject",
                "store-ownership",
            ],
            &["check-integrity-trace1.tapc", "check-integrity-trace2.tapc"],
        ),
        (
            &[
                "check-confidentiality",
                "--seed",
                "1",
                "--trials",
                "1000",
                "--inject",
                "observe-protected",
            ],
            &[
                "check-confidentiality-trace1.tapc",
                "check-confidentiality-trace2.tapc",
            ],
        ),
        (
            &[
                "explore",
                "--va",
                "2",
                "--pa",
                "4",
                "--depth",
                "5",
                "--inject",
                "destroy-children",
            ],
            &["explore.tapc"],
        ),
        (
            &[
                "check-oracle",
                "--seed",
                "1",
                "--trials",
                "10000",
                "--len",
                "40",
                "--inject",
                "cow-shared",
            ],
            &["check-oracle.tapc"],
        ),
    ];
    let mut replayed = 0;
    for (args, files) in witnesses {
        let args: Vec<&str> = args.iter().copied().chain(["--witness-dir", w]).collect();
        let o = tapc(&args);
        if o.status.code() != Some(1) {
            problems.push(format!(
                "{} {} found nothing",
                args[0],
                args[args.len() - 3]
            ));
            continue;
        }
        for f in files {
            match replays(&dir.path().join(f)) {
                Ok(_) => replayed += 1,
                Err(e) => problems.push(e),
            }
        }
    }
    let detail = if problems.is_empty() {
        format!("4 checks byte-identical across runs; {replayed} witnesses replay to their digests")
    } else {
        problems.join("; ")
    };
    verdict(problems.is_empty() && replayed == 6, detail)
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Verdict); 8] = [
        ("exhaustive invariants", exhaustive_invariants),
        ("oracle equivalence", oracle),
        ("integrity", integrity),
        ("confidentiality", confidentiality),
        ("secure measurement", measurement),
        ("clone-cost independence", clone_cost),
        ("atomic revert", atomic_revert),
        ("reproducibility", reproducibility),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let v = f();
        if !v.pass {
            failed += 1;
        }
        println!(
            "criterion {} {name}: {} ({})",
            i + 1,
            if v.pass { "PASS" } else { "FAIL" },
            v.detail
        );
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
