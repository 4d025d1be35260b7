// SPDX-License-Identifier: Apache-2.0

//! Scenario execution and trace records.

use serde::Serialize;
use tapc_core::machine::StepOutcome;
use tapc_core::ops::{Action, Effect, OpResult, Platform, Step};
use tapc_core::properties::{invariant_violations, Violation};
use tapc_core::{EnclaveId, PlatformState};
use thiserror::Error;

use crate::scenario::{format_action, format_id, Directive, Expectation, Scenario, ScenarioConfig};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RunError {
    #[error("line {line}: expected `{expected}`, got `{actual}`")]
    Expectation {
        line: usize,
        expected: String,
        actual: String,
    },
    #[error("line {line}: `expect` before any step")]
    NothingToExpect { line: usize },
}

/// One executed step.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TraceRecord {
    pub step: usize,
    pub action: String,
    pub result: String,
    /// Digest of the state after the step, `0x` and 16 hex digits.
    pub digest: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub state: Option<StateDump>,
}

impl TraceRecord {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("trace records serialize")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EnclaveDump {
    pub id: String,
    pub ep: usize,
    /// `va:pa:perm` per mapped address.
    pub map: Vec<String>,
    pub private: Vec<usize>,
    pub pc: usize,
    pub regs: Vec<u32>,
    pub paused: bool,
    pub snapshot: bool,
    pub child_count: u32,
    pub root_snapshot: String,
    pub free: Vec<usize>,
    pub measurement: Option<String>,
    pub input: Vec<u32>,
    pub output: Vec<u32>,
}

/// Full platform state, for `--dump-state`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StateDump {
    pub current: String,
    pub pc: usize,
    pub regs: Vec<u32>,
    pub mem: Vec<u32>,
    pub owner: Vec<String>,
    pub map: Vec<String>,
    pub enclaves: Vec<EnclaveDump>,
}

fn map_entries(pt: &tapc_core::PageTable) -> Vec<String> {
    pt.0.iter()
        .enumerate()
        .filter_map(|(va, p)| p.map(|p| format!("{va}:{}:{}", p.pa, p.perm)))
        .collect()
}

impl StateDump {
    pub fn new(s: &PlatformState) -> Self {
        let enclaves = (1..s.meta.len())
            .filter(|&slot| s.meta[slot].active)
            .map(|slot| {
                let m = &s.meta[slot];
                EnclaveDump {
                    id: format_id(EnclaveId::from_slot(slot)),
                    ep: m.ep,
                    map: map_entries(&m.page_table),
                    private: (0..m.private.len()).filter(|&v| m.private[v]).collect(),
                    pc: m.pc,
                    regs: m.regs.clone(),
                    paused: m.paused,
                    snapshot: m.is_snapshot,
                    child_count: m.child_count,
                    root_snapshot: format_id(m.root_snapshot),
                    free: (0..m.pa_free.len()).filter(|&p| m.pa_free[p]).collect(),
                    measurement: m
                        .measurement
                        .as_ref()
                        .map(|x| format!("{:#018x}", x.digest64)),
                    input: s.input_tapes[slot].iter().copied().collect(),
                    output: s.output_tapes[slot].clone(),
                }
            })
            .collect();
        StateDump {
            current: format_id(s.current),
            pc: s.pc,
            regs: s.regs.clone(),
            mem: s.mem.clone(),
            owner: s.owner.iter().map(|&o| format_id(o)).collect(),
            map: map_entries(&s.page_table),
            enclaves,
        }
    }
}

pub fn format_digest(d: u64) -> String {
    format!("{d:#018x}")
}

pub fn format_result(r: &OpResult) -> String {
    match r {
        Err(e) => format!("err={}", e.name()),
        Ok(Effect::Done) => "ok".into(),
        Ok(Effect::Cloned { pages_copied }) => format!("ok copied={pages_copied}"),
        Ok(Effect::Step(o)) => match o {
            StepOutcome::Continued => "ok".into(),
            StepOutcome::Output(w) => format!("ok output={w:#04x}"),
            StepOutcome::Exited => "ok exited".into(),
            StepOutcome::Snapshotted => "ok snapshotted".into(),
            StepOutcome::Fault(c) => format!("ok fault={}", c.name()),
        },
        Ok(Effect::Observed(o)) => {
            let words: Vec<String> = o
                .view
                .iter()
                .map(|w| w.map_or_else(|| "_".into(), |w| format!("{w:#04x}")))
                .collect();
            format!("ok observed={}", words.join(","))
        }
    }
}

fn matches(e: &Expectation, r: &OpResult, digest: u64) -> bool {
    match (e, r) {
        (Expectation::Ok, Ok(_)) => true,
        (Expectation::Err(a), Err(b)) => a == b,
        (Expectation::Fault(a), Ok(Effect::Step(StepOutcome::Fault(b)))) => a == b,
        (Expectation::Output(a), Ok(Effect::Step(StepOutcome::Output(b)))) => a == b,
        (Expectation::Copied(a), Ok(Effect::Cloned { pages_copied })) => a == pages_copied,
        (Expectation::Digest(d), _) => *d == digest,
        _ => false,
    }
}

/// Result of running a scenario to completion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunOutcome {
    pub records: Vec<TraceRecord>,
    pub final_state: Option<PlatformState>,
    /// Expectations checked.
    pub expectations: usize,
    /// First failed expectation; execution stops there.
    pub failure: Option<RunError>,
    /// Invariant violations, when requested.
    pub violations: Vec<Violation>,
}

impl RunOutcome {
    pub fn passed(&self) -> bool {
        self.failure.is_none() && self.violations.is_empty()
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    pub dump_state: bool,
    /// Check every invariant on the initial state and after each step.
    pub invariants: bool,
}

pub fn platform_for(c: &ScenarioConfig) -> Platform {
    let mut p = Platform::new(c.platform).with_mutation(c.inject);
    p.policy = c.policy;
    p
}

/// Steps a scenario line executes.
fn steps_of(d: &Directive) -> Vec<Step> {
    match d {
        Directive::OsWrite { pa, off, words } => vec![Step::OsWrite {
            pa: pa + off,
            words: words.clone(),
        }],
        Directive::Input { id, words } => vec![Step::Input {
            id: *id,
            words: words.clone(),
        }],
        Directive::Act(a) => vec![Step::Act(a.clone())],
        Directive::Step(n) => vec![Step::Act(Action::EnclaveStep); *n],
        Directive::Expect(_) => Vec::new(),
    }
}

pub fn step_text(s: &Step) -> String {
    match s {
        Step::OsWrite { pa, words } => Directive::OsWrite {
            pa: *pa,
            off: 0,
            words: words.clone(),
        }
        .to_string(),
        Step::Input { id, words } => Directive::Input {
            id: *id,
            words: words.clone(),
        }
        .to_string(),
        Step::Act(a) => format_action(a),
    }
}

/// Runs `scenario`, stopping at the first failed expectation.
pub fn run_scenario(scenario: &Scenario, opts: RunOptions) -> RunOutcome {
    let mut out = RunOutcome {
        records: Vec::new(),
        final_state: None,
        expectations: 0,
        failure: None,
        violations: Vec::new(),
    };
    let Some(config) = scenario.config else {
        return out;
    };
    let platform = platform_for(&config);
    let cfg = platform.cfg;
    let mut s = platform.initial_state();
    if opts.invariants {
        invariant_violations(&s, 0, &mut out.violations);
    }
    let mut last: Option<(OpResult, u64)> = None;
    for line in &scenario.lines {
        if let Directive::Expect(e) = &line.directive {
            out.expectations += 1;
            let Some((r, digest)) = &last else {
                out.failure = Some(RunError::NothingToExpect { line: line.line });
                break;
            };
            if !matches(e, r, *digest) {
                let actual = match e {
                    Expectation::Digest(_) => format!("digest={}", format_digest(*digest)),
                    _ => format_result(r),
                };
                out.failure = Some(RunError::Expectation {
                    line: line.line,
                    expected: line.directive.to_string(),
                    actual,
                });
                break;
            }
            continue;
        }
        for step in steps_of(&line.directive) {
            let r = platform.execute_in_place(&mut s, &step);
            let digest = s.digest(&cfg);
            let index = out.records.len() + 1;
            out.records.push(TraceRecord {
                step: index,
                action: step_text(&step),
                result: format_result(&r),
                digest: format_digest(digest),
                state: opts.dump_state.then(|| StateDump::new(&s)),
            });
            if opts.invariants {
                invariant_violations(&s, index, &mut out.violations);
            }
            last = Some((r, digest));
        }
    }
    out.final_state = Some(s);
    out
}
