// SPDX-License-Identifier: Apache-2.0

//! Counterexamples as replayable scenarios.
//!
//! Each step is followed by expectations for its result and for the digest
//! of the state it produced, so `tapc run` on the file either reproduces
//! the failing run exactly or stops at the first divergence.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use tapc_core::machine::StepOutcome;
use tapc_core::ops::{CopyPolicy, Effect, Mutation, OpResult, Step};
use tapc_core::properties::Witness;
use tapc_core::PlatformConfig;

use crate::run::platform_for;
use crate::scenario::{Directive, Expectation, Scenario, ScenarioConfig};

fn expectation(r: &OpResult) -> Expectation {
    match r {
        Err(e) => Expectation::Err(*e),
        Ok(Effect::Cloned { pages_copied }) => Expectation::Copied(*pages_copied),
        Ok(Effect::Step(StepOutcome::Output(w))) => Expectation::Output(*w),
        Ok(Effect::Step(StepOutcome::Fault(c))) => Expectation::Fault(*c),
        Ok(_) => Expectation::Ok,
    }
}

/// `steps` executed from the initial state, with result and digest
/// expectations after each one.
pub fn replay_scenario(config: ScenarioConfig, steps: &[Step]) -> Scenario {
    let p = platform_for(&config);
    let mut s = p.initial_state();
    let plain = Scenario::from_steps(config, steps);
    let mut out = Scenario::new(config);
    for (line, step) in plain.lines.into_iter().zip(steps) {
        let r = p.execute_in_place(&mut s, step);
        out.push(line.directive);
        out.push(Directive::Expect(expectation(&r)));
        out.push(Directive::Expect(Expectation::Digest(s.digest(&p.cfg))));
    }
    out
}

pub fn lazy_config(cfg: PlatformConfig, inject: Option<Mutation>) -> ScenarioConfig {
    ScenarioConfig {
        platform: cfg,
        policy: CopyPolicy::Lazy,
        inject,
    }
}

/// Both traces of a two-trace witness.
pub fn two_trace_scenarios(w: &Witness) -> [Scenario; 2] {
    let c = lazy_config(w.cfg, w.mutation);
    [
        replay_scenario(c, &w.scripts[0]),
        replay_scenario(c, &w.scripts[1]),
    ]
}

/// Writes `scenario` to `dir/name`, creating `dir` if needed.
pub fn write_scenario(dir: &Path, name: &str, scenario: &Scenario) -> io::Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    fs::write(&path, scenario.to_string())?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::run::{run_scenario, RunOptions};
    use crate::scenario::parse_scenario;
    use tapc_core::ops::Action;
    use tapc_core::EnclaveId;

    #[test]
    fn replays_itself() {
        let cfg = lazy_config(PlatformConfig::new(4, 8, 2, 8, 2).unwrap(), None);
        let steps = vec![
            Step::OsWrite {
                pa: 0,
                words: vec![9, 0],
            },
            Step::Act(Action::Enter(EnclaveId::Id(1))),
            Step::Act(Action::Destroy(EnclaveId::Os)),
        ];
        let s = replay_scenario(cfg, &steps);
        assert_eq!(s.lines.len(), 9);
        let text = s.to_string();
        assert!(text.contains("expect err=NotActive"));
        let back = parse_scenario(&text).unwrap();
        let r = run_scenario(&back, RunOptions::default());
        assert!(r.passed(), "{:?}", r.failure);
        assert_eq!(r.expectations, 6);
    }
}
