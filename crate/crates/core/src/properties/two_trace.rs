// SPDX-License-Identifier: Apache-2.0

//! Lockstep self-composition.
//!
//! Two platform instances start from low-equivalent states and receive
//! the same interleaving of adversary actions and enclave steps. After
//! every step the harness compares what the property says must agree:
//!
//! * integrity: the protected enclave's view and outputs, while the two
//!   adversaries differ in the words they tamper with;
//! * measurement: the same, with the protected enclave launched under a
//!   different id in each trace;
//! * confidentiality: everything the adversary can see, while the two
//!   protected programs differ in one secret word.
//!
//! Clones of the protected enclave join its family and are protected and
//! compared alongside it. A run stops early (truncates) when the
//! antecedent of the property no longer holds: the protected family is
//! scheduled differently, or is fed different inputs.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::ops::Range;

use thiserror::Error;

use super::driver::{Decision, Driver};
use super::invariants::{invariant_violations, InvariantReport, Violation};
use super::programs::{random_program, Discipline, Layout, Program};
use super::trial_seed;
use crate::adversary::{
    generate_schedule, perturb_tampering, swap_ids, AdversaryAction, AdversarySchedule,
};
use crate::config::{PlatformConfig, Word};
use crate::ops::{Action, Effect, Mutation, OpError, OpResult, Platform, Step};
use crate::rng::SplitMix64;
use crate::state::{EnclaveId, EnclaveMetadata, Observation, PageTable, PlatformState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    Measurement,
    Integrity,
    Confidentiality,
}

impl Mode {
    pub const ALL: [Mode; 3] = [Mode::Measurement, Mode::Integrity, Mode::Confidentiality];

    pub fn name(self) -> &'static str {
        match self {
            Mode::Measurement => "measurement",
            Mode::Integrity => "integrity",
            Mode::Confidentiality => "confidentiality",
        }
    }

    /// Name of the relational check this mode asserts.
    pub fn check(self) -> &'static str {
        match self {
            Mode::Measurement => "measurement-determinism",
            Mode::Integrity => "integrity",
            Mode::Confidentiality => "confidentiality",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Name of the check that clones carry their parent's measurement.
pub const CLONE_MEASUREMENT: &str = "clone-measurement";

/// One lockstep run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TwoTraceConfig {
    pub platform: Platform,
    pub mode: Mode,
    /// Id of the protected enclave in each trace.
    pub protected: [EnclaveId; 2],
    /// Adversary schedules, both written against trace 1's ids. They may
    /// differ only in tampered words, and only outside confidentiality
    /// mode.
    pub schedules: [AdversarySchedule; 2],
    pub programs: [Program; 2],
    pub driver_seed: u64,
    /// Maximum lockstep steps after setup.
    pub budget: usize,
}

/// The supplied configuration or programs break the property's
/// assumptions; nothing about the platform can be concluded.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HarnessMisuse {
    #[error("configuration is too small for the protected layout")]
    Layout,
    #[error("protected id {0} is not a valid in-range enclave id")]
    BadProtectedId(EnclaveId),
    #[error("protected ids must agree outside measurement mode")]
    IdsDiffer,
    #[error("{0} mode needs identical programs")]
    ProgramsDiffer(Mode),
    #[error("confidentiality programs may differ only in the secret word")]
    NotSecretOnly,
    #[error("schedules differ at entry {0} beyond tampered words")]
    ScheduleShape(usize),
    #[error("setup step {0} failed in trace {1}: {2}")]
    Setup(usize, usize, OpError),
    #[error("initial enclave views differ")]
    InitialViewsDiffer,
    #[error("a protected step at #{0} changed the adversary's observation")]
    ObservationChanged(usize),
}

/// A failing run: the two step scripts (setup included) and the index of
/// the step after which the check failed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Witness {
    pub cfg: PlatformConfig,
    pub mutation: Option<Mutation>,
    pub check: &'static str,
    pub failing_step: usize,
    pub scripts: [Vec<Step>; 2],
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TwoTraceOutcome {
    /// The mode's check, clone measurements and every invariant on both
    /// traces.
    pub report: InvariantReport,
    /// Lockstep steps compared.
    pub steps: usize,
    /// Antecedent that stopped the run early, if any.
    pub truncated: Option<&'static str>,
    pub witness: Option<Witness>,
}

impl TwoTraceOutcome {
    pub fn passed(&self) -> bool {
        self.report.all_pass()
    }
}

fn rename(e: EnclaveId, x: EnclaveId, y: EnclaveId) -> EnclaveId {
    if e == x {
        y
    } else if e == y {
        x
    } else {
        e
    }
}

/// The action inside a step, looking through adversary calls.
fn inner_action(step: &Step) -> Option<&Action> {
    match step {
        Step::Act(Action::AdversaryStep {
            act: AdversaryAction::CallOp(a),
            ..
        }) => Some(a),
        Step::Act(a) => Some(a),
        _ => None,
    }
}

struct Side {
    state: PlatformState,
    family: BTreeSet<EnclaveId>,
    script: Vec<Step>,
}

impl Side {
    fn apply(&mut self, p: &Platform, step: Step) -> OpResult {
        let r = p.execute_in_place(&mut self.state, &step);
        if r.is_ok() {
            match inner_action(&step) {
                Some(Action::Clone { parent, child, .. }) if self.family.contains(parent) => {
                    self.family.insert(*child);
                }
                Some(Action::Destroy(e)) => {
                    self.family.remove(e);
                }
                _ => {}
            }
        }
        self.script.push(step);
        r
    }

    fn in_family(&self, p: usize) -> bool {
        self.family
            .iter()
            .any(|&e| self.state.in_protected_set(e, p))
    }

    /// Memory with every family page hidden.
    fn family_observation(&self) -> Observation {
        self.state.observe_unchecked(|p| self.in_family(p))
    }

    /// Words the running family member reads from outside: its input
    /// tape and its public addresses.
    fn inputs(&self, e: EnclaveId) -> (Vec<Word>, Vec<Option<Word>>) {
        let s = &self.state;
        let m = s.meta_of(e).expect("family member is in range");
        let public = (0..m.private.len())
            .filter(|&va| !m.private[va])
            .map(|va| {
                m.page_table
                    .get(va)
                    .filter(|pte| s.owner[pte.pa] == EnclaveId::Os)
                    .map(|pte| s.mem[pte.pa])
            })
            .collect();
        let tape = s.input_tapes[e.slot().unwrap()].iter().copied().collect();
        (tape, public)
    }

    /// Everything the adversary can read or write.
    fn adversary_view(&self) -> AdversaryView {
        let s = &self.state;
        let os_running = s.current == EnclaveId::Os;
        let enclaves = s
            .meta
            .iter()
            .enumerate()
            .skip(1)
            .map(|(slot, m)| {
                if self.family.contains(&EnclaveId::from_slot(slot)) {
                    let mut m = m.clone();
                    m.pc = 0;
                    m.regs.iter_mut().for_each(|r| *r = 0);
                    m.measurement = None;
                    m
                } else {
                    m.clone()
                }
            })
            .collect();
        let live_visible = os_running || !self.family.contains(&s.current);
        AdversaryView {
            current: s.current,
            pc: live_visible.then_some(s.pc),
            regs: live_visible.then(|| s.regs.clone()),
            page_table: s.page_table.clone(),
            os: s.meta[0].clone(),
            owner: s.owner.clone(),
            mem: self.family_observation(),
            enclaves,
            input_tapes: s
                .input_tapes
                .iter()
                .map(|t| t.iter().copied().collect())
                .collect(),
            output_tapes: s.output_tapes.clone(),
        }
    }
}

#[derive(Debug, PartialEq, Eq)]
struct AdversaryView {
    current: EnclaveId,
    pc: Option<usize>,
    regs: Option<Vec<Word>>,
    page_table: PageTable,
    os: EnclaveMetadata,
    owner: Vec<EnclaveId>,
    mem: Observation,
    enclaves: Vec<EnclaveMetadata>,
    input_tapes: Vec<Vec<Word>>,
    output_tapes: Vec<Vec<Word>>,
}

impl AdversaryView {
    fn first_difference(&self, other: &AdversaryView) -> String {
        if self.current != other.current {
            return format!("current {} vs {}", self.current, other.current);
        }
        if self.pc != other.pc || self.regs != other.regs {
            return String::from("live registers");
        }
        if self.page_table != other.page_table || self.os != other.os {
            return String::from("OS context");
        }
        if self.owner != other.owner {
            return String::from("owner map");
        }
        if let Some(p) = (0..self.mem.view.len()).find(|&p| self.mem.view[p] != other.mem.view[p]) {
            return format!("memory at pa {p}");
        }
        if let Some(i) = (0..self.enclaves.len()).find(|&i| self.enclaves[i] != other.enclaves[i]) {
            return format!("metadata of {}", EnclaveId::from_slot(i + 1));
        }
        String::from("tapes")
    }
}

fn validate(c: &TwoTraceConfig) -> Result<Layout, HarnessMisuse> {
    let cfg = &c.platform.cfg;
    let layout = Layout::for_config(cfg).ok_or(HarnessMisuse::Layout)?;
    for &e in &c.protected {
        let in_range = e
            .slot()
            .is_some_and(|s| (1..=cfg.max_enclaves).contains(&s));
        if !e.is_valid() || !in_range {
            return Err(HarnessMisuse::BadProtectedId(e));
        }
    }
    if c.mode != Mode::Measurement && c.protected[0] != c.protected[1] {
        return Err(HarnessMisuse::IdsDiffer);
    }
    let [p1, p2] = &c.programs;
    let image_ok = |p: &Program| p.image.len() == layout.private_vas();
    if !image_ok(p1) || !image_ok(p2) {
        return Err(HarnessMisuse::Layout);
    }
    match c.mode {
        Mode::Confidentiality => {
            if p1.with_secret(&layout, 0) != p2.with_secret(&layout, 0) {
                return Err(HarnessMisuse::NotSecretOnly);
            }
        }
        m => {
            if p1 != p2 {
                return Err(HarnessMisuse::ProgramsDiffer(m));
            }
        }
    }
    let [s1, s2] = &c.schedules;
    if s1.actions.len() != s2.actions.len() {
        return Err(HarnessMisuse::ScheduleShape(
            s1.actions.len().min(s2.actions.len()),
        ));
    }
    for (i, (a, b)) in s1.actions.iter().zip(&s2.actions).enumerate() {
        let ok = a == b
            || (c.mode != Mode::Confidentiality
                && matches!(
                    (a, b),
                    (AdversaryAction::TamperMem { pa: x, .. }, AdversaryAction::TamperMem { pa: y, .. })
                        if x == y
                ));
        if !ok {
            return Err(HarnessMisuse::ScheduleShape(i));
        }
    }
    Ok(layout)
}

/// Runs one lockstep pair.
pub fn run_two_trace(c: &TwoTraceConfig) -> Result<TwoTraceOutcome, HarnessMisuse> {
    let layout = validate(c)?;
    let p = &c.platform;
    let cfg = p.cfg;
    let [x, y] = c.protected;
    let to2 = |e: EnclaveId| rename(e, x, y);
    let check = c.mode.check();

    let mut report = InvariantReport::for_invariants();
    report.record_name(check);
    report.record_name(CLONE_MEASUREMENT);

    let mut sides = [0, 1].map(|k| Side {
        state: p.initial_state(),
        family: BTreeSet::from([c.protected[k]]),
        script: Vec::new(),
    });
    for (k, side) in sides.iter_mut().enumerate() {
        for (i, step) in c.programs[k]
            .setup(&cfg, &layout, c.protected[k])
            .into_iter()
            .enumerate()
        {
            side.apply(p, step)
                .map_err(|e| HarnessMisuse::Setup(i, k + 1, e))?;
        }
    }
    let views = [0, 1].map(|k| sides[k].state.project_enclave(c.protected[k]).ok());
    if c.mode != Mode::Confidentiality && views[0] != views[1] {
        return Err(HarnessMisuse::InitialViewsDiffer);
    }

    let mut outcome = TwoTraceOutcome {
        report,
        steps: 0,
        truncated: None,
        witness: None,
    };
    let fail = |outcome: &mut TwoTraceOutcome, sides: &[Side; 2], v: Violation| {
        if outcome.witness.is_none() {
            outcome.witness = Some(Witness {
                cfg,
                mutation: p.mutation,
                check: v.check,
                failing_step: v.index,
                scripts: [sides[0].script.clone(), sides[1].script.clone()],
                detail: v.detail.clone(),
            });
        }
        outcome.report.record(v);
    };
    let mut scratch = Vec::new();
    for side in &sides {
        invariant_violations(&side.state, side.script.len() - 1, &mut scratch);
    }
    for v in scratch.drain(..) {
        fail(&mut outcome, &sides, v);
    }
    outcome.report.evaluated += 1;

    let mut driver = Driver::new(c.driver_seed);
    let primary = x;
    while outcome.steps < c.budget {
        // antecedents on the pre-state
        let cur = [sides[0].state.current, sides[1].state.current];
        let protected_running = sides[0].family.contains(&cur[0]);
        if protected_running != sides[1].family.contains(&cur[1])
            || (protected_running && to2(cur[0]) != cur[1])
        {
            outcome.truncated = Some("scheduling");
            break;
        }
        if protected_running && sides[0].inputs(cur[0]) != sides[1].inputs(cur[1]) {
            outcome.truncated = Some("inputs");
            break;
        }
        let family: Vec<EnclaveId> = sides[0].family.iter().copied().collect();
        let Some(decision) = driver.decide(&sides[0].state, &c.schedules[0], &family) else {
            break;
        };
        let (step1, step2) = match decision {
            Decision::Schedule(a) => (a.clone(), swap_ids(&a, x, y)),
            Decision::Preempt { action, .. } => (action.clone(), action),
            Decision::Step => (Action::EnclaveStep, Action::EnclaveStep),
            Decision::Adversary { index } => {
                let act1 = &c.schedules[0].actions[index];
                let protected = match act1 {
                    AdversaryAction::TamperMem { pa, .. } => sides[0]
                        .family
                        .iter()
                        .copied()
                        .find(|&e| sides[0].state.in_protected_set(e, *pa))
                        .unwrap_or(primary),
                    _ => primary,
                };
                let a1 = Action::AdversaryStep {
                    protected,
                    act: act1.clone(),
                };
                let a2 = Action::AdversaryStep {
                    protected,
                    act: c.schedules[1].actions[index].clone(),
                };
                (a1, swap_ids(&a2, x, y))
            }
        };
        let obs_before = (c.mode == Mode::Confidentiality && protected_running)
            .then(|| [sides[0].family_observation(), sides[1].family_observation()]);
        let r1 = sides[0].apply(p, Step::Act(step1));
        let r2 = sides[1].apply(p, Step::Act(step2));
        outcome.steps += 1;
        outcome.report.evaluated += 1;
        let index = sides[0].script.len() - 1;

        for (k, r) in [&r1, &r2].into_iter().enumerate() {
            if let (Ok(Effect::Cloned { .. }), Some(Action::Clone { parent, child, .. })) =
                (r, inner_action(sides[k].script.last().unwrap()))
            {
                let s = &sides[k].state;
                if s.meta_of(*parent).map(|m| &m.measurement)
                    != s.meta_of(*child).map(|m| &m.measurement)
                {
                    fail(
                        &mut outcome,
                        &sides,
                        Violation {
                            check: CLONE_MEASUREMENT,
                            index,
                            enclave: Some(*child),
                            address: None,
                            detail: format!(
                                "trace {}: child measurement differs from {parent}",
                                k + 1
                            ),
                        },
                    );
                }
            }
        }
        for side in &sides {
            invariant_violations(&side.state, index, &mut scratch);
        }
        for v in scratch.drain(..) {
            fail(&mut outcome, &sides, v);
        }

        if sides[0]
            .family
            .iter()
            .map(|&e| to2(e))
            .collect::<BTreeSet<_>>()
            != sides[1].family
        {
            outcome.truncated = Some("family");
            break;
        }

        let violation = match c.mode {
            Mode::Integrity | Mode::Measurement => compare_views(&sides, to2),
            Mode::Confidentiality => {
                if let Some(before) = obs_before {
                    let after = [sides[0].family_observation(), sides[1].family_observation()];
                    if before[0] == before[1] && after[0] != after[1] {
                        return Err(HarnessMisuse::ObservationChanged(index));
                    }
                }
                compare_adversary(&sides, primary, &r1, &r2)
            }
        };
        if let Some((enclave, address, detail)) = violation {
            fail(
                &mut outcome,
                &sides,
                Violation {
                    check,
                    index,
                    enclave,
                    address,
                    detail,
                },
            );
            break;
        }
    }
    Ok(outcome)
}

type Mismatch = (Option<EnclaveId>, Option<usize>, String);

fn compare_views(sides: &[Side; 2], to2: impl Fn(EnclaveId) -> EnclaveId) -> Option<Mismatch> {
    for &e in &sides[0].family {
        let (s1, s2) = (&sides[0].state, &sides[1].state);
        let v1 = s1.project_enclave(e).ok();
        let v2 = s2.project_enclave(to2(e)).ok();
        if v1 != v2 {
            let detail = match (&v1, &v2) {
                (Some(a), Some(b)) => {
                    if let Some(va) = (0..a.vmem.len()).find(|&va| a.vmem[va] != b.vmem[va]) {
                        return Some((
                            Some(e),
                            Some(va),
                            format!(
                                "private memory at va {va}: {:?} vs {:?}",
                                a.vmem[va], b.vmem[va]
                            ),
                        ));
                    }
                    format!(
                        "enclave view: pc {} vs {}, regs {:?} vs {:?}",
                        a.pc, b.pc, a.regs, b.regs
                    )
                }
                _ => String::from("active in one trace only"),
            };
            return Some((Some(e), None, detail));
        }
        let o1 = &s1.output_tapes[e.slot().unwrap()];
        let o2 = &s2.output_tapes[to2(e).slot().unwrap()];
        if o1 != o2 {
            return Some((Some(e), None, format!("outputs {o1:?} vs {o2:?}")));
        }
    }
    None
}

/// Observation results with pages of the primary's relatives masked:
/// they are protected too, but the observation only hides the primary.
fn masked(r: &OpResult, side: &Side, primary: EnclaveId) -> OpResult {
    match r {
        Ok(Effect::Observed(o)) => {
            let s = &side.state;
            let view = o
                .view
                .iter()
                .enumerate()
                .map(|(p, &w)| {
                    let relative = side
                        .family
                        .iter()
                        .any(|&e| e != primary && s.in_protected_set(e, p));
                    if relative && !s.in_protected_set(primary, p) {
                        None
                    } else {
                        w
                    }
                })
                .collect();
            Ok(Effect::Observed(Observation { view }))
        }
        other => other.clone(),
    }
}

fn compare_adversary(
    sides: &[Side; 2],
    primary: EnclaveId,
    r1: &OpResult,
    r2: &OpResult,
) -> Option<Mismatch> {
    let (m1, m2) = (
        masked(r1, &sides[0], primary),
        masked(r2, &sides[1], primary),
    );
    if m1 != m2 {
        let address = match (&m1, &m2) {
            (Ok(Effect::Observed(a)), Ok(Effect::Observed(b))) => {
                (0..a.view.len()).find(|&p| a.view[p] != b.view[p])
            }
            _ => None,
        };
        return Some((None, address, format!("results differ: {m1:?} vs {m2:?}")));
    }
    let (a, b) = (sides[0].adversary_view(), sides[1].adversary_view());
    if a != b {
        return Some((None, None, a.first_difference(&b)));
    }
    None
}

/// Seeded campaign of independent lockstep runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CampaignConfig {
    pub cfg: PlatformConfig,
    pub mode: Mode,
    pub seed: u64,
    pub trials: u64,
    /// Adversary schedule length per trial.
    pub len: usize,
    pub mutation: Option<Mutation>,
}

impl CampaignConfig {
    pub fn new(mode: Mode, seed: u64, trials: u64, len: usize) -> Self {
        CampaignConfig {
            cfg: PlatformConfig::small(),
            mode,
            seed,
            trials,
            len,
            mutation: None,
        }
    }

    /// The lockstep run of trial `t`.
    pub fn trial(&self, t: u64) -> TwoTraceConfig {
        let mut rng = SplitMix64::new(trial_seed(self.seed, t));
        let cfg = &self.cfg;
        let layout = Layout::for_config(cfg);
        let discipline = match self.mode {
            Mode::Confidentiality => Discipline::SecretIsolated,
            _ => Discipline::Free,
        };
        let (program, public_pa) = match &layout {
            Some(l) => (random_program(&mut rng, cfg, l, discipline), l.public_pa),
            None => (
                Program {
                    image: Vec::new(),
                    tape: Vec::new(),
                    public: 0,
                },
                0,
            ),
        };
        let schedule = generate_schedule(rng.next_u64(), cfg, self.len);
        let (second_program, second_schedule) = match (self.mode, &layout) {
            (Mode::Confidentiality, Some(l)) => {
                let old = program.secret(l);
                let mask = cfg.word_mask();
                let new = (old.wrapping_add(1 + (rng.next_u64() as Word % mask.max(1)))) & mask;
                (program.with_secret(l, new), schedule.clone())
            }
            (Mode::Confidentiality, None) => (program.clone(), schedule.clone()),
            _ => {
                let s2 = perturb_tampering(&schedule, cfg, rng.next_u64(), &[public_pa]);
                (program.clone(), s2)
            }
        };
        let protected = match self.mode {
            Mode::Measurement => [EnclaveId::Id(1), EnclaveId::Id(2)],
            _ => [EnclaveId::Id(1); 2],
        };
        TwoTraceConfig {
            platform: Platform::new(self.cfg).with_mutation(self.mutation),
            mode: self.mode,
            protected,
            schedules: [schedule, second_schedule],
            programs: [program, second_program],
            driver_seed: rng.next_u64(),
            budget: 4 * self.len,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CampaignReport {
    pub mode: Mode,
    pub seed: u64,
    pub trials: u64,
    pub steps: u64,
    pub truncated: u64,
    pub failed_trials: u64,
    pub first_failed_trial: Option<u64>,
    pub misuse: u64,
    pub first_misuse: Option<(u64, HarnessMisuse)>,
    pub report: InvariantReport,
    pub witness: Option<Witness>,
}

impl CampaignReport {
    pub fn empty(c: &CampaignConfig) -> Self {
        let mut report = InvariantReport::for_invariants();
        report.record_name(c.mode.check());
        report.record_name(CLONE_MEASUREMENT);
        CampaignReport {
            mode: c.mode,
            seed: c.seed,
            trials: 0,
            steps: 0,
            truncated: 0,
            failed_trials: 0,
            first_failed_trial: None,
            misuse: 0,
            first_misuse: None,
            report,
            witness: None,
        }
    }

    pub fn all_pass(&self) -> bool {
        self.misuse == 0 && self.failed_trials == 0 && self.report.all_pass()
    }

    /// Folds in a report over later trials.
    pub fn merge(&mut self, other: CampaignReport) {
        self.trials += other.trials;
        self.steps += other.steps;
        self.truncated += other.truncated;
        self.failed_trials += other.failed_trials;
        self.misuse += other.misuse;
        if self.first_failed_trial.is_none() {
            self.first_failed_trial = other.first_failed_trial;
            self.witness = other.witness;
        }
        if self.first_misuse.is_none() {
            self.first_misuse = other.first_misuse;
        }
        self.report.absorb(&other.report);
    }
}

/// Runs the trials in `range` in order.
pub fn run_trials(c: &CampaignConfig, range: Range<u64>) -> CampaignReport {
    let mut out = CampaignReport::empty(c);
    for t in range {
        out.trials += 1;
        match run_two_trace(&c.trial(t)) {
            Ok(o) => {
                out.steps += o.steps as u64;
                if o.truncated.is_some() {
                    out.truncated += 1;
                }
                if !o.passed() {
                    out.failed_trials += 1;
                    if out.first_failed_trial.is_none() {
                        out.first_failed_trial = Some(t);
                        out.witness = o.witness.clone();
                    }
                }
                out.report.absorb(&o.report);
            }
            Err(e) => {
                out.misuse += 1;
                if out.first_misuse.is_none() {
                    out.first_misuse = Some((t, e));
                }
            }
        }
    }
    out
}

/// Runs every trial of the campaign.
pub fn run_campaign(c: &CampaignConfig) -> CampaignReport {
    run_trials(c, 0..c.trials)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_runs_pass() {
        for mode in Mode::ALL {
            let c = CampaignConfig::new(mode, 11, 30, 20);
            let r = run_campaign(&c);
            assert!(r.all_pass(), "{mode}: {r:?}");
            assert_eq!(r.trials, 30);
            assert!(r.steps > 0);
        }
    }

    #[test]
    fn misuse_is_rejected() {
        let c = CampaignConfig::new(Mode::Integrity, 1, 1, 10);
        let mut t = c.trial(0);
        t.programs[1].tape.push(1);
        assert_eq!(
            run_two_trace(&t),
            Err(HarnessMisuse::ProgramsDiffer(Mode::Integrity))
        );
        let c = CampaignConfig::new(Mode::Confidentiality, 1, 1, 10);
        let mut t = c.trial(0);
        t.programs[1].public ^= 1;
        assert_eq!(run_two_trace(&t), Err(HarnessMisuse::NotSecretOnly));
        let mut t = c.trial(0);
        t.protected[1] = EnclaveId::Id(2);
        assert_eq!(run_two_trace(&t), Err(HarnessMisuse::IdsDiffer));
    }

    #[test]
    fn leaky_observation_is_caught() {
        let mut c = CampaignConfig::new(Mode::Confidentiality, 5, 200, 20);
        c.mutation = Some(Mutation::ObserveExposesProtected);
        let r = run_campaign(&c);
        assert!(r.failed_trials > 0);
        let w = r.witness.unwrap();
        assert_eq!(w.check, "confidentiality");
        assert_eq!(w.scripts[0].len(), w.failing_step + 1);
    }
}
