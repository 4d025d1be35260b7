// SPDX-License-Identifier: Apache-2.0

//! The `tapc` command line.
//!
//! Exit status: 0 when every check passes, 1 on a violation (a witness
//! scenario is written where one exists), 2 on usage, input or parse
//! errors.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use tapc_core::ops::{Mutation, Step};
use tapc_core::properties::two_trace::run_campaign;
use tapc_core::properties::{
    explore, measurement_campaign, oracle::oracle_equivalence, ActionBounds, CampaignConfig,
    CampaignReport, InvariantReport, Mode,
};
use tapc_core::{Platform, PlatformConfig};

use crate::bench::bench_clone;
use crate::run::{format_digest, run_scenario, RunOptions};
use crate::scenario::parse_scenario;
use crate::witness::{lazy_config, replay_scenario, two_trace_scenarios, write_scenario};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "tapc",
    version,
    about = "Enclave platform model with snapshot/clone: scenarios, checkers, explorer"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct CampaignArgs {
    /// Campaign seed.
    #[arg(long, env = "TAPC_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 100)]
    pub trials: u64,
    /// Adversary schedule length per trial.
    #[arg(long, default_value_t = 20)]
    pub len: usize,
    /// Run against a deliberately broken platform.
    #[arg(long, value_parser = parse_mutation)]
    pub inject: Option<Mutation>,
    /// Where witness scenarios are written.
    #[arg(long, default_value = "tapc-witnesses")]
    pub witness_dir: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Execute a scenario and emit one trace record per step.
    Run {
        #[arg(long)]
        scenario: PathBuf,
        /// Include the full state in every record.
        #[arg(long)]
        dump_state: bool,
        /// Write trace records here instead of stdout.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Execute a scenario, checking every invariant after each step.
    CheckInvariants {
        #[arg(long)]
        scenario: PathBuf,
    },
    /// Two-trace integrity campaign.
    CheckIntegrity(CampaignArgs),
    /// Two-trace confidentiality campaign.
    CheckConfidentiality(CampaignArgs),
    /// Measurement biconditional plus two-trace measurement campaign.
    CheckMeasurement(CampaignArgs),
    /// Lazy copy-on-write platform against the eager-copy oracle.
    CheckOracle(CampaignArgs),
    /// Bounded exhaustive search over every reachable state.
    Explore {
        #[arg(long)]
        va: usize,
        #[arg(long)]
        pa: usize,
        #[arg(long)]
        depth: usize,
        /// Visited-state limit.
        #[arg(long, default_value_t = 20_000_000)]
        cap: usize,
        #[arg(long, value_parser = parse_mutation)]
        inject: Option<Mutation>,
        #[arg(long, default_value = "tapc-witnesses")]
        witness_dir: PathBuf,
    },
    /// Count the pages copied by cloning a diverged child.
    BenchClone {
        #[arg(long)]
        snapshot_pages: usize,
        #[arg(long)]
        diverged: usize,
    },
}

fn parse_mutation(s: &str) -> Result<Mutation, String> {
    Mutation::from_name(s).ok_or_else(|| {
        let names: Vec<&str> = Mutation::ALL.iter().map(|m| m.name()).collect();
        format!("unknown mutation `{s}` (one of {})", names.join(", "))
    })
}

fn mutation_name(m: Option<Mutation>) -> &'static str {
    m.map_or("none", Mutation::name)
}

fn verdict(pass: bool) -> &'static str {
    if pass {
        "pass"
    } else {
        "FAIL"
    }
}

fn write_report(out: &mut String, r: &InvariantReport) {
    for o in &r.outcomes {
        let _ = write!(out, "  {:<24} failures={}", o.name, o.failures);
        if let Some(v) = &o.first {
            let _ = write!(out, "  first: {v}");
        }
        out.push('\n');
    }
}

/// Runs the CLI on `args` (program name first).
pub fn run_cli<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() {
                EXIT_USAGE
            } else {
                EXIT_PASS
            };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                stderr.write_all(text.as_bytes())
            } else {
                stdout.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match execute(cli.command, stdout, stderr) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "tapc: {e}");
            EXIT_USAGE
        }
    }
}

/// Errors that make a command unusable (exit status 2).
#[derive(Debug, thiserror::Error)]
enum UsageError {
    #[error("{path}: {err}")]
    Read { path: PathBuf, err: io::Error },
    #[error("{path}: {err}")]
    Parse {
        path: PathBuf,
        err: crate::scenario::ScenarioError,
    },
    #[error("{0}")]
    Io(#[from] io::Error),
    #[error("{0}")]
    Config(#[from] tapc_core::ConfigError),
    #[error("{0}")]
    Bench(#[from] crate::bench::BenchError),
}

fn load(path: &Path) -> Result<crate::scenario::Scenario, UsageError> {
    let text = fs::read_to_string(path).map_err(|err| UsageError::Read {
        path: path.into(),
        err,
    })?;
    parse_scenario(&text).map_err(|err| UsageError::Parse {
        path: path.into(),
        err,
    })
}

fn execute(
    cmd: Command,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<i32, UsageError> {
    match cmd {
        Command::Run {
            scenario,
            dump_state,
            trace,
        } => {
            let s = load(&scenario)?;
            let r = run_scenario(
                &s,
                RunOptions {
                    dump_state,
                    invariants: false,
                },
            );
            let mut lines = String::new();
            for rec in &r.records {
                lines.push_str(&rec.to_json());
                lines.push('\n');
            }
            match &trace {
                Some(p) => fs::write(p, lines)?,
                None => stdout.write_all(lines.as_bytes())?,
            }
            let digest = r
                .final_state
                .as_ref()
                .zip(s.config.as_ref())
                .map(|(st, c)| format_digest(st.digest(&c.platform)));
            writeln!(
                stderr,
                "steps={} expectations={} final_digest={}",
                r.records.len(),
                r.expectations,
                digest.as_deref().unwrap_or("none")
            )?;
            if let Some(f) = &r.failure {
                writeln!(stderr, "FAIL: {f}")?;
                return Ok(EXIT_VIOLATION);
            }
            Ok(EXIT_PASS)
        }
        Command::CheckInvariants { scenario } => {
            let s = load(&scenario)?;
            let r = run_scenario(
                &s,
                RunOptions {
                    dump_state: false,
                    invariants: true,
                },
            );
            let mut out = String::new();
            let states = if s.config.is_some() {
                r.records.len() + 1
            } else {
                0
            };
            let _ = writeln!(
                out,
                "check-invariants states={states} violations={}",
                r.violations.len()
            );
            for v in &r.violations {
                let _ = writeln!(out, "  {v}");
            }
            if let Some(f) = &r.failure {
                let _ = writeln!(out, "  expectation: {f}");
            }
            let _ = writeln!(out, "result: {}", verdict(r.passed()));
            stdout.write_all(out.as_bytes())?;
            Ok(if r.passed() {
                EXIT_PASS
            } else {
                EXIT_VIOLATION
            })
        }
        Command::CheckIntegrity(a) => campaign("check-integrity", Mode::Integrity, &a, stdout),
        Command::CheckConfidentiality(a) => {
            campaign("check-confidentiality", Mode::Confidentiality, &a, stdout)
        }
        Command::CheckMeasurement(a) => measurement(&a, stdout),
        Command::CheckOracle(a) => oracle(&a, stdout),
        Command::Explore {
            va,
            pa,
            depth,
            cap,
            inject,
            witness_dir,
        } => {
            let cfg = PlatformConfig::explorer(va, pa)?;
            let p = Platform::new(cfg).with_mutation(inject);
            let mut bounds = ActionBounds::for_config(&cfg);
            bounds.cap = cap;
            let mut out = String::new();
            let _ = writeln!(
                out,
                "explore va={va} pa={pa} enclaves={} depth={depth} cap={cap} mutation={}",
                cfg.max_enclaves,
                mutation_name(inject)
            );
            let start = std::time::Instant::now();
            let r = match explore(&p, depth, &bounds) {
                Ok(r) => r,
                Err(e) => {
                    let _ = writeln!(out, "incomplete: {e}\nresult: FAIL");
                    stdout.write_all(out.as_bytes())?;
                    return Ok(EXIT_VIOLATION);
                }
            };
            writeln!(stderr, "explore finished in {:.2?}", start.elapsed())?;
            let per: Vec<String> = r.per_depth.iter().map(|n| n.to_string()).collect();
            let _ = writeln!(
                out,
                "alphabet={} visited={} transitions={} evaluated={}\nper_depth={}",
                r.alphabet,
                r.visited,
                r.transitions,
                r.report.evaluated,
                per.join(",")
            );
            write_report(&mut out, &r.report);
            if let Some(path) = &r.witness {
                let steps: Vec<Step> = path.iter().cloned().map(Step::Act).collect();
                let sc = replay_scenario(lazy_config(cfg, inject), &steps);
                let file = write_scenario(&witness_dir, "explore.tapc", &sc)?;
                let _ = writeln!(out, "witness: {} ({} actions)", file.display(), steps.len());
            }
            let _ = writeln!(out, "result: {}", verdict(r.all_pass()));
            stdout.write_all(out.as_bytes())?;
            Ok(if r.all_pass() {
                EXIT_PASS
            } else {
                EXIT_VIOLATION
            })
        }
        Command::BenchClone {
            snapshot_pages,
            diverged,
        } => {
            let r = bench_clone(snapshot_pages, diverged)?;
            writeln!(
                stdout,
                "bench-clone snapshot_pages={} diverged={} pages_copied={} first_clone_copied={} wall_time_ns={}",
                r.snapshot_pages,
                r.diverged,
                r.pages_copied,
                r.first_clone_copied,
                r.wall_time.as_nanos()
            )?;
            Ok(EXIT_PASS)
        }
    }
}

fn campaign_config(mode: Mode, a: &CampaignArgs) -> CampaignConfig {
    let mut c = CampaignConfig::new(mode, a.seed, a.trials, a.len);
    c.mutation = a.inject;
    c
}

fn write_campaign(out: &mut String, r: &CampaignReport) {
    let _ = writeln!(
        out,
        "trials={} steps={} truncated={} failed_trials={} misuse={}",
        r.trials, r.steps, r.truncated, r.failed_trials, r.misuse
    );
    if let Some(t) = r.first_failed_trial {
        let _ = writeln!(out, "first_failed_trial={t}");
    }
    if let Some((t, m)) = &r.first_misuse {
        let _ = writeln!(out, "first_misuse: trial {t}: {m}");
    }
    write_report(out, &r.report);
}

/// Writes both traces of the campaign's witness, if any.
fn emit_witness(out: &mut String, r: &CampaignReport, dir: &Path, stem: &str) -> io::Result<()> {
    if let Some(w) = &r.witness {
        let [a, b] = two_trace_scenarios(w);
        let fa = write_scenario(dir, &format!("{stem}-trace1.tapc"), &a)?;
        let fb = write_scenario(dir, &format!("{stem}-trace2.tapc"), &b)?;
        let _ = writeln!(
            out,
            "witness: {} {} (check {} after step {}: {})",
            fa.display(),
            fb.display(),
            w.check,
            w.failing_step,
            w.detail
        );
    }
    Ok(())
}

fn header(out: &mut String, name: &str, a: &CampaignArgs) {
    let _ = writeln!(
        out,
        "{name} seed={} trials={} len={} mutation={}",
        a.seed,
        a.trials,
        a.len,
        mutation_name(a.inject)
    );
}

fn campaign(
    name: &str,
    mode: Mode,
    a: &CampaignArgs,
    stdout: &mut dyn Write,
) -> Result<i32, UsageError> {
    let r = run_campaign(&campaign_config(mode, a));
    let mut out = String::new();
    header(&mut out, name, a);
    write_campaign(&mut out, &r);
    emit_witness(&mut out, &r, &a.witness_dir, name)?;
    let pass = r.all_pass();
    let _ = writeln!(out, "result: {}", verdict(pass));
    stdout.write_all(out.as_bytes())?;
    Ok(if pass { EXIT_PASS } else { EXIT_VIOLATION })
}

fn measurement(a: &CampaignArgs, stdout: &mut dyn Write) -> Result<i32, UsageError> {
    let c = campaign_config(Mode::Measurement, a);
    let m = measurement_campaign(&c.cfg, a.seed, a.trials);
    let r = run_campaign(&c);
    let mut out = String::new();
    header(&mut out, "check-measurement", a);
    let _ = writeln!(
        out,
        "biconditional: rounds={} checked={} equal_pairs={} failures={}",
        a.trials, m.checked, m.equal_pairs, m.failures
    );
    if let Some((x, y)) = &m.first_failure {
        let _ = writeln!(out, "  first: {x:?} vs {y:?}");
    }
    let _ = write!(out, "lockstep: ");
    write_campaign(&mut out, &r);
    emit_witness(&mut out, &r, &a.witness_dir, "check-measurement")?;
    let pass = m.all_pass() && r.all_pass();
    let _ = writeln!(out, "result: {}", verdict(pass));
    stdout.write_all(out.as_bytes())?;
    Ok(if pass { EXIT_PASS } else { EXIT_VIOLATION })
}

fn oracle(a: &CampaignArgs, stdout: &mut dyn Write) -> Result<i32, UsageError> {
    let r = oracle_equivalence(a.seed, a.trials, a.len, a.inject);
    let mut out = String::new();
    header(&mut out, "check-oracle", a);
    let _ = writeln!(
        out,
        "steps={} clones={} lazy_pages_copied={} eager_pages_copied={} mismatches={}",
        r.steps,
        r.clones,
        r.lazy_pages_copied,
        r.eager_pages_copied,
        r.mismatches()
    );
    write_report(&mut out, &r.report);
    if let Some((t, steps)) = &r.first_mismatch {
        let sc = replay_scenario(lazy_config(PlatformConfig::small(), a.inject), steps);
        let f = write_scenario(&a.witness_dir, "check-oracle.tapc", &sc)?;
        let _ = writeln!(out, "witness: {} (trial {t}, lazy platform)", f.display());
    }
    let _ = writeln!(out, "result: {}", verdict(r.all_pass()));
    stdout.write_all(out.as_bytes())?;
    Ok(if r.all_pass() {
        EXIT_PASS
    } else {
        EXIT_VIOLATION
    })
}
