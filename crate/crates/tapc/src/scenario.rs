// SPDX-License-Identifier: Apache-2.0

//! The scenario file format.
//!
//! One directive per line; `#` starts a comment. Arguments are `key=value`
//! pairs, numbers are decimal or `0x` hex, lists are comma separated.
//!
//! ```text
//! config va=4 pa=8 regs=2 word=8
//! oswrite pa=2 off=0 words=0x01,0x07
//! launch id=1 ep=0 map=0:2:rx,1:3:rw ev=0,1 pages=2,3
//! enter id=1
//! step n=3
//! expect ok
//! clone parent=1 child=1 pages=4
//! expect err=SelfClone
//! adversary protect=1 tamper pa=5 word=0xab
//! adversary protect=1 call destroy id=1
//! ```
//!
//! `config` must come first. Ids are `1..=enclaves`, or `os` / `invalid`
//! for the sentinels. Permissions are written `r`, `w`, `x` in that order,
//! or `-` for none.

use std::collections::BTreeSet;
use std::fmt::{self, Write as _};

use tapc_core::adversary::AdversaryAction;
use tapc_core::machine::FaultCode;
use tapc_core::ops::{Action, CopyPolicy, LaunchArgs, Mutation, OpError, Step};
use tapc_core::{EnclaveId, PageTable, Perm, PlatformConfig, Pte, Word};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScenarioError {
    #[error("line {line}, column {col}: {msg}")]
    Parse {
        line: usize,
        col: usize,
        msg: String,
    },
    #[error("line {line}, column {col}: unknown directive `{name}`")]
    UnknownDirective {
        line: usize,
        col: usize,
        name: String,
    },
    #[error("line {line}, column {col}: {msg}")]
    Range {
        line: usize,
        col: usize,
        msg: String,
    },
}

/// Platform settings from the `config` line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScenarioConfig {
    pub platform: PlatformConfig,
    pub policy: CopyPolicy,
    pub inject: Option<Mutation>,
}

/// What an `expect` line checks against the previous result.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expectation {
    Ok,
    Err(OpError),
    Fault(FaultCode),
    Output(Word),
    Copied(usize),
    /// Digest of the state after the previous step.
    Digest(u64),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Directive {
    OsWrite {
        pa: usize,
        off: usize,
        words: Vec<Word>,
    },
    Input {
        id: EnclaveId,
        words: Vec<Word>,
    },
    Act(Action),
    /// `n` enclave steps.
    Step(usize),
    Expect(Expectation),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Line {
    pub line: usize,
    pub directive: Directive,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Scenario {
    /// `None` only for a file without directives.
    pub config: Option<ScenarioConfig>,
    pub lines: Vec<Line>,
}

impl Scenario {
    pub fn new(config: ScenarioConfig) -> Self {
        Scenario {
            config: Some(config),
            lines: Vec::new(),
        }
    }

    pub fn push(&mut self, directive: Directive) {
        let line = self.lines.len() + 2;
        self.lines.push(Line { line, directive });
    }

    /// A scenario executing `steps` verbatim.
    pub fn from_steps<'a>(
        config: ScenarioConfig,
        steps: impl IntoIterator<Item = &'a Step>,
    ) -> Self {
        let mut s = Scenario::new(config);
        for step in steps {
            s.push(match step {
                Step::OsWrite { pa, words } => Directive::OsWrite {
                    pa: *pa,
                    off: 0,
                    words: words.clone(),
                },
                Step::Input { id, words } => Directive::Input {
                    id: *id,
                    words: words.clone(),
                },
                Step::Act(Action::EnclaveStep) => Directive::Step(1),
                Step::Act(a) => Directive::Act(a.clone()),
            });
        }
        s
    }
}

// ---------------------------------------------------------------------------
// Printing
// ---------------------------------------------------------------------------

struct Ids<'a>(&'a [usize]);

impl fmt::Display for Ids<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_char(',')?;
            }
            write!(f, "{x}")?;
        }
        Ok(())
    }
}

struct Words<'a>(&'a [Word]);

impl fmt::Display for Words<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, w) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_char(',')?;
            }
            write!(f, "{w:#04x}")?;
        }
        Ok(())
    }
}

pub fn format_id(e: EnclaveId) -> String {
    match e {
        EnclaveId::Os => "os".into(),
        EnclaveId::Invalid => "invalid".into(),
        EnclaveId::Id(i) => i.to_string(),
    }
}

fn set(pages: &BTreeSet<usize>) -> Vec<usize> {
    pages.iter().copied().collect()
}

/// Normalized text of one action.
pub fn format_action(a: &Action) -> String {
    match a {
        Action::Launch(l) => {
            let map: Vec<String> = l
                .page_table
                .0
                .iter()
                .enumerate()
                .filter_map(|(va, p)| p.map(|p| format!("{va}:{}:{}", p.pa, p.perm)))
                .collect();
            let ev: Vec<usize> = (0..l.private.len()).filter(|&va| l.private[va]).collect();
            format!(
                "launch id={} ep={} map={} ev={} pages={}",
                format_id(l.id),
                l.ep,
                map.join(","),
                Ids(&ev),
                Ids(&set(&l.pages))
            )
        }
        Action::Destroy(e) => format!("destroy id={}", format_id(*e)),
        Action::Enter(e) => format!("enter id={}", format_id(*e)),
        Action::Resume(e) => format!("resume id={}", format_id(*e)),
        Action::Exit => "exit".into(),
        Action::Pause => "pause".into(),
        Action::Snapshot => "snapshot".into(),
        Action::Clone {
            parent,
            child,
            pages,
        } => format!(
            "clone parent={} child={} pages={}",
            format_id(*parent),
            format_id(*child),
            Ids(&set(pages))
        ),
        Action::EnclaveStep => "step n=1".into(),
        Action::AdversaryStep { protected, act } => {
            let body = match act {
                AdversaryAction::TamperMem { pa, word } => {
                    format!("tamper pa={pa} word={word:#04x}")
                }
                AdversaryAction::TamperOsPageTable { va, pa, perm } => {
                    format!("ptable va={va} pa={pa} perm={perm}")
                }
                AdversaryAction::Observe => "observe".into(),
                AdversaryAction::CallOp(a) => format!("call {}", format_action(a)),
            };
            format!("adversary protect={} {body}", format_id(*protected))
        }
    }
}

impl fmt::Display for Directive {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Directive::OsWrite { pa, off, words } => {
                write!(f, "oswrite pa={pa} off={off} words={}", Words(words))
            }
            Directive::Input { id, words } => {
                write!(f, "input id={} words={}", format_id(*id), Words(words))
            }
            Directive::Act(a) => f.write_str(&format_action(a)),
            Directive::Step(n) => write!(f, "step n={n}"),
            Directive::Expect(e) => match e {
                Expectation::Ok => f.write_str("expect ok"),
                Expectation::Err(c) => write!(f, "expect err={}", c.name()),
                Expectation::Fault(c) => write!(f, "expect fault={}", c.name()),
                Expectation::Output(w) => write!(f, "expect output={w:#04x}"),
                Expectation::Copied(n) => write!(f, "expect copied={n}"),
                Expectation::Digest(d) => write!(f, "expect digest={d:#018x}"),
            },
        }
    }
}

impl fmt::Display for ScenarioConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = &self.platform;
        write!(
            f,
            "config va={} pa={} regs={} word={} enclaves={}",
            c.n_va, c.n_pa, c.n_regs, c.word_bits, c.max_enclaves
        )?;
        if self.policy == CopyPolicy::Eager {
            f.write_str(" policy=eager")?;
        }
        if let Some(m) = self.inject {
            write!(f, " inject={m}")?;
        }
        Ok(())
    }
}

impl fmt::Display for Scenario {
    /// Normalized form: one directive per line, no comments.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(c) = &self.config {
            writeln!(f, "{c}")?;
        }
        for l in &self.lines {
            writeln!(f, "{}", l.directive)?;
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy)]
struct Token<'a> {
    text: &'a str,
    col: usize,
}

struct Cursor<'a> {
    line: usize,
    tokens: Vec<Token<'a>>,
    pos: usize,
    end_col: usize,
}

impl<'a> Cursor<'a> {
    fn new(line: usize, text: &'a str) -> Self {
        let mut tokens = Vec::new();
        let mut start = None;
        for (i, ch) in text.char_indices() {
            match (ch.is_whitespace(), start) {
                (true, Some(s)) => {
                    tokens.push(Token {
                        text: &text[s..i],
                        col: s + 1,
                    });
                    start = None;
                }
                (false, None) => start = Some(i),
                _ => {}
            }
        }
        if let Some(s) = start {
            tokens.push(Token {
                text: &text[s..],
                col: s + 1,
            });
        }
        Cursor {
            line,
            tokens,
            pos: 0,
            end_col: text.len() + 1,
        }
    }

    fn parse_err(&self, col: usize, msg: impl Into<String>) -> ScenarioError {
        ScenarioError::Parse {
            line: self.line,
            col,
            msg: msg.into(),
        }
    }

    fn range_err(&self, col: usize, msg: impl Into<String>) -> ScenarioError {
        ScenarioError::Range {
            line: self.line,
            col,
            msg: msg.into(),
        }
    }

    fn next(&mut self) -> Option<Token<'a>> {
        let t = self.tokens.get(self.pos).copied();
        self.pos += 1;
        t
    }

    fn word(&mut self, what: &str) -> Result<Token<'a>, ScenarioError> {
        self.next()
            .ok_or_else(|| self.parse_err(self.end_col, format!("expected {what}")))
    }

    /// The value of the next token, which must be `key=...`.
    fn arg(&mut self, key: &str) -> Result<Token<'a>, ScenarioError> {
        let t = self.word(&format!("`{key}=`"))?;
        match t.text.split_once('=') {
            Some((k, v)) if k == key => Ok(Token {
                text: v,
                col: t.col + k.len() + 1,
            }),
            _ => Err(self.parse_err(t.col, format!("expected `{key}=`, found `{}`", t.text))),
        }
    }

    fn finish(&mut self) -> Result<(), ScenarioError> {
        match self.next() {
            None => Ok(()),
            Some(t) => Err(self.parse_err(t.col, format!("unexpected `{}`", t.text))),
        }
    }
}

fn parse_err(line: usize, col: usize, msg: impl Into<String>) -> ScenarioError {
    ScenarioError::Parse {
        line,
        col,
        msg: msg.into(),
    }
}

fn range_err(line: usize, col: usize, msg: impl Into<String>) -> ScenarioError {
    ScenarioError::Range {
        line,
        col,
        msg: msg.into(),
    }
}

fn number(line: usize, t: Token) -> Result<u64, ScenarioError> {
    let parsed = match t
        .text
        .strip_prefix("0x")
        .or_else(|| t.text.strip_prefix("0X"))
    {
        Some(hex) => u64::from_str_radix(hex, 16),
        None => t.text.parse::<u64>(),
    };
    parsed.map_err(|_| parse_err(line, t.col, format!("invalid number `{}`", t.text)))
}

fn list<'a>(t: Token<'a>) -> impl Iterator<Item = Token<'a>> {
    let mut col = t.col;
    t.text
        .split(',')
        .filter(|s| !s.is_empty())
        .map(move |s| {
            let tok = Token { text: s, col };
            col += s.len() + 1;
            tok
        })
        .collect::<Vec<_>>()
        .into_iter()
}

struct Bounds {
    cfg: PlatformConfig,
}

impl Bounds {
    fn below(
        &self,
        line: usize,
        t: Token,
        limit: usize,
        what: &str,
    ) -> Result<usize, ScenarioError> {
        let v = number(line, t)?;
        if v >= limit as u64 {
            return Err(range_err(
                line,
                t.col,
                format!("{what} {v} out of range (limit {limit})"),
            ));
        }
        Ok(v as usize)
    }

    fn va(&self, line: usize, t: Token) -> Result<usize, ScenarioError> {
        self.below(line, t, self.cfg.n_va, "virtual address")
    }

    fn pa(&self, line: usize, t: Token) -> Result<usize, ScenarioError> {
        self.below(line, t, self.cfg.n_pa, "physical address")
    }

    fn word(&self, line: usize, t: Token) -> Result<Word, ScenarioError> {
        let v = number(line, t)?;
        if v > self.cfg.word_mask() as u64 {
            return Err(range_err(
                line,
                t.col,
                format!("word {v:#x} wider than {} bits", self.cfg.word_bits),
            ));
        }
        Ok(v as Word)
    }

    fn words(&self, line: usize, t: Token) -> Result<Vec<Word>, ScenarioError> {
        list(t).map(|t| self.word(line, t)).collect()
    }

    fn pages(&self, line: usize, t: Token) -> Result<BTreeSet<usize>, ScenarioError> {
        list(t).map(|t| self.pa(line, t)).collect()
    }

    fn id(&self, line: usize, t: Token) -> Result<EnclaveId, ScenarioError> {
        match t.text {
            "os" => Ok(EnclaveId::Os),
            "invalid" => Ok(EnclaveId::Invalid),
            _ => {
                let v = number(line, t)?;
                if v == 0 || v > self.cfg.max_enclaves as u64 {
                    return Err(range_err(
                        line,
                        t.col,
                        format!("enclave id {v} out of range 1..={}", self.cfg.max_enclaves),
                    ));
                }
                Ok(EnclaveId::Id(v as u8))
            }
        }
    }
}

fn perm(line: usize, t: Token) -> Result<Perm, ScenarioError> {
    if t.text == "-" {
        return Ok(Perm::NONE);
    }
    let mut p = Perm::NONE;
    let mut last = 0;
    for ch in t.text.chars() {
        let rank = match ch {
            'r' => 1,
            'w' => 2,
            'x' => 3,
            _ => 0,
        };
        if rank <= last {
            return Err(parse_err(
                line,
                t.col,
                format!("invalid permission `{}`", t.text),
            ));
        }
        last = rank;
        match ch {
            'r' => p.read = true,
            'w' => p.write = true,
            _ => p.execute = true,
        }
    }
    Ok(p)
}

fn parse_action(
    c: &mut Cursor,
    b: &Bounds,
    head: Token,
) -> Result<Option<Directive>, ScenarioError> {
    let act = match head.text {
        "launch" => {
            let id = b.id(c.line, c.arg("id")?)?;
            let ep = b.va(c.line, c.arg("ep")?)?;
            let mut page_table = PageTable::empty(b.cfg.n_va);
            for e in list(c.arg("map")?) {
                let parts: Vec<&str> = e.text.split(':').collect();
                if parts.len() != 3 {
                    return Err(
                        c.parse_err(e.col, format!("expected va:pa:perm, found `{}`", e.text))
                    );
                }
                let va_t = Token {
                    text: parts[0],
                    col: e.col,
                };
                let pa_t = Token {
                    text: parts[1],
                    col: e.col + parts[0].len() + 1,
                };
                let perm_t = Token {
                    text: parts[2],
                    col: pa_t.col + parts[1].len() + 1,
                };
                let va = b.va(c.line, va_t)?;
                if page_table.get(va).is_some() {
                    return Err(c.parse_err(va_t.col, format!("address {va} mapped twice")));
                }
                let pa = b.pa(c.line, pa_t)?;
                page_table.set(
                    va,
                    Some(Pte {
                        pa,
                        perm: perm(c.line, perm_t)?,
                    }),
                );
            }
            let mut private = vec![false; b.cfg.n_va];
            for t in list(c.arg("ev")?) {
                private[b.va(c.line, t)?] = true;
            }
            let pages = b.pages(c.line, c.arg("pages")?)?;
            Action::Launch(LaunchArgs {
                id,
                ep,
                page_table,
                private,
                pages,
            })
        }
        "destroy" => Action::Destroy(b.id(c.line, c.arg("id")?)?),
        "enter" => Action::Enter(b.id(c.line, c.arg("id")?)?),
        "resume" => Action::Resume(b.id(c.line, c.arg("id")?)?),
        "exit" => Action::Exit,
        "pause" => Action::Pause,
        "snapshot" => Action::Snapshot,
        "clone" => Action::Clone {
            parent: b.id(c.line, c.arg("parent")?)?,
            child: b.id(c.line, c.arg("child")?)?,
            pages: b.pages(c.line, c.arg("pages")?)?,
        },
        "step" => {
            let t = c.arg("n")?;
            let n = number(c.line, t)?;
            return Ok(Some(Directive::Step(n as usize)));
        }
        _ => return Ok(None),
    };
    Ok(Some(Directive::Act(act)))
}

fn parse_adversary(c: &mut Cursor, b: &Bounds) -> Result<Directive, ScenarioError> {
    let protected = b.id(c.line, c.arg("protect")?)?;
    let kind = c.word("adversary action")?;
    let act = match kind.text {
        "tamper" => AdversaryAction::TamperMem {
            pa: b.pa(c.line, c.arg("pa")?)?,
            word: b.word(c.line, c.arg("word")?)?,
        },
        "ptable" => AdversaryAction::TamperOsPageTable {
            va: b.va(c.line, c.arg("va")?)?,
            pa: b.pa(c.line, c.arg("pa")?)?,
            perm: perm(c.line, c.arg("perm")?)?,
        },
        "observe" => AdversaryAction::Observe,
        "call" => {
            let head = c.word("operation")?;
            match parse_action(c, b, head)? {
                Some(Directive::Act(a)) => AdversaryAction::CallOp(Box::new(a)),
                Some(Directive::Step(1)) => AdversaryAction::CallOp(Box::new(Action::EnclaveStep)),
                Some(_) => {
                    return Err(c.range_err(head.col, "a called step runs exactly once (n=1)"))
                }
                None => {
                    return Err(ScenarioError::UnknownDirective {
                        line: c.line,
                        col: head.col,
                        name: head.text.into(),
                    })
                }
            }
        }
        other => {
            return Err(c.parse_err(
                kind.col,
                format!("expected tamper, ptable, observe or call, found `{other}`"),
            ))
        }
    };
    Ok(Directive::Act(Action::AdversaryStep { protected, act }))
}

fn parse_expect(c: &mut Cursor, b: &Bounds) -> Result<Directive, ScenarioError> {
    let t = c.word("expectation")?;
    if t.text == "ok" {
        return Ok(Directive::Expect(Expectation::Ok));
    }
    let (key, value) = t.text.split_once('=').ok_or_else(|| {
        c.parse_err(
            t.col,
            format!("expected `ok` or key=value, found `{}`", t.text),
        )
    })?;
    let v = Token {
        text: value,
        col: t.col + key.len() + 1,
    };
    let e = match key {
        "err" => Expectation::Err(
            OpError::from_name(value)
                .ok_or_else(|| c.parse_err(v.col, format!("unknown error `{value}`")))?,
        ),
        "fault" => Expectation::Fault(
            FaultCode::from_name(value)
                .ok_or_else(|| c.parse_err(v.col, format!("unknown fault `{value}`")))?,
        ),
        "output" => Expectation::Output(b.word(c.line, v)?),
        "copied" => Expectation::Copied(number(c.line, v)? as usize),
        "digest" => Expectation::Digest(number(c.line, v)?),
        _ => return Err(c.parse_err(t.col, format!("unknown expectation `{key}`"))),
    };
    Ok(Directive::Expect(e))
}

fn parse_config(c: &mut Cursor) -> Result<ScenarioConfig, ScenarioError> {
    let get = |c: &mut Cursor, key| -> Result<(u64, usize), ScenarioError> {
        let t = c.arg(key)?;
        Ok((number(c.line, t)?, t.col))
    };
    let (va, _) = get(c, "va")?;
    let (pa, _) = get(c, "pa")?;
    let (regs, _) = get(c, "regs")?;
    let (word, word_col) = get(c, "word")?;
    let mut enclaves = 2;
    let mut policy = CopyPolicy::Lazy;
    let mut inject = None;
    while let Some(t) = c.next() {
        let Some((k, v)) = t.text.split_once('=') else {
            return Err(c.parse_err(t.col, format!("unexpected `{}`", t.text)));
        };
        let vt = Token {
            text: v,
            col: t.col + k.len() + 1,
        };
        match k {
            "enclaves" => enclaves = number(c.line, vt)?,
            "policy" => {
                policy = match v {
                    "lazy" => CopyPolicy::Lazy,
                    "eager" => CopyPolicy::Eager,
                    _ => return Err(c.parse_err(vt.col, format!("unknown policy `{v}`"))),
                }
            }
            "inject" => {
                inject = Some(
                    Mutation::from_name(v)
                        .ok_or_else(|| c.parse_err(vt.col, format!("unknown mutation `{v}`")))?,
                )
            }
            _ => return Err(c.parse_err(t.col, format!("unknown config key `{k}`"))),
        }
    }
    let platform = PlatformConfig::new(
        va as usize,
        pa as usize,
        regs as usize,
        word as u32,
        enclaves as usize,
    )
    .map_err(|e| c.range_err(word_col.min(8), e.to_string()))?;
    Ok(ScenarioConfig {
        platform,
        policy,
        inject,
    })
}

/// Parses a scenario. An input without directives is an empty scenario;
/// otherwise the first directive must be `config`.
pub fn parse_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    let mut config: Option<ScenarioConfig> = None;
    let mut lines = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("");
        let mut c = Cursor::new(line, body);
        let Some(head) = c.next() else {
            continue;
        };
        if head.text == "config" {
            if config.is_some() {
                return Err(c.parse_err(head.col, "duplicate config"));
            }
            config = Some(parse_config(&mut c)?);
            continue;
        }
        let Some(cfg) = config else {
            return Err(c.parse_err(head.col, "`config` must come before the first directive"));
        };
        let b = Bounds { cfg: cfg.platform };
        let directive = match head.text {
            "oswrite" => {
                let pa = number(c.line, c.arg("pa")?)?;
                let off = number(c.line, c.arg("off")?)?;
                let wt = c.arg("words")?;
                let words = b.words(c.line, wt)?;
                let end = pa.saturating_add(off).saturating_add(words.len() as u64);
                if end > b.cfg.n_pa as u64 {
                    return Err(c.range_err(
                        wt.col,
                        format!("write ends at {end}, past {} pages", b.cfg.n_pa),
                    ));
                }
                Directive::OsWrite {
                    pa: pa as usize,
                    off: off as usize,
                    words,
                }
            }
            "input" => Directive::Input {
                id: b.id(c.line, c.arg("id")?)?,
                words: b.words(c.line, c.arg("words")?)?,
            },
            "adversary" => parse_adversary(&mut c, &b)?,
            "expect" => parse_expect(&mut c, &b)?,
            _ => {
                parse_action(&mut c, &b, head)?.ok_or_else(|| ScenarioError::UnknownDirective {
                    line,
                    col: head.col,
                    name: head.text.into(),
                })?
            }
        };
        c.finish()?;
        lines.push(Line { line, directive });
    }
    Ok(Scenario { config, lines })
}

#[cfg(test)]
mod tests {
    use super::*;

    const S0: &str = include_str!("../scenarios/s0.tapc");

    #[test]
    fn round_trip() {
        let s = parse_scenario(S0).unwrap();
        let text = s.to_string();
        let again = parse_scenario(&text).unwrap();
        assert_eq!(again.to_string(), text);
        assert_eq!(again.config, s.config);
        let d: Vec<_> = again.lines.iter().map(|l| &l.directive).collect();
        let e: Vec<_> = s.lines.iter().map(|l| &l.directive).collect();
        assert_eq!(d, e);
    }

    #[test]
    fn empty_and_missing_config() {
        assert_eq!(
            parse_scenario("# nothing\n\n").unwrap(),
            Scenario {
                config: None,
                lines: vec![]
            }
        );
        assert!(matches!(
            parse_scenario("enter id=1\n"),
            Err(ScenarioError::Parse {
                line: 1,
                col: 1,
                ..
            })
        ));
    }

    #[test]
    fn error_positions() {
        let cfg = "config va=4 pa=8 regs=2 word=8\n";
        assert_eq!(
            parse_scenario(&format!("{cfg}jump id=1\n")),
            Err(ScenarioError::UnknownDirective {
                line: 2,
                col: 1,
                name: "jump".into()
            })
        );
        match parse_scenario(&format!("{cfg}clone parent=1 child=2 pages=4,9\n")) {
            Err(ScenarioError::Range {
                line: 2, col: 32, ..
            }) => {}
            other => panic!("{other:?}"),
        }
        match parse_scenario(&format!("{cfg}enter id=x\n")) {
            Err(ScenarioError::Parse {
                line: 2, col: 10, ..
            }) => {}
            other => panic!("{other:?}"),
        }
        match parse_scenario(&format!("{cfg}exit now\n")) {
            Err(ScenarioError::Parse {
                line: 2, col: 6, ..
            }) => {}
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn self_clone_parses() {
        let s = parse_scenario(
            "config va=4 pa=8 regs=2 word=8\nclone parent=1 child=1 pages=4\nexpect err=SelfClone\n",
        )
        .unwrap();
        assert_eq!(s.lines.len(), 2);
        assert_eq!(
            s.lines[1].directive,
            Directive::Expect(Expectation::Err(OpError::SelfClone))
        );
    }

    #[test]
    fn permissions() {
        let c = Cursor::new(1, "");
        let p = |s| perm(c.line, Token { text: s, col: 1 });
        assert_eq!(p("rx").unwrap(), Perm::RX);
        assert_eq!(p("-").unwrap(), Perm::NONE);
        assert_eq!(p("rwx").unwrap(), Perm::RWX);
        assert!(p("xr").is_err());
        assert!(p("rr").is_err());
    }
}
