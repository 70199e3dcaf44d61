use std::collections::BTreeMap;
use std::io::Write;

use anyhow::Result;
use clap::ValueEnum;
use serde::Deserialize;
use serde_json::{json, Value};

use islarr_core::checker::{BothVerdict, BugReport, DiffReport, DiffStatus, RuleCheck, Verdict};
use islarr_core::semantics::ConcreteState;
use islarr_core::syntax::{Assertion, Command, Exit};

pub const SCHEMA: &str = "islarr-output/v1";

#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Text,
    Json,
}

pub struct Out<W: Write> {
    format: Format,
    w: W,
}

fn diff_status(s: DiffStatus) -> &'static str {
    match s {
        DiffStatus::Pass => "pass",
        DiffStatus::BoundedPass => "bounded-pass",
        DiffStatus::Fail => "fail",
    }
}

fn verdict_json(v: &Verdict) -> Value {
    json!({
        "status": v.status.to_string(),
        "witness": v.witness,
        "truncated": v.truncated,
        "notes": v.notes,
    })
}

/// One generated instance of a randomized oracle run.
pub struct CorpusRow {
    index: usize,
    pre: String,
    prog: String,
    exit: Exit,
    result: Result<DiffReport, String>,
}

impl CorpusRow {
    pub fn new(index: usize, pre: &Assertion, prog: &Command, exit: Exit, result: Result<DiffReport, String>) -> Self {
        CorpusRow { index, pre: pre.to_string(), prog: prog.to_string(), exit, result }
    }

    fn status(&self) -> &'static str {
        match &self.result {
            Ok(r) => diff_status(r.status),
            Err(_) => "error",
        }
    }

    pub fn code(&self) -> u8 {
        match &self.result {
            Ok(r) => match r.status {
                DiffStatus::Pass => 0,
                DiffStatus::BoundedPass => 2,
                DiffStatus::Fail => 1,
            },
            Err(_) => 3,
        }
    }
}

impl<W: Write> Out<W> {
    pub fn new(format: Format, w: W) -> Self {
        Out { format, w }
    }

    fn json(&mut self, kind: &str, mut body: Value) -> Result<()> {
        let obj = body.as_object_mut().expect("object");
        obj.insert("schema".into(), SCHEMA.into());
        obj.insert("kind".into(), kind.into());
        serde_json::to_writer_pretty(&mut self.w, &body)?;
        writeln!(self.w)?;
        Ok(())
    }

    fn witness(&mut self, label: &str, w: &Option<ConcreteState>) -> Result<()> {
        if let Some(s) = w {
            writeln!(self.w, "{label}: {s}")?;
        }
        Ok(())
    }

    pub fn wpo(&mut self, a: &Assertion, trace: &BTreeMap<&'static str, usize>) -> Result<()> {
        match self.format {
            Format::Text => write!(self.w, "{}", a.to_pretty())?,
            Format::Json => self.json(
                "wpo",
                json!({
                    "assertion": a.to_string(),
                    "disjuncts": a.disjuncts.iter().map(|d| d.to_string()).collect::<Vec<_>>(),
                    "truncated": a.is_truncated(),
                    "truncation": a.truncated.as_ref().map(|t| t.reason.clone()),
                    "trace": trace,
                }),
            )?,
        }
        Ok(())
    }

    pub fn verdict(&mut self, v: &Verdict) -> Result<()> {
        match self.format {
            Format::Text => {
                writeln!(self.w, "{}", v.status)?;
                self.witness("witness", &v.witness)?;
                for n in &v.notes {
                    writeln!(self.w, "note: {n}")?;
                }
            }
            Format::Json => self.json("verdict", verdict_json(v))?,
        }
        Ok(())
    }

    pub fn both(&mut self, b: &BothVerdict) -> Result<()> {
        match self.format {
            Format::Text => {
                writeln!(self.w, "{}", b.status())?;
                writeln!(self.w, "semantic: {}", b.semantic.status)?;
                self.witness("  witness", &b.semantic.witness)?;
                writeln!(self.w, "logical: {}", b.logical.status)?;
                self.witness("  witness", &b.logical.witness)?;
                if !b.agree {
                    writeln!(self.w, "checkers disagree")?;
                }
            }
            Format::Json => self.json(
                "both",
                json!({
                    "status": b.status().to_string(),
                    "agree": b.agree,
                    "semantic": verdict_json(&b.semantic),
                    "logical": verdict_json(&b.logical),
                }),
            )?,
        }
        Ok(())
    }

    pub fn bugs(&mut self, r: &BugReport) -> Result<()> {
        match self.format {
            Format::Text => {
                if r.is_empty() {
                    writeln!(self.w, "no error states found")?;
                }
                for (i, d) in r.er_disjuncts.iter().enumerate() {
                    writeln!(self.w, "[{}] {}", i + 1, d.disjunct)?;
                    if let Some(c) = &d.source_command {
                        writeln!(self.w, "  faulting command: {c}")?;
                    }
                    self.witness("  witness", &d.witness)?;
                }
                for n in &r.notes {
                    writeln!(self.w, "note: {n}")?;
                }
            }
            Format::Json => self.json(
                "bugs",
                json!({
                    "er_disjuncts": r.er_disjuncts,
                    "truncated": r.truncated,
                    "notes": r.notes,
                }),
            )?,
        }
        Ok(())
    }

    pub fn diff(&mut self, r: &DiffReport) -> Result<()> {
        match self.format {
            Format::Text => {
                writeln!(self.w, "{}", diff_status(r.status))?;
                writeln!(
                    self.w,
                    "symbolic {} states ({} disjuncts), semantic {} states",
                    r.symbolic_states, r.wpo_disjuncts, r.semantic_states
                )?;
                for s in &r.extra {
                    writeln!(self.w, "extra: {s}")?;
                }
                for s in &r.missing {
                    writeln!(self.w, "missing: {s}")?;
                }
            }
            Format::Json => self.json(
                "diff",
                json!({
                    "status": diff_status(r.status),
                    "symbolic_states": r.symbolic_states,
                    "semantic_states": r.semantic_states,
                    "wpo_disjuncts": r.wpo_disjuncts,
                    "extra_count": r.extra_count,
                    "missing_count": r.missing_count,
                    "extra": r.extra,
                    "missing": r.missing,
                    "truncated": r.truncated,
                }),
            )?,
        }
        Ok(())
    }

    pub fn corpus(&mut self, seed: u64, rows: &[CorpusRow]) -> Result<()> {
        let mut counts = BTreeMap::<&str, usize>::new();
        for r in rows {
            *counts.entry(r.status()).or_insert(0) += 1;
        }
        match self.format {
            Format::Text => {
                for r in rows.iter().filter(|r| r.code() != 0) {
                    match &r.result {
                        Ok(d) => writeln!(
                            self.w,
                            "#{} {}: [{}] {} [{}] extra {} missing {}",
                            r.index,
                            r.status(),
                            r.pre,
                            r.prog,
                            r.exit,
                            d.extra_count,
                            d.missing_count
                        )?,
                        Err(e) => writeln!(self.w, "#{} error: [{}] {} [{}]: {e}", r.index, r.pre, r.prog, r.exit)?,
                    }
                }
                let summary: Vec<String> = counts.iter().map(|(k, v)| format!("{v} {k}")).collect();
                writeln!(self.w, "seed {seed}, {} instances: {}", rows.len(), summary.join(", "))?;
            }
            Format::Json => {
                let cases: Vec<Value> = rows
                    .iter()
                    .map(|r| {
                        json!({
                            "index": r.index,
                            "pre": r.pre,
                            "prog": r.prog,
                            "exit": r.exit,
                            "status": r.status(),
                            "extra_count": r.result.as_ref().map(|d| d.extra_count).ok(),
                            "missing_count": r.result.as_ref().map(|d| d.missing_count).ok(),
                            "error": r.result.as_ref().err(),
                        })
                    })
                    .collect();
                self.json("corpus", json!({ "seed": seed, "summary": counts, "cases": cases }))?
            }
        }
        Ok(())
    }

    pub fn rule(&mut self, r: &RuleCheck) -> Result<()> {
        match self.format {
            Format::Text => {
                let s = if r.accepted { "accepted" } else { "rejected" };
                writeln!(self.w, "{}: {s} ({})", r.rule, r.reason)?
            }
            Format::Json => self.json(
                "rule",
                json!({ "rule": r.rule, "accepted": r.accepted, "reason": r.reason }),
            )?,
        }
        Ok(())
    }
}
