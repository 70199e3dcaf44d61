//! Triple validity (semantic and logical), expressiveness diffing, bug
//! reports and proof-rule instance validation.

mod rules;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::entailment::PureSolver;
use crate::error::Result;
use crate::semantics::{wpo_semantic, CompiledAssertion, ConcreteState, Scope, Universe};
use crate::syntax::{parse_assertion, parse_command, Assertion, Command, Exit};
use crate::wpo::{Wpo, WpoBudget, WpoOptions};

pub use rules::{check_rule_instance, rule_names, RuleCheck, SideConditions};

/// `[pre] prog [exit: post]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Triple {
    pub pre: Assertion,
    pub prog: Command,
    pub exit: Exit,
    pub post: Assertion,
}

impl Triple {
    pub fn new(pre: Assertion, prog: Command, exit: Exit, post: Assertion) -> Self {
        Triple { pre, prog, exit, post }
    }

    /// Parses the three parts from concrete syntax.
    pub fn parse(pre: &str, prog: &str, exit: Exit, post: &str) -> Result<Self> {
        Ok(Triple {
            pre: parse_assertion(pre)?,
            prog: parse_command(prog)?,
            exit,
            post: parse_assertion(post)?,
        })
    }

    /// Smallest universe mentioning every variable of the triple.
    pub fn universe(&self, vmax: u64) -> Result<Universe> {
        Universe::covering(&[&self.pre, &self.post], &[&self.prog], vmax)
    }
}

impl fmt::Display for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] {} [{}: {}]", self.pre, self.prog, self.exit, self.post)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Status {
    Valid,
    Invalid,
    /// Valid for the explored loop unrollings or listed disjuncts only.
    BoundedValid,
    Unknown,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Valid => 0,
            Status::Invalid => 1,
            Status::BoundedValid | Status::Unknown => 2,
        }
    }

    fn is_validish(self) -> bool {
        matches!(self, Status::Valid | Status::BoundedValid)
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Status::Valid => "valid",
            Status::Invalid => "invalid",
            Status::BoundedValid => "bounded-valid",
            Status::Unknown => "unknown",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Verdict {
    pub status: Status,
    /// For `Invalid`: an exact post-state that satisfies the postcondition
    /// but is not reachable.
    pub witness: Option<ConcreteState>,
    pub truncated: bool,
    pub notes: Vec<String>,
}

impl Verdict {
    fn from_missing(missing: Option<ConcreteState>, truncated: bool, notes: Vec<String>) -> Self {
        let (status, witness) = match (missing, truncated) {
            (None, false) => (Status::Valid, None),
            (None, true) => (Status::BoundedValid, None),
            (Some(w), false) => (Status::Invalid, Some(w)),
            (Some(_), true) => (Status::Unknown, None),
        };
        Verdict { status, witness, truncated, notes }
    }
}

fn truncation_notes(post: &Assertion, other: Option<&Assertion>, star: bool, k: usize) -> Vec<String> {
    let mut notes = Vec::new();
    if let Some(t) = &post.truncated {
        notes.push(format!("postcondition truncated: {}", t.reason));
    }
    if let Some(t) = other.and_then(|a| a.truncated.as_ref()) {
        notes.push(format!("computed postcondition truncated: {}", t.reason));
    }
    if star {
        notes.push(format!("loops explored up to {k} iterations"));
    }
    notes
}

/// Enumerates the exact models of the postcondition and checks that each is
/// reachable from an exact model of the precondition. Loops are iterated
/// until no new state appears, which always happens in a finite universe.
pub fn check_triple_semantic(tr: &Triple, u: &Universe) -> Result<Verdict> {
    let u = &u.clone().with_loop_bound(usize::MAX);
    let q = CompiledAssertion::new(&tr.post, u)?.models(Scope::Exact);
    let reach = wpo_semantic(&tr.pre, &tr.prog, tr.exit, u)?;
    let missing = q.minus(&reach).into_iter().next();
    let truncated = reach.truncated || tr.post.is_truncated();
    let notes = truncation_notes(&tr.post, None, false, 0);
    Ok(Verdict::from_missing(missing, truncated, notes))
}

/// Computes `wpo(P, C, ε)` symbolically and checks that every exact model
/// of the postcondition satisfies it.
pub fn check_triple_logical(tr: &Triple, u: &Universe, budget: &WpoBudget) -> Result<Verdict> {
    let w = Wpo::new(WpoOptions { budget: *budget, ..Default::default() }).run(&tr.pre, &tr.prog, tr.exit)?;
    // Q ⊨ wpo(P, C, ε) over the exact states of the universe.
    let q = CompiledAssertion::new(&tr.post, u)?.models(Scope::Exact);
    let wm = CompiledAssertion::new(&w, u)?.models(Scope::Exact);
    let bad = q.minus(&wm);
    let truncated = w.is_truncated() || tr.post.is_truncated();
    let notes = truncation_notes(&tr.post, Some(&w), tr.prog.has_star(), budget.loop_bound);
    Ok(Verdict::from_missing(bad.into_iter().next(), truncated, notes))
}

/// Both verdicts for one triple.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BothVerdict {
    pub semantic: Verdict,
    pub logical: Verdict,
    pub agree: bool,
}

impl BothVerdict {
    /// Combined status: the semantic one, or `Unknown` on disagreement.
    pub fn status(&self) -> Status {
        if self.agree {
            self.semantic.status
        } else {
            Status::Unknown
        }
    }
}

/// Runs both checkers. They disagree when one finds the triple (bounded-)
/// valid and the other invalid.
pub fn check_triple_both(tr: &Triple, u: &Universe, budget: &WpoBudget) -> Result<BothVerdict> {
    let semantic = check_triple_semantic(tr, u)?;
    let logical = check_triple_logical(tr, u, budget)?;
    let clash = |a: Status, b: Status| a.is_validish() && b == Status::Invalid;
    let agree = !clash(semantic.status, logical.status) && !clash(logical.status, semantic.status);
    Ok(BothVerdict { semantic, logical, agree })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ErDisjunct {
    pub disjunct: String,
    /// Smallest exact model in the universe, when there is one.
    pub witness: Option<ConcreteState>,
    /// The atomic command whose error case produced this disjunct.
    pub source_command: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BugReport {
    pub er_disjuncts: Vec<ErDisjunct>,
    pub truncated: bool,
    pub notes: Vec<String>,
}

impl BugReport {
    pub fn is_empty(&self) -> bool {
        self.er_disjuncts.is_empty()
    }
}

/// Satisfiable disjuncts of `wpo(P, C, er)`, each with a witness.
pub fn find_bugs(p: &Assertion, c: &Command, u: &Universe, budget: &WpoBudget) -> Result<BugReport> {
    let w = Wpo::new(WpoOptions { budget: *budget, ..Default::default() }).run(p, c, Exit::Er)?;
    let compiled = CompiledAssertion::new(&w, u)?;
    let mut er_disjuncts = Vec::new();
    for (i, d) in w.disjuncts.iter().enumerate() {
        if !PureSolver::for_heap(&d.body).is_sat() {
            continue;
        }
        er_disjuncts.push(ErDisjunct {
            disjunct: d.to_string(),
            witness: compiled.min_model_of(i, Scope::Exact),
            source_command: d.origin.0.clone(),
        });
    }
    let mut notes = Vec::new();
    if let Some(t) = &w.truncated {
        notes.push(t.reason.clone());
    }
    let unwitnessed = er_disjuncts.iter().filter(|d| d.witness.is_none()).count();
    if unwitnessed > 0 {
        notes.push(format!("{unwitnessed} disjuncts have no model with values up to {}", u.vmax));
    }
    Ok(BugReport { er_disjuncts, truncated: w.is_truncated(), notes })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DiffStatus {
    Pass,
    /// No difference, but a budget cut the symbolic side.
    BoundedPass,
    Fail,
}

/// Comparison of the models of `wpo(P, C, ε)` with the states reachable by
/// running `C`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DiffReport {
    pub status: DiffStatus,
    pub symbolic_states: usize,
    pub semantic_states: usize,
    /// Models of the symbolic postcondition that are not reachable.
    pub extra: Vec<ConcreteState>,
    /// Reachable states that the symbolic postcondition misses.
    pub missing: Vec<ConcreteState>,
    pub extra_count: usize,
    pub missing_count: usize,
    pub wpo_disjuncts: usize,
    pub truncated: bool,
}

impl DiffReport {
    pub fn is_empty(&self) -> bool {
        self.extra_count == 0 && self.missing_count == 0
    }
}

const DIFF_SAMPLES: usize = 5;

/// Symmetric difference between the exact models of `wpo(P, C, ε)` and the
/// semantic postcondition, with loops unrolled to the budget's bound on
/// both sides.
pub fn expressiveness_diff(
    p: &Assertion,
    c: &Command,
    exit: Exit,
    u: &Universe,
    budget: &WpoBudget,
) -> Result<DiffReport> {
    let u = u.clone().with_loop_bound(budget.loop_bound);
    let w = Wpo::new(WpoOptions { budget: *budget, ..Default::default() }).run(p, c, exit)?;
    let sym = CompiledAssertion::new(&w, &u)?.models(Scope::Exact);
    let sem = wpo_semantic(p, c, exit, &u)?;
    let extra = sym.minus(&sem);
    let missing = sem.minus(&sym);
    let truncated = w.is_truncated();
    let status = match (extra.is_empty() && missing.is_empty(), truncated) {
        (false, _) => DiffStatus::Fail,
        (true, false) => DiffStatus::Pass,
        (true, true) => DiffStatus::BoundedPass,
    };
    Ok(DiffReport {
        status,
        symbolic_states: sym.len(),
        semantic_states: sem.len(),
        extra_count: extra.len(),
        missing_count: missing.len(),
        extra: extra.into_iter().take(DIFF_SAMPLES).collect(),
        missing: missing.into_iter().take(DIFF_SAMPLES).collect(),
        wpo_disjuncts: w.disjuncts.len(),
        truncated,
    })
}
