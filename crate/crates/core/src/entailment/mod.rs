//! Pure entailment and assertion entailment.
//!
//! The fast path is Fourier-Motzkin elimination with case splits for
//! disequalities and for the block-function axioms; a bounded brute-force
//! search backs it up to produce counter-models.

mod dbm;
mod linear;
mod reference;
mod solver;

use serde::Serialize;

pub use linear::{feasible, LinExpr, Lit};
pub use reference::{default_bound, search_model, PureModel};
pub use solver::{Compiled, Problem, PureSolver};

use crate::error::Result;
use crate::par;
use crate::semantics::{CompiledAssertion, ConcreteState, Scope, Universe};
use crate::syntax::{Assertion, PureAtom, PureOp};

use crate::semantics::holds_op;

/// Probe budget of the brute-force engine.
const REFERENCE_LIMIT: u64 = 2_000_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Entailment {
    Yes,
    No(PureModel),
    Unknown,
}

fn atom_value(a: &PureAtom, eval: &dyn Fn(&crate::syntax::Term) -> u64) -> bool {
    holds_op(a.op, eval(&a.lhs), eval(&a.rhs))
}

/// Does `hyp` entail the disjunction `concl`? Proven answers come from the
/// symbolic engine; refutations from the bounded search.
pub fn entails_pure(hyp: &[PureAtom], concl: &[PureAtom]) -> Entailment {
    if PureSolver::new(hyp).entails_any(concl) {
        return Entailment::Yes;
    }
    reference_counter_model(hyp, concl)
}

/// Brute-force only: a bounded counter-model, or `Yes` if none exists
/// within the bound (relative to that bound).
pub fn reference_entails(hyp: &[PureAtom], concl: &[PureAtom], bound: u64, block_bound: u64) -> Entailment {
    let mut all = hyp.to_vec();
    all.extend(concl.iter().cloned());
    let pred = |eval: &dyn Fn(&crate::syntax::Term) -> u64| {
        hyp.iter().all(|a| atom_value(a, eval)) && !concl.iter().any(|a| atom_value(a, eval))
    };
    match search_model(&all, bound, block_bound, REFERENCE_LIMIT, &pred) {
        Ok(Some(m)) => Entailment::No(m),
        Ok(None) => Entailment::Yes,
        Err(()) => Entailment::Unknown,
    }
}

fn reference_counter_model(hyp: &[PureAtom], concl: &[PureAtom]) -> Entailment {
    let mut all = hyp.to_vec();
    all.extend(concl.iter().cloned());
    let bound = default_bound(&all);
    match reference_entails(hyp, concl, bound, bound.min(7)) {
        Entailment::No(m) => Entailment::No(m),
        _ => Entailment::Unknown,
    }
}

/// Satisfiability of a pure conjunction (symbolic engine).
pub fn pure_sat(atoms: &[PureAtom]) -> bool {
    PureSolver::new(atoms).is_sat()
}

/// `l ≉ r` as an atom.
pub fn ne(l: crate::syntax::Term, r: crate::syntax::Term) -> PureAtom {
    PureAtom::new(PureOp::Ne, l, r)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum AssertionEntailment {
    Yes,
    /// Every model checked holds, but one side was truncated.
    BoundedYes,
    No(ConcreteState),
}

/// `P ⊨ Q` over the states of a universe.
pub fn entails_assertion(p: &Assertion, q: &Assertion, u: &Universe, scope: Scope) -> Result<AssertionEntailment> {
    let pm = CompiledAssertion::new(p, u)?.models(scope);
    let qc = CompiledAssertion::new(q, u)?;
    let layout = u.layout();
    let states: Vec<_> = pm.states.iter().cloned().collect();
    let bad: Vec<Option<ConcreteState>> = par::map(&states, |st| {
        if qc.holds_packed(st) {
            None
        } else {
            Some(layout.to_concrete(u, st))
        }
    });
    let mut bad: Vec<ConcreteState> = bad.into_iter().flatten().collect();
    bad.sort_by_key(|s| s.witness_key());
    Ok(match bad.into_iter().next() {
        Some(w) if !q.is_truncated() => AssertionEntailment::No(w),
        Some(_) => AssertionEntailment::BoundedYes,
        None if p.is_truncated() || q.is_truncated() => AssertionEntailment::BoundedYes,
        None => AssertionEntailment::Yes,
    })
}
