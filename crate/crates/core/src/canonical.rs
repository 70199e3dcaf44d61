//! Case analysis over the relative order of terms, and canonicalisation of
//! assertions with respect to a command.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::entailment::{Compiled, Problem, PureSolver};
use crate::error::{IslError, Result};
use crate::syntax::{
    command_term_set, heap_term_set, rename_bound_apart, Assertion, Command, Disjunct, FreshGen,
    Ident, PureAtom, SymbolicHeap, Term, TermSet,
};

/// Default ceiling on `|T|` for the literal case enumeration.
pub const DEFAULT_CASE_CAP: usize = 7;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum OrderRel {
    Lt,
    Eq,
}

/// One total preorder `null R₀ t₁ R₁ … tₙ`. The sequence starts with `null`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OrderCase {
    pub sequence: Vec<Term>,
    pub relations: Vec<OrderRel>,
}

impl OrderCase {
    pub fn atoms(&self) -> Vec<PureAtom> {
        self.relations
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let (a, b) = (self.sequence[i].clone(), self.sequence[i + 1].clone());
                match r {
                    OrderRel::Lt => PureAtom::lt(a, b),
                    OrderRel::Eq => PureAtom::eq(a, b),
                }
            })
            .collect()
    }
}

/// Every permutation of `terms` combined with every relation vector.
pub fn cases(terms: &TermSet, cap: usize) -> Result<Vec<OrderCase>> {
    if terms.len() > cap {
        return Err(IslError::size("case-analysis term set", cap, terms.len()));
    }
    let ts: Vec<Term> = terms.iter().cloned().collect();
    let n = ts.len();
    let mut out = Vec::new();
    let mut perm: Vec<usize> = (0..n).collect();
    permute(&mut perm, 0, &mut |p| {
        for mask in 0u32..(1u32 << n) {
            let mut sequence = vec![Term::Null];
            sequence.extend(p.iter().map(|&i| ts[i].clone()));
            let relations = (0..n)
                .map(|i| if mask & (1 << i) != 0 { OrderRel::Eq } else { OrderRel::Lt })
                .collect();
            out.push(OrderCase { sequence, relations });
        }
    });
    Ok(out)
}

fn permute(p: &mut Vec<usize>, k: usize, f: &mut dyn FnMut(&[usize])) {
    if k == p.len() {
        f(p);
        return;
    }
    for i in k..p.len() {
        p.swap(k, i);
        permute(p, k + 1, f);
        p.swap(k, i);
    }
}

/// One representative per weak order of `terms` consistent with `hyp`.
/// Terms of an equivalence class appear in increasing syntactic order, so
/// the representatives are pairwise distinct as weak orders.
pub fn consistent_cases(terms: &TermSet, hyp: &Problem, max_cases: usize) -> Result<Vec<OrderCase>> {
    let mut out = Vec::new();
    let mut all = vec![Term::Null];
    all.extend(terms.iter().cloned());
    let mut hyp = hyp.clone();
    hyp.intern_terms(&all);
    let fast = hyp.compile().filter(|_| all.iter().all(is_offset));
    let sat = match &fast {
        Some(c) => c.is_sat(),
        None => hyp.is_sat(),
    };
    if !sat {
        return Ok(out);
    }
    let n = all.len();
    // Pairwise relations not excluded by the difference constraints, used
    // to prune the search before the exact check on each prefix.
    let bound = hyp.difference_bounds(&all);
    let may_lt: Vec<Vec<bool>> =
        (0..n).map(|a| (0..n).map(|b| bound[a][b].is_none_or(|w| w >= 1)).collect()).collect();
    let may_eq: Vec<Vec<bool>> = (0..n)
        .map(|a| (0..n).map(|b| bound[a][b].is_none_or(|w| w >= 0) && bound[b][a].is_none_or(|w| w >= 0)).collect())
        .collect();
    let search = Search { all: &all, hyp: &hyp, may_lt: &may_lt, may_eq: &may_eq, max_cases };
    let mut seq = vec![0];
    let mut rels = Vec::new();
    let mut used = vec![false; n];
    used[0] = true;
    let state = match fast {
        Some(c) => State::Fast(c),
        None => State::Slow(hyp.clone()),
    };
    search.extend(&state, &mut seq, &mut rels, &mut used, &mut out)?;
    Ok(out)
}

/// Whether `t` is a single unknown plus a constant, or a constant.
fn is_offset(t: &Term) -> bool {
    fn vars(t: &Term) -> usize {
        match t {
            Term::Null | Term::Nat(_) => 0,
            Term::Var(_) | Term::Base(_) | Term::End(_) => 1,
            Term::Add(l, r) => vars(l) + vars(r),
        }
    }
    vars(t) <= 1
}

enum State {
    Fast(Compiled),
    Slow(Problem),
}

struct Search<'a> {
    all: &'a [Term],
    hyp: &'a Problem,
    may_lt: &'a [Vec<bool>],
    may_eq: &'a [Vec<bool>],
    max_cases: usize,
}

impl Search<'_> {
    /// The state strengthened by `atom`, if still satisfiable.
    fn step(&self, st: &State, atom: PureAtom) -> Option<State> {
        match st {
            State::Fast(c) => {
                let next = c.with(self.hyp, std::slice::from_ref(&atom)).expect("offset terms compile");
                next.is_sat().then_some(State::Fast(next))
            }
            State::Slow(p) => {
                let mut next = p.clone();
                next.add_atom(&atom);
                next.is_sat().then_some(State::Slow(next))
            }
        }
    }

    fn extend(
        &self,
        st: &State,
        seq: &mut Vec<usize>,
        rels: &mut Vec<OrderRel>,
        used: &mut [bool],
        out: &mut Vec<OrderCase>,
    ) -> Result<()> {
        let n = self.all.len();
        if seq.len() == n {
            if out.len() >= self.max_cases {
                return Err(IslError::size("consistent order cases", self.max_cases, out.len() + 1));
            }
            out.push(OrderCase { sequence: seq.iter().map(|&i| self.all[i].clone()).collect(), relations: rels.clone() });
            return Ok(());
        }
        let last = *seq.last().unwrap();
        for i in 1..n {
            if used[i] {
                continue;
            }
            let below_rest = (1..n).all(|j| used[j] || j == i || self.may_lt[i][j] || self.may_eq[i][j]);
            if !below_rest {
                continue;
            }
            for rel in [OrderRel::Eq, OrderRel::Lt] {
                let atom = match rel {
                    OrderRel::Eq if self.all[i] <= self.all[last] || !self.may_eq[last][i] => continue,
                    OrderRel::Lt if !self.may_lt[last][i] => continue,
                    OrderRel::Lt => PureAtom::lt(self.all[last].clone(), self.all[i].clone()),
                    OrderRel::Eq => PureAtom::eq(self.all[last].clone(), self.all[i].clone()),
                };
                let Some(next) = self.step(st, atom) else { continue };
                used[i] = true;
                seq.push(i);
                rels.push(rel);
                let r = self.extend(&next, seq, rels, used, out);
                used[i] = false;
                seq.pop();
                rels.pop();
                r?;
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, serde::Deserialize)]
pub struct CanoOptions {
    /// Ceiling on `|T|` per disjunct.
    pub case_cap: usize,
    /// Ceiling on the number of consistent cases per disjunct.
    pub max_cases: usize,
    /// Enumerate only the cases consistent with the disjunct instead of
    /// every case.
    pub drop_inconsistent: bool,
}

impl Default for CanoOptions {
    fn default() -> Self {
        CanoOptions { case_cap: 12, max_cases: 200_000, drop_inconsistent: true }
    }
}

/// Term set that a disjunct is split over before running `c`.
pub fn case_terms(psi: &SymbolicHeap, c: &Command) -> TermSet {
    let mut t = heap_term_set(psi);
    t.extend(command_term_set(c));
    t
}

/// Canonicalises every disjunct of `p` with respect to `c`.
pub fn cano(p: &Assertion, c: &Command, opts: &CanoOptions, fresh: &mut FreshGen) -> Result<Assertion> {
    let avoid: BTreeSet<Ident> = c.vars().into_iter().chain(p.free_vars()).collect();
    let mut out = Assertion { disjuncts: Vec::new(), truncated: p.truncated.clone() };
    for d in &p.disjuncts {
        let d = rename_bound_apart(d, &avoid, fresh);
        let terms = case_terms(&d.body, c);
        if terms.len() > opts.case_cap {
            return Err(IslError::size("case-analysis term set", opts.case_cap, terms.len()));
        }
        let cs = if opts.drop_inconsistent {
            let mut prob = Problem::new();
            for a in d.body.pure() {
                prob.add_atom(a);
            }
            prob.add_spatial_facts(&d.body);
            consistent_cases(&terms, &prob, opts.max_cases)?
        } else {
            cases(&terms, opts.case_cap)?
        };
        for case in cs {
            out.disjuncts.push(Disjunct {
                bound: d.bound.clone(),
                body: d.body.clone().with_pure(case.atoms()),
                origin: d.origin.clone(),
            });
        }
    }
    Ok(out)
}

/// Whether the pure part of `psi` fixes the relative order of `terms` and
/// `null`.
pub fn is_canonical(psi: &SymbolicHeap, terms: &TermSet) -> bool {
    let s = PureSolver::new(psi.pure());
    if !s.is_sat() {
        return true;
    }
    let mut all = vec![Term::Null];
    all.extend(terms.iter().cloned());
    for i in 0..all.len() {
        for j in i + 1..all.len() {
            let (a, b) = (&all[i], &all[j]);
            let decided = s.entails(&PureAtom::lt(a.clone(), b.clone()))
                || s.entails(&PureAtom::eq(a.clone(), b.clone()))
                || s.entails(&PureAtom::lt(b.clone(), a.clone()));
            if !decided {
                return false;
            }
        }
    }
    true
}

/// Weak order of `terms` entailed by a canonical hypothesis, as classes of
/// equal terms listed from smallest to largest. `None` if some pair is not
/// decided.
pub fn entailed_order(solver: &PureSolver, terms: &[Term]) -> Option<Vec<Vec<Term>>> {
    let mut classes: Vec<Vec<Term>> = Vec::new();
    for t in terms {
        let mut placed = false;
        for (ci, class) in classes.iter().enumerate() {
            let rep = &class[0];
            if solver.entails(&PureAtom::eq(rep.clone(), t.clone())) {
                classes[ci].push(t.clone());
                placed = true;
                break;
            }
        }
        if !placed {
            classes.push(vec![t.clone()]);
        }
    }
    let mut err = false;
    classes.sort_by(|a, b| {
        if solver.entails(&PureAtom::lt(a[0].clone(), b[0].clone())) {
            std::cmp::Ordering::Less
        } else if solver.entails(&PureAtom::lt(b[0].clone(), a[0].clone())) {
            std::cmp::Ordering::Greater
        } else {
            err = true;
            std::cmp::Ordering::Equal
        }
    });
    if err {
        None
    } else {
        Some(classes)
    }
}
