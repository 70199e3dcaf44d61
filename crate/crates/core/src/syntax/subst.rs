use std::collections::BTreeSet;

use super::ast::{Assertion, Command, Disjunct, Ident, SymbolicHeap, Term};
use super::terms::TermSet;
use crate::error::IslError;

/// `t[x := u]`.
pub fn subst_term(t: &Term, x: &Ident, u: &Term) -> Term {
    match t {
        Term::Var(y) if y == x => u.clone(),
        Term::Null | Term::Nat(_) | Term::Var(_) => t.clone(),
        Term::Add(l, r) => Term::add(subst_term(l, x, u), subst_term(r, x, u)),
        Term::Base(a) => Term::Base(Box::new(subst_term(a, x, u))),
        Term::End(a) => Term::End(Box::new(subst_term(a, x, u))),
    }
}

pub fn subst_heap(psi: &SymbolicHeap, x: &Ident, u: &Term) -> SymbolicHeap {
    psi.map_terms(|t| subst_term(t, x, u))
}

/// Substitutes a free variable in a disjunct. Bound occurrences are left
/// alone; callers keep bound names fresh so no capture can occur.
pub fn subst_disjunct(d: &Disjunct, x: &Ident, u: &Term) -> Disjunct {
    if d.bound.contains(x) {
        return d.clone();
    }
    Disjunct { bound: d.bound.clone(), body: subst_heap(&d.body, x, u), origin: d.origin.clone() }
}

pub fn subst_assertion(a: &Assertion, x: &Ident, u: &Term) -> Assertion {
    Assertion {
        disjuncts: a.disjuncts.iter().map(|d| subst_disjunct(d, x, u)).collect(),
        truncated: a.truncated.clone(),
    }
}

/// Replaces every occurrence of a member of `set` by `u`. Members must not
/// occur inside one another.
pub fn replace_terms(psi: &SymbolicHeap, set: &TermSet, u: &Term) -> Result<SymbolicHeap, IslError> {
    for a in set {
        for b in set {
            if a != b && a.contains(b) {
                return Err(IslError::Precondition(format!(
                    "replacement set has nested members `{a}` and `{b}`"
                )));
            }
        }
    }
    Ok(psi.map_terms(|t| replace_in(t, set, u)))
}

fn replace_in(t: &Term, set: &TermSet, u: &Term) -> Term {
    if set.contains(t) {
        return u.clone();
    }
    match t {
        Term::Null | Term::Nat(_) | Term::Var(_) => t.clone(),
        Term::Add(l, r) => Term::add(replace_in(l, set, u), replace_in(r, set, u)),
        Term::Base(a) => Term::Base(Box::new(replace_in(a, set, u))),
        Term::End(a) => Term::End(Box::new(replace_in(a, set, u))),
    }
}

/// Generator of `$k` names, starting above any `$k` already in use.
#[derive(Clone, Debug, Default)]
pub struct FreshGen {
    next: usize,
}

impl FreshGen {
    pub fn new() -> Self {
        FreshGen { next: 0 }
    }

    pub fn avoiding<'a>(names: impl IntoIterator<Item = &'a Ident>) -> Self {
        let mut g = FreshGen::new();
        for n in names {
            g.reserve(n);
        }
        g
    }

    pub fn reserve(&mut self, name: &Ident) {
        if let Some(k) = name.fresh_index() {
            self.next = self.next.max(k + 1);
        }
    }

    pub fn reserve_assertion(&mut self, a: &Assertion) {
        for d in &a.disjuncts {
            for b in &d.bound {
                self.reserve(b);
            }
            for v in d.body.free_vars() {
                self.reserve(&v);
            }
        }
    }

    pub fn reserve_command(&mut self, c: &Command) {
        for v in c.vars() {
            self.reserve(&v);
        }
    }

    pub fn fresh(&mut self) -> Ident {
        let id = Ident::new(&format!("${}", self.next));
        self.next += 1;
        id
    }
}

/// Renames the bound variables of `d` that clash with `avoid` to fresh names.
pub fn rename_bound_apart(d: &Disjunct, avoid: &BTreeSet<Ident>, fresh: &mut FreshGen) -> Disjunct {
    let mut bound = Vec::with_capacity(d.bound.len());
    let mut body = d.body.clone();
    for b in &d.bound {
        if avoid.contains(b) {
            let nb = fresh.fresh();
            body = subst_heap(&body, b, &Term::Var(nb.clone()));
            bound.push(nb);
        } else {
            bound.push(b.clone());
        }
    }
    Disjunct { bound, body, origin: d.origin.clone() }
}
