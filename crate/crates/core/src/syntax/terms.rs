use std::collections::BTreeSet;

use super::ast::{Command, Ident, SpatialAtom, SymbolicHeap, Term};

pub type TermSet = BTreeSet<Term>;

/// Subterms of `t` that matter for case analysis. `null` contributes nothing.
pub fn term_set(t: &Term) -> TermSet {
    let mut out = TermSet::new();
    add_terms(t, &mut out);
    out
}

fn add_terms(t: &Term, out: &mut TermSet) {
    match t {
        Term::Null => {}
        Term::Nat(_) | Term::Var(_) => {
            out.insert(t.clone());
        }
        Term::Add(l, r) => {
            out.insert(t.clone());
            add_terms(l, out);
            add_terms(r, out);
        }
        Term::Base(a) | Term::End(a) => {
            out.insert(t.clone());
            add_terms(a, out);
        }
    }
}

pub fn heap_term_set(psi: &SymbolicHeap) -> TermSet {
    let mut out = TermSet::new();
    for a in psi.spatial() {
        match a {
            SpatialAtom::Emp => {}
            SpatialAtom::PointsTo(l, v) => {
                add_terms(l, &mut out);
                add_terms(&l.clone().plus(1), &mut out);
                add_terms(v, &mut out);
            }
            SpatialAtom::Arr(l, r) | SpatialAtom::NegArr(l, r) => {
                add_terms(l, &mut out);
                add_terms(r, &mut out);
            }
        }
    }
    for p in psi.pure() {
        add_terms(&p.lhs, &mut out);
        add_terms(&p.rhs, &mut out);
    }
    out
}

/// The members of [`heap_term_set`] that contain no block function.
pub fn heap_term_set_minus(psi: &SymbolicHeap) -> TermSet {
    heap_term_set(psi).into_iter().filter(|t| !t.has_block_fn()).collect()
}

pub fn command_term_set(c: &Command) -> TermSet {
    let mut out = TermSet::new();
    match c {
        Command::Skip | Command::Error => {}
        Command::Assign(x, t) | Command::Alloc(x, t) => {
            out.insert(Term::Var(x.clone()));
            add_terms(t, &mut out);
        }
        Command::Havoc(x) => {
            out.insert(Term::Var(x.clone()));
        }
        Command::Assume(ps) => {
            for p in ps {
                add_terms(&p.lhs, &mut out);
                add_terms(&p.rhs, &mut out);
            }
        }
        Command::Local(x, body) => {
            out = command_term_set(body);
            out.remove(&Term::Var(x.clone()));
        }
        Command::LocalInit(x, t, body) => {
            out = command_term_set(body);
            out.remove(&Term::Var(x.clone()));
            add_terms(t, &mut out);
        }
        Command::Seq(a, b) | Command::Choice(a, b) => {
            out = command_term_set(a);
            out.extend(command_term_set(b));
        }
        Command::Star(body) => out = command_term_set(body),
        Command::Free(t) => {
            add_terms(t, &mut out);
            add_terms(&Term::base(t.clone()), &mut out);
            add_terms(&Term::end(t.clone()), &mut out);
        }
        Command::Load(x, t) => {
            out.insert(Term::Var(x.clone()));
            add_terms(&Term::base(t.clone()), &mut out);
        }
        Command::Store(t, v) => {
            add_terms(&t.clone().plus(1), &mut out);
            add_terms(&Term::base(t.clone()), &mut out);
            add_terms(v, &mut out);
        }
    }
    out
}

/// Variables a command may write.
pub fn modified_vars(c: &Command) -> BTreeSet<Ident> {
    let mut out = BTreeSet::new();
    match c {
        Command::Skip
        | Command::Assume(_)
        | Command::Error
        | Command::Free(_)
        | Command::Store(..) => {}
        Command::Assign(x, _) | Command::Havoc(x) | Command::Alloc(x, _) | Command::Load(x, _) => {
            out.insert(x.clone());
        }
        Command::Local(x, body) | Command::LocalInit(x, _, body) => {
            out = modified_vars(body);
            out.remove(x);
        }
        Command::Seq(a, b) | Command::Choice(a, b) => {
            out = modified_vars(a);
            out.extend(modified_vars(b));
        }
        Command::Star(body) => out = modified_vars(body),
    }
    out
}

/// Variables occurring in a term set.
pub fn vars_of(terms: &TermSet) -> BTreeSet<Ident> {
    let mut v = Vec::new();
    for t in terms {
        t.collect_vars(&mut v);
    }
    v.into_iter().collect()
}
