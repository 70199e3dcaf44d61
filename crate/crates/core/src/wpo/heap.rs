//! Postconditions of the memory commands.

use crate::canonical::entailed_order;
use crate::entailment::PureSolver;
use crate::error::{IslError, Result};
use crate::syntax::{
    heap_term_set, heap_term_set_minus, replace_terms, subst_heap, subst_term, Assertion, Command,
    Disjunct, Exit, Ident, PureAtom, SpatialAtom, SymbolicHeap, Term, TermSet,
};

use super::{RuleVariant, Wpo};

fn var(x: &Ident) -> Term {
    Term::Var(x.clone())
}

fn heap_of(spatial: Vec<SpatialAtom>, pure: Vec<PureAtom>) -> SymbolicHeap {
    SymbolicHeap::new(spatial, pure)
}

/// `ψ` without the atom at position `i` of its spatial part.
fn without(psi: &SymbolicHeap, i: usize) -> SymbolicHeap {
    let mut sp = psi.spatial().to_vec();
    sp.remove(i);
    heap_of(sp, psi.pure().to_vec())
}

/// Keeps the disjuncts that are not detectably unsatisfiable, counting them
/// under their branch label.
fn finish(w: &mut Wpo, produced: Vec<(&'static str, Disjunct)>) -> Assertion {
    let mut out = Vec::new();
    for (label, d) in produced {
        if PureSolver::for_heap(&d.body).is_sat() {
            w.note(label, 1);
            out.push(d);
        }
    }
    Assertion::from_disjuncts(out)
}

pub(super) fn heap_rule(w: &mut Wpo, psi: &SymbolicHeap, c: &Command, exit: Exit) -> Result<Assertion> {
    let solver = PureSolver::new(psi.pure());
    match (c, exit) {
        (Command::Alloc(x, t), Exit::Ok) => alloc(w, &solver, psi, x, t),
        (Command::Alloc(..), Exit::Er) => Ok(Assertion::falsum()),
        (Command::Free(t), Exit::Ok) => free(w, &solver, psi, t),
        (Command::Free(t), Exit::Er) => {
            let bt = Term::base(t.clone());
            let guard = [PureAtom::ne(bt.clone(), t.clone()), PureAtom::eq(bt, Term::Null)];
            Ok(error_case(w, &solver, psi, &guard, "free.er", c))
        }
        (Command::Load(x, t), Exit::Ok) => load(w, &solver, psi, x, t),
        (Command::Store(t, v), Exit::Ok) => store(w, &solver, psi, t, v),
        (Command::Load(_, t) | Command::Store(t, _), Exit::Er) => {
            let label = if matches!(c, Command::Load(..)) { "load.er" } else { "store.er" };
            let guard = [PureAtom::eq(Term::base(t.clone()), Term::Null)];
            Ok(error_case(w, &solver, psi, &guard, label, c))
        }
        _ => unreachable!("not a memory command"),
    }
}

/// `ψ` itself when the guard (a disjunction) is entailed, else false.
fn error_case(
    w: &mut Wpo,
    solver: &PureSolver,
    psi: &SymbolicHeap,
    guard: &[PureAtom],
    label: &'static str,
    c: &Command,
) -> Assertion {
    if solver.entails_any(guard) {
        finish(w, vec![(label, Disjunct::plain(psi.clone()).with_origin(Some(c.to_string())))])
    } else {
        Assertion::falsum()
    }
}

fn order_strictly(solver: &PureSolver, items: &mut [(usize, Term, Term)]) -> Result<()> {
    let mut err = false;
    items.sort_by(|a, b| {
        if solver.entails(&PureAtom::lt(a.1.clone(), b.1.clone())) {
            std::cmp::Ordering::Less
        } else if solver.entails(&PureAtom::lt(b.1.clone(), a.1.clone())) {
            std::cmp::Ordering::Greater
        } else {
            err = true;
            std::cmp::Ordering::Equal
        }
    });
    if err {
        return Err(IslError::Precondition("deallocated ranges are not ordered by the heap".into()));
    }
    Ok(())
}

fn alloc(w: &mut Wpo, solver: &PureSolver, psi: &SymbolicHeap, x: &Ident, t: &Term) -> Result<Assertion> {
    let x1 = w.fresh();
    let th = |s: &Term| subst_term(s, x, &var(&x1));
    let tt = th(t);
    let xv = var(x);
    let xt = Term::add(xv.clone(), tt.clone());

    let mut narrs: Vec<(usize, Term, Term)> = Vec::new();
    for (i, a) in psi.spatial().iter().enumerate() {
        if let SpatialAtom::NegArr(l, r) = a {
            narrs.push((i, l.clone(), r.clone()));
        }
    }
    order_strictly(solver, &mut narrs)?;
    let rest_sp: Vec<SpatialAtom> = psi
        .spatial()
        .iter()
        .enumerate()
        .filter(|(i, _)| !narrs.iter().any(|n| n.0 == *i))
        .map(|(_, a)| a.clone())
        .collect();
    let rest = heap_of(rest_sp, psi.pure().to_vec());
    let rest_th = subst_heap(&rest, x, &var(&x1));
    let narr_th: Vec<(Term, Term)> = narrs.iter().map(|n| (th(&n.1), th(&n.2))).collect();
    let m = narr_th.len();

    let minus: Vec<Term> = heap_term_set_minus(psi).into_iter().collect();
    let us: Vec<Term> = match entailed_order(solver, &minus) {
        Some(classes) => classes.into_iter().flatten().map(|u| th(&u)).collect(),
        None => return Err(IslError::Precondition("heap terms are not totally ordered".into())),
    };
    let n = us.len();

    let mut produced = Vec::new();
    for alpha in 0..=n {
        for beta in alpha..=n {
            let mut phi = vec![
                PureAtom::eq(Term::base(xv.clone()), xv.clone()),
                PureAtom::eq(Term::end(xv.clone()), xt.clone()),
            ];
            if alpha >= 1 {
                phi.push(PureAtom::lt(us[alpha - 1].clone(), xv.clone()));
            }
            if alpha < n {
                phi.push(PureAtom::le(xv.clone(), us[alpha].clone()));
            }
            if beta >= 1 {
                phi.push(PureAtom::lt(us[beta - 1].clone(), xt.clone()));
            }
            if beta < n {
                phi.push(PureAtom::le(xt.clone(), us[beta].clone()));
            }
            let rep: TermSet = us[alpha..beta]
                .iter()
                .flat_map(|u| [Term::base(u.clone()), Term::end(u.clone())])
                .collect();
            let new_arr = SpatialAtom::Arr(xv.clone(), xt.clone());

            let mut shapes: Vec<(&'static str, SymbolicHeap)> = Vec::new();
            let all_narrs: Vec<SpatialAtom> =
                narr_th.iter().map(|(a, b)| SpatialAtom::NegArr(a.clone(), b.clone())).collect();
            shapes.push((
                "alloc.fresh",
                rest_th.clone().with_spatial(all_narrs).with_spatial([new_arr.clone()]).with_pure(phi.clone()),
            ));
            for j in 0..m {
                for k in j..m {
                    let kept: Vec<SpatialAtom> = narr_th
                        .iter()
                        .enumerate()
                        .filter(|(i, _)| *i < j || *i > k)
                        .map(|(_, (a, b))| SpatialAtom::NegArr(a.clone(), b.clone()))
                        .collect();
                    let (tj, tj1) = &narr_th[j];
                    let (tk, tk1) = &narr_th[k];
                    for (label, left_inner, right_inner) in [
                        ("alloc.split_both", true, true),
                        ("alloc.split_right", false, true),
                        ("alloc.split_left", true, false),
                        ("alloc.split_none", false, false),
                    ] {
                        let mut sp = kept.clone();
                        sp.push(new_arr.clone());
                        let mut pu = phi.clone();
                        if left_inner {
                            sp.push(SpatialAtom::NegArr(tj.clone(), xv.clone()));
                            pu.push(PureAtom::lt(tj.clone(), xv.clone()));
                            pu.push(PureAtom::lt(xv.clone(), tj1.clone()));
                        } else {
                            if j >= 1 {
                                pu.push(PureAtom::le(narr_th[j - 1].1.clone(), xv.clone()));
                            }
                            pu.push(PureAtom::le(xv.clone(), tj.clone()));
                        }
                        if right_inner {
                            sp.push(SpatialAtom::NegArr(xt.clone(), tk1.clone()));
                            pu.push(PureAtom::lt(tk.clone(), xt.clone()));
                            pu.push(PureAtom::lt(xt.clone(), tk1.clone()));
                        } else {
                            pu.push(PureAtom::le(tk1.clone(), xt.clone()));
                            if k + 1 < m {
                                pu.push(PureAtom::le(xt.clone(), narr_th[k + 1].0.clone()));
                            }
                        }
                        shapes.push((label, rest_th.clone().with_spatial(sp).with_pure(pu)));
                    }
                }
            }
            for (label, chi) in shapes {
                let body = replace_terms(&chi, &rep, &Term::Null)?;
                produced.push((label, Disjunct::new(vec![x1.clone()], body)));
            }
        }
    }
    Ok(finish(w, produced))
}

/// Start and end of a spatial atom that holds allocated cells.
fn allocated_range(a: &SpatialAtom) -> Option<(Term, Term, bool)> {
    match a {
        SpatialAtom::PointsTo(l, _) => Some((l.clone(), l.clone().plus(1), false)),
        SpatialAtom::Arr(l, r) => Some((l.clone(), r.clone(), true)),
        _ => None,
    }
}

fn free(w: &mut Wpo, solver: &PureSolver, psi: &SymbolicHeap, t: &Term) -> Result<Assertion> {
    let bt = Term::base(t.clone());
    let et = Term::end(t.clone());
    if !solver.entails(&PureAtom::eq(bt.clone(), t.clone())) {
        return Ok(Assertion::falsum());
    }
    let atoms: Vec<(usize, Term, Term, bool)> = psi
        .spatial()
        .iter()
        .enumerate()
        .filter_map(|(i, a)| allocated_range(a).map(|(l, r, arr)| (i, l, r, arr)))
        .collect();
    let eq = |a: &Term, b: &Term| solver.entails(&PureAtom::eq(a.clone(), b.clone()));
    let lt = |a: &Term, b: &Term| solver.entails(&PureAtom::lt(a.clone(), b.clone()));

    // First atom of the chain: it starts at b(t), or b(t) lies strictly inside.
    let mut first = None;
    for a in &atoms {
        if eq(&a.1, &bt) {
            first = Some((a.clone(), false));
            break;
        }
        if a.3 && lt(&a.1, &bt) && lt(&bt, &a.2) {
            first = Some((a.clone(), true));
            break;
        }
    }
    let Some((head, start_inside)) = first else { return Ok(Assertion::falsum()) };
    let mut chain = vec![head];
    let end_inside = loop {
        let cur = chain.last().unwrap().clone();
        if eq(&et, &cur.2) {
            break false;
        }
        if cur.3 && lt(&cur.1, &et) && lt(&et, &cur.2) {
            break true;
        }
        let next = atoms.iter().find(|a| !chain.iter().any(|c| c.0 == a.0) && eq(&a.1, &cur.2) && lt(&cur.1, &a.1));
        match next {
            Some(a) => chain.push(a.clone()),
            None => return Ok(Assertion::falsum()),
        }
    };
    let first_atom = &chain[0];
    let last_atom = chain.last().unwrap();
    let y = w.fresh();
    let yv = var(&y);
    let mut sp = Vec::new();
    if start_inside {
        sp.push(SpatialAtom::Arr(first_atom.1.clone(), t.clone()));
    }
    sp.push(SpatialAtom::NegArr(t.clone(), yv.clone()));
    if end_inside {
        sp.push(SpatialAtom::Arr(yv.clone(), last_atom.2.clone()));
    }
    let label = match (start_inside, end_inside) {
        (true, true) => "free.inner_both",
        (false, true) => "free.start_at_base",
        (false, false) => "free.whole_blocks",
        (true, false) => "free.end_at_end",
    };
    let rest_sp: Vec<SpatialAtom> = psi
        .spatial()
        .iter()
        .enumerate()
        .filter(|(i, _)| !chain.iter().any(|c| c.0 == *i))
        .map(|(_, a)| a.clone())
        .collect();
    sp.extend(rest_sp);
    let body = heap_of(sp, psi.pure().to_vec());

    let terms = heap_term_set(psi);
    let tb: TermSet =
        terms.iter().filter(|s| matches!(s, Term::Base(_)) && eq(s, &bt)).cloned().collect();
    let te: TermSet =
        terms.iter().filter(|s| matches!(s, Term::End(_)) && eq(s, &et)).cloned().collect();
    let body = replace_terms(&body, &tb, t)?;
    let body = replace_terms(&body, &te, &yv)?;
    Ok(finish(w, vec![(label, Disjunct::new(vec![y], body))]))
}

fn load(w: &mut Wpo, solver: &PureSolver, psi: &SymbolicHeap, x: &Ident, t: &Term) -> Result<Assertion> {
    let eq = |a: &Term, b: &Term| solver.entails(&PureAtom::eq(a.clone(), b.clone()));
    let le = |a: &Term, b: &Term| solver.entails(&PureAtom::le(a.clone(), b.clone()));
    let lt = |a: &Term, b: &Term| solver.entails(&PureAtom::lt(a.clone(), b.clone()));
    let x1 = w.fresh();
    let v1 = var(&x1);
    let th = |h: &SymbolicHeap| subst_heap(h, x, &v1);
    for a in psi.spatial() {
        if let SpatialAtom::PointsTo(ta, u) = a {
            if eq(ta, t) {
                let body = th(psi).with_pure([PureAtom::eq(var(x), subst_term(u, x, &v1))]);
                return Ok(finish(w, vec![("load.pointsto", Disjunct::new(vec![x1], body))]));
            }
        }
    }
    for (i, a) in psi.spatial().iter().enumerate() {
        let SpatialAtom::Arr(ta, ta1) = a else { continue };
        if !(le(ta, t) && lt(t, ta1)) {
            continue;
        }
        if w.options().variant == RuleVariant::Literal {
            return Ok(finish(w, vec![("load.array", Disjunct::new(vec![x1], th(psi)))]));
        }
        // Split the array around the loaded cell, which now holds x.
        let rest = without(psi, i);
        let mut lefts: Vec<(Vec<SpatialAtom>, Vec<PureAtom>)> = Vec::new();
        if eq(ta, t) {
            lefts.push((vec![], vec![]));
        } else if lt(ta, t) {
            lefts.push((vec![SpatialAtom::Arr(ta.clone(), t.clone())], vec![]));
        } else {
            lefts.push((vec![], vec![PureAtom::eq(ta.clone(), t.clone())]));
            lefts.push((vec![SpatialAtom::Arr(ta.clone(), t.clone())], vec![]));
        }
        let t1 = t.clone().plus(1);
        let mut rights: Vec<(Vec<SpatialAtom>, Vec<PureAtom>)> = Vec::new();
        if eq(&t1, ta1) {
            rights.push((vec![], vec![]));
        } else if lt(&t1, ta1) {
            rights.push((vec![SpatialAtom::Arr(t1.clone(), ta1.clone())], vec![]));
        } else {
            rights.push((vec![], vec![PureAtom::eq(t1.clone(), ta1.clone())]));
            rights.push((vec![SpatialAtom::Arr(t1.clone(), ta1.clone())], vec![]));
        }
        let mut produced = Vec::new();
        for (ls, lp) in &lefts {
            for (rs, rp) in &rights {
                let pre_part = rest
                    .clone()
                    .with_spatial(ls.iter().cloned())
                    .with_spatial(rs.iter().cloned())
                    .with_pure(lp.iter().cloned())
                    .with_pure(rp.iter().cloned());
                let body = th(&pre_part)
                    .with_spatial([SpatialAtom::PointsTo(subst_term(t, x, &v1), var(x))]);
                produced.push(("load.array", Disjunct::new(vec![x1.clone()], body)));
            }
        }
        return Ok(finish(w, produced));
    }
    Ok(Assertion::falsum())
}

fn store(w: &mut Wpo, solver: &PureSolver, psi: &SymbolicHeap, t: &Term, v: &Term) -> Result<Assertion> {
    let eq = |a: &Term, b: &Term| solver.entails(&PureAtom::eq(a.clone(), b.clone()));
    let le = |a: &Term, b: &Term| solver.entails(&PureAtom::le(a.clone(), b.clone()));
    let lt = |a: &Term, b: &Term| solver.entails(&PureAtom::lt(a.clone(), b.clone()));
    let cell = SpatialAtom::PointsTo(t.clone(), v.clone());
    for (i, a) in psi.spatial().iter().enumerate() {
        if let SpatialAtom::PointsTo(ta, _) = a {
            if eq(ta, t) {
                let body = without(psi, i).with_spatial([cell]);
                return Ok(finish(w, vec![("store.pointsto", Disjunct::plain(body))]));
            }
        }
    }
    let t1 = t.clone().plus(1);
    let corrected = w.options().variant == RuleVariant::Corrected;
    for (i, a) in psi.spatial().iter().enumerate() {
        let SpatialAtom::Arr(ta, ta1) = a else { continue };
        if !(le(ta, t) && lt(t, ta1)) {
            continue;
        }
        let rest = without(psi, i);
        let at_start = eq(ta, t);
        let at_end = eq(&t1, ta1);
        let (label, sp) = if corrected && at_start && at_end {
            ("store.single", vec![cell])
        } else if at_start {
            ("store.head", vec![cell, SpatialAtom::Arr(t1.clone(), ta1.clone())])
        } else if lt(ta, t) && lt(&t1, ta1) {
            (
                "store.middle",
                vec![SpatialAtom::Arr(ta.clone(), t.clone()), cell, SpatialAtom::Arr(t1.clone(), ta1.clone())],
            )
        } else if at_end {
            ("store.tail", vec![SpatialAtom::Arr(ta.clone(), t.clone()), cell])
        } else {
            return Ok(Assertion::falsum());
        };
        let body = rest.with_spatial(sp);
        return Ok(finish(w, vec![(label, Disjunct::plain(body))]));
    }
    Ok(Assertion::falsum())
}
