//! Proof-rule instance validation.
//!
//! An instance names a rule, lists its premises and conclusion, and may pin
//! rule parameters. The check is schema matching plus entailment side
//! conditions; nothing is searched for beyond the rule's own finite
//! parameters.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::canonical::{entailed_order, is_canonical};
use crate::entailment::{entails_assertion, AssertionEntailment, PureSolver};
use crate::error::{IslError, Result};
use crate::semantics::{Scope, Universe};
use crate::syntax::{
    command_term_set, heap_term_set, heap_term_set_minus, modified_vars, replace_terms,
    subst_heap, subst_term, vars_of, Assertion, Command, Disjunct, Exit, Ident, PureAtom,
    SpatialAtom, SymbolicHeap, Term, TermSet,
};

use super::Triple;

const RULES: &[(&str, Rule)] = &[
    ("Skip", Rule::Skip),
    ("Error", Rule::Error),
    ("Seq1", Rule::Seq1),
    ("Seq2", Rule::Seq2),
    ("LoopZero", Rule::LoopZero),
    ("LoopNonZero", Rule::LoopNonZero),
    ("Cons", Rule::Cons),
    ("Disj", Rule::Disj),
    ("Choice", Rule::Choice),
    ("Exist", Rule::Exist),
    ("Assign", Rule::Assign),
    ("Havoc", Rule::Havoc),
    ("Assume", Rule::Assume),
    ("Local", Rule::Local),
    ("FrameOk", Rule::FrameOk),
    ("Alloc1", Rule::Alloc(1)),
    ("Alloc2", Rule::Alloc(2)),
    ("Alloc3", Rule::Alloc(3)),
    ("Alloc4", Rule::Alloc(4)),
    ("Alloc5", Rule::Alloc(5)),
    ("AllocEr", Rule::AllocEr),
    ("FreeArr1", Rule::FreeArr(1)),
    ("FreeArr2", Rule::FreeArr(2)),
    ("FreeArr3", Rule::FreeArr(3)),
    ("FreeArr4", Rule::FreeArr(4)),
    ("FreeEr", Rule::FreeEr),
    ("LoadPtr", Rule::LoadPtr),
    ("LoadArr", Rule::LoadArr),
    ("LoadArrLiteral", Rule::LoadArrLiteral),
    ("LoadEr", Rule::LoadEr),
    ("StorePtr", Rule::StorePtr),
    ("StoreArr1", Rule::StoreArr(1)),
    ("StoreArr2", Rule::StoreArr(2)),
    ("StoreArr3", Rule::StoreArr(3)),
    ("StoreArrSingle", Rule::StoreArrSingle),
    ("StoreEr", Rule::StoreEr),
];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Rule {
    Skip,
    Error,
    Seq1,
    Seq2,
    LoopZero,
    LoopNonZero,
    Cons,
    Disj,
    Choice,
    Exist,
    Assign,
    Havoc,
    Assume,
    Local,
    FrameOk,
    Alloc(u8),
    AllocEr,
    FreeArr(u8),
    FreeEr,
    LoadPtr,
    LoadArr,
    LoadArrLiteral,
    LoadEr,
    StorePtr,
    StoreArr(u8),
    StoreArrSingle,
    StoreEr,
}

/// Canonical names of every supported rule.
pub fn rule_names() -> Vec<&'static str> {
    RULES.iter().map(|r| r.0).collect()
}

fn lookup(name: &str) -> Option<Rule> {
    let key: String = name.chars().filter(|c| c.is_ascii_alphanumeric()).collect::<String>().to_lowercase();
    RULES.iter().find(|r| r.0.to_lowercase() == key).map(|r| r.1)
}

/// Parameters of an instance that the rule schema leaves open.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SideConditions {
    /// The frame `φ` of Frame-Ok.
    #[serde(default, skip)]
    pub frame: Option<SymbolicHeap>,
    /// `(α, β)` of the allocation rules; every pair is tried when absent.
    #[serde(default)]
    pub alloc_range: Option<(usize, usize)>,
    /// `(j, k)` of Alloc 2–5, counted from 1; every pair is tried when absent.
    #[serde(default)]
    pub split: Option<(usize, usize)>,
    /// Universe bound for the enumerative fallback of Cons entailments.
    #[serde(default)]
    pub entailment_vmax: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RuleCheck {
    pub rule: String,
    pub accepted: bool,
    pub reason: String,
}

type Check = std::result::Result<(), String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Check {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

/// Validates one rule instance. Unknown rule names are errors; a schema
/// mismatch is a rejected instance with a reason.
pub fn check_rule_instance(
    rule: &str,
    premises: &[Triple],
    side: &SideConditions,
    conclusion: &Triple,
) -> Result<RuleCheck> {
    let r = lookup(rule).ok_or_else(|| IslError::Unsupported(format!("unknown rule `{rule}`")))?;
    let outcome = check(r, premises, side, conclusion)?;
    let name = RULES.iter().find(|x| x.1 == r).map(|x| x.0).unwrap_or(rule);
    Ok(match outcome {
        Ok(()) => RuleCheck { rule: name.into(), accepted: true, reason: "instance matches".into() },
        Err(reason) => {
            log::debug!("rule {name} rejected: {reason}");
            RuleCheck { rule: name.into(), accepted: false, reason }
        }
    })
}

fn check(r: Rule, premises: &[Triple], side: &SideConditions, c: &Triple) -> Result<Check> {
    let arity = match r {
        Rule::Seq1 | Rule::LoopNonZero | Rule::Cons | Rule::Exist | Rule::Local | Rule::FrameOk => Some(1),
        Rule::Seq2 | Rule::Choice => Some(2),
        Rule::Disj => None,
        _ => Some(0),
    };
    if let Some(n) = arity {
        if premises.len() != n {
            return Ok(Err(format!("expected {n} premises, got {}", premises.len())));
        }
    }
    Ok(match r {
        Rule::Skip => skip_like(c, matches!(c.prog, Command::Skip), "skip"),
        Rule::LoopZero => skip_like(c, matches!(c.prog, Command::Star(_)), "a loop"),
        Rule::Error => (|| {
            ensure(c.prog == Command::Error, || "command is not error()".into())?;
            match c.exit {
                Exit::Ok => ensure(c.post.is_false(), || "ok post must be false".into()),
                Exit::Er => ensure(same(&c.pre, &c.post), || "er post must equal the pre".into()),
            }
        })(),
        Rule::Seq1 => (|| {
            let p = &premises[0];
            let Command::Seq(c1, _) = &c.prog else { return Err("command is not a sequence".into()) };
            ensure(p.prog == **c1, || "premise command is not the first component".into())?;
            ensure(p.exit == Exit::Er && c.exit == Exit::Er, || "Seq1 is for er only".into())?;
            same_pre_post(p, c)
        })(),
        Rule::Seq2 => (|| {
            let (p1, p2) = (&premises[0], &premises[1]);
            let Command::Seq(c1, c2) = &c.prog else { return Err("command is not a sequence".into()) };
            ensure(p1.prog == **c1 && p2.prog == **c2, || "premise commands do not match".into())?;
            ensure(p1.exit == Exit::Ok, || "first premise must be ok".into())?;
            ensure(p2.exit == c.exit, || "exit mismatch".into())?;
            ensure(same(&p1.post, &p2.pre), || "middle assertions differ".into())?;
            ensure(same(&p1.pre, &c.pre) && same(&p2.post, &c.post), || "outer assertions differ".into())
        })(),
        Rule::LoopNonZero => (|| {
            let p = &premises[0];
            let Command::Star(body) = &c.prog else { return Err("command is not a loop".into()) };
            let unrolled = Command::seq(c.prog.clone(), (**body).clone());
            ensure(p.prog == unrolled, || "premise command is not C*; C".into())?;
            ensure(p.exit == c.exit, || "exit mismatch".into())?;
            same_pre_post(p, c)
        })(),
        Rule::Cons => {
            let p = &premises[0];
            if p.prog != c.prog || p.exit != c.exit {
                return Ok(Err("command or exit mismatch".into()));
            }
            if !entails(&p.pre, &c.pre, side)? {
                return Ok(Err("premise pre does not entail conclusion pre".into()));
            }
            if !entails(&c.post, &p.post, side)? {
                return Ok(Err("conclusion post does not entail premise post".into()));
            }
            Ok(())
        }
        Rule::Disj => (|| {
            ensure(!premises.is_empty(), || "Disj needs premises".into())?;
            ensure(premises.iter().all(|p| p.prog == c.prog && p.exit == c.exit), || "command or exit mismatch".into())?;
            let mut pre = Assertion::falsum();
            let mut post = Assertion::falsum();
            for p in premises {
                pre.extend(p.pre.clone());
                post.extend(p.post.clone());
            }
            ensure(same(&pre, &c.pre) && same(&post, &c.post), || "disjunctions do not match".into())
        })(),
        Rule::Choice => (|| {
            let (p1, p2) = (&premises[0], &premises[1]);
            let Command::Choice(c1, c2) = &c.prog else { return Err("command is not a choice".into()) };
            ensure(p1.prog == **c1 && p2.prog == **c2, || "premise commands do not match".into())?;
            ensure(p1.exit == c.exit && p2.exit == c.exit, || "exit mismatch".into())?;
            same_pre_post(p1, c)?;
            same_pre_post(p2, c)
        })(),
        Rule::Exist => (|| {
            let p = &premises[0];
            ensure(p.prog == c.prog && p.exit == c.exit, || "command or exit mismatch".into())?;
            let x = c
                .pre
                .disjuncts
                .first()
                .and_then(|d| d.bound.first().cloned())
                .ok_or_else(|| "conclusion pre has no quantifier".to_string())?;
            ensure(!vars_of(&command_term_set(&c.prog)).contains(&x), || format!("{x} occurs in the command"))?;
            ensure(same(&bind(&p.pre, &x), &c.pre), || "pre is not the quantified premise pre".into())?;
            ensure(same(&bind(&p.post, &x), &c.post), || "post is not the quantified premise post".into())
        })(),
        Rule::Local => (|| {
            let p = &premises[0];
            let Command::Local(x, body) = &c.prog else { return Err("command is not local".into()) };
            ensure(p.prog == **body && p.exit == c.exit, || "command or exit mismatch".into())?;
            let psi = single_heap(&p.pre).ok_or_else(|| "premise pre is not a symbolic heap".to_string())?;
            ensure(!vars_of(&heap_term_set(psi)).contains(x), || format!("{x} occurs in the pre"))?;
            ensure(same(&p.pre, &c.pre), || "pre differs".into())?;
            ensure(same(&bind(&p.post, x), &c.post), || "post is not the quantified premise post".into())
        })(),
        Rule::FrameOk => frame_ok(&premises[0], side, c),
        Rule::Assign | Rule::Havoc => assign(r, c),
        Rule::Assume => (|| {
            let Command::Assume(pi) = &c.prog else { return Err("command is not assume".into()) };
            let psi = single_heap(&c.pre).ok_or_else(|| "pre is not a symbolic heap".to_string())?;
            match c.exit {
                Exit::Ok => {
                    let want = Assertion::single(psi.clone().with_pure(pi.iter().cloned()));
                    ensure(same(&want, &c.post), || "post is not pi * psi".into())
                }
                Exit::Er => ensure(c.post.is_false(), || "er post must be false".into()),
            }
        })(),
        Rule::AllocEr => (|| {
            ensure(matches!(c.prog, Command::Alloc(..)), || "command is not alloc".into())?;
            ensure(c.exit == Exit::Er && c.post.is_false(), || "AllocEr concludes er: false".into())
        })(),
        Rule::Alloc(n) => heap_rule(c, |psi, solver| alloc(n, psi, solver, side, c)),
        Rule::FreeArr(n) => heap_rule(c, |psi, solver| free_arr(n, psi, solver, c)),
        Rule::FreeEr | Rule::LoadEr | Rule::StoreEr => heap_rule(c, |psi, solver| error_rule(r, psi, solver, c)),
        Rule::LoadPtr | Rule::LoadArr | Rule::LoadArrLiteral => heap_rule(c, |psi, solver| load(r, psi, solver, c)),
        Rule::StorePtr | Rule::StoreArr(_) | Rule::StoreArrSingle => {
            heap_rule(c, |psi, solver| store(r, psi, solver, c))
        }
    })
}

fn skip_like(c: &Triple, shape: bool, what: &str) -> Check {
    ensure(shape, || format!("command is not {what}"))?;
    match c.exit {
        Exit::Ok => ensure(same(&c.pre, &c.post), || "ok post must equal the pre".into()),
        Exit::Er => ensure(c.post.is_false(), || "er post must be false".into()),
    }
}

fn same_pre_post(p: &Triple, c: &Triple) -> Check {
    ensure(same(&p.pre, &c.pre), || "pre differs".into())?;
    ensure(same(&p.post, &c.post), || "post differs".into())
}

/// The assertion with `x` added in front of every disjunct's binders.
fn bind(a: &Assertion, x: &Ident) -> Assertion {
    let mut out = a.clone();
    for d in &mut out.disjuncts {
        d.bound.insert(0, x.clone());
    }
    out
}

fn single_heap(a: &Assertion) -> Option<&SymbolicHeap> {
    match a.disjuncts.as_slice() {
        [d] if d.bound.is_empty() => Some(&d.body),
        _ => None,
    }
}

/// Drops `emp` atoms and repeated pure atoms.
fn normalise(h: &SymbolicHeap) -> SymbolicHeap {
    let sp: Vec<SpatialAtom> = h.spatial().iter().filter(|a| **a != SpatialAtom::Emp).cloned().collect();
    let mut pu = h.pure().to_vec();
    pu.dedup();
    SymbolicHeap::new(sp, pu)
}

/// Disjunct with its binders renamed to positional names that cannot be
/// written in the concrete syntax.
fn alpha_key(d: &Disjunct) -> SymbolicHeap {
    let mut body = d.body.clone();
    let tmp: Vec<Ident> = (0..d.bound.len()).map(|i| Ident::new(&format!("%t{i}"))).collect();
    for (x, t) in d.bound.iter().zip(&tmp) {
        body = subst_heap(&body, x, &Term::Var(t.clone()));
    }
    for (i, t) in tmp.iter().enumerate() {
        body = subst_heap(&body, t, &Term::Var(Ident::new(&format!("%{i}"))));
    }
    normalise(&body)
}

/// Equality up to renaming of binders, `emp`, and disjunct order.
fn same(a: &Assertion, b: &Assertion) -> bool {
    if a.disjuncts.len() != b.disjuncts.len() {
        return false;
    }
    let key = |x: &Assertion| {
        let mut v: Vec<(usize, SymbolicHeap)> = x.disjuncts.iter().map(|d| (d.bound.len(), alpha_key(d))).collect();
        v.sort();
        v
    };
    key(a) == key(b)
}

/// Sufficient symbolic check for `a ⊨ b`, with an optional enumerative
/// fallback over a universe.
fn entails(a: &Assertion, b: &Assertion, side: &SideConditions) -> Result<bool> {
    let syntactic = a.disjuncts.iter().all(|da| {
        let ka = alpha_key(da);
        let sa = PureSolver::for_heap(&ka);
        !sa.is_sat()
            || b.disjuncts.iter().any(|db| {
                let kb = alpha_key(db);
                db.bound.len() == da.bound.len() && kb.spatial() == ka.spatial() && sa.entails_all(kb.pure())
            })
    });
    if syntactic {
        return Ok(true);
    }
    let Some(vmax) = side.entailment_vmax else { return Ok(false) };
    let u = Universe::covering(&[a, b], &[], vmax)?;
    Ok(entails_assertion(a, b, &u, Scope::All)? == AssertionEntailment::Yes)
}

fn frame_ok(p: &Triple, side: &SideConditions, c: &Triple) -> Check {
    ensure(p.exit == Exit::Ok && c.exit == Exit::Ok, || "there is no frame rule for er".into())?;
    ensure(p.prog == c.prog, || "command mismatch".into())?;
    let phi = side.frame.as_ref().ok_or_else(|| "Frame-Ok needs the frame as a side condition".to_string())?;
    let modified = modified_vars(&c.prog);
    let frame_vars = vars_of(&heap_term_set(phi));
    ensure(modified.is_disjoint(&frame_vars), || "the command modifies a variable of the frame".into())?;
    let psi = single_heap(&p.pre).ok_or_else(|| "premise pre is not a symbolic heap".to_string())?;
    ensure(same(&Assertion::single(psi.star(phi)), &c.pre), || "pre is not psi * frame".into())?;
    let mut post = Assertion::falsum();
    for d in &p.post.disjuncts {
        ensure(d.bound.iter().all(|x| !frame_vars.contains(x)), || "a binder of the post captures the frame".into())?;
        post.disjuncts.push(Disjunct::new(d.bound.clone(), d.body.star(phi)));
    }
    ensure(same(&post, &c.post), || "post is not phi * frame".into())
}

/// The single binder of a one-disjunct postcondition, checked fresh.
fn fresh_binder(post: &Assertion, avoid: &BTreeSet<Ident>) -> std::result::Result<(Ident, SymbolicHeap), String> {
    match post.disjuncts.as_slice() {
        [d] if d.bound.len() == 1 => {
            let x1 = d.bound[0].clone();
            ensure(!avoid.contains(&x1), || format!("binder {x1} is not fresh"))?;
            Ok((x1, d.body.clone()))
        }
        _ => Err("post must be a single disjunct with one binder".into()),
    }
}

fn heap_vars(psi: &SymbolicHeap) -> BTreeSet<Ident> {
    psi.free_vars().into_iter().collect()
}

fn assign(r: Rule, c: &Triple) -> Check {
    let psi = single_heap(&c.pre).ok_or_else(|| "pre is not a symbolic heap".to_string())?;
    let (x, t) = match (&c.prog, r) {
        (Command::Assign(x, t), Rule::Assign) => (x, Some(t)),
        (Command::Havoc(x), Rule::Havoc) => (x, None),
        _ => return Err("command does not match the rule".into()),
    };
    if c.exit == Exit::Er {
        return ensure(c.post.is_false(), || "er post must be false".into());
    }
    let mut avoid = heap_vars(psi);
    avoid.insert(x.clone());
    if let Some(t) = t {
        avoid.extend(vars_of(&crate::syntax::term_set(t)));
    }
    let (x1, body) = fresh_binder(&c.post, &avoid)?;
    let v1 = Term::Var(x1);
    let mut want = subst_heap(psi, x, &v1);
    if let Some(t) = t {
        want = want.with_pure([PureAtom::eq(Term::Var(x.clone()), subst_term(t, x, &v1))]);
    }
    ensure(normalise(&want) == normalise(&body), || "post does not match the schema".into())
}

/// Common premise of the memory rules: a canonical symbolic-heap pre.
fn heap_rule(c: &Triple, f: impl FnOnce(&SymbolicHeap, &PureSolver) -> Check) -> Check {
    let psi = single_heap(&c.pre).ok_or_else(|| "pre is not a symbolic heap".to_string())?;
    let mut terms = heap_term_set(psi);
    terms.extend(command_term_set(&c.prog));
    ensure(is_canonical(psi, &terms), || "pre is not in canonical form for the command".into())?;
    f(psi, &PureSolver::new(psi.pure()))
}

fn entailed(solver: &PureSolver, a: PureAtom) -> Check {
    ensure(solver.entails(&a), || format!("side condition {a} is not entailed"))
}

fn expect_false_er(c: &Triple) -> Option<Check> {
    (c.exit == Exit::Er).then(|| ensure(c.post.is_false(), || "er post must be false".into()))
}

fn error_rule(r: Rule, psi: &SymbolicHeap, solver: &PureSolver, c: &Triple) -> Check {
    let t = match (&c.prog, r) {
        (Command::Free(t), Rule::FreeEr) | (Command::Load(_, t), Rule::LoadEr) | (Command::Store(t, _), Rule::StoreEr) => t,
        _ => return Err("command does not match the rule".into()),
    };
    let bt = Term::base(t.clone());
    let mut guard = vec![PureAtom::eq(bt.clone(), Term::Null)];
    if r == Rule::FreeEr {
        guard.push(PureAtom::ne(bt, t.clone()));
    }
    ensure(solver.entails_any(&guard), || "error guard is not entailed".into())?;
    match c.exit {
        Exit::Ok => ensure(c.post.is_false(), || "ok post must be false".into()),
        Exit::Er => ensure(same(&Assertion::single(psi.clone()), &c.post), || "er post must equal the pre".into()),
    }
}

fn without(psi: &SymbolicHeap, idx: &[usize]) -> Vec<SpatialAtom> {
    psi.spatial().iter().enumerate().filter(|(i, _)| !idx.contains(i)).map(|(_, a)| a.clone()).collect()
}

fn alloc(n: u8, psi: &SymbolicHeap, solver: &PureSolver, side: &SideConditions, c: &Triple) -> Check {
    let Command::Alloc(x, t) = &c.prog else { return Err("command is not alloc".into()) };
    ensure(c.exit == Exit::Ok, || "allocation rules conclude ok; use AllocEr".into())?;
    let mut avoid = heap_vars(psi);
    avoid.insert(x.clone());
    avoid.extend(vars_of(&crate::syntax::term_set(t)));
    let (x1, body) = fresh_binder(&c.post, &avoid)?;
    let v1 = Term::Var(x1);
    let th = |s: &Term| subst_term(s, x, &v1);
    let xv = Term::Var(x.clone());
    let tt = th(t);
    let xt = Term::add(xv.clone(), tt.clone());

    let mut narr: Vec<(usize, Term, Term)> = psi
        .spatial()
        .iter()
        .enumerate()
        .filter_map(|(i, a)| match a {
            SpatialAtom::NegArr(l, r) => Some((i, l.clone(), r.clone())),
            _ => None,
        })
        .collect();
    narr.sort_by(|a, b| a.1.cmp(&b.1));
    let mut ordered = Vec::with_capacity(narr.len());
    for item in narr {
        let pos = ordered
            .iter()
            .position(|o: &(usize, Term, Term)| solver.entails(&PureAtom::lt(item.1.clone(), o.1.clone())))
            .unwrap_or(ordered.len());
        ordered.insert(pos, item);
    }
    for w in ordered.windows(2) {
        entailed(solver, PureAtom::lt(w[0].1.clone(), w[1].1.clone()))?;
    }
    let m = ordered.len();
    let idx: Vec<usize> = ordered.iter().map(|o| o.0).collect();
    let psi_rest = SymbolicHeap::new(without(psi, &idx), psi.pure().to_vec());
    let psi_rest_th = subst_heap(&psi_rest, x, &v1);
    let tn: Vec<(Term, Term)> = ordered.iter().map(|o| (th(&o.1), th(&o.2))).collect();

    let minus: Vec<Term> = heap_term_set_minus(psi).into_iter().collect();
    let us: Vec<Term> = entailed_order(solver, &minus)
        .ok_or_else(|| "heap terms are not totally ordered".to_string())?
        .into_iter()
        .flatten()
        .map(|u| th(&u))
        .collect();
    let nu = us.len();
    let narr_atom = |p: &(Term, Term)| SpatialAtom::NegArr(p.0.clone(), p.1.clone());

    let ranges: Vec<(usize, usize)> = match side.alloc_range {
        Some(r) => vec![r],
        None => (0..=nu).flat_map(|a| (a..=nu).map(move |b| (a, b))).collect(),
    };
    let splits: Vec<(usize, usize)> = match (n, side.split) {
        (1, _) => vec![(0, 0)],
        (_, Some(s)) => vec![s],
        _ => (1..=m).flat_map(|j| (j..=m).map(move |k| (j, k))).collect(),
    };
    for &(alpha, beta) in &ranges {
        if alpha > beta || beta > nu {
            return Err(format!("alpha/beta out of range (N = {nu})"));
        }
        let mut phi = vec![PureAtom::eq(Term::base(xv.clone()), xv.clone()), PureAtom::eq(Term::end(xv.clone()), xt.clone())];
        if alpha >= 1 {
            phi.push(PureAtom::lt(us[alpha - 1].clone(), xv.clone()));
        }
        if alpha < nu {
            phi.push(PureAtom::le(xv.clone(), us[alpha].clone()));
        }
        if beta >= 1 {
            phi.push(PureAtom::lt(us[beta - 1].clone(), xt.clone()));
        }
        if beta < nu {
            phi.push(PureAtom::le(xt.clone(), us[beta].clone()));
        }
        let rep: TermSet =
            us[alpha..beta].iter().flat_map(|u| [Term::base(u.clone()), Term::end(u.clone())]).collect();
        let new_arr = SpatialAtom::Arr(xv.clone(), xt.clone());
        for &(j, k) in &splits {
            let chi = if n == 1 {
                subst_heap(psi, x, &v1).with_spatial([new_arr.clone()]).with_pure(phi.clone())
            } else {
                if !(1 <= j && j <= k && k <= m) {
                    return Err(format!("j/k out of range (m = {m})"));
                }
                let (tj, tj1) = &tn[j - 1];
                let (tk, tk1) = &tn[k - 1];
                let mut sp: Vec<SpatialAtom> = tn[..j - 1].iter().map(narr_atom).collect();
                sp.extend(tn[k..].iter().map(narr_atom));
                sp.push(new_arr.clone());
                let mut pu = phi.clone();
                let left_inner = n == 2 || n == 4;
                let right_inner = n == 2 || n == 3;
                if left_inner {
                    sp.push(SpatialAtom::NegArr(tj.clone(), xv.clone()));
                    pu.push(PureAtom::lt(tj.clone(), xv.clone()));
                    pu.push(PureAtom::lt(xv.clone(), tj1.clone()));
                } else {
                    if j >= 2 {
                        pu.push(PureAtom::le(tn[j - 2].1.clone(), xv.clone()));
                    }
                    pu.push(PureAtom::le(xv.clone(), tj.clone()));
                }
                if right_inner {
                    sp.push(SpatialAtom::NegArr(xt.clone(), tk1.clone()));
                    pu.push(PureAtom::lt(tk.clone(), xt.clone()));
                    pu.push(PureAtom::lt(xt.clone(), tk1.clone()));
                } else {
                    pu.push(PureAtom::le(tk1.clone(), xt.clone()));
                    if k < m {
                        pu.push(PureAtom::le(xt.clone(), tn[k].0.clone()));
                    }
                }
                psi_rest_th.clone().with_spatial(sp).with_pure(pu)
            };
            let want = replace_terms(&chi, &rep, &Term::Null).map_err(|e| e.to_string())?;
            if normalise(&want) == normalise(&body) {
                return Ok(());
            }
        }
    }
    Err("post matches no instantiation of the schema".into())
}

/// Start, end and kind (`true` for an array) of an allocated atom.
fn range_of(a: &SpatialAtom) -> Option<(Term, Term, bool)> {
    match a {
        SpatialAtom::PointsTo(l, _) => Some((l.clone(), l.clone().plus(1), false)),
        SpatialAtom::Arr(l, r) => Some((l.clone(), r.clone(), true)),
        _ => None,
    }
}

fn free_arr(n: u8, psi: &SymbolicHeap, solver: &PureSolver, c: &Triple) -> Check {
    let Command::Free(t) = &c.prog else { return Err("command is not free".into()) };
    let bt = Term::base(t.clone());
    let et = Term::end(t.clone());
    entailed(solver, PureAtom::eq(bt.clone(), t.clone()))?;
    let start_inside = n == 1 || n == 4;
    let end_inside = n == 1 || n == 2;
    let atoms: Vec<(usize, Term, Term, bool)> = psi
        .spatial()
        .iter()
        .enumerate()
        .filter_map(|(i, a)| range_of(a).map(|(l, r, k)| (i, l, r, k)))
        .collect();
    let holds = |a: PureAtom| solver.entails(&a);
    let first = atoms
        .iter()
        .find(|a| {
            if start_inside {
                a.3 && holds(PureAtom::lt(a.1.clone(), bt.clone())) && holds(PureAtom::lt(bt.clone(), a.2.clone()))
            } else {
                holds(PureAtom::eq(a.1.clone(), bt.clone()))
            }
        })
        .ok_or_else(|| "no atom starts the freed block as the rule requires".to_string())?;
    let mut chain = vec![first.clone()];
    loop {
        let cur = chain.last().unwrap();
        let done = if end_inside {
            cur.3 && holds(PureAtom::lt(cur.1.clone(), et.clone())) && holds(PureAtom::lt(et.clone(), cur.2.clone()))
        } else {
            holds(PureAtom::eq(et.clone(), cur.2.clone()))
        };
        if done {
            break;
        }
        let next = atoms.iter().find(|a| {
            !chain.iter().any(|c| c.0 == a.0)
                && holds(PureAtom::eq(cur.2.clone(), a.1.clone()))
                && holds(PureAtom::lt(cur.1.clone(), a.1.clone()))
        });
        match next {
            Some(a) => chain.push(a.clone()),
            None => return Err("no contiguous chain of atoms covers the freed block".into()),
        }
    }
    if let Some(x) = expect_false_er(c) {
        return x;
    }
    let avoid = heap_vars(psi);
    let (y, body) = fresh_binder(&c.post, &avoid)?;
    let yv = Term::Var(y);
    let idx: Vec<usize> = chain.iter().map(|a| a.0).collect();
    let mut sp = Vec::new();
    if start_inside {
        sp.push(SpatialAtom::Arr(chain[0].1.clone(), t.clone()));
    }
    sp.push(SpatialAtom::NegArr(t.clone(), yv.clone()));
    if end_inside {
        sp.push(SpatialAtom::Arr(yv.clone(), chain.last().unwrap().2.clone()));
    }
    sp.extend(without(psi, &idx));
    let pre_tau = SymbolicHeap::new(sp, psi.pure().to_vec());
    let terms = heap_term_set(psi);
    let tb: TermSet = terms.iter().filter(|s| matches!(s, Term::Base(_)) && holds(PureAtom::eq((*s).clone(), bt.clone()))).cloned().collect();
    let te: TermSet = terms.iter().filter(|s| matches!(s, Term::End(_)) && holds(PureAtom::eq((*s).clone(), et.clone()))).cloned().collect();
    let want = replace_terms(&pre_tau, &tb, t).and_then(|h| replace_terms(&h, &te, &yv)).map_err(|e| e.to_string())?;
    ensure(normalise(&want) == normalise(&body), || "post does not match the schema".into())
}

fn load(r: Rule, psi: &SymbolicHeap, solver: &PureSolver, c: &Triple) -> Check {
    let Command::Load(x, t) = &c.prog else { return Err("command is not a load".into()) };
    let holds = |a: PureAtom| solver.entails(&a);
    let row = psi.spatial().iter().enumerate().find_map(|(i, a)| match (a, r) {
        (SpatialAtom::PointsTo(ta, u), Rule::LoadPtr) if holds(PureAtom::eq(ta.clone(), t.clone())) => {
            Some((i, ta.clone(), u.clone()))
        }
        (SpatialAtom::Arr(ta, ta1), Rule::LoadArr | Rule::LoadArrLiteral)
            if holds(PureAtom::le(ta.clone(), t.clone())) && holds(PureAtom::lt(t.clone(), ta1.clone())) =>
        {
            Some((i, ta.clone(), ta1.clone()))
        }
        _ => None,
    });
    let (i, ta, other) = row.ok_or_else(|| "no atom covers the loaded cell as the rule requires".to_string())?;
    if let Some(x) = expect_false_er(c) {
        return x;
    }
    let mut avoid = heap_vars(psi);
    avoid.insert(x.clone());
    avoid.extend(vars_of(&crate::syntax::term_set(t)));
    let v1 = match c.post.disjuncts.first() {
        Some(d) if d.bound.len() == 1 => Term::Var(d.bound[0].clone()),
        _ => return Err("post must bind the old value of the target".into()),
    };
    let x1 = match &v1 {
        Term::Var(v) => v.clone(),
        _ => unreachable!(),
    };
    ensure(!avoid.contains(&x1), || format!("binder {x1} is not fresh"))?;
    let th = |h: &SymbolicHeap| subst_heap(h, x, &v1);
    let want = match r {
        Rule::LoadPtr => Assertion::from_disjuncts(vec![Disjunct::new(
            vec![x1],
            th(psi).with_pure([PureAtom::eq(Term::Var(x.clone()), subst_term(&other, x, &v1))]),
        )]),
        Rule::LoadArrLiteral => Assertion::from_disjuncts(vec![Disjunct::new(vec![x1], th(psi))]),
        _ => {
            // The loaded cell is split out of the array and holds the new value.
            let rest = SymbolicHeap::new(without(psi, &[i]), psi.pure().to_vec());
            let left = if holds(PureAtom::eq(ta.clone(), t.clone())) {
                vec![]
            } else {
                entailed(solver, PureAtom::lt(ta.clone(), t.clone()))?;
                vec![SpatialAtom::Arr(ta.clone(), t.clone())]
            };
            let t1 = t.clone().plus(1);
            let rights = [
                (vec![], vec![PureAtom::eq(t1.clone(), other.clone())]),
                (vec![SpatialAtom::Arr(t1.clone(), other.clone())], vec![]),
            ];
            let cell = SpatialAtom::PointsTo(subst_term(t, x, &v1), Term::Var(x.clone()));
            let mut ds = Vec::new();
            for (sp, pu) in rights {
                let pre = rest.clone().with_spatial(left.clone()).with_spatial(sp).with_pure(pu);
                let body = th(&pre).with_spatial([cell.clone()]);
                if PureSolver::for_heap(&body).is_sat() {
                    ds.push(Disjunct::new(vec![x1.clone()], body));
                }
            }
            Assertion::from_disjuncts(ds)
        }
    };
    ensure(same(&want, &c.post), || "post does not match the schema".into())
}

fn store(r: Rule, psi: &SymbolicHeap, solver: &PureSolver, c: &Triple) -> Check {
    let Command::Store(t, v) = &c.prog else { return Err("command is not a store".into()) };
    let holds = |a: PureAtom| solver.entails(&a);
    let t1 = t.clone().plus(1);
    let cell = SpatialAtom::PointsTo(t.clone(), v.clone());
    for (i, a) in psi.spatial().iter().enumerate() {
        let sp = match (a, r) {
            (SpatialAtom::PointsTo(ta, _), Rule::StorePtr) if holds(PureAtom::eq(ta.clone(), t.clone())) => vec![cell.clone()],
            (SpatialAtom::Arr(ta, ta1), Rule::StoreArr(1)) if holds(PureAtom::eq(ta.clone(), t.clone())) => {
                vec![cell.clone(), SpatialAtom::Arr(t1.clone(), ta1.clone())]
            }
            (SpatialAtom::Arr(ta, ta1), Rule::StoreArr(2))
                if holds(PureAtom::lt(ta.clone(), t.clone())) && holds(PureAtom::lt(t1.clone(), ta1.clone())) =>
            {
                vec![SpatialAtom::Arr(ta.clone(), t.clone()), cell.clone(), SpatialAtom::Arr(t1.clone(), ta1.clone())]
            }
            (SpatialAtom::Arr(ta, ta1), Rule::StoreArr(3)) if holds(PureAtom::eq(t1.clone(), ta1.clone())) => {
                vec![SpatialAtom::Arr(ta.clone(), t.clone()), cell.clone()]
            }
            (SpatialAtom::Arr(ta, ta1), Rule::StoreArrSingle)
                if holds(PureAtom::eq(ta.clone(), t.clone())) && holds(PureAtom::eq(t1.clone(), ta1.clone())) =>
            {
                vec![cell.clone()]
            }
            _ => continue,
        };
        if let Some(x) = expect_false_er(c) {
            return x;
        }
        let want = Assertion::single(SymbolicHeap::new(without(psi, &[i]), psi.pure().to_vec()).with_spatial(sp));
        return ensure(same(&want, &c.post), || "post does not match the schema".into());
    }
    Err("no atom satisfies the rule's position condition".into())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_assertion;

    #[test]
    fn names_normalise() {
        assert_eq!(lookup("Loop zero"), Some(Rule::LoopZero));
        assert_eq!(lookup("frame-ok"), Some(Rule::FrameOk));
        assert_eq!(lookup("Alloc 3"), Some(Rule::Alloc(3)));
        assert_eq!(lookup("FreeArr 4"), Some(Rule::FreeArr(4)));
        assert_eq!(lookup("Frame-Er"), None);
    }

    #[test]
    fn alpha_equivalence() {
        let a = parse_assertion("exists a. x |-> a * a == 1").unwrap();
        let b = parse_assertion("exists b. x |-> b * emp * b == 1").unwrap();
        let c = parse_assertion("exists b. x |-> b * b == 2").unwrap();
        assert!(same(&a, &b));
        assert!(!same(&a, &c));
    }
}
