//! Satisfiability of pure formulas over the naturals, with the block
//! functions `b` and `e` constrained to come from some set of disjoint
//! blocks. Each argument `r` of a block function is either outside every
//! block (`b(r) = e(r) = 0`) or inside one (`1 <= b(r) <= r < e(r)`), and any
//! two such blocks coincide or are disjoint. Those axioms are decided by
//! case splitting over the linear core.

use std::collections::HashMap;

use crate::syntax::{Ident, PureAtom, PureOp, SpatialAtom, SymbolicHeap, Term};

use super::dbm::{edges, Dbm, Edge};
use super::linear::{feasible, LinExpr, Lit};

/// Budget of search nodes per satisfiability query; when exhausted the
/// query reports "possibly satisfiable".
const NODE_LIMIT: usize = 20_000;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum Key {
    Var(Ident),
    Base(LinExpr),
    End(LinExpr),
}

#[derive(Clone, Debug)]
struct BlockPair {
    arg: LinExpr,
    base: u32,
    end: u32,
}

/// A conjunction of linear literals plus disjunctive side conditions, over
/// an interned set of unknowns.
#[derive(Clone, Debug, Default)]
pub struct Problem {
    keys: Vec<Key>,
    index: HashMap<Key, u32>,
    pairs: Vec<BlockPair>,
    lits: Vec<Lit>,
    /// Each entry is a disjunction of conjunctions.
    splits: Vec<Vec<Vec<Lit>>>,
}

impl Problem {
    pub fn new() -> Self {
        Problem::default()
    }

    fn intern(&mut self, k: Key) -> u32 {
        if let Some(&i) = self.index.get(&k) {
            return i;
        }
        let i = self.keys.len() as u32;
        self.keys.push(k.clone());
        self.index.insert(k, i);
        i
    }

    fn pair(&mut self, arg: LinExpr) -> usize {
        if let Some(p) = self.pairs.iter().position(|p| p.arg == arg) {
            return p;
        }
        let base = self.intern(Key::Base(arg.clone()));
        let end = self.intern(Key::End(arg.clone()));
        self.pairs.push(BlockPair { arg, base, end });
        self.pairs.len() - 1
    }

    pub fn lin(&mut self, t: &Term) -> LinExpr {
        match t {
            Term::Null => LinExpr::constant(0),
            Term::Nat(n) => LinExpr::constant(*n as i64),
            Term::Var(x) => LinExpr::var(self.intern(Key::Var(x.clone()))),
            Term::Add(l, r) => {
                let a = self.lin(l);
                let b = self.lin(r);
                a.add(&b)
            }
            Term::Base(a) => {
                let arg = self.lin(a);
                let p = self.pair(arg);
                LinExpr::var(self.pairs[p].base)
            }
            Term::End(a) => {
                let arg = self.lin(a);
                let p = self.pair(arg);
                LinExpr::var(self.pairs[p].end)
            }
        }
    }

    /// Whether the block pair of `t`'s argument already exists.
    fn has_pair_for(&mut self, t: &Term) -> Option<usize> {
        let mut probe = self.clone();
        let arg = probe.lin(t);
        if probe.keys.len() != self.keys.len() {
            return None;
        }
        self.pairs.iter().position(|p| p.arg == arg)
    }

    pub fn add_atom(&mut self, a: &PureAtom) {
        let l = self.lin(&a.lhs);
        let r = self.lin(&a.rhs);
        match a.op {
            PureOp::Eq => self.lits.push(Lit::eq(&l, &r)),
            PureOp::Le => self.lits.push(Lit::le(&l, &r)),
            PureOp::Lt => self.lits.push(Lit::lt(&l, &r)),
            PureOp::Ne => self.splits.push(vec![vec![Lit::lt(&l, &r)], vec![Lit::lt(&r, &l)]]),
        }
    }

    /// Adds the negation of an atom.
    pub fn add_negated(&mut self, a: &PureAtom) {
        let l = self.lin(&a.lhs);
        let r = self.lin(&a.rhs);
        match a.op {
            PureOp::Eq => self.splits.push(vec![vec![Lit::lt(&l, &r)], vec![Lit::lt(&r, &l)]]),
            PureOp::Ne => self.lits.push(Lit::eq(&l, &r)),
            PureOp::Le => self.lits.push(Lit::lt(&r, &l)),
            PureOp::Lt => self.lits.push(Lit::le(&r, &l)),
        }
    }

    /// Adds `¬a₁ ∧ … ∧ ¬aₙ`, the negation of a disjunction.
    pub fn add_negated_disjunction(&mut self, atoms: &[PureAtom]) {
        for a in atoms {
            self.add_negated(a);
        }
    }

    /// Adds `a₁ ∨ … ∨ aₙ` where each `aᵢ` is a conjunction.
    pub fn add_disjunction(&mut self, alts: &[Vec<PureAtom>]) {
        let mut split = Vec::new();
        for conj in alts {
            let mut lits = Vec::new();
            let mut extra_splits = false;
            for a in conj {
                let l = self.lin(&a.lhs);
                let r = self.lin(&a.rhs);
                match a.op {
                    PureOp::Eq => lits.push(Lit::eq(&l, &r)),
                    PureOp::Le => lits.push(Lit::le(&l, &r)),
                    PureOp::Lt => lits.push(Lit::lt(&l, &r)),
                    PureOp::Ne => extra_splits = true,
                }
            }
            if extra_splits {
                // Disequalities inside a disjunct are rare; drop the whole
                // disjunction to stay sound for unsatisfiability.
                return;
            }
            split.push(lits);
        }
        self.splits.push(split);
    }

    /// Facts implied by the spatial atoms of a symbolic heap: footprints are
    /// non-empty, start above 0 and are pairwise disjoint, and when a block
    /// function of a start address is already mentioned its value is
    /// constrained accordingly.
    pub fn add_spatial_facts(&mut self, psi: &SymbolicHeap) {
        let mut feet: Vec<(LinExpr, LinExpr)> = Vec::new();
        let one = LinExpr::constant(1);
        let zero = LinExpr::constant(0);
        for a in psi.spatial() {
            let (start, stop, alloc) = match a {
                SpatialAtom::Emp => continue,
                SpatialAtom::PointsTo(l, _) => {
                    let s = self.lin(l);
                    (l, s.plus(1), true)
                }
                SpatialAtom::Arr(l, r) => (l, self.lin(r), true),
                SpatialAtom::NegArr(l, r) => (l, self.lin(r), false),
            };
            let s = self.lin(start);
            self.lits.push(Lit::le(&one, &s));
            self.lits.push(Lit::lt(&s, &stop));
            if let Some(p) = self.has_pair_for(start) {
                let b = LinExpr::var(self.pairs[p].base);
                if alloc {
                    self.lits.push(Lit::le(&one, &b));
                } else {
                    self.lits.push(Lit::eq(&b, &zero));
                }
            }
            feet.push((s, stop));
        }
        for i in 0..feet.len() {
            for j in i + 1..feet.len() {
                let (a, b) = (&feet[i], &feet[j]);
                self.splits.push(vec![vec![Lit::le(&a.1, &b.0)], vec![Lit::le(&b.1, &a.0)]]);
            }
        }
    }

    /// Upper bounds `m[a][b] >= t_b - t_a` implied by the difference
    /// literals alone, ignoring disjunctive facts. `None` marks a pair
    /// without a derived bound. Only necessary conditions can be read off.
    pub fn difference_bounds(&self, terms: &[Term]) -> Vec<Vec<Option<i64>>> {
        let mut p = self.clone();
        let nodes: Vec<Option<(usize, i64)>> = terms
            .iter()
            .map(|t| {
                let e = p.lin(t);
                match e.coeffs.iter().collect::<Vec<_>>()[..] {
                    [] => Some((usize::MAX, e.constant)),
                    [(&v, &1)] => Some((v as usize, e.constant)),
                    _ => None,
                }
            })
            .collect();
        let mut m = Dbm::new(p.keys.len());
        let zero = m.zero();
        for l in &p.lits {
            for e in edges(l, zero).unwrap_or_default() {
                if !m.add(&e) {
                    return vec![vec![None; terms.len()]; terms.len()];
                }
            }
        }
        let node = |x: usize| if x == usize::MAX { zero } else { x };
        let mut out = vec![vec![None; terms.len()]; terms.len()];
        for (a, na) in nodes.iter().enumerate() {
            for (b, nb) in nodes.iter().enumerate() {
                if let (Some((va, ca)), Some((vb, cb))) = (na, nb) {
                    out[a][b] = m.bound(node(*va), node(*vb)).map(|w| w + cb - ca);
                }
            }
        }
        out
    }

    /// Interns the unknowns of `terms`, including their block pairs, so that
    /// atoms over them can later be compiled without changing the problem.
    pub fn intern_terms(&mut self, terms: &[Term]) {
        for t in terms {
            self.lin(t);
        }
    }

    fn lookup(&self, t: &Term) -> Option<LinExpr> {
        Some(match t {
            Term::Null => LinExpr::constant(0),
            Term::Nat(n) => LinExpr::constant(*n as i64),
            Term::Var(x) => LinExpr::var(*self.index.get(&Key::Var(x.clone()))?),
            Term::Add(l, r) => self.lookup(l)?.add(&self.lookup(r)?),
            Term::Base(a) => LinExpr::var(*self.index.get(&Key::Base(self.lookup(a)?))?),
            Term::End(a) => LinExpr::var(*self.index.get(&Key::End(self.lookup(a)?))?),
        })
    }

    /// The problem as a difference-bound matrix plus compiled choice points,
    /// when every literal is a difference constraint.
    pub fn compile(&self) -> Option<Compiled> {
        let mut m = Dbm::new(self.keys.len());
        let zero = m.zero();
        let mut choices = Vec::new();
        for c in self.choice_points() {
            let mut v = Vec::with_capacity(c.len());
            for alt in c {
                let mut es = Vec::new();
                for l in &alt {
                    es.extend(edges(l, zero)?);
                }
                v.push(es);
            }
            choices.push(v);
        }
        let mut base = Vec::new();
        for l in &self.lits {
            base.extend(edges(l, zero)?);
        }
        let consistent = m.add_all(&base);
        Some(Compiled { m, consistent, choices: std::rc::Rc::new(choices), zero })
    }

    /// Edges of a conjunction of non-disequality atoms over interned terms.
    fn atom_edges(&self, atoms: &[PureAtom], zero: usize) -> Option<Vec<Edge>> {
        let mut out = Vec::new();
        for a in atoms {
            let l = self.lookup(&a.lhs)?;
            let r = self.lookup(&a.rhs)?;
            let lit = match a.op {
                PureOp::Eq => Lit::eq(&l, &r),
                PureOp::Le => Lit::le(&l, &r),
                PureOp::Lt => Lit::lt(&l, &r),
                PureOp::Ne => return None,
            };
            out.extend(edges(&lit, zero)?);
        }
        Some(out)
    }

    pub fn is_sat(&self) -> bool {
        let mut nodes = 0usize;
        let choices = self.choice_points();
        if let Some(r) = difference_sat(self.keys.len(), &self.lits, &choices) {
            return r;
        }
        let mut lits = self.lits.clone();
        search(self.keys.len() as u32, &mut lits, &choices, &mut nodes)
    }

    /// The disjunctive splits followed by the block axioms, as a list of
    /// choice points.
    fn choice_points(&self) -> Vec<Vec<Vec<Lit>>> {
        let mut out = self.splits.clone();
        let zero = LinExpr::constant(0);
        let one = LinExpr::constant(1);
        for p in &self.pairs {
            let b = LinExpr::var(p.base);
            let e = LinExpr::var(p.end);
            out.push(vec![
                vec![Lit::le(&one, &b), Lit::le(&b, &p.arg), Lit::lt(&p.arg, &e)],
                vec![Lit::eq(&b, &zero), Lit::eq(&e, &zero)],
            ]);
        }
        for i in 0..self.pairs.len() {
            for j in i + 1..self.pairs.len() {
                let (p, q) = (&self.pairs[i], &self.pairs[j]);
                let (bp, ep) = (LinExpr::var(p.base), LinExpr::var(p.end));
                let (bq, eq) = (LinExpr::var(q.base), LinExpr::var(q.end));
                out.push(vec![
                    // Both outside every block.
                    vec![Lit::eq(&bp, &zero), Lit::eq(&bq, &zero)],
                    // Same block.
                    vec![Lit::le(&one, &bp), Lit::eq(&bp, &bq), Lit::eq(&ep, &eq)],
                    // Disjoint blocks.
                    vec![Lit::le(&one, &bp), Lit::le(&one, &bq), Lit::le(&ep, &bq)],
                    vec![Lit::le(&one, &bp), Lit::le(&one, &bq), Lit::le(&eq, &bp)],
                    // One outside, the other's argument not in its block.
                    vec![Lit::eq(&bp, &zero), Lit::le(&one, &bq), Lit::lt(&p.arg, &bq)],
                    vec![Lit::eq(&bp, &zero), Lit::le(&one, &bq), Lit::le(&eq, &p.arg)],
                    vec![Lit::eq(&bq, &zero), Lit::le(&one, &bp), Lit::lt(&q.arg, &bp)],
                    vec![Lit::eq(&bq, &zero), Lit::le(&one, &bp), Lit::le(&ep, &q.arg)],
                ]);
            }
        }
        out
    }
}

/// A compiled [`Problem`] that can be strengthened incrementally.
#[derive(Clone, Debug)]
pub struct Compiled {
    m: Dbm,
    consistent: bool,
    choices: std::rc::Rc<Vec<Vec<Vec<Edge>>>>,
    zero: usize,
}

impl Compiled {
    pub fn is_sat(&self) -> bool {
        let mut nodes = 0;
        self.consistent && dbm_search(self.m.clone(), &self.choices, (0..self.choices.len()).collect(), &mut nodes)
    }

    /// `self ∧ atoms`, where `hyp` is the problem this was compiled from and
    /// the atoms only mention its interned terms. `None` if they cannot be
    /// compiled.
    pub fn with(&self, hyp: &Problem, atoms: &[PureAtom]) -> Option<Compiled> {
        let es = hyp.atom_edges(atoms, self.zero)?;
        let mut next = self.clone();
        next.consistent = next.consistent && next.m.add_all(&es);
        Some(next)
    }
}

/// Exact satisfiability when every literal is a difference constraint, by
/// case search over a closed difference-bound matrix. `None` otherwise.
fn difference_sat(nvars: usize, lits: &[Lit], choices: &[Vec<Vec<Lit>>]) -> Option<bool> {
    let mut m = Dbm::new(nvars);
    let zero = m.zero();
    let mut base = Vec::new();
    for l in lits {
        base.extend(edges(l, zero)?);
    }
    let mut alts: Vec<Vec<Vec<Edge>>> = Vec::with_capacity(choices.len());
    for c in choices {
        let mut v = Vec::with_capacity(c.len());
        for alt in c {
            let mut es = Vec::new();
            for l in alt {
                es.extend(edges(l, zero)?);
            }
            v.push(es);
        }
        alts.push(v);
    }
    if !m.add_all(&base) {
        return Some(false);
    }
    let mut nodes = 0;
    Some(dbm_search(m, &alts, (0..alts.len()).collect(), &mut nodes))
}

fn dbm_search(mut m: Dbm, choices: &[Vec<Vec<Edge>>], mut open: Vec<usize>, nodes: &mut usize) -> bool {
    *nodes += 1;
    if *nodes > NODE_LIMIT {
        return true;
    }
    let viable = |m: &Dbm, alt: &[Edge]| !alt.iter().any(|e| m.refutes(e));
    loop {
        let mut changed = false;
        let mut k = 0;
        while k < open.len() {
            let c = open[k];
            let mut live = choices[c].iter().filter(|a| viable(&m, a));
            match (live.next(), live.next()) {
                (None, _) => return false,
                (Some(only), None) => {
                    if !m.add_all(only) {
                        return false;
                    }
                    open.swap_remove(k);
                    changed = true;
                }
                _ => k += 1,
            }
        }
        if !changed {
            break;
        }
    }
    let Some(pos) = (0..open.len()).min_by_key(|&k| choices[open[k]].iter().filter(|a| viable(&m, a)).count()) else {
        return true;
    };
    let c = open.swap_remove(pos);
    for alt in choices[c].iter().filter(|a| viable(&m, a)) {
        let mut next = m.clone();
        if next.add_all(alt) && dbm_search(next, choices, open.clone(), nodes) {
            return true;
        }
    }
    false
}

/// Case search over the choice points. Alternatives that contradict the
/// literals so far are pruned, forced choices are committed, and the search
/// branches on the choice with the fewest remaining alternatives.
fn search(n: u32, lits: &mut Vec<Lit>, choices: &[Vec<Vec<Lit>>], nodes: &mut usize) -> bool {
    let open: Vec<usize> = (0..choices.len()).collect();
    let mut alive: Vec<Vec<usize>> = choices.iter().map(|c| (0..c.len()).collect()).collect();
    dpll(n, lits, choices, open, &mut alive, nodes)
}

fn dpll(
    n: u32,
    lits: &mut Vec<Lit>,
    choices: &[Vec<Vec<Lit>>],
    mut open: Vec<usize>,
    alive: &mut Vec<Vec<usize>>,
    nodes: &mut usize,
) -> bool {
    *nodes += 1;
    if *nodes > NODE_LIMIT {
        return true;
    }
    if !feasible(n, lits) {
        return false;
    }
    let base = lits.len();
    let saved = alive.clone();
    let result = loop {
        let mut committed = false;
        let mut dead = false;
        let mut k = 0;
        while k < open.len() {
            let c = open[k];
            alive[c].retain(|&a| {
                let len = lits.len();
                lits.extend(choices[c][a].iter().cloned());
                let ok = feasible(n, lits);
                lits.truncate(len);
                ok
            });
            match alive[c].len() {
                0 => {
                    dead = true;
                    break;
                }
                1 => {
                    lits.extend(choices[c][alive[c][0]].iter().cloned());
                    open.swap_remove(k);
                    committed = true;
                }
                _ => k += 1,
            }
        }
        if dead {
            break false;
        }
        if committed {
            if !feasible(n, lits) {
                break false;
            }
            continue;
        }
        let Some(pos) = (0..open.len()).min_by_key(|&k| alive[open[k]].len()) else {
            break true;
        };
        let c = open.swap_remove(pos);
        let alts = alive[c].clone();
        let mut found = false;
        for a in alts {
            let len = lits.len();
            lits.extend(choices[c][a].iter().cloned());
            let ok = dpll(n, lits, choices, open.clone(), alive, nodes);
            lits.truncate(len);
            if ok {
                found = true;
                break;
            }
        }
        break found;
    };
    lits.truncate(base);
    *alive = saved;
    result
}

/// Entailment queries against a fixed hypothesis.
#[derive(Clone, Debug)]
pub struct PureSolver {
    hyp: Problem,
    sat: std::cell::OnceCell<bool>,
}

impl PureSolver {
    pub fn new(atoms: &[PureAtom]) -> Self {
        let mut hyp = Problem::new();
        for a in atoms {
            hyp.add_atom(a);
        }
        PureSolver { hyp, sat: std::cell::OnceCell::new() }
    }

    /// Hypothesis made of the pure part of `psi` plus the facts implied by
    /// its spatial part.
    pub fn for_heap(psi: &SymbolicHeap) -> Self {
        let mut s = PureSolver::new(psi.pure());
        s.hyp.add_spatial_facts(psi);
        s
    }

    pub fn is_sat(&self) -> bool {
        *self.sat.get_or_init(|| self.hyp.is_sat())
    }

    pub fn sat_with(&self, extra: &[PureAtom]) -> bool {
        if !self.is_sat() {
            return false;
        }
        let mut p = self.hyp.clone();
        for a in extra {
            p.add_atom(a);
        }
        p.is_sat()
    }

    /// Proven entailment of a single atom.
    pub fn entails(&self, a: &PureAtom) -> bool {
        if !self.is_sat() {
            return true;
        }
        let mut p = self.hyp.clone();
        p.add_negated(a);
        !p.is_sat()
    }

    pub fn entails_all(&self, atoms: &[PureAtom]) -> bool {
        atoms.iter().all(|a| self.entails(a))
    }

    /// Proven entailment of the disjunction of `atoms`.
    pub fn entails_any(&self, atoms: &[PureAtom]) -> bool {
        if !self.is_sat() {
            return true;
        }
        let mut p = self.hyp.clone();
        p.add_negated_disjunction(atoms);
        !p.is_sat()
    }
}
