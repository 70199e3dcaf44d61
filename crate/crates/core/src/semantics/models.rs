//! Enumeration of the models of an assertion inside a universe, and
//! membership of a single state.

use std::collections::HashSet;

use crate::error::Result;
use crate::par;
use crate::syntax::{Assertion, Disjunct, PureOp, SpatialAtom};

use super::eval::{CAtom, CTerm, SlotMap};
use super::state::{
    all_block_sets, Block, BlockLookup, ConcreteState, Layout, PState, PView, Universe,
    BOT,
};

/// Which states count: every well-formed state, or only exact ones.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Scope {
    Exact,
    All,
}

#[derive(Clone, Debug)]
enum CSpatial {
    Emp,
    Pts(CTerm, CTerm),
    Arr(CTerm, CTerm),
    Neg(CTerm, CTerm),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Kind {
    Val(u64),
    Any,
    Bot,
}

#[derive(Clone, Debug, Default)]
struct Plan {
    order: Vec<usize>,
    initial: Vec<usize>,
    checks: Vec<Vec<usize>>,
    determined: Vec<Option<(usize, bool)>>,
}

impl Plan {
    fn build(atoms: &[CAtom], order: Vec<usize>, pre: &[usize]) -> Plan {
        let mut assigned: Vec<usize> = pre.to_vec();
        let mut done = vec![false; atoms.len()];
        let ready = |assigned: &[usize], a: &CAtom| a.slots().iter().all(|s| assigned.contains(s));
        let mut initial = Vec::new();
        for (i, a) in atoms.iter().enumerate() {
            if ready(&assigned, a) {
                initial.push(i);
                done[i] = true;
            }
        }
        let mut checks = Vec::new();
        let mut determined = Vec::new();
        for &s in &order {
            let det = atoms.iter().enumerate().find_map(|(i, a)| {
                if a.op != PureOp::Eq {
                    return None;
                }
                let other_ready = |t: &CTerm| {
                    let mut v = Vec::new();
                    t.slots(&mut v);
                    v.iter().all(|x| assigned.contains(x))
                };
                match (&a.l, &a.r) {
                    (CTerm::Slot(x), r) if *x == s && other_ready(r) => Some((i, true)),
                    (l, CTerm::Slot(x)) if *x == s && other_ready(l) => Some((i, false)),
                    _ => None,
                }
            });
            determined.push(det);
            assigned.push(s);
            let mut here = Vec::new();
            for (i, a) in atoms.iter().enumerate() {
                if !done[i] && ready(&assigned, a) {
                    here.push(i);
                    done[i] = true;
                }
            }
            checks.push(here);
        }
        Plan { order, initial, checks, determined }
    }
}

/// A disjunct compiled against a universe.
#[derive(Clone, Debug)]
pub(crate) struct CDisjunct {
    nslots: usize,
    fixed: usize,
    plain: Vec<CAtom>,
    block_atoms: Vec<CAtom>,
    spatial: Vec<CSpatial>,
    spatial_block: bool,
    unmentioned_fixed: Vec<usize>,
    gen: Plan,
    member: Plan,
}

impl CDisjunct {
    pub fn compile(d: &Disjunct, u: &Universe) -> Result<CDisjunct> {
        let mut sm = SlotMap::new(&u.vars);
        for b in &d.bound {
            sm.push(b);
        }
        let mut plain = Vec::new();
        let mut block_atoms = Vec::new();
        for a in d.body.pure() {
            let c = sm.atom(a)?;
            if c.has_block() {
                block_atoms.push(c);
            } else {
                plain.push(c);
            }
        }
        let mut spatial = Vec::new();
        let mut spatial_block = false;
        for a in d.body.spatial() {
            let c = match a {
                SpatialAtom::Emp => CSpatial::Emp,
                SpatialAtom::PointsTo(l, v) => CSpatial::Pts(sm.term(l)?, sm.term(v)?),
                SpatialAtom::Arr(l, r) => CSpatial::Arr(sm.term(l)?, sm.term(r)?),
                SpatialAtom::NegArr(l, r) => CSpatial::Neg(sm.term(l)?, sm.term(r)?),
            };
            if let CSpatial::Pts(a, b) | CSpatial::Arr(a, b) | CSpatial::Neg(a, b) = &c {
                spatial_block |= a.has_block() || b.has_block();
            }
            spatial.push(c);
        }
        let nslots = sm.names.len();
        let fixed = sm.fixed;

        // Enumeration order: slots of small plain atoms first, then spatial,
        // then the rest of the mentioned slots.
        let mut order: Vec<usize> = Vec::new();
        let mut by_size: Vec<&CAtom> = plain.iter().collect();
        by_size.sort_by_key(|a| a.slots().len());
        for a in by_size {
            for s in a.slots() {
                if !order.contains(&s) {
                    order.push(s);
                }
            }
        }
        let mut rest = Vec::new();
        for c in &spatial {
            if let CSpatial::Pts(a, b) | CSpatial::Arr(a, b) | CSpatial::Neg(a, b) = c {
                a.slots(&mut rest);
                b.slots(&mut rest);
            }
        }
        for a in &block_atoms {
            rest.extend(a.slots());
        }
        for s in rest {
            if !order.contains(&s) {
                order.push(s);
            }
        }
        let unmentioned_fixed = (0..fixed).filter(|s| !order.contains(s)).collect();
        let member_order: Vec<usize> = order.iter().copied().filter(|&s| s >= fixed).collect();
        let pre: Vec<usize> = (0..fixed).collect();
        Ok(CDisjunct {
            nslots,
            fixed,
            gen: Plan::build(&plain, order, &[]),
            member: Plan::build(&plain, member_order, &pre),
            plain,
            block_atoms,
            spatial,
            spatial_block,
            unmentioned_fixed,
        })
    }

    fn search(
        &self,
        plan: &Plan,
        slots: &mut Vec<u64>,
        vmax: u64,
        leaf: &mut dyn FnMut(&mut Vec<u64>) -> bool,
    ) -> bool {
        if !plan.initial.iter().all(|&i| self.plain[i].holds(slots, &NoB)) {
            return true;
        }
        self.search_at(plan, 0, slots, vmax, leaf)
    }

    fn search_at(
        &self,
        plan: &Plan,
        depth: usize,
        slots: &mut Vec<u64>,
        vmax: u64,
        leaf: &mut dyn FnMut(&mut Vec<u64>) -> bool,
    ) -> bool {
        if depth == plan.order.len() {
            return leaf(slots);
        }
        let s = plan.order[depth];
        let (lo, hi) = match plan.determined[depth] {
            Some((i, slot_left)) => {
                let a = &self.plain[i];
                let v = if slot_left { a.r.eval_plain(slots) } else { a.l.eval_plain(slots) };
                if v > vmax {
                    return true;
                }
                (v, v)
            }
            None => (0, vmax),
        };
        for v in lo..=hi {
            slots[s] = v;
            if plan.checks[depth].iter().all(|&i| self.plain[i].holds(slots, &NoB))
                && !self.search_at(plan, depth + 1, slots, vmax, leaf)
            {
                return false;
            }
        }
        true
    }

    /// Footprint of the spatial part, or `None` if it is not a valid
    /// separating split.
    fn footprint<B: BlockLookup + ?Sized>(&self, slots: &[u64], blocks: &B, vmax: u64) -> Option<Vec<(u64, Kind)>> {
        let mut cells: Vec<(u64, Kind)> = Vec::new();
        for c in &self.spatial {
            match c {
                CSpatial::Emp => {}
                CSpatial::Pts(a, v) => {
                    let l = a.eval(slots, blocks);
                    let v = v.eval(slots, blocks);
                    if l == 0 || l >= vmax || v > vmax {
                        return None;
                    }
                    cells.push((l, Kind::Val(v)));
                }
                CSpatial::Arr(a, b) | CSpatial::Neg(a, b) => {
                    let lo = a.eval(slots, blocks);
                    let hi = b.eval(slots, blocks);
                    if lo == 0 || lo >= hi || hi > vmax {
                        return None;
                    }
                    let k = if matches!(c, CSpatial::Arr(..)) { Kind::Any } else { Kind::Bot };
                    cells.extend((lo..hi).map(|l| (l, k)));
                }
            }
        }
        cells.sort_by_key(|c| c.0);
        if cells.windows(2).any(|w| w[0].0 == w[1].0) {
            return None;
        }
        Some(cells)
    }

    fn block_atoms_hold<B: BlockLookup + ?Sized>(&self, slots: &[u64], blocks: &B) -> bool {
        self.block_atoms.iter().all(|a| a.holds(slots, blocks))
    }

    /// Calls `sink` on every model. Returns false if the sink stopped early.
    pub fn for_each_model(
        &self,
        u: &Universe,
        scope: Scope,
        block_sets: &[Vec<Block>],
        expand: bool,
        sink: &mut dyn FnMut(PState) -> bool,
    ) -> bool {
        let layout = u.layout();
        let vmax = u.vmax;
        let mut slots = vec![0u64; self.nslots];
        let plan = &self.gen;
        let mut leaf = |slots: &mut Vec<u64>| -> bool {
            if !self.spatial_block {
                let Some(cells) = self.footprint(slots, &NoB, vmax) else { return true };
                if cells.len() > u.heap_cap {
                    return true;
                }
                match scope {
                    Scope::Exact => {
                        let pos: Vec<u64> =
                            cells.iter().filter(|c| c.1 != Kind::Bot).map(|c| c.0).collect();
                        if pos.last().is_some_and(|&l| l >= vmax) {
                            return true;
                        }
                        let mut cont = true;
                        partitions(&pos, &mut Vec::new(), &mut |bs| {
                            if self.block_atoms_hold(slots, bs) {
                                cont = self.emit(u, layout, slots, &cells, bs, expand, sink);
                            }
                            cont
                        });
                        cont
                    }
                    Scope::All => {
                        for bs in block_sets {
                            if covers(bs, &cells) && self.block_atoms_hold(slots, bs.as_slice())
                                && !self.emit(u, layout, slots, &cells, bs, expand, sink)
                            {
                                return false;
                            }
                        }
                        true
                    }
                }
            } else {
                for bs in block_sets {
                    let Some(cells) = self.footprint(slots, bs.as_slice(), vmax) else { continue };
                    if cells.len() > u.heap_cap {
                        continue;
                    }
                    let ok = match scope {
                        Scope::Exact => exactly_covers(bs, &cells),
                        Scope::All => covers(bs, &cells),
                    };
                    if ok
                        && self.block_atoms_hold(slots, bs.as_slice())
                        && !self.emit(u, layout, slots, &cells, bs, expand, sink)
                    {
                        return false;
                    }
                }
                true
            }
        };
        self.search(plan, &mut slots, vmax, &mut leaf)
    }

    #[allow(clippy::too_many_arguments)]
    fn emit(
        &self,
        u: &Universe,
        layout: Layout,
        slots: &[u64],
        cells: &[(u64, Kind)],
        blocks: &[Block],
        expand: bool,
        sink: &mut dyn FnMut(PState) -> bool,
    ) -> bool {
        let mut st = layout.empty();
        for s in 0..self.fixed {
            layout.set(&mut st, s, slots[s]);
        }
        for &(l, k) in cells {
            let raw = match k {
                Kind::Val(v) => v as u8 + 2,
                Kind::Any => 2,
                Kind::Bot => BOT,
            };
            layout.set_cell(&mut st, l, raw);
        }
        for b in blocks {
            layout.add_block(&mut st, b.lo, b.hi);
        }
        if !expand {
            return sink(st);
        }
        let any: Vec<u64> = cells.iter().filter(|c| c.1 == Kind::Any).map(|c| c.0).collect();
        let mut free: Vec<Choice> = any.into_iter().map(Choice::Cell).collect();
        free.extend(self.unmentioned_fixed.iter().map(|&s| Choice::Slot(s)));
        expand_choices(layout, u.vmax, &mut st, &free, sink)
    }

    /// Whether the state satisfies this disjunct for some values of the
    /// bound variables.
    pub fn satisfied_by(&self, u: &Universe, st: &PState) -> bool {
        let layout = u.layout();
        let vmax = u.vmax;
        let mut slots = vec![0u64; self.nslots];
        for s in 0..self.fixed {
            slots[s] = layout.get(st, s);
        }
        let view = PView { layout, st };
        let mut found = false;
        let mut leaf = |slots: &mut Vec<u64>| -> bool {
            if !self.block_atoms_hold(slots, &view) {
                return true;
            }
            let Some(cells) = self.footprint(slots, &view, vmax) else { return true };
            if cells.len() != layout.dom_size(st) {
                return true;
            }
            let matches = cells.iter().all(|&(l, k)| {
                let raw = layout.cell(st, l);
                match k {
                    Kind::Val(v) => raw as u64 == v + 2,
                    Kind::Any => raw >= 2,
                    Kind::Bot => raw == BOT,
                }
            });
            if matches {
                found = true;
                return false;
            }
            true
        };
        self.search(&self.member, &mut slots, vmax, &mut leaf);
        found
    }
}

enum Choice {
    Cell(u64),
    Slot(usize),
}

fn expand_choices(
    layout: Layout,
    vmax: u64,
    st: &mut PState,
    free: &[Choice],
    sink: &mut dyn FnMut(PState) -> bool,
) -> bool {
    match free.split_first() {
        None => sink(st.clone()),
        Some((c, rest)) => {
            for v in 0..=vmax {
                match c {
                    Choice::Cell(l) => layout.set_cell(st, *l, v as u8 + 2),
                    Choice::Slot(s) => layout.set(st, *s, v),
                }
                if !expand_choices(layout, vmax, st, rest, sink) {
                    return false;
                }
            }
            true
        }
    }
}

struct NoB;

impl BlockLookup for NoB {
    fn base(&self, _: u64) -> u64 {
        0
    }
    fn end(&self, _: u64) -> u64 {
        0
    }
}

fn in_any(bs: &[Block], l: u64) -> bool {
    bs.iter().any(|b| b.lo <= l && l < b.hi)
}

/// Allocated cells inside the blocks and deallocated cells outside.
fn covers(bs: &[Block], cells: &[(u64, Kind)]) -> bool {
    cells.iter().all(|&(l, k)| (k == Kind::Bot) != in_any(bs, l))
}

fn exactly_covers(bs: &[Block], cells: &[(u64, Kind)]) -> bool {
    let pos = cells.iter().filter(|c| c.1 != Kind::Bot).count() as u64;
    let total: u64 = bs.iter().map(|b| b.hi - b.lo).sum();
    covers(bs, cells) && pos == total
}

/// Every way of cutting the sorted locations `pos` into blocks of
/// consecutive locations.
fn partitions(pos: &[u64], cur: &mut Vec<Block>, f: &mut dyn FnMut(&[Block]) -> bool) -> bool {
    if pos.is_empty() {
        return f(cur);
    }
    let mut run = 1;
    while run < pos.len() && pos[run] == pos[run - 1] + 1 {
        run += 1;
    }
    for len in 1..=run {
        cur.push(Block { lo: pos[0], hi: pos[0] + len as u64 });
        let cont = partitions(&pos[len..], cur, f);
        cur.pop();
        if !cont {
            return false;
        }
    }
    true
}

/// Set of packed states over a fixed universe.
#[derive(Clone, Debug)]
pub struct StateSet {
    pub(crate) universe: Universe,
    pub(crate) states: HashSet<PState>,
    /// Whether the set may be missing states because a budget was hit.
    pub truncated: bool,
}

impl StateSet {
    pub(crate) fn new(universe: Universe) -> Self {
        StateSet { universe, states: HashSet::new(), truncated: false }
    }

    pub fn universe(&self) -> &Universe {
        &self.universe
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn contains(&self, st: &ConcreteState) -> bool {
        let layout = self.universe.layout();
        layout.from_concrete(&self.universe, st).is_some_and(|p| self.states.contains(&p))
    }

    pub fn to_concrete(&self) -> Vec<ConcreteState> {
        let layout = self.universe.layout();
        let mut v: Vec<ConcreteState> =
            self.states.iter().map(|p| layout.to_concrete(&self.universe, p)).collect();
        v.sort();
        v
    }

    /// States of `self` missing from `other`, smallest witness first.
    pub fn minus(&self, other: &StateSet) -> Vec<ConcreteState> {
        let layout = self.universe.layout();
        let mut v: Vec<ConcreteState> = self
            .states
            .iter()
            .filter(|p| !other.states.contains(*p))
            .map(|p| layout.to_concrete(&self.universe, p))
            .collect();
        v.sort_by_key(|s| s.witness_key());
        v
    }

    pub fn same_states(&self, other: &StateSet) -> bool {
        self.states == other.states
    }
}

/// A compiled assertion ready for enumeration and membership tests.
#[derive(Clone, Debug)]
pub struct CompiledAssertion {
    universe: Universe,
    disjuncts: Vec<CDisjunct>,
    truncated: bool,
}

impl CompiledAssertion {
    pub fn new(a: &Assertion, u: &Universe) -> Result<Self> {
        let disjuncts = a.disjuncts.iter().map(|d| CDisjunct::compile(d, u)).collect::<Result<_>>()?;
        Ok(CompiledAssertion { universe: u.clone(), disjuncts, truncated: a.is_truncated() })
    }

    pub(crate) fn holds_packed(&self, st: &PState) -> bool {
        self.disjuncts.iter().any(|d| d.satisfied_by(&self.universe, st))
    }

    /// Membership of a concrete state; `None` if the state lies outside the
    /// universe.
    pub fn holds(&self, st: &ConcreteState) -> Option<bool> {
        let layout = self.universe.layout();
        let p = layout.from_concrete(&self.universe, st)?;
        Some(self.holds_packed(&p))
    }

    pub fn is_truncated(&self) -> bool {
        self.truncated
    }

    pub fn models(&self, scope: Scope) -> StateSet {
        let u = &self.universe;
        let block_sets = all_block_sets(u.vmax);
        let parts: Vec<Vec<PState>> = par::map(&self.disjuncts, |d| {
            let mut v = Vec::new();
            d.for_each_model(u, scope, &block_sets, true, &mut |st| {
                v.push(st);
                true
            });
            v
        });
        let mut set = StateSet::new(u.clone());
        for p in parts {
            set.states.extend(p);
        }
        set.truncated = self.truncated;
        set
    }

    /// Smallest model by heap size then value sum, if any.
    pub fn min_model(&self, scope: Scope) -> Option<ConcreteState> {
        let u = &self.universe;
        let layout = u.layout();
        let block_sets = all_block_sets(u.vmax);
        let found: Vec<Option<ConcreteState>> = par::map(&self.disjuncts, |d| {
            let mut best: Option<ConcreteState> = None;
            d.for_each_model(u, scope, &block_sets, false, &mut |st| {
                let c = layout.to_concrete(u, &st);
                if best.as_ref().is_none_or(|b| c.witness_key() < b.witness_key()) {
                    best = Some(c);
                }
                true
            });
            best
        });
        found.into_iter().flatten().min_by_key(|c| c.witness_key())
    }

    pub fn disjunct_count(&self) -> usize {
        self.disjuncts.len()
    }

    /// Smallest model of a single disjunct.
    pub fn min_model_of(&self, i: usize, scope: Scope) -> Option<ConcreteState> {
        let u = &self.universe;
        let layout = u.layout();
        let block_sets = all_block_sets(u.vmax);
        let mut best: Option<ConcreteState> = None;
        self.disjuncts[i].for_each_model(u, scope, &block_sets, false, &mut |st| {
            let c = layout.to_concrete(u, &st);
            if best.as_ref().is_none_or(|b| c.witness_key() < b.witness_key()) {
                best = Some(c);
            }
            true
        });
        best
    }
}

/// Models of an assertion within a universe.
pub fn models(a: &Assertion, u: &Universe, scope: Scope) -> Result<StateSet> {
    Ok(CompiledAssertion::new(a, u)?.models(scope))
}

/// Three-valued membership: a truncated assertion cannot refute a state.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Truth {
    True,
    False,
    Unknown,
}

pub fn satisfies(st: &ConcreteState, a: &Assertion, u: &Universe) -> Result<Truth> {
    let c = CompiledAssertion::new(a, u)?;
    Ok(match c.holds(st) {
        Some(true) => Truth::True,
        _ if a.is_truncated() => Truth::Unknown,
        _ => Truth::False,
    })
}
