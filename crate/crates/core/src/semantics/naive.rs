//! Direct transcription of the satisfaction relation, used as an oracle for
//! the footprint-based enumerator. Separating conjunction is decided by
//! trying every split of the heap.

use std::collections::BTreeMap;

use crate::syntax::{Assertion, Disjunct, Ident, PureAtom, SpatialAtom, SymbolicHeap, Term};

use super::eval::{holds_op, interp_term};
use super::state::{Cell, ConcreteState};

fn val(t: &Term, store: &BTreeMap<Ident, u64>, st: &ConcreteState) -> u64 {
    interp_term(t, &|x| store.get(x).copied().unwrap_or(0), st.blocks.as_slice())
}

fn atom_holds(
    a: &SpatialAtom,
    store: &BTreeMap<Ident, u64>,
    heap: &BTreeMap<u64, Cell>,
    st: &ConcreteState,
) -> bool {
    match a {
        SpatialAtom::Emp => heap.is_empty(),
        SpatialAtom::PointsTo(l, v) => {
            let l = val(l, store, st);
            let v = val(v, store, st);
            heap.len() == 1 && heap.get(&l) == Some(&Cell::Val(v))
        }
        SpatialAtom::Arr(l, r) => {
            let (l, r) = (val(l, store, st), val(r, store, st));
            l < r
                && heap.len() as u64 == r - l
                && (l..r).all(|k| matches!(heap.get(&k), Some(Cell::Val(_))))
        }
        SpatialAtom::NegArr(l, r) => {
            let (l, r) = (val(l, store, st), val(r, store, st));
            l < r && heap.len() as u64 == r - l && (l..r).all(|k| heap.get(&k) == Some(&Cell::Bot))
        }
    }
}

fn pure_holds(a: &PureAtom, store: &BTreeMap<Ident, u64>, heap: &BTreeMap<u64, Cell>, st: &ConcreteState) -> bool {
    heap.is_empty() && holds_op(a.op, val(&a.lhs, store, st), val(&a.rhs, store, st))
}

enum Conj<'a> {
    S(&'a SpatialAtom),
    P(&'a PureAtom),
}

fn star_holds(atoms: &[Conj], store: &BTreeMap<Ident, u64>, heap: &BTreeMap<u64, Cell>, st: &ConcreteState) -> bool {
    match atoms {
        [] => heap.is_empty(),
        [only] => match only {
            Conj::S(a) => atom_holds(a, store, heap, st),
            Conj::P(p) => pure_holds(p, store, heap, st),
        },
        [first, rest @ ..] => {
            let locs: Vec<u64> = heap.keys().copied().collect();
            let n = locs.len();
            (0u64..(1 << n)).any(|mask| {
                let mut left = BTreeMap::new();
                let mut right = BTreeMap::new();
                for (i, l) in locs.iter().enumerate() {
                    if mask & (1 << i) != 0 {
                        left.insert(*l, heap[l]);
                    } else {
                        right.insert(*l, heap[l]);
                    }
                }
                star_holds(std::slice::from_ref(first), store, &left, st)
                    && star_holds(rest, store, &right, st)
            })
        }
    }
}

pub fn heap_holds_naive(psi: &SymbolicHeap, store: &BTreeMap<Ident, u64>, st: &ConcreteState) -> bool {
    let mut atoms: Vec<Conj> = psi.spatial().iter().map(Conj::S).collect();
    atoms.extend(psi.pure().iter().map(Conj::P));
    if atoms.is_empty() {
        return st.heap.is_empty();
    }
    star_holds(&atoms, store, &st.heap, st)
}

fn disjunct_holds(d: &Disjunct, st: &ConcreteState, vmax: u64) -> bool {
    fn go(bound: &[Ident], store: &mut BTreeMap<Ident, u64>, d: &Disjunct, st: &ConcreteState, vmax: u64) -> bool {
        match bound.split_first() {
            None => heap_holds_naive(&d.body, store, st),
            Some((x, rest)) => (0..=vmax).any(|v| {
                store.insert(x.clone(), v);
                go(rest, store, d, st, vmax)
            }),
        }
    }
    let mut store = st.store.clone();
    go(&d.bound, &mut store, d, st, vmax)
}

/// Satisfaction with existential witnesses drawn from `0..=vmax`.
pub fn satisfies_naive(st: &ConcreteState, a: &Assertion, vmax: u64) -> bool {
    a.disjuncts.iter().any(|d| disjunct_holds(d, st, vmax))
}
