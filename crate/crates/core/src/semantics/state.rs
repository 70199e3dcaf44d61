use std::collections::BTreeMap;
use std::fmt;

use serde::de::{self, Deserializer, Visitor};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::error::{IslError, Result};
use crate::syntax::{Assertion, Command, Ident};

/// Largest supported `vmax`; values are packed into bytes.
pub const MAX_VMAX: u64 = 200;

/// Finite universe for enumeration: store variables, the value/location
/// bound, and caps on heap size and loop unrolling. Values range over
/// `0..=vmax` and heap cells over `1..vmax`, so block ends stay values.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Universe {
    pub vars: Vec<Ident>,
    pub vmax: u64,
    pub heap_cap: usize,
    pub loop_bound: usize,
}

impl Universe {
    pub fn new(vars: impl IntoIterator<Item = Ident>, vmax: u64) -> Result<Self> {
        if vmax == 0 || vmax > MAX_VMAX {
            return Err(IslError::Precondition(format!("vmax must be in 1..={MAX_VMAX}, got {vmax}")));
        }
        let mut vs: Vec<Ident> = vars.into_iter().collect();
        vs.sort();
        vs.dedup();
        Ok(Universe { vars: vs, vmax, heap_cap: vmax as usize, loop_bound: 3 })
    }

    /// Universe over every variable mentioned by the given assertions and
    /// commands, including local binders.
    pub fn covering(assertions: &[&Assertion], commands: &[&Command], vmax: u64) -> Result<Self> {
        let mut vars = Vec::new();
        for a in assertions {
            vars.extend(a.free_vars());
        }
        for c in commands {
            vars.extend(c.vars());
        }
        Universe::new(vars, vmax)
    }

    pub fn with_heap_cap(mut self, cap: usize) -> Self {
        self.heap_cap = cap;
        self
    }

    pub fn with_loop_bound(mut self, k: usize) -> Self {
        self.loop_bound = k;
        self
    }

    pub fn index(&self, x: &Ident) -> Option<usize> {
        self.vars.binary_search(x).ok()
    }

    pub(crate) fn layout(&self) -> Layout {
        Layout { nvars: self.vars.len(), vmax: self.vmax as usize }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Cell {
    Val(u64),
    /// Deallocated cell.
    Bot,
}

impl Serialize for Cell {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Cell::Val(v) => s.serialize_u64(*v),
            Cell::Bot => s.serialize_str("bot"),
        }
    }
}

impl<'de> Deserialize<'de> for Cell {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = Cell;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a natural number or \"bot\"")
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Cell, E> {
                Ok(Cell::Val(v))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Cell, E> {
                if v == "bot" {
                    Ok(Cell::Bot)
                } else {
                    Err(E::custom(format!("unknown cell `{v}`")))
                }
            }
        }
        d.deserialize_any(V)
    }
}

/// Allocated block `[lo, hi)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Block {
    pub lo: u64,
    pub hi: u64,
}

/// Lookup of the block containing a location; 0 when there is none.
pub trait BlockLookup {
    fn base(&self, l: u64) -> u64;
    fn end(&self, l: u64) -> u64;
}

impl BlockLookup for [Block] {
    fn base(&self, l: u64) -> u64 {
        self.iter().find(|b| b.lo <= l && l < b.hi).map_or(0, |b| b.lo)
    }
    fn end(&self, l: u64) -> u64 {
        self.iter().find(|b| b.lo <= l && l < b.hi).map_or(0, |b| b.hi)
    }
}

/// A concrete program state `(s, h, B)`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ConcreteState {
    pub store: BTreeMap<Ident, u64>,
    pub heap: BTreeMap<u64, Cell>,
    pub blocks: Vec<Block>,
}

impl ConcreteState {
    /// Store lookup; variables outside the map read as 0.
    pub fn get(&self, x: &Ident) -> u64 {
        self.store.get(x).copied().unwrap_or(0)
    }

    pub fn base(&self, l: u64) -> u64 {
        self.blocks.base(l)
    }

    pub fn end(&self, l: u64) -> u64 {
        self.blocks.end(l)
    }

    fn in_blocks(&self, l: u64) -> bool {
        self.blocks.iter().any(|b| b.lo <= l && l < b.hi)
    }

    /// Block intervals are non-empty, disjoint and start above 0; allocated
    /// cells lie inside blocks and deallocated cells outside them.
    pub fn is_well_formed(&self) -> bool {
        let mut bs = self.blocks.clone();
        bs.sort();
        if bs.iter().any(|b| b.lo == 0 || b.lo >= b.hi) {
            return false;
        }
        if bs.windows(2).any(|w| w[0].hi > w[1].lo) {
            return false;
        }
        self.heap.iter().all(|(&l, c)| match c {
            Cell::Val(_) => l > 0 && self.in_blocks(l),
            Cell::Bot => l > 0 && !self.in_blocks(l),
        })
    }

    /// Allocated cells are exactly the union of the blocks.
    pub fn is_exact(&self) -> bool {
        self.is_well_formed()
            && self
                .blocks
                .iter()
                .all(|b| (b.lo..b.hi).all(|l| matches!(self.heap.get(&l), Some(Cell::Val(_)))))
    }

    pub fn dom_size(&self) -> usize {
        self.heap.len()
    }

    pub fn value_sum(&self) -> u64 {
        let s: u64 = self.store.values().sum();
        let h: u64 = self
            .heap
            .values()
            .map(|c| match c {
                Cell::Val(v) => *v,
                Cell::Bot => 0,
            })
            .sum();
        s + h
    }

    /// Ordering key used to pick minimal witnesses.
    pub fn witness_key(&self) -> (usize, u64, ConcreteState) {
        (self.dom_size(), self.value_sum(), self.clone())
    }
}

impl fmt::Display for ConcreteState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("store {")?;
        for (i, (x, v)) in self.store.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{x}={v}")?;
        }
        f.write_str("} heap {")?;
        for (i, (l, c)) in self.heap.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            match c {
                Cell::Val(v) => write!(f, "{l}:{v}")?,
                Cell::Bot => write!(f, "{l}:bot")?,
            }
        }
        f.write_str("} blocks {")?;
        for (i, b) in self.blocks.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "[{},{})", b.lo, b.hi)?;
        }
        f.write_str("}")
    }
}

/// Byte layout of a packed state: store slots, then one heap byte per
/// location `1..=vmax` (0 absent, 1 deallocated, `2 + v` value), then one
/// block byte per location (0 outside, 1 block start, 2 continuation).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) struct Layout {
    pub nvars: usize,
    pub vmax: usize,
}

pub(crate) const ABSENT: u8 = 0;
pub(crate) const BOT: u8 = 1;
pub(crate) const OUTSIDE: u8 = 0;
pub(crate) const START: u8 = 1;
pub(crate) const CONT: u8 = 2;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub(crate) struct PState(pub SmallVec<[u8; 32]>);

impl Layout {
    pub fn empty(&self) -> PState {
        PState(SmallVec::from_elem(0, self.nvars + 2 * self.vmax))
    }

    pub fn get(&self, st: &PState, slot: usize) -> u64 {
        st.0[slot] as u64
    }

    pub fn set(&self, st: &mut PState, slot: usize, v: u64) {
        st.0[slot] = v as u8;
    }

    fn cell_ix(&self, l: u64) -> Option<usize> {
        if l >= 1 && l <= self.vmax as u64 {
            Some(self.nvars + l as usize - 1)
        } else {
            None
        }
    }

    fn mark_ix(&self, l: u64) -> Option<usize> {
        self.cell_ix(l).map(|i| i + self.vmax)
    }

    pub fn cell(&self, st: &PState, l: u64) -> u8 {
        self.cell_ix(l).map_or(ABSENT, |i| st.0[i])
    }

    pub fn set_cell(&self, st: &mut PState, l: u64, raw: u8) {
        let i = self.cell_ix(l).expect("location in range");
        st.0[i] = raw;
    }

    pub fn mark(&self, st: &PState, l: u64) -> u8 {
        self.mark_ix(l).map_or(OUTSIDE, |i| st.0[i])
    }

    pub fn set_mark(&self, st: &mut PState, l: u64, m: u8) {
        let i = self.mark_ix(l).expect("location in range");
        st.0[i] = m;
    }

    pub fn base(&self, st: &PState, l: u64) -> u64 {
        if self.mark(st, l) == OUTSIDE {
            return 0;
        }
        let mut b = l;
        while self.mark(st, b) == CONT {
            b -= 1;
        }
        b
    }

    pub fn end(&self, st: &PState, l: u64) -> u64 {
        if self.mark(st, l) == OUTSIDE {
            return 0;
        }
        let mut e = l + 1;
        while self.mark(st, e) == CONT {
            e += 1;
        }
        e
    }

    pub fn dom_size(&self, st: &PState) -> usize {
        st.0[self.nvars..self.nvars + self.vmax].iter().filter(|&&c| c != ABSENT).count()
    }

    pub fn add_block(&self, st: &mut PState, lo: u64, hi: u64) {
        self.set_mark(st, lo, START);
        for l in lo + 1..hi {
            self.set_mark(st, l, CONT);
        }
    }

    pub fn blocks(&self, st: &PState) -> Vec<Block> {
        let mut out = Vec::new();
        let mut l = 1;
        while l <= self.vmax as u64 {
            if self.mark(st, l) == START {
                let hi = self.end(st, l);
                out.push(Block { lo: l, hi });
                l = hi;
            } else {
                l += 1;
            }
        }
        out
    }

    pub fn to_concrete(&self, u: &Universe, st: &PState) -> ConcreteState {
        let store = u.vars.iter().enumerate().map(|(i, x)| (x.clone(), self.get(st, i))).collect();
        let mut heap = BTreeMap::new();
        for l in 1..=self.vmax as u64 {
            match self.cell(st, l) {
                ABSENT => {}
                BOT => {
                    heap.insert(l, Cell::Bot);
                }
                raw => {
                    heap.insert(l, Cell::Val(raw as u64 - 2));
                }
            }
        }
        ConcreteState { store, heap, blocks: self.blocks(st) }
    }

    /// Packs a concrete state; `None` when it does not fit the universe.
    pub fn from_concrete(&self, u: &Universe, c: &ConcreteState) -> Option<PState> {
        let mut st = self.empty();
        for (x, &v) in &c.store {
            let i = u.index(x)?;
            if v > u.vmax {
                return None;
            }
            self.set(&mut st, i, v);
        }
        for (&l, cell) in &c.heap {
            if l >= u.vmax {
                return None;
            }
            let raw = match cell {
                Cell::Bot => BOT,
                Cell::Val(v) if *v <= u.vmax => *v as u8 + 2,
                Cell::Val(_) => return None,
            };
            self.set_cell(&mut st, l, raw);
        }
        for b in &c.blocks {
            if b.lo == 0 || b.lo >= b.hi || b.hi > u.vmax {
                return None;
            }
            self.add_block(&mut st, b.lo, b.hi);
        }
        Some(st)
    }
}

pub(crate) struct PView<'a> {
    pub layout: Layout,
    pub st: &'a PState,
}

impl BlockLookup for PView<'_> {
    fn base(&self, l: u64) -> u64 {
        self.layout.base(self.st, l)
    }
    fn end(&self, l: u64) -> u64 {
        self.layout.end(self.st, l)
    }
}

/// Every set of disjoint blocks `[lo, hi)` with `1 <= lo < hi <= vmax`.
pub fn all_block_sets(vmax: u64) -> Vec<Vec<Block>> {
    fn go(from: u64, vmax: u64, cur: &mut Vec<Block>, out: &mut Vec<Vec<Block>>) {
        out.push(cur.clone());
        for lo in from..vmax {
            for hi in lo + 1..=vmax {
                cur.push(Block { lo, hi });
                go(hi, vmax, cur, out);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    go(1, vmax, &mut Vec::new(), &mut out);
    out
}
