use crate::error::{IslError, Result};
use crate::syntax::{Ident, PureAtom, PureOp, Term};

use super::state::{BlockLookup, ConcreteState};

/// Value of a term in a store and block set. Arithmetic saturates, which
/// only matters for values far outside any universe.
pub fn interp_term<B: BlockLookup + ?Sized>(t: &Term, store: &dyn Fn(&Ident) -> u64, blocks: &B) -> u64 {
    match t {
        Term::Null => 0,
        Term::Nat(n) => *n,
        Term::Var(x) => store(x),
        Term::Add(l, r) => interp_term(l, store, blocks).saturating_add(interp_term(r, store, blocks)),
        Term::Base(a) => blocks.base(interp_term(a, store, blocks)),
        Term::End(a) => blocks.end(interp_term(a, store, blocks)),
    }
}

pub fn holds_op(op: PureOp, l: u64, r: u64) -> bool {
    match op {
        PureOp::Eq => l == r,
        PureOp::Ne => l != r,
        PureOp::Le => l <= r,
        PureOp::Lt => l < r,
    }
}

/// Truth of a pure atom in a concrete state.
pub fn holds_pure(a: &PureAtom, st: &ConcreteState) -> bool {
    let store = |x: &Ident| st.get(x);
    let l = interp_term(&a.lhs, &store, st.blocks.as_slice());
    let r = interp_term(&a.rhs, &store, st.blocks.as_slice());
    holds_op(a.op, l, r)
}

#[derive(Clone, Debug)]
pub(crate) enum CTerm {
    Const(u64),
    Slot(usize),
    Add(Box<CTerm>, Box<CTerm>),
    Base(Box<CTerm>),
    End(Box<CTerm>),
}

impl CTerm {
    pub fn eval<B: BlockLookup + ?Sized>(&self, slots: &[u64], blocks: &B) -> u64 {
        match self {
            CTerm::Const(n) => *n,
            CTerm::Slot(i) => slots[*i],
            CTerm::Add(l, r) => l.eval(slots, blocks).saturating_add(r.eval(slots, blocks)),
            CTerm::Base(a) => blocks.base(a.eval(slots, blocks)),
            CTerm::End(a) => blocks.end(a.eval(slots, blocks)),
        }
    }

    /// Evaluation of a term without block functions.
    pub fn eval_plain(&self, slots: &[u64]) -> u64 {
        self.eval(slots, &NoBlocks)
    }

    pub fn has_block(&self) -> bool {
        match self {
            CTerm::Const(_) | CTerm::Slot(_) => false,
            CTerm::Add(l, r) => l.has_block() || r.has_block(),
            CTerm::Base(_) | CTerm::End(_) => true,
        }
    }

    pub fn slots(&self, out: &mut Vec<usize>) {
        match self {
            CTerm::Const(_) => {}
            CTerm::Slot(i) => {
                if !out.contains(i) {
                    out.push(*i)
                }
            }
            CTerm::Add(l, r) => {
                l.slots(out);
                r.slots(out);
            }
            CTerm::Base(a) | CTerm::End(a) => a.slots(out),
        }
    }

}

struct NoBlocks;

impl BlockLookup for NoBlocks {
    fn base(&self, _: u64) -> u64 {
        0
    }
    fn end(&self, _: u64) -> u64 {
        0
    }
}

#[derive(Clone, Debug)]
pub(crate) struct CAtom {
    pub op: PureOp,
    pub l: CTerm,
    pub r: CTerm,
}

impl CAtom {
    pub fn holds<B: BlockLookup + ?Sized>(&self, slots: &[u64], blocks: &B) -> bool {
        holds_op(self.op, self.l.eval(slots, blocks), self.r.eval(slots, blocks))
    }

    pub fn has_block(&self) -> bool {
        self.l.has_block() || self.r.has_block()
    }

    pub fn slots(&self) -> Vec<usize> {
        let mut v = Vec::new();
        self.l.slots(&mut v);
        self.r.slots(&mut v);
        v
    }
}

/// Assignment of variable names to slot indices: the universe variables
/// first, then any bound or auxiliary variables.
#[derive(Clone, Debug)]
pub(crate) struct SlotMap {
    pub names: Vec<Ident>,
    pub fixed: usize,
}

impl SlotMap {
    pub fn new(vars: &[Ident]) -> Self {
        SlotMap { names: vars.to_vec(), fixed: vars.len() }
    }

    pub fn lookup(&self, x: &Ident) -> Option<usize> {
        self.names.iter().position(|y| y == x)
    }

    /// Adds a local slot shadowing any existing name.
    pub fn push(&mut self, x: &Ident) -> usize {
        self.names.push(x.clone());
        self.names.len() - 1
    }

    pub fn term(&self, t: &Term) -> Result<CTerm> {
        Ok(match t {
            Term::Null => CTerm::Const(0),
            Term::Nat(n) => CTerm::Const(*n),
            Term::Var(x) => {
                let i = self
                    .names
                    .iter()
                    .rposition(|y| y == x)
                    .ok_or_else(|| IslError::Precondition(format!("variable `{x}` is not in the universe")))?;
                CTerm::Slot(i)
            }
            Term::Add(l, r) => CTerm::Add(Box::new(self.term(l)?), Box::new(self.term(r)?)),
            Term::Base(a) => CTerm::Base(Box::new(self.term(a)?)),
            Term::End(a) => CTerm::End(Box::new(self.term(a)?)),
        })
    }

    pub fn atom(&self, a: &PureAtom) -> Result<CAtom> {
        Ok(CAtom { op: a.op, l: self.term(&a.lhs)?, r: self.term(&a.rhs)? })
    }
}
