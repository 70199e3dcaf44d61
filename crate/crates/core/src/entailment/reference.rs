//! Reference decision procedure: brute-force search for a store and block
//! set within a small bound.

use std::collections::BTreeMap;

use crate::semantics::{all_block_sets, interp_term, Block};
use crate::syntax::{Ident, PureAtom, Term};


/// Store and block set satisfying a pure formula.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PureModel {
    pub store: BTreeMap<Ident, u64>,
    pub blocks: Vec<Block>,
}

fn max_const(t: &Term) -> u64 {
    match t {
        Term::Null | Term::Var(_) => 0,
        Term::Nat(n) => *n,
        Term::Add(l, r) => max_const(l) + max_const(r),
        Term::Base(a) | Term::End(a) => max_const(a),
    }
}

/// Bound used by [`search_model`] when none is given: largest constant sum
/// plus the number of variables plus two.
pub fn default_bound(atoms: &[PureAtom]) -> u64 {
    let mut vars = Vec::new();
    let mut k = 0;
    for a in atoms {
        a.lhs.collect_vars(&mut vars);
        a.rhs.collect_vars(&mut vars);
        k = k.max(max_const(&a.lhs)).max(max_const(&a.rhs));
    }
    k + vars.len() as u64 + 2
}

fn uses_blocks(atoms: &[PureAtom]) -> bool {
    atoms.iter().any(|a| a.lhs.has_block_fn() || a.rhs.has_block_fn())
}

/// Searches stores over `0..=bound` and block sets inside `1..=block_bound`
/// for one satisfying `pred`. Gives up (returns `Err`) above `limit` probes.
pub fn search_model(
    atoms: &[PureAtom],
    bound: u64,
    block_bound: u64,
    limit: u64,
    pred: &dyn Fn(&dyn Fn(&Term) -> u64) -> bool,
) -> Result<Option<PureModel>, ()> {
    let mut vars = Vec::new();
    for a in atoms {
        a.lhs.collect_vars(&mut vars);
        a.rhs.collect_vars(&mut vars);
    }
    let block_sets = if uses_blocks(atoms) { all_block_sets(block_bound) } else { vec![vec![]] };
    let stores = (bound + 1).checked_pow(vars.len() as u32).unwrap_or(u64::MAX);
    if stores.saturating_mul(block_sets.len() as u64) > limit {
        return Err(());
    }
    let mut vals = vec![0u64; vars.len()];
    loop {
        let store: BTreeMap<Ident, u64> = vars.iter().cloned().zip(vals.iter().copied()).collect();
        for bs in &block_sets {
            let eval = |t: &Term| {
                interp_term(t, &|x| store.get(x).copied().unwrap_or(0), bs.as_slice())
            };
            if pred(&eval) {
                return Ok(Some(PureModel { store: store.clone(), blocks: bs.clone() }));
            }
        }
        let mut i = 0;
        loop {
            if i == vals.len() {
                return Ok(None);
            }
            vals[i] += 1;
            if vals[i] <= bound {
                break;
            }
            vals[i] = 0;
            i += 1;
        }
    }
}
