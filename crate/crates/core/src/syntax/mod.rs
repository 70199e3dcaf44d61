//! Abstract syntax, parsing, printing and term-set functions.

mod ast;
mod parse;
mod print;
mod subst;
mod terms;

pub use ast::{
    Assertion, Command, Disjunct, Exit, Ident, Origin, PureAtom, PureOp, SpatialAtom,
    SymbolicHeap, Term, Truncation,
};
pub use parse::{parse_assertion, parse_command, parse_heap, parse_pure, parse_term};
pub use subst::{
    rename_bound_apart, replace_terms, subst_assertion, subst_disjunct, subst_heap, subst_term,
    FreshGen,
};
pub use terms::{
    command_term_set, heap_term_set, heap_term_set_minus, modified_vars, term_set, vars_of,
    TermSet,
};
