//! Concrete states, satisfaction of assertions and the bounded denotational
//! semantics of commands.

mod denote;
mod eval;
mod models;
mod naive;
mod state;

pub use denote::{denote, wpo_semantic, Executor};
pub use eval::{holds_op, holds_pure, interp_term};
pub use models::{models, satisfies, CompiledAssertion, Scope, StateSet, Truth};
pub use naive::{heap_holds_naive, satisfies_naive};
pub use state::{all_block_sets, Block, BlockLookup, Cell, ConcreteState, Universe, MAX_VMAX};
