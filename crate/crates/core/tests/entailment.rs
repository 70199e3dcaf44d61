use islarr_core::entailment::{
    default_bound, entails_pure, pure_sat, reference_entails, search_model, Entailment, PureSolver,
};
use islarr_core::semantics::holds_op;
use islarr_core::syntax::{parse_pure, PureAtom, PureOp, Term};
use proptest::prelude::*;

const LIMIT: u64 = 5_000_000;

fn atoms(s: &str) -> Vec<PureAtom> {
    parse_pure(s).unwrap()
}

fn term(blocks: bool) -> BoxedStrategy<Term> {
    let var = prop_oneof![Just("x"), Just("y"), Just("z")].prop_map(Term::var);
    let leaf = prop_oneof![
        3 => var.clone(),
        1 => (0u64..3).prop_map(Term::Nat),
        1 => Just(Term::Null),
        1 => (var.clone(), 1u64..3).prop_map(|(v, k)| v.plus(k)),
    ];
    if blocks {
        prop_oneof![4 => leaf, 1 => var.clone().prop_map(Term::base), 1 => var.prop_map(Term::end)].boxed()
    } else {
        leaf.boxed()
    }
}

fn atom(blocks: bool) -> impl Strategy<Value = PureAtom> {
    let op = prop_oneof![Just(PureOp::Eq), Just(PureOp::Ne), Just(PureOp::Le), Just(PureOp::Lt)];
    (op, term(blocks), term(blocks)).prop_map(|(op, l, r)| PureAtom::new(op, l, r))
}

/// Brute-force model of the conjunction within `bound`.
fn brute_model(atoms: &[PureAtom], bound: u64, block_bound: u64) -> Option<bool> {
    let pred = |eval: &dyn Fn(&Term) -> u64| atoms.iter().all(|a| holds_op(a.op, eval(&a.lhs), eval(&a.rhs)));
    search_model(atoms, bound, block_bound, LIMIT, &pred).ok().map(|m| m.is_some())
}

#[test]
fn strict_order_cycle_is_unsat() {
    assert!(!pure_sat(&atoms("x < y * y < x")));
    assert!(!pure_sat(&atoms("x < y * y < x + 1")));
    assert!(pure_sat(&atoms("x < y * y < x + 2")));
}

#[test]
fn block_axioms() {
    // A location inside a block lies between its base and end.
    let s = PureSolver::new(&atoms("null < b(x)"));
    assert!(s.entails(&PureAtom::le(Term::base(Term::var("x")), Term::var("x"))));
    assert!(s.entails(&PureAtom::lt(Term::var("x"), Term::end(Term::var("x")))));
    // Outside every block both bounds are null.
    let s = PureSolver::new(&atoms("b(x) == null"));
    assert!(s.entails(&PureAtom::eq(Term::end(Term::var("x")), Term::Null)));
    // Two locations of one block share its bounds.
    assert!(!pure_sat(&atoms("b(x) == b(y) * null < b(x) * e(x) < e(y)")));
}

#[test]
fn disequality_splits() {
    let s = PureSolver::new(&atoms("x != y * x <= y"));
    assert!(s.entails(&PureAtom::lt(Term::var("x"), Term::var("y"))));
}

#[test]
fn counter_models_are_reported() {
    match entails_pure(&atoms("x < y"), &atoms("y == x + 1")) {
        Entailment::No(m) => {
            let x = m.store[&"x".into()];
            let y = m.store[&"y".into()];
            assert!(x < y && y != x + 1);
        }
        other => panic!("expected a counter-model, got {other:?}"),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn arithmetic_sat_matches_brute_force(atoms in prop::collection::vec(atom(false), 1..5)) {
        let bound = 3 * default_bound(&atoms);
        if let Some(found) = brute_model(&atoms, bound, 0) {
            prop_assert_eq!(pure_sat(&atoms), found, "{:?}", atoms);
        }
    }

    #[test]
    fn block_models_are_sat(atoms in prop::collection::vec(atom(true), 1..5)) {
        // The block search is bounded, so only its positive answers are
        // conclusive.
        if brute_model(&atoms, 6, 6) == Some(true) {
            prop_assert!(pure_sat(&atoms), "{:?}", atoms);
        }
    }

    #[test]
    fn proven_entailments_have_no_counter_model(
        hyp in prop::collection::vec(atom(true), 1..4),
        concl in atom(true),
    ) {
        if PureSolver::new(&hyp).entails(&concl) {
            let r = reference_entails(&hyp, std::slice::from_ref(&concl), 6, 6);
            prop_assert!(!matches!(r, Entailment::No(_)), "{:?} |= {:?}: {:?}", hyp, concl, r);
        }
    }

    #[test]
    fn arithmetic_entailment_is_complete(
        hyp in prop::collection::vec(atom(false), 1..4),
        concl in atom(false),
    ) {
        let all: Vec<PureAtom> = hyp.iter().cloned().chain([concl.clone()]).collect();
        let bound = 3 * default_bound(&all);
        if let Entailment::Yes = reference_entails(&hyp, std::slice::from_ref(&concl), bound, 0) {
            prop_assert!(PureSolver::new(&hyp).entails(&concl), "{:?} |= {:?}", hyp, concl);
        }
    }
}
