use std::collections::BTreeSet;

use islarr_core::canonical::{cano, case_terms, cases, consistent_cases, is_canonical, OrderCase, OrderRel};
use islarr_core::entailment::{pure_sat, Problem};
use islarr_core::gen::{GenConfig, Generator};
use islarr_core::semantics::{models, Scope, Universe};
use islarr_core::syntax::{parse_pure, parse_term, FreshGen, PureAtom, Term, TermSet};
use proptest::prelude::*;

fn terms(ts: &[&str]) -> TermSet {
    ts.iter().map(|s| parse_term(s).unwrap()).collect()
}

fn problem(atoms: &[PureAtom]) -> Problem {
    let mut p = Problem::new();
    for a in atoms {
        p.add_atom(a);
    }
    p
}

/// The weak order of a case as a list of equivalence classes.
fn classes(c: &OrderCase) -> Vec<BTreeSet<Term>> {
    let mut out = vec![BTreeSet::from([c.sequence[0].clone()])];
    for (t, r) in c.sequence[1..].iter().zip(&c.relations) {
        if *r == OrderRel::Lt {
            out.push(BTreeSet::new());
        }
        out.last_mut().unwrap().insert(t.clone());
    }
    out
}

/// Every case of the full enumeration that is consistent with `hyp`, up to
/// the order of equal terms.
fn brute_cases(ts: &TermSet, hyp: &[PureAtom]) -> BTreeSet<Vec<BTreeSet<Term>>> {
    cases(ts, 8)
        .unwrap()
        .iter()
        .filter(|c| {
            let mut all = hyp.to_vec();
            all.extend(c.atoms());
            pure_sat(&all)
        })
        .map(classes)
        .collect()
}

#[test]
fn two_variables_have_six_orders() {
    let cs = consistent_cases(&terms(&["x", "y"]), &Problem::new(), 1000).unwrap();
    assert_eq!(cs.len(), 6);
    let distinct: BTreeSet<_> = cs.iter().map(classes).collect();
    assert_eq!(distinct.len(), 6);
}

#[test]
fn full_enumeration_counts() {
    // n! permutations times 2^n relation vectors.
    assert_eq!(cases(&terms(&["x", "y", "z"]), 8).unwrap().len(), 6 * 8);
    assert!(cases(&terms(&["x", "y", "z"]), 2).is_err());
}

#[test]
fn hypotheses_prune_cases() {
    let hyp = parse_pure("x < y * y == z + 1").unwrap();
    let ts = terms(&["x", "y", "z"]);
    let got: BTreeSet<_> = consistent_cases(&ts, &problem(&hyp), 1000).unwrap().iter().map(classes).collect();
    assert_eq!(got, brute_cases(&ts, &hyp));
}

#[test]
fn inconsistent_hypotheses_have_no_cases() {
    let hyp = parse_pure("x < y * y < x").unwrap();
    assert!(consistent_cases(&terms(&["x"]), &problem(&hyp), 1000).unwrap().is_empty());
}

fn small_term() -> impl Strategy<Value = String> {
    prop_oneof![
        Just("x".to_string()),
        Just("y".to_string()),
        Just("x + 1".to_string()),
        Just("b(x)".to_string()),
        Just("e(y)".to_string()),
        Just("2".to_string()),
    ]
}

fn small_atom() -> impl Strategy<Value = String> {
    let op = prop_oneof![Just("=="), Just("!="), Just("<"), Just("<=")];
    (small_term(), op, small_term()).prop_map(|(l, o, r)| format!("{l} {o} {r}"))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn consistent_cases_match_filtered_enumeration(
        ts in prop::collection::btree_set(small_term(), 1..4),
        hyp in prop::collection::vec(small_atom(), 0..3),
    ) {
        let ts: TermSet = ts.iter().map(|s| parse_term(s).unwrap()).collect();
        let hyp: Vec<PureAtom> = hyp.iter().flat_map(|s| parse_pure(s).unwrap()).collect();
        let fast = consistent_cases(&ts, &problem(&hyp), 100_000).unwrap();
        let got: BTreeSet<_> = fast.iter().map(classes).collect();
        prop_assert_eq!(got.len(), fast.len());
        prop_assert_eq!(got, brute_cases(&ts, &hyp));
    }

    #[test]
    fn canonicalisation_preserves_models(seed in any::<u64>()) {
        let cfg = GenConfig { vars: 2, max_spatial: 2, max_pure: 1, max_commands: 1, ..GenConfig::default() };
        let mut g = Generator::new(seed, cfg);
        let p = g.assertion();
        let c = g.command();
        let u = Universe::covering(&[&p], &[&c], 4).unwrap();
        let q = cano(&p, &c, &Default::default(), &mut FreshGen::new()).unwrap();
        for d in &q.disjuncts {
            prop_assert!(is_canonical(&d.body, &case_terms(&d.body, &c)), "{}", d);
        }
        let before = models(&p, &u, Scope::All).unwrap();
        let after = models(&q, &u, Scope::All).unwrap();
        prop_assert!(before.same_states(&after), "{} vs {}", p, q);
    }
}
