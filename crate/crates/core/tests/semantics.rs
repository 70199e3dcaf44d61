use std::collections::{BTreeMap, BTreeSet};

use islarr_core::gen::{GenConfig, Generator};
use islarr_core::semantics::{
    all_block_sets, denote, models, satisfies_naive, wpo_semantic, Cell, ConcreteState, Scope, Universe,
};
use islarr_core::syntax::{parse_assertion, parse_command, Assertion, Command, Exit, Ident};
use proptest::prelude::*;

/// Every well-formed state over `vars` with values in `0..=vmax` and heap
/// cells in `1..vmax`.
fn all_states(vars: &[Ident], vmax: u64) -> Vec<ConcreteState> {
    let mut stores = vec![BTreeMap::new()];
    for x in vars {
        stores = stores
            .into_iter()
            .flat_map(|s| {
                (0..=vmax).map(move |v| {
                    let mut s = s.clone();
                    s.insert(x.clone(), v);
                    s
                })
            })
            .collect();
    }
    let mut out = Vec::new();
    for blocks in all_block_sets(vmax) {
        let mut heaps = vec![BTreeMap::new()];
        for l in 1..vmax {
            let inside = blocks.iter().any(|b| b.lo <= l && l < b.hi);
            let mut options = vec![None];
            if inside {
                options.extend((0..=vmax).map(|v| Some(Cell::Val(v))));
            } else {
                options.push(Some(Cell::Bot));
            }
            heaps = heaps
                .into_iter()
                .flat_map(|h: BTreeMap<u64, Cell>| {
                    options.iter().map(move |o| {
                        let mut h = h.clone();
                        if let Some(c) = o {
                            h.insert(l, *c);
                        }
                        h
                    })
                })
                .collect();
        }
        for h in &heaps {
            for s in &stores {
                out.push(ConcreteState { store: s.clone(), heap: h.clone(), blocks: blocks.clone() });
            }
        }
    }
    out
}

fn set(v: Vec<ConcreteState>) -> BTreeSet<ConcreteState> {
    v.into_iter().collect()
}

fn check_models(a: &Assertion, vmax: u64) {
    let u = Universe::covering(&[a], &[], vmax).unwrap();
    let vars: Vec<Ident> = a.free_vars();
    let states = all_states(&vars, vmax);
    assert!(states.iter().all(|s| s.is_well_formed()));
    for scope in [Scope::Exact, Scope::All] {
        let expect: BTreeSet<ConcreteState> = states
            .iter()
            .filter(|s| scope == Scope::All || s.is_exact())
            .filter(|s| satisfies_naive(s, a, vmax))
            .cloned()
            .collect();
        let got = set(models(a, &u, scope).unwrap().to_concrete());
        assert_eq!(got, expect, "{a} under {scope:?}");
    }
}

#[test]
fn models_of_basic_atoms() {
    for s in [
        "emp",
        "x |-> 1",
        "x |-> -",
        "x !|->",
        "arr(x, x + 2)",
        "narr(x, y)",
        "x |-> y * y |-> x",
        "arr(x, y) * x < b(x)",
        "emp * e(x) == x + 2 * b(x) == x",
        "exists v. x |-> v * v < 2",
        "false",
    ] {
        check_models(&parse_assertion(s).unwrap(), 3);
    }
}

fn same_posts(pre: &str, c: &str, exit: Exit, vmax: u64) {
    let p = parse_assertion(pre).unwrap();
    let c = parse_command(c).unwrap();
    let u = Universe::covering(&[&p], &[&c], vmax).unwrap();
    let direct = set(wpo_semantic(&p, &c, exit, &u).unwrap().to_concrete());
    let pre_states = models(&p, &u, Scope::Exact).unwrap().to_concrete();
    let stepwise: BTreeSet<ConcreteState> =
        pre_states.iter().flat_map(|s| denote(&c, s, exit, &u).unwrap()).collect();
    assert_eq!(direct, stepwise);
}

#[test]
fn free_deallocates_the_block() {
    let p = parse_assertion("x |-> 1").unwrap();
    let c = parse_command("free(x)").unwrap();
    let u = Universe::covering(&[&p], &[&c], 3).unwrap();
    for s in wpo_semantic(&p, &c, Exit::Ok, &u).unwrap().to_concrete() {
        let x = s.get(&"x".into());
        assert_eq!(s.heap.get(&x), Some(&Cell::Bot));
        assert!(s.blocks.is_empty());
    }
    let er = wpo_semantic(&p, &parse_command("free(x + 1)").unwrap(), Exit::Er, &u).unwrap();
    assert!(!er.is_empty());
}

#[test]
fn alloc_never_errs_and_error_never_oks() {
    let p = parse_assertion("emp").unwrap();
    let c = parse_command("x := alloc(2)").unwrap();
    let u = Universe::covering(&[&p], &[&c], 4).unwrap();
    assert!(wpo_semantic(&p, &c, Exit::Er, &u).unwrap().is_empty());
    assert!(!wpo_semantic(&p, &c, Exit::Ok, &u).unwrap().is_empty());
    let e = parse_command("error()").unwrap();
    assert!(wpo_semantic(&p, &e, Exit::Ok, &u).unwrap().is_empty());
}

#[test]
fn single_state_runs_agree_with_set_runs() {
    same_posts("x |-> 1 * arr(y, y + 1)", "[y] := x; free(x)", Exit::Ok, 4);
    same_posts("arr(x, x + 2)", "y := [x + 1] + { free(x) }", Exit::Er, 4);
}

fn post(a: &Assertion, c: &Command, exit: Exit, u: &Universe) -> BTreeSet<ConcreteState> {
    set(wpo_semantic(a, c, exit, u).unwrap().to_concrete())
}

fn from_states(states: &BTreeSet<ConcreteState>, c: &Command, exit: Exit, u: &Universe) -> BTreeSet<ConcreteState> {
    states.iter().flat_map(|s| denote(c, s, exit, u).unwrap()).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn enumerated_models_match_naive_satisfaction(seed in any::<u64>()) {
        let cfg = GenConfig { vars: 2, max_pure: 2, ..GenConfig::default() };
        let a = Generator::new(seed, cfg).assertion();
        check_models(&a, 3);
    }

    #[test]
    fn sequencing_composes(seed in any::<u64>()) {
        let cfg = GenConfig { max_commands: 1, ..GenConfig::default() };
        let mut g = Generator::new(seed, cfg);
        let p = g.assertion();
        let (c1, c2) = (g.command(), g.command());
        let seq = Command::seq(c1.clone(), c2.clone());
        let u = Universe::covering(&[&p], &[&seq], 4).unwrap();
        let mid = post(&p, &c1, Exit::Ok, &u);
        prop_assert_eq!(post(&p, &seq, Exit::Ok, &u), from_states(&mid, &c2, Exit::Ok, &u));
        let mut er = post(&p, &c1, Exit::Er, &u);
        er.extend(from_states(&mid, &c2, Exit::Er, &u));
        prop_assert_eq!(post(&p, &seq, Exit::Er, &u), er);
    }

    #[test]
    fn choice_is_union(seed in any::<u64>()) {
        let cfg = GenConfig { max_commands: 1, ..GenConfig::default() };
        let mut g = Generator::new(seed, cfg);
        let p = g.assertion();
        let (c1, c2) = (g.command(), g.command());
        let ch = Command::choice(c1.clone(), c2.clone());
        let u = Universe::covering(&[&p], &[&ch], 4).unwrap();
        for exit in [Exit::Ok, Exit::Er] {
            let mut both = post(&p, &c1, exit, &u);
            both.extend(post(&p, &c2, exit, &u));
            prop_assert_eq!(post(&p, &ch, exit, &u), both);
        }
    }

    #[test]
    fn post_states_are_exact(seed in any::<u64>()) {
        let mut g = Generator::new(seed, GenConfig::default());
        let case = g.case(0);
        let u = Universe::covering(&[&case.pre], &[&case.prog], 4).unwrap();
        for s in post(&case.pre, &case.prog, case.exit, &u) {
            prop_assert!(s.is_exact(), "{:?}", s);
        }
    }
}
