use islarr_core::gen::{GenConfig, Generator};
use islarr_core::syntax::{
    command_term_set, heap_term_set, parse_assertion, parse_command, parse_heap, parse_term, Command, Term,
};
use proptest::prelude::*;

fn t(s: &str) -> Term {
    parse_term(s).unwrap()
}

#[test]
fn free_terms_include_block_bounds() {
    let ts = command_term_set(&parse_command("free(x + 1)").unwrap());
    for s in ["x + 1", "b(x + 1)", "e(x + 1)"] {
        assert!(ts.contains(&t(s)), "missing {s} in {ts:?}");
    }
}

#[test]
fn skip_and_error_have_no_terms() {
    assert!(command_term_set(&Command::Skip).is_empty());
    assert!(command_term_set(&Command::Error).is_empty());
}

#[test]
fn heap_terms_cover_atoms() {
    let ts = heap_term_set(&parse_heap("x |-> 1 * arr(y, y + 2)").unwrap());
    for s in ["x", "y", "y + 2"] {
        assert!(ts.contains(&t(s)), "missing {s} in {ts:?}");
    }
}

#[test]
fn parse_errors_carry_position() {
    let e = parse_command("x := 1;\n[x] := ").unwrap_err();
    assert_eq!(e.line, 2);
    assert!(e.col > 1);
    assert!(parse_assertion("x |-> ").is_err());
}

#[test]
fn sugar_parses() {
    let c = parse_command("local y := 2 in { [x] := y }").unwrap();
    assert!(!c.has_star());
    let c = parse_command("{ x := x + 1 }*").unwrap();
    assert!(c.has_star());
    let a = parse_assertion("exists v. x |-> v * v < 3 \\/ emp * x == null").unwrap();
    assert_eq!(a.disjuncts.len(), 2);
    assert_eq!(a.disjuncts[0].bound.len(), 1);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn assertions_round_trip(seed in any::<u64>()) {
        let cfg = GenConfig { max_pure: 3, ..GenConfig::default() };
        let a = Generator::new(seed, cfg).assertion();
        let printed = a.to_string();
        let back = parse_assertion(&printed).unwrap();
        prop_assert_eq!(back, a, "{}", printed);
    }

    #[test]
    fn commands_round_trip(seed in any::<u64>()) {
        let cfg = GenConfig { max_commands: 4, ..GenConfig::default() };
        let c = Generator::new(seed, cfg).command();
        let printed = c.to_string();
        let back = parse_command(&printed).unwrap();
        prop_assert_eq!(back, c, "{}", printed);
    }
}
