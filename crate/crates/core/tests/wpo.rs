use islarr_core::semantics::{models, wpo_semantic, Scope, Universe};
use islarr_core::syntax::{parse_assertion, parse_command, Assertion, Exit};
use islarr_core::wpo::{wpo, RuleVariant, Wpo, WpoBudget, WpoOptions};

fn a(s: &str) -> Assertion {
    parse_assertion(s).unwrap()
}

/// Exact models of the symbolic postcondition and of the concrete one.
fn compare(pre: &str, prog: &str, exit: Exit, vmax: u64) -> (usize, usize, usize) {
    let p = a(pre);
    let c = parse_command(prog).unwrap();
    let u = Universe::covering(&[&p], &[&c], vmax).unwrap();
    let w = wpo(&p, &c, exit, &WpoBudget::default()).unwrap();
    let sym = models(&w, &u, Scope::Exact).unwrap();
    let sem = wpo_semantic(&p, &c, exit, &u).unwrap();
    (sym.minus(&sem).len(), sem.minus(&sym).len(), sem.len())
}

fn exact(pre: &str, prog: &str, exit: Exit) {
    let (extra, missing, n) = compare(pre, prog, exit, 4);
    assert_eq!((extra, missing), (0, 0), "[{pre}] {prog} [{exit}] over {n} states");
}

#[test]
fn false_stays_false() {
    let c = parse_command("x := alloc(1); free(x)").unwrap();
    for exit in [Exit::Ok, Exit::Er] {
        assert!(wpo(&Assertion::falsum(), &c, exit, &WpoBudget::default()).unwrap().is_false());
    }
}

#[test]
fn skip_keeps_the_precondition() {
    exact("x |-> 1 * arr(y, y + 2)", "skip", Exit::Ok);
    let er = wpo(&a("x |-> 1"), &parse_command("skip").unwrap(), Exit::Er, &WpoBudget::default()).unwrap();
    assert!(er.is_false());
}

#[test]
fn assignment_sets_the_variable() {
    let p = a("emp");
    let c = parse_command("x := 1").unwrap();
    let u = Universe::covering(&[&p], &[&c], 3).unwrap();
    let w = wpo(&p, &c, Exit::Ok, &WpoBudget::default()).unwrap();
    let ms = models(&w, &u, Scope::Exact).unwrap().to_concrete();
    assert!(!ms.is_empty());
    for s in ms {
        assert_eq!(s.get(&"x".into()), 1);
        assert!(s.heap.is_empty());
    }
}

#[test]
fn error_moves_to_the_error_exit() {
    exact("x |-> 1", "error()", Exit::Er);
    exact("x |-> 1", "error()", Exit::Ok);
}

#[test]
fn memory_commands_are_exact() {
    exact("x |-> 1", "free(x)", Exit::Ok);
    exact("x |-> 1", "free(x)", Exit::Er);
    exact("arr(x, x + 2)", "y := [x + 1]", Exit::Ok);
    exact("arr(x, x + 2)", "[x + 2] := 1", Exit::Er);
    exact("emp", "x := alloc(2)", Exit::Ok);
    exact("arr(x, x + 2)", "[x + 1] := 3", Exit::Ok);
    exact("x !|->", "y := [x]", Exit::Er);
}

#[test]
fn loops_unroll_to_the_bound() {
    let p = a("emp * x == 0");
    let c = parse_command("{ x := x + 1 }*").unwrap();
    let budget = WpoBudget { loop_bound: 2, ..WpoBudget::default() };
    let w = wpo(&p, &c, Exit::Ok, &budget).unwrap();
    assert!(w.is_truncated());
    let u = Universe::covering(&[&p], &[&c], 4).unwrap();
    let mut xs: Vec<u64> =
        models(&w, &u, Scope::Exact).unwrap().to_concrete().iter().map(|s| s.get(&"x".into())).collect();
    xs.sort();
    xs.dedup();
    assert_eq!(xs, vec![0, 1, 2]);
}

#[test]
fn literal_load_over_approximates() {
    let p = a("arr(a, a + 2)");
    let c = parse_command("x := [a]").unwrap();
    let u = Universe::covering(&[&p], &[&c], 3).unwrap();
    let sem = wpo_semantic(&p, &c, Exit::Ok, &u).unwrap();
    let run = |variant| {
        let w = Wpo::new(WpoOptions { variant, ..Default::default() }).run(&p, &c, Exit::Ok).unwrap();
        models(&w, &u, Scope::Exact).unwrap()
    };
    let corrected = run(RuleVariant::Corrected);
    assert!(corrected.same_states(&sem));
    let literal = run(RuleVariant::Literal);
    assert!(sem.minus(&literal).is_empty());
    assert!(!literal.minus(&sem).is_empty());
}

#[test]
fn trace_records_rule_branches() {
    let p = a("x |-> 1");
    let c = parse_command("free(x)").unwrap();
    let mut w = Wpo::new(WpoOptions::default());
    w.run(&p, &c, Exit::Ok).unwrap();
    assert!(!w.trace().is_empty());
}
