//! Hand-written test corpus: expressiveness cases covering every branch of
//! the memory-command postconditions, proof-rule instances, and the worked
//! examples used by the acceptance suite.

use crate::canonical::cano;
use crate::checker::{check_rule_instance, SideConditions, Triple};
use crate::error::Result;
use crate::syntax::{parse_assertion, parse_command, parse_heap, Assertion, Command, Exit, FreshGen};
use crate::wpo::{Wpo, WpoOptions};

/// One `(P, C, ε)` instance for the expressiveness oracle.
#[derive(Clone, Copy, Debug)]
pub struct ExprCase {
    pub name: &'static str,
    pub pre: &'static str,
    pub prog: &'static str,
    pub exit: Exit,
    pub vmax: u64,
}

impl ExprCase {
    pub fn parse(&self) -> Result<(Assertion, Command)> {
        Ok((parse_assertion(self.pre)?, parse_command(self.prog)?))
    }
}

const fn case(name: &'static str, pre: &'static str, prog: &'static str, exit: Exit, vmax: u64) -> ExprCase {
    ExprCase { name, pre, prog, exit, vmax }
}

use Exit::{Er, Ok as OkE};

/// Branch labels of the memory-command postconditions that the corpus must
/// exercise.
pub const BRANCH_LABELS: &[&str] = &[
    "error",
    "alloc.fresh",
    "alloc.split_both",
    "alloc.split_right",
    "alloc.split_left",
    "alloc.split_none",
    "free.inner_both",
    "free.start_at_base",
    "free.whole_blocks",
    "free.end_at_end",
    "free.er",
    "load.pointsto",
    "load.array",
    "load.er",
    "store.pointsto",
    "store.single",
    "store.head",
    "store.middle",
    "store.tail",
    "store.er",
];

/// Hand-written expressiveness cases.
pub fn expressiveness_cases() -> Vec<ExprCase> {
    vec![
        case("skip ok", "emp", "skip", OkE, 4),
        case("skip er", "x |-> 1", "skip", Er, 4),
        case("error er", "x == 1", "error()", Er, 4),
        case("error ok", "emp", "error()", OkE, 4),
        case("assign", "x |-> y", "x := x + 1", OkE, 4),
        case("havoc", "x |-> 2", "x := *", OkE, 4),
        case("assume", "arr(x, x + 2)", "assume(y < x + 1)", OkE, 4),
        case("assume ne", "x |-> -", "assume(x != 2)", OkE, 4),
        case("local", "x |-> 1", "local y in { y := [x]; [x] := y }", OkE, 4),
        case("local init", "x |-> 1", "local y := 2 in { [x] := y }", OkE, 4),
        case("double free", "x |-> -", "free(x); free(x)", Er, 4),
        case("choice", "x |-> -", "{ free(x) } + { [x] := 2 }", OkE, 4),
        case("alloc fresh", "emp", "x := alloc(2)", OkE, 5),
        case("alloc into hole", "narr(a, c)", "x := alloc(2)", OkE, 5),
        case("alloc two holes", "narr(a, a + 1) * narr(c, c + 1)", "x := alloc(1)", OkE, 5),
        case("alloc er", "emp", "x := alloc(1)", Er, 4),
        case("free whole", "x |-> -", "free(x)", OkE, 4),
        case("free er on cell", "x |-> -", "free(x)", Er, 4),
        case("free non-head", "arr(a, a + 3) * b(a) == a * e(a) == a + 3", "free(a + 1)", Er, 5),
        case("free inside array", "arr(a, c) * a < y * y < c", "free(y)", OkE, 5),
        case("free array start", "arr(a, c)", "free(a)", OkE, 5),
        case("free across atoms", "a |-> 1 * arr(a + 1, a + 2)", "free(a)", OkE, 5),
        case("load cell", "x |-> 3", "y := [x]", OkE, 4),
        case("load array", "arr(x, x + 3)", "y := [x + 1]", OkE, 5),
        case("load unknown", "emp", "y := [x]", Er, 4),
        case("load past end", "arr(x, x + 2)", "y := [x + 2]", Er, 4),
        case("load array ok or er", "arr(x, x + 2)", "y := [z]", OkE, 4),
        case("store cell", "x |-> 1", "[x] := 2", OkE, 4),
        case("store single", "arr(x, x + 1)", "[x] := y", OkE, 4),
        case("store positions", "arr(x, y)", "[z] := 1", OkE, 4),
        case("store er", "emp", "[x] := 1", Er, 4),
        case("alloc store free", "emp", "x := alloc(1); [x] := 2; free(x)", OkE, 4),
        case("alloc then bad free", "emp", "x := alloc(1); free(x + 1)", Er, 4),
        case("use after free", "x |-> 1", "free(x); y := [x]", Er, 4),
        case("counter loop", "x == 0", "{ x := x + 1 }*", OkE, 4),
        case("free in loop", "x |-> -", "{ free(x) }*", Er, 4),
    ]
}

/// A proof-rule instance with its expected outcome.
#[derive(Clone, Debug)]
pub struct RuleInstance {
    pub name: String,
    pub rule: String,
    pub premises: Vec<Triple>,
    pub side: SideConditions,
    pub conclusion: Triple,
    /// Whether the rule checker should accept the instance.
    pub expect_accept: bool,
    /// The rule as originally stated is known to admit invalid conclusions.
    pub known_unsound: bool,
}

fn tri(pre: &str, prog: &str, exit: Exit, post: &str) -> Result<Triple> {
    Triple::parse(pre, prog, exit, post)
}

struct Builder(Vec<RuleInstance>);

impl Builder {
    fn add(&mut self, name: &str, rule: &str, premises: Vec<Triple>, conclusion: Triple, expect_accept: bool) {
        self.add_with(name, rule, premises, SideConditions::default(), conclusion, expect_accept);
    }

    fn add_with(
        &mut self,
        name: &str,
        rule: &str,
        premises: Vec<Triple>,
        side: SideConditions,
        conclusion: Triple,
        expect_accept: bool,
    ) {
        self.0.push(RuleInstance {
            name: name.into(),
            rule: rule.into(),
            premises,
            side,
            conclusion,
            expect_accept,
            known_unsound: false,
        });
    }
}

/// Instances of the structural rules, written out by hand.
pub fn structural_rule_instances() -> Result<Vec<RuleInstance>> {
    let mut b = Builder(Vec::new());
    let inc = "exists a. a == 0 * x == a + 1";
    b.add("skip ok", "Skip", vec![], tri("x |-> 1", "skip", OkE, "x |-> 1")?, true);
    b.add("skip er", "Skip", vec![], tri("x |-> 1", "skip", Er, "false")?, true);
    b.add("skip wrong post", "Skip", vec![], tri("x |-> 1", "skip", OkE, "x |-> 2")?, false);
    b.add("error ok", "Error", vec![], tri("x == 1", "error()", OkE, "false")?, true);
    b.add("error er", "Error", vec![], tri("x == 1", "error()", Er, "x == 1")?, true);
    b.add(
        "seq1",
        "Seq1",
        vec![tri("x == 1", "error()", Er, "x == 1")?],
        tri("x == 1", "error(); x := 2", Er, "x == 1")?,
        true,
    );
    b.add(
        "seq2",
        "Seq2",
        vec![tri("x == 0", "x := x + 1", OkE, inc)?, tri(inc, "skip", OkE, inc)?],
        tri("x == 0", "x := x + 1; skip", OkE, inc)?,
        true,
    );
    b.add("loop zero ok", "LoopZero", vec![], tri("x == 0", "{ x := x + 1 }*", OkE, "x == 0")?, true);
    b.add("loop zero er", "LoopZero", vec![], tri("x == 0", "{ x := x + 1 }*", Er, "false")?, true);
    b.add(
        "loop non-zero",
        "LoopNonZero",
        vec![tri("x == 0", "{ x := x + 1 }*; x := x + 1", OkE, inc)?],
        tri("x == 0", "{ x := x + 1 }*", OkE, inc)?,
        true,
    );
    b.add(
        "cons strengthen",
        "Cons",
        vec![tri("x |-> 1 * y == 2", "skip", OkE, "x |-> 1 * y == 2")?],
        tri("x |-> 1", "skip", OkE, "x |-> 1 * y == 2 * y < 3")?,
        true,
    );
    b.add(
        "cons reflexive",
        "Cons",
        vec![tri("x |-> 1", "[x] := 2", OkE, "x |-> 2")?],
        tri("x |-> 1", "[x] := 2", OkE, "x |-> 2")?,
        true,
    );
    b.add(
        "cons weakened post",
        "Cons",
        vec![tri("x |-> 1", "[x] := 2", OkE, "x |-> 2")?],
        tri("x |-> 1", "[x] := 2", OkE, "exists v. x |-> v")?,
        false,
    );
    b.add(
        "disj",
        "Disj",
        vec![
            tri("x == 1", "x := 2", OkE, "exists a. a == 1 * x == 2")?,
            tri("x == 3", "x := 2", OkE, "exists a. a == 3 * x == 2")?,
        ],
        tri("x == 1 \\/ x == 3", "x := 2", OkE, "exists a. a == 1 * x == 2 \\/ exists a. a == 3 * x == 2")?,
        true,
    );
    b.add(
        "choice",
        "Choice",
        vec![tri("x == 1", "skip", OkE, "x == 1")?, tri("x == 1", "assume(x == 1)", OkE, "x == 1")?],
        tri("x == 1", "{ skip } + { assume(x == 1) }", OkE, "x == 1")?,
        true,
    );
    b.add(
        "exist",
        "Exist",
        vec![tri("x |-> y", "skip", OkE, "x |-> y")?],
        tri("exists y. x |-> y", "skip", OkE, "exists y. x |-> y")?,
        true,
    );
    b.add(
        "exist over a modified variable",
        "Exist",
        vec![tri("x == 1", "x := 2", OkE, "exists a. a == 1 * x == 2")?],
        tri("exists x. x == 1", "x := 2", OkE, "exists x a. a == 1 * x == 2")?,
        false,
    );
    b.add("assign", "Assign", vec![], tri("x |-> 1", "x := 2", OkE, "exists a. a |-> 1 * x == 2")?, true);
    b.add("assign self", "Assign", vec![], tri("x == 1", "x := x + 1", OkE, "exists a. a == 1 * x == a + 1")?, true);
    b.add("assign er", "Assign", vec![], tri("x |-> 1", "x := 2", Er, "false")?, true);
    b.add("havoc", "Havoc", vec![], tri("x == 1 * y |-> x", "x := *", OkE, "exists a. a == 1 * y |-> a")?, true);
    b.add("assume", "Assume", vec![], tri("x |-> 1", "assume(x < 3)", OkE, "x |-> 1 * x < 3")?, true);
    b.add("assume er", "Assume", vec![], tri("x |-> 1", "assume(x < 3)", Er, "false")?, true);
    b.add(
        "local",
        "Local",
        vec![tri("x |-> 1", "y := 2", OkE, "exists a. x |-> 1 * y == 2")?],
        tri("x |-> 1", "local y in { y := 2 }", OkE, "exists y a. x |-> 1 * y == 2")?,
        true,
    );
    b.add_with(
        "frame store",
        "FrameOk",
        vec![tri("x |-> 1", "[x] := 2", OkE, "x |-> 2")?],
        SideConditions { frame: Some(parse_heap("y |-> 3")?), ..Default::default() },
        tri("x |-> 1 * y |-> 3", "[x] := 2", OkE, "x |-> 2 * y |-> 3")?,
        true,
    );
    b.add_with(
        "frame assign",
        "FrameOk",
        vec![tri("emp", "x := 1", OkE, "exists a. emp * x == 1")?],
        SideConditions { frame: Some(parse_heap("y |-> 2")?), ..Default::default() },
        tri("y |-> 2", "x := 1", OkE, "exists a. y |-> 2 * x == 1")?,
        true,
    );
    b.add_with(
        "frame er",
        "FrameOk",
        vec![tri("x != null * emp", "free(x)", Er, "x != null * emp")?],
        SideConditions { frame: Some(parse_heap("x |-> 1")?), ..Default::default() },
        tri("x != null * emp * x |-> 1", "free(x)", Er, "x != null * emp * x |-> 1")?,
        false,
    );
    b.add_with(
        "frame over a modified variable",
        "FrameOk",
        vec![tri("emp", "x := 1", OkE, "exists a. emp * x == 1")?],
        SideConditions { frame: Some(parse_heap("x |-> 2")?), ..Default::default() },
        tri("x |-> 2", "x := 1", OkE, "exists a. x |-> 2 * x == 1")?,
        false,
    );
    b.add("alloc er", "AllocEr", vec![], tri("emp", "x := alloc(2)", Er, "false")?, true);
    Ok(b.0)
}

/// Preconditions and memory commands from which rule instances are derived.
pub const HEAP_SEEDS: &[(&str, &str)] = &[
    ("emp", "x := alloc(1)"),
    ("narr(a, a + 3)", "x := alloc(1)"),
    ("narr(a, a + 1) * narr(a + 2, a + 3)", "x := alloc(2)"),
    ("arr(a, a + 2)", "free(a)"),
    ("arr(a, a + 3)", "free(a + 1)"),
    ("a |-> 1 * arr(a + 1, a + 2)", "free(a)"),
    ("a |-> 1", "x := [a]"),
    ("arr(a, a + 2)", "x := [a + 1]"),
    ("arr(a, a + 2)", "x := [a]"),
    ("emp", "x := [a]"),
    ("a |-> 1", "[a] := 2"),
    ("arr(a, a + 1)", "[a] := 0"),
    ("arr(a, a + 2)", "[a] := 1"),
    ("arr(a, a + 3)", "[a + 1] := 0"),
    ("arr(a, a + 2)", "[a + 1] := 1"),
    ("emp", "[a] := 1"),
];

fn candidates(c: &Command) -> &'static [&'static str] {
    match c {
        Command::Alloc(..) => &["Alloc1", "Alloc2", "Alloc3", "Alloc4", "Alloc5", "AllocEr"],
        Command::Free(_) => &["FreeArr1", "FreeArr2", "FreeArr3", "FreeArr4", "FreeEr"],
        Command::Load(..) => &["LoadPtr", "LoadArr", "LoadEr"],
        Command::Store(..) => &["StorePtr", "StoreArr1", "StoreArr2", "StoreArr3", "StoreArrSingle", "StoreEr"],
        _ => &[],
    }
}

/// Instances of the memory rules: every canonical case of each seed
/// precondition, paired with each satisfiable disjunct of its computed
/// postcondition, labelled with the first rule that accepts it. At most
/// `per_rule` instances are kept for each rule.
pub fn derived_heap_instances(per_rule: usize) -> Result<Vec<RuleInstance>> {
    let mut out: Vec<RuleInstance> = Vec::new();
    let mut count = std::collections::BTreeMap::<String, usize>::new();
    for (pre, prog) in HEAP_SEEDS {
        let p = parse_assertion(pre)?;
        let c = parse_command(prog)?;
        let mut fresh = FreshGen::avoiding(&p.free_vars());
        fresh.reserve_command(&c);
        let canon = cano(&p, &c, &Default::default(), &mut fresh)?;
        let mut w = Wpo::new(WpoOptions::default());
        w.reserve(&canon, &c);
        for d in &canon.disjuncts {
            let psi = Assertion::single(d.body.clone());
            for exit in [Exit::Ok, Exit::Er] {
                let post = w.wpo_sh(&d.body, &c, exit)?;
                let posts: Vec<Assertion> = match (&c, exit) {
                    (Command::Alloc(..), Exit::Ok) => {
                        post.disjuncts.iter().map(|x| Assertion::from_disjuncts(vec![x.clone()])).collect()
                    }
                    _ => vec![post],
                };
                for q in posts {
                    if q.is_false() && !matches!(c, Command::Alloc(..)) {
                        continue;
                    }
                    let concl = Triple::new(psi.clone(), c.clone(), exit, q);
                    for rule in candidates(&c) {
                        let r = check_rule_instance(rule, &[], &SideConditions::default(), &concl)?;
                        if !r.accepted {
                            continue;
                        }
                        let n = count.entry(r.rule.clone()).or_insert(0);
                        if *n < per_rule {
                            *n += 1;
                            out.push(RuleInstance {
                                name: format!("{} from [{pre}] {prog} #{n}", r.rule),
                                rule: r.rule.clone(),
                                premises: vec![],
                                side: SideConditions::default(),
                                conclusion: concl.clone(),
                                expect_accept: true,
                                known_unsound: false,
                            });
                        }
                        break;
                    }
                }
            }
        }
    }
    Ok(out)
}

/// The literal array-load rule applied to a canonical precondition. The
/// rule checker accepts it, yet the conclusion is not valid.
pub fn literal_load_instance() -> Result<RuleInstance> {
    let p = parse_assertion("arr(a, a + 2)")?;
    let c = parse_command("x := [a]")?;
    let mut fresh = FreshGen::avoiding(&p.free_vars());
    fresh.reserve_command(&c);
    let canon = cano(&p, &c, &Default::default(), &mut fresh)?;
    let mut w = Wpo::new(WpoOptions { variant: crate::wpo::RuleVariant::Literal, ..Default::default() });
    w.reserve(&canon, &c);
    for d in &canon.disjuncts {
        let post = w.wpo_sh(&d.body, &c, Exit::Ok)?;
        if post.is_false() {
            continue;
        }
        let concl = Triple::new(Assertion::single(d.body.clone()), c.clone(), Exit::Ok, post);
        return Ok(RuleInstance {
            name: "literal array load".into(),
            rule: "LoadArrLiteral".into(),
            premises: vec![],
            side: SideConditions::default(),
            conclusion: concl,
            expect_accept: true,
            known_unsound: true,
        });
    }
    Err(crate::IslError::Precondition("no satisfiable case for the literal load".into()))
}

/// Structural instances, derived memory instances, and the literal load.
pub fn rule_instances(per_rule: usize) -> Result<Vec<RuleInstance>> {
    let mut v = structural_rule_instances()?;
    v.extend(derived_heap_instances(per_rule)?);
    v.push(literal_load_instance()?);
    Ok(v)
}

/// The small examples from the introduction of the logic.
pub mod intro {
    use super::*;

    /// `[x ↦ -] free(x) [ok: x !↦]`.
    pub fn free_cell() -> Result<Triple> {
        tri("x |-> -", "free(x)", OkE, "x !|->")
    }

    /// Framing `x ↦ -` onto the previous triple: not valid.
    pub fn unsound_frame() -> Result<Triple> {
        tri("x |-> - * x |-> -", "free(x)", OkE, "emp * x |-> -")
    }

    /// Framing onto an er triple.
    pub fn frame_er() -> Result<Triple> {
        tri("x != null * emp * x |-> 1", "free(x)", Er, "x != null * emp * x |-> 1")
    }

    /// Freeing an array at a non-head position: precondition and command.
    pub fn free_non_head() -> Result<(Assertion, Command)> {
        Ok((
            parse_assertion("arr(a, a + 10) * b(a) == a * e(a) == a + 10")?,
            parse_command("free(a + 1)")?,
        ))
    }
}
