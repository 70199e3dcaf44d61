//! Acceptance suite. Runs every criterion, prints one line per criterion and
//! exits non-zero if any of them fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use islarr_core::canonical::{cano, case_terms, is_canonical, CanoOptions};
use islarr_core::checker::{
    check_rule_instance, check_triple_both, check_triple_semantic, expressiveness_diff, find_bugs, DiffStatus,
    Status, Triple,
};
use islarr_core::corpus::{expressiveness_cases, intro, rule_instances, BRANCH_LABELS};
use islarr_core::entailment::PureSolver;
use islarr_core::gen::{random_cases, GenConfig};
use islarr_core::par;
use islarr_core::semantics::{denote, models, wpo_semantic, CompiledAssertion, ConcreteState, Scope, Universe};
use islarr_core::syntax::{parse_assertion, parse_command, Assertion, Command, Exit, FreshGen, PureAtom, Term};
use islarr_core::wpo::{Wpo, WpoBudget, WpoOptions};

const RANDOM_SEED: u64 = 42;
const RANDOM_COUNT: usize = 200;
const RANDOM_VMAX: u64 = 6;
const CASE_CAP: usize = 24;

type Outcome = Result<String, String>;

/// One `(P, C, ε)` entry of the corpus with the universe bound to use.
#[derive(Clone)]
struct Entry {
    name: String,
    pre: Assertion,
    prog: Command,
    exit: Exit,
    vmax: u64,
}

fn corpus() -> Vec<Entry> {
    let mut v: Vec<Entry> = expressiveness_cases()
        .into_iter()
        .map(|c| {
            let (pre, prog) = c.parse().expect("corpus parses");
            Entry { name: c.name.into(), pre, prog, exit: c.exit, vmax: c.vmax }
        })
        .collect();
    for g in random_cases(RANDOM_SEED, RANDOM_COUNT, GenConfig::default()) {
        v.push(Entry { name: format!("random #{}", g.index), pre: g.pre, prog: g.prog, exit: g.exit, vmax: RANDOM_VMAX });
    }
    v
}

fn budget() -> WpoBudget {
    WpoBudget { cano: CanoOptions { case_cap: CASE_CAP, ..Default::default() }, ..Default::default() }
}

fn universe(e: &Entry) -> Universe {
    Universe::covering(&[&e.pre], &[&e.prog], e.vmax).expect("universe")
}

fn first_failures(v: Vec<String>) -> Outcome {
    if v.is_empty() {
        Ok(String::new())
    } else {
        let n = v.len();
        Err(format!("{n} failing: {}", v.into_iter().take(3).collect::<Vec<_>>().join("; ")))
    }
}

fn criterion_1() -> Outcome {
    let entries = corpus();
    let hand = expressiveness_cases().len();
    if hand < 30 {
        return Err(format!("only {hand} hand-written cases"));
    }
    let mut trace = std::collections::BTreeMap::new();
    for e in &entries[..hand] {
        let mut w = Wpo::new(WpoOptions { budget: budget(), ..Default::default() });
        w.run(&e.pre, &e.prog, e.exit).map_err(|x| format!("{}: {x}", e.name))?;
        for (k, n) in w.trace() {
            *trace.entry(*k).or_insert(0usize) += n;
        }
    }
    let uncovered: Vec<&str> = BRANCH_LABELS.iter().copied().filter(|l| !trace.contains_key(l)).collect();
    if !uncovered.is_empty() {
        return Err(format!("branches not exercised: {uncovered:?}"));
    }
    let bad = par::map(&entries, |e| match expressiveness_diff(&e.pre, &e.prog, e.exit, &universe(e), &budget()) {
        // Loops are compared at matched unrolling depth, hence a bounded pass.
        Ok(r) if r.is_empty() && (r.status == DiffStatus::Pass || e.prog.has_star()) => None,
        Ok(r) => Some(format!("{} ({:?}, {} extra, {} missing)", e.name, r.status, r.extra_count, r.missing_count)),
        Err(x) => Some(format!("{}: {x}", e.name)),
    });
    first_failures(bad.into_iter().flatten().collect())?;
    Ok(format!("{hand} hand-written + {RANDOM_COUNT} random, {} branches covered", BRANCH_LABELS.len()))
}

fn criterion_2() -> Outcome {
    let instances = rule_instances(3).map_err(|e| e.to_string())?;
    let mut failures = Vec::new();
    let mut accepted = std::collections::BTreeSet::new();
    let mut literal_invalid = false;
    for i in &instances {
        let r = check_rule_instance(&i.rule, &i.premises, &i.side, &i.conclusion).map_err(|e| e.to_string())?;
        if r.accepted != i.expect_accept {
            failures.push(format!("{}: accepted={} ({})", i.name, r.accepted, r.reason));
        }
        if !r.accepted {
            continue;
        }
        accepted.insert(r.rule.clone());
        for vmax in [5, 7] {
            let u = i.conclusion.universe(vmax).map_err(|e| e.to_string())?;
            let v = check_triple_semantic(&i.conclusion, &u).map_err(|e| e.to_string())?;
            if i.known_unsound {
                literal_invalid |= v.status == Status::Invalid;
            } else if v.status != Status::Valid {
                failures.push(format!("{} at vmax {vmax}: {}", i.name, v.status));
            }
        }
    }
    let missing: Vec<&str> =
        islarr_core::checker::rule_names().into_iter().filter(|r| !accepted.contains(*r)).collect();
    if !missing.is_empty() {
        failures.push(format!("no accepted instance of {missing:?}"));
    }
    if !literal_invalid {
        failures.push("literal array-load instance was expected to be invalid".into());
    }
    first_failures(failures)?;
    Ok(format!(
        "{} instances, {} rules; literal array-load rule accepted but invalid as expected",
        instances.len(),
        accepted.len()
    ))
}

fn criterion_3() -> Outcome {
    let entries: Vec<Entry> = corpus().into_iter().filter(|e| !e.prog.has_star()).collect();
    let bad = par::map(&entries, |e| {
        let w = match islarr_core::wpo::wpo(&e.pre, &e.prog, e.exit, &budget()) {
            Ok(w) => w,
            Err(x) => return Some(format!("{}: {x}", e.name)),
        };
        let tr = Triple::new(e.pre.clone(), e.prog.clone(), e.exit, w);
        match check_triple_semantic(&tr, &universe(e)) {
            Ok(v) if v.status == Status::Valid => None,
            Ok(v) => Some(format!("{}: {}", e.name, v.status)),
            Err(x) => Some(format!("{}: {x}", e.name)),
        }
    });
    first_failures(bad.into_iter().flatten().collect())?;
    Ok(format!("{} loop-free entries", entries.len()))
}

fn criterion_4() -> Outcome {
    let mut triples: Vec<(String, Triple, u64)> = Vec::new();
    for e in corpus() {
        let w = islarr_core::wpo::wpo(&e.pre, &e.prog, e.exit, &budget()).map_err(|x| format!("{}: {x}", e.name))?;
        triples.push((format!("wpo of {}", e.name), Triple::new(e.pre.clone(), e.prog.clone(), e.exit, w), e.vmax));
        // The same program against an unrelated postcondition.
        let post = parse_assertion("x |-> 1").unwrap();
        triples.push((format!("cell post for {}", e.name), Triple::new(e.pre, e.prog, e.exit, post), e.vmax.min(4)));
    }
    for i in rule_instances(3).map_err(|e| e.to_string())? {
        triples.push((i.name.clone(), i.conclusion.clone(), 5));
    }
    for (n, t) in [("intro a", intro::free_cell()), ("intro b", intro::unsound_frame()), ("intro c", intro::frame_er())] {
        triples.push((n.into(), t.map_err(|e| e.to_string())?, 4));
    }
    let bad = par::map(&triples, |(name, tr, vmax)| {
        let u = tr.universe(*vmax).ok()?;
        match check_triple_both(tr, &u, &budget()) {
            Ok(b) if !b.agree => Some(format!("{name}: semantic {} logical {}", b.semantic.status, b.logical.status)),
            Ok(b) if b.semantic.status == Status::Valid && !b.logical.status.eq(&Status::Valid) => {
                if b.logical.status == Status::BoundedValid && tr.prog.has_star() {
                    None
                } else {
                    Some(format!("{name}: semantic valid, logical {}", b.logical.status))
                }
            }
            Ok(_) => None,
            Err(x) => Some(format!("{name}: {x}")),
        }
    });
    first_failures(bad.into_iter().flatten().collect())?;
    Ok(format!("{} triples", triples.len()))
}

fn invalid_with_witness(tr: &Triple, vmax: u64) -> Result<(), String> {
    let u = tr.universe(vmax).map_err(|e| e.to_string())?;
    let v = check_triple_semantic(tr, &u).map_err(|e| e.to_string())?;
    if v.status != Status::Invalid {
        return Err(format!("{tr} is {}", v.status));
    }
    let w = v.witness.ok_or("no witness")?;
    let post = CompiledAssertion::new(&tr.post, &u).map_err(|e| e.to_string())?;
    let reach = wpo_semantic(&tr.pre, &tr.prog, tr.exit, &u.clone().with_loop_bound(usize::MAX))
        .map_err(|e| e.to_string())?;
    if post.holds(&w) != Some(true) || reach.contains(&w) {
        return Err(format!("witness {w} does not refute {tr}"));
    }
    Ok(())
}

fn criterion_5() -> Outcome {
    let a = intro::free_cell().map_err(|e| e.to_string())?;
    let va = check_triple_semantic(&a, &a.universe(4).unwrap()).map_err(|e| e.to_string())?;
    if va.status != Status::Valid {
        return Err(format!("(a) is {}", va.status));
    }
    invalid_with_witness(&intro::unsound_frame().map_err(|e| e.to_string())?, 4).map_err(|e| format!("(b) {e}"))?;
    invalid_with_witness(&intro::frame_er().map_err(|e| e.to_string())?, 4).map_err(|e| format!("(c) {e}"))?;

    let (p, c) = intro::free_non_head().map_err(|e| e.to_string())?;
    let u = Universe::covering(&[&p], &[&c], 11).map_err(|e| e.to_string())?;
    let report = find_bugs(&p, &c, &u, &budget()).map_err(|e| e.to_string())?;
    // Disjuncts whose models need values beyond vmax carry no witness.
    let witnesses: Vec<&ConcreteState> = report.er_disjuncts.iter().filter_map(|d| d.witness.as_ref()).collect();
    if witnesses.is_empty() {
        return Err("(d) no er disjunct has a witness".into());
    }
    // A faulting free leaves the state unchanged, so a witness is
    // er-reachable iff it satisfies P and C errs from it into itself.
    let pre = CompiledAssertion::new(&p, &u).map_err(|e| e.to_string())?;
    for w in witnesses {
        let errs = denote(&c, w, Exit::Er, &u).map_err(|e| e.to_string())?;
        if pre.holds(w) != Some(true) || !errs.contains(w) {
            return Err(format!("(d) witness {w} is not er-reachable"));
        }
    }
    let t = Term::add(Term::var("a"), Term::Nat(1));
    let guard = PureAtom::ne(Term::base(t.clone()), t);
    let w = islarr_core::wpo::wpo(&p, &c, Exit::Er, &budget()).map_err(|e| e.to_string())?;
    let ok = w.disjuncts.iter().any(|d| {
        let s = PureSolver::for_heap(&d.body);
        s.is_sat() && s.entails(&guard)
    });
    if !ok {
        return Err("(d) no er disjunct entails b(a + 1) != a + 1".into());
    }
    if report.er_disjuncts.iter().any(|d| d.source_command.as_deref() != Some("free(a + 1)")) {
        return Err("(d) faulting command not reported".into());
    }
    Ok(format!("(a) valid, (b) (c) invalid with witness, (d) {} er disjuncts", report.er_disjuncts.len()))
}

fn criterion_6() -> Outcome {
    let cases = random_cases(RANDOM_SEED + 1, 100, GenConfig::default());
    let bad = par::map(&cases, |g| {
        let mut fresh = FreshGen::avoiding(&g.pre.free_vars());
        fresh.reserve_command(&g.prog);
        let cp = match cano(&g.pre, &g.prog, &budget().cano, &mut fresh) {
            Ok(c) => c,
            Err(x) => return Some(format!("#{}: {x}", g.index)),
        };
        for d in &cp.disjuncts {
            if !is_canonical(&d.body, &case_terms(&d.body, &g.prog)) {
                return Some(format!("#{}: {} is not canonical", g.index, d));
            }
        }
        let u = Universe::covering(&[&g.pre], &[&g.prog], 5).ok()?;
        for scope in [Scope::Exact, Scope::All] {
            let a = models(&g.pre, &u, scope).ok()?;
            let b = models(&cp, &u, scope).ok()?;
            if !a.same_states(&b) {
                return Some(format!("#{}: models differ ({} vs {})", g.index, a.len(), b.len()));
            }
        }
        None
    });
    first_failures(bad.into_iter().flatten().collect())?;
    Ok(format!("{} random (P, C)", cases.len()))
}

fn criterion_7() -> Outcome {
    let p = parse_assertion("x == 0 * emp").unwrap();
    let c = parse_command("{ x := x + 1 }*").unwrap();
    let u = Universe::covering(&[&p], &[&c], 5).map_err(|e| e.to_string())?;
    let mut sizes = Vec::new();
    for k in 0..=3 {
        let b = WpoBudget { loop_bound: k, ..budget() };
        let r = expressiveness_diff(&p, &c, Exit::Ok, &u, &b).map_err(|e| e.to_string())?;
        if !r.is_empty() {
            return Err(format!("k = {k}: {} extra, {} missing", r.extra_count, r.missing_count));
        }
        // Independent unrolling: the union of C^m for m <= k, without the star.
        let mut union = Vec::new();
        let mut prog = Command::Skip;
        for _ in 0..=k {
            union.extend(wpo_semantic(&p, &prog, Exit::Ok, &u).map_err(|e| e.to_string())?.to_concrete());
            prog = Command::seq(prog, parse_command("x := x + 1").unwrap());
        }
        union.sort();
        union.dedup();
        let w = islarr_core::wpo::wpo(&p, &c, Exit::Ok, &b).map_err(|e| e.to_string())?;
        let mut sym = models(&w, &u, Scope::Exact).map_err(|e| e.to_string())?.to_concrete();
        sym.sort();
        if sym != union {
            return Err(format!("k = {k}: {} models, {} unrolled states", sym.len(), union.len()));
        }
        sizes.push(sym.len());
    }
    Ok(format!("model counts {sizes:?} for k = 0..=3"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 7] = [
        ("1 expressiveness", criterion_1),
        ("2 soundness of rule instances", criterion_2),
        ("3 wpo triples are valid", criterion_3),
        ("4 semantic and logical checks agree", criterion_4),
        ("5 introductory examples", criterion_5),
        ("6 canonicalisation", criterion_6),
        ("7 loop bounding", criterion_7),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        let t = Instant::now();
        let r = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| Err("panicked".into()));
        let secs = t.elapsed().as_secs_f64();
        match r {
            Ok(msg) => println!("criterion {name}: PASS ({secs:.1}s) {msg}"),
            Err(msg) => {
                failed += 1;
                println!("criterion {name}: FAIL ({secs:.1}s) {msg}");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
