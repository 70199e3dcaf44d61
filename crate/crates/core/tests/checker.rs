use islarr_core::checker::{
    check_rule_instance, check_triple_both, check_triple_logical, check_triple_semantic, find_bugs, rule_names,
    SideConditions, Status, Triple,
};
use islarr_core::corpus::intro;
use islarr_core::semantics::{satisfies_naive, Universe};
use islarr_core::syntax::Exit;
use islarr_core::wpo::WpoBudget;

fn both(tr: &Triple, vmax: u64) -> Status {
    let u = tr.universe(vmax).unwrap();
    let b = check_triple_both(tr, &u, &WpoBudget::default()).unwrap();
    assert!(b.agree, "{tr}: {:?} vs {:?}", b.semantic.status, b.logical.status);
    b.status()
}

#[test]
fn freeing_a_cell_is_valid() {
    assert_eq!(both(&intro::free_cell().unwrap(), 4), Status::Valid);
}

#[test]
fn framing_a_duplicate_cell_is_invalid() {
    let tr = intro::unsound_frame().unwrap();
    let u = tr.universe(4).unwrap();
    let v = check_triple_semantic(&tr, &u).unwrap();
    assert_eq!(v.status, Status::Invalid);
    let w = v.witness.unwrap();
    assert!(w.is_exact());
    assert!(satisfies_naive(&w, &tr.post, 4));
    assert_eq!(check_triple_logical(&tr, &u, &WpoBudget::default()).unwrap().status, Status::Invalid);
}

#[test]
fn framing_an_error_triple_is_invalid() {
    assert_eq!(both(&intro::frame_er().unwrap(), 4), Status::Invalid);
}

#[test]
fn under_approximate_posts_are_valid_and_over_approximate_are_not() {
    let sub = Triple::parse("emp * x == 0", "x := x + 1 + x := x + 2", Exit::Ok, "emp * x == 1").unwrap();
    assert_eq!(both(&sub, 3), Status::Valid);
    let sup = Triple::parse("emp * x == 0", "x := x + 1", Exit::Ok, "emp * x <= 1").unwrap();
    assert_eq!(both(&sup, 3), Status::Invalid);
}

#[test]
fn freeing_inside_an_array_is_a_bug() {
    let (p, c) = intro::free_non_head().unwrap();
    let u = Universe::covering(&[&p], &[&c], 12).unwrap();
    let r = find_bugs(&p, &c, &u, &WpoBudget::default()).unwrap();
    assert!(!r.is_empty());
    assert!(r.er_disjuncts.iter().any(|d| d.witness.is_some()));
    assert!(r.er_disjuncts.iter().all(|d| d.source_command.as_deref() == Some("free(a + 1)")), "{r:?}");
}

#[test]
fn safe_programs_have_no_bugs() {
    let p = islarr_core::syntax::parse_assertion("x |-> 1").unwrap();
    let c = islarr_core::syntax::parse_command("[x] := 2").unwrap();
    let u = Universe::covering(&[&p], &[&c], 3).unwrap();
    assert!(find_bugs(&p, &c, &u, &WpoBudget::default()).unwrap().is_empty());
}

#[test]
fn rules_check_their_schema() {
    assert!(rule_names().contains(&"Skip"));
    let skip = Triple::parse("x |-> 1", "skip", Exit::Ok, "x |-> 1").unwrap();
    let side = SideConditions::default();
    assert!(check_rule_instance("Skip", &[], &side, &skip).unwrap().accepted);
    let bad = Triple::parse("x |-> 1", "skip", Exit::Ok, "x |-> 2").unwrap();
    assert!(!check_rule_instance("Skip", &[], &side, &bad).unwrap().accepted);
    assert!(check_rule_instance("NoSuchRule", &[], &side, &skip).is_err());
}
