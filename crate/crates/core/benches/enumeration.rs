use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use islarr_core::checker::expressiveness_diff;
use islarr_core::par;
use islarr_core::semantics::{models, Scope, Universe};
use islarr_core::syntax::{parse_assertion, parse_command, Exit};
use islarr_core::wpo::{wpo, WpoBudget};

fn bench_models(c: &mut Criterion) {
    let p = parse_assertion("arr(x, y) * z < y").unwrap();
    let cmd = parse_command("[z] := 1").unwrap();
    let w = wpo(&p, &cmd, Exit::Ok, &WpoBudget::default()).unwrap();
    let u = Universe::covering(&[&w], &[&cmd], 6).unwrap();
    let mut g = c.benchmark_group("models");
    for seq in [false, true] {
        let id = if seq { "sequential" } else { "parallel" };
        g.bench_with_input(BenchmarkId::new("store_wpo", id), &seq, |b, &seq| {
            par::set_sequential(seq);
            b.iter(|| models(&w, &u, Scope::Exact).unwrap().len());
        });
    }
    g.finish();
    par::set_sequential(false);
}

fn bench_diff(c: &mut Criterion) {
    let p = parse_assertion("narr(a, c)").unwrap();
    let cmd = parse_command("x := alloc(2)").unwrap();
    let u = Universe::covering(&[&p], &[&cmd], 5).unwrap();
    let budget = WpoBudget::default();
    let mut g = c.benchmark_group("expressiveness_diff");
    g.sample_size(10);
    for seq in [false, true] {
        let id = if seq { "sequential" } else { "parallel" };
        g.bench_with_input(BenchmarkId::new("alloc_into_hole", id), &seq, |b, &seq| {
            par::set_sequential(seq);
            b.iter(|| expressiveness_diff(&p, &cmd, Exit::Ok, &u, &budget).unwrap().is_empty());
        });
    }
    g.finish();
    par::set_sequential(false);
}

criterion_group!(benches, bench_models, bench_diff);
criterion_main!(benches);
