use criterion::{criterion_group, criterion_main, Criterion};
use ext_forge::expr;
use ext_forge::fdmodule::FDModule;
use ext_forge::par;
use ext_forge::resolution::minimal_resolution;
use ext_forge::steenrod::Profile;

fn workloads() -> Vec<(&'static str, FDModule, i64, i64, (i64, i64))> {
    let a2 = Profile::new(2).unwrap();
    let pp = expr::parse("tensor(P[-3..],P[3..])").unwrap().instantiate(a2, 0, 41).unwrap();
    vec![("sphere A2 t<=40", FDModule::trivial(a2), 10, 40, (0, 30)), ("P_-3 ^ P_3 t<=40", pp, 10, 40, (0, 30))]
}

fn bench(c: &mut Criterion) {
    let mut g = c.benchmark_group("minimal_resolution");
    g.sample_size(10);
    for (name, m, max_s, max_t, stems) in workloads() {
        for seq in [false, true] {
            par::set_sequential(seq);
            let mode = if par::is_parallel() { "parallel" } else { "sequential" };
            g.bench_function(format!("{name} {mode}"), |b| b.iter(|| minimal_resolution(&m, max_s, max_t, stems).unwrap()));
        }
    }
    par::set_sequential(false);
    g.finish();
}

criterion_group!(benches, bench);
criterion_main!(benches);
