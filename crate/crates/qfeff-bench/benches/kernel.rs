use criterion::{criterion_group, criterion_main, Criterion};
use qfeff::kernel::{nf_atom, Algebra, Word};

fn bench_reorder(c: &mut Criterion) {
    let alg = Algebra::generic();
    c.bench_function("normalize D1 D2 D0 word on a free atom", |b| {
        b.iter(|| nf_atom(&alg, Word([2, 2, 1, 0]), alg.std.x))
    });
}

criterion_group!(benches, bench_reorder);
criterion_main!(benches);
