use criterion::{criterion_group, criterion_main, Criterion};
use qfeff::kernel::{nf_atom, nf_mul, Algebra, Word};

fn bench_products(c: &mut Criterion) {
    let alg = Algebra::generic();
    let a = nf_atom(&alg, Word([1, 1, 0, 0]), alg.std.p);
    let b = nf_atom(&alg, Word([0, 0, 1, 1]), alg.std.hh);
    c.bench_function("product of second-derivative normal forms", |bch| {
        bch.iter(|| nf_mul(&a, &b))
    });
}

criterion_group!(benches, bench_products);
criterion_main!(benches);
