use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use wincrt::pair_engine::{brute_force_counts, fast_counts};

fn random_ranks(rng: &mut impl Rng, n: usize, levels: u32) -> Vec<u32> {
    (0..n).map(|_| rng.gen_range(0..levels)).collect()
}

fn bench_pair_counts(c: &mut Criterion) {
    let mut rng = ChaCha12Rng::seed_from_u64(1);
    let levels = 5;
    let mut group = c.benchmark_group("pair_counts");
    for n in [50usize, 200, 1000] {
        let treated = random_ranks(&mut rng, n, levels);
        let control = random_ranks(&mut rng, n, levels);
        group.bench_with_input(BenchmarkId::new("fast", n), &n, |b, _| {
            b.iter(|| fast_counts(&treated, &control, levels as usize))
        });
        group.bench_with_input(BenchmarkId::new("brute", n), &n, |b, _| {
            b.iter(|| brute_force_counts(&treated, &control))
        });
    }
    group.finish();
}

criterion_group!(benches, bench_pair_counts);
criterion_main!(benches);
