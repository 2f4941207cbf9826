//! End-to-end estimation and jackknife timing. Run once with the default
//! features and once with `--no-default-features` to compare the rayon and
//! sequential paths; the numbers themselves are identical either way.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use wincrt::dgp::{example_config, generate_trial};
use wincrt::jackknife::{jackknife_all, CiScale, DfRule};
use wincrt::win_estimators::estimate_triple;
use wincrt::WeightScheme;

fn bench_estimation(c: &mut Criterion) {
    let mut group = c.benchmark_group("estimate_and_jackknife");
    group.sample_size(10);
    for clusters in [50usize, 100, 200] {
        let mut config = example_config(true);
        config.clusters = clusters;
        let trial = generate_trial(&config, 0).unwrap();
        group.bench_with_input(
            BenchmarkId::new("individual_pair", clusters),
            &clusters,
            |b, _| {
                b.iter(|| {
                    let table =
                        estimate_triple::<f64>(&trial.dataset, &WeightScheme::IndividualPair)
                            .unwrap();
                    jackknife_all(
                        &trial.dataset,
                        &table,
                        0.95,
                        DfRule::MMinus2,
                        CiScale::Natural,
                    )
                    .unwrap()
                })
            },
        );
    }
    group.finish();
}

criterion_group!(benches, bench_estimation);
criterion_main!(benches);
