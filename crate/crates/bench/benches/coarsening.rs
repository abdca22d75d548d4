use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use mlpart_core::algdist::{algebraic_distances, RelaxationParams};
use mlpart_core::amg::{amg_level, AmgParams};
use mlpart_core::matching::{gpa_matching, rate_edges, EdgeRating};
use mlpart_core::{v_cycle, Config, Preset};
use mlpart_bench::fixtures;

fn coarsening(c: &mut Criterion) {
    let mut group = c.benchmark_group("coarsen_level");
    for (name, g) in fixtures() {
        group.bench_with_input(BenchmarkId::new("algebraic_distance", name), &g, |b, g| {
            b.iter(|| algebraic_distances(g, &RelaxationParams::default()).unwrap())
        });
        let rho = algebraic_distances(&g, &RelaxationParams::default()).unwrap();
        group.bench_with_input(BenchmarkId::new("gpa_exalg", name), &g, |b, g| {
            b.iter(|| {
                let ratings = rate_edges(g, EdgeRating::ExAlg, Some(&rho)).unwrap();
                gpa_matching(g, &ratings)
            })
        });
        group.bench_with_input(BenchmarkId::new("amg", name), &g, |b, g| {
            b.iter(|| amg_level(g, &rho, &AmgParams::default(), None))
        });
    }
    group.finish();
}

fn full_cycle(c: &mut Criterion) {
    let mut group = c.benchmark_group("v_cycle");
    group.sample_size(10);
    for (name, g) in fixtures() {
        for preset in [Preset::Eco, Preset::EcoAlg, Preset::AmgEco] {
            let config = Config::new(4, preset).with_seed(1);
            group.bench_with_input(BenchmarkId::new(preset.name(), name), &g, |b, g| {
                b.iter(|| v_cycle(g, &config).unwrap())
            });
        }
    }
    group.finish();
}

criterion_group!(benches, coarsening, full_cycle);
criterion_main!(benches);
