//! Benchmarks of the census inner loops. Build with the default features
//! for the rayon path and with `--no-default-features` for the sequential
//! fallback; the group names carry the mode so the two runs can be compared
//! side by side in the criterion report.

use criterion::{criterion_group, criterion_main, Criterion};

use genericity::counting;
use genericity::psl2z::{self, FareyVertex};
use genericity::{garside, Word};

#[cfg(feature = "parallel")]
const MODE: &str = "parallel";
#[cfg(not(feature = "parallel"))]
const MODE: &str = "sequential";

fn bench_rigid_census(c: &mut Criterion) {
    let aut = psl2z::build_automaton().automaton;
    let mut group = c.benchmark_group(format!("rigid_census/{MODE}"));
    group.sample_size(10);
    group.bench_function("psl2z_l12", |b| {
        b.iter(|| counting::rigid_sphere_count(&aut, 12))
    });
    let braid = garside::build_automaton(4).unwrap().automaton;
    group.bench_function("braid4_l6", |b| {
        b.iter(|| counting::rigid_sphere_count(&braid, 6))
    });
    group.finish();
}

fn bench_enumeration(c: &mut Criterion) {
    let aut = psl2z::build_automaton().automaton;
    let mut group = c.benchmark_group(format!("enumeration/{MODE}"));
    group.sample_size(10);
    group.bench_function("psl2z_l12_stream", |b| {
        b.iter(|| counting::enumerate_sphere(&aut, 12).count())
    });
    group.finish();
}

fn bench_farey_distance(c: &mut Criterion) {
    // distance computations are per-word work inside the geometric census
    let words = [
        "AbAbAbAbAbAb",
        "AABBaabbAABB",
        "BBBBAAAABBBB",
        "AbABBAbABBAb",
    ];
    let images: Vec<FareyVertex> = words
        .iter()
        .map(|text| {
            let w: Word = psl2z::parse_word(text).unwrap();
            psl2z::apply(&psl2z::evaluate(&w).unwrap(), &FareyVertex::zero())
        })
        .collect();
    let mut group = c.benchmark_group(format!("farey_distance/{MODE}"));
    group.bench_function("pivot_batch", |b| {
        b.iter(|| {
            images
                .iter()
                .map(|v| psl2z::farey_distance(&FareyVertex::zero(), v))
                .sum::<u64>()
        })
    });
    group.finish();
}

criterion_group!(
    benches,
    bench_rigid_census,
    bench_enumeration,
    bench_farey_distance
);
criterion_main!(benches);
