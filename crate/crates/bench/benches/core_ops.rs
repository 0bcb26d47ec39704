use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use cutproject::discrepancy::discrepancy_profile;
use cutproject::equidecomp::{verify_equidecomposition, Piece, PiecewiseTranslation};
use cutproject::lattice::SpecialFormLattice;
use cutproject::matching::{bounded_distance_match, build_instance, max_matching};
use cutproject::modelset::generate_patch;
use cutproject::window::Window;
use cutproject::GroupElement;

fn golden() -> f64 {
    (5.0f64.sqrt() - 1.0) / 2.0
}

fn fib_lattice() -> SpecialFormLattice {
    SpecialFormLattice::certified(vec![golden()], vec![golden()], 25).unwrap()
}

fn bench_patch_generation(c: &mut Criterion) {
    let lat = fib_lattice();
    let w = Window::axis_box(vec![0.0], vec![golden()]).unwrap();
    let mut group = c.benchmark_group("generate_patch");
    for len in [1_000i64, 10_000] {
        group.bench_with_input(BenchmarkId::from_parameter(len), &len, |b, &len| {
            b.iter(|| generate_patch(black_box(&lat), black_box(&w), (-len, len)).unwrap());
        });
    }
    group.finish();
}

fn bench_discrepancy_profile(c: &mut Criterion) {
    let a = golden();
    let w = Window::axis_box(vec![0.0], vec![a]).unwrap();
    let mut group = c.benchmark_group("discrepancy_profile");
    for n in [10_000u32, 100_000] {
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, &n| {
            b.iter(|| discrepancy_profile(black_box(&w), &[a], &[0.23], n).unwrap());
        });
    }
    group.finish();
}

fn bench_hopcroft_karp(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut group = c.benchmark_group("max_matching");
    for n in [500usize, 2_000] {
        let left: Vec<Vec<f64>> = (0..n).map(|_| vec![rng.gen::<f64>() * n as f64]).collect();
        let right: Vec<Vec<f64>> = (0..n).map(|_| vec![rng.gen::<f64>() * n as f64]).collect();
        let translations = vec![GroupElement::vector(vec![0.0])];
        let inst = build_instance(left, right, translations, &[], 2.0).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &inst, |b, inst| {
            b.iter(|| max_matching(black_box(inst)));
        });
    }
    group.finish();
}

fn bench_bounded_distance_match(c: &mut Criterion) {
    let lat = fib_lattice();
    let w = Window::axis_box(vec![0.0], vec![golden()]).unwrap();
    let w2 = Window::axis_box(vec![1.0 - golden()], vec![1.0]).unwrap();
    let pa = generate_patch(&lat, &w, (-5_000, 5_000)).unwrap();
    let pb = generate_patch(&lat, &w2, (-5_000, 5_000)).unwrap();
    c.bench_function("bounded_distance_match_10k", |b| {
        b.iter(|| bounded_distance_match(black_box(&pa), black_box(&pb), 2.0, 2.0).unwrap());
    });
}

fn bench_verify_equidecomposition(c: &mut Criterion) {
    let unit = Window::axis_box(vec![0.0], vec![1.0]).unwrap();
    let swap = PiecewiseTranslation::new(
        None,
        vec![
            Piece {
                region: Window::axis_box(vec![0.0], vec![0.5]).unwrap(),
                translation: GroupElement::vector(vec![0.5]),
            },
            Piece {
                region: Window::axis_box(vec![0.5], vec![1.0]).unwrap(),
                translation: GroupElement::vector(vec![-0.5]),
            },
        ],
    )
    .unwrap();
    c.bench_function("verify_equidecomposition_100k", |b| {
        b.iter(|| verify_equidecomposition(&unit, &unit, black_box(&swap), 100_000, 7).unwrap());
    });
}

criterion_group!(
    benches,
    bench_patch_generation,
    bench_discrepancy_profile,
    bench_hopcroft_karp,
    bench_bounded_distance_match,
    bench_verify_equidecomposition
);
criterion_main!(benches);
