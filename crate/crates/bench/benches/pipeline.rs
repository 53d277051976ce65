use criterion::{black_box, criterion_group, criterion_main, Criterion};
use jtwist_bench::{moments, ratxis, words};
use jtwist_core::boundary::{compute_case, CaseId, CaseOptions};
use jtwist_core::fixture::Fixture;
use jtwist_core::oracle::{matrix_trace_check, numeric_case, random_j_instance};
use jtwist_core::sphere::sphere_moment;

fn symbolic(c: &mut Criterion) {
    let fx = Fixture::builtin();
    let opts = CaseOptions::default();
    let mut g = c.benchmark_group("compute_case");
    g.sample_size(20);
    for case in CaseId::ALL {
        g.bench_function(case.name(), |b| b.iter(|| compute_case(black_box(case), &fx, &opts).unwrap()));
    }
    g.finish();
}

fn numeric(c: &mut Criterion) {
    let inst = random_j_instance(1);
    let mut g = c.benchmark_group("numeric_case");
    g.sample_size(10);
    for case in [CaseId::A2, CaseId::C] {
        g.bench_function(case.name(), |b| b.iter(|| numeric_case(black_box(case), &inst).unwrap()));
    }
    g.finish();
}

fn kernels(c: &mut Criterion) {
    let ws = words(1000);
    c.bench_function("trace_check_1000_words", |b| b.iter(|| matrix_trace_check(black_box(&ws))));
    let fs: Vec<_> = ratxis(200).into_iter().filter(|f| f.decay() <= -1).collect();
    c.bench_function("pi_plus_200", |b| b.iter(|| fs.iter().map(|f| f.pi_plus().unwrap()).collect::<Vec<_>>()));
    let ms = moments(4);
    c.bench_function("sphere_moments_deg4", |b| b.iter(|| ms.iter().map(|m| sphere_moment(m).unwrap()).collect::<Vec<_>>()));
}

criterion_group!(benches, symbolic, numeric, kernels);
criterion_main!(benches);
