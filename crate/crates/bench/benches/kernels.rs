use std::hint::black_box;
use std::sync::Arc;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use roelab::oper::{random_band, random_gaussian};
use roelab::propa::{phi_nu, random_valid_contraction, IsometryField, PropertyAKernel, SaturationPolicy};
use roelab::randsub::{restricted_norm_max, sample_subspace, SubsetMode, DEFAULT_C0};
use roelab::reps::{random_phases, UnitaryRep};
use roelab::space::{cycle, interval, random_regular};
use roelab::translations::decompose_band;

fn opnorm(c: &mut Criterion) {
    let mut g = c.benchmark_group("opnorm");
    for n in [64, 256] {
        let dense = random_gaussian(Arc::new(cycle(n)), 1);
        let band = random_band(Arc::new(cycle(n)), 2.0, 1);
        g.bench_with_input(BenchmarkId::new("dense", n), &dense, |b, u| b.iter(|| u.opnorm().unwrap()));
        g.bench_with_input(BenchmarkId::new("band", n), &band, |b, u| b.iter(|| u.opnorm().unwrap()));
    }
    g.finish();
}

fn decompose(c: &mut Criterion) {
    let space = Arc::new(random_regular(64, 4, 1).unwrap());
    c.bench_function("decompose_band/regular64_r3", |b| b.iter(|| decompose_band(space.clone(), black_box(3.0))));
}

fn averaged_norm(c: &mut Criterion) {
    let mut g = c.benchmark_group("averaged_norm");
    for p in [7, 67] {
        let rep = UnitaryRep::heisenberg(p).unwrap();
        let alpha = random_phases(rep.order(), 3);
        g.bench_with_input(BenchmarkId::new("heis", p), &alpha, |b, a| b.iter(|| rep.averaged_norm(a).unwrap()));
    }
    g.finish();
}

fn greedy_restricted(c: &mut Criterion) {
    let sample = sample_subspace(400, 5, 1).unwrap();
    c.bench_function("restricted_norm/greedy_d400", |b| {
        b.iter(|| restricted_norm_max(&sample, 0.04, SubsetMode::Greedy, DEFAULT_C0).unwrap())
    });
}

fn phi(c: &mut Criterion) {
    let nu = PropertyAKernel::interval(200, 8.0, 0.5, SaturationPolicy::Strict).unwrap();
    let field = IsometryField::new(nu).unwrap();
    let u = random_valid_contraction(Arc::new(interval(200)), 2.0, 0.1, 1).unwrap();
    c.bench_function("phi_nu/interval200", |b| b.iter(|| phi_nu(&u, &field).unwrap()));
}

criterion_group!(benches, opnorm, decompose, averaged_norm, greedy_restricted, phi);
criterion_main!(benches);
