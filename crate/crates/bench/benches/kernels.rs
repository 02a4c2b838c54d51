use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use vlasov_dg::diagnostics::record;
use vlasov_dg::maxwell::{compute_current, maxwell_rhs};
use vlasov_dg::vlasov::{vlasov_rhs, ForceField};
use vlasov_dg::{FluxKind, VlasovMaxwell};
use vlasov_dg_bench::weibel_fixture;

fn vlasov_kernel(c: &mut Criterion) {
    let mut group = c.benchmark_group("vlasov_rhs");
    group.sample_size(10);
    for &(n, k) in &[(16, 1), (16, 2), (24, 2)] {
        let (disc, state) = weibel_fixture(n, k);
        let force = ForceField::new(&disc, &state.fields);
        group.bench_with_input(BenchmarkId::from_parameter(format!("n{n}_k{k}")), &(), |b, _| {
            b.iter(|| black_box(vlasov_rhs(&disc, &state.f, &force).unwrap()))
        });
    }
    group.finish();
}

fn maxwell_kernel(c: &mut Criterion) {
    let (disc, state) = weibel_fixture(16, 2);
    c.bench_function("current_and_maxwell_rhs_n16_k2", |b| {
        b.iter(|| {
            let j = compute_current(&disc, &state.f);
            black_box(maxwell_rhs(&disc, &state.fields, &j, FluxKind::Upwind))
        })
    });
}

fn rk3_step(c: &mut Criterion) {
    let (disc, state) = weibel_fixture(16, 2);
    let op = VlasovMaxwell::new(&disc, FluxKind::Upwind);
    let mut group = c.benchmark_group("step");
    group.sample_size(10);
    group.bench_function("rk3_n16_k2", |b| b.iter(|| black_box(op.step(&state, 0.01).unwrap())));
    group.bench_function("diagnostics_n16_k2", |b| b.iter(|| black_box(record(&disc, &state, FluxKind::Upwind).unwrap())));
    group.finish();
}

criterion_group!(benches, vlasov_kernel, maxwell_kernel, rk3_step);
criterion_main!(benches);
