use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use ncbt::fock::{spectral_norm, toeplitz_poly};
use ncbt::kernels::{kernel, reproducing_check};
use ncbt::star::{cc_j, expansion_residual};
use ncbt::symbols::to_complex_chart;
use ncbt::toeplitz_nc::commutator_table;
use ncbt::{
    parse_symbol, DeformationParams, FockBasis, KernelSpec, KernelVariant, ParamSet, PhasePoint,
};
use std::hint::black_box;

fn params() -> DeformationParams {
    DeformationParams::from_renormalized(0.5, 0.1, 0.05, 1.0).unwrap()
}

fn toeplitz(c: &mut Criterion) {
    let p = params();
    let f = to_complex_chart(&p, &parse_symbol("q1^2 + p2^2 - q1*p1").unwrap()).unwrap();
    let mut g = c.benchmark_group("toeplitz_poly");
    for n in [6, 10, 14] {
        let basis = FockBasis::new(2, n, p.hbar()).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(n), &basis, |b, basis| {
            b.iter(|| toeplitz_poly(black_box(basis), black_box(&f)).unwrap())
        });
    }
    g.finish();
}

fn norms(c: &mut Criterion) {
    let p = params();
    let basis = FockBasis::new(2, 14, p.hbar()).unwrap();
    let f = to_complex_chart(&p, &parse_symbol("q1^2 + p2^2").unwrap()).unwrap();
    let op = toeplitz_poly(&basis, &f).unwrap();
    c.bench_function("spectral_norm N=14", |b| {
        b.iter(|| spectral_norm(black_box(op.matrix())))
    });
}

fn tables(c: &mut Criterion) {
    let ps = ParamSet::Generic(params());
    c.bench_function("commutator_table N=10", |b| {
        b.iter(|| commutator_table(black_box(&ps), 10).unwrap())
    });
}

fn kernels(c: &mut Criterion) {
    let ps = ParamSet::Generic(params());
    let x = PhasePoint::new(0.3, -0.2, 0.5, 0.1);
    let y = PhasePoint::new(-0.4, 0.6, 0.0, 0.2);
    for v in [
        KernelVariant::GenericClosedForm,
        KernelVariant::GenericFockSide,
    ] {
        let spec = KernelSpec::new(v, ps).unwrap();
        c.bench_function(&format!("kernel {}", v.as_str()), |b| {
            b.iter(|| kernel(black_box(&spec), black_box(&x), black_box(&y)))
        });
    }
    let spec = KernelSpec::new(KernelVariant::GenericClosedForm, ps).unwrap();
    c.bench_function("reproducing_check 12 nodes", |b| {
        b.iter(|| reproducing_check(&spec, &x, &y, 12).unwrap())
    });
}

fn star(c: &mut Criterion) {
    let p = params();
    let f = parse_symbol("q1^3 - q2*p1*p2 + p1^2").unwrap();
    let g = parse_symbol("p2^3 + q1*q2 - p1").unwrap();
    c.bench_function("cc_j j=2 cubic", |b| {
        b.iter(|| cc_j(&p, &f, &g, 2).unwrap())
    });
    let q = parse_symbol("q1^2 + p2^2").unwrap();
    c.bench_function("residual sweep 3 hbars N=10", |b| {
        b.iter(|| expansion_residual(&p, &q, &q, 1, 10, &[0.1, 0.01, 0.001]).unwrap())
    });
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(20);
    targets = toeplitz, norms, tables, kernels, star
}
criterion_main!(benches);
