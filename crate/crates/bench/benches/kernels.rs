use criterion::{black_box, criterion_group, criterion_main, Criterion};

use heatkern::diagram_engine::{extract_form_factors, npoint, DiagramChannel};
use heatkern::form_factors::{basic_f, eval, FormFactorKind};
use heatkern::lattice_oracle::{exact_trace, LatticeSpec};
use heatkern::projector_algebra::Momentum;
use heatkern::resolvent::omega_via_resolvent;
use heatkern::trace_evaluator::tr_heat_kernel;
use heatkern::EvalConfig;

use heatkern_bench::{multi_mode_potential, BOX_LENGTH};

/// The three evaluation branches of the basic profile have very different
/// cost: Taylor series, adaptive quadrature, asymptotic series.
fn bench_basic_profile(c: &mut Criterion) {
    let cfg = EvalConfig::default();
    let mut g = c.benchmark_group("basic_f");
    g.bench_function("series", |b| b.iter(|| basic_f(black_box(0.25), &cfg)));
    g.bench_function("quadrature", |b| b.iter(|| basic_f(black_box(10.0), &cfg)));
    g.bench_function("asymptotic", |b| b.iter(|| basic_f(black_box(100.0), &cfg)));
    g.finish();

    c.bench_function("eval_ric_mid", |b| {
        let cfg = EvalConfig::default();
        b.iter(|| eval(FormFactorKind::Ric, black_box(1.5), &cfg))
    });
}

/// Metric two-point function: the heaviest diagram channel (rank-4 moments,
/// ordering sum, projector split).
fn bench_diagrams(c: &mut Criterion) {
    let d = 4;
    let s = 0.7;
    let p = Momentum::along_axis(d, (1.0f64 / s).sqrt()).unwrap();
    c.bench_function("npoint_trhh", |b| {
        b.iter(|| npoint(DiagramChannel::Trhh, black_box(s), Some(&p), d))
    });
    c.bench_function("extract_trhh", |b| {
        b.iter(|| extract_form_factors(DiagramChannel::Trhh, black_box(1.0), d))
    });
}

fn bench_resolvent(c: &mut Criterion) {
    c.bench_function("omega_via_resolvent", |b| {
        b.iter(|| omega_via_resolvent(black_box(1.0)))
    });
}

fn bench_trace_evaluation(c: &mut Criterion) {
    let fields = multi_mode_potential();
    c.bench_function("tr_heat_kernel_multimode", |b| {
        b.iter(|| tr_heat_kernel(&fields, black_box(0.3)))
    });
}

/// Dense eigendecomposition of the discretized operator — cubic in the
/// matrix dimension; N = 128 keeps one iteration around a millisecond.
fn bench_lattice(c: &mut Criterion) {
    let spec = LatticeSpec::from_box(1, 128, BOX_LENGTH).unwrap();
    let fields = multi_mode_potential();
    let mut g = c.benchmark_group("lattice");
    g.sample_size(20);
    g.bench_function("exact_trace_n128", |b| {
        b.iter(|| exact_trace(&spec, &fields, black_box(0.3)))
    });
    g.finish();
}

criterion_group!(
    benches,
    bench_basic_profile,
    bench_diagrams,
    bench_resolvent,
    bench_trace_evaluation,
    bench_lattice
);
criterion_main!(benches);
