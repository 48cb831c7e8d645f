//! Rayon pool against the sequential fallback on the same workloads.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use gaussdim::bound_lab::{cover_cost_transition, local_dimension_sample, CantorMeasure, CantorSpec, EnumerationMode};
use gaussdim::exec;
use gaussdim::pressure::{partition_sum, pressure_properties_check, PressureSource};
use gaussdim::{SystemSpec, TargetSpec};

fn run<R>(parallel: bool, f: impl FnOnce() -> R) -> R {
    if parallel {
        f()
    } else {
        exec::sequential(f)
    }
}

fn bench(c: &mut Criterion) {
    let gauss = SystemSpec::gauss(40).unwrap();
    let lueroth = SystemSpec::lueroth(1000).unwrap();
    let two = TargetSpec::new(vec![0, 1], vec![1.0, 1.0], 4.0).unwrap();
    let one = TargetSpec::single(2.0).unwrap();
    let (spec, _) = CantorSpec::at_critical(&SystemSpec::lueroth(10_000).unwrap(), &one, 6, 2).unwrap();
    let mu = CantorMeasure::new(&SystemSpec::lueroth(10_000).unwrap(), &one, &spec).unwrap();

    let s_grid: Vec<f64> = (0..8).map(|i| 0.6 + 0.05 * i as f64).collect();
    let ns: Vec<u32> = (4..=8).collect();

    let mut g = c.benchmark_group("exec");
    g.sample_size(10);
    for parallel in [true, false] {
        let label = if parallel { "rayon" } else { "sequential" };
        g.bench_function(BenchmarkId::new("partition_gauss_n3", label), |b| {
            b.iter(|| run(parallel, || partition_sum(&gauss, 3, 0.8).unwrap()))
        });
        g.bench_function(BenchmarkId::new("eigen_curve_gauss_8pts", label), |b| {
            b.iter(|| {
                run(parallel, || {
                    pressure_properties_check(&gauss, &s_grid, PressureSource::Eigen { grid: 256 }).unwrap()
                })
            })
        });
        g.bench_function(BenchmarkId::new("cover_transition_lueroth", label), |b| {
            b.iter(|| {
                run(parallel, || cover_cost_transition(&lueroth, &two, &ns, &s_grid, EnumerationMode::Exact).unwrap())
            })
        });
        g.bench_function(BenchmarkId::new("localdim_200", label), |b| {
            b.iter(|| run(parallel, || local_dimension_sample(&mu, 200, 0).unwrap()))
        });
    }
    g.finish();
}

criterion_group!(benches, bench);
criterion_main!(benches);
