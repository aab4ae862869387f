use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use squeezenm::bath::discretize_bath;
use squeezenm::kernel::build_kernel_table;
use squeezenm::moments::{variance_trace, NoiseCorrelation};
use squeezenm::oracle::{simulate_oracle, OracleConfig};
use squeezenm::volterra::solve_green;
use squeezenm_bench::fig2_case;

fn kernel_table(c: &mut Criterion) {
    let mut group = c.benchmark_group("kernel_table");
    group.sample_size(10);
    for s in [0.5, 1.0, 2.0] {
        let (sys, bath, grid) = fig2_case(s, 20.0);
        group.bench_with_input(BenchmarkId::from_parameter(s), &s, |b, _| {
            b.iter(|| build_kernel_table(&sys, &bath, &grid))
        });
    }
    group.finish();
}

fn green_functions(c: &mut Criterion) {
    let mut group = c.benchmark_group("solve_green");
    group.sample_size(10);
    for t_max in [10.0, 20.0, 40.0] {
        let (sys, bath, grid) = fig2_case(1.0, t_max);
        let table = build_kernel_table(&sys, &bath, &grid);
        group.bench_with_input(BenchmarkId::from_parameter(t_max), &t_max, |b, _| {
            b.iter(|| solve_green(&table, &grid).unwrap())
        });
    }
    group.finish();
}

fn moment_assembly(c: &mut Criterion) {
    let (sys, bath, grid) = fig2_case(1.0, 20.0);
    let table = build_kernel_table(&sys, &bath, &grid);
    let green = solve_green(&table, &grid).unwrap();
    let corr = NoiseCorrelation::build(&sys, &bath, &grid, &table).unwrap();
    let mut group = c.benchmark_group("moments");
    group.sample_size(10);
    group.bench_function("variance_trace", |b| b.iter(|| variance_trace(&green, &corr, &sys, &grid).unwrap()));
    group.finish();
}

fn oracle(c: &mut Criterion) {
    let (sys, bath, grid) = fig2_case(1.0, 5.0);
    let mut group = c.benchmark_group("oracle");
    group.sample_size(10);
    for modes in [100, 400] {
        let config = OracleConfig::new(discretize_bath(&bath, modes, 200.0).unwrap(), sys, grid);
        group.bench_with_input(BenchmarkId::from_parameter(modes), &modes, |b, _| {
            b.iter(|| simulate_oracle(&config).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, kernel_table, green_functions, moment_assembly, oracle);
criterion_main!(benches);
