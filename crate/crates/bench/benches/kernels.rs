use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use sgn_bench::{cn_like_system, grid, packet, params};
use sgn_core::{thomas_solve, total_density, Convolution, GravityKernel, Stepper};

fn gravity(c: &mut Criterion) {
    let mut group = c.benchmark_group("gravity_potential");
    group.sample_size(20);
    for n in [1001, 4001] {
        let g = grid(n);
        let rho = total_density(&packet(&g));
        for method in [Convolution::Direct, Convolution::Fft] {
            let kernel = GravityKernel::new(&g, 0.01, method).unwrap();
            let mut out = vec![0.0; n];
            group.bench_with_input(
                BenchmarkId::new(format!("{method:?}"), n),
                &rho,
                |b, rho| b.iter(|| kernel.potential_into(rho, 0.6, &mut out).unwrap()),
            );
        }
    }
    group.finish();
}

fn thomas(c: &mut Criterion) {
    let sys = cn_like_system(4001);
    c.bench_function("thomas_solve/4001", |b| {
        b.iter(|| thomas_solve(&sys).unwrap())
    });
}

fn step(c: &mut Criterion) {
    let mut group = c.benchmark_group("cn_step");
    group.sample_size(10);
    for method in [Convolution::Direct, Convolution::Fft] {
        let g = grid(4001);
        let mut p = params(0.6);
        p.convolution = method;
        let mut stepper = Stepper::new(g.clone(), p).unwrap();
        let state = stepper.start(packet(&g)).unwrap();
        group.bench_function(format!("{method:?}/4001"), |b| {
            b.iter_batched(
                || state.clone(),
                |s| stepper.step(s).unwrap(),
                criterion::BatchSize::LargeInput,
            )
        });
    }
    group.finish();
}

criterion_group!(benches, gravity, thomas, step);
criterion_main!(benches);
