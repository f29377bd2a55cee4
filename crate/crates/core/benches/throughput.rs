//! Throughput of the data-parallel kernels. Run once with default features
//! and once with `--no-default-features`; group names carry the mode so the
//! two runs land side by side in the report.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use grad_dr::datasets;
use grad_dr::evaluation;
use grad_dr::kernels::{self, KernelSpec};
use grad_dr::lneg::{self, LnegOptions};
use grad_dr::par;

fn inputs() -> nalgebra::DMatrix<f64> {
    datasets::gen_swiss_roll(400, 7).unwrap().points
}

fn bench(c: &mut Criterion) {
    let y = inputs();
    let mut g = c.benchmark_group(format!("throughput/{}", par::mode()));
    g.sample_size(10);

    let opts = LnegOptions {
        k: 10,
        max_iter: 500,
        ..LnegOptions::default()
    };
    g.bench_function("lneg_coeffs", |b| b.iter(|| lneg::lneg_coeffs(black_box(&y), &opts).unwrap()));

    let spec = KernelSpec::Gaussian { sigma2: 4.0 };
    g.bench_function("gram_matrix", |b| b.iter(|| kernels::gram_matrix(&spec, black_box(&y)).unwrap()));

    g.bench_function("monte_carlo_kmeans", |b| {
        b.iter(|| {
            evaluation::monte_carlo(4, 1, |seed| {
                let r = evaluation::kmeans(&y, 3, 5, seed)?;
                Ok(evaluation::Metrics::from([("inertia".to_string(), r.inertia)]))
            })
            .unwrap()
        })
    });
    g.finish();
}

criterion_group!(benches, bench);
criterion_main!(benches);
