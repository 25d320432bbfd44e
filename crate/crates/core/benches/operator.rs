//! Sequential against parallel execution on the main assembly loops.
//! Build with `--no-default-features` and the two policies coincide.

use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

use balescu::frequency::FrequencyTable;
use balescu::kernel::Kernel;
use balescu::operator::{quadratic_form_l_3d, sqrt_maxwellian_r, GridFunction3D, OperatorConfig, RadialOperator};
use balescu::{linalg, Exec, PlasmaConfig};

const POLICIES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn kernel_table(c: &mut Criterion) {
    let plasma = PlasmaConfig::default();
    let mut g = c.benchmark_group("kernel_table");
    for (name, exec) in POLICIES {
        g.bench_function(name, |b| b.iter(|| Kernel::new(&plasma, black_box(20.0), exec)));
    }
    g.finish();
}

fn radial_assembly(c: &mut Criterion) {
    let plasma = PlasmaConfig::default();
    let mut g = c.benchmark_group("radial_assembly");
    g.sample_size(10);
    for m in [40, 80] {
        let cfg = OperatorConfig { m, ..OperatorConfig::default() };
        for (name, exec) in POLICIES {
            g.bench_with_input(BenchmarkId::new(name, m), &cfg, |b, cfg| {
                b.iter(|| RadialOperator::new(&plasma, cfg, exec).unwrap())
            });
        }
    }
    g.finish();
}

fn form_3d(c: &mut Criterion) {
    let plasma = PlasmaConfig::default();
    let cfg = OperatorConfig { n: 9, ..OperatorConfig::default() };
    let freq = FrequencyTable::new(&plasma, Exec::Parallel).unwrap();
    let kern = Kernel::new(&plasma, cfg.kernel_reach(), Exec::Parallel);
    let g1 = GridFunction3D::from_fn(cfg.n, cfg.r_max, |v| (1.0 + v[0]) * sqrt_maxwellian_r(linalg::norm(v))).unwrap();
    let mut g = c.benchmark_group("form_3d_n9");
    g.sample_size(10);
    for (name, exec) in POLICIES {
        g.bench_function(name, |b| b.iter(|| quadratic_form_l_3d(&g1, &g1, &freq, &kern, &cfg, exec).unwrap()));
    }
    g.finish();
}

criterion_group!(benches, kernel_table, radial_assembly, form_3d);
criterion_main!(benches);
