use std::f64::consts::PI;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use wavefront_scope::distribution::TestDistribution;
use wavefront_scope::engine::{scaled_volumes, EngineConfig};
use wavefront_scope::grid::Grid;
use wavefront_scope::lattice::{LambdaSchedule, PhaseRegion};
use wavefront_scope::par::Exec;
use wavefront_scope::window::Window;

fn volumes(c: &mut Criterion) {
    let mut group = c.benchmark_group("scaled_volumes");
    group.sample_size(10);
    let cases = [
        (
            "heaviside_1d",
            1,
            "heaviside@0",
            vec![0.0],
            vec![vec![1.0], vec![-1.0]],
            16,
            13,
        ),
        (
            "halfplane_2d",
            2,
            "halfplane,nu=(1,0),c=0",
            vec![0.0, 0.0],
            vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            9,
            9,
        ),
    ];
    for (label, dim, spec, point, dirs, log2, count) in cases {
        let dist = TestDistribution::parse(spec, dim, PI).unwrap();
        let w = Window::gaussian(dim).unwrap();
        let regions: Vec<PhaseRegion> = dirs
            .iter()
            .map(|d| PhaseRegion::new(&point, 0.2, d, 0.2).unwrap())
            .collect();
        let sched = LambdaSchedule::new(4.0, 2f64.sqrt(), count).unwrap();
        for exec in [Exec::Parallel, Exec::Sequential] {
            let mut cfg = EngineConfig::new(Grid::new(dim, PI, log2).unwrap());
            cfg.exec = exec;
            group.bench_with_input(
                BenchmarkId::new(label, format!("{exec:?}")),
                &cfg,
                |b, cfg| b.iter(|| scaled_volumes(&dist, &w, &regions, &sched, cfg).unwrap()),
            );
        }
    }
    group.finish();
}

criterion_group!(benches, volumes);
criterion_main!(benches);
