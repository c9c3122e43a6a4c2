use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use wavefront_scope::distribution::TestDistribution;
use wavefront_scope::engine::{
    scaled_volume, wpt_quadrature, wpt_sampled, wpt_sampled_bins, EngineConfig, PathChoice,
};
use wavefront_scope::grid::{Grid, SampledSignal};
use wavefront_scope::lattice::{LambdaSchedule, PhaseRegion};
use wavefront_scope::window::{scale, Window};
use wavefront_scope::WfsError;

fn cfg(log2: u32, path: PathChoice) -> EngineConfig {
    let mut c = EngineConfig::new(Grid::new(1, PI, log2).unwrap());
    c.path = path;
    c
}

#[test]
fn delta_closed_form_both_paths() {
    let d = TestDistribution::delta(&[0.0], PI).unwrap();
    let region = PhaseRegion::new(&[0.1], 0.2, &[1.0], 0.2).unwrap();
    let sched = LambdaSchedule::new(4.0, 4.0, 5).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for name in ["gaussian", "hermite1", "annulus"] {
        let w = Window::from_name(name, 1).unwrap();
        for path in [PathChoice::Sampled, PathChoice::Quadrature] {
            let vol = scaled_volume(&d, &w, &region, &sched, &cfg(16, path)).unwrap();
            for slab in &vol.slabs {
                let sw = scale(&w, slab.lattice.lambda).unwrap();
                let peak = sw.amplitude();
                for _ in 0..20 {
                    let ix = rng.gen_range(0..slab.lattice.xs.len());
                    let ik = rng.gen_range(0..slab.lattice.ks.len());
                    let x = slab.lattice.xs[ix][0];
                    let want = sw.eval(&[-x]).conj();
                    let got = slab.get(ix, ik);
                    let err = (got - want).norm();
                    match path {
                        PathChoice::Quadrature => assert!(err < 1e-8, "{name} quad: {err}"),
                        _ => assert!(
                            err < 1e-4 * want.norm().max(1e-6 * peak),
                            "{name} sampled: {err}"
                        ),
                    }
                }
            }
        }
    }
}

#[test]
fn gaussian_delta_peak_value() {
    let d = TestDistribution::delta(&[0.0], PI).unwrap();
    let w = Window::gaussian(1).unwrap();
    let sw = scale(&w, 4.0).unwrap();
    let v = wpt_quadrature(&d, &sw, &[0.0], &[3.3]).unwrap();
    assert!((v.norm() - 2f64.sqrt()).abs() < 1e-9);
    let u = d.sample(&Grid::new(1, PI, 12).unwrap()).unwrap();
    let s = wpt_sampled(&u, &sw, &[vec![0.0]], &[vec![3.3]]).unwrap();
    assert!((s[0].norm() - 2f64.sqrt()).abs() < 1e-12);
}

#[test]
fn bump_paths_agree_at_single_point() {
    let d = TestDistribution::smooth_bump(1, PI).unwrap();
    let w = Window::gaussian(1).unwrap();
    let sw = scale(&w, 16.0).unwrap();
    let q = wpt_quadrature(&d, &sw, &[0.0], &[8.0]).unwrap();
    let u = d.sample(&Grid::new(1, PI, 14).unwrap()).unwrap();
    let s = wpt_sampled(&u, &sw, &[vec![0.0]], &[vec![8.0]]).unwrap()[0];
    assert!((q - s).norm() < 1e-6 * q.norm(), "{q} vs {s}");
}

#[test]
fn cross_path_volumes_agree() {
    let sched = LambdaSchedule::new(4.0, 2.0, 9).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let cases = [
        ("delta@0", 1e-4),
        ("planewave,k=30", 1e-4),
        ("bump", 1e-4),
        ("heaviside@0", 1e-2),
        ("powersing@0,a=0.25", 1e-2),
        ("powersing@0,a=0.5", 1e-2),
    ];
    for (spec, tol) in cases {
        let d = TestDistribution::parse(spec, 1, PI).unwrap();
        for name in ["gaussian", "hermite1", "annulus"] {
            let w = Window::from_name(name, 1).unwrap();
            for (x0, xi0) in [(0.0, 1.0), (0.1, -1.0)] {
                let region = PhaseRegion::new(&[x0], 0.2, &[xi0], 0.2).unwrap();
                let a =
                    scaled_volume(&d, &w, &region, &sched, &cfg(16, PathChoice::Sampled)).unwrap();
                let b = scaled_volume(&d, &w, &region, &sched, &cfg(16, PathChoice::Quadrature))
                    .unwrap();
                let peak = (0..b.slabs.len()).map(|j| b.max_abs(j)).fold(0.0, f64::max);
                for (sa, sb) in a.slabs.iter().zip(&b.slabs) {
                    for _ in 0..50 {
                        let ix = rng.gen_range(0..sa.lattice.xs.len());
                        let ik = rng.gen_range(0..sa.lattice.ks.len());
                        let (va, vb) = (sa.get(ix, ik), sb.get(ix, ik));
                        let floor = 1e-6 * peak;
                        let rel = (va - vb).norm() / vb.norm().max(floor);
                        assert!(
                            rel < tol,
                            "{spec} {name} λ={} x={} ξ={}: {va} vs {vb} (rel {rel:.2e})",
                            sa.lattice.lambda,
                            sa.lattice.xs[ix][0],
                            sa.lattice.xi(ik)[0]
                        );
                    }
                }
            }
        }
    }
}

#[test]
fn translation_and_modulation_covariance() {
    let g = Grid::new(1, PI, 12).unwrap();
    let d = TestDistribution::parse("sum(bump;0.3*heaviside@0.2)", 1, PI).unwrap();
    let u = d.sample(&g).unwrap();
    let w = Window::hermite(1, 1).unwrap();
    let sw = scale(&w, 32.0).unwrap();
    let shift = 37usize;
    let a = shift as f64 * g.dx();
    let mut shifted = SampledSignal::zeros(g);
    for i in shift..g.n() {
        shifted.values[i] = u.values[i - shift];
    }
    let xs = vec![vec![0.05], vec![-0.3]];
    let xis = vec![vec![20.0], vec![-33.5], vec![41.25]];
    let lhs = wpt_sampled(&shifted, &sw, &xs, &xis).unwrap();
    let xs_back: Vec<Vec<f64>> = xs.iter().map(|x| vec![x[0] - a]).collect();
    let rhs = wpt_sampled(&u, &sw, &xs_back, &xis).unwrap();
    for (i, (l, r)) in lhs.iter().zip(&rhs).enumerate() {
        let xi = xis[i % xis.len()][0];
        let want = r * Complex64::from_polar(1.0, -a * xi);
        assert!(
            (l - want).norm() <= 1e-10 * want.norm().max(1e-12),
            "translation {i}"
        );
    }

    let b = 7.0 * g.dxi();
    let mut modulated = u.clone();
    for (i, v) in modulated.values.iter_mut().enumerate() {
        *v *= Complex64::from_polar(1.0, b * g.coord(i));
    }
    let lhs = wpt_sampled(&modulated, &sw, &xs, &xis).unwrap();
    let xis_back: Vec<Vec<f64>> = xis.iter().map(|x| vec![x[0] - b]).collect();
    let rhs = wpt_sampled(&u, &sw, &xs, &xis_back).unwrap();
    for (l, r) in lhs.iter().zip(&rhs) {
        assert!((l - r).norm() <= 1e-10 * r.norm().max(1e-12), "modulation");
    }
}

#[test]
fn energy_identity_on_full_grid() {
    let g = Grid::new(1, PI, 10).unwrap();
    let d = TestDistribution::smooth_bump(1, PI).unwrap();
    let u = d.sample(&g).unwrap();
    for name in ["gaussian", "hermite1"] {
        let w = Window::from_name(name, 1).unwrap();
        let sw = scale(&w, 16.0).unwrap();
        let mut total = 0.0;
        for i in 0..g.n() {
            let bins = wpt_sampled_bins(&u, &sw, &[g.coord(i)], 0);
            total += bins.iter().map(|v| v.norm_sqr()).sum::<f64>();
        }
        total *= g.dx() * g.dxi();
        let want = 2.0 * PI * w.l2_norm().powi(2) * u.energy();
        assert!(
            (total - want).abs() < 1e-6 * want,
            "{name}: {total} vs {want}"
        );
    }
}

#[test]
fn conjugate_symmetry_in_quadrature_path() {
    let d = TestDistribution::heaviside(0.3, PI).unwrap();
    let w = Window::gaussian(1).unwrap();
    let sw = scale(&w, 64.0).unwrap();
    for &(x, xi) in &[(0.2, 50.0), (0.35, 80.0), (-0.1, 13.0)] {
        let a = wpt_quadrature(&d, &sw, &[x], &[xi]).unwrap();
        let b = wpt_quadrature(&d, &sw, &[x], &[-xi]).unwrap();
        assert!((a - b.conj()).norm() == 0.0, "{a} {b}");
    }
}

#[test]
fn zero_signal_gives_zero_volume() {
    let d0 = TestDistribution::delta(&[0.0], PI).unwrap();
    let d = TestDistribution::weighted_sum(vec![(0.0, d0)]).unwrap();
    let w = Window::gaussian(1).unwrap();
    let region = PhaseRegion::new(&[0.0], 0.2, &[1.0], 0.2).unwrap();
    let sched = LambdaSchedule::new(4.0, 2.0, 3).unwrap();
    for path in [PathChoice::Sampled, PathChoice::Quadrature] {
        let vol = scaled_volume(&d, &w, &region, &sched, &cfg(12, path)).unwrap();
        assert!(vol
            .slabs
            .iter()
            .all(|s| s.values.iter().all(|v| v.norm() == 0.0)));
    }
}

#[test]
fn two_dimensional_delta() {
    let g = Grid::new(2, PI, 8).unwrap();
    let d = TestDistribution::delta(&[0.0, 0.0], PI).unwrap();
    let w = Window::gaussian(2).unwrap();
    let sw = scale(&w, 16.0).unwrap();
    let x = [0.05, -0.1];
    let xi = [12.0, 5.0];
    let q = wpt_quadrature(&d, &sw, &x, &xi).unwrap();
    let want = sw.eval(&[-x[0], -x[1]]).conj();
    assert!((q - want).norm() < 1e-8, "{q} vs {want}");
    let u = d.sample(&g).unwrap();
    let s = wpt_sampled(&u, &sw, &[x.to_vec()], &[xi.to_vec()]).unwrap()[0];
    assert!((s - want).norm() < 1e-12);
    let region = PhaseRegion::new(&x, 0.1, &[0.6, 0.8], 0.2).unwrap();
    let sched = LambdaSchedule::new(4.0, 2.0, 3).unwrap();
    let mut c = EngineConfig::new(g);
    c.path = PathChoice::Sampled;
    let vol = scaled_volume(&d, &w, &region, &sched, &c).unwrap();
    for slab in &vol.slabs {
        let sw = scale(&w, slab.lattice.lambda).unwrap();
        for (ix, xx) in slab.lattice.xs.iter().enumerate() {
            let want = sw.eval(&[-xx[0], -xx[1]]).conj();
            for ik in 0..slab.lattice.ks.len() {
                assert!((slab.get(ix, ik) - want).norm() < 1e-12);
            }
        }
    }
}

#[test]
fn resolution_errors() {
    let d = TestDistribution::delta(&[0.0], PI).unwrap();
    let w = Window::gaussian(1).unwrap();
    let region = PhaseRegion::new(&[0.0], 0.2, &[1.0], 0.2).unwrap();
    let sched = LambdaSchedule::new(4.0, 2.0, 12).unwrap();
    let e = scaled_volume(&d, &w, &region, &sched, &cfg(10, PathChoice::Sampled)).unwrap_err();
    assert!(matches!(e, WfsError::NyquistExceeded { .. }), "{e}");
    assert!(e.is_validation());
    let region = PhaseRegion::new(&[0.0], 0.2, &[0.05], 0.01).unwrap();
    let e = scaled_volume(&d, &w, &region, &sched, &cfg(10, PathChoice::Sampled)).unwrap_err();
    assert!(matches!(e, WfsError::WindowUnresolved { .. }), "{e}");
    let mut c = cfg(16, PathChoice::Sampled);
    c.memory_budget = 1 << 10;
    let e = scaled_volume(
        &d,
        &w,
        &PhaseRegion::new(&[0.0], 0.2, &[1.0], 0.2).unwrap(),
        &sched,
        &c,
    )
    .unwrap_err();
    assert!(matches!(e, WfsError::ResolutionBudget { .. }), "{e}");
    let hp = TestDistribution::parse("halfplane,nu=(1,0)", 2, PI).unwrap();
    let w2 = Window::gaussian(2).unwrap();
    let r2 = PhaseRegion::new(&[0.0, 0.0], 0.2, &[1.0, 0.0], 0.2).unwrap();
    let mut c2 = EngineConfig::new(Grid::new(2, PI, 7).unwrap());
    c2.path = PathChoice::Quadrature;
    let e = scaled_volume(
        &hp,
        &w2,
        &r2,
        &LambdaSchedule::new(4.0, 2.0, 2).unwrap(),
        &c2,
    )
    .unwrap_err();
    assert!(matches!(e, WfsError::Unsupported(_)));
}
