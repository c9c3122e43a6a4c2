//! Evaluation of `W_{φ_λ}u(x, λξ) = ∫ conj φ_λ(y - x) u(y) e^{-iy·λξ} dy`.
//!
//! Two independent paths:
//! * sampled: Riemann sum over grid nodes, one FFT per probe position, with the
//!   windowed product folded modulo the FFT length so each bin is an exact
//!   sample of the discrete-time transform;
//! * quadrature: the frequency-side identity
//!   `W(x, ξ') = (2π)^{-n} λ^{n/4} ∫ û(ξ' + λ^{1/2}ζ) conj φ̂(ζ) e^{i x·λ^{1/2}ζ} dζ`.

use std::f64::consts::PI;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::distribution::TestDistribution;
use crate::grid::{Grid, SampledSignal};
use crate::lattice::{Frame, LambdaSchedule, Lattice, PhaseRegion};
use crate::par::{map_indexed, Exec};
use crate::quad::{integrate, QuadOptions};
use crate::window::{scale, ScaledWindow, Window};
use crate::{Result, WfsError};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Largest admissible `λ |ξ| Δx`.
pub const NYQUIST_FRACTION: f64 = 0.9 * PI;

/// Largest admissible `λ^{1/2} Δx`.
pub const MAX_WINDOW_STEP: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum PathChoice {
    Sampled,
    Quadrature,
    #[default]
    Auto,
}

#[derive(Debug, Clone)]
pub struct EngineConfig {
    pub grid: Grid,
    pub path: PathChoice,
    pub exec: Exec,
    /// Upper bound on working memory in bytes.
    pub memory_budget: u64,
}

impl EngineConfig {
    pub fn new(grid: Grid) -> Self {
        Self {
            grid,
            path: PathChoice::Auto,
            exec: Exec::Parallel,
            memory_budget: 4 << 30,
        }
    }
}

/// Values at one scale, stored position-major: `values[ix * ks.len() + ik]`.
#[derive(Debug, Clone)]
pub struct Slab {
    pub lattice: Lattice,
    pub values: Vec<Complex64>,
}

impl Slab {
    pub fn get(&self, ix: usize, ik: usize) -> Complex64 {
        self.values[ix * self.lattice.ks.len() + ik]
    }
}

#[derive(Debug, Clone)]
pub struct WptVolume {
    pub region: PhaseRegion,
    pub schedule: LambdaSchedule,
    pub window: String,
    pub dist: String,
    pub path: PathChoice,
    pub slabs: Vec<Slab>,
}

#[derive(Serialize)]
struct DumpSidecar<'a> {
    format: &'static str,
    order: &'static str,
    window: &'a str,
    dist: &'a str,
    path: PathChoice,
    region: &'a PhaseRegion,
    slabs: Vec<DumpSlab>,
}

#[derive(Serialize)]
struct DumpSlab {
    lambda: f64,
    offset: usize,
    n_x: usize,
    n_xi: usize,
    xs: Vec<Vec<f64>>,
    xis: Vec<Vec<f64>>,
}

impl WptVolume {
    pub fn max_abs(&self, j: usize) -> f64 {
        self.slabs[j]
            .values
            .iter()
            .map(|v| v.norm())
            .fold(0.0, f64::max)
    }

    pub fn lambdas(&self) -> Vec<f64> {
        self.slabs.iter().map(|s| s.lattice.lambda).collect()
    }

    /// Write the raw values as little-endian `f64` (re, im) pairs in
    /// λ-major, then x, then ξ order, plus a JSON sidecar `<path>.json`.
    pub fn dump(&self, path: &Path) -> Result<()> {
        let mut out = BufWriter::new(File::create(path)?);
        let mut slabs = Vec::with_capacity(self.slabs.len());
        let mut offset = 0;
        for s in &self.slabs {
            for v in &s.values {
                out.write_all(&v.re.to_le_bytes())?;
                out.write_all(&v.im.to_le_bytes())?;
            }
            slabs.push(DumpSlab {
                lambda: s.lattice.lambda,
                offset,
                n_x: s.lattice.xs.len(),
                n_xi: s.lattice.ks.len(),
                xs: (0..s.lattice.xs.len()).map(|i| s.lattice.x(i)).collect(),
                xis: (0..s.lattice.ks.len()).map(|i| s.lattice.xi(i)).collect(),
            });
            offset += s.values.len();
        }
        out.flush()?;
        let side = DumpSidecar {
            format: "little-endian f64 pairs (re, im)",
            order: "lambda-major, then x, then xi",
            window: &self.window,
            dist: &self.dist,
            path: self.path,
            region: &self.region,
            slabs,
        };
        let mut p = path.as_os_str().to_owned();
        p.push(".json");
        std::fs::write(p, serde_json::to_vec_pretty(&side)?)?;
        Ok(())
    }
}

/// Per-axis index range holding the non-zero samples.
fn support_box(u: &SampledSignal) -> Vec<(usize, usize)> {
    let n = u.grid.n();
    let dim = u.grid.dim;
    let mut lo = vec![usize::MAX; dim];
    let mut hi = vec![0usize; dim];
    for (idx, v) in u.values.iter().enumerate() {
        if *v != ZERO {
            let ij = if dim == 1 {
                [idx, 0]
            } else {
                [idx / n, idx % n]
            };
            for a in 0..dim {
                lo[a] = lo[a].min(ij[a]);
                hi[a] = hi[a].max(ij[a]);
            }
        }
    }
    lo.into_iter().zip(hi).collect()
}

fn crop(grid: &Grid, supp: (usize, usize), x: f64, r: f64) -> Option<(usize, usize)> {
    if supp.0 > supp.1 {
        return None;
    }
    let dx = grid.dx();
    let lo = ((x - r + grid.half_width) / dx).ceil().max(0.0) as usize;
    let hi = ((x + r + grid.half_width) / dx).floor();
    if hi < 0.0 {
        return None;
    }
    let lo = lo.max(supp.0);
    let hi = (hi as usize).min(supp.1);
    (lo <= hi).then_some((lo, hi))
}

pub(crate) fn fft2(buf: &mut [Complex64], m: usize, fft: &Arc<dyn Fft<f64>>) {
    let mut scratch = vec![ZERO; fft.get_inplace_scratch_len()];
    for row in buf.chunks_mut(m) {
        fft.process_with_scratch(row, &mut scratch);
    }
    let mut col = vec![ZERO; m];
    for j in 0..m {
        for i in 0..m {
            col[i] = buf[i * m + j];
        }
        fft.process_with_scratch(&mut col, &mut scratch);
        for i in 0..m {
            buf[i * m + j] = col[i];
        }
    }
}

fn check_resolution(grid: &Grid, lambda: f64, max_xi: f64) -> Result<()> {
    let dx = grid.dx();
    let band = lambda * max_xi * dx;
    if band >= NYQUIST_FRACTION {
        return Err(WfsError::NyquistExceeded {
            requested: lambda * max_xi,
            band: NYQUIST_FRACTION / dx,
        });
    }
    let ratio = lambda.sqrt() * dx;
    if ratio > MAX_WINDOW_STEP {
        return Err(WfsError::WindowUnresolved { ratio });
    }
    Ok(())
}

/// Transform at one position for frequencies `k·s` with `s = 2π/(MΔx)`,
/// `M = N / 2^p`. Returns the values at the requested integer multiples.
#[allow(clippy::too_many_arguments)]
fn windowed_bins(
    u: &SampledSignal,
    supp: &[(usize, usize)],
    w: &ScaledWindow,
    x: &[f64],
    p: u32,
    fft: &Arc<dyn Fft<f64>>,
    ks: &[Vec<i64>],
    frame: Option<Frame>,
) -> Vec<Complex64> {
    let g = &u.grid;
    let n = g.n();
    let m = n >> p;
    let dim = g.dim;
    let r = w.spatial_radius();
    let dx = g.dx();
    let ranges: Vec<Option<(usize, usize)>> = (0..dim).map(|a| crop(g, supp[a], x[a], r)).collect();
    if ranges.iter().any(|c| c.is_none()) {
        return vec![ZERO; ks.len()];
    }
    let ranges: Vec<(usize, usize)> = ranges.into_iter().map(|c| c.unwrap()).collect();
    let mut buf = vec![ZERO; m.pow(dim as u32)];
    if dim == 1 {
        for i in ranges[0].0..=ranges[0].1 {
            let v = u.values[i];
            if v != ZERO {
                buf[i % m] += w.eval(&[g.coord(i) - x[0]]).conj() * v;
            }
        }
        fft.process(&mut buf);
    } else {
        for i in ranges[0].0..=ranges[0].1 {
            let y1 = g.coord(i) - x[0];
            let row = &u.values[i * n..(i + 1) * n];
            let fold = (i % m) * m;
            for j in ranges[1].0..=ranges[1].1 {
                let v = row[j];
                if v != ZERO {
                    let d = [y1, g.coord(j) - x[1]];
                    let phi = match frame {
                        Some(f) => w.eval(&f.to_world(&d)),
                        None => w.eval(&d),
                    };
                    buf[fold + j % m] += phi.conj() * v;
                }
            }
        }
        fft2(&mut buf, m, fft);
    }
    let s = 2.0 * PI / (m as f64 * dx);
    let scale = dx.powi(dim as i32);
    ks.iter()
        .map(|k| {
            let mut idx = 0usize;
            let mut phase = 0.0;
            for &ka in k {
                idx = idx * m + ka.rem_euclid(m as i64) as usize;
                phase += g.half_width * ka as f64 * s;
            }
            buf[idx] * Complex64::from_polar(scale, phase)
        })
        .collect()
}

/// Sampled-path transform at scattered points: `Δx^n Σ_y conj φ_λ(y-x) u(y) e^{-iy·ξ}`
/// for every `x` in `xs` and rescaled frequency `ξ` in `xis` (position-major).
pub fn wpt_sampled(
    u: &SampledSignal,
    w: &ScaledWindow,
    xs: &[Vec<f64>],
    xis: &[Vec<f64>],
) -> Result<Vec<Complex64>> {
    let g = &u.grid;
    let max_xi = xis
        .iter()
        .map(|v| v.iter().map(|c| c * c).sum::<f64>().sqrt())
        .fold(0.0, f64::max);
    check_resolution(g, 1.0, max_xi)?;
    let ratio = w.sqrt_lambda() * g.dx();
    if ratio > MAX_WINDOW_STEP {
        return Err(WfsError::WindowUnresolved { ratio });
    }
    let supp = support_box(u);
    let r = w.spatial_radius();
    let n = g.n();
    let scale = g.dx().powi(g.dim as i32);
    let mut out = Vec::with_capacity(xs.len() * xis.len());
    for x in xs {
        let ranges: Vec<Option<(usize, usize)>> =
            (0..g.dim).map(|a| crop(g, supp[a], x[a], r)).collect();
        let mut prod: Vec<(Vec<f64>, Complex64)> = Vec::new();
        if ranges.iter().all(|c| c.is_some()) {
            let rg: Vec<(usize, usize)> = ranges.into_iter().map(|c| c.unwrap()).collect();
            if g.dim == 1 {
                for i in rg[0].0..=rg[0].1 {
                    let v = u.values[i];
                    if v != ZERO {
                        let y = g.coord(i);
                        prod.push((vec![y], w.eval(&[y - x[0]]).conj() * v));
                    }
                }
            } else {
                for i in rg[0].0..=rg[0].1 {
                    for j in rg[1].0..=rg[1].1 {
                        let v = u.values[i * n + j];
                        if v != ZERO {
                            let y = [g.coord(i), g.coord(j)];
                            prod.push((y.to_vec(), w.eval(&[y[0] - x[0], y[1] - x[1]]).conj() * v));
                        }
                    }
                }
            }
        }
        for xi in xis {
            let mut acc = ZERO;
            for (y, pv) in &prod {
                let ph: f64 = y.iter().zip(xi).map(|(a, b)| a * b).sum();
                acc += pv * Complex64::from_polar(1.0, -ph);
            }
            out.push(acc * scale);
        }
    }
    Ok(out)
}

/// All `M^n` bins of the sampled transform at position `x`, for bin spacing
/// `2^p Δξ`. Bin `k` (signed, FFT order) holds the value at rescaled frequency
/// `k · 2^p · π/L` per axis.
pub fn wpt_sampled_bins(u: &SampledSignal, w: &ScaledWindow, x: &[f64], p: u32) -> Vec<Complex64> {
    let g = &u.grid;
    let m = g.n() >> p;
    let supp = support_box(u);
    let fft = FftPlanner::new().plan_fft_forward(m);
    let ms = m as i64;
    let signed = |i: usize| {
        if (i as i64) < ms / 2 {
            i as i64
        } else {
            i as i64 - ms
        }
    };
    let ks: Vec<Vec<i64>> = if g.dim == 1 {
        (0..m).map(|i| vec![signed(i)]).collect()
    } else {
        (0..m * m)
            .map(|i| vec![signed(i / m), signed(i % m)])
            .collect()
    };
    windowed_bins(u, &supp, w, x, p, &fft, &ks, None)
}

fn quad_panels(width: f64, lambda: f64, x_abs: f64, support: f64) -> usize {
    (width * (lambda.sqrt() * (x_abs + support) + 10.0) / PI).ceil() as usize + 4
}

/// Quadrature-path transform at a single point `(x, ξ')`, `ξ' = λξ`.
pub fn wpt_quadrature(
    dist: &TestDistribution,
    w: &ScaledWindow,
    x: &[f64],
    xi: &[f64],
) -> Result<Complex64> {
    if !dist.has_analytic_ft() {
        return Err(WfsError::Unsupported(format!(
            "{dist} has no analytic Fourier transform"
        )));
    }
    let n = dist.dim();
    if x.len() != n || xi.len() != n || w.base().dim() != n {
        return Err(WfsError::InvalidArgument(
            "dimension mismatch in quadrature evaluation".into(),
        ));
    }
    let base = w.base();
    // W(x, -ξ) = conj W(x, ξ) for real u and real even φ; use it so the
    // symmetry holds exactly.
    if dist.is_real() && base.is_real_even() && xi[0] < 0.0 {
        let flipped: Vec<f64> = xi.iter().map(|v| -v).collect();
        return Ok(wpt_quadrature(dist, w, x, &flipped)?.conj());
    }
    let sl = w.sqrt_lambda();
    let lam = w.lambda();
    let pref = (2.0 * PI).powi(-(n as i32)) * w.amplitude();
    let ru = dist.support_radius();
    let xn = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    let value = if n == 1 {
        let mut acc = ZERO;
        for (a, b) in base.ft_intervals() {
            let opts = QuadOptions {
                abs_tol: 1e-13,
                panels: quad_panels(b - a, lam, xn, ru),
                max_depth: 20,
            };
            let r = integrate(
                |z| {
                    let uh = dist.fourier_analytic(&[xi[0] + sl * z]).unwrap_or(ZERO);
                    uh * base.eval_ft(&[z]).conj() * Complex64::from_polar(1.0, x[0] * sl * z)
                },
                a,
                b,
                &opts,
            );
            acc += r.value;
        }
        acc
    } else {
        let rad = base.ft_radius();
        let panels = quad_panels(2.0 * rad, lam, xn, ru);
        let outer = QuadOptions {
            abs_tol: 1e-12,
            panels,
            max_depth: 12,
        };
        let inner = QuadOptions {
            abs_tol: 1e-13,
            panels,
            max_depth: 12,
        };
        integrate(
            |z1| {
                integrate(
                    |z2| {
                        let eta = [xi[0] + sl * z1, xi[1] + sl * z2];
                        let uh = dist.fourier_analytic(&eta).unwrap_or(ZERO);
                        uh * base.eval_ft(&[z1, z2]).conj()
                            * Complex64::from_polar(1.0, sl * (x[0] * z1 + x[1] * z2))
                    },
                    -rad,
                    rad,
                    &inner,
                )
                .value
            },
            -rad,
            rad,
            &outer,
        )
        .value
    };
    Ok(value * pref)
}

/// Quadrature path on a 1D lattice: midpoint rule in `ζ` with spacing fine
/// enough that periodic images of the `x` dependence fall outside the window
/// and distribution supports. Returns values position-major.
fn quadrature_lattice(
    dist: &TestDistribution,
    window: &Window,
    lambda: f64,
    xs: &[Vec<f64>],
    freqs: &[f64],
    exec: Exec,
) -> Vec<Complex64> {
    let sl = lambda.sqrt();
    let pref = lambda.powf(0.25) / (2.0 * PI);
    let xmax = xs.iter().map(|x| x[0].abs()).fold(0.0, f64::max);
    let period = 1.1 * (sl * (dist.support_radius() + xmax) + window.spatial_radius()) + 1.0;
    let dz = 2.0 * PI / period;
    let mut nodes: Vec<(f64, f64, Complex64)> = Vec::new();
    for (a, b) in window.ft_intervals() {
        let cnt = ((b - a) / dz).ceil().max(1.0) as usize;
        let h = (b - a) / cnt as f64;
        for m in 0..cnt {
            let z = a + (m as f64 + 0.5) * h;
            nodes.push((z, h, window.eval_ft(&[z]).conj()));
        }
    }
    let mirror = dist.is_real() && window.is_real_even();
    let cols = map_indexed(exec, freqs.len(), |ik| {
        let flip = mirror && freqs[ik] < 0.0;
        let xi = if flip { -freqs[ik] } else { freqs[ik] };
        let g: Vec<(f64, Complex64)> = nodes
            .iter()
            .map(|&(z, h, phi)| {
                let uh = dist.fourier_analytic(&[xi + sl * z]).unwrap_or(ZERO);
                (sl * z, uh * phi * h)
            })
            .collect();
        xs.iter()
            .map(|x| {
                let mut acc = ZERO;
                for &(t, v) in &g {
                    acc += v * Complex64::from_polar(1.0, x[0] * t);
                }
                if flip {
                    acc.conj() * pref
                } else {
                    acc * pref
                }
            })
            .collect::<Vec<Complex64>>()
    });
    let nk = freqs.len();
    let mut out = vec![ZERO; xs.len() * nk];
    for (ik, col) in cols.into_iter().enumerate() {
        for (ix, v) in col.into_iter().enumerate() {
            out[ix * nk + ik] = v;
        }
    }
    out
}

/// Resolve `Auto` to a concrete path for `dist`.
pub fn resolve_path(choice: PathChoice, dist: &TestDistribution) -> Result<PathChoice> {
    match choice {
        PathChoice::Auto => Ok(if dist.has_analytic_ft() && dist.dim() == 1 {
            PathChoice::Quadrature
        } else {
            PathChoice::Sampled
        }),
        PathChoice::Quadrature => {
            if !dist.has_analytic_ft() {
                Err(WfsError::Unsupported(format!(
                    "{dist} has no analytic Fourier transform"
                )))
            } else if dist.dim() != 1 {
                Err(WfsError::Unsupported(
                    "quadrature volumes are only available in 1D".into(),
                ))
            } else {
                Ok(PathChoice::Quadrature)
            }
        }
        PathChoice::Sampled => Ok(PathChoice::Sampled),
    }
}

/// Check that the sampled path can run for every region and scale, and that
/// the working set fits the memory budget.
pub fn check_admissible(
    cfg: &EngineConfig,
    path: PathChoice,
    regions: &[PhaseRegion],
    schedule: &LambdaSchedule,
    threads: usize,
) -> Result<()> {
    let g = &cfg.grid;
    let mut volume_bytes = 0u64;
    let mut work = 0u64;
    for j in 0..schedule.len() {
        let lam = schedule.lambda(j);
        for r in regions {
            if path == PathChoice::Sampled {
                check_resolution(g, lam, r.max_xi())?;
            }
            let l = r.lattice(lam, g.dxi());
            volume_bytes += l.len() as u64 * 16;
            let m = (g.n() >> l.log2_step) as u64;
            work = work.max(m.pow(g.dim as u32) * 16 * threads as u64);
        }
    }
    let needed = volume_bytes
        + work
        + if path == PathChoice::Sampled {
            g.bytes()
        } else {
            0
        };
    if needed > cfg.memory_budget {
        return Err(WfsError::ResolutionBudget {
            needed,
            budget: cfg.memory_budget,
        });
    }
    Ok(())
}

/// Volumes for several regions sharing the same position box `K` (typically
/// one per direction), computed with shared transforms.
pub fn scaled_volumes(
    dist: &TestDistribution,
    window: &Window,
    regions: &[PhaseRegion],
    schedule: &LambdaSchedule,
    cfg: &EngineConfig,
) -> Result<Vec<WptVolume>> {
    let Some(first) = regions.first() else {
        return Err(WfsError::InvalidArgument("no regions requested".into()));
    };
    if schedule.is_empty() {
        return Err(WfsError::EmptyVolume("empty schedule".into()));
    }
    let dim = dist.dim();
    if window.dim() != dim || cfg.grid.dim != dim {
        return Err(WfsError::InvalidArgument(
            "window, grid and distribution dimensions differ".into(),
        ));
    }
    for r in regions {
        if r.dim() != dim || r.x0 != first.x0 || r.k_half != first.k_half {
            return Err(WfsError::InvalidArgument(
                "regions in one batch must share the position box".into(),
            ));
        }
    }
    let path = resolve_path(cfg.path, dist)?;
    let threads = if cfg.exec.is_parallel() {
        crate::par::worker_count()
    } else {
        1
    };
    check_admissible(cfg, path, regions, schedule, threads)?;
    let g = cfg.grid;
    let frame = if path == PathChoice::Sampled {
        dist.preferred_frame()
    } else {
        None
    };
    let sampled = if path == PathChoice::Sampled {
        Some(dist.sample_in(&g, frame)?)
    } else {
        None
    };
    let supp = sampled.as_ref().map(support_box);

    let mut slabs: Vec<Vec<Slab>> = vec![Vec::with_capacity(schedule.len()); regions.len()];
    for j in 0..schedule.len() {
        let lam = schedule.lambda(j);
        let lattices: Vec<Lattice> = regions
            .iter()
            .map(|r| r.lattice_in(lam, g.dxi(), frame))
            .collect();
        let xs = &lattices[0].xs;
        let per_region: Vec<Vec<Complex64>> = match (&sampled, &supp) {
            (Some(u), Some(supp)) => {
                let sw = scale(window, lam)?;
                let p = lattices[0].log2_step;
                let fft = FftPlanner::new().plan_fft_forward(g.n() >> p);
                let all_ks: Vec<Vec<i64>> =
                    lattices.iter().flat_map(|l| l.ks.iter().cloned()).collect();
                let rows = map_indexed(cfg.exec, xs.len(), |ix| {
                    windowed_bins(u, supp, &sw, &xs[ix], p, &fft, &all_ks, frame)
                });
                let mut out = Vec::with_capacity(lattices.len());
                let mut off = 0;
                for l in &lattices {
                    let nk = l.ks.len();
                    let mut v = Vec::with_capacity(xs.len() * nk);
                    for row in &rows {
                        v.extend_from_slice(&row[off..off + nk]);
                    }
                    off += nk;
                    out.push(v);
                }
                out
            }
            _ => lattices
                .iter()
                .map(|l| {
                    let freqs: Vec<f64> = (0..l.ks.len()).map(|i| l.scaled_xi(i)[0]).collect();
                    quadrature_lattice(dist, window, lam, xs, &freqs, cfg.exec)
                })
                .collect(),
        };
        for (ri, (l, values)) in lattices.into_iter().zip(per_region).enumerate() {
            if values
                .iter()
                .any(|v| !v.re.is_finite() || !v.im.is_finite())
            {
                return Err(WfsError::EmptyVolume(format!(
                    "non-finite transform value at lambda {lam}"
                )));
            }
            slabs[ri].push(Slab { lattice: l, values });
        }
    }
    Ok(regions
        .iter()
        .zip(slabs)
        .map(|(r, s)| WptVolume {
            region: r.clone(),
            schedule: schedule.clone(),
            window: window.name().to_string(),
            dist: dist.to_string(),
            path,
            slabs: s,
        })
        .collect())
}

pub fn scaled_volume(
    dist: &TestDistribution,
    window: &Window,
    region: &PhaseRegion,
    schedule: &LambdaSchedule,
    cfg: &EngineConfig,
) -> Result<WptVolume> {
    Ok(scaled_volumes(dist, window, std::slice::from_ref(region), schedule, cfg)?.remove(0))
}
