//! Fourier-side oracles: conic decay and conic Sobolev tests on `F[χu]`, and
//! their comparison with the wave packet route.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::detect::{
    classify, classify_sequence, estimate_sobolev_volume, linear_fit, ser_f64, Classification,
    DecayFit, SobolevEstimate, Thresholds, LOG_CLAMP,
};
use crate::distribution::TestDistribution;
use crate::engine::{fft2, scaled_volumes, EngineConfig};
use crate::grid::Grid;
use crate::lattice::{Frame, LambdaSchedule, PhaseRegion};
use crate::smooth::Bump1d;
use crate::window::Window;
use crate::{Result, WfsError};

/// Minimum number of dyadic octaves the shell decomposition must span.
pub const MIN_OCTAVES: f64 = 4.0;

/// Largest tolerated `|s_star - conic_sobolev_s|` for agreement.
pub const S_TOLERANCE: f64 = 0.15;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleOptions {
    /// Support radius of the localizing cutoff `χ`.
    pub cutoff_radius: f64,
    /// Outer shell edge as a fraction of the grid Nyquist frequency.
    pub band_fraction: f64,
    /// Inner radius of the first shell.
    pub r0: f64,
}

impl OracleOptions {
    pub fn for_dim(dim: usize) -> Self {
        if dim == 1 {
            Self {
                cutoff_radius: 0.5,
                band_fraction: 0.9,
                r0: 4.0,
            }
        } else {
            Self {
                cutoff_radius: 1.5,
                band_fraction: 0.9,
                r0: 4.0,
            }
        }
    }

    /// Shrink the cutoff so its support stays inside the plateau of the
    /// distribution's box cutoff around `point`.
    pub fn fitted(mut self, point: &[f64], half_width: f64) -> Self {
        let room = point
            .iter()
            .map(|c| half_width / 2.0 - c.abs())
            .fold(f64::INFINITY, f64::min);
        self.cutoff_radius = self.cutoff_radius.min(0.95 * room).max(0.0);
        self
    }
}

/// Radial cutoff: a Gaussian of width `r/9` tapered to zero at radius `r`.
#[derive(Debug, Clone, Copy)]
pub struct LocalCutoff {
    sigma: f64,
    taper: Bump1d,
}

impl LocalCutoff {
    pub fn new(radius: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(WfsError::InvalidArgument(format!(
                "cutoff radius must be positive, got {radius}"
            )));
        }
        let sigma = radius / 9.0;
        Ok(Self {
            sigma,
            taper: Bump1d {
                center: 0.0,
                plateau: 7.0 * sigma,
                width: 2.0 * sigma,
            },
        })
    }

    pub fn radius(&self) -> f64 {
        9.0 * self.sigma
    }

    pub fn eval(&self, r: f64) -> f64 {
        (-0.5 * (r / self.sigma).powi(2)).exp() * self.taper.eval(r)
    }
}

/// Discrete Fourier transform of `χ(· - x₀) u` on the full sampling grid.
pub struct LocalSpectrum {
    grid: Grid,
    point: Vec<f64>,
    frame: Option<Frame>,
    values: Vec<Complex64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleVerdict {
    #[serde(serialize_with = "ser_f64")]
    pub conic_decay_slope: f64,
    #[serde(serialize_with = "ser_f64")]
    pub conic_r_squared: f64,
    pub conic_classification: Classification,
    #[serde(serialize_with = "ser_f64")]
    pub shell_slope: f64,
    #[serde(serialize_with = "ser_f64")]
    pub conic_sobolev_s: f64,
    pub octaves: f64,
    pub radii: Vec<f64>,
    pub shell_max: Vec<f64>,
    pub shell_energy: Vec<f64>,
    pub classification_agrees: Option<bool>,
    pub s_agrees: Option<bool>,
}

impl LocalSpectrum {
    pub fn new(
        dist: &TestDistribution,
        grid: &Grid,
        point: &[f64],
        cutoff: &LocalCutoff,
    ) -> Result<Self> {
        if point.len() != grid.dim {
            return Err(WfsError::InvalidArgument(
                "point dimension does not match the grid".into(),
            ));
        }
        let frame = if grid.dim == 2 {
            dist.preferred_frame()
        } else {
            None
        };
        let mut u = dist.sample_in(grid, frame)?;
        let n = grid.n();
        let point_f = match frame {
            Some(f) => f.to_frame(point),
            None => point.to_vec(),
        };
        let point = &point_f[..];
        let r = cutoff.radius();
        match grid.dim {
            1 => {
                for (i, v) in u.values.iter_mut().enumerate() {
                    let d = (grid.coord(i) - point[0]).abs();
                    *v *= if d < r { cutoff.eval(d) } else { 0.0 };
                }
                FftPlanner::new().plan_fft_forward(n).process(&mut u.values);
            }
            _ => {
                for i in 0..n {
                    let a = grid.coord(i) - point[0];
                    for j in 0..n {
                        let b = grid.coord(j) - point[1];
                        let d = a.hypot(b);
                        u.values[i * n + j] *= if d < r { cutoff.eval(d) } else { 0.0 };
                    }
                }
                let fft = FftPlanner::new().plan_fft_forward(n);
                fft2(&mut u.values, n, &fft);
            }
        }
        let s = grid.dx().powi(grid.dim as i32);
        for v in u.values.iter_mut() {
            *v *= s;
        }
        Ok(Self {
            grid: *grid,
            point: match frame {
                Some(f) => f.to_world(point),
                None => point.to_vec(),
            },
            frame,
            values: u.values,
        })
    }

    pub fn point(&self) -> &[f64] {
        &self.point
    }

    fn freq(&self, k: usize) -> f64 {
        let n = self.grid.n();
        let kk = if k < n / 2 {
            k as f64
        } else {
            k as f64 - n as f64
        };
        kk * self.grid.dxi()
    }

    /// Decay and shell statistics on the cone of unit `direction` with the
    /// given half-angle, over half-octave shells `[R, 2R)`.
    pub fn conic(
        &self,
        direction: &[f64],
        half_angle: f64,
        opts: &OracleOptions,
        th: &Thresholds,
    ) -> Result<OracleVerdict> {
        let dim = self.grid.dim;
        if direction.len() != dim {
            return Err(WfsError::InvalidArgument(
                "direction dimension does not match the grid".into(),
            ));
        }
        let norm = direction.iter().map(|d| d * d).sum::<f64>().sqrt();
        if !(norm > 0.0) {
            return Err(WfsError::InvalidArgument(
                "cone direction must be non-zero".into(),
            ));
        }
        let dir: Vec<f64> = direction.iter().map(|d| d / norm).collect();
        let dir = match self.frame {
            Some(f) => f.to_frame(&dir),
            None => dir,
        };
        let outer = opts.band_fraction * self.grid.nyquist();
        let octaves = (outer / opts.r0).log2();
        if !(octaves >= MIN_OCTAVES) {
            return Err(WfsError::UnresolvedBand {
                octaves: octaves.max(0.0),
            });
        }
        let mut radii = Vec::new();
        let mut r = opts.r0;
        while 2.0 * r <= outer * (1.0 + 1e-12) {
            radii.push(r);
            r *= 2f64.sqrt();
        }
        let cos_tol = half_angle.cos();
        let mut shell_max = vec![0.0f64; radii.len()];
        let mut shell_energy = vec![0.0f64; radii.len()];
        let cell = self.grid.dxi().powi(dim as i32);
        let n = self.grid.n();
        let mut visit = |xi: &[f64], v: Complex64| {
            let m = xi.iter().map(|c| c * c).sum::<f64>().sqrt();
            if m < opts.r0 || m >= outer {
                return;
            }
            let c = xi.iter().zip(&dir).map(|(a, b)| a * b).sum::<f64>() / m;
            if c < cos_tol {
                return;
            }
            let a = v.norm();
            for (i, &r) in radii.iter().enumerate() {
                if m >= r && m < 2.0 * r {
                    shell_max[i] = shell_max[i].max(a);
                    shell_energy[i] += a * a * cell;
                }
            }
        };
        if dim == 1 {
            for k in 0..n {
                visit(&[self.freq(k)], self.values[k]);
            }
        } else {
            for i in 0..n {
                let a = self.freq(i);
                if a.abs() >= outer {
                    continue;
                }
                for j in 0..n {
                    let b = self.freq(j);
                    if b.abs() < outer {
                        visit(&[a, b], self.values[i * n + j]);
                    }
                }
            }
        }

        let decay = classify_sequence(&radii, &shell_max, th)?;
        let energy: Vec<f64> = shell_energy.iter().map(|v| v.max(LOG_CLAMP)).collect();
        let peak = energy.iter().cloned().fold(0.0, f64::max);
        let floor = (crate::detect::J_REL_FLOOR * peak).max(LOG_CLAMP);
        let start = radii.len() / 2;
        let (lx, ly): (Vec<f64>, Vec<f64>) = (start..radii.len())
            .filter(|&i| energy[i] > floor)
            .map(|i| (radii[i].ln(), energy[i].ln()))
            .unzip();
        let total = radii.len() - start;
        let (shell_slope, conic_sobolev_s) = if 2 * (total - lx.len()) > total || lx.len() < 2 {
            (f64::NEG_INFINITY, f64::INFINITY)
        } else {
            let (b, _, _) = linear_fit(&lx, &ly);
            (b, -b / 2.0)
        };
        Ok(OracleVerdict {
            conic_decay_slope: decay.slope,
            conic_r_squared: decay.r_squared,
            conic_classification: decay.classification,
            shell_slope,
            conic_sobolev_s,
            octaves,
            radii,
            shell_max,
            shell_energy,
            classification_agrees: None,
            s_agrees: None,
        })
    }
}

/// Cone half-angle matching a frequency box of half-width `v_half` around `xi0`.
pub fn cone_half_angle(xi0: &[f64], v_half: f64) -> f64 {
    if xi0.len() == 1 {
        return PI / 2.0;
    }
    let m = xi0.iter().map(|c| c * c).sum::<f64>().sqrt();
    (v_half / m).atan()
}

pub fn conic_fourier_oracle(
    dist: &TestDistribution,
    grid: &Grid,
    point: &[f64],
    direction: &[f64],
    half_angle: f64,
    opts: &OracleOptions,
    th: &Thresholds,
) -> Result<OracleVerdict> {
    let cutoff = LocalCutoff::new(opts.cutoff_radius)?;
    LocalSpectrum::new(dist, grid, point, &cutoff)?.conic(direction, half_angle, opts, th)
}

#[derive(Debug, Clone, Serialize)]
pub struct EquivalenceReport {
    pub point: Vec<f64>,
    pub direction: Vec<f64>,
    pub decay: DecayFit,
    pub sobolev: SobolevEstimate,
    pub oracle: OracleVerdict,
    #[serde(serialize_with = "ser_f64")]
    pub s_gap: f64,
    pub agrees: bool,
}

/// Fill the agreement flags of `oracle` against the wave packet results.
pub fn compare(
    decay: &DecayFit,
    sobolev: &SobolevEstimate,
    oracle: &mut OracleVerdict,
) -> (f64, bool) {
    let class_ok = decay.classification == oracle.conic_classification;
    let gap = if sobolev.s_star.is_infinite() && oracle.conic_sobolev_s.is_infinite() {
        0.0
    } else {
        (sobolev.s_star - oracle.conic_sobolev_s).abs()
    };
    let regular = decay.classification == Classification::Regular && class_ok;
    let s_ok = regular || gap <= S_TOLERANCE;
    oracle.classification_agrees = Some(class_ok);
    oracle.s_agrees = Some(s_ok);
    (gap, class_ok && s_ok)
}

/// Run both routes for every region (sharing one position box) and compare.
pub fn equivalence_check(
    dist: &TestDistribution,
    window: &Window,
    regions: &[PhaseRegion],
    schedule: &LambdaSchedule,
    cfg: &EngineConfig,
    th: &Thresholds,
    opts: &OracleOptions,
) -> Result<Vec<EquivalenceReport>> {
    let vols = scaled_volumes(dist, window, regions, schedule, cfg)?;
    let point = &regions[0].x0;
    let opts = opts.fitted(point, dist.half_width());
    let spectrum = LocalSpectrum::new(
        dist,
        &cfg.grid,
        point,
        &LocalCutoff::new(opts.cutoff_radius)?,
    )?;
    let mut out = Vec::with_capacity(vols.len());
    for (r, vol) in regions.iter().zip(&vols) {
        let decay = classify(vol, th)?;
        let sobolev = estimate_sobolev_volume(vol)?;
        let mut oracle = spectrum.conic(&r.xi0, cone_half_angle(&r.xi0, r.v_half), &opts, th)?;
        let (s_gap, agrees) = compare(&decay, &sobolev, &mut oracle);
        out.push(EquivalenceReport {
            point: point.clone(),
            direction: r.xi0.clone(),
            decay,
            sobolev,
            oracle,
            s_gap,
            agrees,
        });
    }
    Ok(out)
}
