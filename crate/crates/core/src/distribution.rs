//! Test distributions with samplers, analytic Fourier transforms and known
//! microlocal ground truth.
//!
//! Every kind except `delta` and `smooth_bump` is multiplied by the box cutoff
//! `χ`, a C∞ bump equal to 1 on `[-L/2, L/2]^n` and vanishing beyond `3L/4`.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use serde::Serialize;

use crate::grid::{Grid, SampledSignal};
use crate::lattice::Frame;
use crate::quad::{integrate, QuadOptions};
use crate::smooth::{Bump1d, FourierTable};
use crate::special::{gaussian_power_ft, hurwitz_zeta};
use crate::{Result, WfsError};

/// Standard deviation of `smooth_bump`.
pub const BUMP_SIGMA: f64 = 0.3;

/// Largest frequency served by the tabulated transforms.
pub const ANALYTIC_ETA_MAX: f64 = 8192.0;

const POWER_TAYLOR_ORDER: usize = 4;

#[derive(Debug, Clone)]
pub enum Kind {
    Delta { x0: Vec<f64> },
    Heaviside { x0: f64 },
    PowerSing { x0: f64, a: f64 },
    PlaneWave { k: Vec<f64> },
    SmoothBump,
    HalfPlane { nu: [f64; 2], c: f64 },
    WeightedSum(Vec<(f64, TestDistribution)>),
}

#[derive(Debug)]
enum FtData {
    None,
    Edge(Arc<FourierTable>),
    Power { sigma: f64, remainder: FourierTable },
}

#[derive(Debug, Clone)]
pub struct TestDistribution {
    kind: Kind,
    dim: usize,
    half_width: f64,
    cutoff: Bump1d,
    ft: Arc<OnceLock<FtData>>,
}

impl TestDistribution {
    fn build(kind: Kind, dim: usize, half_width: f64) -> Result<Self> {
        if !(dim == 1 || dim == 2) {
            return Err(WfsError::InvalidArgument(format!(
                "dimension must be 1 or 2, got {dim}"
            )));
        }
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(WfsError::InvalidArgument(
                "box half-width must be positive".into(),
            ));
        }
        let inner = half_width / 2.0;
        let check_point = |x: &[f64]| -> Result<()> {
            if x.len() != dim {
                return Err(WfsError::InvalidArgument(format!(
                    "point has {} coordinates, expected {dim}",
                    x.len()
                )));
            }
            if x.iter().any(|v| !v.is_finite() || v.abs() > inner) {
                return Err(WfsError::InvalidArgument(format!(
                    "singular support {x:?} must lie in the cutoff plateau |x| <= {inner}"
                )));
            }
            Ok(())
        };
        match &kind {
            Kind::Delta { x0 } => check_point(x0)?,
            Kind::Heaviside { x0 } => {
                one_dim(dim, "heaviside")?;
                check_point(&[*x0])?;
            }
            Kind::PowerSing { x0, a } => {
                one_dim(dim, "powersing")?;
                check_point(&[*x0])?;
                if !(*a > 0.0 && *a < 1.0) {
                    return Err(WfsError::InvalidArgument(format!(
                        "powersing exponent must satisfy 0 < a < 1, got {a}"
                    )));
                }
                if *x0 == inner || *x0 == -inner {
                    return Err(WfsError::InvalidArgument(
                        "powersing point on the cutoff edge".into(),
                    ));
                }
            }
            Kind::PlaneWave { k } => {
                if k.len() != dim || k.iter().any(|v| !v.is_finite()) {
                    return Err(WfsError::InvalidArgument(
                        "plane wave vector has wrong length".into(),
                    ));
                }
            }
            Kind::SmoothBump => {}
            Kind::HalfPlane { nu, c } => {
                if dim != 2 {
                    return Err(WfsError::InvalidArgument(
                        "halfplane requires dimension 2".into(),
                    ));
                }
                let r = (nu[0] * nu[0] + nu[1] * nu[1]).sqrt();
                if !(r > 0.0 && r.is_finite()) || !c.is_finite() {
                    return Err(WfsError::InvalidArgument(
                        "halfplane normal must be non-zero".into(),
                    ));
                }
                if c.abs() >= inner {
                    return Err(WfsError::InvalidArgument(format!(
                        "halfplane offset {c} puts the edge outside the plateau"
                    )));
                }
            }
            Kind::WeightedSum(terms) => {
                if terms.is_empty() {
                    return Err(WfsError::InvalidArgument("empty sum".into()));
                }
                for (w, t) in terms {
                    if !w.is_finite() {
                        return Err(WfsError::InvalidArgument("non-finite sum weight".into()));
                    }
                    if t.dim != dim || t.half_width != half_width {
                        return Err(WfsError::InvalidArgument(
                            "sum terms disagree on dimension or box".into(),
                        ));
                    }
                }
            }
        }
        let kind = match kind {
            Kind::HalfPlane { nu, c } => {
                let r = (nu[0] * nu[0] + nu[1] * nu[1]).sqrt();
                Kind::HalfPlane {
                    nu: [nu[0] / r, nu[1] / r],
                    c,
                }
            }
            k => k,
        };
        Ok(Self {
            kind,
            dim,
            half_width,
            cutoff: Bump1d::box_cutoff(half_width),
            ft: Arc::new(OnceLock::new()),
        })
    }

    pub fn delta(x0: &[f64], half_width: f64) -> Result<Self> {
        Self::build(Kind::Delta { x0: x0.to_vec() }, x0.len(), half_width)
    }

    pub fn heaviside(x0: f64, half_width: f64) -> Result<Self> {
        Self::build(Kind::Heaviside { x0 }, 1, half_width)
    }

    pub fn power_sing(x0: f64, a: f64, half_width: f64) -> Result<Self> {
        Self::build(Kind::PowerSing { x0, a }, 1, half_width)
    }

    pub fn plane_wave(k: &[f64], half_width: f64) -> Result<Self> {
        Self::build(Kind::PlaneWave { k: k.to_vec() }, k.len(), half_width)
    }

    pub fn smooth_bump(dim: usize, half_width: f64) -> Result<Self> {
        Self::build(Kind::SmoothBump, dim, half_width)
    }

    pub fn halfplane(nu: [f64; 2], c: f64, half_width: f64) -> Result<Self> {
        Self::build(Kind::HalfPlane { nu, c }, 2, half_width)
    }

    pub fn weighted_sum(terms: Vec<(f64, TestDistribution)>) -> Result<Self> {
        let (dim, hw) = match terms.first() {
            Some((_, t)) => (t.dim, t.half_width),
            None => return Err(WfsError::InvalidArgument("empty sum".into())),
        };
        Self::build(Kind::WeightedSum(terms), dim, hw)
    }

    /// Parse a spec string such as `"powersing@0.0,a=0.25"` or
    /// `"sum(delta@-1;0.5*heaviside@1)"`.
    pub fn parse(spec: &str, dim: usize, half_width: f64) -> Result<Self> {
        parse_spec(spec.trim(), dim, half_width)
    }

    pub fn kind(&self) -> &Kind {
        &self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    /// Radius of a ball about the origin containing the support.
    pub fn support_radius(&self) -> f64 {
        let r = (self.dim as f64).sqrt();
        match &self.kind {
            Kind::Delta { x0 } => norm(x0),
            Kind::SmoothBump => r * BUMP_SIGMA * (2.0 * 37.0f64).sqrt(),
            Kind::WeightedSum(terms) => terms
                .iter()
                .map(|(_, t)| t.support_radius())
                .fold(0.0, f64::max),
            _ => r * 0.75 * self.half_width,
        }
    }

    /// Whether `u` is real-valued.
    pub fn is_real(&self) -> bool {
        match &self.kind {
            Kind::PlaneWave { k } => k.iter().all(|&v| v == 0.0),
            Kind::WeightedSum(terms) => terms.iter().all(|(_, t)| t.is_real()),
            _ => true,
        }
    }

    pub fn has_analytic_ft(&self) -> bool {
        match &self.kind {
            Kind::HalfPlane { .. } => false,
            Kind::WeightedSum(terms) => terms.iter().all(|(_, t)| t.has_analytic_ft()),
            _ => true,
        }
    }

    fn chi(&self, x: &[f64]) -> f64 {
        x.iter().map(|&v| self.cutoff.eval(v)).product()
    }

    /// Samples on `grid`. The grid box must match the distribution's box.
    pub fn sample(&self, grid: &Grid) -> Result<SampledSignal> {
        self.sample_in(grid, None)
    }

    /// A 2D frame whose first axis is normal to every half-plane edge in the
    /// distribution, if there is one. Sampling in it keeps the edge on grid
    /// lines, so its aliases stay on the normal axis.
    pub fn preferred_frame(&self) -> Option<Frame> {
        let mut normals = Vec::new();
        self.collect_normals(&mut normals);
        let first = *normals.first()?;
        normals
            .iter()
            .all(|n| (n[0] * first[1] - n[1] * first[0]).abs() < 1e-12)
            .then(|| Frame::new(first).ok())
            .flatten()
    }

    fn collect_normals(&self, out: &mut Vec<[f64; 2]>) {
        match &self.kind {
            Kind::HalfPlane { nu, .. } => out.push(*nu),
            Kind::WeightedSum(terms) => terms.iter().for_each(|(_, t)| t.collect_normals(out)),
            _ => {}
        }
    }

    /// Samples at the grid nodes of `frame` (node `z` holds the value at `R z`).
    pub fn sample_in(&self, grid: &Grid, frame: Option<Frame>) -> Result<SampledSignal> {
        let frame = if self.dim == 2 { frame } else { None };
        let world = |z: &[f64]| -> Vec<f64> {
            match frame {
                Some(f) => f.to_world(z),
                None => z.to_vec(),
            }
        };
        if grid.dim != self.dim {
            return Err(WfsError::InvalidArgument(format!(
                "grid dimension {} does not match distribution dimension {}",
                grid.dim, self.dim
            )));
        }
        if (grid.half_width - self.half_width).abs() > 1e-12 * self.half_width {
            return Err(WfsError::InvalidArgument(format!(
                "grid half-width {} does not match distribution box {}",
                grid.half_width, self.half_width
            )));
        }
        let dx = grid.dx();
        let tie = 1e-9 * dx;
        let sig = match &self.kind {
            Kind::Delta { x0 } => {
                let mut s = SampledSignal::zeros(*grid);
                let n = grid.n();
                let z0 = match frame {
                    Some(f) => f.to_frame(x0),
                    None => x0.clone(),
                };
                let idx = z0.iter().fold(0usize, |acc, &v| acc * n + grid.nearest(v));
                s.values[idx] = Complex64::new(dx.powi(-(self.dim as i32)), 0.0);
                s
            }
            Kind::Heaviside { x0 } => SampledSignal::from_fn(*grid, |x| {
                let d = x[0] - x0;
                let h = if d > tie {
                    1.0
                } else if d >= -tie {
                    0.5
                } else {
                    0.0
                };
                Complex64::new(h * self.cutoff.eval(x[0]), 0.0)
            }),
            Kind::PowerSing { x0, a } => {
                let mut s = SampledSignal::from_fn(*grid, |x| {
                    let d = (x[0] - x0).abs();
                    if d < tie {
                        Complex64::new(0.0, 0.0)
                    } else {
                        Complex64::new(d.powf(-a) * self.cutoff.eval(x[0]), 0.0)
                    }
                });
                // Singular node weight chosen so the grid sum of |x - x0|^{-a}
                // matches the integral to leading order (generalized zeta rule).
                let j = grid.nearest(*x0);
                let xj = grid.coord(j);
                let theta = ((xj - x0).abs() / dx).min(0.5);
                let avg =
                    -dx.powf(-a) * (hurwitz_zeta(*a, theta + 1.0) + hurwitz_zeta(*a, 1.0 - theta));
                s.values[j] = Complex64::new(avg * self.cutoff.eval(xj), 0.0);
                s
            }
            Kind::PlaneWave { k } => SampledSignal::from_fn(*grid, |z| {
                let x = &world(z)[..];
                let ph: f64 = x.iter().zip(k).map(|(a, b)| a * b).sum();
                Complex64::from_polar(self.chi(x), ph)
            }),
            Kind::SmoothBump => {
                SampledSignal::from_fn(*grid, |z| Complex64::new(gauss_bump(&world(z)), 0.0))
            }
            Kind::HalfPlane { nu, c } => SampledSignal::from_fn(*grid, |z| {
                let x = &world(z)[..];
                let d = x[0] * nu[0] + x[1] * nu[1] - c;
                let h = if d > tie {
                    1.0
                } else if d >= -tie {
                    0.5
                } else {
                    0.0
                };
                Complex64::new(h * self.chi(x), 0.0)
            }),
            Kind::WeightedSum(terms) => {
                let mut s = SampledSignal::zeros(*grid);
                for (w, t) in terms {
                    s.axpy(Complex64::new(*w, 0.0), &t.sample_in(grid, frame)?);
                }
                s
            }
        };
        Ok(sig)
    }

    /// `û(η) = ∫ u(x) e^{-ix·η} dx`.
    pub fn fourier_analytic(&self, eta: &[f64]) -> Result<Complex64> {
        if eta.len() != self.dim {
            return Err(WfsError::InvalidArgument(
                "frequency has wrong dimension".into(),
            ));
        }
        let v = match &self.kind {
            Kind::Delta { x0 } => Complex64::from_polar(1.0, -dot(x0, eta)),
            Kind::SmoothBump => {
                let s2 = BUMP_SIGMA * BUMP_SIGMA;
                let e2: f64 = eta.iter().map(|v| v * v).sum();
                Complex64::new(
                    (2.0 * PI * s2).powf(0.5 * self.dim as f64) * (-0.5 * s2 * e2).exp(),
                    0.0,
                )
            }
            Kind::PlaneWave { k } => {
                let mut v = Complex64::new(1.0, 0.0);
                for (e, kk) in eta.iter().zip(k) {
                    v *= self.cutoff_ft(e - kk);
                }
                v
            }
            Kind::Heaviside { x0 } => self.heaviside_ft(*x0, eta[0]),
            Kind::PowerSing { x0, a } => self.power_ft(*x0, *a, eta[0]),
            Kind::HalfPlane { .. } => {
                return Err(WfsError::Unsupported(
                    "halfplane has no analytic Fourier transform; use the sampled path".into(),
                ))
            }
            Kind::WeightedSum(terms) => {
                let mut v = Complex64::new(0.0, 0.0);
                for (w, t) in terms {
                    v += *w * t.fourier_analytic(eta)?;
                }
                v
            }
        };
        Ok(v)
    }

    fn ft_data(&self) -> &FtData {
        self.ft.get_or_init(|| match &self.kind {
            Kind::Heaviside { .. } | Kind::PlaneWave { .. } => {
                FtData::Edge(edge_table(self.half_width))
            }
            Kind::PowerSing { x0, a } => {
                let (sigma, remainder) =
                    power_remainder_table(*x0, *a, &self.cutoff, self.half_width);
                FtData::Power { sigma, remainder }
            }
            _ => FtData::None,
        })
    }

    fn edge(&self) -> &FourierTable {
        match self.ft_data() {
            FtData::Edge(t) => t,
            _ => unreachable!("edge table requested for a kind without one"),
        }
    }

    /// One-dimensional `χ̂(η)`.
    fn cutoff_ft(&self, eta: f64) -> Complex64 {
        let r = self.cutoff.plateau + self.cutoff.width;
        if eta.abs() < 1.0 {
            return direct_ft(|x| self.cutoff.eval(x), -r, r, eta);
        }
        if eta.abs() > ANALYTIC_ETA_MAX {
            return Complex64::new(0.0, 0.0);
        }
        // χ̂ = F[χ']/(iη) and F[χ'] = T - conj(T) with T the right-edge transform.
        Complex64::new(2.0 * self.edge().eval(eta).im / eta, 0.0)
    }

    fn heaviside_ft(&self, x0: f64, eta: f64) -> Complex64 {
        let r = self.cutoff.plateau + self.cutoff.width;
        if eta.abs() < 1.0 {
            return direct_ft(|x| self.cutoff.eval(x), x0, r, eta);
        }
        let t = if eta.abs() > ANALYTIC_ETA_MAX {
            Complex64::new(0.0, 0.0)
        } else {
            self.edge().eval(eta)
        };
        (Complex64::from_polar(1.0, -x0 * eta) + t) / Complex64::new(0.0, eta)
    }

    fn power_ft(&self, x0: f64, a: f64, eta: f64) -> Complex64 {
        let FtData::Power { sigma, remainder } = self.ft_data() else {
            unreachable!("power table requested for another kind")
        };
        let s2 = 2.0 * sigma * sigma;
        let mut sum = 0.0;
        let mut scale = 1.0;
        for j in 0..=POWER_TAYLOR_ORDER {
            sum += gaussian_power_ft(2.0 * j as f64 - a, *sigma, eta) / scale;
            scale *= s2 * (j + 1) as f64;
        }
        (Complex64::new(sum, 0.0) + remainder.eval(eta)) * Complex64::from_polar(1.0, -x0 * eta)
    }

    /// Known singular support, wave front directions and critical regularity.
    pub fn ground_truth(&self) -> GroundTruth {
        let mut gt = GroundTruth::default();
        self.collect_truth(&mut gt);
        gt
    }

    fn collect_truth(&self, gt: &mut GroundTruth) {
        let n = self.dim as f64;
        match &self.kind {
            Kind::Delta { x0 } => gt.add_point(x0.clone(), -n / 2.0),
            Kind::Heaviside { x0 } => gt.add_point(vec![*x0], 0.5),
            Kind::PowerSing { x0, a } => gt.add_point(vec![*x0], 0.5 - a),
            Kind::PlaneWave { .. } | Kind::SmoothBump => {}
            Kind::HalfPlane { nu, c } => gt.lines.push(SingularLine {
                normal: *nu,
                offset: *c,
                extent: 0.75 * self.half_width,
                critical_s: 0.5,
            }),
            Kind::WeightedSum(terms) => {
                for (w, t) in terms {
                    if *w != 0.0 {
                        t.collect_truth(gt);
                    }
                }
            }
        }
    }
}

impl fmt::Display for TestDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let pt = |x: &[f64]| -> String {
            if x.len() == 1 {
                format!("{}", x[0])
            } else {
                format!(
                    "({})",
                    x.iter()
                        .map(|v| v.to_string())
                        .collect::<Vec<_>>()
                        .join(",")
                )
            }
        };
        match &self.kind {
            Kind::Delta { x0 } => write!(f, "delta@{}", pt(x0)),
            Kind::Heaviside { x0 } => write!(f, "heaviside@{x0}"),
            Kind::PowerSing { x0, a } => write!(f, "powersing@{x0},a={a}"),
            Kind::PlaneWave { k } => write!(f, "planewave,k={}", pt(k)),
            Kind::SmoothBump => write!(f, "bump"),
            Kind::HalfPlane { nu, c } => write!(f, "halfplane,nu=({},{}),c={c}", nu[0], nu[1]),
            Kind::WeightedSum(terms) => {
                write!(f, "sum(")?;
                for (i, (w, t)) in terms.iter().enumerate() {
                    if i > 0 {
                        write!(f, ";")?;
                    }
                    if *w == 1.0 {
                        write!(f, "{t}")?;
                    } else {
                        write!(f, "{w}*{t}")?;
                    }
                }
                write!(f, ")")
            }
        }
    }
}

fn one_dim(dim: usize, what: &str) -> Result<()> {
    if dim != 1 {
        return Err(WfsError::InvalidArgument(format!(
            "{what} is only available in dimension 1"
        )));
    }
    Ok(())
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn gauss_bump(x: &[f64]) -> f64 {
    let r2: f64 = x.iter().map(|v| v * v).sum();
    (-r2 / (2.0 * BUMP_SIGMA * BUMP_SIGMA)).exp()
}

fn direct_ft<F: Fn(f64) -> f64>(g: F, a: f64, b: f64, eta: f64) -> Complex64 {
    let opts = QuadOptions {
        abs_tol: 1e-13,
        panels: 8,
        max_depth: 20,
    };
    integrate(|x| Complex64::from_polar(g(x), -x * eta), a, b, &opts).value
}

/// Transform of `χ'` restricted to the right transition band `[L/2, 3L/4]`.
fn edge_table(half_width: f64) -> Arc<FourierTable> {
    static CACHE: OnceLock<Mutex<HashMap<u64, Arc<FourierTable>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut map = cache.lock().unwrap_or_else(|e| e.into_inner());
    map.entry(half_width.to_bits())
        .or_insert_with(|| {
            let cut = Bump1d::box_cutoff(half_width);
            let (a, b) = (cut.plateau, cut.plateau + cut.width);
            Arc::new(FourierTable::build(
                |x| cut.deriv(x),
                a,
                b,
                0.02,
                ANALYTIC_ETA_MAX,
            ))
        })
        .clone()
}

/// `1 - e^{-t} Σ_{j≤K} t^j/j!`, accurate for small `t`.
fn taylor_tail(t: f64) -> f64 {
    if t < 5.0 {
        let mut term = 1.0;
        for j in 1..=POWER_TAYLOR_ORDER {
            term *= t / j as f64;
        }
        let mut sum = 0.0;
        let mut j = POWER_TAYLOR_ORDER;
        loop {
            j += 1;
            term *= t / j as f64;
            sum += term;
            if term < 1e-18 * sum || j > 200 {
                break;
            }
        }
        (-t).exp() * sum
    } else {
        let mut term = 1.0;
        let mut p = 1.0;
        for j in 1..=POWER_TAYLOR_ORDER {
            term *= t / j as f64;
            p += term;
        }
        1.0 - (-t).exp() * p
    }
}

/// `|y|^{-a} χ(x0 + y)` split as a Gaussian-weighted Taylor part with closed-form
/// transform plus a smooth remainder tabulated by FFT.
fn power_remainder_table(x0: f64, a: f64, cut: &Bump1d, half_width: f64) -> (f64, FourierTable) {
    let sigma = (0.5 * half_width - x0.abs()) / 10.0;
    let r = cut.plateau + cut.width;
    let lo = (-r - x0).min(-12.0 * sigma);
    let hi = (r - x0).max(12.0 * sigma);
    let g = |y: f64| {
        let d = y.abs();
        if d == 0.0 {
            return 0.0;
        }
        let t = d * d / (2.0 * sigma * sigma);
        let chi = cut.eval(x0 + y);
        let gp = 1.0 - taylor_tail(t);
        let diff = if chi == 1.0 { taylor_tail(t) } else { chi - gp };
        d.powf(-a) * diff
    };
    (sigma, FourierTable::build(g, lo, hi, 0.01, 2048.0))
}

/// A point singularity: every non-zero direction lies in the wave front set.
#[derive(Debug, Clone, Serialize)]
pub struct SingularPoint {
    pub x: Vec<f64>,
    pub critical_s: f64,
}

/// The edge `x·ν = c` of a half-plane, singular only in directions `±ν`.
#[derive(Debug, Clone, Serialize)]
pub struct SingularLine {
    pub normal: [f64; 2],
    pub offset: f64,
    /// Half-width of the square on which the cutoff is non-zero.
    pub extent: f64,
    pub critical_s: f64,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct GroundTruth {
    pub points: Vec<SingularPoint>,
    pub lines: Vec<SingularLine>,
}

impl GroundTruth {
    fn add_point(&mut self, x: Vec<f64>, s: f64) {
        if let Some(p) = self.points.iter_mut().find(|p| p.x == x) {
            p.critical_s = p.critical_s.min(s);
        } else {
            self.points.push(SingularPoint { x, critical_s: s });
        }
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty() && self.lines.is_empty()
    }

    /// Wave front directions at a point singularity: all unit vectors. In 1D
    /// this is `{-1, +1}`.
    pub fn directions_1d() -> [f64; 2] {
        [-1.0, 1.0]
    }

    /// Critical `s*` of the most singular feature meeting the box
    /// `|x - center|_∞ <= half_width` in a direction within `angle_tol`
    /// radians of `dir`; `None` if the region is microlocally smooth.
    pub fn critical_s_in(
        &self,
        center: &[f64],
        half_width: f64,
        dir: &[f64],
        angle_tol: f64,
    ) -> Option<f64> {
        let mut best: Option<f64> = None;
        let mut take = |s: f64| best = Some(best.map_or(s, |b: f64| b.min(s)));
        for p in &self.points {
            if p.x
                .iter()
                .zip(center)
                .all(|(a, b)| (a - b).abs() <= half_width)
            {
                take(p.critical_s);
            }
        }
        if center.len() == 2 {
            let dn = norm(dir);
            for l in &self.lines {
                let c = (dir[0] * l.normal[0] + dir[1] * l.normal[1]).abs() / dn;
                let ang = c.clamp(-1.0, 1.0).acos();
                if ang > angle_tol {
                    continue;
                }
                if line_meets_box(l, center, half_width) {
                    take(l.critical_s);
                }
            }
        }
        best
    }
}

fn line_meets_box(l: &SingularLine, center: &[f64], hw: f64) -> bool {
    let lo = [
        (center[0] - hw).max(-l.extent),
        (center[1] - hw).max(-l.extent),
    ];
    let hi = [
        (center[0] + hw).min(l.extent),
        (center[1] + hw).min(l.extent),
    ];
    if lo[0] > hi[0] || lo[1] > hi[1] {
        return false;
    }
    let corners = [
        [lo[0], lo[1]],
        [lo[0], hi[1]],
        [hi[0], lo[1]],
        [hi[0], hi[1]],
    ];
    let vals: Vec<f64> = corners
        .iter()
        .map(|p| p[0] * l.normal[0] + p[1] * l.normal[1] - l.offset)
        .collect();
    let mn = vals.iter().cloned().fold(f64::INFINITY, f64::min);
    let mx = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    mn <= 0.0 && mx >= 0.0
}

fn parse_spec(s: &str, dim: usize, hw: f64) -> Result<TestDistribution> {
    let bad = |m: &str| WfsError::Parse(format!("distribution `{s}`: {m}"));
    let lower = s.to_ascii_lowercase();
    if let Some(inner) = lower.strip_prefix("sum(") {
        let inner = inner.strip_suffix(')').ok_or_else(|| bad("missing `)`"))?;
        let mut terms = Vec::new();
        for part in split_top(inner, ';') {
            let part = part.trim();
            if part.is_empty() {
                return Err(bad("empty term"));
            }
            let (w, body) = match split_weight(part) {
                Some((w, b)) => (w.trim().parse::<f64>().map_err(|_| bad("bad weight"))?, b),
                None => (1.0, part),
            };
            terms.push((w, parse_spec(body.trim(), dim, hw)?));
        }
        return TestDistribution::weighted_sum(terms);
    }
    let fields = split_top(&lower, ',');
    let head = fields[0].trim();
    let (name, at) = match head.split_once('@') {
        Some((n, a)) => (
            n.trim(),
            Some(parse_vec(a).ok_or_else(|| bad("bad location"))?),
        ),
        None => (head, None),
    };
    let mut opts: HashMap<&str, &str> = HashMap::new();
    for f in &fields[1..] {
        let (k, v) = f.split_once('=').ok_or_else(|| bad("expected key=value"))?;
        opts.insert(k.trim(), v.trim());
    }
    let num = |k: &str| -> Result<f64> {
        opts.get(k)
            .ok_or_else(|| bad(&format!("missing `{k}`")))?
            .parse::<f64>()
            .map_err(|_| bad(&format!("bad `{k}`")))
    };
    let vec = |k: &str| -> Result<Vec<f64>> {
        parse_vec(opts.get(k).ok_or_else(|| bad(&format!("missing `{k}`")))?)
            .ok_or_else(|| bad(&format!("bad `{k}`")))
    };
    let loc = || -> Result<Vec<f64>> { at.clone().ok_or_else(|| bad("missing `@location`")) };
    let scalar = |v: Vec<f64>| -> Result<f64> {
        if v.len() == 1 {
            Ok(v[0])
        } else {
            Err(bad("expected a scalar location"))
        }
    };
    let known: &[&str] = match name {
        "delta" => &[],
        "heaviside" => &[],
        "powersing" | "power_sing" => &["a"],
        "planewave" | "plane_wave" => &["k"],
        "bump" | "smooth_bump" => &[],
        "halfplane" | "halfplane_indicator" => &["nu", "c"],
        _ => return Err(bad("unknown kind")),
    };
    if let Some(k) = opts.keys().find(|k| !known.contains(k)) {
        return Err(bad(&format!("unknown option `{k}`")));
    }
    let d = match name {
        "delta" => {
            let x = loc()?;
            if x.len() != dim {
                return Err(bad("location dimension mismatch"));
            }
            TestDistribution::delta(&x, hw)?
        }
        "heaviside" => {
            one_dim(dim, "heaviside")?;
            TestDistribution::heaviside(scalar(loc()?)?, hw)?
        }
        "powersing" | "power_sing" => {
            one_dim(dim, "powersing")?;
            TestDistribution::power_sing(scalar(loc()?)?, num("a")?, hw)?
        }
        "planewave" | "plane_wave" => {
            let k = vec("k")?;
            if k.len() != dim {
                return Err(bad("wave vector dimension mismatch"));
            }
            TestDistribution::plane_wave(&k, hw)?
        }
        "bump" | "smooth_bump" => TestDistribution::smooth_bump(dim, hw)?,
        _ => {
            if dim != 2 {
                return Err(bad("halfplane requires dimension 2"));
            }
            let nu = vec("nu")?;
            if nu.len() != 2 {
                return Err(bad("nu must have two components"));
            }
            let c = if opts.contains_key("c") {
                num("c")?
            } else {
                0.0
            };
            TestDistribution::halfplane([nu[0], nu[1]], c, hw)?
        }
    };
    if at.is_some() && !matches!(name, "delta" | "heaviside" | "powersing" | "power_sing") {
        return Err(bad("this kind takes no `@location`"));
    }
    Ok(d)
}

/// Split on `sep` outside parentheses.
fn split_top(s: &str, sep: char) -> Vec<&str> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, c) in s.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            c if c == sep && depth == 0 => {
                out.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(&s[start..]);
    out
}

fn split_weight(s: &str) -> Option<(&str, &str)> {
    let i = s.find('*')?;
    if s[..i].contains(['(', '@']) {
        return None;
    }
    Some((&s[..i], &s[i + 1..]))
}

fn parse_vec(s: &str) -> Option<Vec<f64>> {
    let s = s.trim();
    let body = match s.strip_prefix('(') {
        Some(r) => r.strip_suffix(')')?,
        None => s,
    };
    body.split(',')
        .map(|v| v.trim().parse::<f64>().ok())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rustfft::FftPlanner;

    fn grid1(m: u32) -> Grid {
        Grid::new(1, PI, m).unwrap()
    }

    /// `Δx Σ u_j e^{-i x_j ξ_k}` for all DFT frequencies, ordered by FFT index.
    fn discrete_ft(s: &SampledSignal) -> Vec<(f64, Complex64)> {
        let g = s.grid;
        let n = g.n();
        let mut buf = s.values.clone();
        FftPlanner::new().plan_fft_forward(n).process(&mut buf);
        (0..n)
            .map(|k| {
                let kk = if k < n / 2 {
                    k as f64
                } else {
                    k as f64 - n as f64
                };
                let xi = kk * g.dxi();
                (
                    xi,
                    buf[k] * g.dx() * Complex64::from_polar(1.0, g.half_width * xi),
                )
            })
            .collect()
    }

    #[test]
    fn delta_spike_and_transform() {
        let g = grid1(10);
        let d = TestDistribution::delta(&[0.0], PI).unwrap();
        let s = d.sample(&g).unwrap();
        assert!((s.values[512].re - 162.974_661_726_101_3).abs() < 1e-9);
        assert_eq!(s.values.iter().filter(|v| v.norm() > 0.0).count(), 1);
        assert_eq!(
            d.fourier_analytic(&[17.3]).unwrap(),
            Complex64::new(1.0, 0.0)
        );
        let d1 = TestDistribution::delta(&[1.0], 4.0).unwrap();
        let v = d1.fourier_analytic(&[PI]).unwrap();
        assert!((v - Complex64::new(-1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn delta_reproduces_point_value() {
        let g = grid1(12);
        let x0 = g.coord(2200);
        let d = TestDistribution::delta(&[x0], PI).unwrap();
        let s = d.sample(&g).unwrap();
        let f = |x: f64| (2.0 * x).cos() * (-x * x).exp();
        let v: f64 = (0..g.n())
            .map(|j| s.values[j].re * f(g.coord(j)))
            .sum::<f64>()
            * g.dx();
        assert!((v - f(x0)).abs() < 1e-12);
    }

    #[test]
    fn heaviside_samples() {
        let g = grid1(10);
        let d = TestDistribution::heaviside(0.0, PI).unwrap();
        let s = d.sample(&g).unwrap();
        let cut = Bump1d::box_cutoff(PI);
        for j in [0, 100, 511] {
            assert_eq!(s.values[j].re, 0.0);
        }
        assert_eq!(s.values[512].re, 0.5);
        for j in [513, 700, 900, 1000] {
            assert_eq!(s.values[j].re, cut.eval(g.coord(j)));
        }
    }

    #[test]
    fn bump_spectrum_decays_before_nyquist() {
        let g = grid1(10);
        let s = TestDistribution::smooth_bump(1, PI)
            .unwrap()
            .sample(&g)
            .unwrap();
        let ft = discrete_ft(&s);
        let peak = ft.iter().map(|(_, v)| v.norm()).fold(0.0, f64::max);
        let tail = ft
            .iter()
            .filter(|(xi, _)| xi.abs() > 0.9 * g.nyquist())
            .map(|(_, v)| v.norm())
            .fold(0.0, f64::max);
        assert!(tail < 1e-12 * peak);
    }

    #[test]
    fn plancherel_for_bump() {
        for dim in [1usize, 2] {
            let g = Grid::new(dim, PI, if dim == 1 { 10 } else { 7 }).unwrap();
            let s = TestDistribution::smooth_bump(dim, PI)
                .unwrap()
                .sample(&g)
                .unwrap();
            let n = g.n();
            let mut buf = s.values.clone();
            let mut planner = FftPlanner::new();
            let fft = planner.plan_fft_forward(n);
            if dim == 1 {
                fft.process(&mut buf);
            } else {
                for row in buf.chunks_mut(n) {
                    fft.process(row);
                }
                let mut col = vec![Complex64::new(0.0, 0.0); n];
                for j in 0..n {
                    for i in 0..n {
                        col[i] = buf[i * n + j];
                    }
                    fft.process(&mut col);
                    for i in 0..n {
                        buf[i * n + j] = col[i];
                    }
                }
            }
            let dxn = g.dx().powi(dim as i32);
            let dxin = g.dxi().powi(dim as i32);
            let lhs = (2.0 * PI).powi(-(dim as i32))
                * dxin
                * buf.iter().map(|v| (v * dxn).norm_sqr()).sum::<f64>();
            let rhs = s.energy();
            assert!((lhs - rhs).abs() < 1e-8 * rhs, "{lhs} vs {rhs}");
        }
    }

    fn max_rel_err(d: &TestDistribution, g: &Grid, band: f64, images: i64) -> f64 {
        let s = d.sample(g).unwrap();
        let period = 2.0 * g.nyquist();
        let mut worst: f64 = 0.0;
        let ft = discrete_ft(&s);
        let scale = ft.iter().map(|(_, v)| v.norm()).fold(0.0, f64::max);
        for (xi, v) in ft {
            if xi.abs() > band {
                continue;
            }
            let mut a = Complex64::new(0.0, 0.0);
            for m in -images..=images {
                a += d.fourier_analytic(&[xi + m as f64 * period]).unwrap();
            }
            let denom = a.norm().max(1e-6 * scale);
            worst = worst.max((v - a).norm() / denom);
        }
        worst
    }

    #[test]
    fn analytic_matches_discrete_for_smooth_kinds() {
        let g = grid1(11);
        let band = g.nyquist() / 2.0;
        for spec in [
            "delta@0.0",
            "planewave,k=40",
            "bump",
            "sum(bump;2*planewave,k=-7.5)",
        ] {
            let d = TestDistribution::parse(spec, 1, PI).unwrap();
            let e = max_rel_err(&d, &g, band, 0);
            assert!(e < 1e-4, "{spec}: {e}");
        }
    }

    #[test]
    fn analytic_matches_discrete_for_rough_kinds() {
        let g = grid1(12);
        // Jump: alias images summed explicitly over the inner half band.
        let d = TestDistribution::parse("heaviside@0.0", 1, PI).unwrap();
        let e = max_rel_err(&d, &g, g.nyquist() / 2.0, 400);
        assert!(e < 1e-2, "heaviside: {e}");
        // Power images decay too slowly to sum; compare on the inner quarter.
        for spec in ["powersing@0.0,a=0.5", "powersing@0.0,a=0.25"] {
            let d = TestDistribution::parse(spec, 1, PI).unwrap();
            let e = max_rel_err(&d, &g, g.nyquist() / 4.0, 0);
            assert!(e < 1e-2, "{spec}: {e}");
        }
    }

    #[test]
    fn power_transform_against_substituted_quadrature() {
        for &(x0, a) in &[(0.0, 0.5), (0.3, 0.25), (-0.2, 0.75)] {
            let d = TestDistribution::power_sing(x0, a, PI).unwrap();
            let cut = Bump1d::box_cutoff(PI);
            let p = 1.0 / (1.0 - a);
            for &eta in &[0.0, 3.7, 40.0, 300.0] {
                // y = v^p removes the singularity at the origin.
                let side = |sgn: f64| {
                    let ymax = 0.75 * PI - sgn * x0;
                    let vmax = ymax.powf(1.0 - a);
                    let opts = QuadOptions {
                        abs_tol: 1e-12,
                        panels: 64 + (eta * ymax) as usize,
                        max_depth: 20,
                    };
                    integrate(
                        |v| {
                            let y = v.powf(p);
                            let x = x0 + sgn * y;
                            Complex64::from_polar(cut.eval(x) * p, -x * eta)
                        },
                        0.0,
                        vmax,
                        &opts,
                    )
                    .value
                };
                let want = side(1.0) + side(-1.0);
                let got = d.fourier_analytic(&[eta]).unwrap();
                assert!(
                    (got - want).norm() < 1e-8 * want.norm().max(1e-3),
                    "x0={x0} a={a} eta={eta}: {got} vs {want}"
                );
            }
        }
    }

    #[test]
    fn heaviside_transform_against_quadrature() {
        let d = TestDistribution::heaviside(0.5, PI).unwrap();
        let cut = Bump1d::box_cutoff(PI);
        for &eta in &[0.0, 0.5, 1.0, 2.5, 60.0, 900.0] {
            let opts = QuadOptions {
                abs_tol: 1e-13,
                panels: 64 + eta as usize,
                max_depth: 20,
            };
            let want = integrate(
                |x| Complex64::from_polar(cut.eval(x), -x * eta),
                0.5,
                0.75 * PI,
                &opts,
            )
            .value;
            let got = d.fourier_analytic(&[eta]).unwrap();
            assert!(
                (got - want).norm() < 1e-8 * want.norm(),
                "eta={eta}: {got} vs {want}"
            );
        }
    }

    #[test]
    fn power_decay_ratio() {
        let d = TestDistribution::power_sing(0.0, 0.5, PI).unwrap();
        let a = d.fourier_analytic(&[256.0]).unwrap().norm();
        let b = d.fourier_analytic(&[512.0]).unwrap().norm();
        assert!((b / a / 0.5f64.sqrt() - 1.0).abs() < 0.05);
    }

    #[test]
    fn halfplane_is_sampled_only() {
        let d = TestDistribution::parse("halfplane,nu=(0.6,0.8),c=0.0", 2, PI).unwrap();
        assert!(matches!(
            d.fourier_analytic(&[1.0, 2.0]),
            Err(WfsError::Unsupported(_))
        ));
        let g = Grid::new(2, PI, 6).unwrap();
        let s = d.sample(&g).unwrap();
        let n = g.n();
        assert_eq!(s.values[(n / 2) * n + n / 2].re, 0.5);
        assert_eq!(s.values[(n / 2 + 3) * n + n / 2 + 3].re, 1.0);
        assert_eq!(s.values[(n / 2 - 3) * n + n / 2 - 3].re, 0.0);
    }

    #[test]
    fn parse_and_display() {
        for (spec, dim) in [
            ("delta@0", 1),
            ("delta@(0.1,-0.2)", 2),
            ("heaviside@0.5", 1),
            ("powersing@0,a=0.25", 1),
            ("planewave,k=(1,2)", 2),
            ("bump", 2),
            ("halfplane,nu=(0.6,0.8),c=0", 2),
            ("sum(delta@-1;0.5*heaviside@1)", 1),
        ] {
            let d = TestDistribution::parse(spec, dim, PI).unwrap();
            let again = TestDistribution::parse(&d.to_string(), dim, PI).unwrap();
            assert_eq!(d.to_string(), again.to_string());
        }
        for (spec, dim) in [
            ("powersing@0,a=1.0", 1),
            ("powersing@0,a=-0.1", 1),
            ("delta@0", 2),
            ("heaviside@2.0", 1),
            ("wiggle@0", 1),
            ("bump,q=1", 1),
            ("sum(delta@0", 1),
            ("halfplane,nu=(1,0)", 1),
        ] {
            assert!(TestDistribution::parse(spec, dim, PI).is_err(), "{spec}");
        }
    }

    #[test]
    fn ground_truth_values() {
        let gt = TestDistribution::parse("delta@0.2", 1, PI)
            .unwrap()
            .ground_truth();
        assert_eq!(gt.points[0].critical_s, -0.5);
        let gt = TestDistribution::parse("delta@(0,0)", 2, PI)
            .unwrap()
            .ground_truth();
        assert_eq!(gt.points[0].critical_s, -1.0);
        let gt = TestDistribution::parse("powersing@0,a=0.25", 1, PI)
            .unwrap()
            .ground_truth();
        assert_eq!(gt.points[0].critical_s, 0.25);
        let gt = TestDistribution::parse("sum(heaviside@0;powersing@0,a=0.25)", 1, PI)
            .unwrap()
            .ground_truth();
        assert_eq!(gt.points.len(), 1);
        assert_eq!(gt.points[0].critical_s, 0.25);
        assert!(TestDistribution::parse("bump", 1, PI)
            .unwrap()
            .ground_truth()
            .is_empty());

        let hp = TestDistribution::parse("halfplane,nu=(0.6,0.8),c=0", 2, PI)
            .unwrap()
            .ground_truth();
        let tol = 0.2;
        assert_eq!(
            hp.critical_s_in(&[0.0, 0.0], 0.2, &[0.6, 0.8], tol),
            Some(0.5)
        );
        assert_eq!(
            hp.critical_s_in(&[0.0, 0.0], 0.2, &[-0.6, -0.8], tol),
            Some(0.5)
        );
        assert_eq!(hp.critical_s_in(&[0.0, 0.0], 0.2, &[0.8, -0.6], tol), None);
        assert_eq!(hp.critical_s_in(&[1.0, 1.0], 0.2, &[0.6, 0.8], tol), None);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn sampler_is_linear(a in -3.0f64..3.0, b in -3.0f64..3.0, x0 in -1.0f64..1.0) {
            let g = grid1(8);
            let u = TestDistribution::heaviside(x0, PI).unwrap();
            let v = TestDistribution::plane_wave(&[5.0], PI).unwrap();
            let sum = TestDistribution::weighted_sum(vec![(a, u.clone()), (b, v.clone())]).unwrap();
            let su = u.sample(&g).unwrap();
            let sv = v.sample(&g).unwrap();
            let ss = sum.sample(&g).unwrap();
            for j in 0..g.n() {
                let want = a * su.values[j] + b * sv.values[j];
                prop_assert_eq!(ss.values[j], want);
            }
        }
    }
}
