//! Basic wave packets (Schwartz windows) and their L²-normalized dilations.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;

use crate::quad::{gauss_legendre, integrate_real, QuadOptions};
use crate::smooth::{smooth_step, FourierTable};
use crate::special::bessel_j0;
use crate::{Result, WfsError};

/// Relative threshold defining a window's effective spatial support.
pub const SPATIAL_SUPPORT_TOL: f64 = 1e-16;
/// Relative threshold defining a window's effective frequency support.
pub const FREQUENCY_SUPPORT_TOL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WindowKind {
    Gaussian,
    Hermite(u8),
    /// Fourier-side annulus bump `r1 <= |η| <= r2`; every moment vanishes.
    Annulus {
        r1: f64,
        r2: f64,
    },
    /// Compactly supported spatial bump `exp(1 - 1/(1-x²))`, tensorized in 2D.
    Bump,
}

/// Interpolation table for a radial (or 1D even) profile on `[0, r_max]`.
#[derive(Debug)]
struct RadialTable {
    step: f64,
    values: Vec<f64>,
}

impl RadialTable {
    fn eval(&self, r: f64) -> f64 {
        let u = r / self.step;
        let n = self.values.len();
        if u >= (n - 3) as f64 {
            return 0.0;
        }
        let i = u.floor() as usize;
        let t = u - i as f64;
        // 4-point Lagrange, mirrored about r = 0 (the profile is even)
        let at = |k: isize| self.values[k.unsigned_abs()];
        let i = i as isize;
        let (p0, p1, p2, p3) = (at(i - 1), at(i), at(i + 1), at(i + 2));
        p1 + 0.5
            * t
            * (p2 - p0
                + t * (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3 + t * (3.0 * (p1 - p2) + p3 - p0)))
    }
}

#[derive(Debug)]
enum Tables {
    None,
    /// 1D spatial profile of an annulus window (inverse transform of the bump).
    Annulus1d(FourierTable),
    Annulus2d(RadialTable),
    /// Fourier transform of the 1D bump profile.
    BumpFt(FourierTable),
}

/// A nonzero Schwartz basic wave packet with evaluators for φ and φ̂.
///
/// Fourier convention: `φ̂(η) = ∫ φ(x) e^{-ix·η} dx`.
#[derive(Clone)]
pub struct Window {
    kind: WindowKind,
    dim: usize,
    name: String,
    l2_norm: f64,
    spatial_radius: f64,
    ft_radius: f64,
    tables: Arc<Tables>,
}

impl fmt::Debug for Window {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Window")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("l2_norm", &self.l2_norm)
            .finish()
    }
}

fn check_dim(dim: usize) -> Result<()> {
    if dim == 1 || dim == 2 {
        Ok(())
    } else {
        Err(WfsError::InvalidArgument(format!(
            "window dimension must be 1 or 2, got {dim}"
        )))
    }
}

fn hermite_poly(k: u8, x: f64) -> f64 {
    match k {
        1 => x,
        _ => x * x - 1.0,
    }
}

fn annulus_profile(r1: f64, r2: f64, rho: f64) -> f64 {
    let d = (r2 - r1) / 4.0;
    let a = rho.abs();
    smooth_step((a - r1) / d) * smooth_step((r2 - a) / d)
}

fn bump_profile(x: f64) -> f64 {
    if x.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - x * x)).exp()
    }
}

/// Last radius in `[0, r_max]` (scanned at `step`) where `|f| > tol * max|f|`.
fn scan_radius<F: Fn(f64) -> f64>(f: F, r_max: f64, step: f64, tol: f64) -> f64 {
    let n = (r_max / step).ceil() as usize;
    let vals: Vec<f64> = (0..=n).map(|i| f(i as f64 * step).abs()).collect();
    let peak = vals.iter().cloned().fold(0.0, f64::max);
    let last = vals.iter().rposition(|&v| v > tol * peak).unwrap_or(0);
    ((last + 1) as f64 * step).min(r_max)
}

type AnnulusKey = (u64, u64, usize);

fn annulus_tables(r1: f64, r2: f64, dim: usize) -> Arc<Tables> {
    static CACHE: OnceLock<Mutex<HashMap<AnnulusKey, Arc<Tables>>>> = OnceLock::new();
    let key = (r1.to_bits(), r2.to_bits(), dim);
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(t) = cache.lock().unwrap().get(&key) {
        return t.clone();
    }
    let tables = if dim == 1 {
        // φ(x) = (1/2π) ∫ B(η) e^{ixη} dη = G(-x)/(2π) with G the forward transform of B.
        Tables::Annulus1d(FourierTable::build(
            |eta| annulus_profile(r1, r2, eta),
            -r2,
            r2,
            0.005,
            2048.0,
        ))
    } else {
        // φ(r) = (1/2π) ∫ B(ρ) J0(ρ r) ρ dρ
        let (gx, gw) = gauss_legendre(48);
        let panels = 64;
        let width = (r2 - r1) / panels as f64;
        let mut nodes = Vec::with_capacity(panels * gx.len());
        for p in 0..panels {
            let lo = r1 + p as f64 * width;
            for (x, w) in gx.iter().zip(&gw) {
                let rho = lo + 0.5 * width * (x + 1.0);
                nodes.push((rho, 0.5 * width * w * annulus_profile(r1, r2, rho) * rho));
            }
        }
        let step = 0.02;
        let n = (192.0 / step) as usize;
        let values = (0..n)
            .map(|i| {
                let r = i as f64 * step;
                nodes
                    .iter()
                    .map(|(rho, w)| w * bessel_j0(rho * r))
                    .sum::<f64>()
                    / (2.0 * PI)
            })
            .collect();
        Tables::Annulus2d(RadialTable { step, values })
    };
    let tables = Arc::new(tables);
    cache.lock().unwrap().insert(key, tables.clone());
    tables
}

fn bump_ft_table() -> Arc<Tables> {
    static TABLE: OnceLock<Arc<Tables>> = OnceLock::new();
    TABLE
        .get_or_init(|| {
            Arc::new(Tables::BumpFt(FourierTable::build(
                bump_profile,
                -1.0,
                1.0,
                0.01,
                2048.0,
            )))
        })
        .clone()
}

impl Window {
    /// `φ(x) = e^{-|x|²/2}`, `φ̂(η) = (2π)^{n/2} e^{-|η|²/2}`.
    pub fn gaussian(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        let l2 = PI.powf(dim as f64 / 4.0);
        Ok(Self {
            kind: WindowKind::Gaussian,
            dim,
            name: "gaussian".into(),
            l2_norm: l2,
            spatial_radius: (2.0 * (1.0 / SPATIAL_SUPPORT_TOL).ln()).sqrt(),
            ft_radius: (2.0 * (1.0 / FREQUENCY_SUPPORT_TOL).ln()).sqrt(),
            tables: Arc::new(Tables::None),
        })
    }

    /// `φ(x) = H_k(x₁) e^{-|x|²/2}` with `H_1 = x`, `H_2 = x² - 1`.
    pub fn hermite(dim: usize, k: u8) -> Result<Self> {
        check_dim(dim)?;
        if !(k == 1 || k == 2) {
            return Err(WfsError::InvalidArgument(format!(
                "hermite order must be 1 or 2, got {k}"
            )));
        }
        let first = if k == 1 { 0.5 } else { 0.75 } * PI.sqrt();
        let l2 = (first * PI.sqrt().powi(dim as i32 - 1)).sqrt();
        let prof = |x: f64| hermite_poly(k, x).abs().max(1.0) * (-x * x / 2.0).exp();
        let ft_prof = |e: f64| e.abs().powi(k as i32).max(1.0) * (-e * e / 2.0).exp();
        Ok(Self {
            kind: WindowKind::Hermite(k),
            dim,
            name: format!("hermite{k}"),
            l2_norm: l2,
            spatial_radius: scan_radius(prof, 20.0, 0.01, SPATIAL_SUPPORT_TOL),
            ft_radius: scan_radius(ft_prof, 20.0, 0.01, FREQUENCY_SUPPORT_TOL),
            tables: Arc::new(Tables::None),
        })
    }

    /// Window whose Fourier transform is a C∞ bump equal to 1 on
    /// `r1 + δ <= |η| <= r2 - δ` and supported in `r1 <= |η| <= r2`, `δ = (r2-r1)/4`.
    pub fn annulus(dim: usize, r1: f64, r2: f64) -> Result<Self> {
        check_dim(dim)?;
        if !(r1 > 0.0) || !(r2 > r1) || !r2.is_finite() {
            return Err(WfsError::InvalidArgument(format!(
                "annulus radii must satisfy 0 < r1 < r2, got ({r1}, {r2})"
            )));
        }
        let opts = QuadOptions {
            panels: 32,
            abs_tol: 1e-15,
            ..Default::default()
        };
        let l2sq = if dim == 1 {
            let (v, _) = integrate_real(|e| annulus_profile(r1, r2, e).powi(2), r1, r2, &opts);
            2.0 * v / (2.0 * PI)
        } else {
            let (v, _) = integrate_real(|e| annulus_profile(r1, r2, e).powi(2) * e, r1, r2, &opts);
            2.0 * PI * v / (4.0 * PI * PI)
        };
        let tables = annulus_tables(r1, r2, dim);
        let mut w = Self {
            kind: WindowKind::Annulus { r1, r2 },
            dim,
            name: format!("annulus({},{})", r1, r2),
            l2_norm: l2sq.sqrt(),
            spatial_radius: 0.0,
            ft_radius: r2,
            tables,
        };
        let r_max = if dim == 1 { 2048.0 } else { 188.0 };
        let w1 = w.clone();
        w.spatial_radius = scan_radius(|r| w1.radial_profile(r), r_max, 0.05, SPATIAL_SUPPORT_TOL);
        Ok(w)
    }

    /// Compactly supported bump `exp(1 - 1/(1-x²))` (tensorized in 2D); its
    /// transform is computed numerically.
    pub fn bump(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        let opts = QuadOptions {
            panels: 16,
            abs_tol: 1e-15,
            ..Default::default()
        };
        let (v, _) = integrate_real(|x| bump_profile(x).powi(2), -1.0, 1.0, &opts);
        let tables = bump_ft_table();
        let mut w = Self {
            kind: WindowKind::Bump,
            dim,
            name: "bump".into(),
            l2_norm: v.powf(dim as f64 / 2.0),
            spatial_radius: 1.0,
            ft_radius: 0.0,
            tables,
        };
        let w1 = w.clone();
        w.ft_radius = scan_radius(|e| w1.ft_1d(e).norm(), 2048.0, 0.05, FREQUENCY_SUPPORT_TOL);
        Ok(w)
    }

    /// Resolve a window by its scenario name: `gaussian`, `hermite1`, `hermite2`,
    /// `annulus(r1,r2)` (bare `annulus` is `annulus(1,2)`), `bump`.
    pub fn from_name(name: &str, dim: usize) -> Result<Self> {
        let s: String = name.chars().filter(|c| !c.is_whitespace()).collect();
        match s.as_str() {
            "gaussian" => Self::gaussian(dim),
            "hermite1" => Self::hermite(dim, 1),
            "hermite2" => Self::hermite(dim, 2),
            "bump" => Self::bump(dim),
            "annulus" => Self::annulus(dim, 1.0, 2.0),
            _ => {
                if let Some(args) = s.strip_prefix("annulus(").and_then(|r| r.strip_suffix(')')) {
                    let parts: Vec<&str> = args.split(',').collect();
                    if parts.len() == 2 {
                        let r1 = parts[0].parse::<f64>();
                        let r2 = parts[1].parse::<f64>();
                        if let (Ok(r1), Ok(r2)) = (r1, r2) {
                            return Self::annulus(dim, r1, r2);
                        }
                    }
                }
                Err(WfsError::Parse(format!("unknown window '{name}'")))
            }
        }
    }

    pub fn kind(&self) -> WindowKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn l2_norm(&self) -> f64 {
        self.l2_norm
    }

    /// True when `eval_ft` is a closed form rather than a numerical transform.
    pub fn analytic_ft(&self) -> bool {
        !matches!(self.kind, WindowKind::Bump)
    }

    /// Real and even windows satisfy `φ̂(-η) = conj φ̂(η)` with `φ̂` real.
    pub fn is_real_even(&self) -> bool {
        !matches!(self.kind, WindowKind::Hermite(1))
    }

    /// Half-width of the box outside which `|φ| < 1e-16 max|φ|`.
    pub fn spatial_radius(&self) -> f64 {
        self.spatial_radius
    }

    /// Half-width of the box outside which `|φ̂| < 1e-14 max|φ̂|`.
    pub fn ft_radius(&self) -> f64 {
        self.ft_radius
    }

    /// Intervals (1D, base scale) carrying the effective support of φ̂.
    pub fn ft_intervals(&self) -> Vec<(f64, f64)> {
        match self.kind {
            WindowKind::Annulus { r1, r2 } if self.dim == 1 => vec![(-r2, -r1), (r1, r2)],
            _ => vec![(-self.ft_radius, self.ft_radius)],
        }
    }

    /// Whether φ̂ vanishes identically on a neighborhood of the origin.
    pub fn has_spectral_hole(&self) -> bool {
        matches!(self.kind, WindowKind::Annulus { .. })
    }

    fn radial_profile(&self, r: f64) -> f64 {
        match &*self.tables {
            Tables::Annulus1d(t) => t.eval(-r).re / (2.0 * PI),
            Tables::Annulus2d(t) => t.eval(r),
            _ => 0.0,
        }
    }

    fn ft_1d(&self, eta: f64) -> Complex64 {
        let g = (2.0 * PI).sqrt() * (-eta * eta / 2.0).exp();
        match self.kind {
            WindowKind::Gaussian => Complex64::new(g, 0.0),
            // FT[x f] = i f̂', FT[(x²-1) f] = -η² f̂ for f = e^{-x²/2}
            WindowKind::Hermite(1) => Complex64::new(0.0, -eta * g),
            WindowKind::Hermite(_) => Complex64::new(-eta * eta * g, 0.0),
            WindowKind::Annulus { r1, r2 } => Complex64::new(annulus_profile(r1, r2, eta), 0.0),
            WindowKind::Bump => match &*self.tables {
                Tables::BumpFt(t) => Complex64::new(t.eval(eta).re, 0.0),
                _ => unreachable!(),
            },
        }
    }

    /// φ(x).
    pub fn eval(&self, x: &[f64]) -> Complex64 {
        debug_assert_eq!(x.len(), self.dim);
        let r2: f64 = x.iter().map(|v| v * v).sum();
        let v = match self.kind {
            WindowKind::Gaussian => (-r2 / 2.0).exp(),
            WindowKind::Hermite(k) => hermite_poly(k, x[0]) * (-r2 / 2.0).exp(),
            WindowKind::Annulus { .. } => self.radial_profile(r2.sqrt()),
            WindowKind::Bump => x.iter().map(|&v| bump_profile(v)).product(),
        };
        Complex64::new(v, 0.0)
    }

    /// φ̂(η).
    pub fn eval_ft(&self, eta: &[f64]) -> Complex64 {
        debug_assert_eq!(eta.len(), self.dim);
        match self.kind {
            WindowKind::Annulus { r1, r2 } => {
                let r = eta.iter().map(|v| v * v).sum::<f64>().sqrt();
                Complex64::new(annulus_profile(r1, r2, r), 0.0)
            }
            WindowKind::Bump => eta.iter().map(|&e| self.ft_1d(e)).product(),
            _ => {
                let mut v = self.ft_1d(eta[0]);
                for &e in &eta[1..] {
                    v *= (2.0 * PI).sqrt() * (-e * e / 2.0).exp();
                }
                v
            }
        }
    }

    /// Moment `∫ x^α φ(x) dx`, `|α| <= 8`.
    ///
    /// Computed by adaptive quadrature in space for windows with Gaussian or
    /// compact spatial decay. For windows whose transform vanishes near the
    /// origin the identity `∫ x^α φ = i^{|α|} ∂^α φ̂(0)` is used, evaluated by a
    /// finite-difference stencil inside the spectral hole.
    pub fn moment(&self, alpha: &[u32]) -> Result<f64> {
        if alpha.len() != self.dim {
            return Err(WfsError::InvalidArgument(
                "multi-index length must match dimension".into(),
            ));
        }
        let order: u32 = alpha.iter().sum();
        if order > 8 {
            return Err(WfsError::InvalidArgument(format!(
                "moment order {order} exceeds 8"
            )));
        }
        if let WindowKind::Annulus { r1, .. } = self.kind {
            return Ok(self.moment_from_ft(alpha, 0.5 * r1 / 8.0));
        }
        let r = match self.kind {
            WindowKind::Bump => 1.0,
            _ => 16.0,
        };
        let opts = QuadOptions {
            panels: 32,
            abs_tol: 1e-13,
            ..Default::default()
        };
        let pw = |v: f64, a: u32| if a == 0 { 1.0 } else { v.powi(a as i32) };
        if self.dim == 1 {
            let (v, _) = integrate_real(|x| pw(x, alpha[0]) * self.eval(&[x]).re, -r, r, &opts);
            Ok(v)
        } else {
            let inner = |x1: f64| {
                integrate_real(
                    |x2| pw(x2, alpha[1]) * self.eval(&[x1, x2]).re,
                    -r,
                    r,
                    &opts,
                )
                .0
            };
            let (v, _) = integrate_real(|x1| pw(x1, alpha[0]) * inner(x1), -r, r, &opts);
            Ok(v)
        }
    }

    fn moment_from_ft(&self, alpha: &[u32], h: f64) -> f64 {
        // Central-difference weights for the k-th derivative on a (k+1)-point
        // stencil via the binomial formula; the hole makes every sample zero.
        let mut acc = Complex64::new(0.0, 0.0);
        let stencil = |k: u32| -> Vec<(f64, f64)> {
            (0..=k)
                .map(|j| {
                    let c = binomial(k, j) * if j % 2 == 0 { 1.0 } else { -1.0 };
                    (c, (k as f64 / 2.0 - j as f64) * h)
                })
                .collect()
        };
        let s0 = stencil(alpha[0]);
        if self.dim == 1 {
            for (c, e) in s0 {
                acc += self.eval_ft(&[e]) * c;
            }
        } else {
            for (c0, e0) in &s0 {
                for (c1, e1) in stencil(alpha[1]) {
                    acc += self.eval_ft(&[*e0, e1]) * (c0 * c1);
                }
            }
        }
        let order: u32 = alpha.iter().sum();
        let d = acc / h.powi(order as i32);
        (d * Complex64::i().powu(order)).re
    }
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `φ_λ(x) = λ^{n/4} φ(λ^{1/2} x)`, with `φ̂_λ(η) = λ^{-n/4} φ̂(λ^{-1/2} η)`.
#[derive(Debug, Clone)]
pub struct ScaledWindow<'a> {
    base: &'a Window,
    lambda: f64,
    amp: f64,
    sqrt_lambda: f64,
}

impl<'a> ScaledWindow<'a> {
    pub fn base(&self) -> &Window {
        self.base
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn sqrt_lambda(&self) -> f64 {
        self.sqrt_lambda
    }

    /// The amplitude factor `λ^{n/4}`.
    pub fn amplitude(&self) -> f64 {
        self.amp
    }

    pub fn eval(&self, x: &[f64]) -> Complex64 {
        let mut y = [0.0; 2];
        for (i, v) in x.iter().enumerate() {
            y[i] = self.sqrt_lambda * v;
        }
        self.base.eval(&y[..x.len()]) * self.amp
    }

    pub fn eval_ft(&self, eta: &[f64]) -> Complex64 {
        let mut y = [0.0; 2];
        for (i, v) in eta.iter().enumerate() {
            y[i] = v / self.sqrt_lambda;
        }
        self.base.eval_ft(&y[..eta.len()]) / self.amp
    }

    pub fn l2_norm(&self) -> f64 {
        self.base.l2_norm
    }

    pub fn spatial_radius(&self) -> f64 {
        self.base.spatial_radius / self.sqrt_lambda
    }
}

/// Dilate `w` to scale `lambda >= 1`.
pub fn scale(w: &Window, lambda: f64) -> Result<ScaledWindow<'_>> {
    if !(lambda >= 1.0) || !lambda.is_finite() {
        return Err(WfsError::InvalidArgument(format!(
            "scale must satisfy lambda >= 1, got {lambda}"
        )));
    }
    Ok(ScaledWindow {
        base: w,
        lambda,
        amp: lambda.powf(w.dim as f64 / 4.0),
        sqrt_lambda: lambda.sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn catalog(dim: usize) -> Vec<Window> {
        vec![
            Window::gaussian(dim).unwrap(),
            Window::hermite(dim, 1).unwrap(),
            Window::hermite(dim, 2).unwrap(),
            Window::annulus(dim, 1.0, 2.0).unwrap(),
            Window::bump(dim).unwrap(),
        ]
    }

    #[test]
    fn gaussian_values() {
        let g = Window::gaussian(1).unwrap();
        assert_eq!(g.eval(&[0.0]).re, 1.0);
        assert!((g.eval_ft(&[0.0]).re - 2.5066282746310002).abs() < 1e-12);
        assert!((g.l2_norm().powi(2) - 1.7724538509055159).abs() < 1e-12);
    }

    #[test]
    fn hermite_moments() {
        let h = Window::hermite(1, 1).unwrap();
        assert_eq!(h.eval(&[0.0]).re, 0.0);
        assert!(h.moment(&[0]).unwrap().abs() < 1e-10);
        assert!((h.moment(&[1]).unwrap() - 2.5066282746310002).abs() < 1e-8);
        let g = Window::gaussian(1).unwrap();
        assert!((g.moment(&[0]).unwrap() - 2.5066282746310002).abs() < 1e-8);
    }

    #[test]
    fn annulus_all_low_moments_vanish() {
        for dim in [1, 2] {
            let a = Window::annulus(dim, 1.0, 2.0).unwrap();
            for a0 in 0..=6u32 {
                for a1 in 0..=(6 - a0) {
                    let alpha: Vec<u32> = if dim == 1 {
                        vec![a0 + a1]
                    } else {
                        vec![a0, a1]
                    };
                    assert!(a.moment(&alpha).unwrap().abs() <= 1e-8);
                }
            }
        }
    }

    #[test]
    fn annulus_low_moments_by_spatial_quadrature() {
        // Independent spatial check for the lowest orders.
        let a = Window::annulus(1, 1.0, 2.0).unwrap();
        let opts = QuadOptions {
            panels: 4000,
            abs_tol: 1e-12,
            ..Default::default()
        };
        for k in 0..=2 {
            let (m, _) = integrate_real(|x| x.powi(k) * a.eval(&[x]).re, -2000.0, 2000.0, &opts);
            assert!(m.abs() < 1e-7, "order {k}: {m}");
        }
    }

    #[test]
    fn annulus_plateau_and_rejects_bad_radii() {
        let a = Window::annulus(1, 1.0, 2.0).unwrap();
        assert_eq!(a.eval_ft(&[1.5]).re, 1.0);
        assert_eq!(a.eval_ft(&[0.0]).re, 0.0);
        assert!(Window::annulus(1, 0.0, 2.0).is_err());
        assert!(Window::annulus(1, 2.0, 1.0).is_err());
    }

    #[test]
    fn names_resolve() {
        for n in ["gaussian", "hermite1", "hermite2", "annulus(1,2)", "bump"] {
            assert!(Window::from_name(n, 1).is_ok(), "{n}");
        }
        assert!(Window::from_name("hann", 1).is_err());
        assert!(Window::from_name("gaussian", 3).is_err());
    }

    #[test]
    fn scaled_values() {
        let g = Window::gaussian(1).unwrap();
        let s = scale(&g, 4.0).unwrap();
        assert!((s.eval(&[0.0]).re - 4f64.powf(0.25)).abs() < 1e-15);
        let s16 = scale(&g, 16.0).unwrap();
        let expect = 16f64.powf(-0.25) * (2.0 * PI).sqrt() * (-0.5f64).exp();
        assert!((s16.eval_ft(&[4.0]).re - expect).abs() < 1e-14);
        assert!((expect - 0.7602).abs() < 1e-4);
        assert!(scale(&g, 0.5).is_err());
    }

    fn l2_numeric_1d(w: &ScaledWindow<'_>) -> f64 {
        let r = w.spatial_radius();
        let opts = QuadOptions {
            panels: (r * w.sqrt_lambda() * 2.0).ceil() as usize + 100,
            abs_tol: 1e-12,
            max_depth: 6,
        };
        integrate_real(|x| w.eval(&[x]).norm_sqr(), -r, r, &opts)
            .0
            .sqrt()
    }

    #[test]
    fn scaled_norm_is_preserved() {
        for w in catalog(1) {
            for lambda in [1.0, 4.0, 64.0, 1024.0] {
                let s = scale(&w, lambda).unwrap();
                let n = l2_numeric_1d(&s);
                let tol = if matches!(w.kind(), WindowKind::Annulus { .. }) {
                    1e-7
                } else {
                    1e-9
                };
                assert!(
                    (n - w.l2_norm()).abs() <= tol * w.l2_norm(),
                    "{} λ={lambda}: {n} vs {}",
                    w.name(),
                    w.l2_norm()
                );
            }
        }
    }

    #[test]
    fn ft_matches_dense_dft() {
        // eval_ft against a 2^16-point sampling of eval on a box wide enough for the tails
        use rustfft::FftPlanner;
        for w in catalog(1) {
            let n = 1usize << 16;
            let half = if matches!(w.kind(), WindowKind::Annulus { .. }) {
                2048.0
            } else {
                64.0
            };
            let dx = 2.0 * half / n as f64;
            let mut buf: Vec<Complex64> = (0..n)
                .map(|j| w.eval(&[-half + j as f64 * dx]) * dx)
                .collect();
            FftPlanner::new().plan_fft_forward(n).process(&mut buf);
            let deta = 2.0 * PI / (n as f64 * dx);
            let nyq = PI / dx;
            let peak = buf.iter().map(|v| v.norm()).fold(0.0, f64::max);
            for (k, &bk) in buf.iter().enumerate() {
                let kk = if k < n / 2 {
                    k as i64
                } else {
                    k as i64 - n as i64
                };
                let eta = kk as f64 * deta;
                if eta.abs() > 0.5 * nyq.min(32.0) {
                    continue;
                }
                let dft = bk * Complex64::from_polar(1.0, half * eta);
                let exact = w.eval_ft(&[eta]);
                assert!(
                    (dft - exact).norm() <= 1e-6 * peak,
                    "{} η={eta}: {dft} vs {exact}",
                    w.name()
                );
            }
        }
    }

    #[test]
    fn windows_decay_rapidly_on_probe_grid() {
        for w in catalog(1) {
            for p in [2, 4, 8] {
                for r in [4.0, 8.0, 16.0] {
                    let mut c_space = 0.0f64;
                    let mut c_freq = 0.0f64;
                    let mut x: f64 = 1.0;
                    while x <= r {
                        c_space = c_space.max(x.powi(p) * w.eval(&[x]).norm());
                        c_freq = c_freq.max(x.powi(p) * w.eval_ft(&[x]).norm());
                        x += 0.01;
                    }
                    assert!(c_space.is_finite() && c_freq.is_finite());
                }
            }
        }
    }

    #[test]
    fn two_dimensional_windows() {
        let g = Window::gaussian(2).unwrap();
        assert!((g.eval_ft(&[0.0, 0.0]).re - 2.0 * PI).abs() < 1e-12);
        assert!((g.l2_norm().powi(2) - PI).abs() < 1e-12);
        let a = Window::annulus(2, 1.0, 2.0).unwrap();
        // φ(0) = (1/2π) ∫ B(ρ) ρ dρ
        let (v, _) = integrate_real(
            |r| annulus_profile(1.0, 2.0, r) * r,
            1.0,
            2.0,
            &QuadOptions {
                panels: 16,
                ..Default::default()
            },
        );
        assert!((a.eval(&[0.0, 0.0]).re - v / (2.0 * PI)).abs() < 1e-7);
        let h = Window::hermite(2, 1).unwrap();
        assert!((h.moment(&[1, 0]).unwrap() - 2.0 * PI).abs() < 1e-8);
    }

    proptest! {
        #[test]
        fn unit_scale_is_identity(x in -20.0f64..20.0, idx in 0usize..5) {
            let w = &catalog(1)[idx];
            let s = scale(w, 1.0).unwrap();
            prop_assert_eq!(s.eval(&[x]), w.eval(&[x]));
        }
    }
}
