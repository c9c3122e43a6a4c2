//! Scale schedules and phase-space probe lattices.

use serde::{Deserialize, Serialize};

use crate::{Result, WfsError};

/// Geometric scales `λ_j = λ₀ r^j`, `j = 0..J`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaSchedule {
    pub lambda0: f64,
    pub ratio: f64,
    pub count: usize,
}

impl LambdaSchedule {
    pub fn new(lambda0: f64, ratio: f64, count: usize) -> Result<Self> {
        if !(lambda0 >= 1.0 && lambda0.is_finite()) {
            return Err(WfsError::InvalidArgument(format!(
                "lambda0 must be >= 1, got {lambda0}"
            )));
        }
        if !(ratio > 1.0 && ratio.is_finite()) {
            return Err(WfsError::InvalidArgument(format!(
                "ratio must be > 1, got {ratio}"
            )));
        }
        if count == 0 {
            return Err(WfsError::InvalidArgument(
                "schedule must contain at least one scale".into(),
            ));
        }
        Ok(Self {
            lambda0,
            ratio,
            count,
        })
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.count).map(|j| self.lambda(j)).collect()
    }

    pub fn lambda(&self, j: usize) -> f64 {
        self.lambda0 * self.ratio.powi(j as i32)
    }

    pub fn max(&self) -> f64 {
        self.lambda(self.count - 1)
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }
}

/// A rotated sampling frame in 2D: frame coordinates `z` stand for the point
/// `R z`, where `R` maps `e₁` to `normal` and `e₂` to its left perpendicular.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Frame {
    pub normal: [f64; 2],
}

impl Frame {
    pub fn new(normal: [f64; 2]) -> Result<Self> {
        let m = normal[0].hypot(normal[1]);
        if !(m > 0.0 && m.is_finite()) {
            return Err(WfsError::InvalidArgument(
                "frame normal must be a non-zero vector".into(),
            ));
        }
        Ok(Self {
            normal: [normal[0] / m, normal[1] / m],
        })
    }

    pub fn to_world(&self, z: &[f64]) -> Vec<f64> {
        let [a, b] = self.normal;
        vec![a * z[0] - b * z[1], b * z[0] + a * z[1]]
    }

    pub fn to_frame(&self, y: &[f64]) -> Vec<f64> {
        let [a, b] = self.normal;
        vec![a * y[0] + b * y[1], -b * y[0] + a * y[1]]
    }
}

/// Position box `K = x₀ + [-k, k]^n` and frequency box `V = ξ₀ + [-v, v]^n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseRegion {
    pub x0: Vec<f64>,
    pub k_half: f64,
    pub xi0: Vec<f64>,
    pub v_half: f64,
}

impl PhaseRegion {
    pub fn new(x0: &[f64], k_half: f64, xi0: &[f64], v_half: f64) -> Result<Self> {
        if x0.len() != xi0.len() || !(x0.len() == 1 || x0.len() == 2) {
            return Err(WfsError::InvalidArgument(
                "region point and direction must share dimension 1 or 2".into(),
            ));
        }
        if !(k_half > 0.0 && v_half > 0.0) {
            return Err(WfsError::InvalidArgument(
                "K and V half-widths must be positive".into(),
            ));
        }
        // closest point of the V box to the origin
        let d2: f64 = xi0
            .iter()
            .map(|&c| (c.abs() - v_half).max(0.0).powi(2))
            .sum();
        if d2 <= 0.0 {
            return Err(WfsError::InvalidArgument(format!(
                "frequency box around {xi0:?} with half-width {v_half} contains or touches the origin"
            )));
        }
        Ok(Self {
            x0: x0.to_vec(),
            k_half,
            xi0: xi0.to_vec(),
            v_half,
        })
    }

    pub fn dim(&self) -> usize {
        self.x0.len()
    }

    /// Largest `|ξ|` over `V`.
    pub fn max_xi(&self) -> f64 {
        self.xi0
            .iter()
            .map(|&c| (c.abs() + self.v_half).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    /// The probe lattice at scale `lambda`. `quantum` is the frequency quantum
    /// of the sampling grid; rescaled frequencies `λξ` are restricted to
    /// multiples of `quantum · 2^p`.
    pub fn lattice(&self, lambda: f64, quantum: f64) -> Lattice {
        self.lattice_in(lambda, quantum, None)
    }

    /// As [`lattice`](Self::lattice), with both boxes laid out along the axes
    /// of `frame` (centred at the frame images of `x₀` and `ξ₀`).
    pub fn lattice_in(&self, lambda: f64, quantum: f64, frame: Option<Frame>) -> Lattice {
        let n = self.dim();
        let (x0, xi0) = match frame {
            Some(f) if n == 2 => (f.to_frame(&self.x0), f.to_frame(&self.xi0)),
            _ => (self.x0.clone(), self.xi0.clone()),
        };
        let sl = lambda.sqrt();
        let m = (self.k_half / (0.5 / sl)).ceil().max(1.0) as i64;
        let hx = self.k_half / m as f64;
        let axis_x: Vec<Vec<f64>> = x0
            .iter()
            .map(|&c| (-m..=m).map(|i| c + i as f64 * hx).collect())
            .collect();

        let target = 0.5 * sl;
        let p = if target > quantum {
            (target / quantum).log2().floor() as u32
        } else {
            0
        };
        let step = quantum * (1u64 << p) as f64;
        let axis_k: Vec<Vec<i64>> = xi0
            .iter()
            .map(|&c| {
                let lo = (lambda * (c - self.v_half) / step).ceil() as i64;
                let hi = (lambda * (c + self.v_half) / step).floor() as i64;
                if lo <= hi {
                    (lo..=hi).collect()
                } else {
                    vec![(lambda * c / step).round() as i64]
                }
            })
            .collect();

        let xs = tensor(&axis_x);
        let ks = tensor(&axis_k);
        Lattice {
            lambda,
            dim: n,
            xs,
            ks,
            log2_step: p,
            step,
            cell_x: hx.powi(n as i32),
            cell_xi: (step / lambda).powi(n as i32),
            frame: if n == 2 { frame } else { None },
        }
    }
}

fn tensor<T: Copy>(axes: &[Vec<T>]) -> Vec<Vec<T>> {
    match axes.len() {
        1 => axes[0].iter().map(|&v| vec![v]).collect(),
        _ => {
            let mut out = Vec::with_capacity(axes[0].len() * axes[1].len());
            for &a in &axes[0] {
                for &b in &axes[1] {
                    out.push(vec![a, b]);
                }
            }
            out
        }
    }
}

/// Probe points at one scale. Frequencies are stored as integer multiples `k`
/// of `step`, so the rescaled frequency is `λξ = k·step` and `ξ = k·step/λ`.
/// With a frame, `xs` and `ks` are frame coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lattice {
    pub lambda: f64,
    pub dim: usize,
    pub xs: Vec<Vec<f64>>,
    pub ks: Vec<Vec<i64>>,
    pub log2_step: u32,
    pub step: f64,
    /// Riemann cell weights in `x` and in (unscaled) `ξ`.
    pub cell_x: f64,
    pub cell_xi: f64,
    pub frame: Option<Frame>,
}

impl Lattice {
    /// Rescaled frequency `λξ` for lattice index `i`.
    pub fn scaled_xi(&self, i: usize) -> Vec<f64> {
        self.ks[i].iter().map(|&k| k as f64 * self.step).collect()
    }

    /// Unscaled frequency `ξ` in world coordinates.
    pub fn xi(&self, i: usize) -> Vec<f64> {
        let v: Vec<f64> = self.ks[i]
            .iter()
            .map(|&k| k as f64 * self.step / self.lambda)
            .collect();
        match self.frame {
            Some(f) => f.to_world(&v),
            None => v,
        }
    }

    /// Position `x` in world coordinates.
    pub fn x(&self, i: usize) -> Vec<f64> {
        match self.frame {
            Some(f) => f.to_world(&self.xs[i]),
            None => self.xs[i].clone(),
        }
    }

    pub fn len(&self) -> usize {
        self.xs.len() * self.ks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}
