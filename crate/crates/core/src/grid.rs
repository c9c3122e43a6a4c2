//! Uniform periodic sampling grids over `[-L, L)^n`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{Result, WfsError};

/// Grid with `2^log2_points` nodes per axis over `[-half_width, half_width)^dim`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub dim: usize,
    pub half_width: f64,
    pub log2_points: u32,
}

impl Grid {
    pub fn new(dim: usize, half_width: f64, log2_points: u32) -> Result<Self> {
        if !(dim == 1 || dim == 2) {
            return Err(WfsError::InvalidArgument(format!(
                "grid dimension must be 1 or 2, got {dim}"
            )));
        }
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(WfsError::InvalidArgument(
                "grid half-width must be positive".into(),
            ));
        }
        if !(4..=24).contains(&log2_points) {
            return Err(WfsError::InvalidArgument(format!(
                "log2 points per axis must lie in 4..=24, got {log2_points}"
            )));
        }
        Ok(Self {
            dim,
            half_width,
            log2_points,
        })
    }

    /// Points per axis.
    pub fn n(&self) -> usize {
        1 << self.log2_points
    }

    pub fn len(&self) -> usize {
        self.n().pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dx(&self) -> f64 {
        2.0 * self.half_width / self.n() as f64
    }

    /// Frequency spacing of the full-grid DFT.
    pub fn dxi(&self) -> f64 {
        std::f64::consts::PI / self.half_width
    }

    /// Largest resolvable frequency per axis.
    pub fn nyquist(&self) -> f64 {
        std::f64::consts::PI / self.dx()
    }

    pub fn coord(&self, i: usize) -> f64 {
        -self.half_width + i as f64 * self.dx()
    }

    /// Index of the node nearest `x` on one axis (clamped to the grid).
    pub fn nearest(&self, x: f64) -> usize {
        let i = ((x + self.half_width) / self.dx()).round();
        i.clamp(0.0, (self.n() - 1) as f64) as usize
    }

    /// Bytes needed to hold one complex field on this grid.
    pub fn bytes(&self) -> u64 {
        self.len() as u64 * 16
    }
}

/// Complex samples on a [`Grid`], row-major (first axis slowest).
#[derive(Debug, Clone)]
pub struct SampledSignal {
    pub grid: Grid,
    pub values: Vec<Complex64>,
}

impl SampledSignal {
    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            values: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    pub fn from_fn<F: Fn(&[f64]) -> Complex64>(grid: Grid, f: F) -> Self {
        let n = grid.n();
        let values = match grid.dim {
            1 => (0..n).map(|i| f(&[grid.coord(i)])).collect(),
            _ => {
                let mut v = Vec::with_capacity(n * n);
                for i in 0..n {
                    let x1 = grid.coord(i);
                    for j in 0..n {
                        v.push(f(&[x1, grid.coord(j)]));
                    }
                }
                v
            }
        };
        Self { grid, values }
    }

    /// `Δx^n Σ |u|²`.
    pub fn energy(&self) -> f64 {
        self.grid.dx().powi(self.grid.dim as i32)
            * self.values.iter().map(|v| v.norm_sqr()).sum::<f64>()
    }

    pub fn scale(&mut self, c: Complex64) {
        for v in &mut self.values {
            *v *= c;
        }
    }

    pub fn axpy(&mut self, c: Complex64, other: &SampledSignal) {
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += c * b;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spacing_and_nodes() {
        let g = Grid::new(1, std::f64::consts::PI, 10).unwrap();
        assert_eq!(g.n(), 1024);
        assert!((g.dx() - 2.0 * std::f64::consts::PI / 1024.0).abs() < 1e-15);
        assert_eq!(g.coord(512), 0.0);
        assert_eq!(g.nearest(0.0), 512);
        assert!((g.dxi() - 1.0).abs() < 1e-15);
        assert!(Grid::new(3, 1.0, 8).is_err());
        assert!(Grid::new(1, 1.0, 2).is_err());
    }
}
