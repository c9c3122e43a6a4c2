//! Smooth transitions, compactly supported bumps, and tabulated Fourier
//! transforms of smooth functions.

use num_complex::Complex64;
use rustfft::FftPlanner;

fn flat(t: f64) -> f64 {
    if t > 0.0 {
        (-1.0 / t).exp()
    } else {
        0.0
    }
}

fn flat_deriv(t: f64) -> f64 {
    if t > 0.0 {
        (-1.0 / t).exp() / (t * t)
    } else {
        0.0
    }
}

/// C∞ step: 0 for `t <= 0`, 1 for `t >= 1`, built from `exp(-1/t)`.
pub fn smooth_step(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        let a = flat(t);
        a / (a + flat(1.0 - t))
    }
}

pub fn smooth_step_deriv(t: f64) -> f64 {
    if t <= 0.0 || t >= 1.0 {
        return 0.0;
    }
    let a = flat(t);
    let b = flat(1.0 - t);
    let s = a + b;
    (flat_deriv(t) * b + a * flat_deriv(1.0 - t)) / (s * s)
}

/// Radial C∞ bump: 1 on `|x - center| <= plateau`, 0 beyond `plateau + width`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bump1d {
    pub center: f64,
    pub plateau: f64,
    pub width: f64,
}

impl Bump1d {
    /// The computational-box cutoff: plateau `[-L/2, L/2]`, support `[-3L/4, 3L/4]`.
    pub fn box_cutoff(half_width: f64) -> Self {
        Self {
            center: 0.0,
            plateau: half_width / 2.0,
            width: half_width / 4.0,
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        smooth_step((self.plateau + self.width - (x - self.center).abs()) / self.width)
    }

    pub fn deriv(&self, x: f64) -> f64 {
        let d = x - self.center;
        let t = (self.plateau + self.width - d.abs()) / self.width;
        -d.signum() * smooth_step_deriv(t) / self.width
    }

    pub fn support(&self) -> (f64, f64) {
        let r = self.plateau + self.width;
        (self.center - r, self.center + r)
    }
}

/// Fourier transform `G(η) = ∫ g(x) e^{-ixη} dx` of a smooth, compactly supported
/// real function, tabulated on a uniform η grid and evaluated by cubic Hermite
/// interpolation of the demodulated transform `e^{iηc} G(η)`.
///
/// Outside `[-eta_max, eta_max]` the table returns zero.
#[derive(Debug, Clone)]
pub struct FourierTable {
    center: f64,
    step: f64,
    eta_max: f64,
    half: usize,
    values: Vec<Complex64>,
    derivs: Vec<Complex64>,
}

impl FourierTable {
    /// Build the table for `g` supported in `[a, b]`.
    ///
    /// `step` is the η spacing; the trapezoid nodes are spaced so that the
    /// alias period is at least `4 * eta_max`.
    pub fn build<G: Fn(f64) -> f64>(g: G, a: f64, b: f64, step: f64, eta_max: f64) -> Self {
        let center = 0.5 * (a + b);
        let n = ((4.0 * eta_max / step).ceil() as usize).next_power_of_two();
        let dx = 2.0 * std::f64::consts::PI / (n as f64 * step);
        assert!(
            n as f64 * dx >= (b - a),
            "Fourier table step too coarse for support width"
        );
        let start = center - 0.5 * n as f64 * dx;
        let mut vals: Vec<Complex64> = Vec::with_capacity(n);
        let mut dvals: Vec<Complex64> = Vec::with_capacity(n);
        for j in 0..n {
            let x = start + j as f64 * dx;
            let gx = if x > a && x < b { g(x) } else { 0.0 };
            vals.push(Complex64::new(gx * dx, 0.0));
            // d/dη of e^{iηc} G(η) = ∫ -i (x - c) g(x) e^{-iη(x-c)} dx
            dvals.push(Complex64::new(0.0, -(x - center) * gx * dx));
        }
        let mut planner = FftPlanner::<f64>::new();
        let fft = planner.plan_fft_forward(n);
        fft.process(&mut vals);
        fft.process(&mut dvals);

        let half = (eta_max / step).ceil() as usize + 2;
        let mut values = Vec::with_capacity(2 * half + 1);
        let mut derivs = Vec::with_capacity(2 * half + 1);
        for k in -(half as i64)..=(half as i64) {
            let idx = k.rem_euclid(n as i64) as usize;
            let eta = k as f64 * step;
            // DFT index k carries the phase e^{-i start η}; shift it to the center.
            let shift = Complex64::from_polar(1.0, -(start - center) * eta);
            values.push(vals[idx] * shift);
            derivs.push(dvals[idx] * shift);
        }
        Self {
            center,
            step,
            eta_max,
            half,
            values,
            derivs,
        }
    }

    pub fn eta_max(&self) -> f64 {
        self.eta_max
    }

    /// Interpolated `G(η)`.
    pub fn eval(&self, eta: f64) -> Complex64 {
        if eta.abs() > self.eta_max {
            return Complex64::new(0.0, 0.0);
        }
        let u = eta / self.step + self.half as f64;
        let i = (u.floor() as usize).min(self.values.len() - 2);
        let t = u - i as f64;
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        let v = self.values[i] * h00
            + self.derivs[i] * (h10 * self.step)
            + self.values[i + 1] * h01
            + self.derivs[i + 1] * (h11 * self.step);
        v * Complex64::from_polar(1.0, -self.center * eta)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::{integrate, QuadOptions};

    #[test]
    fn step_is_monotone_and_symmetric() {
        let mut prev = 0.0;
        for i in 0..=100 {
            let t = i as f64 / 100.0;
            let s = smooth_step(t);
            assert!(s >= prev);
            assert!((s + smooth_step(1.0 - t) - 1.0).abs() < 1e-15);
            prev = s;
        }
        let h = 1e-6;
        let fd = (smooth_step(0.3 + h) - smooth_step(0.3 - h)) / (2.0 * h);
        assert!((fd - smooth_step_deriv(0.3)).abs() < 1e-8);
    }

    #[test]
    fn box_cutoff_plateau_and_support() {
        let c = Bump1d::box_cutoff(std::f64::consts::PI);
        assert_eq!(c.eval(0.0), 1.0);
        assert_eq!(c.eval(1.5), 1.0);
        assert_eq!(c.eval(2.4), 0.0);
        assert!(c.eval(2.0) > 0.0 && c.eval(2.0) < 1.0);
    }

    #[test]
    fn table_matches_direct_quadrature() {
        let b = Bump1d {
            center: 0.4,
            plateau: 0.3,
            width: 0.5,
        };
        let (lo, hi) = b.support();
        let table = FourierTable::build(|x| b.eval(x), lo, hi, 0.02, 200.0);
        for &eta in &[0.0, 0.37, 3.3, -12.7, 55.1] {
            let opts = QuadOptions {
                panels: 64,
                abs_tol: 1e-14,
                ..Default::default()
            };
            let direct = integrate(
                |x| Complex64::from_polar(b.eval(x), -x * eta),
                lo,
                hi,
                &opts,
            )
            .value;
            let t = table.eval(eta);
            assert!((t - direct).norm() < 1e-10, "eta={eta}: {t} vs {direct}");
        }
    }
}
