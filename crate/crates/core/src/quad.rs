//! One-dimensional quadrature: adaptive Gauss–Kronrod (7/15) for complex
//! integrands and Gauss–Legendre rules of arbitrary order.

use num_complex::Complex64;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Options for [`integrate`].
#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    /// Absolute error target for the whole interval.
    pub abs_tol: f64,
    /// Number of equal panels the interval is split into before adapting.
    pub panels: usize,
    /// Maximum bisection depth per panel.
    pub max_depth: u32,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            abs_tol: 1e-12,
            panels: 1,
            max_depth: 30,
        }
    }
}

/// Result of [`integrate`].
#[derive(Debug, Clone, Copy)]
pub struct QuadResult {
    pub value: Complex64,
    pub error: f64,
    pub evals: usize,
}

fn gk15<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64) -> (Complex64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        kron += s * WGK[j];
        if j % 2 == 1 {
            gauss += s * WG[j / 2];
        }
    }
    let k = kron * h;
    let g = gauss * h;
    (k, (k - g).norm())
}

/// Adaptive Gauss–Kronrod integral of a complex integrand over `[a, b]`.
///
/// The interval is first cut into `opts.panels` equal pieces (useful for
/// oscillatory integrands where the number of oscillations is known), then each
/// piece is bisected until its share of the error budget is met.
pub fn integrate<F: Fn(f64) -> Complex64>(f: F, a: f64, b: f64, opts: &QuadOptions) -> QuadResult {
    if b <= a {
        return QuadResult {
            value: Complex64::new(0.0, 0.0),
            error: 0.0,
            evals: 0,
        };
    }
    let panels = opts.panels.max(1);
    let width = (b - a) / panels as f64;
    let total = b - a;
    let mut value = Complex64::new(0.0, 0.0);
    let mut error = 0.0;
    let mut evals = 0;
    let mut stack: Vec<(f64, f64, u32)> = Vec::with_capacity(64);
    for p in 0..panels {
        let lo = a + p as f64 * width;
        let hi = if p + 1 == panels { b } else { lo + width };
        stack.push((lo, hi, 0));
        while let Some((lo, hi, depth)) = stack.pop() {
            let (v, e) = gk15(&f, lo, hi);
            evals += 15;
            let budget = opts.abs_tol * (hi - lo) / total;
            if e <= budget || depth >= opts.max_depth {
                value += v;
                error += e;
            } else {
                let mid = 0.5 * (lo + hi);
                stack.push((mid, hi, depth + 1));
                stack.push((lo, mid, depth + 1));
            }
        }
    }
    QuadResult {
        value,
        error,
        evals,
    }
}

/// Real-valued convenience wrapper around [`integrate`].
pub fn integrate_real<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, opts: &QuadOptions) -> (f64, f64) {
    let r = integrate(|x| Complex64::new(f(x), 0.0), a, b, opts);
    (r.value.re, r.error)
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let mut p1 = 1.0;
            let mut p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                p1 = ((2 * j + 1) as f64 * z * p2 - j as f64 * p3) / (j + 1) as f64;
            }
            dp = n as f64 * (z * p1 - p2) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -z;
        nodes[n - 1 - i] = z;
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn gaussian_integral() {
        let (v, _) = integrate_real(
            |x| (-x * x / 2.0).exp(),
            -12.0,
            12.0,
            &QuadOptions::default(),
        );
        assert!((v - (2.0 * PI).sqrt()).abs() < 1e-13);
    }

    #[test]
    fn oscillatory_integral_with_panels() {
        // int_0^{2pi} cos(200 x) e^{i 200 x} dx = pi
        let opts = QuadOptions {
            panels: 200,
            ..Default::default()
        };
        let r = integrate(
            |x| Complex64::from_polar(1.0, 200.0 * x) * (200.0 * x).cos(),
            0.0,
            2.0 * PI,
            &opts,
        );
        assert!((r.value - Complex64::new(PI, 0.0)).norm() < 1e-11);
    }

    #[test]
    fn legendre_rule_is_exact_for_polynomials() {
        let (x, w) = gauss_legendre(9);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(16)).sum();
        assert!((s - 2.0 / 17.0).abs() < 1e-14);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
    }
}
