//! Special functions not covered by `statrs`.

use statrs::function::gamma::gamma;

/// Kummer's confluent hypergeometric function `M(a, b, -z)` for real `z >= 0`
/// and `b > 0`.
pub fn kummer_m_neg(a: f64, b: f64, z: f64) -> f64 {
    assert!(z >= 0.0 && b > 0.0);
    if z <= 80.0 {
        // Kummer transformation: M(a,b,-z) = e^{-z} M(b-a, b, z); the series in
        // +z has (eventually) positive terms, so no catastrophic cancellation.
        let c = b - a;
        let mut term: f64 = 1.0;
        let mut sum: f64 = 1.0;
        let mut k = 0.0;
        loop {
            term *= (c + k) * z / ((b + k) * (k + 1.0));
            sum += term;
            k += 1.0;
            if (term.abs() < 1e-17 * sum.abs() && k > z) || k > 2000.0 {
                break;
            }
        }
        (-z).exp() * sum
    } else {
        let pref = gamma(b) / gamma(b - a);
        if !pref.is_finite() || pref == 0.0 {
            return 0.0;
        }
        let mut term: f64 = 1.0;
        let mut sum: f64 = 1.0;
        let mut prev = f64::INFINITY;
        let mut s = 0.0;
        loop {
            let next = term * (a + s) * (a - b + 1.0 + s) / ((s + 1.0) * z);
            if next.abs() >= prev.abs() || next.abs() < 1e-18 * sum.abs() || s > 200.0 {
                break;
            }
            prev = term;
            term = next;
            sum += term;
            s += 1.0;
        }
        pref * z.powf(-a) * sum
    }
}

/// `∫ |y|^m e^{-y²/(2σ²)} e^{-iyη} dy` for `m > -1` (real, since the integrand is even).
pub fn gaussian_power_ft(m: f64, sigma: f64, eta: f64) -> f64 {
    let a = 0.5 * (m + 1.0);
    let z = 0.5 * sigma * sigma * eta * eta;
    gamma(a) * (2.0 * sigma * sigma).powf(a) * kummer_m_neg(a, 0.5, z)
}

/// Hurwitz zeta `ζ(s, q) = Σ_{k≥0} (q + k)^{-s}` for `s ≠ 1`, `q > 0`, by
/// Euler–Maclaurin summation (analytic continuation for `s < 1`).
pub fn hurwitz_zeta(s: f64, q: f64) -> f64 {
    assert!(q > 0.0 && s != 1.0);
    const B: [f64; 6] = [
        1.0 / 6.0,
        -1.0 / 30.0,
        1.0 / 42.0,
        -1.0 / 30.0,
        5.0 / 66.0,
        -691.0 / 2730.0,
    ];
    let n = 20usize;
    let mut sum: f64 = (0..n).map(|k| (q + k as f64).powf(-s)).sum();
    let a = q + n as f64;
    sum += a.powf(1.0 - s) / (s - 1.0) + 0.5 * a.powf(-s);
    // rising factorial s(s+1)…(s+2j-2) / (2j)!
    let mut poch = s;
    let mut fact = 2.0;
    for (j, b) in B.iter().enumerate() {
        let j = j + 1;
        sum += b / fact * poch * a.powf(-s - 2.0 * j as f64 + 1.0);
        poch *= (s + 2.0 * j as f64 - 1.0) * (s + 2.0 * j as f64);
        fact *= (2.0 * j as f64 + 1.0) * (2.0 * j as f64 + 2.0);
    }
    sum
}

/// Bessel function of the first kind, order zero (rational approximations,
/// absolute accuracy about 1e-8).
pub fn bessel_j0(x: f64) -> f64 {
    let ax = x.abs();
    if ax < 8.0 {
        let y = x * x;
        let n = 57568490574.0
            + y * (-13362590354.0
                + y * (651619640.7 + y * (-11214424.18 + y * (77392.33017 + y * (-184.9052456)))));
        let d = 57568490411.0
            + y * (1029532985.0 + y * (9494680.718 + y * (59272.64853 + y * (267.8532712 + y))));
        n / d
    } else {
        let z = 8.0 / ax;
        let y = z * z;
        let xx = ax - std::f64::consts::FRAC_PI_4;
        let p = 1.0
            + y * (-0.1098628627e-2
                + y * (0.2734510407e-4 + y * (-0.2073370639e-5 + y * 0.2093887211e-6)));
        let q = -0.1562499995e-1
            + y * (0.1430488765e-3
                + y * (-0.6911147651e-5 + y * (0.7621095161e-6 - y * 0.934935152e-7)));
        (std::f64::consts::FRAC_2_PI / ax).sqrt() * (xx.cos() * p - z * xx.sin() * q)
    }
}
