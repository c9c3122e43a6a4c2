//! Decay and Sobolev statistics on wave packet volumes.

use serde::{Deserialize, Serialize, Serializer};

use crate::engine::WptVolume;
use crate::{Result, WfsError};

/// Smallest value kept before taking logarithms.
pub const LOG_CLAMP: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Classification {
    Regular,
    Singular,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Thresholds {
    /// REGULAR requires a fitted slope at most `-n_reg`.
    pub n_reg: f64,
    /// SINGULAR requires a fitted slope at least this value.
    pub sing_slope: f64,
    pub r2_min: f64,
    /// Values below `rel_floor * max` are treated as numerically zero.
    pub rel_floor: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            n_reg: 5.0,
            sing_slope: -2.0,
            r2_min: 0.9,
            rel_floor: 1e-10,
        }
    }
}

/// Serialize non-finite floats as strings (`"inf"`, `"-inf"`, `"nan"`).
pub fn ser_f64<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else if v.is_nan() {
        s.serialize_str("nan")
    } else if *v > 0.0 {
        s.serialize_str("inf")
    } else {
        s.serialize_str("-inf")
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DecayFit {
    #[serde(serialize_with = "ser_f64")]
    pub slope: f64,
    #[serde(serialize_with = "ser_f64")]
    pub intercept: f64,
    #[serde(serialize_with = "ser_f64")]
    pub r_squared: f64,
    pub classification: Classification,
    pub n_reg: f64,
    pub degenerate: bool,
    /// Schedule indices `[start, end]` of the fit window.
    pub fit_range: (usize, usize),
    pub clamped: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct PartialIntegral {
    #[serde(serialize_with = "ser_f64")]
    pub s: f64,
    /// `I(s; λ_j)` for every `j` in the schedule.
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SobolevEstimate {
    #[serde(serialize_with = "ser_f64")]
    pub s_star: f64,
    #[serde(serialize_with = "ser_f64")]
    pub j_slope: f64,
    #[serde(serialize_with = "ser_f64")]
    pub r_squared: f64,
    pub fit_range: (usize, usize),
    pub degenerate: bool,
    pub partial_integrals: Vec<PartialIntegral>,
}

/// `D(λ_j) = max |W|` over the lattice at each scale, clamped below.
pub fn decay_statistic(vol: &WptVolume) -> Vec<f64> {
    (0..vol.slabs.len())
        .map(|j| vol.max_abs(j).max(LOG_CLAMP))
        .collect()
}

/// `J(λ_j) = ∬_{V×K} |W|² dx dξ` as a lattice Riemann sum.
pub fn hs_inner_integral(vol: &WptVolume) -> Vec<f64> {
    vol.slabs
        .iter()
        .map(|s| {
            s.values.iter().map(|v| v.norm_sqr()).sum::<f64>()
                * s.lattice.cell_x
                * s.lattice.cell_xi
        })
        .collect()
}

/// Ordinary least squares `y = a + b x`; returns `(b, a, r²)`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    let b = sxy / sxx;
    let a = my - b * mx;
    let r2 = if syy == 0.0 {
        1.0
    } else {
        (sxy * sxy) / (sxx * syy)
    };
    (b, a, r2)
}

struct LogFit {
    slope: f64,
    intercept: f64,
    r2: f64,
    degenerate: bool,
    range: (usize, usize),
    clamped: usize,
}

/// Fit `log y` against `log t` over the upper half of the sequence, dropping
/// values below `rel_floor * max(y)`. More than half dropped is degenerate.
fn log_fit(t: &[f64], y: &[f64], rel_floor: f64) -> Result<LogFit> {
    if t.len() != y.len() {
        return Err(WfsError::InvalidArgument("sequence lengths differ".into()));
    }
    if t.len() < 4 {
        return Err(WfsError::InvalidArgument(format!(
            "need at least 4 samples for a decay fit, got {}",
            t.len()
        )));
    }
    let start = t.len() / 2;
    let end = t.len() - 1;
    let peak = y.iter().cloned().fold(0.0, f64::max);
    let floor = (rel_floor * peak).max(LOG_CLAMP);
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for j in start..=end {
        if y[j] > floor {
            xs.push(t[j].ln());
            ys.push(y[j].ln());
        }
    }
    let total = end - start + 1;
    let clamped = total - xs.len();
    if 2 * clamped > total || xs.len() < 2 {
        return Ok(LogFit {
            slope: f64::NEG_INFINITY,
            intercept: f64::NAN,
            r2: f64::NAN,
            degenerate: true,
            range: (start, end),
            clamped,
        });
    }
    let (slope, intercept, r2) = linear_fit(&xs, &ys);
    Ok(LogFit {
        slope,
        intercept,
        r2,
        degenerate: false,
        range: (start, end),
        clamped,
    })
}

/// Classify a decay sequence `d` sampled at `lambdas`.
pub fn classify_sequence(lambdas: &[f64], d: &[f64], th: &Thresholds) -> Result<DecayFit> {
    let f = log_fit(lambdas, d, th.rel_floor)?;
    let classification = if f.degenerate || (f.slope <= -th.n_reg && f.r2 >= th.r2_min) {
        Classification::Regular
    } else if f.slope >= th.sing_slope {
        Classification::Singular
    } else {
        Classification::Inconclusive
    };
    Ok(DecayFit {
        slope: f.slope,
        intercept: f.intercept,
        r_squared: f.r2,
        classification,
        n_reg: th.n_reg,
        degenerate: f.degenerate,
        fit_range: f.range,
        clamped: f.clamped,
    })
}

/// Minimum schedule length accepted by [`classify`].
pub const MIN_SCHEDULE: usize = 8;

pub fn classify(vol: &WptVolume, th: &Thresholds) -> Result<DecayFit> {
    if vol.slabs.len() < MIN_SCHEDULE {
        return Err(WfsError::InvalidArgument(format!(
            "classification needs at least {MIN_SCHEDULE} scales, got {}",
            vol.slabs.len()
        )));
    }
    classify_sequence(&vol.lambdas(), &decay_statistic(vol), th)
}

/// `I(s; λ_k) = ∫_{λ₀}^{λ_k} λ^{n-1+2s} J(λ) dλ`, trapezoid rule in `log λ`.
pub fn partial_integrals(j: &[f64], lambdas: &[f64], n: usize, s: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(j.len());
    let g = |k: usize| lambdas[k].powf(n as f64 + 2.0 * s) * j[k];
    let mut acc = 0.0;
    out.push(0.0);
    for k in 1..j.len() {
        acc += 0.5 * (g(k) + g(k - 1)) * (lambdas[k].ln() - lambdas[k - 1].ln());
        out.push(acc);
    }
    out
}

/// Relative floor used for `J`, which is quadratic in the transform.
pub const J_REL_FLOOR: f64 = 1e-20;

/// Critical exponent `s* = -(slope + n)/2` from the decay of `J`.
pub fn estimate_sobolev(j: &[f64], lambdas: &[f64], n: usize) -> Result<SobolevEstimate> {
    let f = log_fit(lambdas, j, J_REL_FLOOR)?;
    let s_star = if f.degenerate {
        f64::INFINITY
    } else {
        -(f.slope + n as f64) / 2.0
    };
    let probes: Vec<f64> = if s_star.is_finite() {
        vec![s_star - 0.3, s_star, s_star + 0.3]
    } else {
        vec![0.0, 1.0, 2.0]
    };
    let partial_integrals = probes
        .into_iter()
        .map(|s| PartialIntegral {
            s,
            values: partial_integrals(j, lambdas, n, s),
        })
        .collect();
    Ok(SobolevEstimate {
        s_star,
        j_slope: f.slope,
        r_squared: f.r2,
        fit_range: f.range,
        degenerate: f.degenerate,
        partial_integrals,
    })
}

pub fn estimate_sobolev_volume(vol: &WptVolume) -> Result<SobolevEstimate> {
    estimate_sobolev(&hs_inner_integral(vol), &vol.lambdas(), vol.region.dim())
}
