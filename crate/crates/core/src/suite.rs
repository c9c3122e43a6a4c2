//! Repeat detection across several windows and measure the spread.

use serde::Serialize;

use crate::detect::{
    classify, estimate_sobolev_volume, ser_f64, Classification, DecayFit, SobolevEstimate,
    Thresholds,
};
use crate::distribution::TestDistribution;
use crate::engine::{scaled_volumes, EngineConfig};
use crate::lattice::{LambdaSchedule, PhaseRegion};
use crate::window::Window;
use crate::{Result, WfsError};

#[derive(Debug, Clone, Serialize)]
pub struct WindowRun {
    pub window: String,
    pub decay: DecayFit,
    pub sobolev: SobolevEstimate,
}

#[derive(Debug, Clone, Serialize)]
pub struct DirectionSpread {
    pub direction: Vec<f64>,
    pub runs: Vec<WindowRun>,
    pub unanimous: bool,
    /// Largest pairwise `|s_star|` difference; zero when every window
    /// reports `+∞`, infinite when only some do.
    #[serde(serialize_with = "ser_f64")]
    pub s_spread: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SpreadReport {
    pub point: Vec<f64>,
    pub directions: Vec<DirectionSpread>,
    pub unanimous: bool,
    #[serde(serialize_with = "ser_f64")]
    pub max_spread: f64,
}

pub fn s_spread(values: &[f64]) -> f64 {
    let inf = values.iter().filter(|v| v.is_infinite()).count();
    if inf == values.len() {
        return 0.0;
    }
    if inf > 0 {
        return f64::INFINITY;
    }
    let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    hi - lo
}

pub fn window_independence_suite(
    dist: &TestDistribution,
    windows: &[Window],
    regions: &[PhaseRegion],
    schedule: &LambdaSchedule,
    cfg: &EngineConfig,
    th: &Thresholds,
) -> Result<SpreadReport> {
    if windows.len() < 2 {
        return Err(WfsError::InvalidArgument(
            "window independence needs at least two windows".into(),
        ));
    }
    let mut per_window = Vec::with_capacity(windows.len());
    for w in windows {
        let vols = scaled_volumes(dist, w, regions, schedule, cfg)?;
        let mut runs = Vec::with_capacity(vols.len());
        for v in &vols {
            runs.push(WindowRun {
                window: w.name().to_string(),
                decay: classify(v, th)?,
                sobolev: estimate_sobolev_volume(v)?,
            });
        }
        per_window.push(runs);
    }
    let mut directions = Vec::with_capacity(regions.len());
    for (ri, r) in regions.iter().enumerate() {
        let runs: Vec<WindowRun> = per_window.iter().map(|w| w[ri].clone()).collect();
        let first: Classification = runs[0].decay.classification;
        let unanimous = runs.iter().all(|x| x.decay.classification == first);
        let s: Vec<f64> = runs.iter().map(|x| x.sobolev.s_star).collect();
        directions.push(DirectionSpread {
            direction: r.xi0.clone(),
            runs,
            unanimous,
            s_spread: s_spread(&s),
        });
    }
    Ok(SpreadReport {
        point: regions[0].x0.clone(),
        unanimous: directions.iter().all(|d| d.unanimous),
        max_spread: directions.iter().map(|d| d.s_spread).fold(0.0, f64::max),
        directions,
    })
}
