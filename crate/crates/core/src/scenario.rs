//! Scenario configs, the runner, and report artifacts.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::detect::{
    classify, decay_statistic, estimate_sobolev_volume, hs_inner_integral, ser_f64, Classification,
    DecayFit, SobolevEstimate, Thresholds,
};
use crate::distribution::TestDistribution;
use crate::engine::{
    check_admissible, resolve_path, scaled_volume, scaled_volumes, EngineConfig, PathChoice,
};
use crate::grid::Grid;
use crate::lattice::{LambdaSchedule, PhaseRegion};
use crate::oracle::{
    compare, cone_half_angle, LocalCutoff, LocalSpectrum, OracleOptions, OracleVerdict,
};
use crate::par::{worker_count, Exec};
use crate::window::Window;
use crate::{Result, WfsError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default)]
    pub name: String,
    pub distribution: String,
    pub dim: usize,
    #[serde(default = "default_windows")]
    pub windows: Vec<String>,
    #[serde(default)]
    pub grid: GridConfig,
    pub region: RegionConfig,
    #[serde(default)]
    pub schedule: ScheduleConfig,
    #[serde(default)]
    pub thresholds: Thresholds,
    #[serde(default)]
    pub path: PathChoice,
    #[serde(default)]
    pub oracle: OracleConfig,
    #[serde(default)]
    pub map: Option<MapConfig>,
    #[serde(default)]
    pub outputs: OutputConfig,
    #[serde(default)]
    pub assert: AssertConfig,
    /// Working memory limit in MiB.
    #[serde(default = "default_budget")]
    pub memory_budget_mib: u64,
}

fn default_windows() -> Vec<String> {
    vec!["gaussian".into()]
}

fn default_budget() -> u64 {
    4096
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub half_width: Option<f64>,
    pub log2_points: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionConfig {
    /// Centres `x₀` of the position boxes.
    pub points: Vec<Vec<f64>>,
    /// Directions `ξ₀/|ξ₀|`; defaults to `±1` in 1D and 16 equally spaced
    /// unit vectors in 2D.
    #[serde(default)]
    pub directions: Option<Vec<Vec<f64>>>,
    #[serde(default = "default_half")]
    pub k_half: f64,
    #[serde(default = "default_half")]
    pub v_half: f64,
    #[serde(default = "default_xi_norm")]
    pub xi_norm: f64,
}

fn default_half() -> f64 {
    0.2
}

fn default_xi_norm() -> f64 {
    1.0
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleConfig {
    pub lambda0: Option<f64>,
    pub ratio: Option<f64>,
    pub count: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleConfig {
    #[serde(default = "yes")]
    pub enabled: bool,
    #[serde(default)]
    pub cutoff_radius: Option<f64>,
    #[serde(default)]
    pub band_fraction: Option<f64>,
    #[serde(default)]
    pub r0: Option<f64>,
}

fn yes() -> bool {
    true
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            enabled: true,
            cutoff_radius: None,
            band_fraction: None,
            r0: None,
        }
    }
}

/// Slope map over a square of positions at one direction (2D only).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapConfig {
    pub direction: Vec<f64>,
    #[serde(default)]
    pub center: Option<Vec<f64>>,
    pub half_extent: f64,
    pub size: usize,
    #[serde(default)]
    pub window: Option<String>,
    /// Position box half-width per pixel; defaults to half the pixel pitch,
    /// capped at the probe box.
    #[serde(default)]
    pub k_half: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "out_report")]
    pub report: String,
    #[serde(default = "out_csv")]
    pub csv: String,
    #[serde(default = "out_pgm")]
    pub pgm: String,
    #[serde(default = "out_timings")]
    pub timings: String,
    /// Write every probe volume as raw little-endian pairs with a sidecar.
    #[serde(default)]
    pub dump: bool,
}

fn out_report() -> String {
    "report.json".into()
}
fn out_csv() -> String {
    "probes.csv".into()
}
fn out_pgm() -> String {
    "map.pgm".into()
}
fn out_timings() -> String {
    "timings.json".into()
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            report: out_report(),
            csv: out_csv(),
            pgm: out_pgm(),
            timings: out_timings(),
            dump: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AssertConfig {
    /// Largest accepted `|s_star - truth|` at singular probes.
    #[serde(default = "default_s_tol")]
    pub s_tolerance: f64,
    /// Probes whose direction is at least this far (degrees) from every
    /// singular direction in the enlarged box must classify REGULAR.
    #[serde(default = "default_reg_angle")]
    pub regular_angle_deg: f64,
    /// Enlargement of the position box used for the REGULAR expectation.
    #[serde(default = "default_margin")]
    pub regular_margin: f64,
}

fn default_s_tol() -> f64 {
    0.15
}
fn default_reg_angle() -> f64 {
    45.0
}
fn default_margin() -> f64 {
    0.25
}

impl Default for AssertConfig {
    fn default() -> Self {
        Self {
            s_tolerance: default_s_tol(),
            regular_angle_deg: default_reg_angle(),
            regular_margin: default_margin(),
        }
    }
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| {
            WfsError::InvalidArgument(format!("cannot read {}: {e}", path.display()))
        })?;
        Self::from_json(&text)
    }

    /// Fill every optional field with its default.
    pub fn resolved(mut self) -> Result<Self> {
        if !(self.dim == 1 || self.dim == 2) {
            return Err(WfsError::InvalidArgument(format!(
                "dim must be 1 or 2, got {}",
                self.dim
            )));
        }
        let one = self.dim == 1;
        self.grid.half_width.get_or_insert(PI);
        self.grid
            .log2_points
            .get_or_insert(if one { 18 } else { 10 });
        self.schedule.lambda0.get_or_insert(4.0);
        self.schedule.ratio.get_or_insert(2f64.sqrt());
        self.schedule.count.get_or_insert(if one { 21 } else { 13 });
        if self.region.directions.is_none() {
            self.region.directions = Some(default_directions(self.dim));
        }
        let o = OracleOptions::for_dim(self.dim);
        self.oracle.cutoff_radius.get_or_insert(o.cutoff_radius);
        self.oracle.band_fraction.get_or_insert(o.band_fraction);
        self.oracle.r0.get_or_insert(o.r0);
        if let Some(m) = &mut self.map {
            if m.center.is_none() {
                m.center = Some(vec![0.0; self.dim]);
            }
            if m.window.is_none() {
                m.window = self.windows.first().cloned();
            }
            if m.k_half.is_none() && m.size >= 2 {
                let pitch = 2.0 * m.half_extent / (m.size - 1) as f64;
                m.k_half = Some((0.5 * pitch).min(self.region.k_half));
            }
        }
        Ok(self)
    }
}

pub fn default_directions(dim: usize) -> Vec<Vec<f64>> {
    if dim == 1 {
        vec![vec![1.0], vec![-1.0]]
    } else {
        (0..16)
            .map(|k| {
                let a = k as f64 * PI / 8.0;
                vec![round_unit(a.cos()), round_unit(a.sin())]
            })
            .collect()
    }
}

fn round_unit(v: f64) -> f64 {
    if v.abs() < 1e-15 {
        0.0
    } else {
        v
    }
}

/// Everything needed to run, validated and constructed.
pub struct Prepared {
    pub config: ScenarioConfig,
    pub dist: TestDistribution,
    pub windows: Vec<Window>,
    pub schedule: LambdaSchedule,
    pub engine: EngineConfig,
    pub regions: Vec<Vec<PhaseRegion>>,
    pub map_regions: Vec<PhaseRegion>,
    pub map_window: Option<Window>,
    pub path: PathChoice,
}

/// Validate a config and check engine preconditions before any heavy work.
pub fn prepare(config: ScenarioConfig, exec: Exec) -> Result<Prepared> {
    let config = config.resolved()?;
    let dim = config.dim;
    let g = Grid::new(
        dim,
        config.grid.half_width.unwrap(),
        config.grid.log2_points.unwrap(),
    )?;
    let dist = TestDistribution::parse(&config.distribution, dim, g.half_width)?;
    if config.windows.is_empty() {
        return Err(WfsError::InvalidArgument(
            "at least one window is required".into(),
        ));
    }
    let windows = config
        .windows
        .iter()
        .map(|w| Window::from_name(w, dim))
        .collect::<Result<Vec<_>>>()?;
    let count = config.schedule.count.unwrap();
    if count == 0 {
        return Err(WfsError::EmptyVolume("schedule has no scales".into()));
    }
    let schedule = LambdaSchedule::new(
        config.schedule.lambda0.unwrap(),
        config.schedule.ratio.unwrap(),
        count,
    )?;
    if config.region.points.is_empty() {
        return Err(WfsError::InvalidArgument(
            "region needs at least one point".into(),
        ));
    }
    let dirs = config.region.directions.clone().unwrap();
    if dirs.is_empty() {
        return Err(WfsError::InvalidArgument(
            "region needs at least one direction".into(),
        ));
    }
    let xi = config.region.xi_norm;
    let make = |p: &[f64], d: &[f64], k: f64| -> Result<PhaseRegion> {
        if p.len() != dim || d.len() != dim {
            return Err(WfsError::InvalidArgument(format!(
                "probe coordinates must have dimension {dim}"
            )));
        }
        let m = d.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(m > 0.0) {
            return Err(WfsError::InvalidArgument(
                "directions must be non-zero".into(),
            ));
        }
        let xi0: Vec<f64> = d.iter().map(|v| v / m * xi).collect();
        PhaseRegion::new(p, k, &xi0, config.region.v_half)
    };
    let regions = config
        .region
        .points
        .iter()
        .map(|p| {
            dirs.iter()
                .map(|d| make(p, d, config.region.k_half))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;

    let (map_regions, map_window) = match &config.map {
        None => (Vec::new(), None),
        Some(m) => {
            if dim != 2 {
                return Err(WfsError::InvalidArgument("slope maps are 2D only".into()));
            }
            if m.size < 2 || !(m.half_extent > 0.0) {
                return Err(WfsError::InvalidArgument(
                    "map needs size >= 2 and a positive extent".into(),
                ));
            }
            let c = m.center.clone().unwrap();
            let k_half = m.k_half.unwrap_or(config.region.k_half);
            let mut rs = Vec::with_capacity(m.size * m.size);
            for row in 0..m.size {
                // PGM rows run top to bottom
                let y =
                    c[1] + m.half_extent - 2.0 * m.half_extent * row as f64 / (m.size - 1) as f64;
                for col in 0..m.size {
                    let x = c[0] - m.half_extent
                        + 2.0 * m.half_extent * col as f64 / (m.size - 1) as f64;
                    rs.push(make(&[x, y], &m.direction, k_half)?);
                }
            }
            (
                rs,
                Some(Window::from_name(m.window.as_deref().unwrap(), dim)?),
            )
        }
    };

    let mut engine = EngineConfig::new(g);
    engine.path = config.path;
    engine.exec = exec;
    engine.memory_budget = config.memory_budget_mib.saturating_mul(1 << 20);
    let path = resolve_path(config.path, &dist)?;
    let threads = if exec.is_parallel() {
        worker_count()
    } else {
        1
    };
    for rs in &regions {
        check_admissible(&engine, path, rs, &schedule, threads)?;
    }
    if !map_regions.is_empty() {
        check_admissible(&engine, path, &map_regions[..1], &schedule, threads)?;
    }
    if schedule.len() < crate::detect::MIN_SCHEDULE {
        return Err(WfsError::InvalidArgument(format!(
            "classification needs at least {} scales",
            crate::detect::MIN_SCHEDULE
        )));
    }
    Ok(Prepared {
        config,
        dist,
        windows,
        schedule,
        engine,
        regions,
        map_regions,
        map_window,
        path,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct Truth {
    /// `None` where the probe sits in the transition band and is not asserted.
    pub expected: Option<Classification>,
    #[serde(serialize_with = "ser_opt_f64")]
    pub critical_s: Option<f64>,
    #[serde(serialize_with = "ser_opt_f64")]
    pub s_error: Option<f64>,
}

fn ser_opt_f64<S: serde::Serializer>(
    v: &Option<f64>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    match v {
        Some(x) => ser_f64(x, s),
        None => s.serialize_none(),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ProbeReport {
    pub window: String,
    pub point: Vec<f64>,
    pub direction: Vec<f64>,
    pub decay: DecayFit,
    pub sobolev: SobolevEstimate,
    pub d: Vec<f64>,
    pub j: Vec<f64>,
    pub oracle: Option<OracleVerdict>,
    pub oracle_error: Option<String>,
    pub truth: Truth,
    /// Whether the probe meets its ground-truth expectation; `None` when the
    /// probe is not asserted.
    pub pass: Option<bool>,
}

#[derive(Debug, Clone, Serialize)]
pub struct MapReport {
    pub direction: Vec<f64>,
    pub size: usize,
    pub window: String,
    /// Row-major, top row first.
    pub points: Vec<Vec<f64>>,
    pub slopes: Vec<SerF64>,
    pub pgm: String,
}

/// `f64` that serializes non-finite values as strings.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SerF64(#[serde(serialize_with = "ser_f64")] pub f64);

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub probes: usize,
    pub singular: usize,
    pub regular: usize,
    pub inconclusive: usize,
    pub asserted: usize,
    pub failed: usize,
    pub oracle_disagreements: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub tool: String,
    pub version: String,
    pub config: ScenarioConfig,
    pub distribution: String,
    pub grid: Grid,
    pub lambdas: Vec<f64>,
    pub path: PathChoice,
    pub probes: Vec<ProbeReport>,
    pub map: Option<MapReport>,
    pub summary: Summary,
}

#[derive(Debug, Clone, Serialize)]
pub struct Timings {
    pub total_seconds: f64,
    pub threads: usize,
    pub stages: BTreeMap<String, f64>,
}

pub struct Outcome {
    pub report: Report,
    pub timings: Timings,
    pub files: Vec<PathBuf>,
}

fn truth_for(
    dist: &TestDistribution,
    r: &PhaseRegion,
    a: &AssertConfig,
    decay: &DecayFit,
    sob: &SobolevEstimate,
) -> (Truth, Option<bool>) {
    let gt = dist.ground_truth();
    let dir: Vec<f64> = r.xi0.clone();
    let cone = cone_half_angle(&r.xi0, r.v_half);
    if let Some(s) = gt.critical_s_in(&r.x0, r.k_half, &dir, cone) {
        let err = sob.s_star - s;
        let ok = decay.classification == Classification::Singular && err.abs() <= a.s_tolerance;
        return (
            Truth {
                expected: Some(Classification::Singular),
                critical_s: Some(s),
                s_error: Some(err),
            },
            Some(ok),
        );
    }
    let far = gt
        .critical_s_in(
            &r.x0,
            r.k_half + a.regular_margin,
            &dir,
            a.regular_angle_deg.to_radians(),
        )
        .is_none();
    if far {
        let ok = decay.classification == Classification::Regular;
        (
            Truth {
                expected: Some(Classification::Regular),
                critical_s: None,
                s_error: None,
            },
            Some(ok),
        )
    } else {
        (
            Truth {
                expected: None,
                critical_s: None,
                s_error: None,
            },
            None,
        )
    }
}

/// Run a prepared scenario and write its artifacts into `out_dir`.
pub fn run(prep: &Prepared, out_dir: &Path) -> Result<Outcome> {
    let t0 = Instant::now();
    let mut stages = BTreeMap::new();
    let cfg = &prep.config;
    let th = &cfg.thresholds;
    let dim = cfg.dim;
    let opts = OracleOptions {
        cutoff_radius: cfg.oracle.cutoff_radius.unwrap(),
        band_fraction: cfg.oracle.band_fraction.unwrap(),
        r0: cfg.oracle.r0.unwrap(),
    };
    fs::create_dir_all(out_dir)?;
    let mut files = Vec::new();

    let mut probes = Vec::new();
    let mut spectra: Vec<Option<std::result::Result<LocalSpectrum, String>>> =
        (0..prep.regions.len()).map(|_| None).collect();
    for (wi, w) in prep.windows.iter().enumerate() {
        for (pi, rs) in prep.regions.iter().enumerate() {
            let t = Instant::now();
            let vols = scaled_volumes(&prep.dist, w, rs, &prep.schedule, &prep.engine)?;
            *stages
                .entry(format!("volumes/{}", cfg.windows[wi]))
                .or_insert(0.0) += t.elapsed().as_secs_f64();
            if cfg.oracle.enabled && spectra[pi].is_none() {
                let t = Instant::now();
                let o = opts.fitted(&rs[0].x0, prep.dist.half_width());
                let sp = LocalCutoff::new(o.cutoff_radius)
                    .and_then(|c| LocalSpectrum::new(&prep.dist, &prep.engine.grid, &rs[0].x0, &c))
                    .map_err(|e| e.to_string());
                spectra[pi] = Some(sp);
                *stages.entry("oracle".into()).or_insert(0.0) += t.elapsed().as_secs_f64();
            }
            for (ri, (r, v)) in rs.iter().zip(&vols).enumerate() {
                if cfg.outputs.dump {
                    let p = out_dir.join(format!("volume_w{wi}_p{pi}_d{ri}.bin"));
                    v.dump(&p)?;
                    files.push(p);
                }
                let decay = classify(v, th)?;
                let sobolev = estimate_sobolev_volume(v)?;
                let (oracle, oracle_error) = match &spectra[pi] {
                    Some(Ok(sp)) => {
                        let o = opts.fitted(&r.x0, prep.dist.half_width());
                        match sp.conic(&r.xi0, cone_half_angle(&r.xi0, r.v_half), &o, th) {
                            Ok(mut ov) => {
                                compare(&decay, &sobolev, &mut ov);
                                (Some(ov), None)
                            }
                            Err(e) => (None, Some(e.to_string())),
                        }
                    }
                    Some(Err(e)) => (None, Some(e.clone())),
                    None => (None, None),
                };
                let (truth, pass) = truth_for(&prep.dist, r, &cfg.assert, &decay, &sobolev);
                probes.push(ProbeReport {
                    window: cfg.windows[wi].clone(),
                    point: r.x0.clone(),
                    direction: r.xi0.clone(),
                    d: decay_statistic(v),
                    j: hs_inner_integral(v),
                    decay,
                    sobolev,
                    oracle,
                    oracle_error,
                    truth,
                    pass,
                });
            }
        }
    }

    let map = match (&cfg.map, &prep.map_window) {
        (Some(m), Some(w)) => {
            let t = Instant::now();
            let mut slopes = Vec::with_capacity(prep.map_regions.len());
            for r in &prep.map_regions {
                let v = scaled_volume(&prep.dist, w, r, &prep.schedule, &prep.engine)?;
                slopes.push(classify(&v, th)?.slope);
            }
            let p = out_dir.join(&cfg.outputs.pgm);
            fs::write(&p, pgm_bytes(&slopes, m.size))?;
            files.push(p);
            stages.insert("map".into(), t.elapsed().as_secs_f64());
            Some(MapReport {
                direction: m.direction.clone(),
                size: m.size,
                window: m.window.clone().unwrap(),
                points: prep.map_regions.iter().map(|r| r.x0.clone()).collect(),
                slopes: slopes.into_iter().map(SerF64).collect(),
                pgm: cfg.outputs.pgm.clone(),
            })
        }
        _ => None,
    };

    let count = |c: Classification| {
        probes
            .iter()
            .filter(|p| p.decay.classification == c)
            .count()
    };
    let summary = Summary {
        probes: probes.len(),
        singular: count(Classification::Singular),
        regular: count(Classification::Regular),
        inconclusive: count(Classification::Inconclusive),
        asserted: probes.iter().filter(|p| p.pass.is_some()).count(),
        failed: probes.iter().filter(|p| p.pass == Some(false)).count(),
        oracle_disagreements: probes
            .iter()
            .filter(|p| {
                p.oracle.as_ref().is_some_and(|o| {
                    o.classification_agrees == Some(false) || o.s_agrees == Some(false)
                })
            })
            .count(),
    };
    let report = Report {
        tool: "wavefront-scope".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        config: cfg.clone(),
        distribution: prep.dist.to_string(),
        grid: prep.engine.grid,
        lambdas: prep.schedule.values(),
        path: prep.path,
        probes,
        map,
        summary,
    };

    let p = out_dir.join(&cfg.outputs.report);
    fs::write(&p, report_json(&report)?)?;
    files.push(p);
    let p = out_dir.join(&cfg.outputs.csv);
    write_csv(&p, &report, dim)?;
    files.push(p);
    let timings = Timings {
        total_seconds: t0.elapsed().as_secs_f64(),
        threads: if prep.engine.exec.is_parallel() {
            worker_count()
        } else {
            1
        },
        stages,
    };
    let p = out_dir.join(&cfg.outputs.timings);
    fs::write(&p, serde_json::to_vec_pretty(&timings)?)?;
    files.push(p);
    Ok(Outcome {
        report,
        timings,
        files,
    })
}

pub fn report_json(r: &Report) -> Result<Vec<u8>> {
    let mut v = serde_json::to_vec_pretty(r)?;
    v.push(b'\n');
    Ok(v)
}

fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{v}")
    }
}

fn write_csv(path: &Path, r: &Report, dim: usize) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    let mut header: Vec<&str> = vec!["window"];
    if dim == 1 {
        header.extend(["x", "direction"]);
    } else {
        header.extend(["x1", "x2", "direction1", "direction2"]);
    }
    header.extend([
        "slope",
        "s_star",
        "classification",
        "r_squared",
        "oracle_slope",
        "oracle_s",
    ]);
    w.write_record(&header).map_err(csv_err)?;
    for p in &r.probes {
        let mut row = vec![p.window.clone()];
        row.extend(p.point.iter().map(|v| fmt_f64(*v)));
        row.extend(p.direction.iter().map(|v| fmt_f64(*v)));
        row.push(fmt_f64(p.decay.slope));
        row.push(fmt_f64(p.sobolev.s_star));
        row.push(
            match p.decay.classification {
                Classification::Regular => "REGULAR",
                Classification::Singular => "SINGULAR",
                Classification::Inconclusive => "INCONCLUSIVE",
            }
            .into(),
        );
        row.push(fmt_f64(p.decay.r_squared));
        match &p.oracle {
            Some(o) => {
                row.push(fmt_f64(o.conic_decay_slope));
                row.push(fmt_f64(o.conic_sobolev_s));
            }
            None => row.extend([String::new(), String::new()]),
        }
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> WfsError {
    WfsError::Io(std::io::Error::other(e.to_string()))
}

/// Binary PGM (P5, maxval 255) of slopes on a `size × size` map. The most
/// singular finite slope is white; slopes 8 or more below it are black.
pub fn pgm_bytes(slopes: &[f64], size: usize) -> Vec<u8> {
    let top = slopes
        .iter()
        .cloned()
        .filter(|s| s.is_finite())
        .fold(f64::NEG_INFINITY, f64::max);
    let mut out = format!("P5\n{size} {size}\n255\n").into_bytes();
    for &s in slopes {
        let strength = if top.is_finite() && s.is_finite() {
            (top - s).clamp(0.0, 8.0) / 8.0
        } else {
            1.0
        };
        out.push((255.0 * (1.0 - strength)).round() as u8);
    }
    out
}
