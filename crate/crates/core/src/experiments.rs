//! Single-point evaluations and parameter sweeps, with CSV and SVG output.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use crate::angular::{compute_spectrum, AngleDistribution, AngularSpectrum};
use crate::capacity::{
    capacity_continuous_aperture, capacity_discrete_aperture, upper_bound_for_prefactor,
    CapacityEstimate,
};
use crate::channel::derive_trial_seed;
use crate::error::{Error, Result};
use crate::geometry::{enumerate_lattice, PlanarArrayConfig};
use crate::scenario::{RawScenario, ScenarioConfig, Scheme};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    /// Degrees, applied to both link ends.
    AzimuthSpread,
    /// Degrees, applied to both link ends.
    ElevationSpread,
    SnrDb,
    /// Wavelengths; patches shrink to `spacing²` once they would overlap.
    Spacing,
    /// Square aperture side in wavelengths, both ends.
    Aperture,
}

impl Axis {
    pub fn name(self) -> &'static str {
        match self {
            Axis::AzimuthSpread => "azimuth_spread",
            Axis::ElevationSpread => "elevation_spread",
            Axis::SnrDb => "snr_db",
            Axis::Spacing => "spacing",
            Axis::Aperture => "aperture",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Axis::AzimuthSpread => "Azimuth angle spread (deg)",
            Axis::ElevationSpread => "Elevation angle spread (deg)",
            Axis::SnrDb => "SNR (dB)",
            Axis::Spacing => "Antenna spacing (wavelengths)",
            Axis::Aperture => "Aperture side (wavelengths)",
        }
    }
}

/// Returns a copy of `cfg` with the axis set to `value`.
pub fn apply_axis(cfg: &ScenarioConfig, axis: Axis, value: f64) -> Result<ScenarioConfig> {
    let mut out = cfg.clone();
    match axis {
        Axis::AzimuthSpread => {
            out.preset.tx_azimuth_spread = value.to_radians();
            out.preset.rx_azimuth_spread = value.to_radians();
            out.preset.validate()?;
        }
        Axis::ElevationSpread => {
            out.preset.tx_elevation_spread = value.to_radians();
            out.preset.rx_elevation_spread = value.to_radians();
            out.preset.validate()?;
        }
        Axis::SnrDb => {
            if !value.is_finite() {
                return Err(Error::Config(format!("SNR must be finite, got {value}")));
            }
            out.snr_db = value;
        }
        Axis::Spacing => {
            out.preset.element_area = out.preset.element_area.min(value * value);
            out = out.rebuild(cfg.tx_aperture(), cfg.rx_aperture(), value)?;
        }
        Axis::Aperture => {
            out = out.rebuild((value, value), (value, value), cfg.spacing())?;
        }
    }
    Ok(out)
}

/// Memoizes spectra by distribution and aperture; the lattice does not
/// depend on element spacing, so spacing and SNR sweeps reuse them.
#[derive(Debug, Default)]
pub struct SpectrumCache {
    inner: Mutex<HashMap<String, Arc<AngularSpectrum>>>,
}

impl SpectrumCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn spectrum(
        &self,
        dist: &AngleDistribution,
        array: &PlanarArrayConfig,
    ) -> Result<Arc<AngularSpectrum>> {
        let key = format!(
            "{:?}|{:?}|{:?}",
            [
                dist.azimuth_mean,
                dist.azimuth_spread,
                dist.elevation_mean,
                dist.elevation_spread
            ]
            .map(f64::to_bits),
            dist.isotropic,
            [array.len_x(), array.len_y()].map(f64::to_bits)
        );
        if let Some(hit) = self.inner.lock().unwrap().get(&key) {
            return Ok(Arc::clone(hit));
        }
        let spectrum = Arc::new(compute_spectrum(dist, &enumerate_lattice(array))?);
        self.inner
            .lock()
            .unwrap()
            .insert(key, Arc::clone(&spectrum));
        Ok(spectrum)
    }

    pub fn len(&self) -> usize {
        self.inner.lock().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointResult {
    pub estimate: CapacityEstimate,
    pub n_r: usize,
    pub n_s: usize,
    pub upper_bound: f64,
    pub low_snr: f64,
    pub wall_time_s: f64,
}

impl PointResult {
    /// Human-readable summary; contains no timing so it is reproducible.
    pub fn report(&self, cfg: &ScenarioConfig) -> String {
        let e = &self.estimate;
        let mut s = String::new();
        let scheme = match cfg.scheme {
            Scheme::Discrete => "discrete",
            Scheme::Continuous => "continuous",
        };
        let _ = writeln!(
            s,
            "scenario {}  scheme {}  snr {} dB  trials {}  seed {}",
            cfg.preset.name, scheme, cfg.snr_db, e.trials, cfg.seed
        );
        let _ = writeln!(
            s,
            "n_R {}  n_S {}  N_R {}  N_S {}",
            self.n_r,
            self.n_s,
            cfg.rx_array.element_count(),
            cfg.tx_array.element_count()
        );
        let _ = writeln!(
            s,
            "capacity {:.6} ± {:.6} bit/s/Hz",
            e.mean_bits, e.std_error
        );
        let _ = writeln!(s, "upper_bound {:.6} bit/s/Hz", self.upper_bound);
        let _ = writeln!(s, "low_snr {:.6} bit/s/Hz", self.low_snr);
        s
    }
}

/// Seconds since `start`; `wasm32-unknown-unknown` has no clock, so 0 there.
#[cfg(not(all(target_arch = "wasm32", target_os = "unknown")))]
fn stopwatch() -> impl Fn() -> f64 {
    let start = std::time::Instant::now();
    move || start.elapsed().as_secs_f64()
}

#[cfg(all(target_arch = "wasm32", target_os = "unknown"))]
fn stopwatch() -> impl Fn() -> f64 {
    || 0.0
}

/// Full pipeline for one configuration: lattices, spectra, Monte Carlo.
pub fn evaluate(
    cfg: &ScenarioConfig,
    trials: usize,
    seed: u64,
    cache: &SpectrumCache,
) -> Result<PointResult> {
    let elapsed = stopwatch();
    let rx = cache.spectrum(&cfg.rx_distribution()?, &cfg.rx_array)?;
    let tx = cache.spectrum(&cfg.tx_distribution()?, &cfg.tx_array)?;
    let snr = cfg.snr_linear();
    let estimate = match cfg.scheme {
        Scheme::Discrete => {
            capacity_discrete_aperture(&rx, &tx, &cfg.tx_array, &cfg.rx_array, snr, trials, seed)?
        }
        Scheme::Continuous => {
            capacity_continuous_aperture(&rx, &tx, &cfg.tx_array, &cfg.rx_array, snr, trials, seed)?
        }
    };
    let (n_r, n_s) = (rx.len(), tx.len());
    Ok(PointResult {
        upper_bound: upper_bound_for_prefactor(estimate.prefactor, n_r.min(n_s)),
        low_snr: estimate.prefactor / std::f64::consts::LN_2,
        estimate,
        n_r,
        n_s,
        wall_time_s: elapsed(),
    })
}

/// Evaluates `cfg` with its own trial count and seed.
pub fn run_point(cfg: &ScenarioConfig) -> Result<PointResult> {
    evaluate(cfg, cfg.trials, cfg.seed, &SpectrumCache::new())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub config: ScenarioConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub title: String,
    pub axis: Axis,
    pub values: Vec<f64>,
    pub series: Vec<Series>,
    pub trials: usize,
    pub master_seed: u64,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::Config("sweep has no axis values".into()));
        }
        if self.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("sweep values must be finite".into()));
        }
        let up = self.values.windows(2).all(|w| w[0] < w[1]);
        let down = self.values.windows(2).all(|w| w[0] > w[1]);
        if !(up || down) {
            return Err(Error::Config(
                "sweep values must be strictly monotone".into(),
            ));
        }
        if self.series.is_empty() {
            return Err(Error::Config("sweep has no series".into()));
        }
        if self.trials < 2 {
            return Err(Error::Config(format!(
                "need at least 2 trials, got {}",
                self.trials
            )));
        }
        Ok(())
    }
}

/// Seed of sweep point `(series, value)`; independent of evaluation order.
pub fn point_seed(master_seed: u64, series_index: usize, value_index: usize) -> u64 {
    derive_trial_seed(
        derive_trial_seed(master_seed, series_index as u64),
        value_index as u64,
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub series: String,
    pub axis: Axis,
    pub axis_value: f64,
    pub capacity_bits: f64,
    pub std_error: f64,
    pub n_r: usize,
    pub n_s: usize,
    pub wall_time_s: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub title: String,
    pub axis: Axis,
    pub rows: Vec<SweepRow>,
    /// Isotropic bound for each row (not part of the CSV).
    pub upper_bounds: Vec<f64>,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SweepOptions {
    /// Record wall time per point; off by default so output is reproducible.
    pub timing: bool,
}

pub fn run_sweep(spec: &SweepSpec, opts: SweepOptions) -> Result<SweepResult> {
    spec.validate()?;
    let cache = SpectrumCache::new();
    let total = spec.series.len() * spec.values.len();
    let mut rows = Vec::with_capacity(total);
    let mut upper_bounds = Vec::with_capacity(total);
    for (si, series) in spec.series.iter().enumerate() {
        for (vi, &value) in spec.values.iter().enumerate() {
            let cfg = apply_axis(&series.config, spec.axis, value)?;
            let point = evaluate(
                &cfg,
                spec.trials,
                point_seed(spec.master_seed, si, vi),
                &cache,
            )?;
            log::info!(
                "[{}/{}] {} {}={} -> {:.4} ± {:.4} ({:.2} s)",
                rows.len() + 1,
                total,
                series.label,
                spec.axis.name(),
                value,
                point.estimate.mean_bits,
                point.estimate.std_error,
                point.wall_time_s
            );
            rows.push(SweepRow {
                series: series.label.clone(),
                axis: spec.axis,
                axis_value: value,
                capacity_bits: point.estimate.mean_bits,
                std_error: point.estimate.std_error,
                n_r: point.n_r,
                n_s: point.n_s,
                wall_time_s: if opts.timing { point.wall_time_s } else { 0.0 },
            });
            upper_bounds.push(point.upper_bound);
        }
    }
    Ok(SweepResult {
        title: spec.title.clone(),
        axis: spec.axis,
        rows,
        upper_bounds,
    })
}

impl SweepResult {
    pub fn row(&self, series: &str, axis_value: f64) -> Option<&SweepRow> {
        self.rows
            .iter()
            .find(|r| r.series == series && r.axis_value == axis_value)
    }

    /// Series labels in first-appearance order.
    pub fn series_labels(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for r in &self.rows {
            if !out.contains(&r.series) {
                out.push(r.series.clone());
            }
        }
        out
    }
}

// ---- preset sweeps -------------------------------------------------------

pub const FIG4_AZIMUTH_SPREADS: [f64; 10] =
    [10.0, 20.0, 30.0, 40.0, 50.0, 60.0, 70.0, 80.0, 90.0, 100.0];
pub const FIG4_ELEVATION_SPREADS: [f64; 4] = [2.0, 5.0, 10.0, 20.0];
pub const FIG5_SNR_DB: [f64; 11] = [
    -10.0, -5.0, 0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0, 35.0, 40.0,
];
pub const FIG6_SPACINGS: [f64; 7] = [
    1.0 / 2.0,
    1.0 / 3.0,
    1.0 / 4.0,
    1.0 / 6.0,
    1.0 / 8.0,
    1.0 / 12.0,
    1.0 / 16.0,
];

fn scaled(aperture: f64, scale: f64) -> Result<f64> {
    if !(scale.is_finite() && scale > 0.0) {
        return Err(Error::Config(format!(
            "scale must be positive, got {scale}"
        )));
    }
    Ok(aperture * scale)
}

fn base(name: &str, aperture: f64, snr_db: f64) -> Result<ScenarioConfig> {
    let mut cfg = ScenarioConfig::from_preset(name, aperture, 0.25)?;
    cfg.snr_db = snr_db;
    Ok(cfg)
}

fn fmt_len(v: f64) -> String {
    format!("{}λ", (v * 1e6).round() / 1e6)
}

/// Capacity vs azimuth spread for several elevation spreads (same statistics
/// at both ends), UMa carrier and patches, 15λ·scale apertures, λ/4, 30 dB.
pub fn fig4_spec(scale: f64, trials: usize, seed: u64) -> Result<SweepSpec> {
    let cfg = base("UMa", scaled(15.0, scale)?, 30.0)?;
    let series = FIG4_ELEVATION_SPREADS
        .iter()
        .map(|&el| {
            Ok(Series {
                label: format!("elevation spread {el}°"),
                config: apply_axis(&cfg, Axis::ElevationSpread, el)?,
            })
        })
        .collect::<Result<_>>()?;
    Ok(SweepSpec {
        title: format!(
            "Capacity vs azimuth spread ({}, λ/4, 30 dB)",
            fmt_len(scaled(15.0, scale)?)
        ),
        axis: Axis::AzimuthSpread,
        values: FIG4_AZIMUTH_SPREADS.to_vec(),
        series,
        trials,
        master_seed: seed,
    })
}

/// Capacity vs SNR for the three scenarios at 15λ and 30λ (times scale), λ/4.
pub fn fig5_spec(scale: f64, trials: usize, seed: u64) -> Result<SweepSpec> {
    let mut series = Vec::new();
    for aperture in [15.0, 30.0] {
        let len = scaled(aperture, scale)?;
        for name in crate::scenario::PRESET_NAMES {
            series.push(Series {
                label: format!("{name} {}", fmt_len(len)),
                config: base(name, len, 30.0)?,
            });
        }
    }
    Ok(SweepSpec {
        title: "Capacity vs SNR by scenario and aperture (λ/4)".into(),
        axis: Axis::SnrDb,
        values: FIG5_SNR_DB.to_vec(),
        series,
        trials,
        master_seed: seed,
    })
}

/// Capacity vs spacing for the three scenarios, 15λ·scale, discrete scheme,
/// λ/8 patches shrinking to `spacing²` below λ/8, 30 dB.
pub fn fig6_spec(scale: f64, trials: usize, seed: u64) -> Result<SweepSpec> {
    let len = scaled(15.0, scale)?;
    let series = crate::scenario::PRESET_NAMES
        .iter()
        .map(|name| {
            Ok(Series {
                label: name.to_string(),
                config: base(name, len, 30.0)?,
            })
        })
        .collect::<Result<_>>()?;
    Ok(SweepSpec {
        title: format!("Capacity vs antenna spacing ({}, 30 dB)", fmt_len(len)),
        axis: Axis::Spacing,
        values: FIG6_SPACINGS.to_vec(),
        series,
        trials,
        master_seed: seed,
    })
}

// ---- sweep spec files ----------------------------------------------------

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSeries {
    label: String,
    scenario: RawScenario,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    #[serde(default)]
    title: Option<String>,
    axis: Axis,
    values: Vec<f64>,
    series: Vec<RawSeries>,
    #[serde(default)]
    trials: Option<usize>,
    #[serde(default)]
    seed: Option<u64>,
}

/// Parses a JSON sweep specification; each series holds a scenario document.
pub fn parse_sweep_spec(text: &str) -> Result<SweepSpec> {
    let raw: RawSweep = serde_json::from_str(text).map_err(|e| Error::parse("$", e.to_string()))?;
    let series = raw
        .series
        .into_iter()
        .enumerate()
        .map(|(i, s)| {
            let config = s.scenario.resolve().map_err(|e| match e {
                Error::Parse { path, reason } => {
                    Error::parse(format!("series[{i}].scenario.{path}"), reason)
                }
                other => other,
            })?;
            Ok(Series {
                label: s.label,
                config,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let spec = SweepSpec {
        title: raw
            .title
            .unwrap_or_else(|| format!("Capacity vs {}", raw.axis.name())),
        axis: raw.axis,
        values: raw.values,
        series,
        trials: raw.trials.unwrap_or(crate::capacity::DEFAULT_TRIALS),
        master_seed: raw.seed.unwrap_or(crate::scenario::DEFAULT_SEED),
    };
    spec.validate()?;
    Ok(spec)
}

// ---- CSV -----------------------------------------------------------------

pub const CSV_HEADER: &str = "series,axis,axis_value,capacity_bits,std_error,n_r,n_s,wall_time_s";

pub fn csv_string(rows: &[SweepRow]) -> Result<String> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    for r in rows {
        w.serialize(r)
            .map_err(|e| Error::Numeric(format!("CSV encoding failed: {e}")))?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::Numeric(format!("CSV encoding failed: {e}")))?;
    let mut text = String::from_utf8(bytes).expect("CSV is UTF-8");
    if rows.is_empty() {
        text = format!("{CSV_HEADER}\n");
    }
    Ok(text)
}

pub fn emit_csv(result: &SweepResult, path: &Path) -> Result<()> {
    let text = csv_string(&result.rows)?;
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn parse_csv(text: &str) -> Result<Vec<SweepRow>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header = r
        .headers()
        .map_err(|e| Error::parse("csv", e.to_string()))?;
    if header.iter().collect::<Vec<_>>().join(",") != CSV_HEADER {
        return Err(Error::parse("csv", format!("unexpected header {header:?}")));
    }
    r.deserialize()
        .enumerate()
        .map(|(i, row)| row.map_err(|e| Error::parse(format!("csv line {}", i + 2), e.to_string())))
        .collect()
}

// ---- SVG -----------------------------------------------------------------

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn nice_step(span: f64, target: usize) -> f64 {
    let raw = span / target.max(1) as f64;
    let mag = 10f64.powf(raw.log10().floor());
    let norm = raw / mag;
    let m = if norm <= 1.0 {
        1.0
    } else if norm <= 2.0 {
        2.0
    } else if norm <= 5.0 {
        5.0
    } else {
        10.0
    };
    m * mag
}

fn ticks(lo: f64, hi: f64) -> (f64, f64, Vec<f64>) {
    let (lo, hi) = if hi - lo < 1e-12 * lo.abs().max(1.0) {
        (lo - 0.5 * lo.abs().max(1.0), hi + 0.5 * hi.abs().max(1.0))
    } else {
        (lo, hi)
    };
    let step = nice_step(hi - lo, 6);
    let start = (lo / step).floor() * step;
    let end = (hi / step).ceil() * step;
    let n = ((end - start) / step).round() as usize;
    let t = (0..=n).map(|k| start + k as f64 * step).collect();
    (start, end, t)
}

fn tick_label(v: f64) -> String {
    let r = (v * 1e9).round() / 1e9;
    if r == 0.0 {
        "0".into()
    } else {
        format!("{r}")
    }
}

/// Standalone SVG line chart: one polyline per multi-point series, a marker
/// per point, and ±std_error bars.
pub fn svg_string(result: &SweepResult) -> Result<String> {
    if result.rows.is_empty() {
        return Err(Error::Config("cannot plot an empty sweep".into()));
    }
    let (w, h) = (760.0, 500.0);
    let (ml, mr, mt, mb) = (80.0, 200.0, 50.0, 60.0);
    let pw = w - ml - mr;
    let ph = h - mt - mb;

    let xs = result.rows.iter().map(|r| r.axis_value);
    let (xmin, xmax) = xs.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| {
        (a.min(x), b.max(x))
    });
    let (ymin, ymax) = result
        .rows
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), r| {
            (
                a.min(r.capacity_bits - r.std_error),
                b.max(r.capacity_bits + r.std_error),
            )
        });
    let (x0, x1, xt) = ticks(xmin, xmax);
    let (y0, y1, yt) = ticks(ymin.min(0.0), ymax);
    let px = |x: f64| ml + (x - x0) / (x1 - x0) * pw;
    let py = |y: f64| mt + ph - (y - y0) / (y1 - y0) * ph;

    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="28" text-anchor="middle" font-size="15">{}</text>"#,
        ml + pw / 2.0,
        xml_escape(&result.title)
    );
    for &t in &xt {
        let x = px(t);
        let _ = writeln!(
            s,
            r##"<line x1="{x:.2}" y1="{mt}" x2="{x:.2}" y2="{:.2}" stroke="#e5e5e5"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"##,
            mt + ph,
            mt + ph + 18.0,
            tick_label(t)
        );
    }
    for &t in &yt {
        let y = py(t);
        let _ = writeln!(
            s,
            r##"<line x1="{ml}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#e5e5e5"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"##,
            ml + pw,
            ml - 6.0,
            y + 4.0,
            tick_label(t)
        );
    }
    let _ = writeln!(
        s,
        r#"<rect x="{ml}" y="{mt}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        ml + pw / 2.0,
        h - 15.0,
        xml_escape(result.axis.label())
    );
    let _ = writeln!(
        s,
        r#"<text x="20" y="{:.2}" text-anchor="middle" transform="rotate(-90 20 {:.2})">Capacity (bit/s/Hz)</text>"#,
        mt + ph / 2.0,
        mt + ph / 2.0
    );

    for (k, label) in result.series_labels().iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let mut pts: Vec<&SweepRow> = result.rows.iter().filter(|r| &r.series == label).collect();
        pts.sort_by(|a, b| a.axis_value.total_cmp(&b.axis_value));
        let _ = writeln!(
            s,
            r#"<g class="series" data-label="{}">"#,
            xml_escape(label)
        );
        if pts.len() > 1 {
            let coords: Vec<String> = pts
                .iter()
                .map(|r| format!("{:.2},{:.2}", px(r.axis_value), py(r.capacity_bits)))
                .collect();
            let _ = writeln!(
                s,
                r#"<polyline fill="none" stroke="{color}" stroke-width="1.8" points="{}"/>"#,
                coords.join(" ")
            );
        }
        for r in &pts {
            let (x, y) = (px(r.axis_value), py(r.capacity_bits));
            if r.std_error > 0.0 {
                let _ = writeln!(
                    s,
                    r#"<line class="err" x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="{color}"/>"#,
                    py(r.capacity_bits - r.std_error),
                    py(r.capacity_bits + r.std_error)
                );
            }
            let _ = writeln!(
                s,
                r#"<circle cx="{x:.2}" cy="{y:.2}" r="3" fill="{color}"/>"#
            );
        }
        let ly = mt + 10.0 + 20.0 * k as f64;
        let lx = ml + pw + 15.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/><text x="{}" y="{}">{}</text>"#,
            lx + 20.0,
            lx + 26.0,
            ly + 4.0,
            xml_escape(label)
        );
        let _ = writeln!(s, "</g>");
    }
    let _ = writeln!(s, "</svg>");
    Ok(s)
}

pub fn emit_svg(result: &SweepResult, path: &Path) -> Result<()> {
    let text = svg_string(result)?;
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}
