//! Scenario presets (3GPP LOS angle spreads) and the JSON scenario format.
//!
//! Angles are degrees and frequency is GHz in files; everything is radians
//! and Hz once parsed.

use serde::{Deserialize, Serialize};

use crate::angular::AngleDistribution;
use crate::error::{Error, Result};
use crate::geometry::PlanarArrayConfig;
use crate::util::db_to_linear;

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
pub const PRESET_NAMES: [&str; 3] = ["UMa", "UMi", "RMa"];

pub const DEFAULT_APERTURE: f64 = 15.0;
pub const DEFAULT_SPACING: f64 = 0.25;
pub const DEFAULT_SNR_DB: f64 = 30.0;
pub const DEFAULT_SEED: u64 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioPreset {
    pub name: String,
    pub frequency_hz: f64,
    pub azimuth_mean: f64,
    pub elevation_mean: f64,
    pub tx_azimuth_spread: f64,
    pub tx_elevation_spread: f64,
    pub rx_azimuth_spread: f64,
    pub rx_elevation_spread: f64,
    /// Patch area in λ².
    pub element_area: f64,
    pub aperture_efficiency: f64,
}

impl ScenarioPreset {
    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.frequency_hz
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("frequency_ghz", self.frequency_hz),
            ("tx_spread_az_deg", self.tx_azimuth_spread),
            ("tx_spread_el_deg", self.tx_elevation_spread),
            ("rx_spread_az_deg", self.rx_azimuth_spread),
            ("rx_spread_el_deg", self.rx_elevation_spread),
            ("element_area_wavelengths_sq", self.element_area),
        ];
        for (key, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::parse(
                    key,
                    format!("must be finite and positive, got {v}"),
                ));
            }
        }
        let eta = self.aperture_efficiency;
        if !(eta > 0.0 && eta < 1.0) {
            return Err(Error::parse(
                "aperture_efficiency",
                format!("must lie in (0, 1), got {eta}"),
            ));
        }
        let em = self.elevation_mean;
        if !(0.0..=std::f64::consts::FRAC_PI_2).contains(&em) {
            return Err(Error::parse(
                "elevation_mean_deg",
                format!("must lie in [0, 90], got {}", em.to_degrees()),
            ));
        }
        if !self.azimuth_mean.is_finite() {
            return Err(Error::parse("azimuth_mean_deg", "must be finite"));
        }
        Ok(())
    }

    pub fn tx_distribution(&self) -> Result<AngleDistribution> {
        AngleDistribution::wg_tl(
            self.azimuth_mean,
            self.tx_azimuth_spread,
            self.elevation_mean,
            self.tx_elevation_spread,
        )
    }

    pub fn rx_distribution(&self) -> Result<AngleDistribution> {
        AngleDistribution::wg_tl(
            self.azimuth_mean,
            self.rx_azimuth_spread,
            self.elevation_mean,
            self.rx_elevation_spread,
        )
    }
}

fn table_row(name: &str, tx: (f64, f64), rx: (f64, f64)) -> ScenarioPreset {
    ScenarioPreset {
        name: name.to_owned(),
        frequency_hz: 6e9,
        azimuth_mean: 90f64.to_radians(),
        elevation_mean: 45f64.to_radians(),
        tx_azimuth_spread: tx.0.to_radians(),
        tx_elevation_spread: tx.1.to_radians(),
        rx_azimuth_spread: rx.0.to_radians(),
        rx_elevation_spread: rx.1.to_radians(),
        element_area: 1.0 / 64.0,
        aperture_efficiency: 0.6,
    }
}

/// UMa, UMi or RMa (case-insensitive) LOS parameters.
pub fn builtin_preset(name: &str) -> Result<ScenarioPreset> {
    match name.to_ascii_lowercase().as_str() {
        "uma" => Ok(table_row("UMa", (14.0, 0.3), (65.0, 8.9))),
        "umi" => Ok(table_row("UMi", (14.7, 0.6), (46.0, 4.4))),
        "rma" => Ok(table_row("RMa", (7.9, 0.1), (33.0, 3.0))),
        _ => Err(Error::UnknownPreset {
            name: name.to_owned(),
            valid: PRESET_NAMES.join(", "),
        }),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    /// Fixed patch area per element.
    #[default]
    Discrete,
    /// Aperture tiled by the elements; area per element `L_x L_y / N`.
    Continuous,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistributionKind {
    #[default]
    WgTl,
    /// Uniform over the hemisphere at both ends.
    Isotropic,
}

/// A fully resolved scenario: angle statistics, both arrays and the link.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub preset: ScenarioPreset,
    pub distribution: DistributionKind,
    pub scheme: Scheme,
    pub tx_array: PlanarArrayConfig,
    pub rx_array: PlanarArrayConfig,
    pub snr_db: f64,
    pub trials: usize,
    pub seed: u64,
}

/// Square aperture side lengths `(x, y)` in λ.
pub type Aperture = (f64, f64);

impl ScenarioConfig {
    pub fn new(
        preset: ScenarioPreset,
        scheme: Scheme,
        tx_aperture: Aperture,
        rx_aperture: Aperture,
        spacing: f64,
    ) -> Result<Self> {
        preset.validate()?;
        let tx_array = build_array(&preset, scheme, tx_aperture, spacing, "tx")?;
        let rx_array = build_array(&preset, scheme, rx_aperture, spacing, "rx")?;
        Ok(Self {
            preset,
            distribution: DistributionKind::WgTl,
            scheme,
            tx_array,
            rx_array,
            snr_db: DEFAULT_SNR_DB,
            trials: crate::capacity::DEFAULT_TRIALS,
            seed: DEFAULT_SEED,
        })
    }

    /// Preset with square `aperture`-λ arrays at both ends.
    pub fn from_preset(name: &str, aperture: f64, spacing: f64) -> Result<Self> {
        Self::new(
            builtin_preset(name)?,
            Scheme::Discrete,
            (aperture, aperture),
            (aperture, aperture),
            spacing,
        )
    }

    /// Rebuilds both arrays after the preset, scheme or geometry changed.
    pub fn rebuild(
        &self,
        tx_aperture: Aperture,
        rx_aperture: Aperture,
        spacing: f64,
    ) -> Result<Self> {
        let mut next = Self::new(
            self.preset.clone(),
            self.scheme,
            tx_aperture,
            rx_aperture,
            spacing,
        )?;
        next.distribution = self.distribution;
        next.snr_db = self.snr_db;
        next.trials = self.trials;
        next.seed = self.seed;
        Ok(next)
    }

    pub fn spacing(&self) -> f64 {
        self.tx_array.spacing()
    }

    pub fn tx_aperture(&self) -> Aperture {
        (self.tx_array.len_x(), self.tx_array.len_y())
    }

    pub fn rx_aperture(&self) -> Aperture {
        (self.rx_array.len_x(), self.rx_array.len_y())
    }

    pub fn snr_linear(&self) -> f64 {
        db_to_linear(self.snr_db)
    }

    pub fn tx_distribution(&self) -> Result<AngleDistribution> {
        match self.distribution {
            DistributionKind::Isotropic => Ok(AngleDistribution::isotropic()),
            DistributionKind::WgTl => self.preset.tx_distribution(),
        }
    }

    pub fn rx_distribution(&self) -> Result<AngleDistribution> {
        match self.distribution {
            DistributionKind::Isotropic => Ok(AngleDistribution::isotropic()),
            DistributionKind::WgTl => self.preset.rx_distribution(),
        }
    }

    pub fn to_json(&self) -> String {
        let raw = RawScenario::from_config(self);
        serde_json::to_string_pretty(&raw).expect("scenario serializes")
    }

    pub fn to_value(&self) -> serde_json::Value {
        serde_json::to_value(RawScenario::from_config(self)).expect("scenario serializes")
    }
}

fn build_array(
    preset: &ScenarioPreset,
    scheme: Scheme,
    (len_x, len_y): Aperture,
    spacing: f64,
    side: &str,
) -> Result<PlanarArrayConfig> {
    let wavelength = preset.wavelength();
    let eta = preset.aperture_efficiency;
    let area = match scheme {
        Scheme::Discrete => preset.element_area,
        // Gains come from the aperture itself; the per-element area only
        // needs to be a valid non-overlapping patch.
        Scheme::Continuous => spacing * spacing,
    };
    PlanarArrayConfig::new(len_x, len_y, spacing, area, eta, wavelength)
        .map_err(|e| Error::parse(format!("{side} array"), e.to_string()))
}

/// On-disk form. Every key is optional so presets can be partially overridden.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawScenario {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distribution: Option<DistributionKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frequency_ghz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub azimuth_mean_deg: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub elevation_mean_deg: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tx_spread_az_deg: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tx_spread_el_deg: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rx_spread_az_deg: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rx_spread_el_deg: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub aperture_wavelengths: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub aperture_x_wavelengths: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub aperture_y_wavelengths: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tx_aperture_wavelengths: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tx_aperture_x_wavelengths: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tx_aperture_y_wavelengths: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rx_aperture_wavelengths: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rx_aperture_x_wavelengths: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rx_aperture_y_wavelengths: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spacing_wavelengths: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub element_area_wavelengths_sq: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub aperture_efficiency: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scheme: Option<Scheme>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snr_db: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

/// The degree value whose conversion gives back exactly `rad`, preferring
/// the shortest decimal form (so presets print as 65, not 65.00000000000001).
pub fn degrees_exact(rad: f64) -> f64 {
    shortest_preimage(rad.to_degrees(), |d| d.to_radians() == rad)
}

fn ghz_exact(hz: f64) -> f64 {
    shortest_preimage(hz / 1e9, |g| g * 1e9 == hz)
}

fn shortest_preimage(guess: f64, ok: impl Fn(f64) -> bool) -> f64 {
    for digits in 1..=17 {
        if let Ok(c) = format!("{:.*e}", digits - 1, guess).parse::<f64>() {
            if ok(c) {
                return c;
            }
        }
    }
    let (mut up, mut down) = (guess, guess);
    for _ in 0..16 {
        up = up.next_up();
        down = down.next_down();
        if ok(up) {
            return up;
        }
        if ok(down) {
            return down;
        }
    }
    guess
}

impl RawScenario {
    pub fn from_config(cfg: &ScenarioConfig) -> Self {
        let p = &cfg.preset;
        let is_builtin = builtin_preset(&p.name).is_ok_and(|b| b.name == p.name);
        Self {
            preset: is_builtin.then(|| p.name.clone()),
            distribution: Some(cfg.distribution),
            frequency_ghz: Some(ghz_exact(p.frequency_hz)),
            azimuth_mean_deg: Some(degrees_exact(p.azimuth_mean)),
            elevation_mean_deg: Some(degrees_exact(p.elevation_mean)),
            tx_spread_az_deg: Some(degrees_exact(p.tx_azimuth_spread)),
            tx_spread_el_deg: Some(degrees_exact(p.tx_elevation_spread)),
            rx_spread_az_deg: Some(degrees_exact(p.rx_azimuth_spread)),
            rx_spread_el_deg: Some(degrees_exact(p.rx_elevation_spread)),
            tx_aperture_x_wavelengths: Some(cfg.tx_array.len_x()),
            tx_aperture_y_wavelengths: Some(cfg.tx_array.len_y()),
            rx_aperture_x_wavelengths: Some(cfg.rx_array.len_x()),
            rx_aperture_y_wavelengths: Some(cfg.rx_array.len_y()),
            spacing_wavelengths: Some(cfg.spacing()),
            element_area_wavelengths_sq: Some(p.element_area),
            aperture_efficiency: Some(p.aperture_efficiency),
            scheme: Some(cfg.scheme),
            snr_db: Some(cfg.snr_db),
            trials: Some(cfg.trials),
            seed: Some(cfg.seed),
            ..Self::default()
        }
    }

    pub fn resolve(&self) -> Result<ScenarioConfig> {
        let base = match &self.preset {
            Some(name) => {
                Some(builtin_preset(name).map_err(|e| Error::parse("preset", e.to_string()))?)
            }
            None => None,
        };
        let required = |key: &str, v: Option<f64>, fallback: Option<f64>| -> Result<f64> {
            v.or(fallback).ok_or_else(|| {
                Error::parse(key, "missing; give a `preset` or the full parameter set")
            })
        };
        let deg = |v: Option<f64>| v.map(f64::to_radians);
        let b = base.as_ref();
        let preset = ScenarioPreset {
            name: match b {
                Some(p) => p.name.clone(),
                None => "custom".to_owned(),
            },
            frequency_hz: required(
                "frequency_ghz",
                self.frequency_ghz.map(|g| g * 1e9),
                b.map(|p| p.frequency_hz),
            )?,
            azimuth_mean: required(
                "azimuth_mean_deg",
                deg(self.azimuth_mean_deg),
                b.map(|p| p.azimuth_mean),
            )?,
            elevation_mean: required(
                "elevation_mean_deg",
                deg(self.elevation_mean_deg),
                b.map(|p| p.elevation_mean),
            )?,
            tx_azimuth_spread: required(
                "tx_spread_az_deg",
                deg(self.tx_spread_az_deg),
                b.map(|p| p.tx_azimuth_spread),
            )?,
            tx_elevation_spread: required(
                "tx_spread_el_deg",
                deg(self.tx_spread_el_deg),
                b.map(|p| p.tx_elevation_spread),
            )?,
            rx_azimuth_spread: required(
                "rx_spread_az_deg",
                deg(self.rx_spread_az_deg),
                b.map(|p| p.rx_azimuth_spread),
            )?,
            rx_elevation_spread: required(
                "rx_spread_el_deg",
                deg(self.rx_spread_el_deg),
                b.map(|p| p.rx_elevation_spread),
            )?,
            element_area: required(
                "element_area_wavelengths_sq",
                self.element_area_wavelengths_sq,
                b.map(|p| p.element_area),
            )?,
            aperture_efficiency: required(
                "aperture_efficiency",
                self.aperture_efficiency,
                b.map(|p| p.aperture_efficiency),
            )?,
        };
        preset.validate()?;

        let side = |x: Option<f64>, xy: Option<f64>, gx: Option<f64>| {
            x.or(xy)
                .or(gx)
                .or(self.aperture_wavelengths)
                .unwrap_or(DEFAULT_APERTURE)
        };
        let tx = (
            side(
                self.tx_aperture_x_wavelengths,
                self.tx_aperture_wavelengths,
                self.aperture_x_wavelengths,
            ),
            side(
                self.tx_aperture_y_wavelengths,
                self.tx_aperture_wavelengths,
                self.aperture_y_wavelengths,
            ),
        );
        let rx = (
            side(
                self.rx_aperture_x_wavelengths,
                self.rx_aperture_wavelengths,
                self.aperture_x_wavelengths,
            ),
            side(
                self.rx_aperture_y_wavelengths,
                self.rx_aperture_wavelengths,
                self.aperture_y_wavelengths,
            ),
        );
        let spacing = self.spacing_wavelengths.unwrap_or(DEFAULT_SPACING);
        if !(spacing.is_finite() && spacing > 0.0) {
            return Err(Error::parse(
                "spacing_wavelengths",
                format!("must be positive, got {spacing}"),
            ));
        }
        let snr_db = self.snr_db.unwrap_or(DEFAULT_SNR_DB);
        if !snr_db.is_finite() {
            return Err(Error::parse("snr_db", "must be finite"));
        }
        let trials = self.trials.unwrap_or(crate::capacity::DEFAULT_TRIALS);
        if trials < 2 {
            return Err(Error::parse(
                "trials",
                format!("need at least 2, got {trials}"),
            ));
        }
        let mut cfg =
            ScenarioConfig::new(preset, self.scheme.unwrap_or_default(), tx, rx, spacing)?;
        cfg.distribution = self.distribution.unwrap_or_default();
        cfg.snr_db = snr_db;
        cfg.trials = trials;
        cfg.seed = self.seed.unwrap_or(DEFAULT_SEED);
        Ok(cfg)
    }
}

/// Parses and validates a JSON scenario document.
pub fn parse_scenario(text: &str) -> Result<ScenarioConfig> {
    let raw: RawScenario =
        serde_json::from_str(text).map_err(|e| Error::parse("$", e.to_string()))?;
    raw.resolve()
}

pub fn load_scenario(path: &std::path::Path) -> Result<ScenarioConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_scenario(&text).map_err(|e| match e {
        Error::Parse { path: key, reason } => {
            Error::parse(format!("{}: {key}", path.display()), reason)
        }
        other => other,
    })
}
