//! WebAssembly bindings for the static demo page in `www/`.
//!
//! Each export is a thin wrapper over a plain Rust function so the numerics
//! can be tested natively.

use holomimo::angular::{compute_spectrum, AngleDistribution};
use holomimo::experiments::{apply_axis, evaluate, Axis, SpectrumCache};
use holomimo::geometry::enumerate_lattice;
use holomimo::scenario::ScenarioConfig;
use wasm_bindgen::prelude::*;

/// `n_theta × n_phi` samples of the angle density, row-major in θ, over
/// θ ∈ [0°, 90°] and φ ∈ [φ₀ − 180°, φ₀ + 180°] (cell midpoints).
pub fn pdf_grid(
    az_mean_deg: f64,
    az_spread_deg: f64,
    el_mean_deg: f64,
    el_spread_deg: f64,
    n_theta: usize,
    n_phi: usize,
) -> Result<Vec<f64>, String> {
    let d = AngleDistribution::wg_tl(
        az_mean_deg.to_radians(),
        az_spread_deg.to_radians(),
        el_mean_deg.to_radians(),
        el_spread_deg.to_radians(),
    )
    .map_err(|e| e.to_string())?;
    let mut out = Vec::with_capacity(n_theta * n_phi);
    for i in 0..n_theta {
        let theta = (i as f64 + 0.5) / n_theta as f64 * std::f64::consts::FRAC_PI_2;
        for j in 0..n_phi {
            let phi = d.azimuth_mean - std::f64::consts::PI
                + (j as f64 + 0.5) / n_phi as f64 * std::f64::consts::TAU;
            out.push(d.pdf(theta, phi).map_err(|e| e.to_string())?);
        }
    }
    Ok(out)
}

/// Normalized spectrum of one link end as `(idx_x, idx_y, variance)` triples.
pub fn spectrum_cells(preset: &str, aperture: f64, receive: bool) -> Result<Vec<f64>, String> {
    let cfg = ScenarioConfig::from_preset(preset, aperture, 0.5).map_err(|e| e.to_string())?;
    let (array, dist) = if receive {
        (&cfg.rx_array, cfg.rx_distribution())
    } else {
        (&cfg.tx_array, cfg.tx_distribution())
    };
    let lattice = enumerate_lattice(array);
    let spectrum =
        compute_spectrum(&dist.map_err(|e| e.to_string())?, &lattice).map_err(|e| e.to_string())?;
    Ok(lattice
        .cells()
        .iter()
        .zip(spectrum.variances())
        .flat_map(|(c, v)| [c.idx_x as f64, c.idx_y as f64, *v])
        .collect())
}

/// `(snr_db, mean, std_error, upper_bound)` quadruples for each SNR.
pub fn capacity_curve(
    preset: &str,
    aperture: f64,
    spacing: f64,
    snr_db: &[f64],
    trials: usize,
    seed: u64,
) -> Result<Vec<f64>, String> {
    let base = ScenarioConfig::from_preset(preset, aperture, 0.25).map_err(|e| e.to_string())?;
    let cfg = apply_axis(&base, Axis::Spacing, spacing).map_err(|e| e.to_string())?;
    let cache = SpectrumCache::new();
    let mut out = Vec::with_capacity(4 * snr_db.len());
    for &snr in snr_db {
        let point = apply_axis(&cfg, Axis::SnrDb, snr)
            .and_then(|c| evaluate(&c, trials, seed, &cache))
            .map_err(|e| e.to_string())?;
        out.extend([
            snr,
            point.estimate.mean_bits,
            point.estimate.std_error,
            point.upper_bound,
        ]);
    }
    Ok(out)
}

#[wasm_bindgen(js_name = anglePdf)]
pub fn angle_pdf(
    az_mean_deg: f64,
    az_spread_deg: f64,
    el_mean_deg: f64,
    el_spread_deg: f64,
    n_theta: usize,
    n_phi: usize,
) -> Result<Vec<f64>, JsError> {
    pdf_grid(
        az_mean_deg,
        az_spread_deg,
        el_mean_deg,
        el_spread_deg,
        n_theta,
        n_phi,
    )
    .map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = wavenumberSpectrum)]
pub fn wavenumber_spectrum(
    preset: &str,
    aperture: f64,
    receive: bool,
) -> Result<Vec<f64>, JsError> {
    spectrum_cells(preset, aperture, receive).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = capacityCurve)]
pub fn capacity_curve_js(
    preset: &str,
    aperture: f64,
    spacing: f64,
    snr_db: Vec<f64>,
    trials: usize,
    seed: u64,
) -> Result<Vec<f64>, JsError> {
    capacity_curve(preset, aperture, spacing, &snr_db, trials, seed).map_err(|e| JsError::new(&e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pdf_grid_integrates_to_one() {
        let (nt, np) = (200, 400);
        let g = pdf_grid(90.0, 30.0, 45.0, 5.0, nt, np).unwrap();
        let cell = (std::f64::consts::FRAC_PI_2 / nt as f64) * (std::f64::consts::TAU / np as f64);
        let total: f64 = g.iter().sum::<f64>() * cell;
        assert!((total - 1.0).abs() < 1e-2, "{total}");
    }

    #[test]
    fn pdf_grid_rejects_bad_spread() {
        assert!(pdf_grid(90.0, 0.0, 45.0, 5.0, 4, 4).is_err());
    }

    #[test]
    fn spectrum_cells_are_normalized_triples() {
        let s = spectrum_cells("UMa", 2.0, true).unwrap();
        assert_eq!(s.len() % 3, 0);
        let total: f64 = s.chunks(3).map(|c| c[2]).sum();
        assert!((total - 1.0).abs() < 1e-9);
        assert!(spectrum_cells("Indoor", 2.0, true).is_err());
    }

    #[test]
    fn capacity_curve_increases_with_snr() {
        let c = capacity_curve("RMa", 2.0, 0.25, &[0.0, 10.0, 20.0], 20, 1).unwrap();
        assert_eq!(c.len(), 12);
        let means: Vec<f64> = c.chunks(4).map(|q| q[1]).collect();
        assert!(means.windows(2).all(|w| w[0] < w[1]));
        assert!(c.chunks(4).all(|q| q[1] <= q[3]));
    }
}
