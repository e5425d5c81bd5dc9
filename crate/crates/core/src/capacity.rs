//! Ergodic capacity of the wavenumber-domain channel.
//!
//! With semi-unitary Fourier bases the spatial channel is equivalent to
//! `y_a = √ρ' · H_a x_a + n_a` with `ρ' = ρ G_t G_r N_S N_R / n_S`, so the
//! capacity without transmit CSI is `E{Σ_i log2(1 + ρ' λ_i(H_a H_aᴴ))}`.

use std::f64::consts::{LN_2, PI};

use faer::{c64, Mat, MatRef, Side};
use serde::{Deserialize, Serialize};

use crate::angular::AngularSpectrum;
use crate::channel::{derive_trial_seed, sample_block};
use crate::error::{Error, Result};
use crate::geometry::PlanarArrayConfig;
use crate::util::{compensated_sum, try_map_indexed};

pub const DEFAULT_TRIALS: usize = 200;

/// Largest capacity bias (bit/s/Hz) accepted from skipping near-empty modes.
const PRUNE_BIAS_BITS: f64 = 1e-6;
/// Never skip more than this much spectrum mass per side.
const PRUNE_MAX_MASS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkBudget {
    /// Linear SNR ρ.
    pub snr: f64,
    pub gain_tx: f64,
    pub gain_rx: f64,
    pub n_tx_elements: usize,
    pub n_rx_elements: usize,
    /// Transmit lattice cardinality n_S used in the power split.
    pub n_tx_modes: usize,
}

impl LinkBudget {
    pub fn new(
        snr: f64,
        gain_tx: f64,
        gain_rx: f64,
        n_tx_elements: usize,
        n_rx_elements: usize,
        n_tx_modes: usize,
    ) -> Result<Self> {
        if !(snr.is_finite() && snr >= 0.0) {
            return Err(Error::Config(format!(
                "snr must be finite and non-negative, got {snr}"
            )));
        }
        if !(gain_tx > 0.0 && gain_rx > 0.0 && gain_tx.is_finite() && gain_rx.is_finite()) {
            return Err(Error::Config(format!(
                "gains must be positive, got {gain_tx}, {gain_rx}"
            )));
        }
        if n_tx_elements == 0 || n_rx_elements == 0 || n_tx_modes == 0 {
            return Err(Error::Config(
                "element and mode counts must be at least 1".into(),
            ));
        }
        Ok(Self {
            snr,
            gain_tx,
            gain_rx,
            n_tx_elements,
            n_rx_elements,
            n_tx_modes,
        })
    }

    /// `ρ G_t G_r N_S N_R / n_S`.
    pub fn prefactor(&self) -> f64 {
        self.snr
            * self.gain_tx
            * self.gain_rx
            * self.n_tx_elements as f64
            * self.n_rx_elements as f64
            / self.n_tx_modes as f64
    }

    pub fn with_snr(&self, snr: f64) -> Self {
        Self { snr, ..*self }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapacityEstimate {
    pub mean_bits: f64,
    pub std_error: f64,
    pub trials: usize,
    /// Trial-averaged eigenvalues of `H_a H_aᴴ`, descending.
    pub eigen_summary: Vec<f64>,
    pub budget: LinkBudget,
    /// Effective SNR multiplying the eigenvalues.
    pub prefactor: f64,
    /// Per-trial capacities in trial order.
    pub samples: Vec<f64>,
}

/// Eigenvalues of a Hermitian matrix, descending. Round-off negatives are
/// clamped to zero; clearly negative eigenvalues are an error.
pub fn hermitian_eigenvalues(gram: MatRef<'_, c64>) -> Result<Vec<f64>> {
    let n = gram.nrows();
    if gram.ncols() != n {
        return Err(Error::Contract(format!(
            "matrix is {}×{}, not square",
            n,
            gram.ncols()
        )));
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut scale = 0.0_f64;
    let mut asym = 0.0_f64;
    for j in 0..n {
        for i in 0..=j {
            let a = gram[(i, j)];
            let b = gram[(j, i)].conj();
            scale = scale.max(a.norm());
            asym = asym.max((a - b).norm());
        }
    }
    if asym > 1e-10 * scale.max(1.0) {
        return Err(Error::Contract(format!(
            "matrix is not Hermitian (asymmetry {asym:e})"
        )));
    }
    let mut values = gram
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::Numeric(format!("eigenvalue iteration failed: {e:?}")))?;
    values.reverse();
    let norm = values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    for v in values.iter_mut() {
        if *v < 0.0 {
            if *v < -1e-10 * norm {
                return Err(Error::Numeric(format!(
                    "eigenvalue {v:e} is negative for a Gram matrix of norm {norm:e}"
                )));
            }
            *v = 0.0;
        }
    }
    Ok(values)
}

/// Eigenvalues of `H Hᴴ`, formed on the smaller Gram side.
pub fn gram_eigenvalues(h: MatRef<'_, c64>) -> Result<Vec<f64>> {
    let gram = if h.ncols() < h.nrows() {
        h.adjoint() * h
    } else {
        h * h.adjoint()
    };
    hermitian_eigenvalues(gram.as_ref())
}

/// `Σ_i log2(1 + ρ' λ_i)`.
pub fn log_det_bits(prefactor: f64, eigenvalues: &[f64]) -> f64 {
    compensated_sum(eigenvalues.iter().map(|l| (prefactor * l).ln_1p() / LN_2))
}

/// Indices kept after dropping the lightest modes whose combined variance
/// is below `max_mass`. Zero-variance modes are always dropped.
fn significant_modes(variances: &[f64], max_mass: f64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..variances.len()).collect();
    order.sort_by(|&a, &b| variances[a].total_cmp(&variances[b]).then(a.cmp(&b)));
    let mut dropped = 0.0;
    let mut keep = vec![false; variances.len()];
    for &i in &order {
        let v = variances[i];
        if v > 0.0 && dropped + v > max_mass {
            keep[i] = true;
        } else {
            dropped += v;
        }
    }
    (0..variances.len()).filter(|&i| keep[i]).collect()
}

/// Upper bound on the dropped mass per side such that the capacity bias
/// (at most `ρ' · dropped / ln 2` per side) stays below [`PRUNE_BIAS_BITS`].
fn prune_mass(prefactor: f64) -> f64 {
    if prefactor <= 0.0 {
        return PRUNE_MAX_MASS;
    }
    PRUNE_MAX_MASS.min(0.5 * PRUNE_BIAS_BITS * LN_2 / prefactor)
}

fn check_spectra(rx: &AngularSpectrum, tx: &AngularSpectrum) -> Result<()> {
    for (s, side) in [(rx, "receive"), (tx, "transmit")] {
        if !s.is_normalized() {
            return Err(Error::Contract(format!(
                "{side} spectrum is not normalized"
            )));
        }
        if s.is_empty() {
            return Err(Error::Contract(format!("{side} spectrum is empty")));
        }
    }
    Ok(())
}

/// Monte Carlo ergodic capacity; trial `t` uses `derive_trial_seed(master_seed, t)`.
pub fn ergodic_capacity(
    rx: &AngularSpectrum,
    tx: &AngularSpectrum,
    budget: &LinkBudget,
    trials: usize,
    master_seed: u64,
) -> Result<CapacityEstimate> {
    capacity_with_prefactor(rx, tx, budget, budget.prefactor(), trials, master_seed)
}

fn capacity_with_prefactor(
    rx: &AngularSpectrum,
    tx: &AngularSpectrum,
    budget: &LinkBudget,
    prefactor: f64,
    trials: usize,
    master_seed: u64,
) -> Result<CapacityEstimate> {
    if trials < 2 {
        return Err(Error::Contract(format!(
            "need at least 2 trials, got {trials}"
        )));
    }
    check_spectra(rx, tx)?;
    let max_mass = prune_mass(prefactor);
    let rows = significant_modes(rx.variances(), max_mass);
    let cols = significant_modes(tx.variances(), max_mass);
    let rx_std = rx.std_devs();
    let tx_std = tx.std_devs();
    let modes = rx.len().min(tx.len());

    let per_trial = try_map_indexed(trials, |t| -> Result<(f64, Vec<f64>)> {
        let seed = derive_trial_seed(master_seed, t as u64);
        let block = sample_block(&rx_std, &tx_std, &rows, &cols, seed);
        let eig = gram_eigenvalues(block.as_ref())?;
        Ok((log_det_bits(prefactor, &eig), eig))
    })?;

    let samples: Vec<f64> = per_trial.iter().map(|(c, _)| *c).collect();
    let mean = compensated_sum(samples.iter().copied()) / trials as f64;
    let var =
        compensated_sum(samples.iter().map(|c| (c - mean) * (c - mean))) / (trials - 1) as f64;
    let eigen_summary: Vec<f64> = (0..modes)
        .map(|k| {
            let col = per_trial
                .iter()
                .map(|(_, e)| e.get(k).copied().unwrap_or(0.0));
            compensated_sum(col) / trials as f64
        })
        .collect();
    if !mean.is_finite() || !var.is_finite() {
        return Err(Error::Numeric(format!(
            "capacity estimate is not finite ({mean}, {var})"
        )));
    }
    Ok(CapacityEstimate {
        mean_bits: mean,
        std_error: (var / trials as f64).sqrt(),
        trials,
        eigen_summary,
        budget: *budget,
        prefactor,
        samples,
    })
}

/// Isotropic-scattering bound `n_M log2(1 + ρ' / n_M)`, `n_M = min(n_S, n_R)`.
pub fn capacity_upper_bound(budget: &LinkBudget, n_rx_modes: usize) -> f64 {
    upper_bound_for_prefactor(budget.prefactor(), budget.n_tx_modes.min(n_rx_modes))
}

/// `n_M log2(1 + ρ' / n_M)` for an already computed `ρ'`.
pub fn upper_bound_for_prefactor(prefactor: f64, n_m: usize) -> f64 {
    let n_m = n_m.max(1) as f64;
    n_m * (prefactor / n_m).ln_1p() / LN_2
}

/// First-order low-SNR capacity `ρ' / ln 2` (the expected trace is 1).
pub fn capacity_low_snr(budget: &LinkBudget) -> f64 {
    budget.prefactor() / LN_2
}

/// Patch gain `4πηS/λ²` with `S` in λ².
pub fn antenna_gain(element_area: f64, efficiency: f64) -> f64 {
    4.0 * PI * efficiency * element_area
}

/// Budget with per-element gains from each array's fixed element area.
pub fn discrete_budget(
    tx_array: &PlanarArrayConfig,
    rx_array: &PlanarArrayConfig,
    n_tx_modes: usize,
    snr: f64,
) -> Result<LinkBudget> {
    LinkBudget::new(
        snr,
        antenna_gain(tx_array.element_area(), tx_array.aperture_efficiency()),
        antenna_gain(rx_array.element_area(), rx_array.aperture_efficiency()),
        tx_array.element_count(),
        rx_array.element_count(),
        n_tx_modes,
    )
}

/// Budget with element areas `L_x L_y / N`, i.e. the aperture fully tiled.
pub fn continuous_budget(
    tx_array: &PlanarArrayConfig,
    rx_array: &PlanarArrayConfig,
    n_tx_modes: usize,
    snr: f64,
) -> Result<LinkBudget> {
    let tile = |a: &PlanarArrayConfig| a.aperture_area() / a.element_count() as f64;
    LinkBudget::new(
        snr,
        antenna_gain(tile(tx_array), tx_array.aperture_efficiency()),
        antenna_gain(tile(rx_array), rx_array.aperture_efficiency()),
        tx_array.element_count(),
        rx_array.element_count(),
        n_tx_modes,
    )
}

/// `16π² ρ η_t η_r L_{S,x} L_{S,y} L_{R,x} L_{R,y} / n_S`, free of element counts.
pub fn continuous_prefactor(
    tx_array: &PlanarArrayConfig,
    rx_array: &PlanarArrayConfig,
    n_tx_modes: usize,
    snr: f64,
) -> f64 {
    16.0 * PI
        * PI
        * snr
        * tx_array.aperture_efficiency()
        * rx_array.aperture_efficiency()
        * tx_array.aperture_area()
        * rx_array.aperture_area()
        / n_tx_modes as f64
}

/// Capacity with fixed-size patches; `n_S` is the transmit spectrum length.
pub fn capacity_discrete_aperture(
    rx: &AngularSpectrum,
    tx: &AngularSpectrum,
    tx_array: &PlanarArrayConfig,
    rx_array: &PlanarArrayConfig,
    snr: f64,
    trials: usize,
    seed: u64,
) -> Result<CapacityEstimate> {
    let budget = discrete_budget(tx_array, rx_array, tx.len(), snr)?;
    ergodic_capacity(rx, tx, &budget, trials, seed)
}

/// Capacity with the aperture tiled by the elements; independent of `N`.
pub fn capacity_continuous_aperture(
    rx: &AngularSpectrum,
    tx: &AngularSpectrum,
    tx_array: &PlanarArrayConfig,
    rx_array: &PlanarArrayConfig,
    snr: f64,
    trials: usize,
    seed: u64,
) -> Result<CapacityEstimate> {
    let budget = continuous_budget(tx_array, rx_array, tx.len(), snr)?;
    let prefactor = continuous_prefactor(tx_array, rx_array, tx.len(), snr);
    capacity_with_prefactor(rx, tx, &budget, prefactor, trials, seed)
}

/// Eigenvalues of `H_a H_aᴴ` for one full, unpruned realization.
pub fn realization_eigenvalues(h: &Mat<c64>) -> Result<Vec<f64>> {
    gram_eigenvalues(h.as_ref())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::sample_angular_channel;

    fn unit() -> AngularSpectrum {
        AngularSpectrum::from_variances(vec![1.0], "unit").unwrap()
    }

    fn budget(snr: f64) -> LinkBudget {
        LinkBudget::new(snr, 1.0, 1.0, 16, 16, 4).unwrap()
    }

    #[test]
    fn identity_and_diagonal_eigenvalues() {
        let id = Mat::<c64>::identity(3, 3);
        assert_eq!(
            hermitian_eigenvalues(id.as_ref()).unwrap(),
            vec![1.0, 1.0, 1.0]
        );
        let d = Mat::<c64>::from_fn(2, 2, |i, j| {
            if i == j {
                c64::new([1.0, 4.0][i], 0.0)
            } else {
                c64::new(0.0, 0.0)
            }
        });
        let ev = hermitian_eigenvalues(d.as_ref()).unwrap();
        assert!((ev[0] - 4.0).abs() < 1e-14 && (ev[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn non_hermitian_is_rejected() {
        let m = Mat::<c64>::from_fn(2, 2, |i, j| c64::new((i + 2 * j) as f64, 0.0));
        assert!(matches!(
            hermitian_eigenvalues(m.as_ref()),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn negative_definite_is_a_numeric_error() {
        let m = Mat::<c64>::from_fn(2, 2, |i, j| c64::new(if i == j { -1.0 } else { 0.0 }, 0.0));
        assert!(matches!(
            hermitian_eigenvalues(m.as_ref()),
            Err(Error::Numeric(_))
        ));
    }

    #[test]
    fn upper_bound_arithmetic() {
        // ρ' = 16·16/4 = 64, n_M = 4 → 4·log2(17).
        let b = budget(1.0);
        assert!((capacity_upper_bound(&b, 4) - 4.0 * 17f64.log2()).abs() < 1e-12);
        assert!((capacity_upper_bound(&b, 4) - 16.35).abs() < 0.01);
        // n_M = 1 reduces to a single log term.
        assert!((capacity_upper_bound(&b, 1) - 65f64.log2()).abs() < 1e-12);
    }

    #[test]
    fn low_snr_arithmetic_and_linearity() {
        let b = budget(1e-3);
        assert!((capacity_low_snr(&b) - 0.0923).abs() < 1e-4);
        let b2 = b.with_snr(2e-3);
        assert_eq!(capacity_low_snr(&b2), 2.0 * capacity_low_snr(&b));
        // Upper bound approaches the low-SNR form as ρ → 0.
        let tiny = budget(1e-9);
        let ratio = capacity_upper_bound(&tiny, 4) / capacity_low_snr(&tiny);
        assert!((ratio - 1.0).abs() < 1e-6);
    }

    #[test]
    fn antenna_gain_values() {
        assert!((antenna_gain(1.0 / 64.0, 0.6) - 0.1178).abs() < 1e-4);
        let g = antenna_gain(1.0 / (4.0 * PI), 1.0);
        assert!((g - 1.0).abs() < 1e-15);
        assert_eq!(antenna_gain(0.2, 0.5), 2.0 * antenna_gain(0.1, 0.5));
        assert_eq!(antenna_gain(0.1, 0.6), 2.0 * antenna_gain(0.1, 0.3));
    }

    #[test]
    fn zero_snr_gives_zero_capacity() {
        let est = ergodic_capacity(&unit(), &unit(), &budget(0.0), 10, 1).unwrap();
        assert_eq!(est.mean_bits, 0.0);
        assert_eq!(est.std_error, 0.0);
    }

    #[test]
    fn single_trial_is_rejected() {
        assert!(matches!(
            ergodic_capacity(&unit(), &unit(), &budget(1.0), 1, 1),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn deterministic_given_seed() {
        let s = AngularSpectrum::from_variances(vec![0.5, 0.3, 0.2], "s").unwrap();
        let a = ergodic_capacity(&s, &s, &budget(10.0), 50, 99).unwrap();
        let b = ergodic_capacity(&s, &s, &budget(10.0), 50, 99).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn eigenvalues_sum_to_trace_and_scale_quadratically() {
        let s = AngularSpectrum::from_variances(vec![0.4, 0.3, 0.2, 0.1], "s").unwrap();
        let t = AngularSpectrum::from_variances(vec![0.7, 0.2, 0.1], "t").unwrap();
        for seed in 0..10 {
            let h = sample_angular_channel(&s, &t, seed).unwrap().matrix;
            let ev = realization_eigenvalues(&h).unwrap();
            let trace: f64 = h
                .col_iter()
                .flat_map(|c| c.iter().map(|z| z.norm_sqr()).collect::<Vec<_>>())
                .sum();
            assert!((ev.iter().sum::<f64>() - trace).abs() < 1e-9);
            assert!(ev.windows(2).all(|w| w[0] >= w[1]));
            let scaled = Mat::<c64>::from_fn(h.nrows(), h.ncols(), |i, j| h[(i, j)] * 3.0);
            let ev3 = realization_eigenvalues(&scaled).unwrap();
            for (a, b) in ev.iter().zip(&ev3) {
                assert!((9.0 * a - b).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn pruning_keeps_heavy_modes() {
        let v = [0.5, 1e-14, 0.3, 0.0, 2e-13, 0.2];
        assert_eq!(significant_modes(&v, 1e-12), vec![0, 2, 5]);
        assert_eq!(significant_modes(&v, 1e-13), vec![0, 2, 4, 5]);
    }

    #[test]
    fn capacity_increases_with_snr() {
        let s = AngularSpectrum::from_variances(vec![0.4, 0.3, 0.2, 0.1], "s").unwrap();
        let mut last = -1.0;
        for snr in [0.1, 1.0, 10.0, 100.0] {
            let c = ergodic_capacity(&s, &s, &budget(snr), 100, 5)
                .unwrap()
                .mean_bits;
            assert!(c > last);
            last = c;
        }
    }

    #[test]
    fn continuous_prefactor_matches_tiled_gains() {
        let tx = PlanarArrayConfig::square(4.0, 0.25, 1.0 / 64.0, 0.6, 0.05).unwrap();
        let rx = PlanarArrayConfig::square(3.0, 0.125, 1.0 / 64.0, 0.5, 0.05).unwrap();
        let b = continuous_budget(&tx, &rx, 70, 2.0).unwrap();
        let direct = continuous_prefactor(&tx, &rx, 70, 2.0);
        assert!(((b.prefactor() - direct) / direct).abs() < 1e-12);
    }
}
