//! Sampling of the angular random matrix and synthesis of the spatial channel.
//!
//! `W` is drawn from a counter-addressable stream: entry `(i, j)` of a
//! realization with seed `s` always comes from ChaCha8 keyed by `s`, stream
//! `i`, word offset `4j`. Any sub-block of `W` can therefore be drawn
//! without generating the rest, and trials never share RNG state.

use std::f64::consts::TAU;

use faer::{c64, Mat};
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::angular::AngularSpectrum;
use crate::error::{Error, Result};
use crate::geometry::FourierBasis;

/// u32 words consumed per complex entry (two u64 draws).
const WORDS_PER_ENTRY: u128 = 4;

/// `n_R × n_S` angular random matrix `diag(σ_R) · W · diag(σ_S)`.
#[derive(Debug, Clone)]
pub struct AngularChannel {
    pub matrix: Mat<c64>,
    pub rx_spectrum_ref: String,
    pub tx_spectrum_ref: String,
    pub seed: u64,
}

/// `N_R × N_S` spatial-domain channel.
#[derive(Debug, Clone)]
pub struct SpatialChannel {
    pub matrix: Mat<c64>,
    pub seed: u64,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of trial `trial_index` under `master_seed`. Both mixing steps are
/// bijections on u64, so distinct indices never collide for a fixed master.
pub fn derive_trial_seed(master_seed: u64, trial_index: u64) -> u64 {
    splitmix64(master_seed ^ splitmix64(trial_index ^ 0x6a09_e667_f3bc_c908))
}

fn unit_open(bits: u64) -> f64 {
    // (0, 1]
    ((bits >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Unit-variance circularly-symmetric complex Gaussian (Box–Muller).
fn complex_gaussian(rng: &mut ChaCha8Rng) -> c64 {
    let u1 = unit_open(rng.next_u64());
    let u2 = unit_open(rng.next_u64());
    c64::from_polar((-u1.ln()).sqrt(), TAU * u2)
}

/// Draws the block of `W` at `rows × cols` (indices ascending).
pub fn gaussian_block(seed: u64, rows: &[usize], cols: &[usize]) -> Mat<c64> {
    let mut out = Mat::<c64>::zeros(rows.len(), cols.len());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for (r, &i) in rows.iter().enumerate() {
        rng.set_stream(i as u64);
        let mut next_col = usize::MAX;
        for (c, &j) in cols.iter().enumerate() {
            if j != next_col {
                rng.set_word_pos(WORDS_PER_ENTRY * j as u128);
            }
            out[(r, c)] = complex_gaussian(&mut rng);
            next_col = j + 1;
        }
    }
    out
}

fn check_normalized(s: &AngularSpectrum, side: &str) -> Result<()> {
    if !s.is_normalized() {
        return Err(Error::Contract(format!(
            "{side} spectrum is not normalized"
        )));
    }
    if s.is_empty() {
        return Err(Error::Contract(format!("{side} spectrum is empty")));
    }
    Ok(())
}

/// Scaled block `diag(σ_R[rows]) · W[rows, cols] · diag(σ_S[cols])`.
pub fn sample_block(
    rx_std: &[f64],
    tx_std: &[f64],
    rows: &[usize],
    cols: &[usize],
    seed: u64,
) -> Mat<c64> {
    let mut block = gaussian_block(seed, rows, cols);
    for (r, &i) in rows.iter().enumerate() {
        for (c, &j) in cols.iter().enumerate() {
            block[(r, c)] *= rx_std[i] * tx_std[j];
        }
    }
    block
}

pub fn sample_angular_channel(
    rx: &AngularSpectrum,
    tx: &AngularSpectrum,
    seed: u64,
) -> Result<AngularChannel> {
    check_normalized(rx, "receive")?;
    check_normalized(tx, "transmit")?;
    let rows: Vec<usize> = (0..rx.len()).collect();
    let cols: Vec<usize> = (0..tx.len()).collect();
    let matrix = sample_block(&rx.std_devs(), &tx.std_devs(), &rows, &cols, seed);
    Ok(AngularChannel {
        matrix,
        rx_spectrum_ref: rx.lattice_ref().to_owned(),
        tx_spectrum_ref: tx.lattice_ref().to_owned(),
        seed,
    })
}

/// `H = √(N_R N_S) · Φ_r · H_a · Φ_sᴴ`.
pub fn synthesize_spatial(
    angular: &AngularChannel,
    rx_basis: &FourierBasis,
    tx_basis: &FourierBasis,
) -> Result<SpatialChannel> {
    let ha = &angular.matrix;
    if rx_basis.ncols() != ha.nrows() || tx_basis.ncols() != ha.ncols() {
        return Err(Error::Contract(format!(
            "H_a is {}×{} but the bases carry {} receive and {} transmit modes",
            ha.nrows(),
            ha.ncols(),
            rx_basis.ncols(),
            tx_basis.ncols()
        )));
    }
    let scale = ((rx_basis.nrows() * tx_basis.nrows()) as f64).sqrt();
    let left = rx_basis.matrix() * ha;
    let mut matrix = &left * tx_basis.matrix().adjoint();
    for j in 0..matrix.ncols() {
        for i in 0..matrix.nrows() {
            matrix[(i, j)] *= scale;
        }
    }
    Ok(SpatialChannel {
        matrix,
        seed: angular.seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_fourier_basis, enumerate_lattice, PlanarArrayConfig};

    fn unit_spectrum() -> AngularSpectrum {
        AngularSpectrum::from_variances(vec![1.0], "unit").unwrap()
    }

    #[test]
    fn same_seed_same_matrix() {
        let s = AngularSpectrum::from_variances(vec![0.5, 0.25, 0.25], "a").unwrap();
        let a = sample_angular_channel(&s, &s, 42).unwrap();
        let b = sample_angular_channel(&s, &s, 42).unwrap();
        assert_eq!(a.matrix, b.matrix);
        let c = sample_angular_channel(&s, &s, 43).unwrap();
        assert_ne!(a.matrix, c.matrix);
    }

    #[test]
    fn sub_blocks_match_full_draw() {
        let rows: Vec<usize> = (0..6).collect();
        let cols: Vec<usize> = (0..9).collect();
        let full = gaussian_block(7, &rows, &cols);
        let sub = gaussian_block(7, &[1, 4, 5], &[0, 2, 3, 8]);
        for (r, &i) in [1, 4, 5].iter().enumerate() {
            for (c, &j) in [0, 2, 3, 8].iter().enumerate() {
                assert_eq!(sub[(r, c)], full[(i, j)]);
            }
        }
    }

    #[test]
    fn zero_variance_row_is_exactly_zero() {
        let rx = AngularSpectrum::from_variances(vec![0.4, 0.0, 0.6], "rx").unwrap();
        let tx = AngularSpectrum::from_variances(vec![0.5, 0.5], "tx").unwrap();
        for seed in 0..20 {
            let h = sample_angular_channel(&rx, &tx, seed).unwrap();
            assert!(h.matrix.row(1).iter().all(|z| *z == c64::new(0.0, 0.0)));
        }
    }

    #[test]
    fn unit_scalar_has_unit_power() {
        let s = unit_spectrum();
        let n = 100_000;
        let mean: f64 = (0..n)
            .map(|t| {
                sample_angular_channel(&s, &s, derive_trial_seed(9, t))
                    .unwrap()
                    .matrix[(0, 0)]
                    .norm_sqr()
            })
            .sum::<f64>()
            / n as f64;
        assert!((mean - 1.0).abs() < 0.02, "{mean}");
    }

    #[test]
    fn unnormalized_spectrum_is_rejected() {
        let raw = AngularSpectrum::unnormalized(vec![0.3, 0.3], "raw");
        assert!(matches!(
            sample_angular_channel(&raw, &unit_spectrum(), 1),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn trial_seeds_are_deterministic_and_distinct() {
        assert_eq!(derive_trial_seed(5, 17), derive_trial_seed(5, 17));
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..1_000_000 {
            let s = rng.next_u64();
            assert_ne!(derive_trial_seed(s, 0), derive_trial_seed(s, 1));
        }
    }

    #[test]
    fn scalar_synthesis_is_identity() {
        let a = PlanarArrayConfig::square(1.0, 1.0, 0.5, 0.6, 0.05).unwrap();
        let lattice = enumerate_lattice(&a);
        let basis = build_fourier_basis(&a, &lattice).unwrap();
        let spectrum =
            AngularSpectrum::from_variances(vec![1.0; lattice.cardinality()], "l").unwrap();
        let ha = sample_angular_channel(&spectrum, &spectrum, 3).unwrap();
        let h = synthesize_spatial(&ha, &basis, &basis).unwrap();
        // N = 1 and every basis entry is 1, so H is the sum of H_a.
        let sum: c64 = ha
            .matrix
            .col_iter()
            .flat_map(|c| c.iter().copied().collect::<Vec<_>>())
            .sum();
        assert!((h.matrix[(0, 0)] - sum).norm() < 1e-12);
    }

    #[test]
    fn zero_angular_gives_zero_spatial() {
        let a = PlanarArrayConfig::square(2.0, 0.5, 0.25, 0.6, 0.05).unwrap();
        let basis = build_fourier_basis(&a, &enumerate_lattice(&a)).unwrap();
        let n = basis.ncols();
        let ha = AngularChannel {
            matrix: Mat::zeros(n, n),
            rx_spectrum_ref: String::new(),
            tx_spectrum_ref: String::new(),
            seed: 0,
        };
        let h = synthesize_spatial(&ha, &basis, &basis).unwrap();
        assert!(h
            .matrix
            .col_iter()
            .all(|c| c.iter().all(|z| z.norm() == 0.0)));
    }

    #[test]
    fn synthesis_rejects_mismatched_dimensions() {
        let a = PlanarArrayConfig::square(2.0, 0.5, 0.25, 0.6, 0.05).unwrap();
        let basis = build_fourier_basis(&a, &enumerate_lattice(&a)).unwrap();
        let ha = AngularChannel {
            matrix: Mat::zeros(1, 1),
            rx_spectrum_ref: String::new(),
            tx_spectrum_ref: String::new(),
            seed: 0,
        };
        assert!(matches!(
            synthesize_spatial(&ha, &basis, &basis),
            Err(Error::Contract(_))
        ));
    }
}
