//! Angle distributions and the per-cell angular spectrum.
//!
//! A cell's variance is the probability that a plane wave drawn from the
//! angle distribution lands in that cell of the normalized wavenumber
//! plane, `k_R = sin θ`. In polar wavenumber coordinates the measure is
//! `f(arcsin k_R, φ) / √(1 − k_R²) dk_R dφ`; substituting `k_R = sin θ`
//! turns it back into `f(θ, φ) dθ dφ`, so for a fixed azimuth the radial
//! integral is an elevation CDF difference and only the azimuth integral is
//! done numerically.

use std::f64::consts::{FRAC_PI_2, PI, SQRT_2, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{CellBounds, WavenumberCell, WavenumberLattice};
use crate::quadrature::{self, Tolerance};
use crate::util::{compensated_sum, map_indexed};

/// Cells whose total before normalization is below this carry no usable mass.
const DEGENERATE_TOTAL: f64 = 1e-12;

/// Separable wrapped-Gaussian azimuth × truncated-Laplacian elevation
/// density over `θ ∈ [0, π/2]`, `φ ∈ [φ₀ − π, φ₀ + π]`, or the isotropic
/// hemisphere `sin θ / 2π`. Angles are radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AngleDistribution {
    pub azimuth_mean: f64,
    pub azimuth_spread: f64,
    pub elevation_mean: f64,
    pub elevation_spread: f64,
    pub q_g: f64,
    pub q_l: f64,
    pub isotropic: bool,
}

impl AngleDistribution {
    pub fn wg_tl(
        azimuth_mean: f64,
        azimuth_spread: f64,
        elevation_mean: f64,
        elevation_spread: f64,
    ) -> Result<Self> {
        if !azimuth_mean.is_finite() {
            return Err(Error::Domain(format!(
                "azimuth mean {azimuth_mean} is not finite"
            )));
        }
        if !(0.0..=FRAC_PI_2).contains(&elevation_mean) {
            return Err(Error::Domain(format!(
                "elevation mean {elevation_mean} rad outside [0, π/2]"
            )));
        }
        let mut dist = Self {
            azimuth_mean,
            azimuth_spread,
            elevation_mean,
            elevation_spread,
            q_g: 1.0,
            q_l: 1.0,
            isotropic: false,
        };
        let (q_l, q_g) = compute_normalizers(&dist)?;
        dist.q_l = q_l;
        dist.q_g = q_g;
        Ok(dist)
    }

    /// Uniform over the solid angle of the hemisphere.
    pub fn isotropic() -> Self {
        Self {
            azimuth_mean: 0.0,
            azimuth_spread: f64::INFINITY,
            elevation_mean: 0.0,
            elevation_spread: f64::INFINITY,
            q_g: 1.0,
            q_l: 1.0,
            isotropic: true,
        }
    }

    /// Joint density `f(θ, φ)`; `φ` may be any real and is wrapped onto the
    /// support around the mean.
    pub fn pdf(&self, theta: f64, phi: f64) -> Result<f64> {
        if !(0.0..=FRAC_PI_2).contains(&theta) {
            return Err(Error::Domain(format!(
                "elevation {theta} rad outside [0, π/2]"
            )));
        }
        Ok(self.elevation_density(theta) * self.azimuth_density(phi))
    }

    /// Marginal azimuth density (its integral over one period is 1).
    pub fn azimuth_density(&self, phi: f64) -> f64 {
        if self.isotropic {
            return 1.0 / TAU;
        }
        let d = wrap_centered(phi - self.azimuth_mean);
        let s = self.azimuth_spread;
        self.q_g / ((TAU).sqrt() * s) * (-(d * d) / (2.0 * s * s)).exp()
    }

    /// Marginal elevation density on `[0, π/2]`.
    pub fn elevation_density(&self, theta: f64) -> f64 {
        if self.isotropic {
            return theta.sin();
        }
        let s = self.elevation_spread;
        self.q_l / (SQRT_2 * s) * (-SQRT_2 * (theta - self.elevation_mean).abs() / s).exp()
    }

    /// `∫_a^b` of the elevation density, `0 ≤ a ≤ b ≤ π/2`. Tail differences
    /// are formed without cancellation so tiny cell masses stay accurate.
    pub fn elevation_mass(&self, a: f64, b: f64) -> f64 {
        if b <= a {
            return 0.0;
        }
        if self.isotropic {
            // cos a − cos b
            return 2.0 * (0.5 * (a + b)).sin() * (0.5 * (b - a)).sin();
        }
        let scale = self.elevation_spread / SQRT_2;
        let m = self.elevation_mean;
        let width = -libm::expm1(-(b - a) / scale);
        let laplace = if b <= m {
            0.5 * ((b - m) / scale).exp() * width
        } else if a >= m {
            0.5 * (-(a - m) / scale).exp() * width
        } else {
            0.5 * -libm::expm1((a - m) / scale) + 0.5 * -libm::expm1(-(b - m) / scale)
        };
        self.q_l * laplace
    }
}

/// Wraps an angle offset into `[−π, π)`.
fn wrap_centered(d: f64) -> f64 {
    if (-PI..PI).contains(&d) {
        d
    } else {
        d - TAU * ((d + PI) / TAU).floor()
    }
}

/// Closed-form `(Q_l, Q_g)`: the reciprocal of the mass the untruncated
/// Laplacian puts on `[0, π/2]` and of the Gaussian mass on `[φ₀ − π, φ₀ + π]`.
pub fn compute_normalizers(dist: &AngleDistribution) -> Result<(f64, f64)> {
    if dist.isotropic {
        return Ok((1.0, 1.0));
    }
    for (name, v) in [
        ("azimuth spread", dist.azimuth_spread),
        ("elevation spread", dist.elevation_spread),
    ] {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::Domain(format!("{name} must be positive, got {v}")));
        }
    }
    let scale = dist.elevation_spread / SQRT_2;
    let m = dist.elevation_mean;
    let inside = 1.0 - 0.5 * (-m / scale).exp() - 0.5 * (-(FRAC_PI_2 - m) / scale).exp();
    let q_l = 1.0 / inside;
    let q_g = 1.0 / libm::erf(PI / (SQRT_2 * dist.azimuth_spread));
    Ok((q_l, q_g))
}

/// Unnormalized TL and Gaussian masses by adaptive quadrature; their
/// reciprocals cross-check [`compute_normalizers`].
pub fn normalizer_masses_by_quadrature(dist: &AngleDistribution) -> (f64, f64) {
    let tol = Tolerance {
        abs: 1e-13,
        rel: 1e-13,
        ..Tolerance::default()
    };
    let sl = dist.elevation_spread;
    let m = dist.elevation_mean;
    let tl = |t: f64| (-SQRT_2 * (t - m).abs() / sl).exp() / (SQRT_2 * sl);
    let tl_mass = quadrature::integrate(tl, 0.0, m, tol).value
        + quadrature::integrate(tl, m, FRAC_PI_2, tol).value;
    let sg = dist.azimuth_spread;
    let wg = |d: f64| (-(d * d) / (2.0 * sg * sg)).exp() / (TAU.sqrt() * sg);
    let wg_mass = quadrature::integrate(wg, -PI, 0.0, tol).value
        + quadrature::integrate(wg, 0.0, PI, tol).value;
    (tl_mass, wg_mass)
}

/// Per-cell variances of one link end, aligned with its lattice order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AngularSpectrum {
    variances: Vec<f64>,
    lattice_ref: String,
    normalized: bool,
    raw_total: f64,
}

impl AngularSpectrum {
    /// Normalizes raw non-negative variances to unit sum.
    pub fn from_variances(raw: Vec<f64>, lattice_ref: impl Into<String>) -> Result<Self> {
        if raw.is_empty() {
            return Err(Error::Contract("spectrum needs at least one cell".into()));
        }
        if let Some(v) = raw.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::Contract(format!(
                "variance {v} is negative or not finite"
            )));
        }
        let total = compensated_sum(raw.iter().copied());
        if total < DEGENERATE_TOTAL {
            return Err(Error::DegenerateSpectrum { total });
        }
        let variances = raw.iter().map(|v| v / total).collect();
        Ok(Self {
            variances,
            lattice_ref: lattice_ref.into(),
            normalized: true,
            raw_total: total,
        })
    }

    /// Wraps variances as given, without normalizing.
    pub fn unnormalized(variances: Vec<f64>, lattice_ref: impl Into<String>) -> Self {
        let raw_total = compensated_sum(variances.iter().copied());
        Self {
            variances,
            lattice_ref: lattice_ref.into(),
            normalized: false,
            raw_total,
        }
    }

    pub fn variances(&self) -> &[f64] {
        &self.variances
    }

    pub fn std_devs(&self) -> Vec<f64> {
        self.variances.iter().map(|v| v.sqrt()).collect()
    }

    pub fn len(&self) -> usize {
        self.variances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.variances.is_empty()
    }

    pub fn lattice_ref(&self) -> &str {
        &self.lattice_ref
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    /// Sum of the cell variances before normalization.
    pub fn raw_total(&self) -> f64 {
        self.raw_total
    }

    pub fn total(&self) -> f64 {
        compensated_sum(self.variances.iter().copied())
    }

    /// Smallest number of cells whose variances add up to `fraction` of the total.
    pub fn cells_for_fraction(&self, fraction: f64) -> usize {
        let mut sorted = self.variances.clone();
        sorted.sort_by(|a, b| b.total_cmp(a));
        let target = fraction * self.total();
        let mut acc = 0.0;
        for (i, v) in sorted.iter().enumerate() {
            acc += v;
            if acc >= target {
                return i + 1;
            }
        }
        sorted.len()
    }
}

/// Integrates the distribution over one cell ∩ unit disk.
pub fn cell_variance(dist: &AngleDistribution, cell: &WavenumberCell) -> f64 {
    cell_variance_with(dist, &cell.bounds, Tolerance::default())
}

pub fn cell_variance_with(dist: &AngleDistribution, bounds: &CellBounds, tol: Tolerance) -> f64 {
    if bounds.min_radius_sq() >= 1.0 {
        return 0.0;
    }
    // Rectangles crossing an axis are integrated one quadrant at a time.
    if bounds.x0 < 0.0 && bounds.x1 > 0.0 {
        let (l, r) = (
            CellBounds { x1: 0.0, ..*bounds },
            CellBounds { x0: 0.0, ..*bounds },
        );
        return cell_variance_with(dist, &l, tol) + cell_variance_with(dist, &r, tol);
    }
    if bounds.y0 < 0.0 && bounds.y1 > 0.0 {
        let (lo, hi) = (
            CellBounds { y1: 0.0, ..*bounds },
            CellBounds { y0: 0.0, ..*bounds },
        );
        return cell_variance_with(dist, &lo, tol) + cell_variance_with(dist, &hi, tol);
    }
    let region = QuadrantRegion::new(bounds);
    let breaks = region.breakpoints();
    let mut total = 0.0;
    for w in breaks.windows(2) {
        let integrand = |phi: f64| {
            let (r_in, r_out) = region.radial_limits(phi);
            if r_in >= r_out {
                return 0.0;
            }
            let mass = dist.elevation_mass(r_in.asin(), r_out.asin());
            if mass == 0.0 {
                0.0
            } else {
                mass * dist.azimuth_density(region.original_azimuth(phi))
            }
        };
        total += quadrature::integrate(integrand, w[0], w[1], tol).value;
    }
    total
}

/// A cell reflected into the first quadrant, `[a, b] × [c, d]` with
/// `a, c ≥ 0`, plus the reflection needed to map azimuths back.
#[derive(Debug, Clone, Copy)]
struct QuadrantRegion {
    a: f64,
    b: f64,
    c: f64,
    d: f64,
    flip_x: bool,
    flip_y: bool,
}

impl QuadrantRegion {
    fn new(bounds: &CellBounds) -> Self {
        let flip_x = bounds.x0 < 0.0;
        let flip_y = bounds.y0 < 0.0;
        let (a, b) = if flip_x {
            (-bounds.x1, -bounds.x0)
        } else {
            (bounds.x0, bounds.x1)
        };
        let (c, d) = if flip_y {
            (-bounds.y1, -bounds.y0)
        } else {
            (bounds.y0, bounds.y1)
        };
        Self {
            a,
            b,
            c,
            d,
            flip_x,
            flip_y,
        }
    }

    fn original_azimuth(&self, phi: f64) -> f64 {
        match (self.flip_x, self.flip_y) {
            (false, false) => phi,
            (true, false) => PI - phi,
            (false, true) => -phi,
            (true, true) => PI + phi,
        }
    }

    /// Azimuths where the radial limits change formula: the corner rays
    /// (which split the cell into the two or three regions of the polar
    /// decomposition) and the rays where the unit circle crosses an edge.
    fn breakpoints(&self) -> Vec<f64> {
        let (a, b, c, d) = (self.a, self.b, self.c, self.d);
        let lo = c.atan2(b);
        let hi = d.atan2(a);
        let mut pts = vec![lo, hi, d.atan2(b)];
        if a > 0.0 || c > 0.0 {
            pts.push(c.atan2(a));
        }
        for x in [a, b] {
            if x < 1.0 {
                let y = (1.0 - x * x).sqrt();
                if y > c && y < d {
                    pts.push(y.atan2(x));
                }
            }
        }
        for y in [c, d] {
            if y < 1.0 {
                let x = (1.0 - y * y).sqrt();
                if x > a && x < b {
                    pts.push(y.atan2(x));
                }
            }
        }
        pts.retain(|p| *p >= lo && *p <= hi);
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }

    /// `[r_in, r_out]` of the ray at azimuth `phi` inside the rectangle,
    /// clipped to the unit disk.
    fn radial_limits(&self, phi: f64) -> (f64, f64) {
        let (s, c) = phi.sin_cos();
        let over = |num: f64, den: f64, empty: f64| {
            if num == 0.0 {
                0.0
            } else if den > 0.0 {
                num / den
            } else {
                empty
            }
        };
        let r_in = over(self.a, c, f64::INFINITY).max(over(self.c, s, f64::INFINITY));
        let r_out = over(self.b, c, f64::INFINITY)
            .min(over(self.d, s, f64::INFINITY))
            .min(1.0);
        (r_in, r_out)
    }
}

/// Midpoint-rule integration of the Cartesian-wavenumber density over the
/// cell rectangle. Independent of [`cell_variance`]; converges slowly but
/// needs no region decomposition.
pub fn cell_variance_oracle(dist: &AngleDistribution, cell: &WavenumberCell, grid_n: usize) -> f64 {
    let b = &cell.bounds;
    if b.min_radius_sq() >= 1.0 || grid_n == 0 {
        return 0.0;
    }
    let hx = (b.x1 - b.x0) / grid_n as f64;
    let hy = (b.y1 - b.y0) / grid_n as f64;
    let mut rows = Vec::with_capacity(grid_n);
    for j in 0..grid_n {
        let ky = b.y0 + (j as f64 + 0.5) * hy;
        let mut row = 0.0;
        for i in 0..grid_n {
            let kx = b.x0 + (i as f64 + 0.5) * hx;
            let r2 = kx * kx + ky * ky;
            if r2 >= 1.0 || r2 == 0.0 {
                continue;
            }
            let kr = r2.sqrt();
            let cos_t = (1.0 - r2).sqrt();
            let theta = kr.asin();
            let f = dist.elevation_density(theta) * dist.azimuth_density(ky.atan2(kx));
            row += f / (kr * cos_t);
        }
        rows.push(row);
    }
    compensated_sum(rows) * hx * hy
}

/// Variances of every lattice cell, normalized to unit sum.
pub fn compute_spectrum(
    dist: &AngleDistribution,
    lattice: &WavenumberLattice,
) -> Result<AngularSpectrum> {
    let cells = lattice.cells();
    let raw = map_indexed(cells.len(), |i| cell_variance(dist, &cells[i]));
    let spectrum = AngularSpectrum::from_variances(raw, lattice.fingerprint())?;
    let total = spectrum.raw_total();
    if (total - 1.0).abs() > 1e-3 {
        log::warn!(
            "angular spectrum mass before normalization is {total:.6} on {}",
            lattice.fingerprint()
        );
    } else {
        log::debug!("angular spectrum mass before normalization is {total:.9}");
    }
    Ok(spectrum)
}
