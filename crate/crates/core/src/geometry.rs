//! Planar arrays, their wavenumber lattices and the Fourier bases that map
//! lattice cells back to element positions.
//!
//! All geometry is expressed in wavelengths. Wavenumbers are normalized by
//! κ = 2π/λ, so the propagating region is the closed unit disk and a cell of
//! an aperture of `len` wavelengths has side `1/len`.

use std::f64::consts::{PI, TAU};

use faer::{c64, Mat};

use crate::error::{Error, Result};

/// Element counts are `floor(len / spacing)`; this slack keeps exact ratios
/// such as `15 / (1/3)` from rounding down.
const COUNT_EPS: f64 = 1e-9;

/// A z-oriented uniform planar array. Lengths and areas are in wavelength
/// units; `wavelength` (meters) is only used when exporting positions.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanarArrayConfig {
    len_x: f64,
    len_y: f64,
    spacing: f64,
    element_area: f64,
    aperture_efficiency: f64,
    wavelength: f64,
}

impl PlanarArrayConfig {
    pub fn new(
        len_x: f64,
        len_y: f64,
        spacing: f64,
        element_area: f64,
        aperture_efficiency: f64,
        wavelength: f64,
    ) -> Result<Self> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::Config(format!(
                    "{name} must be positive and finite, got {v}"
                )))
            }
        };
        positive("len_x", len_x)?;
        positive("len_y", len_y)?;
        positive("spacing", spacing)?;
        positive("element_area", element_area)?;
        positive("wavelength", wavelength)?;
        if !(aperture_efficiency > 0.0 && aperture_efficiency < 1.0) {
            return Err(Error::Config(format!(
                "aperture_efficiency must lie in (0, 1), got {aperture_efficiency}"
            )));
        }
        if element_area > spacing * spacing * (1.0 + 1e-12) {
            return Err(Error::Config(format!(
                "element_area {element_area} exceeds spacing² {} (elements would overlap)",
                spacing * spacing
            )));
        }
        let array = Self {
            len_x,
            len_y,
            spacing,
            element_area,
            aperture_efficiency,
            wavelength,
        };
        if array.elements_x() == 0 || array.elements_y() == 0 {
            return Err(Error::Config(format!(
                "spacing {spacing} leaves no element inside a {len_x}×{len_y} aperture"
            )));
        }
        Ok(array)
    }

    /// Square aperture of side `len` wavelengths.
    pub fn square(
        len: f64,
        spacing: f64,
        element_area: f64,
        aperture_efficiency: f64,
        wavelength: f64,
    ) -> Result<Self> {
        Self::new(
            len,
            len,
            spacing,
            element_area,
            aperture_efficiency,
            wavelength,
        )
    }

    pub fn len_x(&self) -> f64 {
        self.len_x
    }

    pub fn len_y(&self) -> f64 {
        self.len_y
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn element_area(&self) -> f64 {
        self.element_area
    }

    pub fn aperture_efficiency(&self) -> f64 {
        self.aperture_efficiency
    }

    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }

    pub fn elements_x(&self) -> usize {
        (self.len_x / self.spacing + COUNT_EPS).floor() as usize
    }

    pub fn elements_y(&self) -> usize {
        (self.len_y / self.spacing + COUNT_EPS).floor() as usize
    }

    pub fn element_count(&self) -> usize {
        self.elements_x() * self.elements_y()
    }

    /// Aperture area `len_x · len_y` in λ².
    pub fn aperture_area(&self) -> f64 {
        self.len_x * self.len_y
    }

    /// Copy with a different element area (validated).
    pub fn with_element_area(&self, element_area: f64) -> Result<Self> {
        Self::new(
            self.len_x,
            self.len_y,
            self.spacing,
            element_area,
            self.aperture_efficiency,
            self.wavelength,
        )
    }

    /// Element positions in wavelengths, row-major over (y, x), on a grid
    /// centered at the origin. All elements lie in the z = 0 plane.
    pub fn element_positions(&self) -> Vec<[f64; 3]> {
        let (nx, ny) = (self.elements_x(), self.elements_y());
        let cx = (nx as f64 - 1.0) / 2.0;
        let cy = (ny as f64 - 1.0) / 2.0;
        let mut out = Vec::with_capacity(nx * ny);
        for iy in 0..ny {
            for ix in 0..nx {
                out.push([
                    (ix as f64 - cx) * self.spacing,
                    (iy as f64 - cy) * self.spacing,
                    0.0,
                ]);
            }
        }
        out
    }
}

/// Which lattice cells are kept as propagating modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InclusionRule {
    /// The closed cell rectangle intersects the closed unit disk.
    #[default]
    Intersect,
    /// The lattice index point `(ℓx/len_x, ℓy/len_y)` lies in the closed
    /// unit disk. Matches `n ≈ π·len_x·len_y` closely but drops part of the
    /// rim.
    IndexPoint,
}

/// Normalized wavenumber rectangle `[x0, x1] × [y0, y1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellBounds {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl CellBounds {
    pub fn area(&self) -> f64 {
        (self.x1 - self.x0) * (self.y1 - self.y0)
    }

    /// Squared distance from the origin to the closest point of the rectangle.
    pub fn min_radius_sq(&self) -> f64 {
        let dx = axis_gap(self.x0, self.x1);
        let dy = axis_gap(self.y0, self.y1);
        dx * dx + dy * dy
    }

    pub fn intersects_unit_disk(&self) -> bool {
        self.min_radius_sq() <= 1.0
    }
}

fn axis_gap(lo: f64, hi: f64) -> f64 {
    if lo <= 0.0 && hi >= 0.0 {
        0.0
    } else {
        lo.abs().min(hi.abs())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WavenumberCell {
    pub idx_x: i64,
    pub idx_y: i64,
    pub bounds: CellBounds,
}

impl WavenumberCell {
    pub fn new(idx_x: i64, idx_y: i64, len_x: f64, len_y: f64) -> Self {
        Self {
            idx_x,
            idx_y,
            bounds: CellBounds {
                x0: idx_x as f64 / len_x,
                x1: (idx_x + 1) as f64 / len_x,
                y0: idx_y as f64 / len_y,
                y1: (idx_y + 1) as f64 / len_y,
            },
        }
    }

    /// `γ/κ = √(1 − kx² − ky²)` at the lower-left corner, zero outside the disk.
    pub fn normalized_gamma(&self) -> f64 {
        let b = &self.bounds;
        (1.0 - b.x0 * b.x0 - b.y0 * b.y0).max(0.0).sqrt()
    }
}

/// The propagating cells of one array, ordered row-major by `(idx_y, idx_x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct WavenumberLattice {
    cells: Vec<WavenumberCell>,
    array: PlanarArrayConfig,
    rule: InclusionRule,
}

impl WavenumberLattice {
    pub fn cells(&self) -> &[WavenumberCell] {
        &self.cells
    }

    pub fn cardinality(&self) -> usize {
        self.cells.len()
    }

    pub fn array(&self) -> &PlanarArrayConfig {
        &self.array
    }

    pub fn rule(&self) -> InclusionRule {
        self.rule
    }

    /// `π · len_x · len_y`, the large-aperture approximation of the cardinality.
    pub fn approx_cardinality(&self) -> f64 {
        approx_cardinality(&self.array)
    }

    /// Position of a cell in lattice order.
    pub fn position(&self, idx_x: i64, idx_y: i64) -> Option<usize> {
        self.cells
            .binary_search_by(|c| (c.idx_y, c.idx_x).cmp(&(idx_y, idx_x)))
            .ok()
    }

    /// Short stable identifier used to bind spectra to lattices.
    pub fn fingerprint(&self) -> String {
        format!(
            "{}x{}@{}:{:?}:{}",
            self.array.len_x,
            self.array.len_y,
            self.array.spacing,
            self.rule,
            self.cells.len()
        )
    }
}

pub fn approx_cardinality(array: &PlanarArrayConfig) -> f64 {
    PI * array.len_x * array.len_y
}

/// Enumerates the propagating cells with the default [`InclusionRule::Intersect`].
pub fn enumerate_lattice(array: &PlanarArrayConfig) -> WavenumberLattice {
    enumerate_lattice_with(array, InclusionRule::Intersect)
}

pub fn enumerate_lattice_with(array: &PlanarArrayConfig, rule: InclusionRule) -> WavenumberLattice {
    let range = |len: f64| (-(len.ceil() as i64) - 1)..=(len.ceil() as i64);
    let mut cells = Vec::new();
    for iy in range(array.len_y) {
        for ix in range(array.len_x) {
            let cell = WavenumberCell::new(ix, iy, array.len_x, array.len_y);
            let keep = match rule {
                InclusionRule::Intersect => cell.bounds.intersects_unit_disk(),
                InclusionRule::IndexPoint => {
                    let b = &cell.bounds;
                    b.x0 * b.x0 + b.y0 * b.y0 <= 1.0
                }
            };
            if keep {
                cells.push(cell);
            }
        }
    }
    WavenumberLattice {
        cells,
        array: array.clone(),
        rule,
    }
}

/// `N × n` matrix whose column `j` is the plane-wave response of lattice
/// cell `j` sampled at the element positions, scaled by `1/√N`.
#[derive(Debug, Clone)]
pub struct FourierBasis {
    matrix: Mat<c64>,
    positions_m: Vec<[f64; 3]>,
}

impl FourierBasis {
    pub fn matrix(&self) -> &Mat<c64> {
        &self.matrix
    }

    /// Element positions in meters.
    pub fn element_positions(&self) -> &[[f64; 3]] {
        &self.positions_m
    }

    pub fn nrows(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.matrix.ncols()
    }

    /// `max |[ΦᴴΦ − I]_{jk}|` over off-diagonal entries.
    pub fn max_offdiag_gram(&self) -> f64 {
        let gram = self.matrix.adjoint() * &self.matrix;
        let n = gram.nrows();
        let mut worst = 0.0_f64;
        for j in 0..n {
            for i in 0..n {
                if i != j {
                    worst = worst.max(gram[(i, j)].norm());
                }
            }
        }
        worst
    }
}

pub fn build_fourier_basis(
    array: &PlanarArrayConfig,
    lattice: &WavenumberLattice,
) -> Result<FourierBasis> {
    if lattice.array() != array {
        return Err(Error::Config(format!(
            "lattice was built for a {}×{} array at spacing {}, not {}×{} at spacing {}",
            lattice.array().len_x,
            lattice.array().len_y,
            lattice.array().spacing,
            array.len_x,
            array.len_y,
            array.spacing
        )));
    }
    let positions = array.element_positions();
    let scale = 1.0 / (positions.len() as f64).sqrt();
    let cells = lattice.cells();
    let matrix = Mat::<c64>::from_fn(positions.len(), cells.len(), |i, j| {
        let [rx, ry, rz] = positions[i];
        let cell = &cells[j];
        let phase = TAU * cell.idx_x as f64 * rx / array.len_x
            + TAU * cell.idx_y as f64 * ry / array.len_y
            + TAU * cell.normalized_gamma() * rz;
        c64::from_polar(scale, -phase)
    });
    let positions_m = positions
        .iter()
        .map(|p| p.map(|v| v * array.wavelength))
        .collect();
    Ok(FourierBasis {
        matrix,
        positions_m,
    })
}
