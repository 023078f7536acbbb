//! Multi-peak Gaussian terrain.
//!
//! Each peak contributes `omega * Phi(v)` where `Phi` is the standard normal
//! CDF and `v = (rho * dist^(-1/eta))^(1/eta)` decays slowly with the
//! distance from the peak center. The terrain is the pointwise maximum over
//! all peaks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;

/// Distances below this are clamped so the peak center stays finite.
pub const MIN_PEAK_DISTANCE: f64 = 0.5;

/// Standard normal cumulative distribution function.
///
/// Evaluated as `erfc(-z / sqrt(2)) / 2` with the fdlibm `erfc`, which keeps
/// full double precision in both tails (absolute error well below `1e-15`).
pub fn std_normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z * std::f64::consts::FRAC_1_SQRT_2)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeakSpec {
    /// Row coordinate of the center, `1..=L`.
    pub x: f64,
    /// Column coordinate of the center, `1..=W`.
    pub y: f64,
    /// Peak coefficient; the height the peak saturates to.
    pub omega: f64,
    pub rho: f64,
    /// Root index applied to both the distance and the scaled peak value.
    pub eta: f64,
}

impl PeakSpec {
    pub fn validate(&self, length: usize, width: usize) -> Result<()> {
        if !(1.0..=length as f64).contains(&self.x) || !(1.0..=width as f64).contains(&self.y) {
            return Err(Error::InvalidParameter(format!(
                "peak center ({}, {}) outside 1..={length} x 1..={width}",
                self.x, self.y
            )));
        }
        if !(self.omega > 0.0 && self.rho > 0.0 && self.eta >= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "peak needs omega > 0, rho > 0, eta >= 1 (got {}, {}, {})",
                self.omega, self.rho, self.eta
            )));
        }
        Ok(())
    }
}

/// Height contributed by peak `p` at grid point `(i, j)` (1-based).
pub fn peak_height(p: &PeakSpec, i: f64, j: f64) -> f64 {
    let dist = (i - p.x).hypot(j - p.y).max(MIN_PEAK_DISTANCE);
    let e = dist.powf(-1.0 / p.eta);
    let v = (p.rho * e).powf(1.0 / p.eta);
    p.omega * std_normal_cdf(v)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TerrainGrid {
    pub length: usize,
    pub width: usize,
    /// `heights.get(i - 1, j - 1)` is the surface height at `(i, j)`.
    pub heights: Grid<f64>,
    /// Generating peaks; empty when the grid was loaded from a file.
    pub peaks: Vec<PeakSpec>,
    pub seed: u64,
}

impl TerrainGrid {
    /// Point cloud `(i, j, height)` in row-major order.
    pub fn points(&self) -> Vec<[f64; 3]> {
        (0..self.heights.len())
            .map(|idx| {
                let (r, c) = self.heights.coords_of(idx);
                [(r + 1) as f64, (c + 1) as f64, self.heights.as_slice()[idx]]
            })
            .collect()
    }

    pub fn len(&self) -> usize {
        self.heights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heights.is_empty()
    }
}

pub fn compose_terrain(peaks: &[PeakSpec], length: usize, width: usize) -> Result<TerrainGrid> {
    if peaks.is_empty() {
        return Err(Error::EmptyPeakSet);
    }
    if length < 2 || width < 2 {
        return Err(Error::InvalidParameter(format!(
            "terrain must be at least 2x2, got {length}x{width}"
        )));
    }
    for p in peaks {
        p.validate(length, width)?;
    }
    let heights = Grid::from_fn(length, width, |r, c| {
        let (i, j) = ((r + 1) as f64, (c + 1) as f64);
        peaks
            .iter()
            .map(|p| peak_height(p, i, j))
            .fold(f64::NEG_INFINITY, f64::max)
    });
    Ok(TerrainGrid {
        length,
        width,
        heights,
        peaks: peaks.to_vec(),
        seed: 0,
    })
}

/// Parameters for random peak placement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeakParams {
    pub count: usize,
    pub rho: f64,
    pub eta: f64,
    pub omega_min: f64,
    pub omega_max: f64,
}

impl Default for PeakParams {
    fn default() -> Self {
        PeakParams {
            count: 20,
            rho: 1000.0,
            eta: 4.0,
            omega_min: 1.0,
            omega_max: 100.0,
        }
    }
}

/// Draws `params.count` peaks with centers uniform over the grid points and
/// `omega` uniform on `[omega_min, omega_max]`.
pub fn generate_peaks(
    seed: u64,
    params: &PeakParams,
    length: usize,
    width: usize,
) -> Result<Vec<PeakSpec>> {
    let PeakParams {
        count,
        rho,
        eta,
        omega_min,
        omega_max,
    } = *params;
    if count == 0 {
        return Err(Error::InvalidParameter("peak count must be >= 1".into()));
    }
    if !(omega_min > 0.0 && omega_min <= omega_max && omega_max.is_finite()) {
        return Err(Error::InvalidRange(format!(
            "omega range [{omega_min}, {omega_max}] must be a nonempty subset of (0, inf)"
        )));
    }
    if length < 1 || width < 1 {
        return Err(Error::InvalidParameter("grid must be nonempty".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..count)
        .map(|_| PeakSpec {
            x: rng.gen_range(1..=length) as f64,
            y: rng.gen_range(1..=width) as f64,
            omega: if omega_min == omega_max {
                omega_min
            } else {
                rng.gen_range(omega_min..=omega_max)
            },
            rho,
            eta,
        })
        .collect())
}

/// Generates peaks from `seed` and composes them into a terrain.
pub fn generate_terrain(
    seed: u64,
    params: &PeakParams,
    length: usize,
    width: usize,
) -> Result<TerrainGrid> {
    let peaks = generate_peaks(seed, params, length, width)?;
    let mut terrain = compose_terrain(&peaks, length, width)?;
    terrain.seed = seed;
    Ok(terrain)
}
