use rayon::prelude::*;

use super::knn::NeighborTable;
use crate::error::{Error, Result};

/// Conditioner for the local Gram systems, relative to `trace(G) / k`.
pub const DEFAULT_REG: f64 = 1e-3;

/// Sparse reconstruction weights; row `i` lives on the neighbors of `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightMatrix {
    k: usize,
    neighbors: Vec<usize>,
    weights: Vec<f64>,
}

impl WeightMatrix {
    pub fn n(&self) -> usize {
        self.weights.len() / self.k
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Column indices and weights of row `i`.
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let span = i * self.k..(i + 1) * self.k;
        (&self.neighbors[span.clone()], &self.weights[span])
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (cols, w) = self.row(i);
        cols.iter()
            .zip(w)
            .filter(|(&c, _)| c == j)
            .map(|(_, &w)| w)
            .sum()
    }
}

/// Cholesky solve of `a x = b` for a small symmetric matrix stored
/// row-major. Returns `None` when a pivot drops to `min_pivot` or below.
fn cholesky_solve(a: &[f64], b: &[f64], min_pivot: f64) -> Option<Vec<f64>> {
    let n = b.len();
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = a[i * n + j];
            for p in 0..j {
                s -= l[i * n + p] * l[j * n + p];
            }
            if i == j {
                if s <= min_pivot {
                    return None;
                }
                l[i * n + i] = s.sqrt();
            } else {
                l[i * n + j] = s / l[j * n + j];
            }
        }
    }
    let mut y = vec![0.0; n];
    for i in 0..n {
        let s: f64 = (0..i).map(|p| l[i * n + p] * y[p]).sum();
        y[i] = (b[i] - s) / l[i * n + i];
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|p| l[p * n + i] * x[p]).sum();
        x[i] = (y[i] - s) / l[i * n + i];
    }
    Some(x)
}

fn local_weights(point: usize, x: &[f64; 3], nbrs: &[[f64; 3]], reg: f64) -> Result<Vec<f64>> {
    let k = nbrs.len();
    let z: Vec<[f64; 3]> = nbrs
        .iter()
        .map(|q| [q[0] - x[0], q[1] - x[1], q[2] - x[2]])
        .collect();
    let mut gram = vec![0.0; k * k];
    for a in 0..k {
        for b in 0..=a {
            let v = z[a][0] * z[b][0] + z[a][1] * z[b][1] + z[a][2] * z[b][2];
            gram[a * k + b] = v;
            gram[b * k + a] = v;
        }
    }
    let trace: f64 = (0..k).map(|a| gram[a * k + a]).sum();
    if trace == 0.0 {
        // All neighbors sit on the point itself.
        return if reg > 0.0 {
            Ok(vec![1.0 / k as f64; k])
        } else {
            Err(Error::SingularGram { point })
        };
    }
    let shift = reg * trace / k as f64;
    for a in 0..k {
        gram[a * k + a] += shift;
    }
    let min_pivot = if reg > 0.0 {
        0.0
    } else {
        1e-12 * trace / k as f64
    };
    let w = cholesky_solve(&gram, &vec![1.0; k], min_pivot).ok_or(Error::SingularGram { point })?;
    let total: f64 = w.iter().sum();
    if !(total.is_finite() && total != 0.0) {
        return Err(Error::SingularGram { point });
    }
    Ok(w.into_iter().map(|v| v / total).collect())
}

/// Least-squares affine reconstruction of every point from its neighbors.
///
/// Row `i` minimizes `|x_i - sum_j w_ij x_j|^2` under `sum_j w_ij = 1`,
/// solved through the local Gram matrix `G w = 1` with `reg * trace(G) / k`
/// added to the diagonal.
pub fn reconstruction_weights(
    points: &[[f64; 3]],
    nbrs: &NeighborTable,
    reg: f64,
) -> Result<WeightMatrix> {
    if !(reg >= 0.0 && reg.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "reg must be >= 0, got {reg}"
        )));
    }
    if nbrs.len() != points.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} neighbor rows for {} points",
            nbrs.len(),
            points.len()
        )));
    }
    let k = nbrs.k();
    let rows: Vec<Vec<f64>> = (0..points.len())
        .into_par_iter()
        .map(|i| {
            let local: Vec<[f64; 3]> = nbrs.of(i).iter().map(|&j| points[j]).collect();
            local_weights(i, &points[i], &local, reg)
        })
        .collect::<Result<_>>()?;
    Ok(WeightMatrix {
        k,
        neighbors: (0..points.len())
            .flat_map(|i| nbrs.of(i).to_vec())
            .collect(),
        weights: rows.concat(),
    })
}
