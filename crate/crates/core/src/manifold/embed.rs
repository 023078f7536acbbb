use faer::diag::Diag;
use faer::dyn_stack::{MemBuffer, MemStack};
use faer::linalg::evd::{self_adjoint_evd, self_adjoint_evd_scratch, ComputeEigenvectors};
use faer::{Mat, Par};
use serde::{Deserialize, Serialize};

use super::knn::NeighborTable;
use super::weights::WeightMatrix;
use crate::error::{Error, Result};

/// How the spectral coordinates are scaled after the eigen-solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EmbeddingScale {
    /// Each coordinate has unit variance over the points.
    UnitVariance,
    /// Isotropic rescale so the mean neighbor distance in 2D equals the
    /// mean neighbor distance of the 3D input.
    #[default]
    NeighborMatched,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Embedding2D {
    pub coords: Vec<[f64; 2]>,
    /// Heights of the source points, in the same order as `coords`.
    pub altitudes: Vec<f64>,
    /// Source grid `(L, W)`; `coords.len() == L * W`.
    pub dims: (usize, usize),
    /// Three smallest eigenvalues of `(I - W)^T (I - W)`; the embedding uses
    /// the eigenvectors of the second and third.
    pub eigenvalues: [f64; 3],
    pub k: usize,
    pub seed: u64,
}

impl Embedding2D {
    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    /// Euclidean distance between points `i` and `j` in the plane.
    pub fn distance(&self, i: usize, j: usize) -> f64 {
        let (a, b) = (self.coords[i], self.coords[j]);
        (a[0] - b[0]).hypot(a[1] - b[1])
    }

    pub fn scale_by(&mut self, factor: f64) {
        for c in &mut self.coords {
            c[0] *= factor;
            c[1] *= factor;
        }
    }

    /// Rescales so neighbor pairs are, on average, as far apart as in 3D.
    pub fn match_neighbor_scale(&mut self, points: &[[f64; 3]], nbrs: &NeighborTable) {
        let (mut d3, mut d2) = (0.0, 0.0);
        for i in 0..points.len() {
            for &j in nbrs.of(i) {
                let (p, q) = (points[i], points[j]);
                d3 +=
                    ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2) + (p[2] - q[2]).powi(2)).sqrt();
                d2 += self.distance(i, j);
            }
        }
        if d2 > 0.0 {
            self.scale_by(d3 / d2);
        }
    }
}

/// Dense `M = (I - W)^T (I - W)`.
fn cost_matrix(w: &WeightMatrix) -> Mat<f64> {
    let n = w.n();
    let mut m = Mat::<f64>::zeros(n, n);
    for i in 0..n {
        m[(i, i)] += 1.0;
        let (cols, ws) = w.row(i);
        for (&j, &wij) in cols.iter().zip(ws) {
            m[(i, j)] -= wij;
            m[(j, i)] -= wij;
        }
        for (&a, &wa) in cols.iter().zip(ws) {
            for (&b, &wb) in cols.iter().zip(ws) {
                m[(a, b)] += wa * wb;
            }
        }
    }
    m
}

/// `|(I - W) v|^2`, the Rayleigh quotient of `M` at a unit vector `v`.
fn residual_norm_sq(w: &WeightMatrix, v: faer::ColRef<'_, f64>) -> f64 {
    (0..w.n())
        .map(|i| {
            let (cols, ws) = w.row(i);
            let r = v[i]
                - cols
                    .iter()
                    .zip(ws)
                    .map(|(&j, &wij)| wij * v[j])
                    .sum::<f64>();
            r * r
        })
        .sum()
}

/// Spectral step of LLE: the bottom eigenvectors of `M`, skipping the
/// constant one.
///
/// This is a dense symmetric eigendecomposition, `O(N^3)` time and
/// `O(N^2)` memory; a 50x50 grid (N = 2500) takes a few seconds.
/// Coordinates are centered, scaled to unit variance and sign-fixed so the
/// entry of largest magnitude in each column is positive.
pub fn embed(w: &WeightMatrix, altitudes: Vec<f64>, dims: (usize, usize)) -> Result<Embedding2D> {
    let n = w.n();
    if altitudes.len() != n || dims.0 * dims.1 != n {
        return Err(Error::DimensionMismatch(format!(
            "{n} weight rows, {} altitudes, grid {}x{}",
            altitudes.len(),
            dims.0,
            dims.1
        )));
    }
    if n < 3 {
        return Err(Error::EigenFailure(format!(
            "need at least 3 points, got {n}"
        )));
    }
    let m = cost_matrix(w);
    // Sequential so results do not depend on the size of the thread pool.
    let par = Par::Seq;
    let mut u = Mat::<f64>::zeros(n, n);
    let mut s = Diag::<f64>::zeros(n);
    let mut mem = MemBuffer::new(self_adjoint_evd_scratch::<f64>(
        n,
        ComputeEigenvectors::Yes,
        par,
        Default::default(),
    ));
    self_adjoint_evd(
        m.as_ref(),
        s.as_mut(),
        Some(u.as_mut()),
        par,
        MemStack::new(&mut mem),
        Default::default(),
    )
    .map_err(|e| Error::EigenFailure(format!("{e:?}")))?;
    if (0..3).any(|c| !s.column_vector()[c].is_finite()) {
        return Err(Error::EigenFailure("non-finite eigenvalue".into()));
    }
    // The bottom eigenvalues sit near the rounding floor of the dense solve;
    // |(I - W) u|^2 recovers them to full relative precision.
    let eigenvalues: [f64; 3] = std::array::from_fn(|c| residual_norm_sq(w, u.col(c)));
    if eigenvalues.iter().any(|v| !v.is_finite()) {
        return Err(Error::EigenFailure("non-finite eigenvalue".into()));
    }
    let mut coords = vec![[0.0; 2]; n];
    for (dim, col) in [1usize, 2].into_iter().enumerate() {
        let mut v: Vec<f64> = (0..n).map(|i| u[(i, col)]).collect();
        let mean = v.iter().sum::<f64>() / n as f64;
        v.iter_mut().for_each(|x| *x -= mean);
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::EigenFailure(
                "degenerate embedding coordinate".into(),
            ));
        }
        let pivot = v.iter().enumerate().fold((0, 0.0f64), |best, (i, x)| {
            if x.abs() > best.1.abs() {
                (i, *x)
            } else {
                best
            }
        });
        let sign = if pivot.1 < 0.0 { -1.0 } else { 1.0 };
        let scale = sign * (n as f64).sqrt() / norm;
        for (c, x) in coords.iter_mut().zip(&v) {
            c[dim] = x * scale;
        }
    }
    Ok(Embedding2D {
        coords,
        altitudes,
        dims,
        eigenvalues,
        k: w.k(),
        seed: 0,
    })
}
