//! Locally linear embedding of the terrain point cloud and the pairwise
//! cost value that couples embedded distance with altitude difference.

mod cost;
mod embed;
mod knn;
mod weights;

pub use cost::{cost_value, CostMode, CostParams};
pub use embed::{embed, Embedding2D, EmbeddingScale};
pub use knn::{knn, NeighborTable};
pub use weights::{reconstruction_weights, WeightMatrix, DEFAULT_REG};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::terrain::TerrainGrid;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LleParams {
    pub k: usize,
    /// Relative Tikhonov factor; the local Gram matrix gets
    /// `reg * trace(G) / k` added to its diagonal.
    pub reg: f64,
    pub scale: EmbeddingScale,
}

impl Default for LleParams {
    fn default() -> Self {
        LleParams {
            k: 6,
            reg: DEFAULT_REG,
            scale: EmbeddingScale::NeighborMatched,
        }
    }
}

/// Runs the full reduction from terrain grid to planar embedding.
pub fn reduce_terrain(terrain: &TerrainGrid, params: &LleParams) -> Result<Embedding2D> {
    let points = terrain.points();
    let nbrs = knn(&points, params.k)?;
    let weights = reconstruction_weights(&points, &nbrs, params.reg)?;
    let altitudes = terrain.heights.as_slice().to_vec();
    let mut emb = embed(&weights, altitudes, (terrain.length, terrain.width))?;
    if params.scale == EmbeddingScale::NeighborMatched {
        emb.match_neighbor_scale(&points, &nbrs);
    }
    emb.seed = terrain.seed;
    Ok(emb)
}
