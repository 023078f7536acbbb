//! Sensor deployment, the exponential perceived-probability model and the
//! fused sensing map.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::manifold::{cost_value, CostParams, Embedding2D};

/// Per-node detection model.
///
/// A node at `i` sees point `j` with probability `exp(-beta * d) / alpha`
/// when the cost value between them is at most `cost.a` and `d <= d_r`;
/// otherwise it does not see `j` at all.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensingModel {
    pub alpha: f64,
    pub beta: f64,
    pub cost: CostParams,
    /// Hard sensing radius. `None` disables the cutoff.
    pub d_r: Option<f64>,
}

impl Default for SensingModel {
    fn default() -> Self {
        SensingModel {
            alpha: 3.0,
            beta: 0.2,
            cost: CostParams::default(),
            d_r: Some(10.0),
        }
    }
}

impl SensingModel {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if self.alpha.is_nan() || self.alpha < 1.0 {
            return bad(format!("alpha must be >= 1, got {}", self.alpha));
        }
        if self.beta.is_nan() || self.beta <= 0.0 {
            return bad(format!("beta must be > 0, got {}", self.beta));
        }
        if !(self.cost.a > 0.0 && self.cost.epsilon_h > 0.0) {
            return bad(format!(
                "cost factor and epsilon must be > 0, got {} and {}",
                self.cost.a, self.cost.epsilon_h
            ));
        }
        if let Some(r) = self.d_r {
            if r.is_nan() || r <= 0.0 {
                return bad(format!("d_r must be > 0, got {r}"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Deployment {
    /// Grid-point indices (row-major) hosting a sensor.
    pub nodes: Vec<usize>,
    pub seed: u64,
}

/// Samples `count` distinct grid points out of `n`, uniformly.
pub fn deploy_uniform(seed: u64, count: usize, n: usize) -> Result<Deployment> {
    if count > n {
        return Err(Error::TooManyNodes { count, n });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nodes = rand::seq::index::sample(&mut rng, n, count).into_vec();
    Ok(Deployment { nodes, seed })
}

pub fn perceived_probability(
    model: &SensingModel,
    emb: &Embedding2D,
    node: usize,
    target: usize,
) -> f64 {
    let d = emb.distance(node, target);
    if model.d_r.is_some_and(|r| d > r) {
        return 0.0;
    }
    if cost_value(emb, node, target, &model.cost) > model.cost.a {
        return 0.0;
    }
    (-model.beta * d).exp() / model.alpha
}

/// Probability that at least one of several independent detectors fires,
/// `1 - prod(1 - p)`, accumulated as `acc + p * (1 - acc)`.
pub fn fuse(probs: impl IntoIterator<Item = f64>) -> f64 {
    probs.into_iter().fold(0.0, |acc, p| acc + p * (1.0 - acc))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensingMap {
    /// Fused detection probability per grid point, row-major.
    pub probs: Vec<f64>,
    pub dims: (usize, usize),
    pub deployment: Deployment,
    pub model: Option<SensingModel>,
}

impl SensingMap {
    /// Wraps precomputed probabilities, e.g. read back from a file.
    pub fn from_probs(dims: (usize, usize), probs: Vec<f64>) -> Result<Self> {
        if dims.0 * dims.1 != probs.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} probabilities for a {}x{} grid",
                probs.len(),
                dims.0,
                dims.1
            )));
        }
        if let Some(p) = probs.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(Error::InvalidParameter(format!(
                "probability {p} outside [0, 1]"
            )));
        }
        Ok(SensingMap {
            probs,
            dims,
            deployment: Deployment {
                nodes: Vec::new(),
                seed: 0,
            },
            model: None,
        })
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// Number of points whose probability reaches `threshold`.
    pub fn covered_count(&self, threshold: f64) -> usize {
        self.probs.iter().filter(|&&p| p >= threshold).count()
    }
}

pub fn sensing_map(
    model: &SensingModel,
    emb: &Embedding2D,
    deployment: &Deployment,
) -> Result<SensingMap> {
    model.validate()?;
    let n = emb.len();
    if let Some(&bad) = deployment.nodes.iter().find(|&&i| i >= n) {
        return Err(Error::InvalidParameter(format!(
            "node index {bad} out of range 0..{n}"
        )));
    }
    let probs = (0..n)
        .into_par_iter()
        .map(|j| {
            fuse(
                deployment
                    .nodes
                    .iter()
                    .map(|&i| perceived_probability(model, emb, i, j)),
            )
        })
        .collect();
    Ok(SensingMap {
        probs,
        dims: emb.dims,
        deployment: deployment.clone(),
        model: Some(*model),
    })
}

/// Fraction of grid points whose fused probability is at least `p_t`.
pub fn coverage_ratio(map: &SensingMap, p_t: f64) -> f64 {
    if map.is_empty() {
        return 0.0;
    }
    map.covered_count(p_t) as f64 / map.len() as f64
}

/// Missed-detection probability `1 - P_j` per point.
pub fn missed_map(map: &SensingMap) -> Vec<f64> {
    map.probs.iter().map(|p| 1.0 - p).collect()
}
