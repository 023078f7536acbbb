//! Seeded experiment runner.
//!
//! A sweep fixes one terrain per master seed, embeds it once per distinct
//! `k`, and runs `trials` independent deployments at every grid value of
//! the swept parameter. Trial seeds are derived from
//! `(master seed, value, trial index)`, so results do not depend on how
//! trials are scheduled across threads.

mod config;
mod emit;

pub use config::{ExperimentConfig, SweepAxis};
pub use emit::{emit, RAW_HEADER, SWEEP_HEADER};

use std::collections::BTreeMap;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::breach::{evaluate_map, Branch, Direction};
use crate::error::{Error, Result};
use crate::manifold::{reduce_terrain, Embedding2D};
use crate::sensing::{coverage_ratio, deploy_uniform, sensing_map};
use crate::terrain::{generate_terrain, TerrainGrid};

const TERRAIN_STREAM: u64 = 0x7465_7272_6169_6e00;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Order-sensitive combination of two seeds.
pub fn mix_seed(a: u64, b: u64) -> u64 {
    splitmix64(a ^ splitmix64(b))
}

pub fn trial_seed(master: u64, value: f64, trial: usize) -> u64 {
    mix_seed(mix_seed(master, value.to_bits()), trial as u64)
}

pub fn terrain_seed(master: u64) -> u64 {
    mix_seed(master, TERRAIN_STREAM)
}

/// Terrain and its embeddings, shared read-only by all trials of a sweep.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub terrain: Arc<TerrainGrid>,
    embeddings: BTreeMap<usize, Arc<Embedding2D>>,
}

impl Scenario {
    /// Builds the terrain from `seed` and embeds it for every `k` listed.
    pub fn build(cfg: &ExperimentConfig, seed: u64, ks: &[usize]) -> Result<Self> {
        let terrain = generate_terrain(seed, &cfg.peak_params(), cfg.length, cfg.width)?;
        let mut embeddings = BTreeMap::new();
        for &k in ks {
            if let std::collections::btree_map::Entry::Vacant(e) = embeddings.entry(k) {
                let params = crate::manifold::LleParams {
                    k,
                    ..cfg.lle_params()
                };
                e.insert(Arc::new(reduce_terrain(&terrain, &params)?));
            }
        }
        Ok(Scenario {
            terrain: Arc::new(terrain),
            embeddings,
        })
    }

    pub fn embedding(&self, k: usize) -> Option<&Arc<Embedding2D>> {
        self.embeddings.get(&k)
    }
}

/// Outcome of one deployment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub value: f64,
    pub trial: usize,
    pub seed: u64,
    /// Points meeting `p_t`, and all points.
    pub covered: Option<usize>,
    pub total: usize,
    pub coverage_ratio: Option<f64>,
    pub p_opt: Option<f64>,
    pub branch: Option<Branch>,
    pub direction: Option<Direction>,
    pub error: Option<String>,
}

impl TrialRecord {
    pub fn failed(&self) -> bool {
        self.error.is_some()
    }
}

/// Runs one trial against a prepared scenario; `cfg` is already set to the
/// sweep value.
pub fn run_trial_in(
    cfg: &ExperimentConfig,
    scenario: &Scenario,
    value: f64,
    trial: usize,
) -> TrialRecord {
    let seed = trial_seed(cfg.seed, value, trial);
    let total = cfg.length * cfg.width;
    let mut record = TrialRecord {
        value,
        trial,
        seed,
        covered: None,
        total,
        coverage_ratio: None,
        p_opt: None,
        branch: None,
        direction: None,
        error: None,
    };
    let fresh;
    let scenario = if cfg.fresh_terrain {
        match Scenario::build(cfg, mix_seed(seed, TERRAIN_STREAM), &[cfg.k]) {
            Ok(s) => {
                fresh = s;
                &fresh
            }
            Err(e) => {
                record.error = Some(e.to_string());
                return record;
            }
        }
    } else {
        scenario
    };
    let result = (|| -> Result<()> {
        let emb = scenario
            .embedding(cfg.k)
            .ok_or_else(|| Error::InvalidParameter(format!("no embedding for k={}", cfg.k)))?;
        let deployment = deploy_uniform(seed, cfg.nodes, emb.len())?;
        let map = sensing_map(&cfg.sensing_model(), emb, &deployment)?;
        record.covered = Some(map.covered_count(cfg.p_t));
        record.coverage_ratio = Some(coverage_ratio(&map, cfg.p_t));
        let (_, _, breach) = evaluate_map(&map, cfg.levels, cfg.connectivity()?)?;
        record.p_opt = Some(breach.p_opt);
        record.branch = Some(breach.branch);
        record.direction = Some(breach.direction);
        Ok(())
    })();
    if let Err(e) = result {
        record.error = Some(e.to_string());
    }
    record
}

/// Runs trial `trial` of `cfg` at sweep `value` from scratch.
pub fn run_trial(cfg: &ExperimentConfig, value: f64, trial: usize) -> Result<TrialRecord> {
    let point = cfg.at(value);
    point.validate_point()?;
    let scenario = Scenario::build(&point, terrain_seed(cfg.seed), &[point.k])?;
    Ok(run_trial_in(&point, &scenario, value, trial))
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Aggregate over the trials at one sweep value. Failed trials are
/// excluded from the means and counted in `failures`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub value: f64,
    pub records: Vec<TrialRecord>,
    pub failures: usize,
    pub mean_p_opt: f64,
    pub std_p_opt: f64,
    pub mean_coverage: f64,
    pub std_coverage: f64,
    pub branch_path: usize,
    pub branch_contour_weight: usize,
    pub branch_global_max: usize,
    /// Fractions of successful trials meeting each threshold.
    pub frac_p_opt_ge_p_t: f64,
    pub frac_p_opt_ge_p_thed: f64,
    pub frac_coverage_ge_p_thed: f64,
}

impl SweepPoint {
    pub fn aggregate(value: f64, records: Vec<TrialRecord>, p_t: f64, p_thed: f64) -> Self {
        let ok: Vec<&TrialRecord> = records.iter().filter(|r| !r.failed()).collect();
        let p: Vec<f64> = ok.iter().filter_map(|r| r.p_opt).collect();
        let cov: Vec<f64> = ok.iter().filter_map(|r| r.coverage_ratio).collect();
        let (mean_p_opt, std_p_opt) = mean_std(&p);
        let (mean_coverage, std_coverage) = mean_std(&cov);
        let tally = |b: Branch| ok.iter().filter(|r| r.branch == Some(b)).count();
        let frac = |hits: usize| {
            if ok.is_empty() {
                f64::NAN
            } else {
                hits as f64 / ok.len() as f64
            }
        };
        SweepPoint {
            value,
            failures: records.len() - ok.len(),
            mean_p_opt,
            std_p_opt,
            mean_coverage,
            std_coverage,
            branch_path: tally(Branch::Path),
            branch_contour_weight: tally(Branch::ContourWeight),
            branch_global_max: tally(Branch::GlobalMax),
            frac_p_opt_ge_p_t: frac(p.iter().filter(|&&x| x >= p_t).count()),
            frac_p_opt_ge_p_thed: frac(p.iter().filter(|&&x| x >= p_thed).count()),
            frac_coverage_ge_p_thed: frac(cov.iter().filter(|&&x| x >= p_thed).count()),
            records,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub axis: SweepAxis,
    pub points: Vec<SweepPoint>,
}

impl SweepResult {
    pub fn empty(axis: SweepAxis) -> Self {
        SweepResult {
            axis,
            points: Vec::new(),
        }
    }
}

/// Runs the full sweep on `jobs` worker threads (0 picks the default).
pub fn sweep(cfg: &ExperimentConfig, jobs: usize) -> Result<SweepResult> {
    cfg.validate()?;
    let values = cfg.sweep_values();
    let points: Vec<ExperimentConfig> = values.iter().map(|&v| cfg.at(v)).collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
    pool.install(|| {
        let scenario = if cfg.fresh_terrain {
            None
        } else {
            let ks: Vec<usize> = points.iter().map(|p| p.k).collect();
            Some(Scenario::build(cfg, terrain_seed(cfg.seed), &ks)?)
        };
        let placeholder;
        let scenario_ref = match &scenario {
            Some(s) => s,
            None => {
                // Trials build their own terrain; this one is never read.
                placeholder = Scenario {
                    terrain: Arc::new(TerrainGrid {
                        length: 0,
                        width: 0,
                        heights: crate::grid::Grid::filled(0, 0, 0.0),
                        peaks: Vec::new(),
                        seed: 0,
                    }),
                    embeddings: BTreeMap::new(),
                };
                &placeholder
            }
        };
        let tasks: Vec<(usize, usize)> = (0..values.len())
            .flat_map(|vi| (0..cfg.trials).map(move |t| (vi, t)))
            .collect();
        let records: Vec<TrialRecord> = tasks
            .par_iter()
            .map(|&(vi, t)| run_trial_in(&points[vi], scenario_ref, values[vi], t))
            .collect();
        let mut chunks = records.chunks(cfg.trials);
        let points = values
            .iter()
            .map(|&v| {
                let recs = chunks.next().map(<[_]>::to_vec).unwrap_or_default();
                SweepPoint::aggregate(v, recs, cfg.p_t, cfg.p_thed)
            })
            .collect();
        Ok(SweepResult {
            axis: cfg.axis,
            points,
        })
    })
}
