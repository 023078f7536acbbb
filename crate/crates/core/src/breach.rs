//! Breach-path search over the watershed dam pixels.
//!
//! Dam pixels become graph nodes weighted by their detection probability,
//! joined by 8-adjacency. A penetration from one grid border to the
//! opposite one looks for the node path with the smallest weight sum; its
//! worst (largest) weight is the coverage figure `p_opt`. When no such path
//! exists the result falls back to a contour-level estimate.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, VecDeque};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Connectivity, Grid};
use crate::sensing::SensingMap;
use crate::watershed::{contours_of, WatershedResult};

/// Value written for unreachable nodes in serialized distance tables.
pub const UNREACHABLE_SENTINEL: f64 = 65535.0;

/// Relative tolerance under which two path sums count as equal.
const SUM_TIE_TOL: f64 = 1e-12;

/// Grid border. `Top`/`Bottom` are the first/last row (edges 1 and 2),
/// `Left`/`Right` the first/last column (edges 3 and 4).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Top,
    Bottom,
    Left,
    Right,
}

impl Side {
    fn bit(self) -> u8 {
        match self {
            Side::Top => 1,
            Side::Bottom => 2,
            Side::Left => 4,
            Side::Right => 8,
        }
    }

    fn sides_of(r: usize, c: usize, rows: usize, cols: usize) -> u8 {
        let mut bits = 0;
        if r == 0 {
            bits |= Side::Top.bit();
        }
        if r + 1 == rows {
            bits |= Side::Bottom.bit();
        }
        if c == 0 {
            bits |= Side::Left.bit();
        }
        if c + 1 == cols {
            bits |= Side::Right.bit();
        }
        bits
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContourGraph {
    dims: (usize, usize),
    nodes: Vec<(usize, usize)>,
    weights: Vec<f64>,
    adjacency: Vec<Vec<usize>>,
    sides: Vec<u8>,
}

impl ContourGraph {
    /// Graph over arbitrary pixels of a `dims` grid with per-pixel weights.
    pub fn from_pixels(
        dims: (usize, usize),
        pixels: &[(usize, usize)],
        weights: &[f64],
    ) -> Result<Self> {
        if pixels.is_empty() {
            return Err(Error::EmptyContour);
        }
        if pixels.len() != weights.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} pixels but {} weights",
                pixels.len(),
                weights.len()
            )));
        }
        let (rows, cols) = dims;
        let mut lookup: Grid<Option<usize>> = Grid::filled(rows, cols, None);
        for (idx, &(r, c)) in pixels.iter().enumerate() {
            if r >= rows || c >= cols {
                return Err(Error::DimensionMismatch(format!(
                    "pixel ({r}, {c}) outside {rows}x{cols}"
                )));
            }
            if lookup.get(r, c).is_some() {
                return Err(Error::InvalidParameter(format!(
                    "duplicate pixel ({r}, {c})"
                )));
            }
            *lookup.get_mut(r, c) = Some(idx);
        }
        if let Some(w) = weights.iter().find(|w| !(0.0..=1.0).contains(*w)) {
            return Err(Error::InvalidParameter(format!(
                "weight {w} outside [0, 1]"
            )));
        }
        let adjacency = pixels
            .iter()
            .map(|&(r, c)| {
                let mut adj: Vec<usize> = Connectivity::Eight
                    .neighbors(rows, cols, r, c)
                    .filter_map(|(nr, nc)| *lookup.get(nr, nc))
                    .collect();
                adj.sort_unstable();
                adj
            })
            .collect();
        Ok(ContourGraph {
            dims,
            nodes: pixels.to_vec(),
            weights: weights.to_vec(),
            adjacency,
            sides: pixels
                .iter()
                .map(|&(r, c)| Side::sides_of(r, c, rows, cols))
                .collect(),
        })
    }

    pub fn dims(&self) -> (usize, usize) {
        self.dims
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, v: usize) -> (usize, usize) {
        self.nodes[v]
    }

    pub fn nodes(&self) -> &[(usize, usize)] {
        &self.nodes
    }

    pub fn weight(&self, v: usize) -> f64 {
        self.weights[v]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn on_side(&self, v: usize, side: Side) -> bool {
        self.sides[v] & side.bit() != 0
    }

    /// Nodes touching `side`, in node order.
    pub fn side_nodes(&self, side: Side) -> Vec<usize> {
        (0..self.len()).filter(|&v| self.on_side(v, side)).collect()
    }
}

pub fn build_contour_graph(ws: &WatershedResult, map: &SensingMap) -> Result<ContourGraph> {
    if ws.labels.dims() != map.dims {
        return Err(Error::DimensionMismatch(format!(
            "labels {:?} vs sensing map {:?}",
            ws.labels.dims(),
            map.dims
        )));
    }
    let cols = map.dims.1;
    let weights: Vec<f64> = ws
        .contour_pixels
        .iter()
        .map(|&(r, c)| map.probs[r * cols + c])
        .collect();
    ContourGraph::from_pixels(map.dims, &ws.contour_pixels, &weights)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShortestPaths {
    pub source: usize,
    /// Minimal node-weight sum from the source, both ends included.
    pub dist: Vec<Option<f64>>,
    pub parent: Vec<Option<usize>>,
}

impl ShortestPaths {
    /// Nodes from the source to `v`, or `None` if `v` is unreachable.
    pub fn path_to(&self, v: usize) -> Option<Vec<usize>> {
        self.dist[v]?;
        let mut path = vec![v];
        let mut cur = v;
        while let Some(p) = self.parent[cur] {
            path.push(p);
            cur = p;
        }
        path.reverse();
        Some(path)
    }

    /// Distances with unreachable nodes written as [`UNREACHABLE_SENTINEL`].
    pub fn serialized_distances(&self) -> Vec<f64> {
        self.dist
            .iter()
            .map(|d| d.unwrap_or(UNREACHABLE_SENTINEL))
            .collect()
    }
}

#[derive(PartialEq)]
struct Frontier {
    dist: f64,
    node: usize,
}

impl Eq for Frontier {}

impl Ord for Frontier {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for Frontier {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Node-weighted Dijkstra: entering a node costs its weight.
pub fn dijkstra_min_sum(g: &ContourGraph, source: usize) -> ShortestPaths {
    let n = g.len();
    let mut dist: Vec<Option<f64>> = vec![None; n];
    let mut parent = vec![None; n];
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    dist[source] = Some(g.weight(source));
    heap.push(Frontier {
        dist: g.weight(source),
        node: source,
    });
    while let Some(Frontier { dist: d, node: u }) = heap.pop() {
        if done[u] {
            continue;
        }
        done[u] = true;
        for &v in g.neighbors(u) {
            if done[v] {
                continue;
            }
            let nd = d + g.weight(v);
            if dist[v].is_none_or(|old| nd < old) {
                dist[v] = Some(nd);
                parent[v] = Some(u);
                heap.push(Frontier { dist: nd, node: v });
            }
        }
    }
    ShortestPaths {
        source,
        dist,
        parent,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Branch {
    /// An edge-to-edge contour path exists.
    Path,
    /// No crossing path; minimum over junction-touched contour maxima.
    ContourWeight,
    /// No crossing path and no junctions; maximum over all contour nodes.
    GlobalMax,
}

impl Branch {
    pub fn as_str(self) -> &'static str {
        match self {
            Branch::Path => "PATH",
            Branch::ContourWeight => "CONTOUR_WEIGHT",
            Branch::GlobalMax => "GLOBAL_MAX",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// Top to bottom.
    Longitudinal,
    /// Left to right.
    Cross,
}

impl Direction {
    pub fn sides(self) -> (Side, Side) {
        match self {
            Direction::Longitudinal => (Side::Top, Side::Bottom),
            Direction::Cross => (Side::Left, Side::Right),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Longitudinal => "longitudinal",
            Direction::Cross => "cross",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathRecord {
    pub start: usize,
    pub end: usize,
    pub sum_weight: f64,
    /// Node indices from `start` to `end`.
    pub nodes: Vec<usize>,
}

impl PathRecord {
    pub fn max_weight(&self, g: &ContourGraph) -> f64 {
        self.nodes
            .iter()
            .map(|&v| g.weight(v))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn cells(&self, g: &ContourGraph) -> Vec<(usize, usize)> {
        self.nodes.iter().map(|&v| g.node(v)).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BreachResult {
    pub p_opt: f64,
    pub path: Option<PathRecord>,
    pub branch: Branch,
    pub direction: Direction,
}

/// Best edge-to-edge path from `start` to `end`, or a fallback estimate.
pub fn penetrate(g: &ContourGraph, start: Side, end: Side) -> Result<BreachResult> {
    if g.is_empty() {
        return Err(Error::EmptyContour);
    }
    if start == end {
        return Err(Error::InvalidParameter(
            "start and end sides must differ".into(),
        ));
    }
    let direction = match (start, end) {
        (Side::Left, _) | (Side::Right, _) => Direction::Cross,
        _ => Direction::Longitudinal,
    };
    let terminals = g.side_nodes(end);
    let sources = if terminals.is_empty() {
        Vec::new()
    } else {
        g.side_nodes(start)
    };

    let runs: Vec<ShortestPaths> = sources
        .par_iter()
        .map(|&s| dijkstra_min_sum(g, s))
        .collect();
    let candidates: Vec<(usize, usize, f64)> = runs
        .iter()
        .flat_map(|sp| {
            terminals
                .iter()
                .filter_map(move |&t| sp.dist[t].map(|d| (sp.source, t, d)))
        })
        .collect();

    if let Some(best_sum) = candidates.iter().map(|c| c.2).min_by(f64::total_cmp) {
        let tol = SUM_TIE_TOL * best_sum.abs().max(1.0);
        let mut best: Option<(f64, PathRecord)> = None;
        for (run, t, d) in candidates
            .iter()
            .filter(|c| c.2 <= best_sum + tol)
            .map(|&(s, t, d)| (runs.iter().find(|r| r.source == s).unwrap(), t, d))
        {
            let record = PathRecord {
                start: run.source,
                end: t,
                sum_weight: d,
                nodes: run.path_to(t).expect("terminal reachable"),
            };
            let p = record.max_weight(g);
            let better = match &best {
                None => true,
                Some((bp, br)) => p
                    .total_cmp(bp)
                    .then_with(|| g.node(record.start).cmp(&g.node(br.start)))
                    .then_with(|| g.node(record.end).cmp(&g.node(br.end)))
                    .is_lt(),
            };
            if better {
                best = Some((p, record));
            }
        }
        let (p_opt, record) = best.expect("at least one candidate");
        return Ok(BreachResult {
            p_opt,
            path: Some(record),
            branch: Branch::Path,
            direction,
        });
    }

    let (p_opt, branch) = fallback_estimate(g);
    Ok(BreachResult {
        p_opt,
        path: None,
        branch,
        direction,
    })
}

/// Estimate used when no penetrating path exists. Components of the dam
/// graph that contain a junction (degree >= 3) are scored by their largest
/// weight and the smallest score wins; without junctions the largest weight
/// overall is used.
fn fallback_estimate(g: &ContourGraph) -> (f64, Branch) {
    let n = g.len();
    let mut component = vec![usize::MAX; n];
    let mut scores = Vec::new();
    for seed in 0..n {
        if component[seed] != usize::MAX {
            continue;
        }
        let id = scores.len();
        let mut has_junction = false;
        let mut max_w = f64::NEG_INFINITY;
        let mut queue = VecDeque::from([seed]);
        component[seed] = id;
        while let Some(u) = queue.pop_front() {
            has_junction |= g.degree(u) > 2;
            max_w = max_w.max(g.weight(u));
            for &v in g.neighbors(u) {
                if component[v] == usize::MAX {
                    component[v] = id;
                    queue.push_back(v);
                }
            }
        }
        scores.push((has_junction, max_w));
    }
    let junction_min = scores
        .iter()
        .filter(|s| s.0)
        .map(|s| s.1)
        .min_by(f64::total_cmp);
    match junction_min {
        Some(p) => (p, Branch::ContourWeight),
        None => (
            g.weights()
                .iter()
                .cloned()
                .fold(f64::NEG_INFINITY, f64::max),
            Branch::GlobalMax,
        ),
    }
}

/// Runs both penetrations and keeps the one with the smaller `p_opt`;
/// ties go to the longitudinal one.
pub fn optimal_breach(g: &ContourGraph) -> Result<BreachResult> {
    let longitudinal = penetrate(g, Side::Top, Side::Bottom)?;
    let cross = penetrate(g, Side::Left, Side::Right)?;
    Ok(if cross.p_opt < longitudinal.p_opt {
        cross
    } else {
        longitudinal
    })
}

/// Watershed, contour graph and optimal breach for a sensing map.
pub fn evaluate_map(
    map: &SensingMap,
    levels: u32,
    conn: Connectivity,
) -> Result<(WatershedResult, ContourGraph, BreachResult)> {
    let ws = contours_of(map, levels, conn)?;
    let graph = build_contour_graph(&ws, map)?;
    let breach = optimal_breach(&graph)?;
    Ok((ws, graph, breach))
}

/// Serializable summary of a [`BreachResult`]; path cells are 0-based
/// `[row, col]` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BreachReport {
    pub direction: Direction,
    pub branch: Branch,
    pub p_opt: f64,
    pub path: Vec<(usize, usize)>,
    pub sum_weight: Option<f64>,
}

impl BreachReport {
    pub fn new(result: &BreachResult, g: &ContourGraph) -> Self {
        BreachReport {
            direction: result.direction,
            branch: result.branch,
            p_opt: result.p_opt,
            path: result.path.as_ref().map(|p| p.cells(g)).unwrap_or_default(),
            sum_weight: result.path.as_ref().map(|p| p.sum_weight),
        }
    }
}
