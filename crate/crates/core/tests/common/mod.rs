//! Brute-force oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::HashSet;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use terrain_coverage::breach::{ContourGraph, Side};
use terrain_coverage::grid::{Connectivity, Grid};
use terrain_coverage::manifold::{knn, WeightMatrix};
use terrain_coverage::watershed::{GrayImage, WatershedResult};

/// Standard normal CDF from the Taylor series of `exp(-z^2/2)`'s integral,
/// summed until the terms vanish. Accurate to about 1e-15 for |z| <= 8.
pub fn cdf_series(z: f64) -> f64 {
    if z < 0.0 {
        return 1.0 - cdf_series(-z);
    }
    let mut term = z;
    let mut sum = z;
    let mut n = 1.0;
    while term > sum * 1e-18 {
        term *= z * z / (2.0 * n + 1.0);
        sum += term;
        n += 1.0;
    }
    0.5 + sum * (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

fn dense_i_minus_w(w: &WeightMatrix) -> DMatrix<f64> {
    let n = w.n();
    let mut iw = DMatrix::<f64>::identity(n, n);
    for i in 0..n {
        for j in 0..n {
            iw[(i, j)] -= w.get(i, j);
        }
    }
    iw
}

/// Ascending eigenpairs of the dense LLE cost matrix `(I - W)^T (I - W)`.
pub fn dense_cost_eigen(w: &WeightMatrix) -> (Vec<f64>, DMatrix<f64>) {
    let eig = SymmetricEigen::new(dense_cost_matrix(w));
    let n = w.n();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// Ascending eigenpairs of the cost matrix as squared singular values and
/// right singular vectors of `I - W`. Small eigenvalues come out with full
/// relative precision, unlike a dense eigen-solve of the product.
pub fn svd_cost_eigen(w: &WeightMatrix) -> (Vec<f64>, DMatrix<f64>) {
    let svd = dense_i_minus_w(w).svd(false, true);
    let v_t = svd.v_t.unwrap();
    let n = w.n();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| svd.singular_values[a].total_cmp(&svd.singular_values[b]));
    let values = order
        .iter()
        .map(|&i| svd.singular_values[i].powi(2))
        .collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| v_t[(order[c], r)]);
    (values, vectors)
}

pub fn dense_cost_matrix(w: &WeightMatrix) -> DMatrix<f64> {
    let iw = dense_i_minus_w(w);
    iw.transpose() * &iw
}

/// Mean Jaccard overlap of the k-NN sets of `a` and `b`.
pub fn knn_jaccard(a: &[[f64; 3]], b: &[[f64; 3]], k: usize) -> f64 {
    let na = knn(a, k).unwrap();
    let nb = knn(b, k).unwrap();
    let total: f64 = (0..a.len())
        .map(|i| {
            let sa: HashSet<_> = na.of(i).iter().collect();
            let sb: HashSet<_> = nb.of(i).iter().collect();
            sa.intersection(&sb).count() as f64 / sa.union(&sb).count() as f64
        })
        .sum();
    total / a.len() as f64
}

pub fn random_points(rng: &mut impl Rng, n: usize, scale: f64) -> Vec<[f64; 3]> {
    (0..n)
        .map(|_| {
            [
                rng.gen_range(0.0..scale),
                rng.gen_range(0.0..scale),
                rng.gen_range(0.0..scale),
            ]
        })
        .collect()
}

/// Image with all-distinct gray values, so every regional minimum is a
/// single strict-minimum pixel.
pub fn distinct_image(rng: &mut impl Rng, rows: usize, cols: usize) -> GrayImage {
    let n = rows * cols;
    let mut values: Vec<u32> = (0..n as u32).collect();
    for i in (1..n).rev() {
        values.swap(i, rng.gen_range(0..=i));
    }
    GrayImage::new(Grid::from_vec(rows, cols, values).unwrap(), n as u32).unwrap()
}

pub fn strict_minima(img: &GrayImage, conn: Connectivity) -> Vec<(usize, usize)> {
    let (rows, cols) = img.pixels.dims();
    let mut out = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            let v = *img.pixels.get(r, c);
            if conn
                .neighbors(rows, cols, r, c)
                .all(|(nr, nc)| *img.pixels.get(nr, nc) > v)
            {
                out.push((r, c));
            }
        }
    }
    out
}

/// Follows the lowest strictly-lower non-contour neighbor until none is left.
pub fn descend(
    img: &GrayImage,
    ws: &WatershedResult,
    conn: Connectivity,
    start: (usize, usize),
) -> (usize, usize) {
    let (rows, cols) = img.pixels.dims();
    let mut at = start;
    loop {
        let here = *img.pixels.get(at.0, at.1);
        let next = conn
            .neighbors(rows, cols, at.0, at.1)
            .filter(|&(r, c)| !ws.is_contour(r, c) && *img.pixels.get(r, c) < here)
            .min_by_key(|&(r, c)| *img.pixels.get(r, c));
        match next {
            Some(p) => at = p,
            None => return at,
        }
    }
}

/// Random pixel subset of a `rows x cols` grid with random weights.
pub fn random_graph(
    rng: &mut impl Rng,
    rows: usize,
    cols: usize,
    max_nodes: usize,
) -> ContourGraph {
    let mut cells: Vec<(usize, usize)> = (0..rows)
        .flat_map(|r| (0..cols).map(move |c| (r, c)))
        .collect();
    for i in (1..cells.len()).rev() {
        cells.swap(i, rng.gen_range(0..=i));
    }
    let count = rng.gen_range(1..=max_nodes.min(cells.len()));
    cells.truncate(count);
    let weights: Vec<f64> = (0..count).map(|_| rng.gen_range(0.0..1.0)).collect();
    ContourGraph::from_pixels((rows, cols), &cells, &weights).unwrap()
}

/// Pixel adjacency recomputed by a pair scan.
pub fn adjacent(a: (usize, usize), b: (usize, usize)) -> bool {
    a != b && a.0.abs_diff(b.0) <= 1 && a.1.abs_diff(b.1) <= 1
}

/// Minimum node-weight sum over all simple paths from a `start`-side node
/// to an `end`-side node, by depth-first enumeration. Pruning on the running
/// sum is exact because weights are nonnegative.
pub fn enumerate_min_sum(g: &ContourGraph, start: Side, end: Side) -> Option<f64> {
    let n = g.len();
    let adj: Vec<Vec<usize>> = (0..n)
        .map(|u| (0..n).filter(|&v| adjacent(g.node(u), g.node(v))).collect())
        .collect();
    let mut best: Option<f64> = None;
    let mut on_path = vec![false; n];
    fn dfs(
        g: &ContourGraph,
        adj: &[Vec<usize>],
        end: Side,
        u: usize,
        sum: f64,
        on_path: &mut [bool],
        best: &mut Option<f64>,
    ) {
        if best.is_some_and(|b| sum > b) {
            return;
        }
        if g.on_side(u, end) {
            *best = Some(best.map_or(sum, |b| b.min(sum)));
        }
        on_path[u] = true;
        for &v in &adj[u] {
            if !on_path[v] {
                dfs(g, adj, end, v, sum + g.weight(v), on_path, best);
            }
        }
        on_path[u] = false;
    }
    for s in (0..n).filter(|&s| g.on_side(s, start)) {
        dfs(g, &adj, end, s, g.weight(s), &mut on_path, &mut best);
    }
    best
}

/// Minimum node-weight sum from `s` to every node over all simple paths.
pub fn enumerate_from(g: &ContourGraph, s: usize) -> Vec<Option<f64>> {
    let n = g.len();
    let mut best = vec![None::<f64>; n];
    let mut on_path = vec![false; n];
    fn dfs(g: &ContourGraph, u: usize, sum: f64, on_path: &mut [bool], best: &mut [Option<f64>]) {
        best[u] = Some(best[u].map_or(sum, |b: f64| b.min(sum)));
        on_path[u] = true;
        for v in 0..g.len() {
            if !on_path[v] && adjacent(g.node(u), g.node(v)) {
                dfs(g, v, sum + g.weight(v), on_path, best);
            }
        }
        on_path[u] = false;
    }
    dfs(g, s, g.weight(s), &mut on_path, &mut best);
    best
}

/// Checks that `nodes` is a simple path in `g` and returns its weight sum.
pub fn path_sum(g: &ContourGraph, nodes: &[usize]) -> f64 {
    let unique: HashSet<_> = nodes.iter().collect();
    assert_eq!(unique.len(), nodes.len(), "path revisits a node");
    for w in nodes.windows(2) {
        assert!(adjacent(g.node(w[0]), g.node(w[1])), "non-adjacent step");
    }
    nodes.iter().map(|&v| g.weight(v)).sum()
}
