//! Immersion watershed (Vincent and Soille) on a quantized image.
//!
//! Pixels are visited level by level in increasing gray value. At each
//! level the already-flooded basins grow into the new pixels through a FIFO
//! ordered by geodesic distance; a pixel reached from two different basins
//! becomes a dam (`CONTOUR`), and pixels no basin reaches start new basins.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Connectivity, Grid};
use crate::sensing::{missed_map, SensingMap};

/// Label of dam pixels between catchment basins.
pub const CONTOUR: i32 = -1;
const MASK: i32 = -2;
const INIT: i32 = -3;

pub const DEFAULT_LEVELS: u32 = 256;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GrayImage {
    pub pixels: Grid<u32>,
    pub levels: u32,
}

impl GrayImage {
    pub fn new(pixels: Grid<u32>, levels: u32) -> Result<Self> {
        if levels < 2 {
            return Err(Error::InvalidParameter(format!(
                "need >= 2 levels, got {levels}"
            )));
        }
        if let Some(v) = pixels.as_slice().iter().find(|&&v| v >= levels) {
            return Err(Error::InvalidParameter(format!(
                "gray value {v} outside 0..{levels}"
            )));
        }
        Ok(GrayImage { pixels, levels })
    }
}

/// Maps `v` in `[0, 1]` to `round(v * (levels - 1))`, row-major onto `dims`.
pub fn quantize(miss: &[f64], dims: (usize, usize), levels: u32) -> Result<GrayImage> {
    if levels < 2 {
        return Err(Error::InvalidParameter(format!(
            "need >= 2 levels, got {levels}"
        )));
    }
    let top = (levels - 1) as f64;
    let values = miss
        .iter()
        .map(|&v| (v.clamp(0.0, 1.0) * top + 0.5).floor() as u32)
        .collect();
    let pixels = Grid::from_vec(dims.0, dims.1, values).ok_or_else(|| {
        Error::DimensionMismatch(format!(
            "{} values for a {}x{} image",
            miss.len(),
            dims.0,
            dims.1
        ))
    })?;
    Ok(GrayImage { pixels, levels })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WatershedResult {
    /// Basin id `>= 1` per pixel, or [`CONTOUR`].
    pub labels: Grid<i32>,
    pub basin_count: usize,
    /// Dam pixels `(row, col)` in scan order.
    pub contour_pixels: Vec<(usize, usize)>,
}

impl WatershedResult {
    pub fn is_contour(&self, r: usize, c: usize) -> bool {
        *self.labels.get(r, c) == CONTOUR
    }
}

pub fn watershed(img: &GrayImage, conn: Connectivity) -> WatershedResult {
    let (rows, cols) = img.pixels.dims();
    let n = rows * cols;
    let gray = img.pixels.as_slice();
    let mut lab = vec![INIT; n];
    let mut dist = vec![0u32; n];

    // Counting sort keeps scan order inside each level.
    let mut by_level: Vec<Vec<usize>> = vec![Vec::new(); img.levels as usize];
    for (p, &g) in gray.iter().enumerate() {
        by_level[g as usize].push(p);
    }

    let nbrs = |p: usize| {
        conn.neighbors(rows, cols, p / cols, p % cols)
            .map(move |(r, c)| r * cols + c)
    };

    let mut fifo: VecDeque<Option<usize>> = VecDeque::new();
    let mut current = 0i32;
    for level in by_level.iter().filter(|l| !l.is_empty()) {
        for &p in level {
            lab[p] = MASK;
            if nbrs(p).any(|q| lab[q] > 0 || lab[q] == CONTOUR) {
                dist[p] = 1;
                fifo.push_back(Some(p));
            }
        }

        let mut curdist = 1u32;
        fifo.push_back(None);
        loop {
            let p = match fifo.pop_front().flatten() {
                Some(p) => p,
                None => {
                    if fifo.is_empty() {
                        break;
                    }
                    fifo.push_back(None);
                    curdist += 1;
                    match fifo.pop_front().flatten() {
                        Some(p) => p,
                        None => continue,
                    }
                }
            };
            // Set while `p` is a dam only because it touches another dam;
            // a basin reaching it later may still claim it.
            let mut soft_dam = false;
            for q in nbrs(p) {
                if dist[q] < curdist && (lab[q] > 0 || lab[q] == CONTOUR) {
                    if lab[q] > 0 {
                        if lab[p] == MASK || (lab[p] == CONTOUR && soft_dam) {
                            lab[p] = lab[q];
                            soft_dam = false;
                        } else if lab[p] > 0 && lab[p] != lab[q] {
                            lab[p] = CONTOUR;
                            soft_dam = false;
                        }
                    } else if lab[p] == MASK {
                        lab[p] = CONTOUR;
                        soft_dam = true;
                    }
                } else if lab[q] == MASK && dist[q] == 0 {
                    dist[q] = curdist + 1;
                    fifo.push_back(Some(q));
                }
            }
        }

        // Whatever is still masked starts a new basin.
        for &p in level {
            dist[p] = 0;
            if lab[p] == MASK {
                current += 1;
                lab[p] = current;
                let mut queue = VecDeque::from([p]);
                while let Some(q) = queue.pop_front() {
                    for r in nbrs(q) {
                        if lab[r] == MASK {
                            lab[r] = current;
                            queue.push_back(r);
                        }
                    }
                }
            }
        }
    }

    let contour_pixels = (0..n)
        .filter(|&p| lab[p] == CONTOUR)
        .map(|p| (p / cols, p % cols))
        .collect();
    WatershedResult {
        labels: Grid::from_vec(rows, cols, lab).expect("label grid matches image"),
        basin_count: current as usize,
        contour_pixels,
    }
}

/// Watershed of the quantized missed-detection image of `map`.
pub fn contours_of(map: &SensingMap, levels: u32, conn: Connectivity) -> Result<WatershedResult> {
    let img = quantize(&missed_map(map), map.dims, levels)?;
    Ok(watershed(&img, conn))
}
