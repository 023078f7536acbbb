//! Plain-text file formats.
//!
//! Grid files (terrain heights, sensing maps, labels) start with a header
//! line `L W seed` followed by `L` rows of `W` space-separated values. Rows
//! are written top to bottom, so the first value of the file is grid point
//! `(1, 1)` and row/column positions in the file are 0-based. Lines starting
//! with `#` are comments.
//!
//! Embedding files start with `N k seed`, then a `# grid L W` line, then one
//! `index x y altitude` row per point.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::manifold::Embedding2D;
use crate::sensing::SensingMap;
use crate::terrain::TerrainGrid;
use crate::watershed::WatershedResult;

/// Formats `v` with 9 significant digits.
pub fn format_sig9(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    let exp = v.abs().log10().floor() as i32;
    if (-5..15).contains(&exp) {
        format!("{:.*}", (8 - exp).max(0) as usize, v)
    } else {
        format!("{v:.8e}")
    }
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

/// Non-comment, non-blank lines with their 1-based line numbers.
fn data_lines(r: impl BufRead) -> Result<Vec<(usize, String)>> {
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        let t = line.trim();
        if !t.is_empty() && !t.starts_with('#') {
            out.push((i + 1, t.to_string()));
        }
    }
    Ok(out)
}

fn parse_fields<T: std::str::FromStr>(line: usize, text: &str) -> Result<Vec<T>> {
    text.split_whitespace()
        .map(|tok| {
            tok.parse::<T>()
                .map_err(|_| parse_err(line, format!("bad value `{tok}`")))
        })
        .collect()
}

fn write_grid<T>(
    w: &mut impl Write,
    grid: &Grid<T>,
    tag: u64,
    fmt: impl Fn(&T) -> String,
) -> Result<()> {
    writeln!(w, "{} {} {}", grid.rows(), grid.cols(), tag)?;
    for r in 0..grid.rows() {
        let row: Vec<String> = grid.row(r).iter().map(&fmt).collect();
        writeln!(w, "{}", row.join(" "))?;
    }
    Ok(())
}

fn read_grid<T: std::str::FromStr>(r: impl BufRead) -> Result<(Grid<T>, u64)> {
    let lines = data_lines(r)?;
    let (hline, header) = lines
        .first()
        .ok_or_else(|| parse_err(1, "missing header"))?;
    let h: Vec<u64> = parse_fields(*hline, header)?;
    let [rows, cols, tag] = h[..] else {
        return Err(parse_err(*hline, "header must be `L W seed`"));
    };
    let (rows, cols) = (rows as usize, cols as usize);
    if lines.len() - 1 != rows {
        return Err(parse_err(
            *hline,
            format!("expected {rows} rows, found {}", lines.len() - 1),
        ));
    }
    let mut data = Vec::with_capacity(rows * cols);
    for (ln, text) in &lines[1..] {
        let row: Vec<T> = parse_fields(*ln, text)?;
        if row.len() != cols {
            return Err(parse_err(
                *ln,
                format!("expected {cols} values, found {}", row.len()),
            ));
        }
        data.extend(row);
    }
    Ok((Grid::from_vec(rows, cols, data).expect("sized above"), tag))
}

pub fn write_terrain(w: &mut impl Write, t: &TerrainGrid) -> Result<()> {
    write_grid(w, &t.heights, t.seed, |v| format_sig9(*v))
}

/// Reads a terrain grid; the peak list is not stored and comes back empty.
pub fn read_terrain(r: impl BufRead) -> Result<TerrainGrid> {
    let (heights, seed) = read_grid::<f64>(r)?;
    Ok(TerrainGrid {
        length: heights.rows(),
        width: heights.cols(),
        heights,
        peaks: Vec::new(),
        seed,
    })
}

pub fn write_sensing_map(w: &mut impl Write, map: &SensingMap) -> Result<()> {
    let grid = Grid::from_vec(map.dims.0, map.dims.1, map.probs.clone())
        .ok_or_else(|| Error::DimensionMismatch("sensing map size".into()))?;
    write_grid(w, &grid, map.deployment.seed, |v| format_sig9(*v))
}

pub fn read_sensing_map(r: impl BufRead) -> Result<SensingMap> {
    let (grid, seed) = read_grid::<f64>(r)?;
    let mut map = SensingMap::from_probs(grid.dims(), grid.into_vec())?;
    map.deployment.seed = seed;
    Ok(map)
}

/// Label grid with dams written as `-1`; the header carries the basin count.
pub fn write_labels(w: &mut impl Write, ws: &WatershedResult) -> Result<()> {
    write_grid(w, &ws.labels, ws.basin_count as u64, |v| v.to_string())
}

pub fn read_labels(r: impl BufRead) -> Result<(Grid<i32>, usize)> {
    let (g, count) = read_grid::<i32>(r)?;
    Ok((g, count as usize))
}

pub fn write_embedding(w: &mut impl Write, e: &Embedding2D) -> Result<()> {
    writeln!(w, "{} {} {}", e.len(), e.k, e.seed)?;
    writeln!(w, "# grid {} {}", e.dims.0, e.dims.1)?;
    writeln!(
        w,
        "# eigenvalues {} {} {}",
        e.eigenvalues[0], e.eigenvalues[1], e.eigenvalues[2]
    )?;
    for (i, (c, h)) in e.coords.iter().zip(&e.altitudes).enumerate() {
        writeln!(w, "{i} {} {} {h}", c[0], c[1])?;
    }
    Ok(())
}

/// Reads an embedding. Without a `# grid` line the grid is assumed square.
pub fn read_embedding(r: impl BufRead) -> Result<Embedding2D> {
    let mut dims = None;
    let mut eigenvalues = [0.0; 3];
    let mut rows = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        let t = line.trim();
        if let Some(rest) = t.strip_prefix("# grid") {
            let v: Vec<usize> = parse_fields(i + 1, rest)?;
            if let [l, w] = v[..] {
                dims = Some((l, w));
            }
        } else if let Some(rest) = t.strip_prefix("# eigenvalues") {
            let v: Vec<f64> = parse_fields(i + 1, rest)?;
            if let [a, b, c] = v[..] {
                eigenvalues = [a, b, c];
            }
        } else if !t.is_empty() && !t.starts_with('#') {
            rows.push((i + 1, t.to_string()));
        }
    }
    let (hline, header) = rows.first().ok_or_else(|| parse_err(1, "missing header"))?;
    let h: Vec<u64> = parse_fields(*hline, header)?;
    let [n, k, seed] = h[..] else {
        return Err(parse_err(*hline, "header must be `N k seed`"));
    };
    let n = n as usize;
    let dims = match dims {
        Some(d) => d,
        None => {
            let side = (n as f64).sqrt().round() as usize;
            if side * side != n {
                return Err(parse_err(
                    *hline,
                    "no `# grid L W` line and N is not a square",
                ));
            }
            (side, side)
        }
    };
    if dims.0 * dims.1 != n || rows.len() - 1 != n {
        return Err(parse_err(
            *hline,
            format!("expected {n} points on a {}x{} grid", dims.0, dims.1),
        ));
    }
    let mut coords = vec![[0.0; 2]; n];
    let mut altitudes = vec![0.0; n];
    let mut seen = vec![false; n];
    for (ln, text) in &rows[1..] {
        let f: Vec<f64> = parse_fields(*ln, text)?;
        let [idx, x, y, h] = f[..] else {
            return Err(parse_err(*ln, "row must be `index x y altitude`"));
        };
        let idx = idx as usize;
        if idx >= n || seen[idx] {
            return Err(parse_err(*ln, format!("bad or repeated index {idx}")));
        }
        seen[idx] = true;
        coords[idx] = [x, y];
        altitudes[idx] = h;
    }
    Ok(Embedding2D {
        coords,
        altitudes,
        dims,
        eigenvalues,
        k: k as usize,
        seed,
    })
}
