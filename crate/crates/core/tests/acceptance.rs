//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use terrain_coverage::breach::{optimal_breach, penetrate, Branch, ContourGraph, Side};
use terrain_coverage::grid::Connectivity;
use terrain_coverage::harness::{emit, sweep, ExperimentConfig, SweepAxis, SweepResult};
use terrain_coverage::manifold::{embed, knn, reconstruction_weights, DEFAULT_REG};
use terrain_coverage::sensing::fuse;
use terrain_coverage::terrain::std_normal_cdf;
use terrain_coverage::watershed::{watershed, CONTOUR};

use common::*;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn within(elapsed: Duration, limit: Duration) -> bool {
    elapsed < limit
}

fn criterion_1() -> Outcome {
    let t = Instant::now();
    let mut worst = 0.0f64;
    for i in 0..10_000 {
        let z = -8.0 + 16.0 * i as f64 / 9_999.0;
        worst = worst.max((std_normal_cdf(z) - cdf_series(z)).abs());
    }
    let el = t.elapsed();
    outcome(
        worst <= 1e-7 && within(el, Duration::from_secs(1)),
        format!("max abs error {worst:.3e} over 10000 points in {el:.2?}"),
    )
}

/// Random rotation from a normalized random quaternion.
fn rotation(rng: &mut impl Rng) -> [[f64; 3]; 3] {
    let q: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
    let n = q.iter().map(|x| x * x).sum::<f64>().sqrt();
    let [w, x, y, z] = q.map(|v| v / n);
    [
        [
            1.0 - 2.0 * (y * y + z * z),
            2.0 * (x * y - w * z),
            2.0 * (x * z + w * y),
        ],
        [
            2.0 * (x * y + w * z),
            1.0 - 2.0 * (x * x + z * z),
            2.0 * (y * z - w * x),
        ],
        [
            2.0 * (x * z - w * y),
            2.0 * (y * z + w * x),
            1.0 - 2.0 * (x * x + y * y),
        ],
    ]
}

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut eig_err, mut vec_err, mut row_err, mut rigid_err) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for &n in &[30usize, 60, 100, 150, 200, 200] {
        let k = rng.gen_range(6..=10);
        let pts = random_points(&mut rng, n, 10.0);
        let nb = knn(&pts, k).unwrap();
        let w = reconstruction_weights(&pts, &nb, DEFAULT_REG).unwrap();
        for i in 0..n {
            row_err = row_err.max((w.row(i).1.iter().sum::<f64>() - 1.0).abs());
        }

        let emb = embed(&w, vec![0.0; n], (n, 1)).unwrap();
        let (vals, vecs) = svd_cost_eigen(&w);
        let m = dense_cost_matrix(&w);
        eig_err = eig_err.max((emb.eigenvalues[0] - vals[0]).abs() / vals[1]);
        for d in 1..3 {
            eig_err = eig_err.max((emb.eigenvalues[d] - vals[d]).abs() / vals[d].abs());
            let mut u = nalgebra::DVector::from_fn(n, |i, _| emb.coords[i][d - 1]);
            u /= u.norm();
            let gap = (vals[d] - vals[d - 1]).min(vals[d + 1] - vals[d]);
            let resid = (&m * &u - &u * vals[d]).norm() / vals[n - 1];
            vec_err = vec_err.max(resid);
            if gap > 1e-6 * vals[n - 1] {
                let cos = u.dot(&vecs.column(d)).abs();
                vec_err = vec_err.max(1.0 - cos);
            }
        }

        let rot = rotation(&mut rng);
        let shift: [f64; 3] = std::array::from_fn(|_| rng.gen_range(-50.0..50.0));
        let moved: Vec<[f64; 3]> = pts
            .iter()
            .map(|p| {
                std::array::from_fn(|r| (0..3).map(|c| rot[r][c] * p[c]).sum::<f64>() + shift[r])
            })
            .collect();
        let nb2 = knn(&moved, k).unwrap();
        let w2 = reconstruction_weights(&moved, &nb2, DEFAULT_REG).unwrap();
        for i in 0..n {
            for j in nb.of(i) {
                rigid_err = rigid_err.max((w.get(i, *j) - w2.get(i, *j)).abs());
            }
            assert_eq!(nb.of(i), nb2.of(i), "neighbors changed under rigid motion");
        }
    }
    outcome(
        eig_err <= 1e-8 && vec_err <= 1e-8 && row_err <= 1e-10 && rigid_err <= 1e-8,
        format!(
            "eigenvalue rel err {eig_err:.2e}, eigenvector err {vec_err:.2e}, row-sum err {row_err:.2e}, rigid-motion err {rigid_err:.2e}"
        ),
    )
}

fn criterion_3() -> Outcome {
    let t = Instant::now();
    let pts: Vec<[f64; 3]> = (0..400)
        .map(|i| {
            let (x, y) = ((i / 20) as f64, (i % 20) as f64);
            [x, y, 0.3 * x + 0.5 * y]
        })
        .collect();
    let nb = knn(&pts, 8).unwrap();
    let w = reconstruction_weights(&pts, &nb, DEFAULT_REG).unwrap();
    let emb = embed(&w, pts.iter().map(|p| p[2]).collect(), (20, 20)).unwrap();
    let flat: Vec<[f64; 3]> = emb.coords.iter().map(|c| [c[0], c[1], 0.0]).collect();
    let j = knn_jaccard(&pts, &flat, 8);
    let el = t.elapsed();
    outcome(
        j >= 0.9 && within(el, Duration::from_secs(10)),
        format!("mean 8-NN Jaccard {j:.4} in {el:.2?}"),
    )
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut worst, mut below_max) = (0.0f64, 0usize);
    for _ in 0..1000 {
        let len = rng.gen_range(0..=25);
        let probs: Vec<f64> = (0..len)
            .map(|_| match rng.gen_range(0..10) {
                0 => 0.0,
                1 => 1.0,
                _ => rng.gen_range(0.0..1.0),
            })
            .collect();
        let got = fuse(probs.iter().copied());
        let product = 1.0 - probs.iter().map(|p| 1.0 - p).product::<f64>();
        worst = worst.max((got - product).abs());
        if probs.iter().any(|&p| got < p) {
            below_max += 1;
        }
    }
    outcome(
        worst <= 1e-12 && below_max == 0,
        format!("max |fuse - product| {worst:.2e}, {below_max} instances below max input"),
    )
}

fn criterion_5() -> Outcome {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let conn = Connectivity::Eight;
    let mut failures = Vec::new();
    for case in 0..200 {
        let (rows, cols) = (rng.gen_range(1..=12), rng.gen_range(2..=12));
        let img = distinct_image(&mut rng, rows, cols);
        let ws = watershed(&img, conn);
        let minima = strict_minima(&img, conn);
        let mut labels: Vec<i32> = minima.iter().map(|&(r, c)| *ws.labels.get(r, c)).collect();
        labels.sort_unstable();
        labels.dedup();
        let bijective = labels.len() == minima.len() && labels.iter().all(|&l| l != CONTOUR);
        if ws.basin_count != minima.len() || !bijective {
            failures.push(format!(
                "case {case}: {} basins, {} minima",
                ws.basin_count,
                minima.len()
            ));
            continue;
        }
        'pixels: for r in 0..rows {
            for c in 0..cols {
                if ws.is_contour(r, c) {
                    continue;
                }
                let end = descend(&img, &ws, conn, (r, c));
                if !minima.contains(&end) || ws.labels.get(end.0, end.1) != ws.labels.get(r, c) {
                    failures.push(format!("case {case}: walk from ({r},{c}) ends at {end:?}"));
                    break 'pixels;
                }
            }
        }
    }
    let el = t.elapsed();
    outcome(
        failures.is_empty() && within(el, Duration::from_secs(30)),
        format!(
            "200 images in {el:.2?}, {} failures{}",
            failures.len(),
            failures
                .first()
                .map(|f| format!(" (first: {f})"))
                .unwrap_or_default()
        ),
    )
}

fn criterion_6() -> Outcome {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (mut paths, mut failures) = (0usize, Vec::new());
    for case in 0..200 {
        let (rows, cols) = (rng.gen_range(3..=7), rng.gen_range(3..=7));
        let g = random_graph(&mut rng, rows, cols, 20);
        for (start, end) in [(Side::Top, Side::Bottom), (Side::Left, Side::Right)] {
            let res = penetrate(&g, start, end).unwrap();
            match (enumerate_min_sum(&g, start, end), &res.path) {
                (Some(best), Some(p)) => {
                    paths += 1;
                    let sum = path_sum(&g, &p.nodes);
                    let ok = res.branch == Branch::Path
                        && (p.sum_weight - best).abs() <= 1e-12
                        && (sum - p.sum_weight).abs() <= 1e-12
                        && res.p_opt == p.max_weight(&g)
                        && g.on_side(p.start, start)
                        && g.on_side(p.end, end);
                    if !ok {
                        failures.push(format!(
                            "case {case}: sum {} vs oracle {best}",
                            p.sum_weight
                        ));
                    }
                }
                (None, None) if res.branch != Branch::Path => {}
                (oracle, _) => failures.push(format!(
                    "case {case}: oracle {oracle:?}, branch {:?}",
                    res.branch
                )),
            }
        }
    }
    let el = t.elapsed();
    outcome(
        failures.is_empty() && within(el, Duration::from_secs(60)),
        format!(
            "200 graphs ({paths} PATH penetrations) in {el:.2?}, {} failures{}",
            failures.len(),
            failures
                .first()
                .map(|f| format!(" (first: {f})"))
                .unwrap_or_default()
        ),
    )
}

fn criterion_7() -> Outcome {
    // Junction components inside the field plus a chain on the bottom edge;
    // nothing touches the top or left edge.
    let a = ContourGraph::from_pixels(
        (10, 10),
        &[
            (4, 5),
            (5, 4),
            (5, 5),
            (5, 6),
            (6, 5),
            (7, 1),
            (8, 1),
            (9, 1),
            (1, 8),
            (2, 7),
            (2, 8),
            (2, 9),
        ],
        &[0.2, 0.3, 0.4, 0.3, 0.2, 0.7, 0.8, 0.9, 0.6, 0.5, 0.5, 0.5],
    )
    .unwrap();
    // Degree-two ring and a short segment; no junctions anywhere.
    let b = ContourGraph::from_pixels(
        (10, 10),
        &[(4, 5), (5, 4), (5, 6), (6, 5), (8, 2), (8, 3), (8, 4)],
        &[0.3, 0.35, 0.3, 0.4, 0.5, 0.9, 0.5],
    )
    .unwrap();
    let ra = optimal_breach(&a).unwrap();
    let rb = optimal_breach(&b).unwrap();
    let la = penetrate(&a, Side::Top, Side::Bottom).unwrap();
    let lb = penetrate(&b, Side::Top, Side::Bottom).unwrap();

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut unsound = 0;
    let mut disconnected = 0;
    for _ in 0..500 {
        let (rows, cols) = (rng.gen_range(4..=8), rng.gen_range(4..=8));
        let g = random_graph(&mut rng, rows, cols, 14);
        for (s, e) in [(Side::Top, Side::Bottom), (Side::Left, Side::Right)] {
            if enumerate_min_sum(&g, s, e).is_none() {
                disconnected += 1;
                if penetrate(&g, s, e).unwrap().branch == Branch::Path {
                    unsound += 1;
                }
            }
        }
    }
    let pass = ra.branch == Branch::ContourWeight
        && ra.p_opt == 0.4
        && la.branch == Branch::ContourWeight
        && rb.branch == Branch::GlobalMax
        && rb.p_opt == 0.9
        && lb.branch == Branch::GlobalMax
        && unsound == 0;
    outcome(
        pass,
        format!(
            "(a) {:?} p_opt {}, (b) {:?} p_opt {}, PATH on {unsound} of {disconnected} disconnected random cases",
            ra.branch, ra.p_opt, rb.branch, rb.p_opt
        ),
    )
}

/// Nonincreasing (or nondecreasing when `up`) with at most one adjacent
/// violation of size <= 0.02.
fn trend_ok(xs: &[f64], up: bool) -> bool {
    let bad: Vec<f64> = xs
        .windows(2)
        .map(|w| if up { w[0] - w[1] } else { w[1] - w[0] })
        .filter(|&d| d > 0.0)
        .collect();
    bad.is_empty() || (bad.len() == 1 && bad[0] <= 0.02)
}

fn series(r: &SweepResult, f: impl Fn(&terrain_coverage::harness::SweepPoint) -> f64) -> Vec<f64> {
    r.points.iter().map(f).collect()
}

fn fmt(xs: &[f64]) -> String {
    let parts: Vec<String> = xs.iter().map(|x| format!("{x:.4}")).collect();
    format!("[{}]", parts.join(", "))
}

fn range(xs: &[f64]) -> f64 {
    let hi = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lo = xs.iter().cloned().fold(f64::INFINITY, f64::min);
    hi - lo
}

fn baseline() -> ExperimentConfig {
    ExperimentConfig {
        length: 50,
        width: 50,
        k: 6,
        cost_factor: 4.0,
        alpha: 3.0,
        beta: 0.2,
        nodes: 20,
        trials: 20,
        cost_mode: terrain_coverage::manifold::CostMode::Slope,
        ..Default::default()
    }
}

fn beta_config() -> ExperimentConfig {
    ExperimentConfig {
        axis: SweepAxis::Beta,
        values: Some(vec![0.1, 0.2, 0.3, 0.4, 0.5]),
        ..baseline()
    }
}

fn criterion_8(beta: &SweepResult, el: Duration) -> Outcome {
    let p = series(beta, |p| p.mean_p_opt);
    let c = series(beta, |p| p.mean_coverage);
    let failures: usize = beta.points.iter().map(|p| p.failures).sum();
    outcome(
        trend_ok(&p, false) && trend_ok(&c, false) && within(el, Duration::from_secs(600)),
        format!(
            "mean p_opt {}, mean coverage {}, {failures} failed trials, {el:.2?}",
            fmt(&p),
            fmt(&c)
        ),
    )
}

fn criterion_9(beta: &SweepResult) -> Outcome {
    let cfg = ExperimentConfig {
        axis: SweepAxis::Alpha,
        values: Some(vec![2.0, 3.0, 4.0]),
        ..baseline()
    };
    let alpha = sweep(&cfg, 0).unwrap();
    let pa = series(&alpha, |p| p.mean_p_opt);
    let pb = series(beta, |p| p.mean_p_opt);
    let (ra, rb) = (range(&pa), range(&pb));
    outcome(
        ra < rb,
        format!("alpha range {ra:.4} {} vs beta range {rb:.4}", fmt(&pa)),
    )
}

fn first_reaching(r: &SweepResult, target: f64) -> Option<f64> {
    r.points
        .iter()
        .find(|p| p.mean_coverage >= target)
        .map(|p| p.value)
}

fn criterion_10() -> Outcome {
    let base = ExperimentConfig {
        axis: SweepAxis::Count,
        values: Some((1..=7).map(|c| f64::from(c * 10)).collect()),
        beta: 0.3,
        alpha: 2.0,
        k: 9,
        cost_factor: 3.0,
        ..baseline()
    };
    let run = |lo: f64, hi: f64| {
        sweep(
            &ExperimentConfig {
                omega_min: lo,
                omega_max: hi,
                ..base.clone()
            },
            0,
        )
        .unwrap()
    };
    let default = sweep(&base, 0).unwrap();
    let p = series(&default, |p| p.mean_p_opt);
    let c = series(&default, |p| p.mean_coverage);
    let trends = trend_ok(&p, true) && trend_ok(&c, true);

    let steep = run(50.0, 100.0);
    let gentle = run(1.0, 50.0);
    let (ns, ng) = (
        first_reaching(&steep, base.p_thed),
        first_reaching(&gentle, base.p_thed),
    );
    let ordered = matches!((ns, ng), (Some(s), Some(g)) if s > g);
    outcome(
        trends && ordered,
        format!(
            "trend {} (p_opt {}, coverage {}); nodes reaching coverage >= {}: steep {ns:?}, gentle {ng:?}, {} (max coverage steep {:.4}, gentle {:.4})",
            if trends { "ok" } else { "violated" },
            fmt(&p),
            fmt(&c),
            base.p_thed,
            if ordered { "ordered" } else { "not ordered" },
            series(&steep, |p| p.mean_coverage).iter().cloned().fold(0.0, f64::max),
            series(&gentle, |p| p.mean_coverage).iter().cloned().fold(0.0, f64::max),
        ),
    )
}

fn read_outputs(dir: &Path) -> Vec<Vec<u8>> {
    ["sweep.csv", "raw.csv"]
        .iter()
        .map(|f| std::fs::read(dir.join(f)).unwrap())
        .collect()
}

fn criterion_11(beta: &SweepResult) -> Outcome {
    let cfg = beta_config();
    let dirs: Vec<_> = (0..3).map(|_| tempfile::tempdir().unwrap()).collect();
    emit(beta, dirs[0].path()).unwrap();
    emit(&sweep(&cfg, 1).unwrap(), dirs[1].path()).unwrap();
    emit(&sweep(&cfg, 4).unwrap(), dirs[2].path()).unwrap();
    let outs: Vec<_> = dirs.iter().map(|d| read_outputs(d.path())).collect();
    let same = outs.windows(2).all(|w| w[0] == w[1]);
    outcome(
        same,
        format!(
            "default pool, 1 thread and 4 threads: CSV outputs {}",
            if same { "byte-identical" } else { "differ" }
        ),
    )
}

fn run(id: &str, f: impl FnOnce() -> Outcome) -> bool {
    let o = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
        let msg = e
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_default();
        outcome(false, format!("panicked: {msg}"))
    });
    println!(
        "criterion {id}: {} ({})",
        if o.pass { "PASS" } else { "FAIL" },
        o.detail
    );
    o.pass
}

fn main() {
    let mut all = true;
    all &= run("1", criterion_1);
    all &= run("2", criterion_2);
    all &= run("3", criterion_3);
    all &= run("4", criterion_4);
    all &= run("5", criterion_5);
    all &= run("6", criterion_6);
    all &= run("7", criterion_7);

    let t = Instant::now();
    let beta = sweep(&beta_config(), 0);
    let el = t.elapsed();
    match beta {
        Ok(beta) => {
            all &= run("8", || criterion_8(&beta, el));
            all &= run("9", || criterion_9(&beta));
            all &= run("10", criterion_10);
            all &= run("11", || criterion_11(&beta));
        }
        Err(e) => {
            for id in ["8", "9", "10", "11"] {
                println!("criterion {id}: FAIL (beta sweep failed: {e})");
            }
            all = false;
        }
    }
    if !all {
        std::process::exit(1);
    }
}
