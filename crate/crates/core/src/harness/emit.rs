use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::{SweepPoint, SweepResult};
use crate::error::Result;

pub const SWEEP_HEADER: [&str; 15] = [
    "axis",
    "value",
    "trials",
    "failures",
    "mean_p_opt",
    "std_p_opt",
    "mean_coverage",
    "std_coverage",
    "branch_path",
    "branch_contour_weight",
    "branch_global_max",
    "frac_p_opt_ge_p_t",
    "frac_p_opt_ge_p_thed",
    "frac_coverage_ge_p_thed",
    "successes",
];

pub const RAW_HEADER: [&str; 12] = [
    "axis",
    "value",
    "trial",
    "seed",
    "status",
    "covered",
    "total",
    "coverage_ratio",
    "p_opt",
    "branch",
    "direction",
    "error",
];

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Writes `sweep.csv`, `raw.csv`, `chart_popt.svg` and `chart_coverage.svg`
/// into `out_dir`, creating it if needed.
pub fn emit(result: &SweepResult, out_dir: &Path) -> Result<()> {
    fs::create_dir_all(out_dir)?;
    let axis = result.axis.as_str();

    let mut w = csv::Writer::from_path(out_dir.join("sweep.csv")).map_err(csv_err)?;
    w.write_record(SWEEP_HEADER).map_err(csv_err)?;
    for p in &result.points {
        w.write_record([
            axis.to_string(),
            p.value.to_string(),
            p.records.len().to_string(),
            p.failures.to_string(),
            p.mean_p_opt.to_string(),
            p.std_p_opt.to_string(),
            p.mean_coverage.to_string(),
            p.std_coverage.to_string(),
            p.branch_path.to_string(),
            p.branch_contour_weight.to_string(),
            p.branch_global_max.to_string(),
            p.frac_p_opt_ge_p_t.to_string(),
            p.frac_p_opt_ge_p_thed.to_string(),
            p.frac_coverage_ge_p_thed.to_string(),
            (p.records.len() - p.failures).to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;

    let mut w = csv::Writer::from_path(out_dir.join("raw.csv")).map_err(csv_err)?;
    w.write_record(RAW_HEADER).map_err(csv_err)?;
    for r in result.points.iter().flat_map(|p| &p.records) {
        w.write_record([
            axis.to_string(),
            r.value.to_string(),
            r.trial.to_string(),
            r.seed.to_string(),
            if r.failed() { "failed" } else { "ok" }.to_string(),
            opt(r.covered),
            r.total.to_string(),
            opt(r.coverage_ratio),
            opt(r.p_opt),
            opt(r.branch.map(|b| b.as_str())),
            opt(r.direction.map(|d| d.as_str())),
            r.error.clone().unwrap_or_default(),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;

    fs::write(
        out_dir.join("chart_popt.svg"),
        line_chart(axis, "mean p_opt", &result.points, |p| {
            (p.mean_p_opt, p.std_p_opt)
        }),
    )?;
    fs::write(
        out_dir.join("chart_coverage.svg"),
        line_chart(axis, "mean coverage ratio", &result.points, |p| {
            (p.mean_coverage, p.std_coverage)
        }),
    )?;
    Ok(())
}

fn csv_err(e: csv::Error) -> crate::error::Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => io.into(),
        other => std::io::Error::other(format!("{other:?}")).into(),
    }
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 56.0;

/// Line chart of `series` against the sweep values, with +-1 std bars.
/// The y range is fixed to [0, 1].
fn line_chart(
    axis: &str,
    label: &str,
    points: &[SweepPoint],
    series: impl Fn(&SweepPoint) -> (f64, f64),
) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let (x0, x1) = (MARGIN, WIDTH - MARGIN / 2.0);
    let (y0, y1) = (HEIGHT - MARGIN, MARGIN / 2.0);
    let _ = writeln!(
        s,
        r#"<path d="M{x0} {y1} L{x0} {y0} L{x1} {y0}" stroke="black" fill="none"/>"#
    );
    for tick in 0..=4 {
        let v = tick as f64 / 4.0;
        let y = y0 + (y1 - y0) * v;
        let _ = writeln!(
            s,
            r#"<line x1="{}" y1="{y:.2}" x2="{x0}" y2="{y:.2}" stroke="black"/><text x="{}" y="{:.2}" font-size="11" text-anchor="end">{v:.2}</text>"#,
            x0 - 4.0,
            x0 - 6.0,
            y + 4.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" font-size="13" text-anchor="middle">{axis}</text>"#,
        (x0 + x1) / 2.0,
        HEIGHT - 12.0
    );
    let _ = writeln!(
        s,
        r#"<text x="14" y="{:.2}" font-size="13" text-anchor="middle" transform="rotate(-90 14 {:.2})">{label}</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0
    );
    if !points.is_empty() {
        let lo = points.iter().map(|p| p.value).fold(f64::INFINITY, f64::min);
        let hi = points
            .iter()
            .map(|p| p.value)
            .fold(f64::NEG_INFINITY, f64::max);
        let span = if hi > lo { hi - lo } else { 1.0 };
        let px = |v: f64| {
            if hi > lo {
                x0 + (x1 - x0) * (v - lo) / span
            } else {
                (x0 + x1) / 2.0
            }
        };
        let py = |v: f64| y0 + (y1 - y0) * v.clamp(0.0, 1.0);
        let mut d = String::new();
        for p in points {
            let (m, sd) = series(p);
            let x = px(p.value);
            let _ = writeln!(
                s,
                r#"<text x="{x:.2}" y="{:.2}" font-size="11" text-anchor="middle">{}</text>"#,
                y0 + 16.0,
                p.value
            );
            if !m.is_finite() {
                continue;
            }
            let _ = write!(
                d,
                "{}{x:.2} {:.2} ",
                if d.is_empty() { "M" } else { "L" },
                py(m)
            );
            if sd.is_finite() && sd > 0.0 {
                let _ = writeln!(
                    s,
                    r##"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="#888"/>"##,
                    py(m - sd),
                    py(m + sd)
                );
            }
            let _ = writeln!(
                s,
                r##"<circle cx="{x:.2}" cy="{:.2}" r="3" fill="#1f5fa8"/>"##,
                py(m)
            );
        }
        if !d.is_empty() {
            let _ = writeln!(
                s,
                r##"<path d="{}" stroke="#1f5fa8" stroke-width="2" fill="none"/>"##,
                d.trim_end()
            );
        }
    }
    s.push_str("</svg>\n");
    s
}
