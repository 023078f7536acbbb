use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use terrain_coverage::breach::{build_contour_graph, optimal_breach, BreachReport};
use terrain_coverage::grid::Connectivity;
use terrain_coverage::harness::{emit, sweep, ExperimentConfig, SweepAxis};
use terrain_coverage::io;
use terrain_coverage::manifold::{reduce_terrain, CostMode, CostParams, LleParams, DEFAULT_REG};
use terrain_coverage::sensing::{coverage_ratio, deploy_uniform, sensing_map, SensingModel};
use terrain_coverage::terrain::{generate_terrain, PeakParams};
use terrain_coverage::watershed::{contours_of, DEFAULT_LEVELS};

#[derive(Parser)]
#[command(
    name = "tcov",
    version,
    about = "Sensor coverage and breach analysis on synthetic terrain"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a terrain height grid.
    Terrain(TerrainArgs),
    /// Reduce a terrain to a 2D embedding.
    Embed(EmbedArgs),
    /// Deploy sensors on an embedding and write the sensing map.
    Deploy(DeployArgs),
    /// Segment a sensing map and find the optimal breach path.
    Breach(BreachArgs),
    /// Run a parameter sweep from a JSON config.
    Sweep(SweepArgs),
}

#[derive(Args)]
struct TerrainArgs {
    #[arg(long, default_value_t = 2014)]
    seed: u64,
    /// Number of peaks.
    #[arg(long, default_value_t = 20)]
    peaks: usize,
    /// Grid size as LxW.
    #[arg(long, default_value = "50x50", value_parser = parse_size)]
    size: (usize, usize),
    #[arg(long, default_value_t = 1000.0)]
    rho: f64,
    #[arg(long, default_value_t = 4.0)]
    eta: f64,
    #[arg(long, default_value_t = 1.0)]
    omega_min: f64,
    #[arg(long, default_value_t = 100.0)]
    omega_max: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EmbedArgs {
    #[arg(long)]
    terrain: PathBuf,
    #[arg(long, default_value_t = 6)]
    k: usize,
    #[arg(long, default_value_t = DEFAULT_REG)]
    reg: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct DeployArgs {
    #[arg(long)]
    embedding: PathBuf,
    #[arg(long, default_value_t = 20)]
    count: usize,
    #[arg(long, default_value_t = 2014)]
    seed: u64,
    #[arg(long, default_value_t = 3.0)]
    alpha: f64,
    #[arg(long, default_value_t = 0.2)]
    beta: f64,
    #[arg(long, default_value_t = 4.0)]
    cost_factor: f64,
    /// Detection radius; `none` disables the cutoff.
    #[arg(long, default_value = "10", value_parser = parse_radius)]
    dr: ::std::option::Option<f64>,
    #[arg(long, default_value = "slope")]
    cost_mode: CostMode,
    /// Per-point threshold used for the reported coverage ratio.
    #[arg(long, default_value_t = 0.8)]
    p_t: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct BreachArgs {
    #[arg(long)]
    map: PathBuf,
    #[arg(long, default_value_t = DEFAULT_LEVELS)]
    levels: u32,
    /// 4 or 8.
    #[arg(long, default_value_t = 8)]
    connectivity: u8,
    /// Also write the watershed labels here.
    #[arg(long)]
    labels: Option<PathBuf>,
    /// JSON breach report.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    config: PathBuf,
    /// Overrides the axis in the config.
    #[arg(long)]
    axis: Option<SweepAxis>,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Worker threads; 0 uses all cores.
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    /// Allow parameters outside the supported envelopes.
    #[arg(long = "unsafe")]
    unsafe_ranges: bool,
    /// Regenerate terrain and embedding for every trial.
    #[arg(long)]
    fresh_terrain: bool,
}

fn parse_size(s: &str) -> Result<(usize, usize), String> {
    let (l, w) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected LxW, got `{s}`"))?;
    let parse = |v: &str| {
        v.trim()
            .parse::<usize>()
            .map_err(|e| format!("bad size `{v}`: {e}"))
    };
    Ok((parse(l)?, parse(w)?))
}

fn parse_radius(s: &str) -> Result<Option<f64>, String> {
    if s.eq_ignore_ascii_case("none") {
        return Ok(None);
    }
    s.parse::<f64>()
        .map(Some)
        .map_err(|e| format!("bad radius `{s}`: {e}"))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    Ok(BufWriter::new(
        File::create(path).with_context(|| format!("creating {}", path.display()))?,
    ))
}

fn open(path: &Path) -> Result<BufReader<File>> {
    Ok(BufReader::new(
        File::open(path).with_context(|| format!("opening {}", path.display()))?,
    ))
}

fn run_terrain(a: TerrainArgs) -> Result<()> {
    let params = PeakParams {
        count: a.peaks,
        rho: a.rho,
        eta: a.eta,
        omega_min: a.omega_min,
        omega_max: a.omega_max,
    };
    let t = generate_terrain(a.seed, &params, a.size.0, a.size.1)?;
    let mut w = create(&a.out)?;
    io::write_terrain(&mut w, &t)?;
    w.flush()?;
    let h = t.heights.as_slice();
    let lo = h.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = h.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    println!(
        "terrain {}x{} seed {} heights [{lo}, {hi}]",
        t.length, t.width, t.seed
    );
    Ok(())
}

fn run_embed(a: EmbedArgs) -> Result<()> {
    let t = io::read_terrain(open(&a.terrain)?)?;
    let params = LleParams {
        k: a.k,
        reg: a.reg,
        ..Default::default()
    };
    let emb = reduce_terrain(&t, &params)?;
    let mut w = create(&a.out)?;
    io::write_embedding(&mut w, &emb)?;
    w.flush()?;
    println!(
        "embedded {} points with k={}; eigenvalues {:?}",
        emb.len(),
        emb.k,
        emb.eigenvalues
    );
    Ok(())
}

fn run_deploy(a: DeployArgs) -> Result<()> {
    let emb = io::read_embedding(open(&a.embedding)?)?;
    let model = SensingModel {
        alpha: a.alpha,
        beta: a.beta,
        cost: CostParams {
            a: a.cost_factor,
            mode: a.cost_mode,
            ..Default::default()
        },
        d_r: a.dr,
    };
    if !(0.0..=1.0).contains(&a.p_t) {
        bail!("--p-t must be in [0, 1], got {}", a.p_t);
    }
    let dep = deploy_uniform(a.seed, a.count, emb.len())?;
    let map = sensing_map(&model, &emb, &dep)?;
    let mut w = create(&a.out)?;
    io::write_sensing_map(&mut w, &map)?;
    w.flush()?;
    println!(
        "coverage ratio {} ({} of {} points at p >= {})",
        coverage_ratio(&map, a.p_t),
        map.covered_count(a.p_t),
        map.len(),
        a.p_t
    );
    Ok(())
}

fn run_breach(a: BreachArgs) -> Result<()> {
    let map = io::read_sensing_map(open(&a.map)?)?;
    let conn = Connectivity::from_count(a.connectivity)
        .with_context(|| format!("--connectivity must be 4 or 8, got {}", a.connectivity))?;
    let ws = contours_of(&map, a.levels, conn)?;
    if let Some(path) = &a.labels {
        let mut w = create(path)?;
        io::write_labels(&mut w, &ws)?;
        w.flush()?;
    }
    let graph = build_contour_graph(&ws, &map)?;
    let result = optimal_breach(&graph)?;
    let report = BreachReport::new(&result, &graph);
    let mut w = create(&a.out)?;
    serde_json::to_writer_pretty(&mut w, &report)?;
    writeln!(w)?;
    w.flush()?;
    println!(
        "{} basins, {} contour points; {} {} p_opt {}",
        ws.basin_count,
        graph.len(),
        report.direction.as_str(),
        report.branch.as_str(),
        report.p_opt
    );
    Ok(())
}

fn run_sweep(a: SweepArgs) -> Result<()> {
    let mut cfg = ExperimentConfig::from_json_file(&a.config)?;
    if let Some(axis) = a.axis {
        if axis != cfg.axis {
            cfg.axis = axis;
            cfg.values = None;
        }
    }
    cfg.unsafe_ranges |= a.unsafe_ranges;
    cfg.fresh_terrain |= a.fresh_terrain;
    let result = sweep(&cfg, a.jobs)?;
    emit(&result, &a.out)?;
    for p in &result.points {
        println!(
            "{} = {}: mean p_opt {:.4}, mean coverage {:.4}, {} failed",
            result.axis.as_str(),
            p.value,
            p.mean_p_opt,
            p.mean_coverage,
            p.failures
        );
    }
    Ok(())
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Terrain(a) => run_terrain(a),
        Command::Embed(a) => run_embed(a),
        Command::Deploy(a) => run_deploy(a),
        Command::Breach(a) => run_breach(a),
        Command::Sweep(a) => run_sweep(a),
    }
}
