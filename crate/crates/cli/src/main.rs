mod manifest;

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use mstdim::dimension::{box_dimension, mst_dimension, BoxWindow, EpsSchedule, MstDimensionConfig};
use mstdim::energy::energy;
use mstdim::generators::{builtin_shape, generate_uniform, Shape};
use mstdim::lemma_checks::{
    energy_growth_check, long_edge_separation_check, midpoint_ball_check, midpoint_norm_sweep,
    CheckReport, GrowthConfig,
};
use mstdim::metric::{validate_quasi_metric, Metric};
use mstdim::mst::{build_mst_kruskal, build_mst_prim, SpanningTree};
use mstdim::sweep::{
    alpha_series_csv, rows_to_csv, run_sweep, scale_counts_csv, svg_log_log, SweepGrid,
};
use mstdim::{Error, PointCloud};

use manifest::RunManifest;

#[derive(Parser)]
#[command(
    name = "mstdim",
    version,
    about = "Minimal spanning trees, alpha-energies and dimension estimates"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a builtin point cloud.
    Generate {
        #[arg(long)]
        shape: Shape,
        /// Point count, grid side or composition depth, depending on the shape.
        #[arg(long, alias = "depth")]
        size: usize,
        #[arg(long, default_value_t = 2)]
        dim: usize,
        /// Required for random shapes.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build a minimal spanning tree of a point cloud file.
    Mst {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value = "l2", value_parser = parse_metric)]
        metric: Metric,
        #[arg(long, value_enum, default_value_t = Algo::Prim)]
        algo: Algo,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the alpha-energy of a tree record.
    Energy {
        #[arg(long)]
        tree: PathBuf,
        #[arg(long)]
        alpha: f64,
        /// Write the full energy report here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Estimate the box dimension of a point cloud file.
    DimBox {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value = "l2", value_parser = parse_metric)]
        metric: Metric,
        /// Ratio between consecutive scales.
        #[arg(long, default_value_t = std::f64::consts::FRAC_1_SQRT_2)]
        ratio: f64,
        #[arg(long, default_value_t = 96)]
        levels: usize,
        #[arg(long, default_value_t = 8)]
        min_count: usize,
        #[arg(long, default_value_t = 0.125)]
        max_fraction: f64,
        #[arg(long, default_value_t = 4)]
        min_scales: usize,
        /// Estimate record (JSON).
        #[arg(long)]
        out: Option<PathBuf>,
        /// `eps,count,in_window` table.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Estimate the MST dimension of a builtin shape family.
    DimMst {
        #[arg(long)]
        shape: Shape,
        #[arg(long, value_delimiter = ',', required = true)]
        sizes: Vec<usize>,
        /// Defaults to 0.1, 0.2, ..., 3.0.
        #[arg(long, value_delimiter = ',')]
        alphas: Vec<f64>,
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long, default_value = "l2", value_parser = parse_metric)]
        metric: Metric,
        /// Required for random shapes.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 3)]
        replicates: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        /// `n,alpha,energy` table.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Run a verification suite; exits 3 if any check fails.
    Verify {
        #[arg(long, value_enum)]
        suite: Suite,
        #[arg(long)]
        trials: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Energy sweep over sizes, exponents and seeds, written as long-format CSV.
    Scale {
        #[arg(long)]
        shape: Shape,
        #[arg(long, value_delimiter = ',', required = true)]
        sizes: Vec<usize>,
        #[arg(long, value_delimiter = ',', required = true)]
        alphas: Vec<f64>,
        /// Required for random shapes.
        #[arg(long, value_delimiter = ',')]
        seeds: Vec<u64>,
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long, default_value = "l2", value_parser = parse_metric)]
        metric: Metric,
        #[arg(long)]
        out: PathBuf,
        /// Log-log plot of the sweep.
        #[arg(long)]
        svg: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Algo {
    Prim,
    Kruskal,
}

#[derive(Clone, Copy, ValueEnum)]
enum Suite {
    Lemma1,
    Lemma2,
    Lemma4,
    Thm1,
    Quasi,
}

fn parse_metric(s: &str) -> Result<Metric, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

enum Failure {
    Core(Error),
    CheckFailed(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Core(Error::Io(e))
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::CheckFailed(_) => 3,
            Failure::Core(e) => match e {
                Error::Input(_)
                | Error::DimensionMismatch { .. }
                | Error::Parse { .. }
                | Error::Degenerate(_)
                | Error::UnsupportedMetric(_)
                | Error::Json(_) => 2,
                Error::EstimationFailed { .. } => 4,
                Error::Resource(_) => 5,
                Error::InsufficientScales { .. } => 6,
                Error::Io(_) => 1,
            },
        }
    }
}

type CmdResult = Result<(), Failure>;

fn read_input(path: &Path, manifest: &mut RunManifest) -> Result<Vec<u8>, Failure> {
    let bytes = fs::read(path)
        .map_err(|e| Error::Io(io::Error::new(e.kind(), format!("{}: {e}", path.display()))))?;
    manifest.input(path, &bytes);
    Ok(bytes)
}

fn read_cloud(path: &Path, manifest: &mut RunManifest) -> Result<PointCloud, Failure> {
    let bytes = read_input(path, manifest)?;
    let text = String::from_utf8(bytes)
        .map_err(|_| Error::Input(format!("{} is not UTF-8", path.display())))?;
    Ok(PointCloud::parse(&text)?)
}

fn require_seed(shape: Shape, seed: Option<u64>) -> Result<u64, Failure> {
    match (shape.is_random(), seed) {
        (true, None) => {
            Err(Error::Input(format!("shape {shape} is random and needs --seed")).into())
        }
        (_, s) => Ok(s.unwrap_or(0)),
    }
}

fn emit(out: &Option<PathBuf>, manifest: &mut RunManifest, contents: &str) -> CmdResult {
    match out {
        Some(path) => manifest.write_output(path, contents.as_bytes())?,
        None => io::stdout().write_all(contents.as_bytes())?,
    }
    Ok(())
}

fn cmd_generate(
    shape: Shape,
    size: usize,
    dim: usize,
    seed: Option<u64>,
    out: Option<PathBuf>,
) -> CmdResult {
    let seed = require_seed(shape, seed)?;
    let mut manifest = RunManifest::new("generate", seed);
    manifest
        .param("shape", shape.name())
        .param("size", size)
        .param("dim", dim);
    let sample = builtin_shape(shape, size, dim, seed)?;
    emit(&out, &mut manifest, &sample.cloud.to_text())
}

fn cmd_mst(input: PathBuf, metric: Metric, algo: Algo, out: Option<PathBuf>) -> CmdResult {
    let mut manifest = RunManifest::new("mst", 0);
    let cloud = read_cloud(&input, &mut manifest)?;
    manifest.param("metric", metric.to_string());
    let tree = match algo {
        Algo::Prim => {
            manifest.param("algo", "prim");
            build_mst_prim(&cloud, &metric, 0)?
        }
        Algo::Kruskal => {
            manifest.param("algo", "kruskal");
            build_mst_kruskal(&cloud, &metric)?
        }
    };
    let mut json = tree.to_json();
    json.push('\n');
    emit(&out, &mut manifest, &json)
}

fn cmd_energy(tree_path: PathBuf, alpha: f64, out: Option<PathBuf>) -> CmdResult {
    let mut manifest = RunManifest::new("energy", 0);
    let bytes = read_input(&tree_path, &mut manifest)?;
    let text =
        String::from_utf8(bytes).map_err(|_| Error::Input("tree record is not UTF-8".into()))?;
    let tree = SpanningTree::from_json(&text)?;
    manifest.param("alpha", alpha);
    let report = energy(&tree, alpha)?;
    println!("{}", report.value);
    if let Some(path) = out {
        let mut json = report.to_json();
        json.push('\n');
        manifest.write_output(&path, json.as_bytes())?;
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_dim_box(
    input: PathBuf,
    metric: Metric,
    ratio: f64,
    levels: usize,
    window: BoxWindow,
    out: Option<PathBuf>,
    csv: Option<PathBuf>,
) -> CmdResult {
    let mut manifest = RunManifest::new("dim-box", 0);
    let cloud = read_cloud(&input, &mut manifest)?;
    manifest
        .param("metric", metric.to_string())
        .param("ratio", ratio)
        .param("levels", levels)
        .param("min_count", window.min_count)
        .param("max_fraction", window.max_fraction)
        .param("min_scales", window.min_scales);
    let est = box_dimension(
        &cloud,
        &metric,
        &EpsSchedule::Geometric { ratio, levels },
        &window,
    )?;
    println!("{}", est.value);
    eprintln!(
        "slope over {} scales, r^2 = {:.6}, window {}",
        est.fit_points.len(),
        est.r_squared,
        est.window
    );
    if let Some(path) = out {
        manifest.write_output(&path, (est.to_json() + "\n").as_bytes())?;
    }
    if let Some(path) = csv {
        manifest.write_output(&path, scale_counts_csv(&est).as_bytes())?;
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_dim_mst(
    shape: Shape,
    sizes: Vec<usize>,
    alphas: Vec<f64>,
    dim: usize,
    metric: Metric,
    seed: Option<u64>,
    replicates: usize,
    out: Option<PathBuf>,
    csv: Option<PathBuf>,
) -> CmdResult {
    let seed = require_seed(shape, seed)?;
    let alphas = if alphas.is_empty() {
        MstDimensionConfig::alpha_grid(0.1, 3.0)
    } else {
        alphas
    };
    let mut manifest = RunManifest::new("dim-mst", seed);
    manifest
        .param("shape", shape.name())
        .param("sizes", &sizes)
        .param("alphas", &alphas)
        .param("dim", dim)
        .param("metric", metric.to_string())
        .param("replicates", replicates);
    let mut cfg = MstDimensionConfig::new(sizes, alphas, seed);
    cfg.replicates = replicates;
    let est = match mst_dimension(shape, dim, &metric, &cfg) {
        Err(Error::EstimationFailed {
            message,
            diagnostics,
        }) => {
            eprintln!("{diagnostics}");
            return Err(Error::EstimationFailed {
                message,
                diagnostics,
            }
            .into());
        }
        other => other?,
    };
    println!("{}", est.value);
    if let Some(a) = est.crossover_alpha {
        eprintln!("crossover alpha {a:.4}, r^2 >= {:.6}", est.r_squared);
    }
    if let Some(path) = out {
        manifest.write_output(&path, (est.to_json() + "\n").as_bytes())?;
    }
    if let Some(path) = csv {
        manifest.write_output(&path, alpha_series_csv(&est).as_bytes())?;
    }
    Ok(())
}

fn suite_midpoint_balls(trials: usize, seed: u64) -> Result<Vec<CheckReport>, Error> {
    (0..trials as u64)
        .map(|t| {
            let dim = 2 + (t % 2) as usize;
            let cloud = generate_uniform(100, dim, seed.wrapping_add(t))?;
            let tree = build_mst_prim(&cloud, &Metric::L2, 0)?;
            let mut r = midpoint_ball_check(&cloud, &Metric::L2, &tree)?;
            r.param("trial", t).param("dim", dim);
            Ok(r)
        })
        .collect()
}

fn suite_long_edges(trials: usize, seed: u64) -> Result<Vec<CheckReport>, Error> {
    let metrics = [Metric::L2, Metric::power_quasi(Metric::L2, 2.0)?];
    let mut reports = Vec::new();
    for t in 0..trials as u64 {
        let dim = 2 + (t % 2) as usize;
        let cloud = generate_uniform(200, dim, seed.wrapping_add(t))?;
        for metric in &metrics {
            let tree = build_mst_prim(&cloud, metric, 0)?;
            for k in 1..=8 {
                let mut r = long_edge_separation_check(&cloud, metric, &tree, 0.5f64.powi(k))?;
                r.param("trial", t);
                reports.push(r);
            }
        }
    }
    Ok(reports)
}

fn suite_growth(trials: usize, seed: u64) -> Result<Vec<CheckReport>, Error> {
    let seeds: Vec<u64> = (0..trials.clamp(1, 5) as u64)
        .map(|s| seed.wrapping_add(s))
        .collect();
    let sizes = (8..=12).map(|k| 1usize << k).collect();
    let report = energy_growth_check(&GrowthConfig::uniform(2, vec![0.5, 1.0, 3.0], sizes, seeds))?;
    Ok(vec![report.to_check_report()])
}

fn suite_quasi(trials: usize, seed: u64) -> Result<Vec<CheckReport>, Error> {
    let interval = builtin_shape(Shape::Interval, 1024, 1, 0)?.cloud;
    let square = generate_uniform(512, 2, seed)?;
    let metrics = [
        Metric::L1,
        Metric::L2,
        Metric::snowflake(Metric::L2, 0.5)?,
        Metric::power_quasi(Metric::L2, 2.0)?,
        Metric::power_quasi(Metric::L1, 3.0)?,
    ];
    let mut reports = Vec::new();
    for (name, cloud) in [("interval", &interval), ("square", &square)] {
        for metric in &metrics {
            let v = validate_quasi_metric(metric, cloud, trials.max(1), seed)?;
            let mut r = CheckReport::new("weak-triangle");
            r.param("cloud", name)
                .param("metric", &v.metric)
                .param("trials", v.trials)
                .param("max_ratio", v.max_ratio)
                .param("declared_const", v.declared_const)
                .param("witness", v.witness);
            r.pass = v.pass;
            r.min_slack = v.declared_const - v.max_ratio;
            reports.push(r);
        }
    }
    Ok(reports)
}

fn cmd_verify(suite: Suite, trials: usize, seed: u64, out: Option<PathBuf>) -> CmdResult {
    let (name, reports) = match suite {
        Suite::Lemma1 => (
            "lemma1",
            vec![midpoint_norm_sweep(trials, &[2, 3, 5], seed)?],
        ),
        Suite::Lemma2 => ("lemma2", suite_midpoint_balls(trials, seed)?),
        Suite::Lemma4 => ("lemma4", suite_long_edges(trials, seed)?),
        Suite::Thm1 => ("thm1", suite_growth(trials, seed)?),
        Suite::Quasi => ("quasi", suite_quasi(trials, seed)?),
    };
    let failed = reports.iter().filter(|r| !r.pass).count();
    let min_slack = reports
        .iter()
        .map(|r| r.min_slack)
        .fold(f64::INFINITY, f64::min);
    println!(
        "{name}: {} checks, {failed} failed, min slack {min_slack:e}",
        reports.len()
    );
    if let Some(path) = out {
        let mut manifest = RunManifest::new("verify", seed);
        manifest.param("suite", name).param("trials", trials);
        let json = serde_json::to_string_pretty(&reports).map_err(Error::Json)? + "\n";
        manifest.write_output(&path, json.as_bytes())?;
    }
    if failed > 0 {
        for r in reports.iter().filter(|r| !r.pass).take(5) {
            eprintln!("{}: {:?}", r.name, r.details);
        }
        return Err(Failure::CheckFailed(format!(
            "{failed} {name} checks failed"
        )));
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_scale(
    shape: Shape,
    sizes: Vec<usize>,
    alphas: Vec<f64>,
    seeds: Vec<u64>,
    dim: usize,
    metric: Metric,
    out: PathBuf,
    svg: Option<PathBuf>,
) -> CmdResult {
    let seeds = match (shape.is_random(), seeds.is_empty()) {
        (true, true) => {
            return Err(Error::Input(format!("shape {shape} is random and needs --seeds")).into())
        }
        (false, true) => vec![0],
        (_, false) => seeds,
    };
    let mut manifest = RunManifest::new("scale", seeds[0]);
    manifest
        .param("shape", shape.name())
        .param("sizes", &sizes)
        .param("alphas", &alphas)
        .param("seeds", &seeds)
        .param("dim", dim)
        .param("metric", metric.to_string());
    let grid = SweepGrid {
        shape,
        dim,
        metric,
        sizes,
        alphas,
        seeds,
    };
    let rows = run_sweep(&grid)?;
    manifest.write_output(&out, rows_to_csv(&rows).as_bytes())?;
    if let Some(path) = svg {
        let title = format!("{shape}: ln E_alpha vs ln n");
        manifest.write_output(&path, svg_log_log(&rows, &title).as_bytes())?;
    }
    Ok(())
}

fn run(cli: Cli) -> CmdResult {
    match cli.command {
        Command::Generate {
            shape,
            size,
            dim,
            seed,
            out,
        } => cmd_generate(shape, size, dim, seed, out),
        Command::Mst {
            input,
            metric,
            algo,
            out,
        } => cmd_mst(input, metric, algo, out),
        Command::Energy { tree, alpha, out } => cmd_energy(tree, alpha, out),
        Command::DimBox {
            input,
            metric,
            ratio,
            levels,
            min_count,
            max_fraction,
            min_scales,
            out,
            csv,
        } => cmd_dim_box(
            input,
            metric,
            ratio,
            levels,
            BoxWindow {
                min_count,
                max_fraction,
                min_scales,
            },
            out,
            csv,
        ),
        Command::DimMst {
            shape,
            sizes,
            alphas,
            dim,
            metric,
            seed,
            replicates,
            out,
            csv,
        } => cmd_dim_mst(
            shape, sizes, alphas, dim, metric, seed, replicates, out, csv,
        ),
        Command::Verify {
            suite,
            trials,
            seed,
            out,
        } => cmd_verify(suite, trials, seed, out),
        Command::Scale {
            shape,
            sizes,
            alphas,
            seeds,
            dim,
            metric,
            out,
            svg,
        } => cmd_scale(shape, sizes, alphas, seeds, dim, metric, out, svg),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            match &failure {
                Failure::Core(e) => eprintln!("error: {e}"),
                Failure::CheckFailed(msg) => eprintln!("check failed: {msg}"),
            }
            ExitCode::from(failure.exit_code())
        }
    }
}
