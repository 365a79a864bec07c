//! `dclus` command line: instance generation, coresets, sketches, solvers
//! and the comparison bench.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use dclus_core::bicriteria::{bicriteria, BicriteriaConfig};
use dclus_core::dim_reduce::{cost_preserving_sketch, verify_sketch, JlStrategy, SketchConfig, WitnessParams};
use dclus_core::geometry::{ClusteringParams, ExtendedPointSet, SolverConfig, WeightedPointSet};
use dclus_core::io::{self, format_hex, CoresetFile, PointFile};
use dclus_core::partition_coreset::PartitionCoresetParams;
use dclus_core::ptas::{approx_solve, exact_solve, PtasConfig, SolveResult};
use dclus_core::ring_coreset::{ring_coreset, verify_offset_coreset, RingCoresetConfig, SetApproxMode};
use dclus_core::synth::{generate, GenConfig, Generator};
use dclus_core::verify::{center_grid, VerifyMode};
use dclus_core::Error;
use serde::Serialize;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;
pub const EXIT_VERIFY: i32 = 4;

#[derive(Parser)]
#[command(name = "dclus", version, about = "Deterministic coresets and solvers for Euclidean (k,z)-clustering")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Write a synthetic instance.
    Gen(GenArgs),
    /// Build or check a coreset with offset.
    #[command(subcommand)]
    Coreset(CoresetCmd),
    /// Cost-preserving dimension reduction.
    #[command(subcommand)]
    Sketch(SketchCmd),
    /// Clustering solvers.
    #[command(subcommand)]
    Solve(SolveCmd),
    /// Mode comparisons.
    #[command(subcommand)]
    Bench(BenchCmd),
}

#[derive(Subcommand)]
enum CoresetCmd {
    /// Build a coreset with offset.
    Build(CoresetBuildArgs),
    /// Check a coreset against its input over a grid of center sets.
    Verify(CoresetVerifyArgs),
}

#[derive(Subcommand)]
enum SketchCmd {
    /// Build a cost-preserving sketch.
    Build(SketchBuildArgs),
    /// Compare partition costs of the input and its sketch.
    Verify(SketchVerifyArgs),
}

#[derive(Subcommand)]
enum SolveCmd {
    /// Coreset enumeration with lifting.
    Ptas(SolveArgs),
    /// Greedy bicriteria solution (more than k centers).
    Bicriteria(SolveArgs),
    /// Exhaustive partition search.
    Exact(SolveArgs),
}

#[derive(Subcommand)]
enum BenchCmd {
    /// Deterministic vs randomized coreset size, error and time (TSV).
    Compare(BenchArgs),
}

#[derive(Args, Clone, Copy)]
struct ClusterArgs {
    #[arg(long)]
    k: usize,
    #[arg(long, default_value_t = 2)]
    z: u32,
    #[arg(long, default_value_t = 0.3)]
    eps: f64,
}

impl ClusterArgs {
    fn params(&self) -> dclus_core::Result<ClusteringParams> {
        ClusteringParams::new(self.k, self.z, self.eps)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    GaussianBlobs,
    Rings,
    FarPoint,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Bin,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_enum, default_value = "gaussian-blobs")]
    kind: Kind,
    /// Gaussian blobs with this many clusters.
    #[arg(long, conflicts_with_all = ["kind", "clusters"])]
    blobs: Option<usize>,
    #[arg(long, default_value_t = 3)]
    clusters: usize,
    #[arg(long, default_value_t = 100)]
    n: usize,
    #[arg(long, default_value_t = 2)]
    d: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Det,
    Rand,
}

#[derive(Args)]
struct CoresetBuildArgs {
    #[arg(long)]
    input: PathBuf,
    #[command(flatten)]
    cluster: ClusterArgs,
    #[arg(long, value_enum, default_value = "det")]
    mode: Mode,
    /// Randomized mode only.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.1)]
    delta: f64,
    /// Fix the baseline approximation factor instead of the certified one.
    #[arg(long)]
    baseline_factor: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CoresetVerifyArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    coreset: PathBuf,
    /// Grid values per axis.
    #[arg(long, default_value_t = 10)]
    grid: usize,
    #[arg(long, default_value_t = 0.1)]
    margin: f64,
    /// Check this many random center sets instead of all of them.
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Defaults to the coreset's epsilon.
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Strategy {
    SeedScan,
    Conditional,
}

#[derive(Args)]
struct SketchBuildArgs {
    #[arg(long)]
    input: PathBuf,
    #[command(flatten)]
    cluster: ClusterArgs,
    #[arg(long, default_value_t = 0.1)]
    beta: f64,
    #[arg(long, default_value_t = 3)]
    gamma: u64,
    /// Use the worst-case constants instead of `--beta/--gamma`.
    #[arg(long)]
    paper_constants: bool,
    #[arg(long, value_enum, default_value = "seed-scan")]
    strategy: Strategy,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SketchVerifyArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    sketch: PathBuf,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Relative P-cost tolerance; defaults to three times epsilon.
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    input: PathBuf,
    #[command(flatten)]
    cluster: ClusterArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    cluster: ClusterArgs,
    #[arg(long, default_value_t = 5)]
    instances: usize,
    #[arg(long, default_value_t = 200)]
    n: usize,
    #[arg(long, default_value_t = 2)]
    d: usize,
    #[arg(long, value_enum, default_value = "gaussian-blobs")]
    kind: Kind,
    #[arg(long, default_value_t = 3)]
    clusters: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

enum Failure {
    Core(Error),
    Verify(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Core(Error::Io(e))
    }
}

type Outcome = std::result::Result<(), Failure>;

/// Runs the CLI on `args` (program name first) and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    let threads = match std::env::var("DCLUS_THREADS") {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Some(n),
            _ => {
                eprintln!("error: DCLUS_THREADS must be a positive integer");
                return EXIT_INPUT;
            }
        },
        Err(_) => None,
    };
    let outcome = match threads {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| dispatch(cli.cmd)),
            Err(e) => {
                eprintln!("error: {e}");
                return EXIT_INPUT;
            }
        },
        None => dispatch(cli.cmd),
    };
    match outcome {
        Ok(()) => EXIT_OK,
        Err(Failure::Verify(msg)) => {
            eprintln!("verification failed: {msg}");
            EXIT_VERIFY
        }
        Err(Failure::Core(e)) => {
            eprintln!("error: {e}");
            match e {
                Error::Budget { .. } => EXIT_BUDGET,
                _ => EXIT_INPUT,
            }
        }
    }
}

fn dispatch(cmd: Cmd) -> Outcome {
    match cmd {
        Cmd::Gen(a) => gen(a),
        Cmd::Coreset(CoresetCmd::Build(a)) => coreset_build(a),
        Cmd::Coreset(CoresetCmd::Verify(a)) => coreset_verify(a),
        Cmd::Sketch(SketchCmd::Build(a)) => sketch_build(a),
        Cmd::Sketch(SketchCmd::Verify(a)) => sketch_verify(a),
        Cmd::Solve(SolveCmd::Ptas(a)) => solve(a, Solver::Ptas),
        Cmd::Solve(SolveCmd::Bicriteria(a)) => solve(a, Solver::Bicriteria),
        Cmd::Solve(SolveCmd::Exact(a)) => solve(a, Solver::Exact),
        Cmd::Bench(BenchCmd::Compare(a)) => bench_compare(a),
    }
}

fn emit(out: &Option<PathBuf>, bytes: &[u8]) -> Outcome {
    match out {
        Some(p) => io::write_bytes(p, bytes)?,
        None => std::io::stdout().lock().write_all(bytes)?,
    }
    Ok(())
}

fn read(path: &Path) -> dclus_core::Result<PointFile> {
    io::read_points(path)
}

fn generator(k: Kind) -> Generator {
    match k {
        Kind::GaussianBlobs => Generator::GaussianBlobs,
        Kind::Rings => Generator::Rings,
        Kind::FarPoint => Generator::FarPoint,
    }
}

fn gen(a: GenArgs) -> Outcome {
    let (kind, clusters) = match a.blobs {
        Some(b) => (Kind::GaussianBlobs, b),
        None => (a.kind, a.clusters),
    };
    let p = generate(
        generator(kind),
        &GenConfig {
            n: a.n,
            d: a.d,
            clusters,
            seed: a.seed,
        },
    )?;
    let f = PointFile::plain(p);
    match a.format {
        Format::Csv => emit(&a.out, io::points_csv(&f).as_bytes()),
        Format::Bin => emit(&a.out, &io::points_binary(&f)),
    }
}

fn unweighted(f: &PointFile) -> dclus_core::Result<&ExtendedPointSet> {
    if f.weighted {
        return Err(Error::Input("this command expects unit weights".into()));
    }
    Ok(&f.points)
}

fn coreset_build(a: CoresetBuildArgs) -> Outcome {
    let params = a.cluster.params()?;
    let f = read(&a.input)?;
    let p = unweighted(&f)?;
    let mode = match a.mode {
        Mode::Det => SetApproxMode::Deterministic,
        Mode::Rand => SetApproxMode::Randomized {
            seed: a.seed,
            delta: a.delta,
            c: 2.0,
        },
    };
    let cfg = RingCoresetConfig {
        mode,
        baseline_factor: a.baseline_factor,
        ..Default::default()
    };
    let out = ring_coreset(p, &params, &cfg)?;
    let file = CoresetFile {
        core: out.coreset,
        k: params.k,
        z: params.z,
        epsilon: params.epsilon,
    };
    emit(&a.out, io::coreset_csv(&file).as_bytes())
}

#[derive(Serialize)]
struct CoresetReport {
    max_relative_error: String,
    threshold: String,
    tuples_checked: u64,
    witness: Option<Vec<usize>>,
    pass: bool,
}

fn coreset_verify(a: CoresetVerifyArgs) -> Outcome {
    let f = read(&a.input)?;
    let text = std::fs::read_to_string(&a.coreset)?;
    let cf = io::parse_coreset_csv(&text)?;
    let params = ClusteringParams::new(cf.k, cf.z, cf.epsilon)?;
    let grid = center_grid(&f.points, a.grid, a.margin)?;
    let mode = match a.samples {
        Some(samples) => VerifyMode::Sampled { samples, seed: a.seed },
        None => VerifyMode::Exhaustive,
    };
    let r = verify_offset_coreset(&f.points, &cf.core, &params, &grid, mode)?;
    let threshold = a.threshold.unwrap_or(cf.epsilon);
    let pass = r.max_relative_error <= threshold;
    let report = CoresetReport {
        max_relative_error: format_hex(r.max_relative_error),
        threshold: format_hex(threshold),
        tuples_checked: r.tuples_checked,
        witness: r.witness,
        pass,
    };
    if let Some(path) = &a.out {
        io::write_bytes(path, (serde_json::to_string(&report).map_err(Error::Json)? + "\n").as_bytes())?;
    }
    println!(
        "coreset of {} points: max relative error {:.6} over {} center sets (threshold {})",
        cf.core.len(),
        r.max_relative_error,
        r.tuples_checked,
        threshold
    );
    if pass {
        Ok(())
    } else {
        Err(Failure::Verify(format!("error {} exceeds {threshold}", r.max_relative_error)))
    }
}

fn sketch_build(a: SketchBuildArgs) -> Outcome {
    let params = a.cluster.params()?;
    let f = read(&a.input)?;
    let pc = if a.paper_constants {
        PartitionCoresetParams::paper_constants(params.z, params.epsilon)
    } else {
        PartitionCoresetParams::practical(a.beta, a.gamma)
    };
    let cfg = SketchConfig {
        strategy: match a.strategy {
            Strategy::SeedScan => JlStrategy::SeedScan,
            Strategy::Conditional => JlStrategy::Conditional,
        },
        ..Default::default()
    };
    let witness = WitnessParams::defaults(params.z, params.epsilon);
    let s = cost_preserving_sketch(&f.points, &params, &pc, &witness, &cfg)?;
    emit(&a.out, io::sketch_json(&s, &params)?.as_bytes())
}

#[derive(Serialize)]
struct SketchReport {
    max_relative_error: String,
    threshold: String,
    partitions_checked: u64,
    distortion: String,
    distortion_limit: String,
    distortion_pairs: u64,
    target_dim: usize,
    pass: bool,
}

fn sketch_verify(a: SketchVerifyArgs) -> Outcome {
    let f = read(&a.input)?;
    let (params, s) = io::parse_sketch_json(&std::fs::read_to_string(&a.sketch)?)?;
    let mode = match a.samples {
        Some(samples) => VerifyMode::Sampled { samples, seed: a.seed },
        None => VerifyMode::Exhaustive,
    };
    let r = verify_sketch(&f.points, &s, &params, &SolverConfig::default(), mode)?;
    let threshold = a.threshold.unwrap_or(3.0 * params.epsilon);
    let limit = 1.0 + params.epsilon / params.z as f64;
    let pass = r.max_relative_error <= threshold && r.distortion <= limit;
    let report = SketchReport {
        max_relative_error: format_hex(r.max_relative_error),
        threshold: format_hex(threshold),
        partitions_checked: r.partitions_checked,
        distortion: format_hex(r.distortion),
        distortion_limit: format_hex(limit),
        distortion_pairs: r.distortion_pairs,
        target_dim: s.target_dim,
        pass,
    };
    if let Some(path) = &a.out {
        io::write_bytes(path, (serde_json::to_string(&report).map_err(Error::Json)? + "\n").as_bytes())?;
    }
    println!(
        "sketch to {} dims: P-cost error {:.6} over {} partitions (threshold {}), distortion {:.6} (limit {:.6})",
        s.target_dim, r.max_relative_error, r.partitions_checked, threshold, r.distortion, limit
    );
    if pass {
        Ok(())
    } else {
        Err(Failure::Verify("sketch outside tolerance".into()))
    }
}

#[derive(Clone, Copy)]
enum Solver {
    Ptas,
    Bicriteria,
    Exact,
}

#[derive(Serialize)]
struct SolveReport {
    method: dclus_core::ptas::Method,
    cost: String,
    downgraded: bool,
    enumeration_stats: u64,
    centers: Vec<Vec<String>>,
}

fn solve(a: SolveArgs, which: Solver) -> Outcome {
    let params = a.cluster.params()?;
    let f = read(&a.input)?;
    let p = &f.points;
    let r: SolveResult = match which {
        Solver::Ptas => approx_solve(p, &params, &PtasConfig::default())?,
        Solver::Exact => exact_solve(p, &params, &SolverConfig::default())?,
        Solver::Bicriteria => {
            let b = bicriteria(p, &params, &BicriteriaConfig::default())?;
            SolveResult {
                cost: b.cost,
                centers: b.centers,
                method: dclus_core::ptas::Method::Bicriteria,
                enumeration_stats: b.candidate_count as u64,
                downgraded: false,
            }
        }
    };
    let report = SolveReport {
        method: r.method,
        cost: format_hex(r.cost),
        downgraded: r.downgraded,
        enumeration_stats: r.enumeration_stats,
        centers: r.centers.iter().map(|c| c.iter().map(|&x| format_hex(x)).collect()).collect(),
    };
    emit(&a.out, (serde_json::to_string(&report).map_err(Error::Json)? + "\n").as_bytes())
}

fn bench_compare(a: BenchArgs) -> Outcome {
    let params = a.cluster.params()?;
    let mut out = String::from("instance\tmode\tsize\tmax_error\twall_ms\n");
    for i in 0..a.instances {
        let p: WeightedPointSet = generate(
            generator(a.kind),
            &GenConfig {
                n: a.n,
                d: a.d,
                clusters: a.clusters,
                seed: a.seed + i as u64,
            },
        )?;
        let (grid, mode) = if a.d <= 3 {
            (center_grid(&p, if a.d == 3 { 6 } else { 10 }, 0.1)?, VerifyMode::Exhaustive)
        } else {
            (center_grid(&p, 2, 0.1)?, VerifyMode::Sampled { samples: 2000, seed: i as u64 })
        };
        for (name, m) in [("det", SetApproxMode::Deterministic), ("rand", SetApproxMode::randomized(a.seed + i as u64))] {
            let t = Instant::now();
            let c = ring_coreset(&p, &params, &RingCoresetConfig { mode: m, ..Default::default() })?;
            let ms = t.elapsed().as_secs_f64() * 1e3;
            let r = verify_offset_coreset(&p, &c.coreset, &params, &grid, mode)?;
            out.push_str(&format!("{i}\t{name}\t{}\t{:.6}\t{ms:.1}\n", c.coreset.len(), r.max_relative_error));
        }
    }
    emit(&a.out, out.as_bytes())
}
