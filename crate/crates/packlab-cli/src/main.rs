//! packlab: command-line experiments over circle packings and Kleinian
//! orbits.
//!
//! Every command writes its data output to `--out` (or stdout) and a run
//! manifest (flags, seed, input hashes, tool version, wall time) alongside
//! it, so runs are reproducible byte-for-byte regardless of `--threads`.
//!
//! Exit codes: 0 success, 2 input validation, 3 arithmetic overflow,
//! 4 degenerate data, 5 insufficient data.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use sha2::{Digest, Sha256};

use packlab::descartes::{generate, DescartesError, DescartesQuadruple};
use packlab::joinings::{
    boundary_pairs, conformality_stat, joint_enumerate, joint_exponent, JoiningError,
    RepresentationPair,
};
use packlab::moebius::H3Point;
use packlab::orbits::{
    box_dimension, certified_threshold, critical_exponent, enumerate, limit_sample,
    GroupPresentation, OrbitError, SampleMethod,
};
use packlab::render::{
    emit_circles_csv, emit_svg, parse_circles_csv, to_json_17, CircleRow, RenderError, Scene,
};
use packlab::stats::{fit_power_law, sieve, CountSeries, StatsError};

const EXIT_VALIDATION: u8 = 2;
const EXIT_OVERFLOW: u8 = 3;
const EXIT_DEGENERATE: u8 = 4;
const EXIT_INSUFFICIENT: u8 = 5;

#[derive(Parser)]
#[command(
    name = "packlab",
    version,
    about = "Circle packings, Kleinian orbits, counting laws, and rigidity diagnostics"
)]
struct Cli {
    /// Worker thread cap (default: available parallelism; env fallback
    /// PACKLAB_THREADS). Outputs never depend on this.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a bounded packing up to a curvature threshold (CSV out).
    Gen(GenArgs),
    /// Fit the counting exponent of a circle-list CSV over a window.
    Fit(FitArgs),
    /// Estimate the limit-set box dimension and the orbit growth exponent
    /// of a group presentation, and report their gap.
    Dim(DimArgs),
    /// Prime/almost-prime curvature counts of a circle-list CSV.
    Sieve(SieveArgs),
    /// Cross-ratio conformality diagnostic for a representation pair.
    ///
    /// Pairs come from explicit data (identical, conjugated, or independent
    /// Schottky presentations), not from genuine quasiconformal
    /// deformations; a positive violating fraction certifies non-Moebius
    /// behavior on the tested set, a zero fraction is evidence only.
    Crtest(CrtestArgs),
    /// Joint growth exponent of a representation pair in the summed metric.
    ///
    /// Same pair provenance caveat as crtest: conjugated or independent
    /// Schottky data stand in for deformations.
    Joint(JointArgs),
    /// Render a circle-list CSV to SVG.
    Render(RenderArgs),
}

#[derive(Args)]
struct GenArgs {
    /// Four comma-separated integer curvatures (exactly one negative).
    #[arg(
        long,
        value_delimiter = ',',
        allow_hyphen_values = true,
        conflicts_with = "root_default"
    )]
    root: Option<Vec<i128>>,
    /// Use the standard bounded root (-1, 2, 2, 3).
    #[arg(long)]
    root_default: bool,
    /// Curvature threshold.
    #[arg(long)]
    max_curv: i128,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct FitArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Window bounds; default is the top three dyadic decades of the data,
    /// excluding the top half-decade (truncation bias).
    #[arg(long)]
    tmin: Option<f64>,
    #[arg(long)]
    tmax: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DimArgs {
    /// Presentation file (JSON).
    #[arg(long)]
    group: PathBuf,
    /// Reduced-word depth for sampling and enumeration.
    #[arg(long, default_value_t = 9)]
    depth: usize,
    #[arg(long, value_enum, default_value_t = MethodArg::Loxodromic)]
    method: MethodArg,
    /// Number of dyadic halvings in the box-counting grid.
    #[arg(long, default_value_t = 12)]
    eps_decades: usize,
    /// Largest box size.
    #[arg(long, default_value_t = 2.0)]
    eps_max: f64,
    /// Growth-fit window override (defaults to the top 60% of the
    /// certified range).
    #[arg(long)]
    tmin: Option<f64>,
    #[arg(long)]
    tmax: Option<f64>,
    /// Accept generators with |det - 1| > 1e-9 and renormalize them.
    #[arg(long)]
    normalize: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    /// Boundary shadows of the deepest decile of orbit points.
    OrbitAccumulation,
    /// Attracting fixed points of loxodromic words.
    Loxodromic,
}

#[derive(Args)]
struct SieveArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Curvature ceiling.
    #[arg(long)]
    max: u64,
    /// Largest almost-prime factor count to report.
    #[arg(long, default_value_t = 3)]
    factors: u32,
    /// Exponent recorded in the report for shape statistics downstream.
    #[arg(long, default_value_t = 1.3057)]
    delta: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CrtestArgs {
    /// Pair config file (JSON: rho1, rho2, pingpong disks).
    #[arg(long)]
    pair: PathBuf,
    #[arg(long, default_value_t = 6)]
    depth: usize,
    /// Number of near-concyclic quadruples to test.
    #[arg(long, default_value_t = 400)]
    samples: usize,
    /// Source concyclicity tolerance on |Im| of the cross-ratio.
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    /// RNG seed (required: quadruple sampling must be reproducible).
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    normalize: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct JointArgs {
    #[arg(long)]
    pair: PathBuf,
    /// Summed-metric distance threshold.
    #[arg(long = "T")]
    threshold: f64,
    /// Basepoint in the upper half-space: "default" for (0, 1), or
    /// "re,im,t" with t > 0.
    #[arg(long, default_value = "default")]
    o: String,
    #[arg(long)]
    tmin: Option<f64>,
    #[arg(long)]
    tmax: Option<f64>,
    #[arg(long)]
    normalize: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RenderArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// "auto" or "x0,x1,y0,y1".
    #[arg(long, default_value = "auto")]
    viewport: String,
}

/// Reproducibility sidecar written next to every output.
#[derive(Serialize)]
struct RunManifest {
    tool: &'static str,
    version: &'static str,
    subcommand: &'static str,
    args: BTreeMap<String, String>,
    seed: Option<u64>,
    threads: String,
    inputs: Vec<InputHash>,
    wall_time_ms: u64,
}

#[derive(Serialize)]
struct InputHash {
    path: String,
    sha256: String,
}

struct CmdError {
    code: u8,
    message: String,
}

impl CmdError {
    fn validation(msg: impl Into<String>) -> Self {
        CmdError {
            code: EXIT_VALIDATION,
            message: msg.into(),
        }
    }
}

impl From<DescartesError> for CmdError {
    fn from(e: DescartesError) -> Self {
        let code = match e {
            DescartesError::Overflow(_) => EXIT_OVERFLOW,
            _ => EXIT_VALIDATION,
        };
        CmdError {
            code,
            message: e.to_string(),
        }
    }
}

impl From<OrbitError> for CmdError {
    fn from(e: OrbitError) -> Self {
        let code = match e {
            OrbitError::InvalidPresentation(_) | OrbitError::InvalidEpsRange => EXIT_VALIDATION,
            OrbitError::NoLoxodromics | OrbitError::InsufficientResolution => EXIT_DEGENERATE,
            OrbitError::FrontierOverflow { .. } | OrbitError::InsufficientData { .. } => {
                EXIT_INSUFFICIENT
            }
        };
        CmdError {
            code,
            message: e.to_string(),
        }
    }
}

impl From<JoiningError> for CmdError {
    fn from(e: JoiningError) -> Self {
        let message = e.to_string();
        let code = match e {
            JoiningError::InvalidPair(_)
            | JoiningError::NotSchottky(_)
            | JoiningError::MismatchedPairing(_, _) => EXIT_VALIDATION,
            JoiningError::InsufficientConcyclic { .. } => EXIT_DEGENERATE,
            JoiningError::Orbit(o) => CmdError::from(o).code,
        };
        CmdError { code, message }
    }
}

impl From<StatsError> for CmdError {
    fn from(e: StatsError) -> Self {
        let code = match e {
            StatsError::InsufficientData { .. } => EXIT_INSUFFICIENT,
            StatsError::EmptyDenominator => EXIT_DEGENERATE,
            StatsError::NonPositiveCount => EXIT_VALIDATION,
        };
        CmdError {
            code,
            message: e.to_string(),
        }
    }
}

impl From<RenderError> for CmdError {
    fn from(e: RenderError) -> Self {
        CmdError::validation(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let threads = cli.threads.or_else(|| {
        std::env::var("PACKLAB_THREADS")
            .ok()
            .and_then(|s| s.parse().ok())
    });
    if let Some(k) = threads {
        if rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build_global()
            .is_err()
        {
            eprintln!("packlab: thread pool already initialized");
        }
    }

    let start = Instant::now();
    let result = match &cli.command {
        Command::Gen(args) => cmd_gen(args, start),
        Command::Fit(args) => cmd_fit(args, start),
        Command::Dim(args) => cmd_dim(args, start),
        Command::Sieve(args) => cmd_sieve(args, start),
        Command::Crtest(args) => cmd_crtest(args, start),
        Command::Joint(args) => cmd_joint(args, start),
        Command::Render(args) => cmd_render(args, start),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("packlab: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

fn read_input(path: &Path) -> Result<String, CmdError> {
    fs::read_to_string(path)
        .map_err(|e| CmdError::validation(format!("cannot read {}: {e}", path.display())))
}

fn sha256_hex(data: &str) -> String {
    let mut hasher = Sha256::new();
    hasher.update(data.as_bytes());
    hasher
        .finalize()
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

fn manifest(
    subcommand: &'static str,
    args: BTreeMap<String, String>,
    seed: Option<u64>,
    inputs: Vec<InputHash>,
    start: Instant,
) -> RunManifest {
    RunManifest {
        tool: "packlab",
        version: env!("CARGO_PKG_VERSION"),
        subcommand,
        args,
        seed,
        threads: rayon::current_num_threads().to_string(),
        inputs,
        wall_time_ms: start.elapsed().as_millis() as u64,
    }
}

/// Writes the data output to `--out` (or stdout) and the manifest next to
/// it (or to stderr when the data went to stdout).
fn write_output(out: Option<&Path>, data: &str, man: &RunManifest) -> Result<(), CmdError> {
    let man_json = to_json_17(man);
    match out {
        Some(path) => {
            fs::write(path, data).map_err(|e| {
                CmdError::validation(format!("cannot write {}: {e}", path.display()))
            })?;
            let mut man_path = path.as_os_str().to_owned();
            man_path.push(".manifest.json");
            let man_path = PathBuf::from(man_path);
            fs::write(&man_path, man_json).map_err(|e| {
                CmdError::validation(format!("cannot write {}: {e}", man_path.display()))
            })?;
        }
        None => {
            println!("{data}");
            eprintln!("{man_json}");
        }
    }
    Ok(())
}

fn cmd_gen(args: &GenArgs, start: Instant) -> Result<(), CmdError> {
    let root = match (&args.root, args.root_default) {
        (Some(ks), false) => {
            let k: [i128; 4] = ks
                .clone()
                .try_into()
                .map_err(|_| CmdError::validation("--root needs exactly four integers"))?;
            DescartesQuadruple::realize_root(k)?
        }
        (None, true) => DescartesQuadruple::root_bounded(),
        _ => {
            return Err(CmdError::validation(
                "pass exactly one of --root, --root-default",
            ))
        }
    };
    let run = generate(&root, args.max_curv)?;
    let csv = emit_circles_csv(&run);

    let mut m = BTreeMap::new();
    m.insert("root".into(), format!("{:?}", root.curvatures()));
    m.insert("max_curv".into(), args.max_curv.to_string());
    m.insert("out".into(), args.out.display().to_string());
    m.insert("circles".into(), run.len().to_string());
    let man = manifest("gen", m, None, vec![], start);
    write_output(Some(&args.out), &csv, &man)
}

fn load_rows(path: &Path) -> Result<(Vec<CircleRow>, InputHash), CmdError> {
    let text = read_input(path)?;
    let rows = parse_circles_csv(&text)?;
    let hash = InputHash {
        path: path.display().to_string(),
        sha256: sha256_hex(&text),
    };
    Ok((rows, hash))
}

#[derive(Serialize)]
struct FitReport {
    exponent: f64,
    stderr: f64,
    window: (f64, f64),
    series_points_in_window: usize,
    total_circles: usize,
}

fn cmd_fit(args: &FitArgs, start: Instant) -> Result<(), CmdError> {
    let (rows, hash) = load_rows(&args.input)?;
    let series = series_from_rows(&rows);
    let default = series.default_window();
    let window = (
        args.tmin.unwrap_or(default.0),
        args.tmax.unwrap_or(default.1),
    );
    if !(window.0 < window.1) {
        return Err(CmdError::validation("--tmin must be below --tmax"));
    }
    let in_window = series
        .pairs
        .iter()
        .filter(|(t, _)| *t >= window.0 && *t <= window.1)
        .count();
    if in_window == 0 {
        return Err(CmdError::validation(format!(
            "fit window [{}, {}] contains no data (data spans [{}, {}])",
            window.0,
            window.1,
            series.pairs.first().map(|p| p.0).unwrap_or(f64::NAN),
            series.pairs.last().map(|p| p.0).unwrap_or(f64::NAN),
        )));
    }
    let (exponent, stderr) = fit_power_law(&series, window)?;
    let report = FitReport {
        exponent,
        stderr,
        window,
        series_points_in_window: in_window,
        total_circles: rows.len(),
    };

    let mut m = BTreeMap::new();
    m.insert("in".into(), args.input.display().to_string());
    m.insert("tmin".into(), window.0.to_string());
    m.insert("tmax".into(), window.1.to_string());
    let man = manifest("fit", m, None, vec![hash], start);
    write_output(args.out.as_deref(), &to_json_17(&report), &man)
}

fn series_from_rows(rows: &[CircleRow]) -> CountSeries {
    let mut census: BTreeMap<i128, u64> = BTreeMap::new();
    for r in rows {
        *census.entry(r.curvature).or_insert(0) += 1;
    }
    let mut pairs = Vec::with_capacity(census.len());
    let mut cum = 0;
    for (k, n) in census {
        cum += n;
        pairs.push((k as f64, cum));
    }
    CountSeries::new(pairs)
}

#[derive(Serialize)]
struct DimReport {
    critical_exponent: packlab::orbits::ExponentEstimate,
    box_dimension: packlab::orbits::ExponentEstimate,
    gap: f64,
    growth_ball_complete: bool,
    chart: &'static str,
    method: &'static str,
    depth: usize,
    limit_points: usize,
    matrix_collisions: usize,
}

fn cmd_dim(args: &DimArgs, start: Instant) -> Result<(), CmdError> {
    let text = read_input(&args.group)?;
    let pres = GroupPresentation::from_json_str(&text, args.normalize)?;
    let method = match args.method {
        MethodArg::OrbitAccumulation => SampleMethod::OrbitAccumulation,
        MethodArg::Loxodromic => SampleMethod::LoxodromicFixedPoints,
    };
    let sample = limit_sample(&pres, args.depth, method)?;
    let dim = box_dimension(&sample.charted, args.eps_max, args.eps_decades)?;

    let o = H3Point::base();
    let t_cert = certified_threshold(&pres, &o, args.depth)?;
    let orbit = enumerate(&pres, &o, f64::INFINITY, args.depth)?;
    // Prefer a window inside the certified ball; when that window is too
    // thin (parabolic-heavy groups certify almost nothing at any feasible
    // depth), fall back to the observed range and say so in the report.
    // Explicit --tmin/--tmax override the corresponding side either way.
    let auto = {
        let certified = (0.4 * t_cert, t_cert);
        if t_cert > 0.0 && critical_exponent(&orbit, certified).is_ok() {
            certified
        } else {
            let d_max = orbit.records.last().map(|r| r.dist).unwrap_or(1.0);
            (0.4 * 0.8 * d_max, 0.8 * d_max)
        }
    };
    let window = (args.tmin.unwrap_or(auto.0), args.tmax.unwrap_or(auto.1));
    let exponent = critical_exponent(&orbit, window)?;

    let report = DimReport {
        gap: (exponent.value - dim.value).abs(),
        critical_exponent: exponent,
        box_dimension: dim,
        growth_ball_complete: window.1 <= t_cert,
        chart: sample.chart_name,
        method: match method {
            SampleMethod::OrbitAccumulation => "orbit-accumulation",
            SampleMethod::LoxodromicFixedPoints => "loxodromic-fixed-points",
        },
        depth: args.depth,
        limit_points: sample.charted.len(),
        matrix_collisions: orbit.matrix_collisions,
    };

    let mut m = BTreeMap::new();
    m.insert("group".into(), args.group.display().to_string());
    m.insert("depth".into(), args.depth.to_string());
    m.insert("method".into(), report.method.to_string());
    m.insert("eps_decades".into(), args.eps_decades.to_string());
    m.insert("eps_max".into(), args.eps_max.to_string());
    let hash = InputHash {
        path: args.group.display().to_string(),
        sha256: sha256_hex(&text),
    };
    let man = manifest("dim", m, None, vec![hash], start);
    write_output(args.out.as_deref(), &to_json_17(&report), &man)
}

fn cmd_sieve(args: &SieveArgs, start: Instant) -> Result<(), CmdError> {
    let (rows, hash) = load_rows(&args.input)?;
    let mut census: BTreeMap<i128, u64> = BTreeMap::new();
    for r in rows {
        *census.entry(r.curvature).or_insert(0) += 1;
    }
    let report = sieve(&census, args.max, args.factors, args.delta);

    let mut m = BTreeMap::new();
    m.insert("in".into(), args.input.display().to_string());
    m.insert("max".into(), args.max.to_string());
    m.insert("factors".into(), args.factors.to_string());
    let man = manifest("sieve", m, None, vec![hash], start);
    write_output(args.out.as_deref(), &to_json_17(&report), &man)
}

fn cmd_crtest(args: &CrtestArgs, start: Instant) -> Result<(), CmdError> {
    let text = read_input(&args.pair)?;
    let pair = RepresentationPair::from_json_str(&text, args.normalize)?;
    let sample = boundary_pairs(&pair, args.depth)?;
    let report = conformality_stat(&sample, args.samples, args.tol, args.seed)?;

    let mut m = BTreeMap::new();
    m.insert("pair".into(), args.pair.display().to_string());
    m.insert("depth".into(), args.depth.to_string());
    m.insert("samples".into(), args.samples.to_string());
    m.insert("tol".into(), args.tol.to_string());
    m.insert(
        "rejected_mismatched".into(),
        sample.rejected_mismatched.to_string(),
    );
    let hash = InputHash {
        path: args.pair.display().to_string(),
        sha256: sha256_hex(&text),
    };
    let man = manifest("crtest", m, Some(args.seed), vec![hash], start);
    write_output(args.out.as_deref(), &to_json_17(&report), &man)
}

#[derive(Serialize)]
struct JointReport {
    estimate: packlab::orbits::ExponentEstimate,
    complete: bool,
    words_visited: usize,
    max_word_len: usize,
    /// Theorem bound for Zariski-dense two-factor pairs.
    bound: f64,
    below_bound: bool,
}

fn parse_basepoint(spec: &str) -> Result<H3Point, CmdError> {
    if spec == "default" {
        return Ok(H3Point::base());
    }
    let parts: Vec<f64> = spec
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| CmdError::validation(format!("bad --o: {e}")))?;
    match parts.as_slice() {
        [re, im, t] if *t > 0.0 => Ok(H3Point::new(num_complex::Complex64::new(*re, *im), *t)),
        _ => Err(CmdError::validation(
            "--o needs \"default\" or re,im,t with t > 0",
        )),
    }
}

fn cmd_joint(args: &JointArgs, start: Instant) -> Result<(), CmdError> {
    let text = read_input(&args.pair)?;
    let pair = RepresentationPair::from_json_str(&text, args.normalize)?;
    let o = parse_basepoint(&args.o)?;
    let joint = joint_enumerate(&pair, &o, args.threshold, 8_000_000)?;
    let window = (
        args.tmin.unwrap_or(args.threshold / 2.0),
        args.tmax.unwrap_or(args.threshold),
    );
    let estimate = joint_exponent(&joint, window)?;
    let bound = 2.0 / 2.0f64.sqrt();
    let report = JointReport {
        below_bound: estimate.value < bound,
        bound,
        estimate,
        complete: joint.complete,
        words_visited: joint.words_visited,
        max_word_len: joint.max_word_len,
    };

    let mut m = BTreeMap::new();
    m.insert("pair".into(), args.pair.display().to_string());
    m.insert("T".into(), args.threshold.to_string());
    m.insert("o".into(), args.o.clone());
    let hash = InputHash {
        path: args.pair.display().to_string(),
        sha256: sha256_hex(&text),
    };
    let man = manifest("joint", m, None, vec![hash], start);
    write_output(args.out.as_deref(), &to_json_17(&report), &man)
}

fn cmd_render(args: &RenderArgs, start: Instant) -> Result<(), CmdError> {
    let text = read_input(&args.input)?;
    let rows = parse_circles_csv(&text)?;
    let mut scene = Scene::from_rows(&rows);
    if args.viewport != "auto" {
        let parts: Vec<f64> = args
            .viewport
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| CmdError::validation(format!("bad --viewport: {e}")))?;
        let [x0, x1, y0, y1]: [f64; 4] = parts
            .try_into()
            .map_err(|_| CmdError::validation("--viewport needs x0,x1,y0,y1"))?;
        if !(x1 > x0 && y1 > y0) {
            return Err(CmdError::validation("--viewport must have positive area"));
        }
        scene.viewport = (x0, x1, y0, y1);
    }
    let svg = emit_svg(&scene);

    let mut m = BTreeMap::new();
    m.insert("in".into(), args.input.display().to_string());
    m.insert("out".into(), args.out.display().to_string());
    m.insert("viewport".into(), args.viewport.clone());
    let hash = InputHash {
        path: args.input.display().to_string(),
        sha256: sha256_hex(&text),
    };
    let man = manifest("render", m, None, vec![hash], start);
    write_output(Some(&args.out), &svg, &man)
}
