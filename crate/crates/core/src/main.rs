//! Command-line front end for the landscape pipeline.
//!
//! `sample` writes an LLG grid, `spectrum` writes eigenpairs, `analyze`
//! turns a grid into a report, `render` draws SVGs, and `smad` prints the
//! single metric. Exit codes: 0 success, 1 internal error, 2 input/usage
//! error, 3 numeric error.

use clap::{Args, Parser, Subcommand, ValueEnum};
use losscape::error::{Error, Result};
use losscape::llg;
use losscape::metrics::{assemble_report, smad};
use losscape::oracle::{builtin_from_name, LossOracle, MlpOracle, ParamVector, ToyDataset};
use losscape::sampler::{build_subspace, sample_grid, AxisScaling, LandscapeGrid};
use losscape::spectral::{hutchinson_trace, top_eigenpairs, EigenOrdering, SpectralConfig};
use losscape::topology::{build_merge_tree, simplify, stable_manifolds, Adjacency, Barcode, MergeTree, StableManifolds};
use losscape::viz;
use serde::Deserialize;
use std::path::{Path, PathBuf};

#[derive(Parser)]
#[command(name = "losscape", version, about = "Loss-landscape topology and the SMAD smoothness metric")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum AdjacencyArg {
    Axis,
    Full,
}

impl From<AdjacencyArg> for Adjacency {
    fn from(a: AdjacencyArg) -> Adjacency {
        match a {
            AdjacencyArg::Axis => Adjacency::Axis,
            AdjacencyArg::Full => Adjacency::Full,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ScalingArg {
    Uniform,
    InverseEigenvalue,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OrderingArg {
    Magnitude,
    Algebraic,
}

/// Oracle selection shared by `sample` and `spectrum`.
#[derive(Args, Debug, Clone)]
struct OracleArgs {
    /// Builtin function name (see --help for the list), or `mlp` with
    /// --checkpoint/--data.
    #[arg(long = "fn")]
    function: Option<String>,

    /// Ambient dimension for builtins that need one.
    #[arg(long)]
    dims: Option<usize>,

    /// Flat f64 checkpoint with a `{dim, spec}` JSON sidecar (mlp oracles).
    #[arg(long)]
    checkpoint: Option<PathBuf>,

    /// Dataset JSON `{inputs, targets}` (required with --checkpoint).
    #[arg(long)]
    data: Option<PathBuf>,

    /// Origin point, comma-separated; defaults to the builtin's canonical
    /// point (zeros; ones for rosenbrock; the checkpoint for mlp).
    #[arg(long)]
    origin: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a loss grid along top Hessian eigenvectors and write an LLG file.
    Sample {
        #[command(flatten)]
        oracle: OracleArgs,
        /// Subspace dimension n.
        #[arg(short = 'n', long)]
        subspace_dims: Option<usize>,
        /// Base half-width r of each axis.
        #[arg(long)]
        range: Option<f64>,
        /// Points per axis (odd, >= 3).
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long, value_enum)]
        scaling: Option<ScalingArg>,
        #[arg(long)]
        seed: Option<u64>,
        /// Write the JSON LLG variant instead of binary.
        #[arg(long)]
        json: bool,
        #[arg(short, long)]
        out: PathBuf,
        /// JSON config file; explicit flags override its values.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Extract top-k Hessian eigenpairs (and optionally a trace estimate).
    Spectrum {
        #[command(flatten)]
        oracle: OracleArgs,
        #[arg(short, long)]
        k: Option<usize>,
        #[arg(long)]
        max_iter: Option<usize>,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum)]
        ordering: Option<OrderingArg>,
        /// Also run the Hutchinson trace estimator with this many samples.
        #[arg(long)]
        trace_samples: Option<usize>,
        #[arg(short, long)]
        out: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Compute topology and metrics of a grid file into a report JSON.
    Analyze {
        /// Input grid (.llg binary/JSON, or .csv for 2-D tables).
        input: PathBuf,
        #[arg(long, value_enum)]
        adjacency: Option<AdjacencyArg>,
        /// Cancel finite pairs with persistence below this threshold.
        #[arg(long)]
        simplify: Option<f64>,
        /// Report path; defaults to `<input>.report.json`.
        #[arg(short, long)]
        out: Option<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Render SVG views of a grid file.
    Render {
        input: PathBuf,
        #[arg(long)]
        barcode: Option<PathBuf>,
        #[arg(long)]
        mergetree: Option<PathBuf>,
        #[arg(long)]
        profile: Option<PathBuf>,
        /// Contour map (2-D grids only).
        #[arg(long)]
        contour: Option<PathBuf>,
        #[arg(long, value_enum)]
        adjacency: Option<AdjacencyArg>,
        #[arg(long)]
        simplify: Option<f64>,
        /// Iso-line count for --contour.
        #[arg(long)]
        contour_levels: Option<usize>,
        /// Level count per branch for --profile.
        #[arg(long)]
        profile_levels: Option<usize>,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Print the SMAD value of a grid file.
    Smad {
        input: PathBuf,
        #[arg(long, value_enum)]
        adjacency: Option<AdjacencyArg>,
        #[arg(long)]
        simplify: Option<f64>,
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

/// Values a JSON config file may supply; explicit flags always win.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    function: Option<String>,
    dims: Option<usize>,
    subspace_dims: Option<usize>,
    range: Option<f64>,
    steps: Option<usize>,
    scaling: Option<String>,
    seed: Option<u64>,
    k: Option<usize>,
    max_iter: Option<usize>,
    tol: Option<f64>,
    ordering: Option<String>,
    trace_samples: Option<usize>,
    adjacency: Option<String>,
    simplify: Option<f64>,
    contour_levels: Option<usize>,
    profile_levels: Option<usize>,
}

fn load_config(path: &Option<PathBuf>) -> Result<FileConfig> {
    match path {
        None => Ok(FileConfig::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p)?;
            serde_json::from_str(&text)
                .map_err(|e| Error::format(format!("bad config file {}: {e}", p.display())))
        }
    }
}

fn parse_adjacency(name: &str) -> Result<Adjacency> {
    match name {
        "axis" => Ok(Adjacency::Axis),
        "full" => Ok(Adjacency::Full),
        other => Err(Error::usage(format!("unknown adjacency {other:?} (axis or full)"))),
    }
}

fn resolve_adjacency(flag: Option<AdjacencyArg>, cfg: &FileConfig) -> Result<Adjacency> {
    match (flag, &cfg.adjacency) {
        (Some(a), _) => Ok(a.into()),
        (None, Some(name)) => parse_adjacency(name),
        (None, None) => Ok(Adjacency::Axis),
    }
}

/// Build the oracle and its origin point from CLI arguments.
fn resolve_oracle(args: &OracleArgs, cfg: &FileConfig, seed: u64) -> Result<(Box<dyn LossOracle + Send>, ParamVector)> {
    let function = args.function.clone().or_else(|| cfg.function.clone());
    let dims = args.dims.or(cfg.dims).unwrap_or(2);

    let (oracle, default_origin): (Box<dyn LossOracle + Send>, Vec<f64>) = match (&args.checkpoint, &function) {
        (Some(ckpt), _) => {
            let (params, spec) = llg::load_checkpoint(ckpt)?;
            let data_path = args
                .data
                .as_ref()
                .ok_or_else(|| Error::usage("--checkpoint requires --data <dataset.json>"))?;
            let text = std::fs::read_to_string(data_path)?;
            let data: ToyDataset = serde_json::from_str(&text)
                .map_err(|e| Error::format(format!("bad dataset JSON: {e}")))?;
            let origin = params.as_slice().to_vec();
            (Box::new(MlpOracle::new(spec, data)?), origin)
        }
        (None, Some(name)) if name == "mlp" => {
            return Err(Error::usage("mlp oracles need --checkpoint and --data"));
        }
        (None, Some(name)) => {
            let oracle = builtin_from_name(name, dims, seed)?;
            let d = oracle.dim();
            let origin = if name == "rosenbrock" { vec![1.0; d] } else { vec![0.0; d] };
            (oracle, origin)
        }
        (None, None) => {
            return Err(Error::usage("no oracle: pass --fn <builtin> or --checkpoint/--data"));
        }
    };

    let origin = match &args.origin {
        None => ParamVector::new(default_origin)?,
        Some(text) => {
            let parsed: Result<Vec<f64>> = text
                .split(',')
                .map(|tok| {
                    tok.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::usage(format!("bad origin component {tok:?}")))
                })
                .collect();
            let vec = ParamVector::new(parsed?)?;
            if vec.len() != oracle.dim() {
                return Err(Error::usage(format!(
                    "origin has {} components but the oracle expects {}",
                    vec.len(),
                    oracle.dim()
                )));
            }
            vec
        }
    };
    Ok((oracle, origin))
}

fn read_grid(input: &Path) -> Result<LandscapeGrid> {
    match input.extension().and_then(|e| e.to_str()) {
        Some("csv") => llg::read_csv_grid(input),
        _ => llg::read_llg(input),
    }
}

/// Topology stage shared by analyze/render/smad.
fn topology_stage(
    grid: &LandscapeGrid,
    adjacency: Adjacency,
    tau: Option<f64>,
) -> Result<(MergeTree, Barcode, StableManifolds)> {
    let (tree, barcode) = build_merge_tree(grid, adjacency)?;
    let manifolds = stable_manifolds(grid, adjacency)?;
    match tau {
        None => Ok((tree, barcode, manifolds)),
        Some(t) => simplify(&tree, &barcode, &manifolds, t),
    }
}

fn write_json_atomic<T: serde::Serialize>(value: &T, path: &Path) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    llg::atomic_write(path, &bytes)
}

#[allow(clippy::too_many_arguments)]
fn cmd_sample(
    oracle_args: &OracleArgs,
    subspace_dims: Option<usize>,
    range: Option<f64>,
    steps: Option<usize>,
    scaling: Option<ScalingArg>,
    seed: Option<u64>,
    json: bool,
    out: &Path,
    config: &Option<PathBuf>,
) -> Result<()> {
    let cfg = load_config(config)?;
    let seed = seed.or(cfg.seed).unwrap_or(0);
    let n = subspace_dims.or(cfg.subspace_dims).unwrap_or(2);
    let range = range.or(cfg.range).unwrap_or(0.5);
    let steps = steps.or(cfg.steps).unwrap_or(11);
    let scaling = match (scaling, &cfg.scaling) {
        (Some(ScalingArg::Uniform), _) => AxisScaling::Uniform,
        (Some(ScalingArg::InverseEigenvalue), _) => AxisScaling::InverseEigenvalue,
        (None, Some(name)) => match name.as_str() {
            "uniform" => AxisScaling::Uniform,
            "inverse-eigenvalue" => AxisScaling::InverseEigenvalue,
            other => return Err(Error::usage(format!("unknown scaling {other:?}"))),
        },
        (None, None) => AxisScaling::Uniform,
    };

    let (oracle, origin) = resolve_oracle(oracle_args, &cfg, seed)?;
    let mut spectral_cfg = SpectralConfig::new(n.min(oracle.dim()));
    spectral_cfg.seed = seed;
    if let Some(mi) = cfg.max_iter {
        spectral_cfg.max_iter = mi;
    }
    let spectral = top_eigenpairs(oracle.as_ref(), &origin, &spectral_cfg)?;
    let spec = build_subspace(origin, &spectral, n, range, steps, scaling)?;
    let mut grid = sample_grid(oracle.as_ref(), &spec)?;
    grid.meta.extra.insert("seed".to_string(), serde_json::json!(seed));
    grid.meta.extra.insert(
        "scaling".to_string(),
        serde_json::json!(match scaling {
            AxisScaling::Uniform => "uniform",
            AxisScaling::InverseEigenvalue => "inverse-eigenvalue",
        }),
    );
    if json {
        llg::write_llg_json(&grid, out)?;
    } else {
        llg::write_llg(&grid, out)?;
    }
    println!("wrote {} ({} points, shape {:?})", out.display(), grid.len(), grid.shape());
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_spectrum(
    oracle_args: &OracleArgs,
    k: Option<usize>,
    max_iter: Option<usize>,
    tol: Option<f64>,
    seed: Option<u64>,
    ordering: Option<OrderingArg>,
    trace_samples: Option<usize>,
    out: &Path,
    config: &Option<PathBuf>,
) -> Result<()> {
    let cfg = load_config(config)?;
    let seed = seed.or(cfg.seed).unwrap_or(0);
    let (oracle, origin) = resolve_oracle(oracle_args, &cfg, seed)?;
    let mut s_cfg = SpectralConfig::new(k.or(cfg.k).unwrap_or(2));
    s_cfg.seed = seed;
    if let Some(mi) = max_iter.or(cfg.max_iter) {
        s_cfg.max_iter = mi;
    }
    if let Some(t) = tol.or(cfg.tol) {
        s_cfg.tol = t;
    }
    s_cfg.ordering = match (ordering, &cfg.ordering) {
        (Some(OrderingArg::Magnitude), _) => EigenOrdering::Magnitude,
        (Some(OrderingArg::Algebraic), _) => EigenOrdering::Algebraic,
        (None, Some(name)) => match name.as_str() {
            "magnitude" => EigenOrdering::Magnitude,
            "algebraic" => EigenOrdering::Algebraic,
            other => return Err(Error::usage(format!("unknown ordering {other:?}"))),
        },
        (None, None) => EigenOrdering::Magnitude,
    };

    let result = top_eigenpairs(oracle.as_ref(), &origin, &s_cfg)?;
    let trace = match trace_samples.or(cfg.trace_samples) {
        Some(m) => Some(hutchinson_trace(oracle.as_ref(), &origin, m, seed)?),
        None => None,
    };

    let mut eigenvector_files = Vec::new();
    for (i, vec) in result.eigenvectors.iter().enumerate() {
        let path = out.with_extension(format!("eig{i}.f64"));
        let mut extra = serde_json::Map::new();
        extra.insert("eigenvalue".to_string(), serde_json::json!(result.eigenvalues[i]));
        extra.insert("index".to_string(), serde_json::json!(i));
        llg::write_vector(&path, vec, extra)?;
        eigenvector_files.push(path.display().to_string());
    }

    let doc = serde_json::json!({
        "eigenvalues": result.eigenvalues,
        "residuals": result.residuals,
        "iterations": result.iterations,
        "converged": result.converged,
        "degenerate": result.degenerate,
        "ordering": s_cfg.ordering,
        "seed": seed,
        "oracle": oracle.id(),
        "eigenvector_files": eigenvector_files,
        "trace": trace,
    });
    write_json_atomic(&doc, out)?;
    println!("eigenvalues: {:?}", result.eigenvalues);
    if let Some(t) = trace {
        println!("trace: {} +- {} ({} samples)", t.estimate, t.stderr, t.samples);
    }
    Ok(())
}

fn cmd_analyze(
    input: &Path,
    adjacency: Option<AdjacencyArg>,
    simplify_tau: Option<f64>,
    out: &Option<PathBuf>,
    config: &Option<PathBuf>,
) -> Result<()> {
    let cfg = load_config(config)?;
    let adjacency = resolve_adjacency(adjacency, &cfg)?;
    let tau = simplify_tau.or(cfg.simplify);
    let grid = read_grid(input)?;
    if grid.value_range() == 0.0 {
        eprintln!("warning: degenerate range R=0 (constant landscape), SMAD = 0");
    }
    let (_, barcode, manifolds) = topology_stage(&grid, adjacency, tau)?;
    let mut report = assemble_report(&grid, &barcode, &manifolds, None, None)?;
    report.simplify_threshold = tau;
    let out_path = out.clone().unwrap_or_else(|| {
        let mut os = input.as_os_str().to_owned();
        os.push(".report.json");
        PathBuf::from(os)
    });
    write_json_atomic(&report, &out_path)?;
    println!("SMAD: {}", report.smad.smad);
    println!("persistence range: {}", report.persistence_range);
    println!("wrote {}", out_path.display());
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_render(
    input: &Path,
    barcode_out: &Option<PathBuf>,
    mergetree_out: &Option<PathBuf>,
    profile_out: &Option<PathBuf>,
    contour_out: &Option<PathBuf>,
    adjacency: Option<AdjacencyArg>,
    simplify_tau: Option<f64>,
    contour_levels: Option<usize>,
    profile_levels: Option<usize>,
    config: &Option<PathBuf>,
) -> Result<()> {
    if barcode_out.is_none() && mergetree_out.is_none() && profile_out.is_none() && contour_out.is_none() {
        return Err(Error::usage(
            "nothing to render: pass at least one of --barcode, --mergetree, --profile, --contour",
        ));
    }
    let cfg = load_config(config)?;
    let adjacency = resolve_adjacency(adjacency, &cfg)?;
    let tau = simplify_tau.or(cfg.simplify);
    let grid = read_grid(input)?;

    if let Some(path) = contour_out {
        let levels = contour_levels.or(cfg.contour_levels).unwrap_or(10);
        let svg = viz::render_contour(&grid, levels)?;
        llg::atomic_write(path, svg.as_bytes())?;
        println!("wrote {}", path.display());
    }
    if barcode_out.is_some() || mergetree_out.is_some() || profile_out.is_some() {
        let (tree, barcode, manifolds) = topology_stage(&grid, adjacency, tau)?;
        if let Some(path) = barcode_out {
            llg::atomic_write(path, viz::render_barcode(&barcode).as_bytes())?;
            println!("wrote {}", path.display());
        }
        if let Some(path) = mergetree_out {
            llg::atomic_write(path, viz::render_merge_tree(&tree).as_bytes())?;
            println!("wrote {}", path.display());
        }
        if let Some(path) = profile_out {
            let levels = profile_levels.or(cfg.profile_levels).unwrap_or(viz::DEFAULT_PROFILE_LEVELS);
            let layout = viz::layout_profile(&tree, &manifolds, &grid, levels)?;
            llg::atomic_write(path, viz::render_profile(&layout).as_bytes())?;
            println!("wrote {}", path.display());
        }
    }
    Ok(())
}

fn cmd_smad(
    input: &Path,
    adjacency: Option<AdjacencyArg>,
    simplify_tau: Option<f64>,
    config: &Option<PathBuf>,
) -> Result<()> {
    let cfg = load_config(config)?;
    let adjacency = resolve_adjacency(adjacency, &cfg)?;
    let tau = simplify_tau.or(cfg.simplify);
    let grid = read_grid(input)?;
    let (_, barcode, manifolds) = topology_stage(&grid, adjacency, tau)?;
    let report = smad(&barcode, &manifolds, &grid)?;
    println!("{}", report.smad);
    Ok(())
}

fn run() -> Result<()> {
    if let Ok(threads) = std::env::var("LOSSCAPE_THREADS") {
        let n: usize = threads
            .parse()
            .map_err(|_| Error::usage(format!("LOSSCAPE_THREADS must be an integer, got {threads:?}")))?;
        // Ignore "already initialized": tests may call run() repeatedly.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let cli = Cli::parse();
    match &cli.command {
        Command::Sample { oracle, subspace_dims, range, steps, scaling, seed, json, out, config } => {
            cmd_sample(oracle, *subspace_dims, *range, *steps, *scaling, *seed, *json, out, config)
        }
        Command::Spectrum { oracle, k, max_iter, tol, seed, ordering, trace_samples, out, config } => {
            cmd_spectrum(oracle, *k, *max_iter, *tol, *seed, *ordering, *trace_samples, out, config)
        }
        Command::Analyze { input, adjacency, simplify, out, config } => {
            cmd_analyze(input, *adjacency, *simplify, out, config)
        }
        Command::Render {
            input,
            barcode,
            mergetree,
            profile,
            contour,
            adjacency,
            simplify,
            contour_levels,
            profile_levels,
            config,
        } => cmd_render(
            input,
            barcode,
            mergetree,
            profile,
            contour,
            *adjacency,
            *simplify,
            *contour_levels,
            *profile_levels,
            config,
        ),
        Command::Smad { input, adjacency, simplify, config } => {
            cmd_smad(input, *adjacency, *simplify, config)
        }
    }
}

fn main() {
    match run() {
        Ok(()) => {}
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
