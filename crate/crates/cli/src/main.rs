mod grid_io;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use walsh_lprf::harness::generate::gen_guillotine_partition;
use walsh_lprf::harness::identities::g_outside_support;
use walsh_lprf::harness::tolerances;
use walsh_lprf::harness::{
    run_experiment, verify_identities, CoefficientDist, ExperimentConfig, Fault, IdentityConfig,
    PartitionKind, RatioReport,
};
use walsh_lprf::martingale::check_rectangle_atom;
use walsh_lprf::walsh::inverse_walsh_transform_2d;
use walsh_lprf::{
    decompose_interval, decompose_rectangle, make_rectangle_atom, walsh_transform_2d, CoeffMatrix,
    DyadicSpatialRect, GridFunction, Interval1D, Resolution, SpectralRectangle,
};

/// Relative output paths are resolved against this directory when set.
const OUT_DIR_ENV: &str = "WALSH_LPRF_OUT_DIR";

#[derive(Parser)]
#[command(
    name = "walsh-lprf",
    version,
    about = "Two-parameter Walsh analysis toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Paley-ordered 2D Walsh transform of a square text grid.
    Transform(TransformArgs),
    /// Xor-shiftable block decomposition of an interval or rectangle.
    Decompose(DecomposeArgs),
    /// Run the exact-identity suite; exits nonzero if any check fails.
    VerifyIdentities(VerifyArgs),
    /// Monte-Carlo ratio experiment over random rectangle families.
    LprfRun(LprfArgs),
    /// Build a rectangle atom and check its support under G.
    AtomTest(AtomArgs),
}

#[derive(Args)]
struct TransformArgs {
    /// Input grid, or `-` for standard input.
    #[arg(long, short, default_value = "-")]
    input: PathBuf,
    /// Output file; standard output when omitted.
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// Treat the input as coefficients and synthesize grid values.
    #[arg(long)]
    inverse: bool,
}

#[derive(Args)]
struct DecomposeArgs {
    /// Left endpoint (inclusive).
    #[arg(long, required_unless_present = "rect", conflicts_with = "rect")]
    a: Option<u64>,
    /// Right endpoint (exclusive).
    #[arg(long, required_unless_present = "rect", conflicts_with = "rect")]
    b: Option<u64>,
    /// Rectangle `[a1, b1) × [a2, b2)` given as `a1,b1,a2,b2`.
    #[arg(long, value_parser = parse_tuple::<u64, 4>)]
    rect: Option<[u64; 4]>,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, default_value_t = IdentityConfig::default().m)]
    m: u32,
    #[arg(long, default_value_t = IdentityConfig::default().seed)]
    seed: u64,
    #[arg(long, default_value_t = IdentityConfig::default().trials)]
    trials: usize,
    /// Sweep every interval with `b ≤ interval-bound`.
    #[arg(long, default_value_t = IdentityConfig::default().interval_bound)]
    interval_bound: u64,
    #[arg(long, default_value_t = 1)]
    min_block: u64,
    /// Corrupt every block vertex; the shift-identity check must then fail.
    #[arg(long)]
    inject_fault: bool,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct LprfArgs {
    #[arg(long, default_value_t = ExperimentConfig::default().m)]
    m: u32,
    #[arg(long, default_value_t = ExperimentConfig::default().trials)]
    trials: usize,
    /// Comma-separated exponents in (1, 2].
    #[arg(long, value_delimiter = ',', default_value = "1.1,1.25,1.5,2")]
    p_list: Vec<f64>,
    /// `guillotine`, `row-bands` or `file:PATH`.
    #[arg(long, default_value = "guillotine", value_parser = PartitionKind::from_str)]
    partition: PartitionKind,
    #[arg(long, default_value_t = 1)]
    min_block: u64,
    /// `gaussian` or `rademacher`.
    #[arg(long, default_value = "gaussian", value_parser = CoefficientDist::from_str)]
    dist: CoefficientDist,
    #[arg(long, default_value_t = ExperimentConfig::default().seed)]
    seed: u64,
    /// JSON report path.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Per-trial CSV path.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct AtomArgs {
    #[arg(long, default_value_t = 6)]
    m: u32,
    /// Support scale `n1,n2`: the support has side lengths `2^-n1 × 2^-n2`.
    #[arg(long, value_parser = parse_tuple::<u32, 2>, default_value = "2,2")]
    scale: [u32; 2],
    /// Support position `k1,k2` at that scale.
    #[arg(long, value_parser = parse_tuple::<u64, 2>, default_value = "0,0")]
    position: [u64; 2],
    #[arg(long, default_value_t = 1.0)]
    p: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Minimum block side of the random partition defining the shift family.
    #[arg(long, default_value_t = 1)]
    min_block: u64,
}

/// `"x1,...,xN"` into an array.
fn parse_tuple<T: FromStr, const N: usize>(s: &str) -> std::result::Result<[T; N], String> {
    let parts = s
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<T>()
                .map_err(|_| format!("{t:?} is not a valid number"))
        })
        .collect::<std::result::Result<Vec<T>, String>>()?;
    let found = parts.len();
    parts
        .try_into()
        .map_err(|_| format!("expected {N} comma-separated values, got {found}"))
}

fn output_path(path: &Path) -> PathBuf {
    match std::env::var_os(OUT_DIR_ENV) {
        Some(dir) if path.is_relative() && !dir.is_empty() => Path::new(&dir).join(path),
        _ => path.to_path_buf(),
    }
}

fn ensure_parent(path: &Path) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)
            .with_context(|| format!("creating {}", parent.display()))?;
    }
    Ok(())
}

fn transform(args: &TransformArgs) -> Result<bool> {
    let rows = grid_io::parse_rows(&grid_io::read_text(&args.input)?)?;
    let grid = GridFunction::from_rows(&rows)
        .with_context(|| format!("parsing grid from {}", args.input.display()))?;
    let res = grid.resolution();
    let out_rows = if args.inverse {
        let coeffs = CoeffMatrix::new(res, grid.into_values())?;
        inverse_walsh_transform_2d(&coeffs).rows()
    } else {
        let c = walsh_transform_2d(&grid);
        c.coeffs().chunks(res.side()).map(<[f64]>::to_vec).collect()
    };
    let text = grid_io::format_rows(&out_rows);
    match &args.output {
        Some(path) => {
            let path = output_path(path);
            ensure_parent(&path)?;
            std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        }
        None => print!("{text}"),
    }
    Ok(true)
}

fn decompose(args: &DecomposeArgs) -> Result<bool> {
    if let Some(r) = &args.rect {
        let rect = SpectralRectangle::from_corners(r[0], r[1], r[2], r[3])?;
        let dec = decompose_rectangle(rect);
        if args.json {
            println!("{}", serde_json::to_string_pretty(&dec)?);
        } else {
            println!("{rect}: {} blocks", dec.blocks.len());
            for blk in &dec.blocks {
                println!(
                    "  {:?}  {} × {}  vertex {}  k = {}",
                    blk.cls, blk.range1, blk.range2, blk.vertex, blk.diff_index
                );
            }
        }
        return Ok(true);
    }
    let (a, b) = (
        args.a.expect("clap requires a"),
        args.b.expect("clap requires b"),
    );
    let dec = decompose_interval(Interval1D::new(a, b)?);
    if args.json {
        println!("{}", serde_json::to_string_pretty(&dec)?);
    } else {
        println!("{}: {} blocks", dec.interval, dec.block_count());
        for (kind, block) in dec.pieces() {
            println!("  {kind:?}  {block}  k = {}", kind.diff_factor());
        }
    }
    Ok(true)
}

fn verify(args: &VerifyArgs) -> Result<bool> {
    let cfg = IdentityConfig {
        m: args.m,
        seed: args.seed,
        trials: args.trials,
        interval_bound: args.interval_bound,
        min_block: args.min_block,
        fault: args.inject_fault.then_some(Fault::CorruptDecomposition),
    };
    let report = verify_identities(&cfg)?;
    if args.json {
        println!("{}", serde_json::to_string_pretty(&report)?);
    } else {
        for c in &report.checks {
            println!("{c}");
        }
        let failed = report.checks.iter().filter(|c| !c.passed).count();
        println!(
            "{} of {} checks passed",
            report.checks.len() - failed,
            report.checks.len()
        );
    }
    Ok(report.passed())
}

fn print_report(report: &RatioReport) {
    println!(
        "m={} trials={} seed={} config={}",
        report.environment.m,
        report.environment.trials,
        report.environment.seed,
        report.environment.config_hash
    );
    println!(
        "{:>6} {:>10} {:>10} {:>10} {:>10}  status",
        "p", "max", "mean", "min", "threshold"
    );
    for r in &report.records {
        let threshold = r.threshold.map_or("-".into(), |t| format!("{t:.4}"));
        let status = match r.passed {
            Some(true) => "pass",
            Some(false) => "FAIL",
            None => "exploratory",
        };
        println!(
            "{:>6} {:>10.6} {:>10.6} {:>10.6} {:>10}  {status}",
            r.p, r.max_ratio, r.mean_ratio, r.min_ratio, threshold
        );
    }
    for note in &report.annotations {
        println!("note: {note}");
    }
}

fn lprf_run(args: &LprfArgs) -> Result<bool> {
    let out_json = args.out.as_deref().map(output_path);
    let out_csv = args.csv.as_deref().map(output_path);
    for path in out_json.iter().chain(&out_csv) {
        ensure_parent(path)?;
    }
    let cfg = ExperimentConfig {
        m: args.m,
        trials: args.trials,
        seed: args.seed,
        p_list: args.p_list.clone(),
        partition: args.partition.clone(),
        min_block: args.min_block,
        dist: args.dist,
        out_json,
        out_csv,
        ..Default::default()
    };
    let report = run_experiment(&cfg)?;
    print_report(&report);
    Ok(report.passed())
}

fn atom_test(args: &AtomArgs) -> Result<bool> {
    let res = Resolution::new(args.m)?;
    let support = DyadicSpatialRect::new(
        args.scale[0],
        args.scale[1],
        args.position[0],
        args.position[1],
    )?;
    let atom = make_rectangle_atom(res, support, args.p, args.seed)?;
    let check = check_rectangle_atom(&atom.values, &support, args.p)?;
    if !check.passes(tolerances::ATOM_VALIDATION) {
        bail!("generated atom fails validation: {check:?}");
    }
    let rects = gen_guillotine_partition(res, args.seed, args.min_block);
    let outside = g_outside_support(&atom, &rects)?;
    let passed = outside <= tolerances::ATOM_SUPPORT;
    let (r1, r2) = support.cell_ranges(res);
    let out = serde_json::json!({
        "m": args.m,
        "p": args.p,
        "seed": args.seed,
        "support": support,
        "support_cells": [[r1.start, r1.end], [r2.start, r2.end]],
        "measure": support.measure(),
        "degenerate": atom.degenerate,
        "atom_check": check,
        "n_rects": rects.len(),
        "g_max_outside_support": outside,
        "tolerance": tolerances::ATOM_SUPPORT,
        "passed": passed,
    });
    println!("{}", serde_json::to_string_pretty(&out)?);
    Ok(passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Transform(a) => transform(a),
        Command::Decompose(a) => decompose(a),
        Command::VerifyIdentities(a) => verify(a),
        Command::LprfRun(a) => lprf_run(a),
        Command::AtomTest(a) => atom_test(a),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
