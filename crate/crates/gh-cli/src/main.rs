//! `gh`: exact Gromov-Hausdorff distances between small finite metric spaces
//! and certified two-sided bounds for l^p products.
//!
//! Every subcommand emits a report (human summary by default, the JSON
//! envelope with `--json` or `--report`). Exit codes: 0 success, 2 invalid
//! input, 3 a search cap was exhausted (the report is then marked
//! `"uncertified"`).

mod load;
mod report;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use gh_core::bounds::{clique_lower_bound, self_product_distance, FactorPairing};
use gh_core::io::{PairsFile, SpaceFile};
use gh_core::linear::{linear_gh, tori_distance, WeightVector};
use gh_core::solver::{exact_gh, Strategy};
use gh_core::space::{lp_product, ProductSpec};
use gh_core::xi::verify_lemmas;
use gh_core::{Caps, Exponent, GhError, Space64};

use load::{load_json, load_product_spec, load_space, parse_weight_list, CliError, CliResult};
use report::{exact_result, linear_result, tori_result, Envelope};

#[derive(Parser)]
#[command(
    name = "gh",
    version,
    about = "Exact Gromov-Hausdorff distances and certified product bounds"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    flags: RunFlags,
}

#[derive(Args)]
struct RunFlags {
    /// Triangle-inequality tolerance when validating distance matrices.
    #[arg(long, global = true, default_value_t = 1e-9)]
    tolerance: f64,

    /// Print the JSON report instead of the human summary.
    #[arg(long, global = true)]
    json: bool,

    /// Include wall-clock timing in the report. Off by default so identical
    /// runs produce byte-identical reports.
    #[arg(long, global = true)]
    timings: bool,

    /// Also write the JSON report to this file.
    #[arg(long, global = true, value_name = "FILE")]
    report: Option<PathBuf>,

    /// Max relation bits (|X|*|Y|) for the subset-enumeration solver.
    #[arg(long, global = true, default_value_t = Caps::default().subset_bits, value_name = "N")]
    cap_bits: u32,

    /// Max nominal state count for the map-pair solver.
    #[arg(long, global = true, default_value_t = Caps::default().mappair_states, value_name = "N")]
    cap_states: f64,

    /// Max point count of a constructed product space.
    #[arg(long, global = true, default_value_t = Caps::default().product_points, value_name = "N")]
    cap_points: usize,

    /// Max weight-vector length for exhaustive subset-supremum search.
    #[arg(long, global = true, default_value_t = Caps::default().subset_sup_n, value_name = "N")]
    cap_subset_n: u32,

    /// Max search nodes for the clique solver.
    #[arg(long, global = true, default_value_t = Caps::default().clique_nodes, value_name = "N")]
    cap_clique_nodes: u64,
}

impl RunFlags {
    fn caps(&self) -> CliResult<Caps> {
        if !self.tolerance.is_finite() || self.tolerance < 0.0 {
            return Err(CliError::usage(format!(
                "--tolerance must be a nonnegative number, got {}",
                self.tolerance
            )));
        }
        let caps = Caps {
            subset_bits: self.cap_bits,
            mappair_states: self.cap_states,
            product_points: self.cap_points,
            subset_sup_n: self.cap_subset_n,
            clique_nodes: self.cap_clique_nodes,
        };
        if caps.subset_bits == 0
            || caps.mappair_states.is_nan()
            || caps.mappair_states <= 0.0
            || caps.product_points == 0
            || caps.subset_sup_n == 0
            || caps.clique_nodes == 0
        {
            return Err(CliError::usage("all caps must be positive"));
        }
        Ok(caps)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Validate or generate space files.
    #[command(subcommand)]
    Space(SpaceCmd),
    /// Build product spaces from specification files.
    #[command(subcommand)]
    Product(ProductCmd),
    /// Exact distance between two spaces (paths or generator strings).
    Exact {
        x: String,
        y: String,
        /// auto | subset | mappair
        #[arg(long, default_value = "auto")]
        strategy: String,
    },
    /// Two-sided product bounds from a file of factor pairs.
    Bounds {
        /// Pairs file: {"pairs": [{"x": ..., "y": ...}], "dgh": [..]?}
        #[arg(long, value_name = "FILE")]
        pairs: String,
        /// Product exponent: a number >= 1 or "inf".
        #[arg(long)]
        p: String,
        /// auto | subset | mappair (ignored when "dgh" is supplied)
        #[arg(long, default_value = "auto")]
        strategy: String,
    },
    /// Bounds and attainability for linear products over shared factors.
    Linear {
        /// Comma-separated weights of the first product, e.g. 1,3
        #[arg(long)]
        a: String,
        /// Comma-separated weights of the second product.
        #[arg(long)]
        b: String,
        /// Product exponent: a number >= 1 or "inf".
        #[arg(long)]
        p: String,
    },
    /// Distance between two flat tori given their radius vectors.
    Tori {
        /// Radii of the first torus, e.g. 1,3
        #[arg(long)]
        x: String,
        /// Radii of the second torus.
        #[arg(long)]
        y: String,
        /// Points per discretized circle (even).
        #[arg(long, default_value_t = 64)]
        resolution: usize,
    },
    /// Distance between X and its k-fold sup-metric self-product.
    SelfProduct {
        x: String,
        /// Number of copies.
        #[arg(short, long)]
        k: usize,
    },
    /// Cardinality lower bound from a near-diametral clique in Y.
    CliqueBound {
        x: String,
        y: String,
        /// Diameter slack: the clique threshold is diam(Y) - eps.
        #[arg(long, default_value_t = 0.0)]
        eps: f64,
    },
    /// Randomized checks that the comparison functions peak on the boundary.
    VerifyLemmas {
        #[arg(long, default_value_t = 500)]
        draws: usize,
        /// Approximate evaluation budget per check.
        #[arg(long, default_value_t = 10001)]
        grid: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

#[derive(Subcommand)]
enum SpaceCmd {
    /// Validate a space file or generator string.
    Validate { space: String },
    /// Generate a built-in space: simplex:N, cycle:N, path:N or point.
    Gen {
        spec: String,
        /// Write the space file here instead of stdout.
        #[arg(short, long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum ProductCmd {
    /// Build the l^p product described by a specification file.
    Build {
        spec: String,
        /// Write the product space file here instead of stdout.
        #[arg(short, long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let started = Instant::now();
    match run(&cli) {
        Ok(mut env) => {
            if cli.flags.timings {
                env.timing_ms = Some(started.elapsed().as_secs_f64() * 1e3);
            }
            if let Err(e) = emit(&env, &cli.flags) {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
            if env.uncertified.is_some() {
                ExitCode::from(3)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

/// Writes to stdout, treating a closed pipe as a clean stop.
fn to_stdout(render: impl FnOnce(&mut dyn Write) -> std::io::Result<()>) -> CliResult<()> {
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match render(&mut out).and_then(|()| out.flush()) {
        Ok(()) => Ok(()),
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        Err(e) => Err(CliError::Io {
            path: "<stdout>".to_string(),
            message: e.to_string(),
        }),
    }
}

fn emit(env: &Envelope, flags: &RunFlags) -> CliResult<()> {
    if let Some(path) = &flags.report {
        std::fs::write(path, env.to_json()).map_err(|e| CliError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
    }
    if flags.json {
        to_stdout(|out| write!(out, "{}", env.to_json()))
    } else {
        to_stdout(|out| write_human(out, env))
    }
}

fn write_human(out: &mut dyn Write, env: &Envelope) -> std::io::Result<()> {
    writeln!(out, "command: {}", env.command)?;
    for i in &env.inputs {
        writeln!(out, "input: {} (sha256 {})", i.source, &i.sha256[..12])?;
    }
    if let Some(reason) = &env.uncertified {
        writeln!(out, "UNCERTIFIED: {reason}")?;
    }
    write_tree(out, "", &env.result)
}

fn write_tree(out: &mut dyn Write, path: &str, v: &Value) -> std::io::Result<()> {
    match v {
        Value::Object(map) => {
            for (k, inner) in map {
                let p = if path.is_empty() {
                    k.clone()
                } else {
                    format!("{path}.{k}")
                };
                write_tree(out, &p, inner)?;
            }
            Ok(())
        }
        Value::Null => Ok(()),
        other => writeln!(out, "{path} = {other}"),
    }
}

/// Unwraps a core result, downgrading cap exhaustion to an uncertified
/// envelope (with any partial findings) instead of an error.
fn certify<T>(env: &mut Envelope, r: gh_core::Result<T>) -> CliResult<Option<T>> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(e) if e.is_cap_exhaustion() => {
            if let GhError::SearchCapExceeded {
                nodes, best_found, ..
            } = &e
            {
                env.result = json!({
                    "best_clique_so_far": best_found,
                    "nodes": nodes,
                });
            }
            env.uncertified = Some(e.to_string());
            Ok(None)
        }
        Err(e) => Err(e.into()),
    }
}

fn run(cli: &Cli) -> CliResult<Envelope> {
    let caps = cli.flags.caps()?;
    let tol = cli.flags.tolerance;
    match &cli.command {
        Command::Space(SpaceCmd::Validate { space }) => cmd_space_validate(space, tol, caps),
        Command::Space(SpaceCmd::Gen { spec, out }) => {
            cmd_space_gen(spec, out.as_deref(), tol, caps, cli.flags.json)
        }
        Command::Product(ProductCmd::Build { spec, out }) => {
            cmd_product_build(spec, out.as_deref(), tol, caps, cli.flags.json)
        }
        Command::Exact { x, y, strategy } => cmd_exact(x, y, strategy, tol, caps),
        Command::Bounds { pairs, p, strategy } => cmd_bounds(pairs, p, strategy, tol, caps),
        Command::Linear { a, b, p } => cmd_linear(a, b, p, tol, caps),
        Command::Tori { x, y, resolution } => cmd_tori(x, y, *resolution, tol, caps),
        Command::SelfProduct { x, k } => cmd_self_product(x, *k, tol, caps),
        Command::CliqueBound { x, y, eps } => cmd_clique_bound(x, y, *eps, tol, caps),
        Command::VerifyLemmas { draws, grid, seed } => {
            cmd_verify_lemmas(*draws, *grid, *seed, tol, caps)
        }
    }
}

fn parse_strategy(s: &str) -> CliResult<Strategy> {
    s.parse()
        .map_err(|_| CliError::usage(format!("--strategy: unknown strategy `{s}`")))
}

fn parse_exponent(s: &str) -> CliResult<Exponent<f64>> {
    s.parse::<Exponent<f64>>()
        .map_err(|_| CliError::usage(format!("--p: `{s}` is not a number >= 1 or \"inf\"")))
}

fn space_summary(space: &Space64) -> Value {
    json!({
        "points": space.len(),
        "diameter": space.diameter(),
    })
}

fn cmd_space_validate(reference: &str, tol: f64, caps: Caps) -> CliResult<Envelope> {
    let mut env = Envelope::new("space-validate", tol, caps);
    let (space, input) = load_space(reference, tol)?;
    env.inputs.push(input);
    env.result = json!({
        "valid": true,
        "points": space.len(),
        "diameter": space.diameter(),
        "labels": space.labels(),
    });
    Ok(env)
}

/// Writes `file` to `out`, or to stdout (raw, so it can be piped) when no
/// output path was given and the envelope will not be printed anyway.
fn write_space_file(
    file: &SpaceFile,
    out: Option<&std::path::Path>,
    json_mode: bool,
) -> CliResult<Option<String>> {
    let text = format!("{}\n", serde_json::to_string_pretty(file).unwrap());
    match out {
        Some(path) => {
            std::fs::write(path, text).map_err(|e| CliError::Io {
                path: path.display().to_string(),
                message: e.to_string(),
            })?;
            Ok(Some(path.display().to_string()))
        }
        None => {
            if !json_mode {
                to_stdout(|out| write!(out, "{text}"))?;
            }
            Ok(None)
        }
    }
}

fn cmd_space_gen(
    spec: &str,
    out: Option<&std::path::Path>,
    tol: f64,
    caps: Caps,
    json_mode: bool,
) -> CliResult<Envelope> {
    let mut env = Envelope::new("space-gen", tol, caps);
    let (space, input) = load_space(spec, tol)?;
    env.inputs.push(input);
    let file = SpaceFile::from_space(&space, Some(spec.to_string()));
    let written = write_space_file(&file, out, json_mode)?;
    let mut result = space_summary(&space);
    if let Some(path) = written {
        result["written"] = json!(path);
    } else if json_mode {
        result["space"] = serde_json::to_value(&file).unwrap();
    }
    env.result = result;
    Ok(env)
}

fn cmd_product_build(
    spec_path: &str,
    out: Option<&std::path::Path>,
    tol: f64,
    caps: Caps,
    json_mode: bool,
) -> CliResult<Envelope> {
    let mut env = Envelope::new("product-build", tol, caps);
    let (spec_file, input) = load_product_spec(spec_path)?;
    env.inputs.push(input);

    let mut pairs = Vec::new();
    for factor in &spec_file.factors {
        let (space, input) = load_space(&factor.space, tol)?;
        env.inputs.push(input);
        let weight = factor.weight.unwrap_or(1.0);
        pairs.push((space, weight));
    }
    let spec = ProductSpec::weighted(spec_file.p, pairs);
    let product = match certify(&mut env, lp_product(&spec, &caps))? {
        Some(p) => p,
        None => return Ok(env),
    };
    let file = SpaceFile::from_space(&product, None);
    let written = write_space_file(&file, out, json_mode)?;
    let mut result = space_summary(&product);
    result["p"] = serde_json::to_value(spec_file.p).unwrap();
    result["factors"] = json!(spec_file.factors.len());
    if let Some(path) = written {
        result["written"] = json!(path);
    } else if json_mode {
        result["space"] = serde_json::to_value(&file).unwrap();
    }
    env.result = result;
    Ok(env)
}

fn cmd_exact(x: &str, y: &str, strategy: &str, tol: f64, caps: Caps) -> CliResult<Envelope> {
    let strategy = parse_strategy(strategy)?;
    let mut env = Envelope::new("exact", tol, caps);
    let (sx, ix) = load_space(x, tol)?;
    let (sy, iy) = load_space(y, tol)?;
    env.inputs.push(ix);
    env.inputs.push(iy);
    if let Some(r) = certify(&mut env, exact_gh(&sx, &sy, strategy, &caps))? {
        env.result = exact_result(&r);
    }
    Ok(env)
}

fn cmd_bounds(pairs: &str, p: &str, strategy: &str, tol: f64, caps: Caps) -> CliResult<Envelope> {
    let p = parse_exponent(p)?;
    let strategy = parse_strategy(strategy)?;
    let mut env = Envelope::new("bounds", tol, caps);
    let (pairs_file, input) = load_json::<PairsFile>(pairs)?;
    env.inputs.push(input);

    let mut loaded = Vec::new();
    for pair in &pairs_file.pairs {
        let (sx, ix) = load_space(&pair.x, tol)?;
        let (sy, iy) = load_space(&pair.y, tol)?;
        env.inputs.push(ix);
        env.inputs.push(iy);
        loaded.push((sx, sy));
    }

    let supplied = pairs_file.dgh.is_some();
    let pairing = match pairs_file.dgh {
        Some(dgh) => FactorPairing::with_supplied(p, loaded, dgh),
        None => match certify(
            &mut env,
            FactorPairing::compute_exact(p, loaded, strategy, &caps),
        )? {
            Some(pairing) => Ok(pairing),
            None => return Ok(env),
        },
    }?;

    let per_factor = pairing.per_factor_dgh().to_vec();
    let two_dgh: Vec<f64> = per_factor.iter().map(|d| 2.0 * d).collect();
    let report = pairing.bound_report();
    env.result = json!({
        "p": p,
        "supplied": supplied,
        "per_factor_dgh": per_factor,
        "two_dgh_per_factor": two_dgh,
        "bounds": serde_json::to_value(&report).unwrap(),
    });
    Ok(env)
}

fn cmd_linear(a: &str, b: &str, p: &str, tol: f64, caps: Caps) -> CliResult<Envelope> {
    let p = parse_exponent(p)?;
    let av = parse_weight_list("a", a)?;
    let bv = parse_weight_list("b", b)?;
    let mut env = Envelope::new("linear", tol, caps);
    let wa = WeightVector::new(av, p)?;
    let wb = WeightVector::new(bv, p)?;
    if let Some(r) = certify(&mut env, linear_gh(&wa, &wb, &caps))? {
        env.result = linear_result(&r);
    }
    Ok(env)
}

fn cmd_tori(x: &str, y: &str, resolution: usize, tol: f64, caps: Caps) -> CliResult<Envelope> {
    let xv = parse_weight_list("x", x)?;
    let yv = parse_weight_list("y", y)?;
    let radii = |name: &str, v: &[f64]| -> CliResult<[f64; 2]> {
        match v {
            [r1, r2] => Ok([*r1, *r2]),
            _ => Err(CliError::usage(format!(
                "--{name}: expected exactly two radii, got {}",
                v.len()
            ))),
        }
    };
    let mut env = Envelope::new("tori", tol, caps);
    let rx = radii("x", &xv)?;
    let ry = radii("y", &yv)?;
    if let Some(r) = certify(&mut env, tori_distance(rx, ry, resolution, &caps))? {
        env.result = tori_result(&r);
    }
    Ok(env)
}

fn cmd_self_product(x: &str, k: usize, tol: f64, caps: Caps) -> CliResult<Envelope> {
    let mut env = Envelope::new("self-product", tol, caps);
    let (space, input) = load_space(x, tol)?;
    env.inputs.push(input);
    if let Some(report) = certify(&mut env, self_product_distance(&space, k, &caps))? {
        env.result = json!({
            "copies": k,
            "bounds": serde_json::to_value(&report).unwrap(),
        });
    }
    Ok(env)
}

fn cmd_clique_bound(x: &str, y: &str, eps: f64, tol: f64, caps: Caps) -> CliResult<Envelope> {
    let mut env = Envelope::new("clique-bound", tol, caps);
    let (sx, ix) = load_space(x, tol)?;
    let (sy, iy) = load_space(y, tol)?;
    env.inputs.push(ix);
    env.inputs.push(iy);
    if let Some(cb) = certify(&mut env, clique_lower_bound(&sx, &sy, eps, &caps))? {
        env.result = json!({
            "threshold": cb.threshold,
            "clique": cb.clique,
            "clique_size": cb.clique.len(),
            "nodes": cb.nodes,
            "dgh_lower": cb.bound,
            "two_dgh_lower": cb.bound.map(|b| 2.0 * b),
        });
    }
    Ok(env)
}

fn cmd_verify_lemmas(
    draws: usize,
    grid: usize,
    seed: u64,
    tol: f64,
    caps: Caps,
) -> CliResult<Envelope> {
    let mut env = Envelope::new("verify-lemmas", tol, caps);
    env.seed = Some(seed);
    let report = verify_lemmas::<f64>(draws, grid, seed)?;
    env.result = serde_json::to_value(&report).unwrap();
    Ok(env)
}
