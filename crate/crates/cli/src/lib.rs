//! Command implementations behind the `a1-bellman` binary.
//!
//! Every command returns its full output as a string plus an exit status, so
//! the same code drives the binary and the tests.

use std::fmt::Write as _;
use std::path::PathBuf;

use a1_bellman::bellman::{classify, eval_b, eval_f, eval_f_smooth, eval_m, BellmanSurface};
use a1_bellman::extremize::build_extremizer;
use a1_bellman::verify::{self, CheckReport};
use a1_bellman::{Error, Params64};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Environment variable capping the worker pool.
pub const THREADS_ENV: &str = "BELLMAN_THREADS";

#[derive(Debug, Parser)]
#[command(name = "a1-bellman", version, about = "Bellman function for dyadic A1 weights: evaluate, construct, verify")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct ParamArgs {
    /// A1 bound Q ≥ 1.
    #[arg(long = "Q")]
    pub q: f64,
    /// Dimension d ≥ 1 (N = 2^d children per cube).
    #[arg(long)]
    pub d: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    #[value(name = "main-inequality-M")]
    MainInequalityM,
    #[value(name = "main-inequality-B")]
    MainInequalityB,
    #[value(name = "wedge-inequality")]
    WedgeInequality,
    Concavity,
    #[value(name = "t-monotonicity")]
    TMonotonicity,
    #[value(name = "smooth-bound")]
    SmoothBound,
    #[value(name = "node-identity")]
    NodeIdentity,
    #[value(name = "branch-continuity")]
    BranchContinuity,
    Homogeneity,
    #[value(name = "wedge-domination")]
    WedgeDomination,
    All,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate B(x, y, m) and report the branch used.
    Eval {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, allow_negative_numbers = true)]
        x: f64,
        #[arg(long, allow_negative_numbers = true)]
        y: f64,
        /// Essential infimum (default 1).
        #[arg(long)]
        m: Option<f64>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Tabulate B on an nx × ny grid of Ω_B at fixed m.
    Table {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, default_value_t = 11)]
        nx: usize,
        #[arg(long, default_value_t = 11)]
        ny: usize,
        #[arg(long, default_value_t = 1.0)]
        m: f64,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// CSV of f and its smooth majorant on a log grid including every node.
    PlotData {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, default_value_t = 200)]
        points: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build a weight/set pair approaching M(x, y).
    Extremize {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long)]
        x: f64,
        #[arg(long)]
        y: f64,
        /// Binary digits per concatenation (≤ 32).
        #[arg(long, default_value_t = 20)]
        depth: usize,
        /// Write the pair as JSON here.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Run verification suites; exit status 1 if any fails.
    Verify {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, value_enum, default_value = "all")]
        suite: Suite,
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = verify::DEFAULT_TOL)]
        tol: f64,
        /// Largest wedge index for the wedge inequality.
        #[arg(long, default_value_t = 6)]
        k_max: u32,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Exhaustive search over small dyadic trees, compared with the closed form.
    Oracle {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, default_value_t = 2)]
        depth: usize,
        /// Number of evenly spaced grid values (corner values are always added).
        #[arg(long, default_value_t = 6)]
        grid: usize,
        #[arg(long, default_value_t = verify::DEFAULT_TOL)]
        tol: f64,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Why a command could not run; all map to exit status 2.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] Error),
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

/// Output of a finished command.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub stdout: String,
    /// 0 on success, 1 on a failed verification.
    pub status: u8,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Outcome { stdout, status: 0 }
    }
}

fn params(a: &ParamArgs) -> Result<Params64, CliError> {
    Ok(Params64::new(a.q, a.d)?)
}

fn header(config: &Value) -> String {
    format!("# a1-bellman {VERSION} {config}")
}

fn envelope(config: &Value, body: Value) -> String {
    let doc = json!({ "a1-bellman": VERSION, "config": config, "result": body });
    serde_json::to_string_pretty(&doc).expect("JSON values serialize") + "\n"
}

fn write_file(path: &PathBuf, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|source| CliError::Io { path: path.clone(), source })
}

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

/// Applies `BELLMAN_THREADS` to the global pool. Returns the value used, if any.
pub fn configure_threads() -> Result<Option<usize>, CliError> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(None);
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Usage(format!("{THREADS_ENV} must be a positive integer, got {raw:?}")))?;
    // A pool already built by an earlier call keeps its size.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(Some(n))
}

pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    match &cli.command {
        Command::Eval { params: a, x, y, m, format } => cmd_eval(a, *x, *y, *m, *format),
        Command::Table { params: a, nx, ny, m, format, out } => cmd_table(a, *nx, *ny, *m, *format, out.as_ref()),
        Command::PlotData { params: a, points, out } => {
            let csv = cmd_plot_data(a, *points)?;
            match out {
                Some(path) => {
                    write_file(path, &csv)?;
                    Ok(Outcome::ok(format!("wrote {}\n", path.display())))
                }
                None => Ok(Outcome::ok(csv)),
            }
        }
        Command::Extremize { params: a, x, y, depth, out, format } => {
            cmd_extremize(a, *x, *y, *depth, out.as_ref(), *format)
        }
        Command::Verify { params: a, suite, samples, seed, tol, k_max, format } => {
            cmd_verify(a, *suite, *samples, *seed, *tol, *k_max, *format)
        }
        Command::Oracle { params: a, depth, grid, tol, format, out } => {
            cmd_oracle(a, *depth, *grid, *tol, *format, out.as_ref())
        }
    }
}

pub fn cmd_eval(a: &ParamArgs, x: f64, y: f64, m: Option<f64>, format: Format) -> Result<Outcome, CliError> {
    let p = params(a)?;
    let mv = m.unwrap_or(1.0);
    let value = eval_b(&p, x, y, mv)?;
    let branch = classify(&p, x, (y / mv).clamp(1.0, a.q))?;
    let config = json!({ "command": "eval", "Q": a.q, "d": a.d, "x": x, "y": y, "m": mv });
    Ok(Outcome::ok(match format {
        Format::Json => envelope(&config, json!({ "value": value, "branch": branch.to_string() })),
        _ => format!("{}\n{value}\n{branch}\n", header(&config)),
    }))
}

pub fn cmd_table(
    a: &ParamArgs,
    nx: usize,
    ny: usize,
    m: f64,
    format: Format,
    out: Option<&PathBuf>,
) -> Result<Outcome, CliError> {
    let p = params(a)?;
    let surface = BellmanSurface::tabulate(&p, nx, ny, m)?;
    let config = json!({ "command": "table", "Q": a.q, "d": a.d, "nx": nx, "ny": ny, "m": m });
    let text = match format {
        Format::Json => envelope(&config, serde_json::to_value(&surface.samples).map_err(Error::from)?),
        _ => {
            let mut s = format!("{}\nx,y,m,value\n", header(&config));
            for r in &surface.samples {
                let _ = writeln!(s, "{},{},{},{}", num(r.x), num(r.y), num(r.m), num(r.value));
            }
            s
        }
    };
    match out {
        Some(path) => {
            write_file(path, &text)?;
            Ok(Outcome::ok(format!("wrote {}\n", path.display())))
        }
        None => Ok(Outcome::ok(text)),
    }
}

/// `points` log-spaced values on `[1e−6, 1]` together with every `2^{−j} ≥ 1e−6`.
pub fn plot_grid(points: usize) -> Vec<f64> {
    let mut xs: Vec<f64> = (0..points)
        .map(|i| 10f64.powf(-6.0 + 6.0 * i as f64 / (points - 1) as f64))
        .collect();
    let mut x = 1.0f64;
    while x >= 1e-6 {
        xs.push(x);
        x /= 2.0;
    }
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    xs
}

/// CSV with columns `x,f,f_smooth,f/Q,f_smooth/Q`.
pub fn cmd_plot_data(a: &ParamArgs, points: usize) -> Result<String, CliError> {
    if points < 2 {
        return Err(CliError::Usage("plot-data needs at least 2 points".into()));
    }
    let p = params(a)?;
    if p.is_degenerate() {
        return Err(Error::Degenerate("plot-data needs Q > 1").into());
    }
    let config = json!({ "command": "plot-data", "Q": a.q, "d": a.d, "points": points });
    let mut s = format!("{}\nx,f,f_smooth,f/Q,f_smooth/Q\n", header(&config));
    for x in plot_grid(points) {
        let f = eval_f(&p, x)?;
        let g = eval_f_smooth(&p, x)?;
        let _ = writeln!(s, "{},{},{},{},{}", num(x), num(f), num(g), num(f / a.q), num(g / a.q));
    }
    Ok(s)
}

pub fn cmd_extremize(
    a: &ParamArgs,
    x: f64,
    y: f64,
    depth: usize,
    out: Option<&PathBuf>,
    format: Format,
) -> Result<Outcome, CliError> {
    let p = params(a)?;
    let pair = build_extremizer(&p, x, y, depth)?;
    let bound = eval_m(&p, x, y)?;
    let s = &pair.achieved;
    let gap = bound - s.value;
    let config = json!({ "command": "extremize", "Q": a.q, "d": a.d, "x": x, "y": y, "depth": depth });
    let summary = json!({
        "target": { "x": x, "y": y },
        "achieved": s,
        "eval_M": bound,
        "gap": gap,
        "truncation_depth": pair.truncation_depth,
        "tree_depth": pair.depth(),
    });
    let mut text = match format {
        Format::Json => envelope(&config, summary),
        _ => {
            let mut t = header(&config) + "\n";
            let _ = writeln!(t, "target    x={x} y={y}");
            let _ = writeln!(t, "achieved  x={} y={} m={} char={} value={}", s.x, s.y, s.m, s.char, s.value);
            let _ = writeln!(t, "eval_M    {bound}");
            let _ = writeln!(t, "gap       {gap:e}");
            let _ = writeln!(t, "digits    {}", pair.truncation_depth);
            let _ = writeln!(t, "tree      depth {}", pair.depth());
            t
        }
    };
    if let Some(path) = out {
        let doc = pair.envelope(&p)?;
        let json = serde_json::to_string(&doc).map_err(Error::from)?;
        write_file(path, &json)?;
        if format != Format::Json {
            let _ = writeln!(text, "wrote     {}", path.display());
        }
    }
    Ok(Outcome::ok(text))
}

fn run_suite(p: &Params64, suite: Suite, samples: u64, seed: u64, tol: f64, k_max: u32) -> Result<Vec<CheckReport>, CliError> {
    use Suite::*;
    let one = |s: Suite| -> Result<CheckReport, Error> {
        match s {
            MainInequalityM => verify::check_main_inequality_m(p, samples, seed, tol),
            MainInequalityB => verify::check_main_inequality_b(p, samples, seed, tol),
            WedgeInequality => verify::check_wedge_inequality(p, k_max, samples, seed, tol),
            Concavity => verify::check_concavity(p, samples.min(10_000), seed, tol),
            TMonotonicity => verify::check_t_monotonicity(p, samples.min(10_000), seed, tol),
            SmoothBound => verify::check_smooth_bound(p, 100_000, tol),
            NodeIdentity => verify::check_node_identity(p, 40, 1e-12),
            BranchContinuity => verify::check_branch_continuity(p, 1000, tol),
            Homogeneity => verify::check_homogeneity(p, samples.min(1000), seed, 1e-12),
            WedgeDomination => verify::check_wedge_domination(p, 10, 100, tol),
            All => unreachable!("expanded by the caller"),
        }
    };
    let suites = if suite == All {
        vec![
            MainInequalityM, MainInequalityB, WedgeInequality, Concavity, TMonotonicity, SmoothBound,
            NodeIdentity, BranchContinuity, Homogeneity, WedgeDomination,
        ]
    } else {
        vec![suite]
    };
    Ok(suites.into_iter().map(one).collect::<Result<Vec<_>, _>>()?)
}

fn report_text(r: &CheckReport) -> String {
    let mut s = r.summary() + "\n";
    if !r.passed {
        let w: Vec<String> = r.worst_witness.iter().map(|(k, v)| format!("{k}={v}")).collect();
        let _ = writeln!(s, "  witness: {}", w.join(" "));
    }
    for n in &r.notes {
        let _ = writeln!(s, "  note: {n}");
    }
    s
}

pub fn cmd_verify(
    a: &ParamArgs,
    suite: Suite,
    samples: u64,
    seed: u64,
    tol: f64,
    k_max: u32,
    format: Format,
) -> Result<Outcome, CliError> {
    let p = params(a)?;
    let reports = run_suite(&p, suite, samples, seed, tol, k_max)?;
    let passed = reports.iter().all(|r| r.passed);
    let suite_name = suite.to_possible_value().map(|v| v.get_name().to_string()).unwrap_or_default();
    let config = json!({
        "command": "verify", "Q": a.q, "d": a.d, "suite": suite_name,
        "samples": samples, "seed": seed, "tol": tol, "k_max": k_max,
    });
    let stdout = match format {
        Format::Json => envelope(&config, json!({ "passed": passed, "reports": reports })),
        _ => {
            let mut s = header(&config) + "\n";
            for r in &reports {
                s += &report_text(r);
            }
            let _ = writeln!(s, "{}", if passed { "all passed" } else { "FAILED" });
            s
        }
    };
    Ok(Outcome { stdout, status: if passed { 0 } else { 1 } })
}

pub fn cmd_oracle(
    a: &ParamArgs,
    depth: usize,
    grid: usize,
    tol: f64,
    format: Format,
    out: Option<&PathBuf>,
) -> Result<Outcome, CliError> {
    let p = params(a)?;
    let values = verify::default_grid(&p, grid, depth);
    let table = verify::brute_force_oracle(&p, depth, &values)?;
    let report = verify::oracle_vs_closed_form(&table, &p, tol)?;
    let config = json!({ "command": "oracle", "Q": a.q, "d": a.d, "depth": depth, "grid": grid, "tol": tol });
    if let Some(path) = out {
        let text = match format {
            Format::Csv => format!("{}\n{}", header(&config), table.to_csv()),
            _ => table.to_json()? + "\n",
        };
        write_file(path, &text)?;
    }
    let stdout = match format {
        Format::Json => envelope(&config, json!({ "table": table, "report": report })),
        Format::Csv if out.is_none() => format!("{}\n{}", header(&config), table.to_csv()),
        _ => {
            let mut s = header(&config) + "\n";
            let _ = writeln!(
                s,
                "grid {} values, {} trees, {} admissible, {} buckets",
                table.grid.len(),
                table.enumerated,
                table.admissible,
                table.buckets.len()
            );
            s += &report_text(&report);
            s
        }
    };
    Ok(Outcome { stdout, status: if report.passed { 0 } else { 1 } })
}
