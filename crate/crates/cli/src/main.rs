//! `gridpat` command-line front end.

mod cache;
mod render;

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gridpat::constructions::{
    convergence_series, f_bounds, fit_inverse_window, full_rectangle, lattice_constellation,
    monsky_tile_window, ratio, tile_window, ConstructionError,
};
use gridpat::grid::{parse_points, pattern_histogram, patterns_of_length, serialize_points, GridError};
use gridpat::queens::{
    classes_of, enumerate_t_capped, in_t, is_linear, lattice_permutation, max_partial_toroidal,
    QueensError, DEFAULT_ENUMERATION_CAP,
};
use gridpat::solver::{b_file, default_window, SolveError, Solver, SolverConfig, DEFAULT_BUDGET, DEFAULT_MAX_POINTS};
use gridpat::{PointSet, QueensPermutation, Rational, SolveResult};
use serde::Serialize;

/// Versioned identifiers written into every JSON document.
pub const SCHEMA_COUNT: &str = "gridpat/count/v1";
pub const SCHEMA_SOLVE: &str = "gridpat/solve/v1";
pub const SCHEMA_QUEENS_ENUM: &str = "gridpat/queens-enum/v1";
pub const SCHEMA_QUEENS_CLASSES: &str = "gridpat/queens-classes/v1";
pub const SCHEMA_QUEENS_MAXPARTIAL: &str = "gridpat/queens-maxpartial/v1";
pub const SCHEMA_CONSTRUCT: &str = "gridpat/construct/v1";
pub const SCHEMA_BOUNDS: &str = "gridpat/bounds/v1";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Parse(String),
    #[error("{0}")]
    Hypothesis(String),
    #[error("{0}")]
    Budget(String),
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Io { .. } => 1,
            CliError::Usage(_) => 2,
            CliError::Parse(_) => 3,
            CliError::Hypothesis(_) => 4,
            CliError::Budget(_) => 5,
        }
    }

    fn io(path: &Path, source: io::Error) -> Self {
        CliError::Io { path: path.display().to_string(), source }
    }
}

impl From<GridError> for CliError {
    fn from(e: GridError) -> Self {
        CliError::Parse(e.to_string())
    }
}

impl From<QueensError> for CliError {
    fn from(e: QueensError) -> Self {
        match e {
            QueensError::Parse { .. } => CliError::Parse(e.to_string()),
            _ => CliError::Hypothesis(e.to_string()),
        }
    }
}

impl From<ConstructionError> for CliError {
    fn from(e: ConstructionError) -> Self {
        CliError::Hypothesis(e.to_string())
    }
}

impl From<SolveError> for CliError {
    fn from(e: SolveError) -> Self {
        match e {
            SolveError::NoResult { .. } => CliError::Budget(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

#[derive(Parser)]
#[command(name = "gridpat", version, about = "Exact-length point patterns on the integer grid")]
struct Cli {
    /// Worker threads for the parallel searches; 0 picks the default. Never changes results.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Default, ValueEnum)]
enum Format {
    #[default]
    Text,
    Json,
}

#[derive(Clone, Copy, Default, ValueEnum)]
enum SolveFormat {
    #[default]
    Text,
    Json,
    /// `n a(n)` lines for n = 1..N
    Bfile,
}

#[derive(Clone, Copy, ValueEnum)]
enum QueensMode {
    Enum,
    Classes,
    Maxpartial,
}

#[derive(Subcommand)]
enum Command {
    /// Count patterns of length k in a points file ("x y" per line; "-" reads stdin).
    Count {
        file: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
    },
    /// Compute a_k(n), or the table a_k(1..=n) with --format bfile.
    Solve {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        n: usize,
        /// Side of the box each connected component must fit in.
        #[arg(long)]
        window: Option<usize>,
        /// Search nodes allowed per table entry.
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
        #[arg(long, default_value_t = DEFAULT_MAX_POINTS)]
        max_points: usize,
        /// Write the witness (of the last entry) in points format.
        #[arg(long)]
        witness: Option<PathBuf>,
        /// Append-only results cache (JSON lines).
        #[arg(long)]
        cache: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t)]
        format: SolveFormat,
    },
    /// Modular queens: enumerate T_n, its equivalence classes, or a maximum partial placement.
    Queens {
        n: usize,
        #[arg(value_enum)]
        mode: QueensMode,
        #[arg(long, default_value_t = DEFAULT_ENUMERATION_CAP)]
        cap: usize,
        /// Node budget for maxpartial.
        #[arg(long, default_value_t = 1_000_000_000)]
        budget: u64,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
    },
    /// Build a constellation and write it in points format.
    Construct {
        #[command(subcommand)]
        kind: Construction,
    },
    /// Draw a points file.
    Render {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = RenderFormat::Ascii)]
        format: RenderFormat,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Bounds k/4 <= f(k) <= upper for one k or a range.
    Bounds {
        #[arg(long, required_unless_present = "k_range", conflicts_with = "k_range")]
        k: Option<usize>,
        /// Inclusive range such as 2-20.
        #[arg(long, value_parser = parse_range)]
        k_range: Option<(usize, usize)>,
        /// Also measure tile ratios over growing windows where a full tiling exists.
        #[arg(long)]
        check: bool,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum RenderFormat {
    Ascii,
    Svg,
}

#[derive(Args)]
struct ConstructOpts {
    /// Report the exact points/patterns ratio for this pattern length.
    #[arg(long)]
    ratio: Option<usize>,
    /// Points file to write; stdout otherwise, with the summary as comments.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t)]
    format: Format,
}

#[derive(Subcommand)]
enum Construction {
    /// k rows of m points.
    Rect {
        k: usize,
        m: usize,
        #[command(flatten)]
        opts: ConstructOpts,
    },
    /// Complement of the periodic queens tiling of a permutation such as 0,2,4,1,3.
    Tile {
        perm: String,
        window: usize,
        #[command(flatten)]
        opts: ConstructOpts,
    },
    /// Non-lattice points of [0,N)^2 for vectors given as x,y.
    Lattice {
        #[arg(allow_hyphen_values = true)]
        v1: String,
        #[arg(allow_hyphen_values = true)]
        v2: String,
        window: usize,
        #[command(flatten)]
        opts: ConstructOpts,
    },
    /// Tiling with holes at a maximum partial toroidal queens placement.
    Monsky {
        n: usize,
        window: usize,
        #[arg(long, default_value_t = 1_000_000_000)]
        budget: u64,
        #[command(flatten)]
        opts: ConstructOpts,
    },
}

fn parse_range(s: &str) -> std::result::Result<(usize, usize), String> {
    let (a, b) = s.split_once('-').ok_or("expected START-END")?;
    let a: usize = a.trim().parse().map_err(|_| format!("bad start {a:?}"))?;
    let b: usize = b.trim().parse().map_err(|_| format!("bad end {b:?}"))?;
    if a == 0 || a > b {
        return Err(format!("need 1 <= START <= END, got {a}-{b}"));
    }
    Ok((a, b))
}

fn parse_vector(s: &str) -> Result<(i64, i64)> {
    let bad = || CliError::Parse(format!("cannot parse vector {s:?}; expected x,y"));
    let body = s.trim().trim_start_matches('(').trim_end_matches(')');
    let (x, y) = body.split_once(',').ok_or_else(bad)?;
    Ok((x.trim().parse().map_err(|_| bad())?, y.trim().parse().map_err(|_| bad())?))
}

fn read_input(path: &Path) -> Result<String> {
    if path == Path::new("-") {
        let mut s = String::new();
        io::stdin()
            .read_to_string(&mut s)
            .map_err(|e| CliError::io(path, e))?;
        Ok(s)
    } else {
        fs::read_to_string(path).map_err(|e| CliError::io(path, e))
    }
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

fn read_points(path: &Path) -> Result<PointSet> {
    let text = read_input(path)?;
    parse_points(&text).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
}

#[derive(Serialize)]
struct Doc<'a, T: Serialize> {
    schema: &'a str,
    #[serde(flatten)]
    body: T,
}

fn json<T: Serialize>(schema: &str, body: T) -> String {
    let mut s = serde_json::to_string_pretty(&Doc { schema, body }).expect("serializable");
    s.push('\n');
    s
}

fn cmd_count(file: &Path, k: usize, format: Format) -> Result<String> {
    if k == 0 {
        return Err(CliError::Usage("k must be at least 1".into()));
    }
    let ps = read_points(file)?;
    let patterns = patterns_of_length(&ps, k);
    let hist = pattern_histogram(&ps);
    Ok(match format {
        Format::Text => format!("patterns={patterns}\npoints={}\nhistogram={hist}\n", ps.len()),
        Format::Json => {
            #[derive(Serialize)]
            struct Body {
                k: usize,
                points: usize,
                patterns: usize,
                histogram: std::collections::BTreeMap<usize, usize>,
            }
            json(
                SCHEMA_COUNT,
                Body { k, points: ps.len(), patterns, histogram: hist.counts.clone() },
            )
        }
    })
}

fn result_line(r: &SolveResult) -> String {
    let source = match r.source {
        gridpat::solver::Source::Connected => "connected".to_string(),
        gridpat::solver::Source::Split { left, right } => format!("split({left}+{right})"),
    };
    format!(
        "k={} n={} value={} status={} lower_bound={} certified_lower={} window={} nodes={} source={}\n",
        r.k, r.n, r.value, r.status, r.lower_bound, r.certified_lower, r.window, r.nodes, source
    )
}

#[allow(clippy::too_many_arguments)]
fn cmd_solve(
    k: usize,
    n: usize,
    window: Option<usize>,
    budget: u64,
    max_points: usize,
    witness: Option<&Path>,
    cache_path: Option<&Path>,
    format: SolveFormat,
) -> Result<String> {
    if k == 0 || n == 0 {
        return Err(CliError::Usage("k and n must be at least 1".into()));
    }
    let window = window.unwrap_or_else(|| default_window(k, n));
    let mut solver = Solver::new(k, SolverConfig { window, budget, max_points })?;
    let mut store = match cache_path {
        Some(p) => Some(cache::Cache::open(p, k, window, budget)?),
        None => None,
    };
    if let Some(c) = &mut store {
        let mut rejected = Vec::new();
        for r in c.entries() {
            if !solver.insert_known(r.clone()) {
                eprintln!("warning: cached entry k={} n={} failed verification; recomputing", r.k, r.n);
                rejected.push(r.n);
            }
        }
        for n in rejected {
            c.forget(n);
        }
    }
    let targets: Vec<usize> = match format {
        SolveFormat::Bfile => (1..=n).collect(),
        _ => vec![n],
    };
    let mut results = Vec::new();
    let mut failure = None;
    for &t in &targets {
        let r = solver.solve(t);
        if let Some(c) = &mut store {
            c.append(solver.known())?;
        }
        match r {
            Ok(r) => results.push(r),
            Err(e) => {
                failure = Some(e);
                break;
            }
        }
    }
    if let (Some(path), Some(last)) = (witness, results.last()) {
        write_file(path, &serialize_points(&last.witness))?;
    }
    let out = match format {
        SolveFormat::Text => results.iter().map(result_line).collect(),
        SolveFormat::Bfile => b_file(&results),
        SolveFormat::Json => {
            #[derive(Serialize)]
            struct Body<'a> {
                result: &'a SolveResult,
            }
            match results.last() {
                Some(r) => json(SCHEMA_SOLVE, Body { result: r }),
                None => String::new(),
            }
        }
    };
    match failure {
        None => Ok(out),
        Some(e) => {
            // keep the entries that did finish
            print(&out);
            Err(e.into())
        }
    }
}

fn empty_note(n: usize) -> String {
    format!("empty (gcd({n},6)={})\n", gcd(n, 6))
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn cmd_queens(n: usize, mode: QueensMode, cap: usize, budget: u64, format: Format) -> Result<String> {
    if n == 0 {
        return Err(CliError::Usage("n must be at least 1".into()));
    }
    match mode {
        QueensMode::Enum | QueensMode::Classes => {
            let all = enumerate_t_capped(n, cap)?;
            let report = classes_of(n, all.clone());
            match (mode, format) {
                (_, Format::Text) if all.is_empty() => Ok(empty_note(n)),
                (QueensMode::Enum, Format::Text) => {
                    let mut s = format!("n={n} count={}\n", all.len());
                    for p in &all {
                        writeln!(s, "{p}").unwrap();
                    }
                    Ok(s)
                }
                (QueensMode::Enum, Format::Json) => {
                    #[derive(Serialize)]
                    struct Body<'a> {
                        n: usize,
                        count: usize,
                        permutations: &'a [QueensPermutation],
                    }
                    Ok(json(SCHEMA_QUEENS_ENUM, Body { n, count: all.len(), permutations: &all }))
                }
                (_, Format::Text) => {
                    let mut s = format!("n={n} members={} classes={}\n", all.len(), report.classes.len());
                    for (i, c) in report.classes.iter().enumerate() {
                        writeln!(
                            s,
                            "class {}: representative={} size={} {}",
                            i + 1,
                            c.representative,
                            c.members.len(),
                            if c.linear { "linear" } else { "nonlinear" }
                        )
                        .unwrap();
                    }
                    Ok(s)
                }
                (_, Format::Json) => Ok(json(SCHEMA_QUEENS_CLASSES, &report)),
            }
        }
        QueensMode::Maxpartial => {
            if n > gridpat::queens::MAX_BOARD {
                return Err(CliError::Hypothesis(format!(
                    "board size {n} exceeds {}",
                    gridpat::queens::MAX_BOARD
                )));
            }
            let s = max_partial_toroidal(n, budget);
            Ok(match format {
                Format::Text => {
                    let cells: Vec<String> =
                        s.placement.queens.iter().map(|(i, j)| format!("({i},{j})")).collect();
                    format!(
                        "n={n} queens={} proven_maximum={} nodes={}\n{}\n",
                        s.placement.len(),
                        s.proven_maximum,
                        s.nodes,
                        cells.join(" ")
                    )
                }
                Format::Json => json(SCHEMA_QUEENS_MAXPARTIAL, &s),
            })
        }
    }
}

fn parse_permutation(text: &str) -> Result<QueensPermutation> {
    Ok(text.parse::<QueensPermutation>()?)
}

fn cmd_construct(kind: Construction) -> Result<String> {
    let (ps, opts, label) = match kind {
        Construction::Rect { k, m, opts } => (full_rectangle(k, m)?, opts, format!("rect {k} {m}")),
        Construction::Tile { perm, window, opts } => {
            let p = parse_permutation(&perm)?;
            (tile_window(&p, window)?, opts, format!("tile {p} {window}"))
        }
        Construction::Lattice { v1, v2, window, opts } => {
            let (a, b) = (parse_vector(&v1)?, parse_vector(&v2)?);
            let ps = lattice_constellation(a, b, window)?;
            let label = format!("lattice {},{} {},{} {window}", a.0, a.1, b.0, b.1);
            (ps, opts, label)
        }
        Construction::Monsky { n, window, budget, opts } => {
            if n == 0 || n > gridpat::queens::MAX_BOARD {
                return Err(CliError::Hypothesis(format!(
                    "board size must be in 1..={}",
                    gridpat::queens::MAX_BOARD
                )));
            }
            let search = max_partial_toroidal(n, budget);
            if !search.proven_maximum {
                eprintln!("warning: placement search hit its budget; placement may not be maximum");
            }
            let ps = monsky_tile_window(&search.placement, window)?;
            let label = format!("monsky {n} {window} queens={}", search.placement.len());
            (ps, opts, label)
        }
    };
    let report = match opts.ratio {
        Some(0) => return Err(CliError::Usage("--ratio needs k >= 1".into())),
        Some(k) => Some(ratio(&ps, k)?),
        None => None,
    };
    if let Some(path) = &opts.output {
        write_file(path, &serialize_points(&ps))?;
    }
    Ok(match opts.format {
        Format::Json => {
            #[derive(Serialize)]
            struct Body<'a> {
                construction: &'a str,
                points: usize,
                #[serde(skip_serializing_if = "Option::is_none")]
                ratio: Option<&'a gridpat::RatioReport>,
                #[serde(skip_serializing_if = "Option::is_none")]
                constellation: Option<&'a PointSet>,
            }
            let inline = opts.output.is_none().then_some(&ps);
            json(
                SCHEMA_CONSTRUCT,
                Body { construction: &label, points: ps.len(), ratio: report.as_ref(), constellation: inline },
            )
        }
        Format::Text => {
            let mut summary = format!("construction: {label}\npoints={}\n", ps.len());
            if let Some(r) = &report {
                writeln!(summary, "patterns={}\nratio={}", r.patterns, r.ratio).unwrap();
            }
            if opts.output.is_some() {
                summary
            } else {
                let mut s: String = summary.lines().map(|l| format!("# {l}\n")).collect();
                s.push_str(&serialize_points(&ps));
                s
            }
        }
    })
}

fn cmd_render(file: &Path, format: RenderFormat, output: Option<&Path>) -> Result<String> {
    let ps = read_points(file)?;
    let s = match format {
        RenderFormat::Ascii => render::ascii(&ps),
        RenderFormat::Svg => render::svg(&ps),
    };
    match output {
        Some(path) => {
            write_file(path, &s)?;
            Ok(String::new())
        }
        None => Ok(s),
    }
}

#[derive(Serialize)]
struct BoundRow {
    #[serde(flatten)]
    report: gridpat::BoundReport,
    #[serde(with = "gridpat::constructions::rational_json")]
    excess: Rational,
    /// Whether `upper/k - 1/4 <= 1/k`; only judged for k >= 20.
    within_inverse_k: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    check: Option<CheckRow>,
}

#[derive(Serialize)]
struct CheckRow {
    permutation: QueensPermutation,
    windows: Vec<usize>,
    #[serde(serialize_with = "ratios_json")]
    ratios: Vec<Rational>,
    constant: f64,
    within_bound: bool,
}

fn ratios_json<S: serde::Serializer>(v: &[Rational], s: S) -> std::result::Result<S::Ok, S::Error> {
    #[derive(Serialize)]
    struct R(#[serde(with = "gridpat::constructions::rational_json")] Rational);
    s.collect_seq(v.iter().map(|&r| R(r)))
}

fn bound_row(k: usize, check: bool) -> Result<BoundRow> {
    let report = f_bounds(k);
    let kk = k as i64;
    let excess = report.upper / Rational::from_integer(kk) - Rational::new(1, 4);
    let within_inverse_k = (k >= 20).then(|| excess <= Rational::new(1, kk));
    let n = k + 1;
    let check = if check && gcd(n, 6) == 1 {
        let p = lattice_permutation(2, n as i64)?;
        debug_assert!(in_t(&p) && is_linear(&p).is_some());
        let windows = vec![5 * n, 10 * n, 20 * n];
        let series = convergence_series(&p, k, &windows)?;
        let fit = fit_inverse_window(&series, report.lower).expect("nonempty series");
        Some(CheckRow {
            permutation: p,
            windows,
            ratios: series.iter().map(|r| r.ratio).collect(),
            constant: fit.constant,
            within_bound: fit.within_bound,
        })
    } else {
        None
    };
    Ok(BoundRow { report, excess, within_inverse_k, check })
}

fn cmd_bounds(k: Option<usize>, range: Option<(usize, usize)>, check: bool, format: Format) -> Result<String> {
    let (lo, hi) = match (k, range) {
        (Some(k), _) => (k, k),
        (None, Some(r)) => r,
        (None, None) => return Err(CliError::Usage("give --k or --k-range".into())),
    };
    if lo == 0 {
        return Err(CliError::Usage("k must be at least 1".into()));
    }
    let rows = (lo..=hi).map(|k| bound_row(k, check)).collect::<Result<Vec<_>>>()?;
    Ok(match format {
        Format::Json => {
            #[derive(Serialize)]
            struct Body<'a> {
                rows: &'a [BoundRow],
            }
            json(SCHEMA_BOUNDS, Body { rows: &rows })
        }
        Format::Text => {
            let mut s = String::new();
            for r in &rows {
                let b = &r.report;
                let flag = match r.within_inverse_k {
                    Some(true) => "ok",
                    Some(false) => "FAIL",
                    None => "-",
                };
                let relation = if b.lower == b.upper { "=" } else { "<=" };
                writeln!(
                    s,
                    "k={} {} {relation} f(k) {relation} {} rule={} excess={} within_1/k={flag}",
                    b.k, b.lower, b.upper, b.rule, r.excess
                )
                .unwrap();
                if let Some(c) = &r.check {
                    let ratios: Vec<String> = c.ratios.iter().map(|q| q.to_string()).collect();
                    let windows: Vec<String> = c.windows.iter().map(|w| w.to_string()).collect();
                    writeln!(
                        s,
                        "  check permutation={} windows={} ratios={} C={:.6} within_C/N={}",
                        c.permutation,
                        windows.join(","),
                        ratios.join(","),
                        c.constant,
                        c.within_bound
                    )
                    .unwrap();
                }
            }
            s
        }
    })
}

fn print(s: &str) {
    let mut out = io::stdout().lock();
    let _ = out.write_all(s.as_bytes());
    let _ = out.flush();
}

fn run(cli: Cli) -> Result<String> {
    if cli.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()
            .map_err(|e| CliError::Usage(format!("cannot configure {} threads: {e}", cli.threads)))?;
    }
    match cli.command {
        Command::Count { file, k, format } => cmd_count(&file, k, format),
        Command::Solve { k, n, window, budget, max_points, witness, cache, format } => cmd_solve(
            k,
            n,
            window,
            budget,
            max_points,
            witness.as_deref(),
            cache.as_deref(),
            format,
        ),
        Command::Queens { n, mode, cap, budget, format } => cmd_queens(n, mode, cap, budget, format),
        Command::Construct { kind } => cmd_construct(kind),
        Command::Render { file, format, output } => cmd_render(&file, format, output.as_deref()),
        Command::Bounds { k, k_range, check, format } => cmd_bounds(k, k_range, check, format),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(out) => {
            print(&out);
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
