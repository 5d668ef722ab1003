//! Command-line front end: `run`, `analyze` and `verify`.
//!
//! Exit codes: 0 on success, 1 for usage errors, 2 for runtime failures.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::bitlin::BitVec;
use crate::channel_sim::{run_montecarlo_with_code, SimConfig, SimReport};
use crate::codes::{CodeId, LinearCode};
use crate::constraints::{
    count_search_space, derive_constraints, ConstraintError, ConstraintLayout, ConstraintTargets, MAX_ENUMERATION_LEN,
};
use crate::decoder::DecodeBudget;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_FAILURE: i32 = 2;

pub const CSV_HEADER: [&str; 11] = [
    "snr_db",
    "frames",
    "block_errors",
    "bler",
    "avg_queries_checked",
    "avg_candidates_generated",
    "abandons",
    "p",
    "b",
    "b_prime",
    "seed",
];

#[derive(Debug, Parser)]
#[command(
    name = "cgrand",
    version,
    about = "ORBGRAND with syndrome-constrained pattern generation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Monte Carlo BLER and average-query simulation.
    Run(RunArgs),
    /// Print the disjoint constraints derived from a code's parity checks.
    Analyze(AnalyzeArgs),
    /// Check the 2^(n-p) search-space size by exhaustive enumeration.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
struct RunArgs {
    /// ebch128 | ebch8 | pac64 | file:PATH
    #[arg(long)]
    code: CodeId,
    /// Eb/N0 sweep in dB as start:stop:step, endpoints included.
    #[arg(long)]
    snr: SnrRange,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    frames: u64,
    /// Abandonment budget; sets b = b' unless --budget-checked is given.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    budget: u64,
    /// Number of disjoint constraints p.
    #[arg(long, default_value_t = 0)]
    constraints: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// CSV output path (rewritten on every run).
    #[arg(long)]
    out: PathBuf,
    /// Separate limit b on codebook checks; --budget then only sets b'.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    budget_checked: Option<u64>,
}

#[derive(Debug, Args)]
struct AnalyzeArgs {
    #[arg(long)]
    code: CodeId,
    /// Number of constraints to derive; reduced to the achievable count if
    /// needed.
    #[arg(long, default_value_t = 2)]
    constraints: usize,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..=MAX_ENUMERATION_LEN as u64))]
    n: u64,
    #[arg(long)]
    p: usize,
    #[arg(long, default_value_t = 10)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

/// Inclusive Eb/N0 grid, each value snapped to 0.01 dB.
#[derive(Debug, Clone, PartialEq)]
pub struct SnrRange(pub Vec<f64>);

impl FromStr for SnrRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let fields: Vec<&str> = s.split(':').collect();
        let [start, stop, step] = fields[..] else {
            return Err(format!("expected start:stop:step, got {s:?}"));
        };
        let parse = |x: &str| {
            x.trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| format!("bad number {x:?}"))
        };
        let (start, stop, step) = (parse(start)?, parse(stop)?, parse(step)?);
        if step <= 0.0 {
            return Err("step must be positive".into());
        }
        if stop < start {
            return Err("stop must not be below start".into());
        }
        let snap = |x: f64| (x * 100.0).round() / 100.0;
        let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
        if count > 10_000 {
            return Err("too many SNR points".into());
        }
        Ok(SnrRange((0..count).map(|i| snap(start + i as f64 * step)).collect()))
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn main_with_args<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            let text = e.render().to_string();
            if code == EXIT_OK {
                let _ = write!(out, "{text}");
            } else {
                let _ = write!(err, "{text}");
            }
            return code;
        }
    };
    let result = match cli.command {
        Command::Run(a) => cmd_run(a, out),
        Command::Analyze(a) => cmd_analyze(a, out),
        Command::Verify(a) => cmd_verify(a, out),
    };
    match result {
        Ok(code) => code,
        Err(CliError::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_USAGE
        }
        Err(CliError::Runtime(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_FAILURE
        }
    }
}

enum CliError {
    Usage(String),
    Runtime(String),
}

fn build_code(id: &CodeId) -> Result<LinearCode, CliError> {
    id.build().map_err(|e| match id {
        CodeId::File(_) => CliError::Runtime(e.to_string()),
        _ => CliError::Usage(e.to_string()),
    })
}

fn cmd_run(args: RunArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let code = build_code(&args.code)?;
    // Validate p before any simulation starts.
    derive_constraints(code.parity_check(), args.constraints).map_err(|e| match e {
        ConstraintError::Insufficient { achievable, .. } => {
            CliError::Usage(format!("{}: {e}; use --constraints {achievable} or fewer", code.name()))
        }
        e => CliError::Usage(e.to_string()),
    })?;
    let budget = DecodeBudget::new(args.budget_checked.unwrap_or(args.budget), args.budget);
    let config = SimConfig {
        code: args.code.clone(),
        snrs_db: args.snr.0.clone(),
        frames: args.frames,
        budget,
        constraints: args.constraints,
        seed: args.seed,
    };
    let report = run_montecarlo_with_code(&code, &config).map_err(|e| CliError::Runtime(e.to_string()))?;
    let csv = render_csv(&report).map_err(CliError::Runtime)?;
    std::fs::write(&args.out, csv).map_err(|e| CliError::Runtime(format!("{}: {e}", args.out.display())))?;
    let _ = write!(out, "{}", render_summary(&report));
    let _ = writeln!(out, "wrote {}", args.out.display());
    Ok(EXIT_OK)
}

/// CSV with a header row and one row per SNR point.
pub fn render_csv(report: &SimReport) -> Result<String, String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER).map_err(|e| e.to_string())?;
    let m = &report.meta;
    for p in &report.points {
        w.write_record([
            format!("{:.2}", p.snr_db),
            p.frames.to_string(),
            p.block_errors.to_string(),
            p.bler().to_string(),
            p.avg_queries_checked().to_string(),
            p.avg_candidates_generated().to_string(),
            p.abandons.to_string(),
            m.constraints.to_string(),
            m.budget.checked.to_string(),
            m.budget.considered.to_string(),
            m.seed.to_string(),
        ])
        .map_err(|e| e.to_string())?;
    }
    let bytes = w.into_inner().map_err(|e| e.to_string())?;
    String::from_utf8(bytes).map_err(|e| e.to_string())
}

/// Console table: SNR columns, one row of average queries and one of BLER.
pub fn render_summary(report: &SimReport) -> String {
    let m = &report.meta;
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{} (n={}, k={})  p={}  b={}  b'={}  seed={}",
        m.code_name, m.n, m.k, m.constraints, m.budget.checked, m.budget.considered, m.seed
    );
    let label = |s: &mut String, t: &str| {
        let _ = write!(s, "{t:<20}");
    };
    label(&mut s, "Eb/N0 [dB]");
    for p in &report.points {
        let _ = write!(s, "|{:>11.2} ", p.snr_db);
    }
    s.push('\n');
    let case = match m.constraints {
        0 => "No Constraints".to_string(),
        1 => "Single".to_string(),
        2 => "Double".to_string(),
        p => format!("{p} constraints"),
    };
    label(&mut s, &format!("{case} (queries)"));
    for p in &report.points {
        let _ = write!(s, "|{:>11.1} ", p.avg_queries_checked());
    }
    s.push('\n');
    label(&mut s, "BLER");
    for p in &report.points {
        let _ = write!(s, "|{:>11.3e} ", p.bler());
    }
    s.push('\n');
    s
}

fn one_based(set: &[usize]) -> String {
    let items: Vec<String> = set.iter().map(|i| (i + 1).to_string()).collect();
    format!("{{{}}}", items.join(","))
}

fn cmd_analyze(args: AnalyzeArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let code = build_code(&args.code)?;
    let h = code.parity_check();
    let n = code.n();
    let has_all_one = h
        .in_row_space(&BitVec::ones(n))
        .map_err(|e| CliError::Runtime(e.to_string()))?
        .is_some();
    let layout = match derive_constraints(h, args.constraints) {
        Ok(l) => l,
        Err(ConstraintError::Insufficient { achievable, requested }) => {
            let _ = writeln!(
                out,
                "note: only {achievable} of {requested} requested constraints are obtainable"
            );
            derive_constraints(h, achievable).map_err(|e| CliError::Runtime(e.to_string()))?
        }
        Err(e) => return Err(CliError::Usage(e.to_string())),
    };
    let _ = write!(out, "{}", render_analysis(&code, has_all_one, &layout));
    Ok(EXIT_OK)
}

pub fn render_analysis(code: &LinearCode, has_all_one: bool, layout: &ConstraintLayout) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "code: {} (n={}, k={})", code.name(), code.n(), code.k());
    let _ = writeln!(
        s,
        "all-one row in row space of H: {}",
        if has_all_one { "yes" } else { "no" }
    );
    let _ = writeln!(s, "constraints: {}", layout.p());
    for (j, (row, &(lo, hi))) in layout.rows().iter().zip(layout.intervals()).enumerate() {
        let _ = writeln!(s, "h{}: {}", j + 1, row);
        let _ = writeln!(s, "  weight: {}", row.weight());
        let _ = writeln!(s, "  interval: [{lo}, {hi}]");
        let _ = writeln!(s, "  set: {}", one_based(&row.support()));
    }
    let free: Vec<usize> = (0..code.n()).filter(|&i| layout.constraint_of(i).is_none()).collect();
    let _ = writeln!(s, "unconstrained positions: {}", free.len());
    s
}

fn cmd_verify(args: VerifyArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let n = args.n as usize;
    if args.p > n {
        return Err(CliError::Usage(format!("p = {} exceeds n = {n}", args.p)));
    }
    let expected = 1u64 << (n - args.p);
    let mut rng = ChaCha12Rng::seed_from_u64(args.seed);
    let mut all_ok = true;
    for trial in 0..args.trials.max(1) {
        let layout = ConstraintLayout::random(n, args.p, &mut rng).map_err(|e| CliError::Runtime(e.to_string()))?;
        let targets = ConstraintTargets::new((0..args.p).map(|_| rng.random()).collect());
        let count = count_search_space(n, &layout, &targets).map_err(|e| CliError::Runtime(e.to_string()))?;
        let ok = count == expected;
        all_ok &= ok;
        let sizes: Vec<usize> = layout.rows().iter().map(BitVec::weight).collect();
        let bits: String = targets.bits().iter().map(|&b| if b { '1' } else { '0' }).collect();
        let _ = writeln!(
            out,
            "trial {}: n={n} p={} set sizes {:?} targets [{}] count {count} expected {expected} {}",
            trial + 1,
            args.p,
            sizes,
            bits,
            if ok { "pass" } else { "FAIL" }
        );
    }
    let _ = writeln!(out, "{}", if all_ok { "PASS" } else { "FAIL" });
    Ok(if all_ok { EXIT_OK } else { EXIT_FAILURE })
}
