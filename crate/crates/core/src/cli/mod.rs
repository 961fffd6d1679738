//! Command-line front end.

pub mod config;
pub mod report;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

pub use config::{load_config, parse_config, ConfigError, Format, OutputOptions, RunConfig};
pub use report::{format_float, run_row, run_rows, write_rows, Row};

use crate::registry::{self, Example};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_NOT_CONVERGED: i32 = 2;
pub const EXIT_CHECK_FAILED: i32 = 3;

/// Accepted ratio between a measured and a published error, either way.
pub const CHECK_FACTOR: f64 = 100.0;

#[derive(Debug, Parser)]
#[command(name = "dov", version, about = "Operational-vector solver for first-kind Volterra integral equations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Output format (overrides the config).
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Write the table here instead of stdout (overrides the config).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Number of uniform points for E_inf (overrides the config).
    #[arg(long, global = true)]
    pub grid: Option<usize>,
    /// Fill the wall_ms column.
    #[arg(long, global = true)]
    pub timing: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve a single-basis configuration.
    Solve { config: PathBuf },
    /// Run every (N, M) of a configuration.
    Sweep { config: PathBuf },
    /// Built-in examples.
    Examples {
        #[command(subcommand)]
        action: ExamplesAction,
    },
    /// Run a built-in example, by default over its sweep.
    RunExample {
        id: String,
        #[arg(long = "N")]
        n: Option<usize>,
        #[arg(long = "M")]
        m: Option<usize>,
        /// Compare E_inf with the published values.
        #[arg(long)]
        check: bool,
    },
}

#[derive(Debug, Subcommand)]
pub enum ExamplesAction {
    List,
}

/// Runs the command and returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_CONFIG
        }
    }
}

fn execute(cli: &Cli) -> Result<i32, Box<dyn std::error::Error>> {
    match &cli.command {
        Command::Examples { action: ExamplesAction::List } => {
            list_examples(&mut io::stdout().lock())?;
            Ok(EXIT_OK)
        }
        Command::Solve { config } => run_config(cli, config, false),
        Command::Sweep { config } => run_config(cli, config, true),
        Command::RunExample { id, n, m, check } => {
            let ex = registry::find(id).ok_or_else(|| format!("unknown example `{id}`; see `dov examples list`"))?;
            let runs = match (n, m) {
                (None, None) => ex.sweep.to_vec(),
                _ => vec![(n.unwrap_or(ex.recommended.0), m.unwrap_or(ex.recommended.1))],
            };
            let mut cfg = example_config(ex, runs);
            apply_overrides(cli, &mut cfg.output);
            let rows = emit(&cfg)?;
            let mut code = convergence_code(&rows);
            if *check && !check_rows(ex, &rows, &mut io::stderr().lock())? {
                code = EXIT_CHECK_FAILED;
            }
            Ok(code)
        }
    }
}

fn run_config(cli: &Cli, path: &Path, sweep: bool) -> Result<i32, Box<dyn std::error::Error>> {
    let mut cfg = load_config(path)?;
    if !sweep && cfg.sweep {
        return Err(Box::new(ConfigError {
            key: "basis.sweep".into(),
            line: None,
            message: "`solve` takes a single basis; use `sweep` for a sweep list".into(),
        }));
    }
    apply_overrides(cli, &mut cfg.output);
    let rows = emit(&cfg)?;
    Ok(convergence_code(&rows))
}

fn apply_overrides(cli: &Cli, out: &mut OutputOptions) {
    if let Some(f) = cli.format {
        out.format = f;
    }
    if let Some(p) = &cli.out {
        out.path = Some(p.clone());
    }
    if let Some(g) = cli.grid {
        out.grid = g.max(1);
    }
    out.timing |= cli.timing;
}

fn emit(cfg: &RunConfig) -> io::Result<Vec<Row>> {
    let rows = run_rows(cfg);
    let with_exact = cfg.exact.is_some();
    match &cfg.output.path {
        Some(p) => {
            let mut w = BufWriter::new(File::create(p)?);
            write_rows(&mut w, &rows, with_exact, cfg.output.format)?;
            w.flush()?;
        }
        None => write_rows(io::stdout().lock(), &rows, with_exact, cfg.output.format)?,
    }
    Ok(rows)
}

fn convergence_code(rows: &[Row]) -> i32 {
    if rows.iter().all(|r| r.converged) {
        EXIT_OK
    } else {
        EXIT_NOT_CONVERGED
    }
}

/// Configuration equivalent to a built-in example.
pub fn example_config(ex: &Example, runs: Vec<(usize, usize)>) -> RunConfig {
    let parse = |s: &str| crate::expr::Expr::parse(s).expect("built-in expression");
    RunConfig {
        kernel: parse(ex.kernel),
        f: parse(ex.f),
        interval: ex.interval(),
        exact: Some(ex.exact()),
        nonlinearity: ex.nonlinearity(),
        sweep: runs.len() > 1,
        runs,
        options: ex.options(),
        output: OutputOptions::default(),
    }
}

/// Whether a measured error is within [`CHECK_FACTOR`] of a published one.
pub fn within_check(measured: f64, published: f64) -> bool {
    measured.is_finite() && measured >= published / CHECK_FACTOR && measured <= published * CHECK_FACTOR
}

/// Prints one line per row with a published value; true when all agree.
pub fn check_rows<W: Write>(ex: &Example, rows: &[Row], out: &mut W) -> io::Result<bool> {
    let mut ok = true;
    let mut compared = 0;
    for r in rows {
        let Some(published) = ex.reference(r.n, r.m) else { continue };
        compared += 1;
        let measured = r.e_inf.unwrap_or(f64::NAN);
        let pass = r.converged && within_check(measured, published);
        ok &= pass;
        writeln!(
            out,
            "check {} N={} M={}: E_inf={measured:.3e} published={published:.3e} {}",
            ex.id,
            r.n,
            r.m,
            if pass { "ok" } else { "MISMATCH" }
        )?;
    }
    if compared == 0 {
        writeln!(out, "check {}: no published values for these rows", ex.id)?;
    }
    Ok(ok)
}

pub fn list_examples<W: Write>(out: &mut W) -> io::Result<()> {
    for ex in registry::examples() {
        let (n, m) = ex.recommended;
        writeln!(out, "{:<5} N={n:<2} M={m:<3} {}", ex.id, ex.summary)?;
    }
    Ok(())
}
