//! Run configuration files.
//!
//! ```toml
//! [problem]
//! kernel = "exp(t-x)"
//! f = "exp(t)-t-1"
//! interval = [0, 1]
//! exact = "exp(t)"          # optional
//!
//! [nonlinearity]
//! kind = "invertible"       # invertible | derivative | polynomial | general
//! g = "ln(u)"
//! ginv = "exp(u)"           # optional; otherwise `bracket` is required
//!
//! [basis]
//! n = 1                     # optional, default 1
//! m = 8                     # or: sweep = [[1, 2], [1, 4]]
//!
//! [solver]                  # optional
//! tol = 1e-12
//! max_iter = 100
//! scan_range = [-2, 2]
//!
//! [output]                  # optional
//! format = "csv"            # csv | json
//! path = "out.csv"
//! grid = 1000
//! timing = false
//! ```
//!
//! `derivative` takes `order`; `polynomial` takes `alpha` (coefficients of
//! `u^0, u^1, ...`); `general` takes `g` and `strategy = "taylor"` (with
//! `degree`, `center`, `radius`) or `strategy = "collocation"` (with
//! `bracket`).

use std::fmt;
use std::ops::Range;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use toml::Spanned;

use crate::basis::{BasisSpec, Interval};
use crate::expr::Expr;
use crate::solver::{Nonlinearity, Problem, SolveOptions, Strategy};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    /// Dotted key path, e.g. `problem.kernel`; empty when unknown.
    pub key: String,
    /// 1-based line, when known.
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.key.is_empty(), self.line) {
            (false, Some(line)) => write!(f, "`{}` (line {line}): {}", self.key, self.message),
            (false, None) => write!(f, "`{}`: {}", self.key, self.message),
            (true, Some(line)) => write!(f, "line {line}: {}", self.message),
            (true, None) => f.write_str(&self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputOptions {
    pub format: Format,
    pub path: Option<PathBuf>,
    /// Points in the uniform error grid.
    pub grid: usize,
    /// Fill the `wall_ms` column. Off by default so output is reproducible.
    pub timing: bool,
}

impl Default for OutputOptions {
    fn default() -> Self {
        Self { format: Format::Csv, path: None, grid: crate::oracle::DEFAULT_GRID, timing: false }
    }
}

/// A validated configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub kernel: Expr,
    pub f: Expr,
    pub interval: Interval,
    pub exact: Option<Expr>,
    pub nonlinearity: Nonlinearity,
    /// `(N, M)` per row, in output order.
    pub runs: Vec<(usize, usize)>,
    /// True when the runs came from a `sweep` list.
    pub sweep: bool,
    pub options: SolveOptions,
    pub output: OutputOptions,
}

impl RunConfig {
    pub fn problem(&self, n: usize, m: usize) -> Result<Problem, crate::solver::SolveError> {
        let spec = BasisSpec::new(self.interval, n, m)?;
        Problem::new(self.kernel.clone(), self.f.clone(), self.nonlinearity.clone(), spec)
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    problem: RawProblem,
    nonlinearity: RawNonlinearity,
    basis: RawBasis,
    #[serde(default)]
    solver: RawSolver,
    #[serde(default)]
    output: RawOutput,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProblem {
    kernel: Spanned<String>,
    f: Spanned<String>,
    interval: Spanned<[f64; 2]>,
    exact: Option<Spanned<String>>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Kind {
    Invertible,
    Derivative,
    Polynomial,
    General,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "lowercase")]
enum StrategyKind {
    Taylor,
    Collocation,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNonlinearity {
    kind: Spanned<Kind>,
    g: Option<Spanned<String>>,
    ginv: Option<Spanned<String>>,
    bracket: Option<Spanned<[f64; 2]>>,
    order: Option<Spanned<usize>>,
    alpha: Option<Spanned<Vec<f64>>>,
    strategy: Option<Spanned<StrategyKind>>,
    degree: Option<Spanned<usize>>,
    center: Option<f64>,
    radius: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBasis {
    n: Option<Spanned<usize>>,
    m: Option<Spanned<usize>>,
    sweep: Option<Spanned<Vec<[usize; 2]>>>,
}

#[derive(Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSolver {
    tol: Option<f64>,
    step_tol: Option<f64>,
    max_iter: Option<usize>,
    scan_range: Option<Spanned<[f64; 2]>>,
}

#[derive(Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    format: Option<Format>,
    path: Option<PathBuf>,
    grid: Option<Spanned<usize>>,
    timing: Option<bool>,
}

/// Locates spans in the source text.
struct Source<'a> {
    text: &'a str,
}

impl Source<'_> {
    fn line_of(&self, offset: usize) -> usize {
        self.text[..offset.min(self.text.len())].matches('\n').count() + 1
    }

    fn error(&self, key: &str, span: Range<usize>, message: impl Into<String>) -> ConfigError {
        ConfigError { key: key.to_string(), line: Some(self.line_of(span.start)), message: message.into() }
    }

    /// Best-effort key path for a span: the enclosing `[section]` and the key
    /// assigned on that line.
    fn key_at(&self, offset: usize) -> String {
        let line_no = self.line_of(offset);
        let mut section = String::new();
        let mut key = String::new();
        for (i, line) in self.text.lines().enumerate() {
            let trimmed = line.trim();
            if i + 1 > line_no {
                break;
            }
            if trimmed.starts_with('[') {
                section = trimmed.trim_matches(|c| c == '[' || c == ']').trim().to_string();
                key.clear();
            } else if let Some((k, _)) = trimmed.split_once('=') {
                if i + 1 == line_no {
                    key = k.trim().to_string();
                }
            }
        }
        match (section.is_empty(), key.is_empty()) {
            (_, true) => section,
            (true, false) => key,
            (false, false) => format!("{section}.{key}"),
        }
    }

    fn expr(&self, key: &str, src: &Spanned<String>) -> Result<Expr, ConfigError> {
        Expr::parse(src.get_ref()).map_err(|e| self.error(key, src.span(), e.to_string()))
    }
}

pub fn load_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError {
        key: String::new(),
        line: None,
        message: format!("cannot read {}: {e}", path.display()),
    })?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let src = Source { text };
    let raw: RawConfig = toml::from_str(text).map_err(|e| {
        let message = e.message().trim().to_string();
        match e.span() {
            Some(span) => ConfigError { key: src.key_at(span.start), line: Some(src.line_of(span.start)), message },
            None => ConfigError { key: String::new(), line: None, message },
        }
    })?;

    let p = &raw.problem;
    let kernel = src.expr("problem.kernel", &p.kernel)?;
    let f = src.expr("problem.f", &p.f)?;
    let exact = p.exact.as_ref().map(|e| src.expr("problem.exact", e)).transpose()?;
    let [t0, tf] = *p.interval.get_ref();
    let interval = Interval::new(t0, tf).map_err(|e| src.error("problem.interval", p.interval.span(), e.to_string()))?;

    let nonlinearity = nonlinearity(&src, &raw.nonlinearity)?;
    let (runs, sweep) = runs(&src, &raw.basis)?;

    let mut options = SolveOptions::default();
    if let Some(tol) = raw.solver.tol {
        options.newton.tol = tol;
    }
    if let Some(step_tol) = raw.solver.step_tol {
        options.newton.step_tol = step_tol;
    }
    if let Some(max_iter) = raw.solver.max_iter {
        options.newton.max_iter = max_iter;
    }
    if let Some(range) = &raw.solver.scan_range {
        let [lo, hi] = *range.get_ref();
        if !(lo < hi) {
            return Err(src.error("solver.scan_range", range.span(), "expected [lo, hi] with lo < hi"));
        }
        options.scan_range = (lo, hi);
    }

    let mut output = OutputOptions::default();
    if let Some(format) = raw.output.format {
        output.format = format;
    }
    output.path = raw.output.path.clone();
    if let Some(grid) = &raw.output.grid {
        if *grid.get_ref() == 0 {
            return Err(src.error("output.grid", grid.span(), "grid needs at least one point"));
        }
        output.grid = *grid.get_ref();
    }
    output.timing = raw.output.timing.unwrap_or(false);

    let config = RunConfig { kernel, f, interval, exact, nonlinearity, runs, sweep, options, output };
    // surface nonlinearity validation at load time
    let (n, m) = config.runs[0];
    config.problem(n, m).map_err(|e| ConfigError { key: "nonlinearity".into(), line: None, message: e.to_string() })?;
    Ok(config)
}

fn require<'a, T>(
    src: &Source,
    kind: &Spanned<Kind>,
    field: &str,
    value: &'a Option<Spanned<T>>,
) -> Result<&'a Spanned<T>, ConfigError> {
    value.as_ref().ok_or_else(|| {
        src.error(
            &format!("nonlinearity.{field}"),
            kind.span(),
            format!("kind `{}` requires `{field}`", format!("{:?}", kind.get_ref()).to_lowercase()),
        )
    })
}

fn bracket(src: &Source, b: &Spanned<[f64; 2]>) -> Result<(f64, f64), ConfigError> {
    let [lo, hi] = *b.get_ref();
    if lo < hi {
        Ok((lo, hi))
    } else {
        Err(src.error("nonlinearity.bracket", b.span(), "expected [lo, hi] with lo < hi"))
    }
}

fn nonlinearity(src: &Source, raw: &RawNonlinearity) -> Result<Nonlinearity, ConfigError> {
    let kind = &raw.kind;
    Ok(match kind.get_ref() {
        Kind::Invertible => {
            let g = src.expr("nonlinearity.g", require(src, kind, "g", &raw.g)?)?;
            let ginv = raw.ginv.as_ref().map(|e| src.expr("nonlinearity.ginv", e)).transpose()?;
            let br = raw.bracket.as_ref().map(|b| bracket(src, b)).transpose()?;
            if ginv.is_none() && br.is_none() {
                return Err(src.error("nonlinearity.bracket", kind.span(), "invertible G needs `ginv` or `bracket`"));
            }
            Nonlinearity::Invertible { g, ginv, bracket: br }
        }
        Kind::Derivative => Nonlinearity::Derivative { order: *require(src, kind, "order", &raw.order)?.get_ref() },
        Kind::Polynomial => {
            Nonlinearity::Polynomial { alpha: require(src, kind, "alpha", &raw.alpha)?.get_ref().clone() }
        }
        Kind::General => {
            let g = src.expr("nonlinearity.g", require(src, kind, "g", &raw.g)?)?;
            let strategy = require(src, kind, "strategy", &raw.strategy)?;
            let strategy = match strategy.get_ref() {
                StrategyKind::Taylor => Strategy::Taylor {
                    degree: *require(src, kind, "degree", &raw.degree)?.get_ref(),
                    center: raw.center.unwrap_or(0.0),
                    radius: raw.radius.unwrap_or(1.0),
                },
                StrategyKind::Collocation => {
                    Strategy::Collocation { bracket: bracket(src, require(src, kind, "bracket", &raw.bracket)?)? }
                }
            };
            Nonlinearity::General { g, strategy }
        }
    })
}

fn runs(src: &Source, raw: &RawBasis) -> Result<(Vec<(usize, usize)>, bool), ConfigError> {
    let positive = |key: &str, v: &Spanned<usize>| {
        if *v.get_ref() == 0 {
            Err(src.error(key, v.span(), "must be at least 1"))
        } else {
            Ok(*v.get_ref())
        }
    };
    match (&raw.m, &raw.sweep) {
        (Some(m), None) => {
            let n = raw.n.as_ref().map(|n| positive("basis.n", n)).transpose()?.unwrap_or(1);
            Ok((vec![(n, positive("basis.m", m)?)], false))
        }
        (None, Some(sweep)) => {
            if let Some(n) = &raw.n {
                return Err(src.error("basis.n", n.span(), "`n` cannot be combined with `sweep`"));
            }
            if sweep.get_ref().is_empty() {
                return Err(src.error("basis.sweep", sweep.span(), "sweep is empty"));
            }
            if sweep.get_ref().iter().any(|[n, m]| *n == 0 || *m == 0) {
                return Err(src.error("basis.sweep", sweep.span(), "every (N, M) must be at least (1, 1)"));
            }
            Ok((sweep.get_ref().iter().map(|[n, m]| (*n, *m)).collect(), true))
        }
        (Some(_), Some(sweep)) => Err(src.error("basis.sweep", sweep.span(), "give either `m` or `sweep`, not both")),
        (None, None) => {
            Err(ConfigError { key: "basis".into(), line: None, message: "one of `m` or `sweep` is required".into() })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
[problem]
kernel = "1"
f = "t^2/2"
interval = [0, 1]

[nonlinearity]
kind = "invertible"
g = "u"
ginv = "u"

[basis]
m = 4
"#;

    #[test]
    fn minimal_config_gets_defaults() {
        let c = parse_config(MINIMAL).unwrap();
        assert_eq!(c.runs, vec![(1, 4)]);
        assert!(!c.sweep);
        assert_eq!(c.output.grid, 1000);
        assert_eq!(c.output.format, Format::Csv);
        assert_eq!(c.options.newton.tol, 1e-12);
        assert!(c.exact.is_none());
    }

    #[test]
    fn unknown_kind_names_the_field() {
        let text = MINIMAL.replace("\"invertible\"", "\"magic\"");
        let e = parse_config(&text).unwrap_err();
        assert_eq!(e.key, "nonlinearity.kind");
        assert_eq!(e.line, Some(8));
        assert!(e.message.contains("magic"), "{e}");
    }

    #[test]
    fn sweep_schedules_rows_in_order() {
        let text = MINIMAL.replace("m = 4", "sweep = [[1, 2], [1, 4], [1, 6], [1, 8], [1, 10]]");
        let c = parse_config(&text).unwrap();
        assert_eq!(c.runs, vec![(1, 2), (1, 4), (1, 6), (1, 8), (1, 10)]);
        assert!(c.sweep);
    }

    #[test]
    fn bad_expression_reports_key_and_line() {
        let text = MINIMAL.replace("f = \"t^2/2\"", "f = \"t^2/\"");
        let e = parse_config(&text).unwrap_err();
        assert_eq!((e.key.as_str(), e.line), ("problem.f", Some(4)));
    }

    #[test]
    fn missing_kind_parameter() {
        let text = MINIMAL.replace("kind = \"invertible\"", "kind = \"derivative\"").replace("g = \"u\"\nginv = \"u\"\n", "");
        let e = parse_config(&text).unwrap_err();
        assert_eq!(e.key, "nonlinearity.order");
    }

    #[test]
    fn basis_must_be_single_or_sweep() {
        let both = MINIMAL.replace("m = 4", "m = 4\nsweep = [[1, 2]]");
        assert_eq!(parse_config(&both).unwrap_err().key, "basis.sweep");
        let neither = MINIMAL.replace("m = 4", "");
        assert_eq!(parse_config(&neither).unwrap_err().key, "basis");
    }

    #[test]
    fn unknown_key_is_rejected() {
        let text = MINIMAL.replace("m = 4", "m = 4\nq = 3");
        let e = parse_config(&text).unwrap_err();
        assert_eq!((e.key.as_str(), e.line), ("basis.q", Some(14)));
    }

    #[test]
    fn general_taylor() {
        let text = MINIMAL.replace(
            "kind = \"invertible\"\ng = \"u\"\nginv = \"u\"",
            "kind = \"general\"\ng = \"exp(u)\"\nstrategy = \"taylor\"\ndegree = 6\ncenter = 0.5",
        );
        let c = parse_config(&text).unwrap();
        assert!(matches!(
            c.nonlinearity,
            Nonlinearity::General { strategy: Strategy::Taylor { degree: 6, center, radius }, .. } if center == 0.5 && radius == 1.0
        ));
    }
}
