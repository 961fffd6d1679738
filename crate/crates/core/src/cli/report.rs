//! Result rows and their CSV/JSON rendering.

use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use super::config::{Format, RunConfig};
use crate::oracle::{self, Grid};
use crate::solver::solve;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(rename = "L")]
    pub l: usize,
    #[serde(rename = "E_inf", skip_serializing_if = "Option::is_none")]
    pub e_inf: Option<f64>,
    pub residual_linf: f64,
    pub newton_iters: usize,
    pub condition_estimate: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_ms: Option<f64>,
    pub converged: bool,
    /// `ok`, `not converged`, or the error message.
    pub status: String,
    pub warnings: Vec<String>,
}

impl Row {
    fn failed(n: usize, m: usize, exact: bool, status: String) -> Row {
        Row {
            n,
            m,
            l: n * m,
            e_inf: exact.then_some(f64::NAN),
            residual_linf: f64::NAN,
            newton_iters: 0,
            condition_estimate: f64::NAN,
            wall_ms: None,
            converged: false,
            status,
            warnings: Vec::new(),
        }
    }
}

/// Solves one `(N, M)` row; failures are recorded in the row.
pub fn run_row(cfg: &RunConfig, n: usize, m: usize) -> Row {
    let start = Instant::now();
    let exact = cfg.exact.is_some();
    let p = match cfg.problem(n, m) {
        Ok(p) => p,
        Err(e) => return Row::failed(n, m, exact, format!("error: {e}")),
    };
    let s = match solve(&p, &cfg.options) {
        Ok(s) => s,
        Err(e) => {
            log::warn!("N={n} M={m}: {e}");
            return Row::failed(n, m, exact, format!("error: {e}"));
        }
    };
    let e_inf = cfg.exact.as_ref().map(|ex| {
        let grid = Grid::uniform(&cfg.interval, cfg.output.grid);
        oracle::max_error(&s, ex, &grid).unwrap_or(f64::NAN)
    });
    let d = &s.diagnostics;
    for w in &d.warnings {
        log::warn!("N={n} M={m}: {w}");
    }
    Row {
        n,
        m,
        l: n * m,
        e_inf,
        residual_linf: d.residual_linf,
        newton_iters: d.newton_iters,
        condition_estimate: d.condition_estimate,
        wall_ms: cfg.output.timing.then(|| start.elapsed().as_secs_f64() * 1e3),
        converged: d.converged,
        status: if d.converged { "ok".into() } else { "not converged".into() },
        warnings: d.warnings.clone(),
    }
}

/// All rows of a configuration, computed in parallel and returned in order.
pub fn run_rows(cfg: &RunConfig) -> Vec<Row> {
    cfg.runs.par_iter().map(|&(n, m)| run_row(cfg, n, m)).collect()
}

/// Fixed 17-significant-digit rendering.
pub fn format_float(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        format!("{v}")
    }
}

pub fn write_rows<W: Write>(out: W, rows: &[Row], with_exact: bool, format: Format) -> std::io::Result<()> {
    match format {
        Format::Csv => write_csv(out, rows, with_exact),
        Format::Json => {
            let mut out = out;
            serde_json::to_writer_pretty(&mut out, rows)?;
            writeln!(out)
        }
    }
}

fn write_csv<W: Write>(out: W, rows: &[Row], with_exact: bool) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["N", "M", "L"];
    if with_exact {
        header.push("E_inf");
    }
    header.extend(["residual_linf", "newton_iters", "condition_estimate", "wall_ms", "status"]);
    w.write_record(&header)?;
    for r in rows {
        let mut rec = vec![r.n.to_string(), r.m.to_string(), r.l.to_string()];
        if with_exact {
            rec.push(format_float(r.e_inf.unwrap_or(f64::NAN)));
        }
        rec.push(format_float(r.residual_linf));
        rec.push(r.newton_iters.to_string());
        rec.push(format_float(r.condition_estimate));
        rec.push(r.wall_ms.map(format_float).unwrap_or_default());
        rec.push(r.status.clone());
        w.write_record(&rec)?;
    }
    w.flush()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_is_fixed_width() {
        assert_eq!(format_float(1.0), "1.0000000000000000e0");
        assert_eq!(format_float(f64::NAN), "NaN");
        assert_eq!(format_float(-0.5), "-5.0000000000000000e-1");
    }

    #[test]
    fn csv_columns() {
        let row = Row::failed(2, 3, true, "error: no root, anywhere".into());
        let mut buf = Vec::new();
        write_rows(&mut buf, &[row], true, Format::Csv).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "N,M,L,E_inf,residual_linf,newton_iters,condition_estimate,wall_ms,status");
        assert_eq!(lines.next().unwrap(), "2,3,6,NaN,NaN,0,NaN,,\"error: no root, anywhere\"");
    }
}
