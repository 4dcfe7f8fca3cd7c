//! Deterministic output: CSV tables (17 significant digits, LF endings,
//! mandatory header) and JSON reports, written to a file or stdout.

use std::io::Write;
use std::path::Path;

use crate::config::{usage, CliResult};

/// 17 significant digits — enough to round-trip any f64 exactly.
pub fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

/// Renders a CSV table: header row plus one row per record, LF endings.
pub fn render_csv(header: &[&str], rows: &[Vec<f64>]) -> String {
    let mut out = String::new();
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        debug_assert_eq!(row.len(), header.len());
        let cells: Vec<String> = row.iter().map(|&v| fmt_float(v)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// Writes to `out` when given, stdout otherwise.
pub fn write_out(out: Option<&Path>, content: &str) -> CliResult<()> {
    match out {
        None => {
            std::io::stdout()
                .write_all(content.as_bytes())
                .map_err(|e| usage(format!("cannot write to stdout: {e}")))?;
        }
        Some(p) => {
            std::fs::write(p, content)
                .map_err(|e| usage(format!("cannot write {}: {e}", p.display())))?;
        }
    }
    Ok(())
}

/// Comma-separated float list (`--x 0,0.5,1`).
pub fn parse_x_list(s: &str) -> CliResult<Vec<f64>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| usage(format!("invalid x value {t:?}")))
        })
        .collect()
}

/// `a:b:n` — n log-spaced points from a to b inclusive.
pub fn parse_log_grid(s: &str) -> CliResult<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    let [a, b, n] = parts[..] else {
        return Err(usage(format!("log grid must be 'a:b:n', got {s:?}")));
    };
    let a: f64 = a
        .parse()
        .map_err(|_| usage(format!("invalid grid start {a:?}")))?;
    let b: f64 = b
        .parse()
        .map_err(|_| usage(format!("invalid grid end {b:?}")))?;
    let n: usize = n
        .parse()
        .map_err(|_| usage(format!("invalid grid count {n:?}")))?;
    if !(a.is_finite() && b.is_finite() && a > 0.0 && b > a) {
        return Err(usage(format!(
            "log grid needs 0 < a < b, got a = {a}, b = {b}"
        )));
    }
    if n < 2 {
        return Err(usage(format!("log grid needs at least 2 points, got {n}")));
    }
    let (la, lb) = (a.log10(), b.log10());
    Ok((0..n)
        .map(|i| 10f64.powf(la + (lb - la) * i as f64 / (n - 1) as f64))
        .collect())
}

/// Resolves the mutually exclusive `--x` / `--log-grid` pair.
pub fn resolve_grid(x: Option<String>, log_grid: Option<String>) -> CliResult<Vec<f64>> {
    match (x, log_grid) {
        (Some(_), Some(_)) => Err(usage("--x and --log-grid are mutually exclusive")),
        (Some(x), None) => parse_x_list(&x),
        (None, Some(g)) => parse_log_grid(&g),
        (None, None) => Err(usage("an x grid is required: pass --x or --log-grid")),
    }
}
