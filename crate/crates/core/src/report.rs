//! Result tables and reproducibility tokens.

use std::fmt::Write as _;
use std::io::Write;

use sha2::{Digest, Sha256};

/// Hex SHA-256 of a canonical configuration string.
pub fn config_digest(canonical: &str) -> String {
    hex::encode(Sha256::digest(canonical.as_bytes()))
}

/// One line of a results table.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub quantity: String,
    pub component: usize,
    pub estimate: f64,
    pub stderr: f64,
    pub n_paths: usize,
    pub target: Option<f64>,
    pub tolerance: Option<f64>,
    pub pass: Option<bool>,
}

impl ResultRow {
    pub fn new(quantity: impl Into<String>, component: usize, estimate: f64, stderr: f64, n_paths: usize) -> Self {
        Self {
            quantity: quantity.into(),
            component,
            estimate,
            stderr,
            n_paths,
            target: None,
            tolerance: None,
            pass: None,
        }
    }

    /// Adds a target with an absolute tolerance and records pass/fail.
    pub fn check(mut self, target: f64, tolerance: f64) -> Self {
        self.pass = Some((self.estimate - target).abs() <= tolerance);
        self.target = Some(target);
        self.tolerance = Some(tolerance);
        self
    }
}

pub const CSV_HEADER: &str = "quantity,component,estimate,stderr,n_paths,target,tolerance,pass";

fn opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| format!("{x:e}"))
}

/// Renders rows as CSV. Floats use shortest round-trip scientific notation, so
/// equal numbers always give equal bytes.
pub fn render_csv(rows: &[ResultRow]) -> String {
    let mut s = String::from(CSV_HEADER);
    s.push('\n');
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{:e},{:e},{},{},{},{}",
            r.quantity,
            r.component,
            r.estimate,
            r.stderr,
            r.n_paths,
            opt(r.target),
            opt(r.tolerance),
            r.pass.map_or_else(String::new, |p| p.to_string())
        );
    }
    s
}

pub fn write_csv<W: Write>(out: &mut W, rows: &[ResultRow]) -> std::io::Result<()> {
    out.write_all(render_csv(rows).as_bytes())
}
