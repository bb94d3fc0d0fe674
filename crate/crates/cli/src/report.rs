use std::fmt::Write as _;
use std::path::Path;

use amtc::Rational;
use anyhow::{Context, Result};
use num_bigint::{BigInt, Sign};

use crate::Mode;

/// Fixed 4-decimal rendering with round-half-to-even, computed exactly.
/// Values that round to zero print without a sign.
pub fn fixed4(x: &Rational) -> String {
    let scaled = x * Rational::from_integer(BigInt::from(10_000));
    let floor = scaled.floor();
    let frac = &scaled - &floor;
    let half = amtc::scalar::rat(1, 2);
    let mut q = floor.to_integer();
    if frac > half || (frac == half && q.bit(0)) {
        q += 1;
    }
    let negative = q.sign() == Sign::Minus;
    let q = q.magnitude().clone();
    let (whole, rest) = (&q / 10_000u32, &q % 10_000u32);
    format!("{}{whole}.{rest:0>4}", if negative { "-" } else { "" })
}

/// `fixed4` of a float; non-finite values print as they are.
pub fn fixed4_f64(x: f64) -> String {
    match Rational::from_float(x) {
        Some(r) => fixed4(&r),
        None => x.to_string(),
    }
}

/// One `(N, k)` cell, or the single row of a one-model run.
#[derive(Clone, Debug, PartialEq)]
pub struct GridRow {
    /// Number of lattice steps, or the horizon of an explicit tree.
    pub steps: usize,
    /// Proportional cost as a fraction; `None` for explicit trees.
    pub cost: Option<f64>,
    pub ask: Rational,
    pub bid: Rational,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub ok: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, ok: bool, detail: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            ok,
            detail: detail.into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub source: String,
    pub mode: Mode,
    pub rows: Vec<GridRow>,
    /// Strategy, certificate and stopping time dumps.
    pub details: Vec<String>,
    pub checks: Vec<Check>,
    /// Checks that were not run, with the reason.
    pub skipped: Vec<String>,
    /// Exact prices for one-model runs in rational mode.
    pub exact: Option<(Rational, Rational)>,
}

impl Report {
    pub fn new(source: impl Into<String>, mode: Mode) -> Self {
        Report {
            source: source.into(),
            mode,
            rows: Vec::new(),
            details: Vec::new(),
            checks: Vec::new(),
            skipped: Vec::new(),
            exact: None,
        }
    }

    pub fn verified(&self) -> bool {
        self.checks.iter().all(|c| c.ok)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# amtc report");
        let _ = writeln!(out, "source: {}", self.source);
        let _ = writeln!(out, "mode: {}", self.mode);
        if let Some((ask, bid)) = &self.exact {
            let _ = writeln!(out, "ask: {} = {ask}", fixed4(ask));
            let _ = writeln!(out, "bid: {} = {bid}", fixed4(bid));
        } else {
            let _ = writeln!(out, "{:>6} {:>8} {:>10} {:>10}", "N", "k%", "ask", "bid");
            for row in &self.rows {
                let _ = writeln!(
                    out,
                    "{:>6} {:>8} {:>10} {:>10}",
                    row.steps,
                    row.cost.map_or("-".to_string(), |k| fixed4_f64(100.0 * k)),
                    fixed4(&row.ask),
                    fixed4(&row.bid)
                );
            }
        }
        for block in &self.details {
            let _ = writeln!(out);
            out.push_str(block);
            if !block.ends_with('\n') {
                out.push('\n');
            }
        }
        if !self.checks.is_empty() || !self.skipped.is_empty() {
            let _ = writeln!(out);
            let _ = writeln!(out, "verification:");
            for c in &self.checks {
                let status = if c.ok { "ok  " } else { "FAIL" };
                if c.detail.is_empty() {
                    let _ = writeln!(out, "  {status} {}", c.name);
                } else {
                    let _ = writeln!(out, "  {status} {}: {}", c.name, c.detail);
                }
            }
            for s in &self.skipped {
                let _ = writeln!(out, "  skip {s}");
            }
        }
        out
    }
}

pub const CSV_HEADER: &str = "N,k_pct,ask,bid";

/// CSV text: one row per `(N, k)` cell, prices and cost in percent with
/// four decimals.
pub fn csv(report: &Report) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for row in &report.rows {
        let k = row.cost.map_or(String::new(), |k| fixed4_f64(100.0 * k));
        let _ = writeln!(out, "{},{k},{},{}", row.steps, fixed4(&row.ask), fixed4(&row.bid));
    }
    out
}

pub fn emit_csv(report: &Report, path: &Path) -> Result<()> {
    std::fs::write(path, csv(report)).with_context(|| format!("writing {}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use amtc::scalar::rat;

    #[test]
    fn half_even_rounding() {
        assert_eq!(fixed4(&rat(9, 2)), "4.5000");
        assert_eq!(fixed4(&rat(6, 5)), "1.2000");
        assert_eq!(fixed4(&rat(1, 20_000)), "0.0000");
        assert_eq!(fixed4(&rat(3, 20_000)), "0.0002");
        assert_eq!(fixed4(&rat(-3, 20_000)), "-0.0002");
        assert_eq!(fixed4(&rat(-1, 20_000)), "0.0000");
        assert_eq!(fixed4(&rat(-123_456, 10_000)), "-12.3456");
        assert_eq!(fixed4_f64(-1e-15), "0.0000");
        assert_eq!(fixed4_f64(0.25), "0.2500");
    }

    #[test]
    fn csv_rows() {
        let mut r = Report::new("t", Mode::Float);
        assert_eq!(csv(&r), "N,k_pct,ask,bid\n");
        r.rows.push(GridRow {
            steps: 20,
            cost: Some(0.0),
            ask: Rational::from_float(7.16884).unwrap(),
            bid: Rational::from_float(7.16876).unwrap(),
        });
        assert_eq!(csv(&r), "N,k_pct,ask,bid\n20,0.0000,7.1688,7.1688\n");
    }
}
