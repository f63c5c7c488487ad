//! JSON and CSV emission of residual reports.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

use super::checks::{CheckEntry, Tolerances, Verdict};
use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualReport {
    pub schema: u32,
    pub scenario: String,
    pub dimension: usize,
    pub band_limit: usize,
    pub resolution: usize,
    pub tolerances: Tolerances,
    pub checks: Vec<CheckEntry>,
    pub diagnostics: BTreeMap<String, f64>,
}

impl ResidualReport {
    pub fn has_failure(&self) -> bool {
        self.checks.iter().any(|c| c.verdict.is_fail())
    }

    pub fn count(&self, verdict: Verdict) -> usize {
        self.checks.iter().filter(|c| c.verdict == verdict).count()
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    /// One row per check, floats in 17-significant-digit scientific form.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("name,k,j,lhs,rhs,residual,rel_residual,tolerance,verdict\n");
        let opt = |v: Option<usize>| v.map(|x| x.to_string()).unwrap_or_default();
        for c in &self.checks {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                c.name,
                opt(c.k),
                opt(c.j),
                fmt_float(c.lhs),
                fmt_float(c.rhs),
                fmt_float(c.residual),
                fmt_float(c.relative_residual),
                fmt_float(c.tolerance),
                c.verdict.as_str()
            );
        }
        out
    }
}

/// `{:.16e}`, with non-finite values written as `nan`/`inf`/`-inf`.
pub fn fmt_float(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v:.16e}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_floats_round_trip() {
        for v in [0.1f64, 1.0 / 3.0, 2.0f64.sqrt() * 1e-300, -123456.789e10] {
            let s = fmt_float(v);
            assert_eq!(s.parse::<f64>().unwrap(), v);
        }
        assert_eq!(fmt_float(f64::NAN), "nan");
    }
}
