//! Experiment reports: labeled numeric tables, linear fits with residuals,
//! and pass/fail verdicts that are recomputable from the table alone.

use crate::{Error, Result};
use serde::Serialize;
use std::collections::BTreeMap;
use std::path::Path;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReportKind {
    Scaling,
    Decay,
    InequalityAudit,
    GaugeCheck,
}

/// One linear fit: y ~ slope x + intercept, with the sample count and the
/// root-mean-square residual it was computed from.
#[derive(Clone, Debug, Serialize)]
pub struct Fit {
    pub label: String,
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    pub n: usize,
    pub rms: f64,
}

/// A single verdict ingredient: `value op threshold`.
#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub label: String,
    pub value: f64,
    pub threshold: f64,
    pub op: CheckOp,
    pub pass: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckOp {
    Le,
    Ge,
}

impl Check {
    pub fn le(label: impl Into<String>, value: f64, threshold: f64) -> Check {
        Check { label: label.into(), value, threshold, op: CheckOp::Le, pass: value <= threshold }
    }

    pub fn ge(label: impl Into<String>, value: f64, threshold: f64) -> Check {
        Check { label: label.into(), value, threshold, op: CheckOp::Ge, pass: value >= threshold }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ExperimentReport {
    pub kind: ReportKind,
    pub name: String,
    /// Resolved configuration snapshot relevant to this experiment.
    pub inputs: BTreeMap<String, String>,
    pub columns: Vec<String>,
    pub table: Vec<Vec<f64>>,
    pub fits: Vec<Fit>,
    pub checks: Vec<Check>,
    pub verdict: bool,
}

impl ExperimentReport {
    pub fn new(kind: ReportKind, name: impl Into<String>) -> ExperimentReport {
        ExperimentReport {
            kind,
            name: name.into(),
            inputs: BTreeMap::new(),
            columns: Vec::new(),
            table: Vec::new(),
            fits: Vec::new(),
            checks: Vec::new(),
            verdict: false,
        }
    }

    pub fn input(&mut self, key: impl Into<String>, value: impl ToString) {
        self.inputs.insert(key.into(), value.to_string());
    }

    pub fn finalize(&mut self) {
        self.verdict = self.checks.iter().all(|c| c.pass);
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Values of one column.
    pub fn column(&self, name: &str) -> Vec<f64> {
        match self.column_index(name) {
            Some(i) => self.table.iter().map(|row| row[i]).collect(),
            None => Vec::new(),
        }
    }

    /// CSV of the table only (header + rows); floats in shortest
    /// round-trip form so re-reading reproduces them bit-exactly.
    pub fn csv_string(&self) -> String {
        use std::fmt::Write as _;
        let mut s = self.columns.join(",");
        s.push('\n');
        for row in &self.table {
            let mut first = true;
            for v in row {
                if !first {
                    s.push(',');
                }
                let _ = write!(s, "{v}");
                first = false;
            }
            s.push('\n');
        }
        s
    }

    /// Parses a table CSV produced by `csv_string`.
    pub fn table_from_csv(text: &str) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
        let mut lines = text.lines();
        let header = lines.next().ok_or(Error::MeshFormat { line: 1, msg: "empty csv".into() })?;
        let columns: Vec<String> = header.split(',').map(|s| s.to_string()).collect();
        let mut table = Vec::new();
        for (ln, line) in lines.enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let row: Vec<f64> = line
                .split(',')
                .map(|tok| {
                    tok.parse::<f64>().map_err(|_| Error::MeshFormat {
                        line: ln + 2,
                        msg: format!("cannot parse `{tok}` as a number"),
                    })
                })
                .collect::<Result<_>>()?;
            table.push(row);
        }
        Ok((columns, table))
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self).expect("report serializes"))?;
        Ok(())
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.csv_string())?;
        Ok(())
    }
}

/// Ordinary least squares for y = slope x + intercept.
pub fn linear_fit(label: &str, xs: &[f64], ys: &[f64]) -> Fit {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len();
    assert!(n >= 2, "fit needs at least two points");
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let mut ss_res = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        let r = y - (slope * x + intercept);
        ss_res += r * r;
    }
    let r2 = if syy > 0.0 { 1.0 - ss_res / syy } else if ss_res == 0.0 { 1.0 } else { 0.0 };
    Fit { label: label.to_string(), slope, intercept, r2, n, rms: (ss_res / nf).sqrt() }
}

/// Least squares with one outlier-rejection pass: points whose residual
/// exceeds three times the RMS of the first fit are dropped and the line is
/// refit. Deterministic and robust enough for decay tails.
pub fn robust_linear_fit(label: &str, xs: &[f64], ys: &[f64]) -> Fit {
    let first = linear_fit(label, xs, ys);
    if first.rms == 0.0 {
        return first;
    }
    let keep: Vec<usize> = xs
        .iter()
        .zip(ys)
        .enumerate()
        .filter(|(_, (&x, &y))| (y - (first.slope * x + first.intercept)).abs() <= 3.0 * first.rms)
        .map(|(i, _)| i)
        .collect();
    if keep.len() == xs.len() || keep.len() < 2 {
        return first;
    }
    let xs2: Vec<f64> = keep.iter().map(|&i| xs[i]).collect();
    let ys2: Vec<f64> = keep.iter().map(|&i| ys[i]).collect();
    linear_fit(label, &xs2, &ys2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line_is_recovered() {
        let xs: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 2.5 * x - 1.0).collect();
        let fit = linear_fit("line", &xs, &ys);
        assert!((fit.slope - 2.5).abs() < 1e-12);
        assert!((fit.intercept + 1.0).abs() < 1e-12);
        assert!((fit.r2 - 1.0).abs() < 1e-12);
        assert_eq!(fit.n, 10);
    }

    #[test]
    fn robust_fit_ignores_a_gross_outlier() {
        let xs: Vec<f64> = (0..30).map(|i| i as f64).collect();
        let mut ys: Vec<f64> = xs.iter().map(|x| -0.7 * x + 3.0).collect();
        ys[7] += 500.0;
        let fit = robust_linear_fit("decay", &xs, &ys);
        assert!((fit.slope + 0.7).abs() < 1e-9, "slope {}", fit.slope);
        assert_eq!(fit.n, 29);
    }

    #[test]
    fn csv_round_trip_reproduces_table_bit_exactly() {
        let mut rep = ExperimentReport::new(ReportKind::Scaling, "demo");
        rep.columns = vec!["beta".into(), "lambda1".into()];
        rep.table = vec![vec![50.0, 3.575757575757], vec![100.0, 5.0e-3], vec![200.0, 7.123456789012345e2]];
        let text = rep.csv_string();
        let (cols, table) = ExperimentReport::table_from_csv(&text).unwrap();
        assert_eq!(cols, rep.columns);
        assert_eq!(table, rep.table);
    }

    #[test]
    fn checks_drive_the_verdict() {
        let mut rep = ExperimentReport::new(ReportKind::GaugeCheck, "demo");
        rep.checks.push(Check::le("gap", 0.01, 0.02));
        rep.finalize();
        assert!(rep.verdict);
        rep.checks.push(Check::ge("r2", 0.5, 0.9));
        rep.finalize();
        assert!(!rep.verdict);
    }
}
