//! Output files for simulation runs: machine-readable summary CSV, an aligned
//! text table in the layout of the reference result tables, per-replicate
//! record files, and a run manifest.
//!
//! Everything except the manifest is a pure function of config and seed, so
//! reruns are byte-identical; wall time and file lists live in the manifest
//! only.

use anyhow::{anyhow, Result};
use pqlwcr::metrics::{Method, MetricsReport, ReplicateRecord};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

pub const SUMMARY_SCHEMA: &str = "pqlwcr.summary.v1";
pub const RECORD_SCHEMA: &str = "pqlwcr.record.v1";
pub const MANIFEST_SCHEMA: &str = "pqlwcr.manifest.v1";
pub const ESTIMATES_SCHEMA: &str = "pqlwcr.estimates.v1";

/// One (example, p, rho, method) cell of a study.
pub struct SummaryRow {
    pub example: u8,
    pub n: usize,
    pub p: usize,
    pub rho: f64,
    pub method: Method,
    pub k: usize,
    pub report: MetricsReport,
}

pub fn render_summary_csv(rows: &[SummaryRow]) -> String {
    let mut out = String::from(
        "schema,example,n,p,rho,method,replications,k,tp_mean,tp_sd,fp_mean,fp_sd,cr,cr_sd,mse_mean,mse_sd\n",
    );
    for row in rows {
        let r = &row.report;
        writeln!(
            out,
            "{SUMMARY_SCHEMA},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            row.example,
            row.n,
            row.p,
            row.rho,
            row.method.name(),
            r.replications,
            row.k,
            r.tp_mean,
            r.tp_sd,
            r.fp_mean,
            r.fp_sd,
            r.cr,
            r.cr_sd,
            r.mse_mean,
            r.mse_sd
        )
        .unwrap();
    }
    out
}

fn paren(mean: f64, sd: f64, decimals: usize) -> String {
    format!("{mean:.decimals$}({sd:.decimals$})")
}

/// Aligned text table, one block per example, with the columns of the
/// reference tables: p, rho, approach, TP, FP, CR, MSE (sd in parentheses).
pub fn render_summary_text(rows: &[SummaryRow]) -> String {
    let mut out = String::from("# pqlwcr.summary-text.v1\n");
    let mut examples: Vec<u8> = rows.iter().map(|r| r.example).collect();
    examples.dedup();
    for example in examples {
        let block: Vec<&SummaryRow> = rows.iter().filter(|r| r.example == example).collect();
        let n = block[0].n;
        let reps = block[0].report.replications;
        let k = block[0].k;
        writeln!(
            out,
            "example {example} (n = {n}, {reps} replications, K = {k})"
        )
        .unwrap();
        let mut table: Vec<[String; 7]> = vec![[
            "p".into(),
            "rho".into(),
            "approach".into(),
            "TP".into(),
            "FP".into(),
            "CR".into(),
            "MSE".into(),
        ]];
        for row in &block {
            let r = &row.report;
            table.push([
                row.p.to_string(),
                format!("{}", row.rho),
                row.method.name().to_string(),
                paren(r.tp_mean, r.tp_sd, 2),
                paren(r.fp_mean, r.fp_sd, 2),
                paren(r.cr, r.cr_sd, 2),
                paren(r.mse_mean, r.mse_sd, 3),
            ]);
        }
        let widths: Vec<usize> = (0..7)
            .map(|c| table.iter().map(|row| row[c].len()).max().unwrap())
            .collect();
        for row in &table {
            let line: Vec<String> = row
                .iter()
                .zip(&widths)
                .map(|(cell, w)| format!("{cell:<w$}"))
                .collect();
            writeln!(out, "  {}", line.join("  ").trim_end()).unwrap();
        }
        out.push('\n');
    }
    out
}

/// One JSON object per line; every line carries the schema tag.
pub fn render_records(records: &[ReplicateRecord]) -> Result<String> {
    #[derive(serde::Serialize)]
    struct Line<'a> {
        schema: &'static str,
        #[serde(flatten)]
        record: &'a ReplicateRecord,
    }
    let mut out = String::new();
    for record in records {
        out.push_str(&serde_json::to_string(&Line {
            schema: RECORD_SCHEMA,
            record,
        })?);
        out.push('\n');
    }
    Ok(out)
}

pub fn records_file_name(example: u8, p: usize, rho: f64, method: Method) -> String {
    format!("records_ex{example}_p{p}_rho{rho}_{}.jsonl", method.name())
}

/// Run manifest: everything needed to reproduce the run plus timing.
#[derive(serde::Serialize)]
pub struct Manifest<C: serde::Serialize> {
    pub schema: &'static str,
    pub command: String,
    pub config: C,
    pub master_seed: u64,
    pub version: &'static str,
    pub threads: usize,
    pub wall_time_s: f64,
    pub outputs: Vec<String>,
}

impl<C: serde::Serialize> Manifest<C> {
    pub fn new(command: &str, config: C, master_seed: u64, threads: usize) -> Self {
        Self {
            schema: MANIFEST_SCHEMA,
            command: command.to_string(),
            config,
            master_seed,
            version: env!("CARGO_PKG_VERSION"),
            threads,
            wall_time_s: 0.0,
            outputs: Vec::new(),
        }
    }

    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join("manifest.json");
        std::fs::write(&path, serde_json::to_string_pretty(self)?)
            .map_err(|e| anyhow!("cannot write {}: {e}", path.display()))?;
        Ok(path)
    }
}

pub fn write_text(dir: &Path, name: &str, content: &str) -> Result<PathBuf> {
    let path = dir.join(name);
    std::fs::write(&path, content).map_err(|e| anyhow!("cannot write {}: {e}", path.display()))?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fake_report() -> MetricsReport {
        MetricsReport {
            tp_mean: 4.0,
            tp_sd: 0.0,
            fp_mean: 0.85,
            fp_sd: 1.08,
            cr: 1.0,
            cr_sd: 0.0,
            mse_mean: 0.0334,
            mse_sd: 0.0221,
            replications: 20,
            wall_time_s: 1.0,
        }
    }

    #[test]
    fn summary_text_uses_reference_precision() {
        let rows = vec![SummaryRow {
            example: 1,
            n: 200,
            p: 50,
            rho: 0.5,
            method: Method::PqlWcr,
            k: 100,
            report: fake_report(),
        }];
        let text = render_summary_text(&rows);
        assert!(text.contains("4.00(0.00)"), "{text}");
        assert!(text.contains("0.85(1.08)"), "{text}");
        assert!(text.contains("0.033(0.022)"), "{text}");
    }

    #[test]
    fn summary_csv_row_count_and_schema() {
        let rows = vec![
            SummaryRow {
                example: 1,
                n: 200,
                p: 50,
                rho: 0.5,
                method: Method::PqlWcr,
                k: 100,
                report: fake_report(),
            },
            SummaryRow {
                example: 1,
                n: 200,
                p: 50,
                rho: 0.5,
                method: Method::NaiveLasso,
                k: 100,
                report: fake_report(),
            },
        ];
        let csv = render_summary_csv(&rows);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[1].starts_with(SUMMARY_SCHEMA));
        assert!(lines[2].contains("naive_lasso"));
    }
}
