//! Dataset CSV schema: header `cluster,y,x1,...,xp`, one observation per row,
//! rows in any order, cluster ids as arbitrary strings. Clusters are grouped
//! in order of first appearance, which keeps reads deterministic.

use anyhow::{anyhow, bail, Result};
use pqlwcr::LongitudinalDataset;
use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

/// A parsed dataset plus its column names and cluster labels.
#[derive(Debug)]
pub struct CsvDataset {
    pub dataset: LongitudinalDataset,
    /// Covariate column names from the header, length `p`.
    pub names: Vec<String>,
    /// Cluster labels in first-appearance order, aligned with cluster indices.
    #[allow(dead_code)]
    pub cluster_labels: Vec<String>,
}

pub fn read_dataset(path: &Path) -> Result<CsvDataset> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| anyhow!("cannot read {}: {e}", path.display()))?;
    let mut lines = text.lines().enumerate();

    let (_, header) = lines
        .next()
        .ok_or_else(|| anyhow!("{}: file is empty", path.display()))?;
    let columns: Vec<&str> = header.split(',').map(str::trim).collect();
    if columns.len() < 3 || columns[0] != "cluster" || columns[1] != "y" {
        bail!("line 1: header must be 'cluster,y,<covariate names>', got '{header}'");
    }
    let names: Vec<String> = columns[2..].iter().map(|s| s.to_string()).collect();
    if names.iter().any(|n| n.is_empty()) {
        bail!("line 1: covariate column names must be non-empty");
    }
    let p = names.len();

    // gather rows per cluster in first-appearance order
    let mut order: Vec<String> = Vec::new();
    let mut groups: HashMap<String, (Vec<f64>, Vec<f64>)> = HashMap::new();
    for (idx, raw) in lines {
        let line_no = idx + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = raw.split(',').map(str::trim).collect();
        if fields.len() != p + 2 {
            bail!(
                "line {line_no}: expected {} fields, got {}",
                p + 2,
                fields.len()
            );
        }
        let id = fields[0].to_string();
        let y: f64 = fields[1]
            .parse()
            .map_err(|_| anyhow!("line {line_no}: invalid number '{}' in column y", fields[1]))?;
        if !y.is_finite() {
            bail!("line {line_no}: non-finite value in column y");
        }
        let mut row = Vec::with_capacity(p);
        for (d, field) in fields[2..].iter().enumerate() {
            let v: f64 = field.parse().map_err(|_| {
                anyhow!(
                    "line {line_no}: invalid number '{field}' in column {}",
                    names[d]
                )
            })?;
            if !v.is_finite() {
                bail!("line {line_no}: non-finite value in column {}", names[d]);
            }
            row.push(v);
        }
        let entry = groups.entry(id.clone()).or_insert_with(|| {
            order.push(id);
            (Vec::new(), Vec::new())
        });
        entry.0.push(y);
        entry.1.extend_from_slice(&row);
    }
    if order.is_empty() {
        bail!("{}: no observations", path.display());
    }

    let mut builder = LongitudinalDataset::builder(p);
    for id in &order {
        let (ys, rows) = &groups[id];
        builder.push_cluster(ys, rows)?;
    }
    Ok(CsvDataset {
        dataset: builder.build()?,
        names,
        cluster_labels: order,
    })
}

/// Default covariate names `x1..xp`.
pub fn default_names(p: usize) -> Vec<String> {
    (1..=p).map(|d| format!("x{d}")).collect()
}

/// Render a dataset in the CSV schema. Cluster labels are `c1..cn` unless
/// given.
pub fn render_dataset(dataset: &LongitudinalDataset, names: &[String]) -> String {
    let mut out = String::from("cluster,y");
    for name in names {
        out.push(',');
        out.push_str(name);
    }
    out.push('\n');
    for i in 0..dataset.n_clusters() {
        for j in 0..dataset.cluster_size(i) {
            write!(out, "c{},{}", i + 1, dataset.response(i, j)).unwrap();
            for v in dataset.covariate_row(i, j) {
                write!(out, ",{v}").unwrap();
            }
            out.push('\n');
        }
    }
    out
}

pub fn write_dataset(path: &Path, dataset: &LongitudinalDataset, names: &[String]) -> Result<()> {
    std::fs::write(path, render_dataset(dataset, names))
        .map_err(|e| anyhow!("cannot write {}: {e}", path.display()))
}
