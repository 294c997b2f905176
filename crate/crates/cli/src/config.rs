//! Flat key-value configuration files for the `simulate` command.
//!
//! Format: one `key = value` per line, `#` starts a comment. List-valued keys
//! take comma-separated entries. Unknown keys are hard errors so typos cannot
//! silently change a study.

use anyhow::{anyhow, bail, Context, Result};
use pqlwcr::metrics::Method;

/// Parsed simulation plan: the cross product of examples, dimensions,
/// correlations, and methods.
#[derive(Debug, Clone, serde::Serialize)]
pub struct SimConfig {
    pub examples: Vec<u8>,
    pub n: usize,
    pub p_values: Vec<usize>,
    pub rho_values: Vec<f64>,
    pub methods: Vec<Method>,
    pub replications: usize,
    pub k: usize,
    pub master_seed: u64,
    /// Length of the per-fit regularization path.
    pub lambda_grid: usize,
    /// Length of the aggregation-level grid.
    pub agg_grid: usize,
    /// Write each replicate's dataset next to the results.
    pub export_data: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            examples: vec![],
            n: 200,
            p_values: vec![],
            rho_values: vec![],
            methods: vec![Method::PqlWcr],
            replications: 20,
            k: 100,
            master_seed: 0,
            lambda_grid: 50,
            agg_grid: 30,
            export_data: false,
        }
    }
}

pub fn parse_config(text: &str) -> Result<SimConfig> {
    let mut config = SimConfig::default();
    let mut saw_example = false;
    let mut saw_p = false;
    let mut saw_rho = false;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            anyhow!("config line {line_no}: expected 'key = value', got '{line}'")
        })?;
        let key = key.trim();
        let value = value.trim();
        let ctx = |what: &str| format!("config line {line_no}: invalid {what} '{value}'");
        match key {
            "example" => {
                config.examples = split_list(value)
                    .map(|v| v.parse::<u8>().map_err(|_| anyhow!(ctx("example id"))))
                    .collect::<Result<_>>()?;
                saw_example = true;
            }
            "n" => config.n = value.parse().with_context(|| ctx("cluster count"))?,
            "p" => {
                config.p_values = split_list(value)
                    .map(|v| v.parse::<usize>().map_err(|_| anyhow!(ctx("dimension"))))
                    .collect::<Result<_>>()?;
                saw_p = true;
            }
            "rho" => {
                config.rho_values = split_list(value)
                    .map(|v| v.parse::<f64>().map_err(|_| anyhow!(ctx("correlation"))))
                    .collect::<Result<_>>()?;
                saw_rho = true;
            }
            "methods" => {
                config.methods = split_list(value)
                    .map(|v| Method::parse(v).map_err(|e| anyhow!("config line {line_no}: {e}")))
                    .collect::<Result<_>>()?;
            }
            "replications" => {
                config.replications = value.parse().with_context(|| ctx("replication count"))?
            }
            "k" => config.k = value.parse().with_context(|| ctx("resample count"))?,
            "master_seed" => config.master_seed = value.parse().with_context(|| ctx("seed"))?,
            "lambda_grid" => {
                config.lambda_grid = value.parse().with_context(|| ctx("grid length"))?
            }
            "agg_grid" => config.agg_grid = value.parse().with_context(|| ctx("grid length"))?,
            "export_data" => {
                config.export_data = match value {
                    "true" | "1" | "yes" => true,
                    "false" | "0" | "no" => false,
                    _ => bail!(ctx("flag (true/false)")),
                }
            }
            other => bail!(
                "config line {line_no}: unknown key '{other}' (known keys: example, n, p, rho, \
                 methods, replications, k, master_seed, lambda_grid, agg_grid, export_data)"
            ),
        }
    }
    if !saw_example {
        bail!("config is missing required key 'example'");
    }
    if !saw_p {
        bail!("config is missing required key 'p'");
    }
    if !saw_rho {
        bail!("config is missing required key 'rho'");
    }
    if config.methods.is_empty() {
        bail!("config key 'methods' must list at least one method");
    }
    Ok(config)
}

fn split_list(value: &str) -> impl Iterator<Item = &str> {
    value.split(',').map(str::trim).filter(|s| !s.is_empty())
}
