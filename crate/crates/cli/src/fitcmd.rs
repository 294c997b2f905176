//! The `fit` command: run the full resampling pipeline on a user-supplied
//! CSV dataset and write the estimates, the selected set, and a manifest.

use anyhow::{bail, Context, Result};
use pqlwcr::family::ModelFamily;
use pqlwcr::penalty::{PenaltyKind, DEFAULT_SCAD_A};
use pqlwcr::solver::{LambdaGrid, SolverOptions};
use pqlwcr::wcr::{aggregate, default_agg_grid, run_wcr, tune_aggregation, AggregationPenalty};
use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use crate::csvio::read_dataset;
use crate::report::{self, Manifest, ESTIMATES_SCHEMA};

#[derive(Debug, Clone, serde::Serialize)]
pub struct FitSettings {
    pub data: String,
    pub family: String,
    pub k: usize,
    pub agg_lambda: Option<f64>,
    pub lambda_grid: usize,
    pub agg_grid: usize,
    pub intercept: bool,
    pub standardize: bool,
}

pub fn parse_family(name: &str) -> Result<ModelFamily> {
    match name {
        "gaussian" => Ok(ModelFamily::GaussianIdentity),
        "binomial" => Ok(ModelFamily::BinomialLogit),
        other => bail!("unknown family '{other}' (expected gaussian or binomial)"),
    }
}

pub fn run(settings: FitSettings, out_dir: &Path, seed: u64, threads: usize) -> Result<()> {
    let start = Instant::now();
    let family = parse_family(&settings.family)?;
    let csv = read_dataset(Path::new(&settings.data))?;
    let dataset = &csv.dataset;

    if family == ModelFamily::BinomialLogit {
        for (_, y, _) in dataset.full_view().visible() {
            if y != 0.0 && y != 1.0 {
                bail!("binomial responses must be 0 or 1, found {y}");
            }
        }
    }

    let opts = SolverOptions {
        lambda_grid: LambdaGrid::Auto {
            len: settings.lambda_grid,
            min_ratio: 0.01,
        },
        intercept: settings.intercept,
        standardize: settings.standardize,
        ..SolverOptions::default()
    };

    let ensemble = run_wcr(
        dataset,
        family,
        PenaltyKind::Scad { a: DEFAULT_SCAD_A },
        settings.k,
        &opts,
        seed,
    )?;
    let result = match settings.agg_lambda {
        Some(level) => aggregate(&ensemble, &AggregationPenalty::Uniform(level))?,
        None => {
            let mut grid = default_agg_grid(dataset.num_covariates(), dataset.n_clusters());
            if grid.len() != settings.agg_grid && grid.len() > 1 {
                grid = resize_grid(&grid, settings.agg_grid);
            }
            tune_aggregation(&ensemble, dataset, family, &grid)?
        }
    };

    std::fs::create_dir_all(out_dir)
        .with_context(|| format!("cannot create {}", out_dir.display()))?;

    let mut estimates =
        String::from("schema,coordinate,name,estimate,selection_frequency,selected\n");
    if settings.intercept {
        writeln!(
            estimates,
            "{ESTIMATES_SCHEMA},0,intercept,{},,1",
            result.intercept
        )
        .unwrap();
    }
    for (d, name) in csv.names.iter().enumerate() {
        writeln!(
            estimates,
            "{ESTIMATES_SCHEMA},{},{name},{},{},{}",
            d + 1,
            result.beta_hat[d],
            result.selection_frequency[d],
            if result.beta_hat[d] != 0.0 { 1 } else { 0 }
        )
        .unwrap();
    }
    report::write_text(out_dir, "estimates.csv", &estimates)?;

    let selected_names: Vec<&str> = result
        .support
        .iter()
        .map(|&d| csv.names[d].as_str())
        .collect();
    let mut selected = String::from("# pqlwcr.selected.v1\n");
    for name in &selected_names {
        selected.push_str(name);
        selected.push('\n');
    }
    report::write_text(out_dir, "selected.txt", &selected)?;

    println!(
        "n = {}, p = {}, K = {} ({} kept)",
        dataset.n_clusters(),
        dataset.num_covariates(),
        settings.k,
        ensemble.k_effective()
    );
    println!("selected set: {{{}}}", selected_names.join(", "));

    let mut manifest = Manifest::new("fit", &settings, seed, threads);
    manifest.outputs = vec!["estimates.csv".into(), "selected.txt".into()];
    manifest.wall_time_s = start.elapsed().as_secs_f64();
    manifest.write(out_dir)?;
    Ok(())
}

/// Log-spaced grid with the same endpoints but a different length.
fn resize_grid(grid: &[f64], len: usize) -> Vec<f64> {
    let hi = grid[0].ln();
    let lo = grid[grid.len() - 1].ln();
    if len <= 1 {
        return vec![grid[0]];
    }
    let step = (hi - lo) / (len as f64 - 1.0);
    (0..len).map(|k| (hi - k as f64 * step).exp()).collect()
}
