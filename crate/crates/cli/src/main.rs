//! Command-line driver for penalized quasi-likelihood estimation on clustered
//! data via within-cluster resampling: replicated simulation studies (`simulate`),
//! fits on CSV datasets (`fit`), and dataset summaries (`describe`).

mod config;
mod csvio;
mod describe;
mod fitcmd;
mod report;
mod simulate;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "pqlwcr",
    version,
    about = "Penalized quasi-likelihood via within-cluster resampling"
)]
struct Cli {
    /// Worker threads (0 = all cores). Results do not depend on this.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    /// Master seed; overrides the config file for `simulate`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the replicated simulation study described by a config file.
    Simulate {
        /// Key-value config file (keys: example, n, p, rho, methods,
        /// replications, k, master_seed, lambda_grid, agg_grid, export_data).
        #[arg(long)]
        config: PathBuf,
        /// Output directory for summary tables, records, and the manifest.
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit a CSV dataset (header: cluster,y,x1,...,xp).
    Fit {
        #[arg(long)]
        data: PathBuf,
        /// Response family: gaussian or binomial.
        #[arg(long)]
        family: String,
        /// Number of within-cluster resamples.
        #[arg(long, default_value_t = 500)]
        k: usize,
        /// Aggregation penalty level; omit to tune it on a grid.
        #[arg(long)]
        agg_lambda: Option<f64>,
        /// Length of the per-fit regularization path.
        #[arg(long, default_value_t = 50)]
        lambda_grid: usize,
        /// Length of the aggregation tuning grid.
        #[arg(long, default_value_t = 30)]
        agg_grid: usize,
        /// Fit an unpenalized intercept.
        #[arg(long)]
        intercept: bool,
        /// Scale covariate columns to unit second moment before fitting.
        #[arg(long)]
        standardize: bool,
        /// Output directory.
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Summarize a CSV dataset: shape, cluster sizes, and a crude screen for
    /// size-informative responses.
    Describe {
        #[arg(long)]
        data: PathBuf,
        /// Bootstrap resamples for the screen interval.
        #[arg(long, default_value_t = 1000)]
        bootstrap: usize,
    },
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

fn run(cli: Cli) -> Result<()> {
    if cli.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()
            .context("cannot configure the worker pool")?;
    }
    match cli.command {
        Command::Simulate { config, out } => {
            let text = std::fs::read_to_string(&config)
                .with_context(|| format!("cannot read {}", config.display()))?;
            let mut plan = config::parse_config(&text)?;
            if let Some(seed) = cli.seed {
                plan.master_seed = seed;
            }
            simulate::run(plan, &out, cli.threads)
        }
        Command::Fit {
            data,
            family,
            k,
            agg_lambda,
            lambda_grid,
            agg_grid,
            intercept,
            standardize,
            out,
        } => {
            let settings = fitcmd::FitSettings {
                data: data.display().to_string(),
                family,
                k,
                agg_lambda,
                lambda_grid,
                agg_grid,
                intercept,
                standardize,
            };
            fitcmd::run(settings, &out, cli.seed.unwrap_or(0), cli.threads)
        }
        Command::Describe { data, bootstrap } => {
            describe::run(&data, cli.seed.unwrap_or(0), bootstrap)
        }
    }
}
