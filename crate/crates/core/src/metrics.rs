//! Replicated simulation studies and their evaluation criteria.
//!
//! Each replicate generates a dataset, runs one estimation method, and is
//! scored against the generating truth: true positives, false positives,
//! coverage of the true support, and squared estimation error. Replicates run
//! concurrently on independently derived seed streams and are reduced in
//! replicate order, so reports do not depend on worker count.

use rayon::prelude::*;
use std::time::Instant;

use crate::datagen::{gen_dataset, ScenarioConfig};
use crate::error::{Error, Result};
use crate::penalty::{PenaltyKind, DEFAULT_SCAD_A};
use crate::seed::{derive_seed, derived_rng};
use crate::solver::{tune_lambda, SolverOptions};
use crate::wcr::{default_agg_grid, run_wcr, tune_aggregation};

/// Seed-path tags separating the generator stream from the resampling stream.
const DATA_TAG: u64 = 0x44_41;
const METHOD_TAG: u64 = 0x4d_45;

/// The RNG stream a given replicate uses to generate its dataset. Exposed so
/// callers can re-materialize exactly the data a harness replicate saw.
pub fn replicate_data_rng(master_seed: u64, replicate: usize) -> rand_chacha::ChaCha8Rng {
    derived_rng(master_seed, &[DATA_TAG, replicate as u64])
}

/// Estimation methods the harness can run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Resampled penalized quasi-likelihood with penalized aggregation.
    PqlWcr,
    /// L1-penalized fit on the pooled observations under working
    /// independence, tuned by BIC.
    NaiveLasso,
}

impl Method {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "pql_wcr" => Ok(Method::PqlWcr),
            "naive_lasso" => Ok(Method::NaiveLasso),
            other => Err(Error::invalid(format!(
                "unknown method '{other}' (expected pql_wcr or naive_lasso)"
            ))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Method::PqlWcr => "pql_wcr",
            Method::NaiveLasso => "naive_lasso",
        }
    }
}

/// Selection and estimation score of one replicate.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ReplicateScore {
    /// True coordinates correctly selected.
    pub tp: usize,
    /// Noise coordinates selected by mistake.
    pub fp: usize,
    /// Whether the selected set covers the true support.
    pub covered: bool,
    /// Squared Euclidean estimation error.
    pub sq_err: f64,
}

/// Compare a selected model against the generating truth.
pub fn score_replicate(
    beta_hat: &[f64],
    support_hat: &[usize],
    beta_star: &[f64],
    support_star: &[usize],
) -> Result<ReplicateScore> {
    if beta_hat.len() != beta_star.len() {
        return Err(Error::DimensionMismatch {
            expected: beta_star.len(),
            got: beta_hat.len(),
        });
    }
    let tp = support_hat
        .iter()
        .filter(|d| support_star.contains(d))
        .count();
    let fp = support_hat.len() - tp;
    let covered = support_star.iter().all(|d| support_hat.contains(d));
    let sq_err = beta_hat
        .iter()
        .zip(beta_star)
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    Ok(ReplicateScore {
        tp,
        fp,
        covered,
        sq_err,
    })
}

/// Everything persisted about one replicate; enough to recompute the report.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct ReplicateRecord {
    pub replicate: usize,
    pub seed: u64,
    pub method: Method,
    pub beta_hat: Vec<f64>,
    pub support: Vec<usize>,
    pub score: ReplicateScore,
}

/// Aggregated criteria over a batch of replicates.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct MetricsReport {
    pub tp_mean: f64,
    pub tp_sd: f64,
    pub fp_mean: f64,
    pub fp_sd: f64,
    /// Fraction of replicates whose selected set covers the truth.
    pub cr: f64,
    pub cr_sd: f64,
    pub mse_mean: f64,
    pub mse_sd: f64,
    pub replications: usize,
    /// Wall-clock seconds for the whole batch; reporting only, never written
    /// into reproducible outputs.
    pub wall_time_s: f64,
}

impl MetricsReport {
    /// Recompute the report from per-replicate records.
    pub fn from_records(records: &[ReplicateRecord], wall_time_s: f64) -> Result<Self> {
        if records.is_empty() {
            return Err(Error::invalid("need at least one replicate"));
        }
        let tp: Vec<f64> = records.iter().map(|r| r.score.tp as f64).collect();
        let fp: Vec<f64> = records.iter().map(|r| r.score.fp as f64).collect();
        let cover: Vec<f64> = records
            .iter()
            .map(|r| if r.score.covered { 1.0 } else { 0.0 })
            .collect();
        let mse: Vec<f64> = records.iter().map(|r| r.score.sq_err).collect();
        let (tp_mean, tp_sd) = mean_sd(&tp);
        let (fp_mean, fp_sd) = mean_sd(&fp);
        let (cr, cr_sd) = mean_sd(&cover);
        let (mse_mean, mse_sd) = mean_sd(&mse);
        Ok(Self {
            tp_mean,
            tp_sd,
            fp_mean,
            fp_sd,
            cr,
            cr_sd,
            mse_mean,
            mse_sd,
            replications: records.len(),
            wall_time_s,
        })
    }
}

/// Mean and sample standard deviation; a single value has deviation zero.
fn mean_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Report plus the records it was computed from.
#[derive(Debug, Clone)]
pub struct ReplicationOutcome {
    pub report: MetricsReport,
    pub records: Vec<ReplicateRecord>,
}

/// Run `replications` independent replicates of one (scenario, method) cell.
///
/// `k` is the number of within-cluster resamples used by the resampling
/// method; it is ignored by the pooled baseline.
pub fn run_replications(
    config: &ScenarioConfig,
    method: Method,
    replications: usize,
    k: usize,
    opts: &SolverOptions,
    master_seed: u64,
) -> Result<ReplicationOutcome> {
    if replications == 0 {
        return Err(Error::invalid("need at least one replicate"));
    }
    let start = Instant::now();
    let records: Vec<ReplicateRecord> = (0..replications)
        .into_par_iter()
        .map(|r| {
            run_one_replicate(config, method, r, k, opts, master_seed).map_err(|e| {
                Error::Replicate {
                    replicate: r,
                    source: Box::new(e),
                }
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let report = MetricsReport::from_records(&records, start.elapsed().as_secs_f64())?;
    Ok(ReplicationOutcome { report, records })
}

fn run_one_replicate(
    config: &ScenarioConfig,
    method: Method,
    replicate: usize,
    k: usize,
    opts: &SolverOptions,
    master_seed: u64,
) -> Result<ReplicateRecord> {
    let seed = derive_seed(master_seed, &[DATA_TAG, replicate as u64]);
    let mut rng = derived_rng(master_seed, &[DATA_TAG, replicate as u64]);
    let generated = gen_dataset(config, &mut rng)?;
    let family = config.family();

    let (beta_hat, support) = match method {
        Method::PqlWcr => {
            let wcr_seed = derive_seed(master_seed, &[METHOD_TAG, replicate as u64]);
            let ensemble = run_wcr(
                &generated.dataset,
                family,
                PenaltyKind::Scad { a: DEFAULT_SCAD_A },
                k,
                opts,
                wcr_seed,
            )?;
            let grid = default_agg_grid(config.p, config.n);
            let agg = tune_aggregation(&ensemble, &generated.dataset, family, &grid)?;
            (agg.beta_hat, agg.support)
        }
        Method::NaiveLasso => {
            let fit = tune_lambda(
                &generated.dataset.full_view(),
                family,
                PenaltyKind::L1,
                opts,
            )?;
            (fit.beta.clone(), fit.support)
        }
    };

    let score = score_replicate(
        &beta_hat,
        &support,
        &generated.beta_star,
        &generated.support,
    )?;
    Ok(ReplicateRecord {
        replicate,
        seed,
        method,
        beta_hat,
        support,
        score,
    })
}
