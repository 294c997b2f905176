//! Within-cluster resampling engine.
//!
//! Draws K one-observation-per-cluster resamples, runs a tuned penalized fit
//! on each, and aggregates the K coefficient vectors by penalized mean
//! regression. The aggregation objective
//! `K^{-1} sum_k ||b_k - beta||^2 + sum_d lambda_d |beta_d|`
//! separates per coordinate, so its minimizer is the soft-thresholded
//! componentwise mean, computed exactly rather than iteratively.

use rand::Rng;
use rayon::prelude::*;

use crate::data::{DatasetView, LongitudinalDataset, ResampleIndex};
use crate::error::{Error, Result};
use crate::family::ModelFamily;
use crate::penalty::{soft_threshold, PenaltyKind};
use crate::quasi::dot;
use crate::seed::{derive_seed, derived_rng};
use crate::solver::{tune_lambda, FitResult, SolverOptions};

/// Seed-path tag for per-resample RNG streams.
const RESAMPLE_TAG: u64 = 0x5243;

/// Fraction of resample fits that may be dropped before the run fails.
const MAX_DROP_FRACTION: f64 = 0.10;

/// Draw one uniform within-cluster index per cluster.
pub fn draw_resample(cluster_sizes: &[usize], rng: &mut impl Rng) -> Result<ResampleIndex> {
    if cluster_sizes.contains(&0) {
        return Err(Error::invalid("cluster sizes must be at least 1"));
    }
    let chosen = cluster_sizes.iter().map(|&m| rng.gen_range(0..m)).collect();
    Ok(ResampleIndex::new(chosen))
}

/// The K tuned per-resample fits plus their componentwise mean.
#[derive(Debug, Clone)]
pub struct WcrEnsemble {
    /// Successful fits, ordered by resample index.
    pub fits: Vec<FitResult>,
    /// Resample that produced each fit, aligned with `fits`.
    pub resamples: Vec<ResampleIndex>,
    /// Seeds of all requested resamples (including dropped ones).
    pub seeds: Vec<u64>,
    /// Number of resamples requested.
    pub k_requested: usize,
    /// Resample indices whose fit was dropped.
    pub dropped: Vec<usize>,
    /// Mean over kept fits, per coordinate.
    pub componentwise_mean: Vec<f64>,
    /// Mean intercept over kept fits (zero unless intercepts were requested).
    pub mean_intercept: f64,
}

impl WcrEnsemble {
    pub fn k_effective(&self) -> usize {
        self.fits.len()
    }

    pub fn p(&self) -> usize {
        self.componentwise_mean.len()
    }

    /// Fraction of kept fits in which coordinate `d` is active.
    pub fn selection_frequency(&self) -> Vec<f64> {
        let k = self.fits.len().max(1) as f64;
        let mut freq = vec![0.0; self.p()];
        for fit in &self.fits {
            for &d in &fit.support {
                freq[d] += 1.0;
            }
        }
        for f in &mut freq {
            *f /= k;
        }
        freq
    }
}

/// Run the full resampling stage: K independent draws, each with its own
/// tuned penalized fit.
///
/// Per-resample seeds derive from `master_seed` and the resample index alone,
/// so the output is identical for any worker count. A diverging resample is
/// dropped with a warning; the run fails if more than 10% drop.
pub fn run_wcr(
    dataset: &LongitudinalDataset,
    family: ModelFamily,
    kind: PenaltyKind,
    k: usize,
    opts: &SolverOptions,
    master_seed: u64,
) -> Result<WcrEnsemble> {
    if k == 0 {
        return Err(Error::invalid(
            "the number of resamples K must be at least 1",
        ));
    }
    let sizes = dataset.cluster_sizes();
    let seeds: Vec<u64> = (0..k)
        .map(|i| derive_seed(master_seed, &[RESAMPLE_TAG, i as u64]))
        .collect();

    let outcomes: Vec<(ResampleIndex, Result<FitResult>)> = (0..k)
        .into_par_iter()
        .map(|i| {
            let mut rng = derived_rng(master_seed, &[RESAMPLE_TAG, i as u64]);
            let z = draw_resample(&sizes, &mut rng).expect("sizes validated");
            let fit = dataset
                .resampled_view(&z)
                .and_then(|view| tune_lambda(&view, family, kind, opts));
            (z, fit)
        })
        .collect();

    let mut fits = Vec::with_capacity(k);
    let mut resamples = Vec::with_capacity(k);
    let mut dropped = Vec::new();
    for (i, (z, outcome)) in outcomes.into_iter().enumerate() {
        match outcome {
            Ok(fit) => {
                fits.push(fit);
                resamples.push(z);
            }
            Err(e) => {
                log::warn!("resample {i} dropped: {e}");
                dropped.push(i);
            }
        }
    }
    if fits.is_empty() || dropped.len() as f64 > MAX_DROP_FRACTION * k as f64 {
        return Err(Error::TooManyDropped {
            dropped: dropped.len(),
            total: k,
        });
    }

    let p = dataset.num_covariates();
    let mut mean = vec![0.0; p];
    let mut mean_intercept = 0.0;
    for fit in &fits {
        for (m, b) in mean.iter_mut().zip(&fit.beta) {
            *m += b;
        }
        mean_intercept += fit.intercept;
    }
    let keff = fits.len() as f64;
    for m in &mut mean {
        *m /= keff;
    }
    mean_intercept /= keff;

    Ok(WcrEnsemble {
        fits,
        resamples,
        seeds,
        k_requested: k,
        dropped,
        componentwise_mean: mean,
        mean_intercept,
    })
}

/// Per-coordinate penalty levels for the aggregation step.
#[derive(Debug, Clone, PartialEq)]
pub enum AggregationPenalty {
    /// One level shared by all coordinates.
    Uniform(f64),
    /// One level per coordinate.
    PerCoordinate(Vec<f64>),
}

impl AggregationPenalty {
    fn resolve(&self, p: usize) -> Result<Vec<f64>> {
        let levels = match self {
            AggregationPenalty::Uniform(l) => vec![*l; p],
            AggregationPenalty::PerCoordinate(v) => {
                if v.len() != p {
                    return Err(Error::DimensionMismatch {
                        expected: p,
                        got: v.len(),
                    });
                }
                v.clone()
            }
        };
        if levels.iter().any(|&l| !(l >= 0.0) || !l.is_finite()) {
            return Err(Error::domain(
                "aggregation penalties must be finite and >= 0",
            ));
        }
        Ok(levels)
    }
}

/// Final aggregated estimate and its exact support.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct AggregateResult {
    /// Minimizer of the penalized mean-regression objective.
    pub beta_hat: Vec<f64>,
    /// Indices of exactly nonzero coordinates of `beta_hat`.
    pub support: Vec<usize>,
    /// Penalty level applied to each coordinate.
    pub lambda_agg: Vec<f64>,
    /// Fraction of resample fits selecting each coordinate (diagnostic only;
    /// selection is by the penalized aggregation).
    pub selection_frequency: Vec<f64>,
    /// Mean intercept across resample fits, never penalized.
    pub intercept: f64,
}

/// Aggregate an ensemble by penalized mean regression, in closed form:
/// `beta_d = soft_threshold(mean_d, lambda_d / 2)`.
pub fn aggregate(ensemble: &WcrEnsemble, penalty: &AggregationPenalty) -> Result<AggregateResult> {
    let p = ensemble.p();
    let levels = penalty.resolve(p)?;
    let beta_hat: Vec<f64> = ensemble
        .componentwise_mean
        .iter()
        .zip(&levels)
        .map(|(&m, &l)| soft_threshold(m, 0.5 * l))
        .collect();
    let support = selected_set(&beta_hat);
    Ok(AggregateResult {
        beta_hat,
        support,
        lambda_agg: levels,
        selection_frequency: ensemble.selection_frequency(),
        intercept: ensemble.mean_intercept,
    })
}

/// Indices of exactly nonzero coordinates.
pub fn selected_set(beta: &[f64]) -> Vec<usize> {
    beta.iter()
        .enumerate()
        .filter(|(_, b)| **b != 0.0)
        .map(|(d, _)| d)
        .collect()
}

/// Default aggregation grid: 30 log-spaced levels on
/// `[0.01, 2] * sqrt(log p / n)`, descending.
pub fn default_agg_grid(p: usize, n: usize) -> Vec<f64> {
    let scale = ((p as f64).ln().max(0.0) / n as f64).sqrt();
    if scale == 0.0 {
        return vec![0.0];
    }
    let len = 30;
    let hi = (2.0 * scale).ln();
    let lo = (0.01 * scale).ln();
    let step = (hi - lo) / (len as f64 - 1.0);
    (0..len).map(|k| (hi - k as f64 * step).exp()).collect()
}

/// Choose a uniform aggregation level from `grid` by a BIC-type score summed
/// over the stored resample views, then aggregate with it.
///
/// The score of a candidate is
/// `sum_k [-2 sum_{visible in view k} Q(y, x' beta_hat)] + K |S| log(n)`;
/// ties go to the larger (sparser) level.
pub fn tune_aggregation(
    ensemble: &WcrEnsemble,
    dataset: &LongitudinalDataset,
    family: ModelFamily,
    grid: &[f64],
) -> Result<AggregateResult> {
    if grid.is_empty() {
        return Err(Error::invalid("aggregation grid must be non-empty"));
    }
    if ensemble.resamples.len() != ensemble.fits.len() {
        return Err(Error::invalid("ensemble resamples out of sync with fits"));
    }
    let n = dataset.n_clusters() as f64;
    let mut order: Vec<f64> = grid.to_vec();
    order.sort_by(|a, b| b.partial_cmp(a).expect("finite grid"));

    let mut best: Option<(f64, AggregateResult)> = None;
    for &level in &order {
        let candidate = aggregate(ensemble, &AggregationPenalty::Uniform(level))?;
        let score = aggregation_score(ensemble, dataset, family, &candidate, n)?;
        if best.as_ref().is_none_or(|(s, _)| score < *s) {
            best = Some((score, candidate));
        }
    }
    Ok(best.expect("grid non-empty").1)
}

fn aggregation_score(
    ensemble: &WcrEnsemble,
    dataset: &LongitudinalDataset,
    family: ModelFamily,
    candidate: &AggregateResult,
    n: f64,
) -> Result<f64> {
    let support = &candidate.support;
    let beta = &candidate.beta_hat;
    let intercept = candidate.intercept;
    let mut deviance = 0.0;
    for z in &ensemble.resamples {
        let view: DatasetView<'_> = dataset.resampled_view(z)?;
        for (_, y, x) in view.visible() {
            let eta = intercept + sparse_dot(x, beta, support);
            deviance += -2.0 * family.quasi_loglik_term(y, eta);
        }
    }
    let df = support.len() as f64;
    Ok(deviance + ensemble.fits.len() as f64 * df * n.ln())
}

#[inline]
fn sparse_dot(x: &[f64], beta: &[f64], support: &[usize]) -> f64 {
    if support.len() * 4 >= beta.len() {
        dot(x, beta)
    } else {
        support.iter().map(|&d| x[d] * beta[d]).sum()
    }
}
