//! Clustered datasets with ragged cluster sizes, and lightweight views.
//!
//! Observations are stored flat with per-cluster offsets. A [`DatasetView`]
//! selects either all observations or one observation per cluster (a
//! within-cluster resample); it borrows the dataset and materializes nothing,
//! so thousands of resampled views can exist without copying data.

use crate::error::{Error, Result};

/// Immutable clustered dataset: responses `y[i][j]` and covariate rows
/// `x[i][j]` of common width `p`, for clusters `i` of size `M_i >= 1`.
#[derive(Debug, Clone)]
pub struct LongitudinalDataset {
    /// Prefix sums of cluster sizes; length `n + 1`.
    offsets: Vec<usize>,
    /// Flat responses, length `total_obs`.
    responses: Vec<f64>,
    /// Flat row-major covariates, length `total_obs * p`.
    covariates: Vec<f64>,
    p: usize,
}

impl LongitudinalDataset {
    /// Assemble a dataset from per-cluster sizes and flat storage.
    ///
    /// `responses` holds all observations cluster by cluster; `covariates`
    /// holds the matching rows in row-major order.
    pub fn from_parts(
        cluster_sizes: &[usize],
        responses: Vec<f64>,
        covariates: Vec<f64>,
        p: usize,
    ) -> Result<Self> {
        if cluster_sizes.is_empty() {
            return Err(Error::invalid("dataset needs at least one cluster"));
        }
        if p == 0 {
            return Err(Error::invalid("covariate dimension must be at least 1"));
        }
        if cluster_sizes.contains(&0) {
            return Err(Error::invalid(
                "every cluster must have at least one observation",
            ));
        }
        let total: usize = cluster_sizes.iter().sum();
        if responses.len() != total {
            return Err(Error::DimensionMismatch {
                expected: total,
                got: responses.len(),
            });
        }
        if covariates.len() != total * p {
            return Err(Error::DimensionMismatch {
                expected: total * p,
                got: covariates.len(),
            });
        }
        let mut offsets = Vec::with_capacity(cluster_sizes.len() + 1);
        offsets.push(0);
        let mut acc = 0;
        for &m in cluster_sizes {
            acc += m;
            offsets.push(acc);
        }
        Ok(Self {
            offsets,
            responses,
            covariates,
            p,
        })
    }

    /// Build a dataset one cluster at a time.
    pub fn builder(p: usize) -> DatasetBuilder {
        DatasetBuilder {
            p,
            sizes: Vec::new(),
            responses: Vec::new(),
            covariates: Vec::new(),
        }
    }

    pub fn n_clusters(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn cluster_size(&self, i: usize) -> usize {
        self.offsets[i + 1] - self.offsets[i]
    }

    pub fn cluster_sizes(&self) -> Vec<usize> {
        (0..self.n_clusters())
            .map(|i| self.cluster_size(i))
            .collect()
    }

    pub fn total_obs(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    /// Covariate dimension `p`.
    pub fn num_covariates(&self) -> usize {
        self.p
    }

    pub fn response(&self, cluster: usize, obs: usize) -> f64 {
        self.responses[self.offsets[cluster] + obs]
    }

    pub fn covariate_row(&self, cluster: usize, obs: usize) -> &[f64] {
        let r = self.offsets[cluster] + obs;
        &self.covariates[r * self.p..(r + 1) * self.p]
    }

    /// View over every observation.
    pub fn full_view(&self) -> DatasetView<'_> {
        DatasetView {
            data: self,
            selector: Selector::Full,
        }
    }

    /// View over one observation per cluster, chosen by `resample`.
    pub fn resampled_view<'a>(&'a self, resample: &'a ResampleIndex) -> Result<DatasetView<'a>> {
        resample.validate_against(&self.cluster_sizes())?;
        Ok(DatasetView {
            data: self,
            selector: Selector::Resample(&resample.chosen),
        })
    }
}

/// Incremental construction of a [`LongitudinalDataset`].
#[derive(Debug)]
pub struct DatasetBuilder {
    p: usize,
    sizes: Vec<usize>,
    responses: Vec<f64>,
    covariates: Vec<f64>,
}

impl DatasetBuilder {
    /// Append one cluster: `responses` of length `M` and `rows` of length `M * p`.
    pub fn push_cluster(&mut self, responses: &[f64], rows: &[f64]) -> Result<&mut Self> {
        if responses.is_empty() {
            return Err(Error::invalid(
                "cluster must contain at least one observation",
            ));
        }
        if rows.len() != responses.len() * self.p {
            return Err(Error::DimensionMismatch {
                expected: responses.len() * self.p,
                got: rows.len(),
            });
        }
        self.sizes.push(responses.len());
        self.responses.extend_from_slice(responses);
        self.covariates.extend_from_slice(rows);
        Ok(self)
    }

    pub fn build(self) -> Result<LongitudinalDataset> {
        LongitudinalDataset::from_parts(&self.sizes, self.responses, self.covariates, self.p)
    }
}

/// One chosen observation per cluster (0-based within-cluster indices).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResampleIndex {
    chosen: Vec<usize>,
}

impl ResampleIndex {
    /// Wrap raw 0-based indices; consistency with a dataset is checked when a
    /// view is created.
    pub fn new(chosen: Vec<usize>) -> Self {
        Self { chosen }
    }

    pub fn chosen(&self) -> &[usize] {
        &self.chosen
    }

    pub fn len(&self) -> usize {
        self.chosen.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chosen.is_empty()
    }

    fn validate_against(&self, cluster_sizes: &[usize]) -> Result<()> {
        if self.chosen.len() != cluster_sizes.len() {
            return Err(Error::DimensionMismatch {
                expected: cluster_sizes.len(),
                got: self.chosen.len(),
            });
        }
        for (i, (&z, &m)) in self.chosen.iter().zip(cluster_sizes).enumerate() {
            if z >= m {
                return Err(Error::invalid(format!(
                    "resample index {z} out of range for cluster {i} of size {m}"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy)]
enum Selector<'a> {
    Full,
    Resample(&'a [usize]),
}

/// A borrowed selection of observations: either the whole dataset or one
/// observation per cluster.
#[derive(Debug, Clone, Copy)]
pub struct DatasetView<'a> {
    data: &'a LongitudinalDataset,
    selector: Selector<'a>,
}

impl<'a> DatasetView<'a> {
    pub fn dataset(&self) -> &'a LongitudinalDataset {
        self.data
    }

    pub fn n_clusters(&self) -> usize {
        self.data.n_clusters()
    }

    pub fn p(&self) -> usize {
        self.data.p
    }

    /// Number of visible observations (`n` under a resample).
    pub fn n_visible(&self) -> usize {
        match self.selector {
            Selector::Full => self.data.total_obs(),
            Selector::Resample(z) => z.len(),
        }
    }

    pub fn is_resampled(&self) -> bool {
        matches!(self.selector, Selector::Resample(_))
    }

    /// Iterate visible observations as `(cluster, y, x_row)`.
    pub fn visible(&self) -> impl Iterator<Item = (usize, f64, &'a [f64])> + '_ {
        let data = self.data;
        let selector = self.selector;
        (0..data.n_clusters()).flat_map(move |i| {
            let (lo, hi) = match selector {
                Selector::Full => (0, data.cluster_size(i)),
                Selector::Resample(z) => (z[i], z[i] + 1),
            };
            (lo..hi).map(move |j| (i, data.response(i, j), data.covariate_row(i, j)))
        })
    }
}
