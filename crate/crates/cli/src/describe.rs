//! The `describe` command: dataset shape, cluster-size histogram, and a crude
//! screen for size-informative responses (correlation between cluster size
//! and within-cluster mean response, with a cluster bootstrap interval).
//! Advisory output only.

use anyhow::Result;
use pqlwcr::seed::derived_rng;
use rand::Rng;
use std::collections::BTreeMap;
use std::path::Path;

use crate::csvio::read_dataset;

pub fn run(data: &Path, seed: u64, bootstrap: usize) -> Result<()> {
    let csv = read_dataset(data)?;
    let dataset = &csv.dataset;
    let n = dataset.n_clusters();
    println!(
        "n = {} clusters, p = {} covariates, {} observations",
        n,
        dataset.num_covariates(),
        dataset.total_obs()
    );

    let mut histogram: BTreeMap<usize, usize> = BTreeMap::new();
    for i in 0..n {
        *histogram.entry(dataset.cluster_size(i)).or_insert(0) += 1;
    }
    println!("cluster sizes:");
    for (size, count) in &histogram {
        println!("  {size:>4}: {count} ({:.3})", *count as f64 / n as f64);
    }

    if n < 2 {
        println!("size-informativeness screen: skipped (needs at least 2 clusters)");
        return Ok(());
    }
    if histogram.len() < 2 {
        println!("size-informativeness screen: skipped (all clusters have equal size)");
        return Ok(());
    }

    let sizes: Vec<f64> = (0..n).map(|i| dataset.cluster_size(i) as f64).collect();
    let means: Vec<f64> = (0..n)
        .map(|i| {
            let m = dataset.cluster_size(i);
            (0..m).map(|j| dataset.response(i, j)).sum::<f64>() / m as f64
        })
        .collect();
    let observed = correlation(&sizes, &means);

    let mut rng = derived_rng(seed, &[0x4943]);
    let mut draws = Vec::with_capacity(bootstrap);
    for _ in 0..bootstrap {
        let mut bs = Vec::with_capacity(n);
        let mut bm = Vec::with_capacity(n);
        for _ in 0..n {
            let i = rng.gen_range(0..n);
            bs.push(sizes[i]);
            bm.push(means[i]);
        }
        let c = correlation(&bs, &bm);
        if c.is_finite() {
            draws.push(c);
        }
    }
    draws.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let quantile = |q: f64| draws[((draws.len() - 1) as f64 * q).round() as usize];
    let (lo, hi) = (quantile(0.025), quantile(0.975));
    println!(
        "size-informativeness screen: corr(size, mean response) = {observed:.3}, \
         95% bootstrap interval [{lo:.3}, {hi:.3}] ({bootstrap} resamples)"
    );
    if lo <= 0.0 && hi >= 0.0 {
        println!("  interval covers 0: no evidence that response depends on cluster size");
    } else {
        println!("  interval excludes 0: responses may depend on cluster size");
    }
    println!("  advisory only; estimation does not use this screen");
    Ok(())
}

fn correlation(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let mut saa = 0.0;
    let mut sbb = 0.0;
    let mut sab = 0.0;
    for (x, y) in a.iter().zip(b) {
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
        sab += (x - ma) * (y - mb);
    }
    sab / (saa * sbb).sqrt()
}
