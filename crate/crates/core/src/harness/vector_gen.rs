use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{self, RngSeed};

fn default_sigma() -> f64 {
    1.0
}
fn default_spread() -> f64 {
    20.0
}

/// Isotropic Gaussian blobs with centers uniform in `[0, spread]^dim`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussianMixtureConfig {
    pub n: usize,
    pub dim: usize,
    pub n_clusters: usize,
    #[serde(default = "default_sigma")]
    pub sigma: f64,
    #[serde(default = "default_spread")]
    pub spread: f64,
    #[serde(default)]
    pub seed: RngSeed,
}

/// Rows and the cluster label of each row. Points are assigned to clusters
/// round-robin, so cluster sizes differ by at most one.
pub fn gen_gaussian_mixture(cfg: &GaussianMixtureConfig) -> Result<(Vec<Vec<f64>>, Vec<usize>)> {
    if cfg.n == 0 || cfg.dim == 0 || cfg.n_clusters == 0 || cfg.n_clusters > cfg.n {
        return Err(Error::invalid("gaussian mixture needs n ≥ n_clusters ≥ 1 and dim ≥ 1"));
    }
    if !(cfg.sigma >= 0.0) || !cfg.sigma.is_finite() || !(cfg.spread >= 0.0) {
        return Err(Error::invalid(format!("sigma = {} and spread = {} must be nonnegative", cfg.sigma, cfg.spread)));
    }
    let noise = Normal::new(0.0, cfg.sigma)
        .map_err(|e| Error::invalid(format!("sigma = {}: {e}", cfg.sigma)))?;
    let mut rng = rng::stream(cfg.seed);
    let centers: Vec<Vec<f64>> = (0..cfg.n_clusters)
        .map(|_| (0..cfg.dim).map(|_| rng.random::<f64>() * cfg.spread).collect())
        .collect();
    let mut rows = Vec::with_capacity(cfg.n);
    let mut labels = Vec::with_capacity(cfg.n);
    for i in 0..cfg.n {
        let c = i % cfg.n_clusters;
        rows.push(centers[c].iter().map(|&x| x + noise.sample(&mut rng)).collect());
        labels.push(c);
    }
    Ok((rows, labels))
}
