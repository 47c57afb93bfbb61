use rand::seq::index;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::{DemandSet, MetricSpace, PointId};
use crate::rng::{self, RngSeed};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DemandMode {
    /// Uniform over the universe.
    Balanced,
    /// Uniform over the union of two clusters.
    Imbalanced,
}

/// The two largest clusters, ties broken by smaller label.
pub fn two_largest_clusters(labels: &[usize]) -> Result<(usize, usize)> {
    let n_labels = labels.iter().max().map_or(0, |m| m + 1);
    let mut sizes = vec![0usize; n_labels];
    for &l in labels {
        sizes[l] += 1;
    }
    let mut order: Vec<usize> = (0..n_labels).filter(|&l| sizes[l] > 0).collect();
    if order.len() < 2 {
        return Err(Error::invalid("imbalanced demand needs at least two clusters"));
    }
    order.sort_by(|&a, &b| sizes[b].cmp(&sizes[a]).then(a.cmp(&b)));
    Ok((order[0], order[1]))
}

/// Sample a demand set of `size` points without replacement.
///
/// `clusters` selects the pair used in imbalanced mode; the two largest
/// clusters are used when it is `None`.
pub fn sample_demand(
    space: &MetricSpace,
    mode: DemandMode,
    size: usize,
    labels: Option<&[usize]>,
    clusters: Option<(usize, usize)>,
    seed: RngSeed,
) -> Result<DemandSet> {
    let pool: Vec<PointId> = match mode {
        DemandMode::Balanced => space.points().collect(),
        DemandMode::Imbalanced => {
            let labels = labels.ok_or_else(|| Error::invalid("imbalanced demand needs cluster labels"))?;
            if labels.len() != space.len() {
                return Err(Error::invalid(format!(
                    "{} labels for {} points",
                    labels.len(),
                    space.len()
                )));
            }
            let (a, b) = match clusters {
                Some(pair) => pair,
                None => two_largest_clusters(labels)?,
            };
            space.points().filter(|p| labels[p.0] == a || labels[p.0] == b).collect()
        }
    };
    if size == 0 || size > pool.len() {
        return Err(Error::invalid(format!(
            "demand size {size} is not in [1, {}] for the sampling pool",
            pool.len()
        )));
    }
    let mut rng = rng::stream(seed);
    let members = index::sample(&mut rng, pool.len(), size).into_iter().map(|i| pool[i]).collect();
    DemandSet::new(space, members)
}
