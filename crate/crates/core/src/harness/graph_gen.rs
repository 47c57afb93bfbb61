//! Random clustered graphs in the style of the OR-Library p-median sets.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::EdgeList;
use crate::rng::{self, derive_seed, RngSeed};

const MAX_REGENERATIONS: usize = 10;

fn default_clusters() -> usize {
    10
}
fn default_p_intra() -> f64 {
    0.2
}
fn default_p_inter() -> f64 {
    0.01
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphGenConfig {
    pub n: usize,
    #[serde(default = "default_clusters")]
    pub n_clusters: usize,
    /// Probability that two nodes of the same cluster are joined; weight ~ U(0, 1).
    #[serde(default = "default_p_intra")]
    pub p_intra: f64,
    /// Probability that two nodes of different clusters are joined; weight ~ U(0.5, r).
    #[serde(default = "default_p_inter")]
    pub p_inter: f64,
    /// Upper end of the inter-cluster weight range. Larger is more separable.
    pub r: f64,
    #[serde(default)]
    pub seed: RngSeed,
}

impl GraphGenConfig {
    pub fn new(n: usize, r: f64, seed: RngSeed) -> Self {
        GraphGenConfig { n, n_clusters: 10, p_intra: 0.2, p_inter: 0.01, r, seed }
    }

    fn validate(&self) -> Result<()> {
        if self.n_clusters == 0 || self.n < self.n_clusters {
            return Err(Error::invalid(format!(
                "need n ≥ n_clusters ≥ 1, got n = {} and n_clusters = {}",
                self.n, self.n_clusters
            )));
        }
        for (name, p) in [("p_intra", self.p_intra), ("p_inter", self.p_inter)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::invalid(format!("{name} = {p} is not a probability")));
            }
        }
        if !(self.r >= 0.5) || !self.r.is_finite() {
            return Err(Error::invalid(format!("r = {} must be at least 0.5", self.r)));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct GeneratedGraph {
    pub graph: EdgeList,
    /// Cluster label of every node.
    pub labels: Vec<usize>,
    /// Extra attempts needed before the graph came out connected.
    pub regenerations: usize,
    /// Edges added to join components after the last attempt.
    pub patched_edges: usize,
}

fn uniform_open<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    loop {
        let x = lo + (hi - lo) * rng.random::<f64>();
        if x > 0.0 {
            return x;
        }
    }
}

fn inter_weight<R: Rng>(rng: &mut R, r: f64) -> f64 {
    if r > 0.5 {
        rng.random_range(0.5..=r)
    } else {
        0.5
    }
}

struct Dsu(Vec<usize>);

impl Dsu {
    fn new(n: usize) -> Self {
        Dsu((0..n).collect())
    }
    fn find(&mut self, x: usize) -> usize {
        let mut root = x;
        while self.0[root] != root {
            root = self.0[root];
        }
        let mut cur = x;
        while self.0[cur] != root {
            let next = self.0[cur];
            self.0[cur] = root;
            cur = next;
        }
        root
    }
    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.0[ra.max(rb)] = ra.min(rb);
        true
    }
}

fn components(n: usize, edges: &[(usize, usize, f64)]) -> Vec<Vec<usize>> {
    let mut dsu = Dsu::new(n);
    for &(u, v, _) in edges {
        dsu.union(u, v);
    }
    let mut by_root: Vec<Vec<usize>> = vec![Vec::new(); n];
    for v in 0..n {
        let r = dsu.find(v);
        by_root[r].push(v);
    }
    by_root.into_iter().filter(|c| !c.is_empty()).collect()
}

/// Generate a connected clustered graph.
///
/// Nodes are shuffled and split into `n_clusters` groups of near-equal size.
/// Disconnected draws are regenerated up to ten times; after that the
/// components are chained together with inter-cluster weight edges.
pub fn gen_cluster_graph(cfg: &GraphGenConfig) -> Result<GeneratedGraph> {
    cfg.validate()?;
    let n = cfg.n;
    let mut rng = rng::substream(cfg.seed, 0);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let mut labels = vec![0; n];
    for (pos, &v) in order.iter().enumerate() {
        labels[v] = pos * cfg.n_clusters / n;
    }

    let mut attempt = 0;
    loop {
        let mut rng = rng::stream(derive_seed(cfg.seed, 1 + attempt as u64));
        let mut edges = Vec::new();
        for u in 0..n {
            for v in (u + 1)..n {
                if labels[u] == labels[v] {
                    if rng.random::<f64>() < cfg.p_intra {
                        edges.push((u, v, uniform_open(&mut rng, 0.0, 1.0)));
                    }
                } else if rng.random::<f64>() < cfg.p_inter {
                    edges.push((u, v, inter_weight(&mut rng, cfg.r)));
                }
            }
        }
        let comps = components(n, &edges);
        if comps.len() == 1 {
            return Ok(GeneratedGraph {
                graph: EdgeList { n, edges },
                labels,
                regenerations: attempt,
                patched_edges: 0,
            });
        }
        if attempt + 1 >= MAX_REGENERATIONS {
            let mut patched = 0;
            for pair in comps.windows(2) {
                let a = pair[0][rng.random_range(0..pair[0].len())];
                let b = pair[1][rng.random_range(0..pair[1].len())];
                edges.push((a.min(b), a.max(b), inter_weight(&mut rng, cfg.r)));
                patched += 1;
            }
            return Ok(GeneratedGraph {
                graph: EdgeList { n, edges },
                labels,
                regenerations: attempt,
                patched_edges: patched,
            });
        }
        attempt += 1;
    }
}
