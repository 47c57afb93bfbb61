//! Initial-center selection: uniform random, k-median++ and HST search.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hst::{build_hst, Depth, HstTree, NodeId};
use crate::metric::{DemandSet, MetricSpace, PointId};
use crate::rng::{self, RngSeed};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitOrigin {
    Random,
    Kmedianpp,
    Hst,
    DpHst,
}

/// Ordered set of `k` distinct centers.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CenterSet {
    centers: Vec<PointId>,
    origin: InitOrigin,
}

impl CenterSet {
    pub fn new(space: &MetricSpace, centers: Vec<PointId>, origin: InitOrigin) -> Result<Self> {
        if centers.is_empty() {
            return Err(Error::invalid("center set is empty"));
        }
        for &c in &centers {
            space.check(c)?;
        }
        let mut sorted = centers.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::invalid("center set contains duplicates"));
        }
        Ok(CenterSet { centers, origin })
    }

    pub(crate) fn from_parts(centers: Vec<PointId>, origin: InitOrigin) -> Self {
        CenterSet { centers, origin }
    }

    pub fn centers(&self) -> &[PointId] {
        &self.centers
    }

    pub fn origin(&self) -> InitOrigin {
        self.origin
    }

    pub fn k(&self) -> usize {
        self.centers.len()
    }

    pub fn contains(&self, p: PointId) -> bool {
        self.centers.contains(&p)
    }

    /// Replace `out` by `incoming`, keeping the position of `out`.
    pub fn swap(&mut self, out: PointId, incoming: PointId) {
        if let Some(slot) = self.centers.iter_mut().find(|c| **c == out) {
            *slot = incoming;
        }
    }

    pub fn into_vec(self) -> Vec<PointId> {
        self.centers
    }
}

fn check_k(k: usize, available: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::invalid("k must be at least 1"));
    }
    if k > available {
        return Err(Error::invalid(format!("k = {k} exceeds the {available} available points")));
    }
    Ok(())
}

/// `k` distinct points uniformly without replacement.
pub fn random_init(space: &MetricSpace, k: usize, seed: RngSeed) -> Result<CenterSet> {
    let all: Vec<PointId> = space.points().collect();
    random_init_from(&all, k, seed)
}

/// Uniform choice of `k` distinct points from `candidates`.
pub fn random_init_from(candidates: &[PointId], k: usize, seed: RngSeed) -> Result<CenterSet> {
    check_k(k, candidates.len())?;
    let mut rng = rng::stream(seed);
    let picked = index::sample(&mut rng, candidates.len(), k)
        .into_iter()
        .map(|i| candidates[i])
        .collect();
    Ok(CenterSet::from_parts(picked, InitOrigin::Random))
}

/// k-median++ seeding over every point of the space.
pub fn kmedianpp_init(space: &MetricSpace, k: usize, seed: RngSeed, squared: bool) -> Result<CenterSet> {
    let all: Vec<PointId> = space.points().collect();
    kmedianpp_init_from(space, &all, k, seed, squared)
}

/// k-median++ seeding restricted to `candidates`.
///
/// The first center is uniform; each next center is drawn with probability
/// proportional to its distance (or squared distance) to the nearest chosen
/// center. If every remaining candidate sits on a chosen center, the next
/// center is uniform over the unchosen candidates.
pub fn kmedianpp_init_from(
    space: &MetricSpace,
    candidates: &[PointId],
    k: usize,
    seed: RngSeed,
    squared: bool,
) -> Result<CenterSet> {
    check_k(k, candidates.len())?;
    for &c in candidates {
        space.check(c)?;
    }
    let mut rng = rng::stream(seed);
    let m = candidates.len();
    let mut chosen = vec![false; m];
    let mut nearest = vec![f64::INFINITY; m];
    let mut centers = Vec::with_capacity(k);

    let mut pick = rng.random_range(0..m);
    loop {
        chosen[pick] = true;
        let c = candidates[pick];
        centers.push(c);
        if centers.len() == k {
            break;
        }
        let mut total = 0.0;
        for (i, p) in candidates.iter().enumerate() {
            let d = space.dist(p.0, c.0);
            let w = if squared { d * d } else { d };
            if w < nearest[i] {
                nearest[i] = w;
            }
            if !chosen[i] {
                total += nearest[i];
            }
        }
        pick = if total > 0.0 && total.is_finite() {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut last_positive = None;
            let mut found = None;
            for i in 0..m {
                if chosen[i] || nearest[i] <= 0.0 {
                    continue;
                }
                acc += nearest[i];
                last_positive = Some(i);
                if target < acc {
                    found = Some(i);
                    break;
                }
            }
            found.or(last_positive).expect("positive mass implies a candidate")
        } else {
            let open: Vec<usize> = (0..m).filter(|&i| !chosen[i]).collect();
            open[rng.random_range(0..open.len())]
        };
    }
    Ok(CenterSet::from_parts(centers, InitOrigin::Kmedianpp))
}

/// Which node counts drive the HST search.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CountField {
    Universe,
    Demand,
}

impl CountField {
    fn counts(self, tree: &HstTree) -> Result<Vec<f64>> {
        match self {
            CountField::Universe => Ok(tree.universe_counts()),
            CountField::Demand if tree.has_demand() => Ok(tree.demand_counts()),
            CountField::Demand => Err(Error::invalid("tree has no demand annotation")),
        }
    }
}

/// Roots of `k` pairwise disjoint subtrees.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SubtreeRootSet {
    roots: Vec<NodeId>,
}

impl SubtreeRootSet {
    pub fn new(tree: &HstTree, roots: Vec<NodeId>) -> Result<Self> {
        for (i, &a) in roots.iter().enumerate() {
            if a >= tree.len() {
                return Err(Error::invalid(format!("node {a} not in tree")));
            }
            for &b in &roots[i + 1..] {
                if tree.is_ancestor(a, b) || tree.is_ancestor(b, a) {
                    return Err(Error::invalid(format!("subtrees of {a} and {b} overlap")));
                }
            }
        }
        Ok(SubtreeRootSet { roots })
    }

    pub fn roots(&self) -> &[NodeId] {
        &self.roots
    }

    pub fn len(&self) -> usize {
        self.roots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }
}

/// Score `N_v · 2^{h_v}` for every node.
pub fn node_scores(tree: &HstTree, counts: &[f64]) -> Vec<f64> {
    tree.nodes()
        .iter()
        .zip(counts)
        .map(|(n, &c)| c * 2f64.powi(n.level))
        .collect()
}

/// Heap entry: higher score first, then smaller node id.
struct Ranked {
    score: f64,
    id: NodeId,
}

impl PartialEq for Ranked {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Ranked {}

impl PartialOrd for Ranked {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Ranked {
    fn cmp(&self, other: &Self) -> Ordering {
        self.score.total_cmp(&other.score).then(other.id.cmp(&self.id))
    }
}

/// Select `k` disjoint subtrees by highest score.
pub fn subtree_search(tree: &HstTree, k: usize, field: CountField) -> Result<SubtreeRootSet> {
    let counts = field.counts(tree)?;
    subtree_search_scored(tree, k, &node_scores(tree, &counts))
}

/// Subtree search over caller-provided node scores.
///
/// Each round adds the `k - |C|` best remaining nodes (ties by smaller id),
/// then drops any selected node that has a selected descendant. Dropped
/// nodes and all ancestors of selected nodes are never considered again.
pub fn subtree_search_scored(tree: &HstTree, k: usize, scores: &[f64]) -> Result<SubtreeRootSet> {
    if k == 0 {
        return Err(Error::invalid("k must be at least 1"));
    }
    if tree.num_leaves() < k {
        return Err(Error::invalid(format!(
            "tree has {} leaves, fewer than k = {k}",
            tree.num_leaves()
        )));
    }
    if scores.len() != tree.len() {
        return Err(Error::invalid("one score per node is required"));
    }
    // Heapify is linear; only the few nodes actually inspected are popped.
    let mut order: BinaryHeap<Ranked> = (0..tree.len()).map(|id| Ranked { score: scores[id], id }).collect();

    let mut blocked = vec![false; tree.len()];
    let mut in_set = vec![false; tree.len()];
    let mut selected: Vec<NodeId> = Vec::with_capacity(k);
    while selected.len() < k {
        let need = k - selected.len();
        let mut batch = Vec::with_capacity(need);
        while batch.len() < need {
            let Some(Ranked { id: v, .. }) = order.pop() else { break };
            if !blocked[v] && !in_set[v] {
                batch.push(v);
            }
        }
        if batch.is_empty() {
            return Err(Error::invalid("subtree search ran out of candidate nodes"));
        }
        for &v in &batch {
            in_set[v] = true;
        }
        selected.extend_from_slice(&batch);

        for &v in &batch {
            if !in_set[v] {
                continue;
            }
            for a in tree.ancestors(v) {
                if blocked[a] {
                    // Ancestors above an already-blocked node are blocked too.
                    break;
                }
                blocked[a] = true;
                in_set[a] = false;
            }
        }
        selected.retain(|&v| in_set[v]);
    }
    Ok(SubtreeRootSet { roots: selected })
}

/// Greedy descent from each subtree root to a leaf.
pub fn find_leaf(tree: &HstTree, roots: &SubtreeRootSet, field: CountField) -> Result<CenterSet> {
    let counts = field.counts(tree)?;
    let origin = InitOrigin::Hst;
    find_leaf_by(tree, roots, &counts, origin)
}

/// Descend by `primary` counts, breaking ties by universe count and then by
/// smaller node id.
pub fn find_leaf_by(
    tree: &HstTree,
    roots: &SubtreeRootSet,
    primary: &[f64],
    origin: InitOrigin,
) -> Result<CenterSet> {
    if primary.len() != tree.len() {
        return Err(Error::invalid("one count per node is required"));
    }
    let mut centers = Vec::with_capacity(roots.len());
    for &root in roots.roots() {
        let mut v = root;
        while !tree.node(v).is_leaf() {
            v = *tree
                .node(v)
                .children
                .iter()
                .max_by(|&&a, &&b| {
                    primary[a]
                        .total_cmp(&primary[b])
                        .then(tree.node(a).n_universe.cmp(&tree.node(b).n_universe))
                        .then(b.cmp(&a))
                })
                .expect("internal node has children");
        }
        centers.push(tree.node(v).leaf_point.expect("leaf holds a point"));
    }
    Ok(CenterSet::from_parts(centers, origin))
}

/// Intermediate and final results of HST initialization.
#[derive(Clone, Debug)]
pub struct HstSeeding {
    pub tree: HstTree,
    pub roots: SubtreeRootSet,
    pub centers: CenterSet,
}

/// Build the tree, search subtrees by universe counts, then descend to leaves.
pub fn hst_init(space: &MetricSpace, k: usize, depth: Depth, seed: RngSeed) -> Result<CenterSet> {
    Ok(hst_init_detailed(space, k, depth, seed)?.centers)
}

pub fn hst_init_detailed(space: &MetricSpace, k: usize, depth: Depth, seed: RngSeed) -> Result<HstSeeding> {
    check_k(k, space.len())?;
    let tree = build_hst(space, depth, seed)?;
    let roots = subtree_search(&tree, k, CountField::Universe)?;
    let centers = find_leaf(&tree, &roots, CountField::Universe)?;
    Ok(HstSeeding { tree, roots, centers })
}

/// Non-private HST initialization driven by demand counts: the tree is built
/// over the whole space and the search uses how many demand points fall in
/// each subtree.
pub fn hst_init_demand(
    space: &MetricSpace,
    demand: &DemandSet,
    k: usize,
    depth: Depth,
    seed: RngSeed,
) -> Result<CenterSet> {
    check_k(k, space.len())?;
    let tree = build_hst(space, depth, seed)?.annotate_demand(demand)?;
    let roots = subtree_search(&tree, k, CountField::Demand)?;
    find_leaf(&tree, &roots, CountField::Demand)
}
