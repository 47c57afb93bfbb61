//! 2-HST construction by recursive randomized ball partitioning.
//!
//! The root is a virtual node at level `L` holding every point. A node at
//! level `i` with more than one point is split by visiting its points in a
//! fresh random order: each still-unassigned point opens a ball, and every
//! unassigned point within the ball radius joins it. Children live at level
//! `i - 1`; the radius is half the level's diameter bound, so every node at
//! level `i` has (normalized) diameter at most `Δ_norm / 2^(L-i)`.
//!
//! Tree edge weights follow the halving convention: the edge between levels
//! `i` and `i - 1` has length `2^(i-1)`. A singleton created at level `j`
//! stands for the chain down to level 0, so its edge to the parent has
//! length `2^(j+1) - 1`. When a level-0 node still holds several points
//! (duplicates, or a small fixed `L`) each point hangs below it as a leaf
//! at level -1 with edge length `1/2`.

use std::collections::{HashMap, HashSet};
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::{DemandSet, MetricSpace, Norm, PointId};
use crate::rng::{self, RngSeed};

pub type NodeId = usize;

/// Level index. Leaves below an exhausted level-0 node sit at level -1.
pub type Level = i32;

const MAX_LEVELS: u32 = 1000;

/// Requested tree depth.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Depth {
    /// `⌈log2(Δ / min_dist)⌉`, at least 1.
    Auto,
    Fixed(u32),
}

impl Depth {
    pub fn resolve(self, space: &MetricSpace) -> Result<u32> {
        match self {
            Depth::Fixed(0) => Err(Error::invalid("tree depth L must be at least 1")),
            Depth::Fixed(l) if l > MAX_LEVELS => {
                Err(Error::invalid(format!("tree depth L = {l} exceeds {MAX_LEVELS}")))
            }
            Depth::Fixed(l) => Ok(l),
            Depth::Auto => {
                let norm_diam = space.diameter() * normalization_scale(space);
                let l = if norm_diam > 1.0 { norm_diam.log2().ceil() as u32 } else { 1 };
                if l > MAX_LEVELS {
                    return Err(Error::invalid(format!(
                        "automatic depth {l} exceeds {MAX_LEVELS}; distance ratio too large"
                    )));
                }
                Ok(l.max(1))
            }
        }
    }
}

impl FromStr for Depth {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(Depth::Auto);
        }
        let l = s
            .parse::<u32>()
            .map_err(|_| Error::invalid(format!("depth must be `auto` or a positive integer, got `{s}`")))?;
        if l == 0 {
            return Err(Error::invalid("tree depth L must be at least 1"));
        }
        Ok(Depth::Fixed(l))
    }
}

/// Factor mapping raw distances into the regime where the minimum nonzero
/// distance is 1.
pub fn normalization_scale(space: &MetricSpace) -> f64 {
    if space.min_dist() > 0.0 {
        1.0 / space.min_dist()
    } else {
        1.0
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HstNode {
    pub id: NodeId,
    pub level: Level,
    pub center: PointId,
    pub parent: Option<NodeId>,
    pub children: Vec<NodeId>,
    pub leaf_point: Option<PointId>,
    pub n_universe: usize,
    pub n_demand: usize,
    /// Tree length of the edge to the parent (0 for the root).
    pub edge_weight: f64,
}

impl HstNode {
    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }
}

#[derive(Clone, Debug)]
pub struct HstTree {
    nodes: Vec<HstNode>,
    levels: u32,
    seed: RngSeed,
    scale: f64,
    diameter: f64,
    leaf_of_point: Vec<NodeId>,
    root_dist: Vec<f64>,
    demand_annotated: bool,
}

/// Scanning carves a node with `m` points and `c` balls in `O(m c)`. Once a
/// node has produced this many balls and still holds enough points, vector
/// spaces switch to a grid filter for the rest.
const GRID_AFTER_BALLS: usize = 8;
const GRID_MIN_POINTS: usize = 256;
const GRID_DIMS: usize = 3;

/// Distances between the points of one node, addressed by their position
/// in the node's (ascending) point list. Vector coordinates are copied into
/// a contiguous buffer so repeated scans stay cache friendly.
struct NodePoints<'a> {
    space: &'a MetricSpace,
    points: &'a [usize],
    local: Option<(Vec<f64>, usize, Norm)>,
}

impl<'a> NodePoints<'a> {
    fn new(space: &'a MetricSpace, points: &'a [usize]) -> Self {
        let local = space.dim().zip(space.norm()).map(|(dim, norm)| {
            let mut buf = Vec::with_capacity(points.len() * dim);
            for &p in points {
                buf.extend_from_slice(space.coords(p).expect("vector space"));
            }
            (buf, dim, norm)
        });
        NodePoints { space, points, local }
    }

    #[inline]
    fn coords(&self, slot: usize) -> Option<&[f64]> {
        self.local.as_ref().map(|(buf, dim, _)| &buf[slot * dim..(slot + 1) * dim])
    }

    #[inline]
    fn dist(&self, a: usize, b: usize) -> f64 {
        match &self.local {
            Some((buf, dim, norm)) => norm.eval(&buf[a * dim..(a + 1) * dim], &buf[b * dim..(b + 1) * dim]),
            None => self.space.dist(self.points[a], self.points[b]),
        }
    }
}

/// Split `points` (ascending) into balls. Centers are visited in the order
/// given by `order` (a permutation of positions in `points`), and each
/// center not yet covered claims every uncovered point within `radius`.
/// Balls come out in center order with ascending members.
fn carve_balls(space: &MetricSpace, points: &[usize], order: &[usize], radius: f64) -> Vec<(usize, Vec<usize>)> {
    let node = NodePoints::new(space, points);
    let gridable = radius > 0.0 && node.local.is_some();
    let mut claimed = vec![false; points.len()];
    let mut remaining: Vec<usize> = (0..points.len()).collect();
    let mut balls = Vec::new();
    for (pos, &center) in order.iter().enumerate() {
        if remaining.is_empty() {
            break;
        }
        if claimed[center] {
            continue;
        }
        if gridable && balls.len() >= GRID_AFTER_BALLS && remaining.len() >= GRID_MIN_POINTS {
            carve_with_grid(&node, &remaining, &order[pos..], radius, &mut claimed, &mut balls);
            break;
        }
        let mut ball = Vec::new();
        remaining.retain(|&u| {
            if u == center || node.dist(center, u) <= radius {
                ball.push(u);
                false
            } else {
                true
            }
        });
        for &u in &ball {
            claimed[u] = true;
        }
        balls.push((center, ball));
    }
    balls
        .into_iter()
        .map(|(c, ball)| (points[c], ball.into_iter().map(|u| points[u]).collect()))
        .collect()
}

/// Continue carving `remaining` with candidates filtered through a grid of
/// side `radius` over the leading coordinates. A point within `radius` of a
/// center differs from it by at most `radius` in every coordinate under
/// both norms, so it lies in a neighboring cell.
fn carve_with_grid(
    node: &NodePoints<'_>,
    remaining: &[usize],
    order: &[usize],
    radius: f64,
    claimed: &mut [bool],
    balls: &mut Vec<(usize, Vec<usize>)>,
) {
    let dims = node.coords(0).map_or(0, |x| x.len()).min(GRID_DIMS);
    let cell_of = |slot: usize| -> [i64; GRID_DIMS] {
        let x = node.coords(slot).expect("vector space");
        let mut key = [0i64; GRID_DIMS];
        for (k, &v) in key.iter_mut().zip(x).take(dims) {
            *k = (v / radius).floor() as i64;
        }
        key
    };
    let mut grid: HashMap<[i64; GRID_DIMS], Vec<usize>> = HashMap::new();
    for &u in remaining {
        grid.entry(cell_of(u)).or_default().push(u);
    }
    let mut offsets = vec![[0i64; GRID_DIMS]];
    for d in 0..dims {
        offsets = offsets
            .into_iter()
            .flat_map(|o| {
                (-1..=1).map(move |step| {
                    let mut next = o;
                    next[d] = step;
                    next
                })
            })
            .collect();
    }
    let mut left = remaining.len();
    for &center in order {
        if left == 0 {
            break;
        }
        if claimed[center] {
            continue;
        }
        let base = cell_of(center);
        let mut ball = Vec::new();
        for off in &offsets {
            let mut key = base;
            for d in 0..dims {
                key[d] += off[d];
            }
            if let Some(cell) = grid.get_mut(&key) {
                cell.retain(|&u| {
                    if u == center || node.dist(center, u) <= radius {
                        ball.push(u);
                        false
                    } else {
                        true
                    }
                });
            }
        }
        ball.sort_unstable();
        left -= ball.len();
        for &u in &ball {
            claimed[u] = true;
        }
        balls.push((center, ball));
    }
}

/// Build a 2-HST over `space`.
pub fn build_hst(space: &MetricSpace, depth: Depth, seed: RngSeed) -> Result<HstTree> {
    if space.is_empty() {
        return Err(Error::invalid("cannot build a tree over an empty space"));
    }
    let levels = depth.resolve(space)?;
    let n = space.len();
    let diameter = space.diameter();
    let top = levels as Level;

    let mut nodes: Vec<HstNode> = Vec::with_capacity(2 * n);
    let mut members: Vec<Vec<usize>> = Vec::with_capacity(2 * n);

    let mut root_rng = rng::substream(seed, u64::MAX);
    let root_center = root_rng.random_range(0..n);
    nodes.push(HstNode {
        id: 0,
        level: top,
        center: PointId(root_center),
        parent: None,
        children: Vec::new(),
        leaf_point: (n == 1).then_some(PointId(0)),
        n_universe: n,
        n_demand: 0,
        edge_weight: 0.0,
    });
    members.push((0..n).collect());

    // Nodes are expanded in id order, so ids are assigned breadth-first and
    // each node's permutation depends only on (seed, node id).
    let mut next = 0;
    while next < nodes.len() {
        let id = next;
        next += 1;
        if members[id].len() <= 1 {
            continue;
        }
        let points = std::mem::take(&mut members[id]);
        let level = nodes[id].level;

        if level <= 0 {
            for p in points {
                let child = nodes.len();
                nodes.push(HstNode {
                    id: child,
                    level: -1,
                    center: PointId(p),
                    parent: Some(id),
                    children: Vec::new(),
                    leaf_point: Some(PointId(p)),
                    n_universe: 1,
                    n_demand: 0,
                    edge_weight: 0.5,
                });
                members.push(Vec::new());
                nodes[id].children.push(child);
            }
            continue;
        }

        let radius = diameter / 2f64.powi(top - level + 2);
        let mut order: Vec<usize> = (0..points.len()).collect();
        order.shuffle(&mut rng::substream(seed, id as u64));
        for (center, ball) in carve_balls(space, &points, &order, radius) {
            let child = nodes.len();
            let child_level = level - 1;
            let singleton = ball.len() == 1;
            nodes.push(HstNode {
                id: child,
                level: child_level,
                center: PointId(center),
                parent: Some(id),
                children: Vec::new(),
                leaf_point: singleton.then_some(PointId(center)),
                n_universe: ball.len(),
                n_demand: 0,
                edge_weight: if singleton {
                    2f64.powi(level) - 1.0
                } else {
                    2f64.powi(child_level)
                },
            });
            members.push(if singleton { Vec::new() } else { ball });
            nodes[id].children.push(child);
        }
    }

    let mut leaf_of_point = vec![usize::MAX; n];
    let mut root_dist = vec![0.0; nodes.len()];
    for node in &nodes {
        if let Some(parent) = node.parent {
            root_dist[node.id] = root_dist[parent] + node.edge_weight;
        }
        if let Some(p) = node.leaf_point {
            leaf_of_point[p.0] = node.id;
        }
    }
    debug_assert!(leaf_of_point.iter().all(|&l| l != usize::MAX));

    Ok(HstTree {
        nodes,
        levels,
        seed,
        scale: normalization_scale(space),
        diameter,
        leaf_of_point,
        root_dist,
        demand_annotated: false,
    })
}

impl HstTree {
    /// Assemble a tree from explicit nodes. Node 0 must be the root and
    /// every parent must precede its children. Edge weights are taken from
    /// the nodes as given.
    pub fn from_nodes(nodes: Vec<HstNode>, levels: u32) -> Result<Self> {
        if nodes.is_empty() || nodes[0].parent.is_some() {
            return Err(Error::invalid("node 0 must be a root"));
        }
        let mut n_points = 0;
        for (i, node) in nodes.iter().enumerate() {
            if node.id != i {
                return Err(Error::invalid(format!("node at index {i} has id {}", node.id)));
            }
            if let Some(p) = node.parent {
                if p >= i || !nodes[p].children.contains(&i) {
                    return Err(Error::invalid(format!("node {i} has inconsistent parent {p}")));
                }
            }
            if node.is_leaf() {
                let p = node
                    .leaf_point
                    .ok_or_else(|| Error::invalid(format!("leaf {i} holds no point")))?;
                n_points = n_points.max(p.0 + 1);
            }
        }
        let mut leaf_of_point = vec![usize::MAX; n_points];
        let mut root_dist = vec![0.0; nodes.len()];
        for node in &nodes {
            if let Some(parent) = node.parent {
                root_dist[node.id] = root_dist[parent] + node.edge_weight;
            }
            if let (true, Some(p)) = (node.is_leaf(), node.leaf_point) {
                if leaf_of_point[p.0] != usize::MAX {
                    return Err(Error::invalid(format!("point {p} appears in two leaves")));
                }
                leaf_of_point[p.0] = node.id;
            }
        }
        if leaf_of_point.contains(&usize::MAX) {
            return Err(Error::invalid("point ids in leaves are not contiguous"));
        }
        Ok(HstTree {
            nodes,
            levels,
            seed: 0,
            scale: 1.0,
            diameter: 2f64.powi(levels as i32),
            leaf_of_point,
            root_dist,
            demand_annotated: false,
        })
    }

    pub fn root(&self) -> NodeId {
        0
    }

    pub fn nodes(&self) -> &[HstNode] {
        &self.nodes
    }

    pub fn node(&self, id: NodeId) -> &HstNode {
        &self.nodes[id]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Depth parameter `L`.
    pub fn levels(&self) -> u32 {
        self.levels
    }

    pub fn seed(&self) -> RngSeed {
        self.seed
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn normalized_diameter(&self) -> f64 {
        self.diameter * self.scale
    }

    pub fn num_points(&self) -> usize {
        self.leaf_of_point.len()
    }

    pub fn num_leaves(&self) -> usize {
        self.leaf_of_point.len()
    }

    pub fn leaf_of(&self, p: PointId) -> Result<NodeId> {
        self.leaf_of_point
            .get(p.0)
            .copied()
            .ok_or(Error::OutOfRange { id: p.0, n: self.leaf_of_point.len() })
    }

    pub fn has_demand(&self) -> bool {
        self.demand_annotated
    }

    /// Whether `ancestor` lies on the path from `node` to the root (a node
    /// is its own ancestor).
    pub fn is_ancestor(&self, ancestor: NodeId, node: NodeId) -> bool {
        let target = self.nodes[ancestor].level;
        let mut cur = node;
        loop {
            if cur == ancestor {
                return true;
            }
            match self.nodes[cur].parent {
                Some(p) if self.nodes[p].level <= target => cur = p,
                _ => return false,
            }
        }
    }

    pub fn ancestors(&self, node: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        std::iter::successors(self.nodes[node].parent, move |&p| self.nodes[p].parent)
    }

    pub fn lca(&self, mut a: NodeId, mut b: NodeId) -> NodeId {
        while a != b {
            let (la, lb) = (self.nodes[a].level, self.nodes[b].level);
            if la <= lb {
                a = self.nodes[a].parent.expect("non-root node has a parent");
            }
            if lb <= la && a != b {
                b = self.nodes[b].parent.expect("non-root node has a parent");
            }
        }
        a
    }

    /// Tree distance between two leaf points, in normalized units.
    ///
    /// For ordinary leaves whose lowest common ancestor is at level `h` this
    /// equals `2 (2^h - 1)`.
    pub fn tree_distance(&self, u: PointId, v: PointId) -> Result<f64> {
        let a = self.leaf_of(u)?;
        let b = self.leaf_of(v)?;
        Ok(self.node_distance(a, b))
    }

    /// Unchecked tree distance by raw point index.
    #[inline]
    pub fn tree_dist(&self, u: usize, v: usize) -> f64 {
        self.node_distance(self.leaf_of_point[u], self.leaf_of_point[v])
    }

    fn node_distance(&self, a: NodeId, b: NodeId) -> f64 {
        if a == b {
            return 0.0;
        }
        let l = self.lca(a, b);
        self.root_dist[a] + self.root_dist[b] - 2.0 * self.root_dist[l]
    }

    /// Points stored in the leaves of the subtree rooted at `node`.
    pub fn subtree_points(&self, node: NodeId) -> Vec<PointId> {
        let mut out = Vec::new();
        let mut stack = vec![node];
        while let Some(v) = stack.pop() {
            let nd = &self.nodes[v];
            if nd.is_leaf() {
                out.extend(nd.leaf_point);
            } else {
                stack.extend(nd.children.iter().rev());
            }
        }
        out
    }

    /// A copy of the tree with demand counts set on every node.
    pub fn annotate_demand(&self, demand: &DemandSet) -> Result<HstTree> {
        let mut out = self.clone();
        for node in &mut out.nodes {
            node.n_demand = 0;
        }
        for &p in demand.members() {
            let mut cur = Some(self.leaf_of(p)?);
            while let Some(v) = cur {
                out.nodes[v].n_demand += 1;
                cur = out.nodes[v].parent;
            }
        }
        out.demand_annotated = true;
        Ok(out)
    }

    pub fn universe_counts(&self) -> Vec<f64> {
        self.nodes.iter().map(|n| n.n_universe as f64).collect()
    }

    pub fn demand_counts(&self) -> Vec<f64> {
        self.nodes.iter().map(|n| n.n_demand as f64).collect()
    }

    /// Structural checks: leaf completeness, count consistency, and the
    /// per-level diameter bound against the source space.
    pub fn validate(&self, space: &MetricSpace) -> std::result::Result<(), String> {
        if space.len() != self.num_points() {
            return Err(format!(
                "tree holds {} points, space has {}",
                self.num_points(),
                space.len()
            ));
        }
        let mut seen = vec![false; space.len()];
        for node in &self.nodes {
            if node.is_leaf() {
                let p = node.leaf_point.ok_or_else(|| format!("leaf {} has no point", node.id))?;
                if std::mem::replace(&mut seen[p.0], true) {
                    return Err(format!("point {p} appears in more than one leaf"));
                }
                if node.n_universe != 1 {
                    return Err(format!("leaf {} has n_universe {}", node.id, node.n_universe));
                }
            } else {
                let u: usize = node.children.iter().map(|&c| self.nodes[c].n_universe).sum();
                let d: usize = node.children.iter().map(|&c| self.nodes[c].n_demand).sum();
                if u != node.n_universe {
                    return Err(format!("node {} n_universe {} != children sum {u}", node.id, node.n_universe));
                }
                if d != node.n_demand {
                    return Err(format!("node {} n_demand {} != children sum {d}", node.id, node.n_demand));
                }
                for &c in &node.children {
                    if self.nodes[c].level >= node.level {
                        return Err(format!("child {c} is not below node {}", node.id));
                    }
                }
            }
        }
        if let Some(p) = seen.iter().position(|s| !s) {
            return Err(format!("point {p} is missing from the leaves"));
        }
        if self.nodes[0].n_universe != space.len() {
            return Err("root n_universe differs from the number of points".into());
        }

        let top = self.levels as Level;
        for node in &self.nodes {
            if node.is_leaf() {
                continue;
            }
            let bound = self.diameter / 2f64.powi(top - node.level);
            let tol = 1e-9 * bound.max(f64::MIN_POSITIVE);
            let pts = self.subtree_points(node.id);
            for (i, &a) in pts.iter().enumerate() {
                for &b in &pts[i + 1..] {
                    let d = space.dist(a.0, b.0);
                    if d > bound + tol {
                        return Err(format!(
                            "node {} at level {}: points {a} and {b} are {d} apart, bound {bound}",
                            node.id, node.level
                        ));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn to_dump(&self) -> TreeDump {
        TreeDump {
            levels: self.levels,
            seed: self.seed,
            scale: self.scale,
            root: self.root(),
            nodes: self
                .nodes
                .iter()
                .map(|n| NodeDump {
                    id: n.id,
                    level: n.level,
                    center: n.center,
                    parent: n.parent,
                    n_universe: n.n_universe,
                    n_demand: n.n_demand,
                    leaf_point: n.leaf_point,
                })
                .collect(),
        }
    }
}

/// JSON-serializable view of a tree.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreeDump {
    pub levels: u32,
    pub seed: RngSeed,
    pub scale: f64,
    pub root: NodeId,
    pub nodes: Vec<NodeDump>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeDump {
    pub id: NodeId,
    pub level: Level,
    pub center: PointId,
    pub parent: Option<NodeId>,
    pub n_universe: usize,
    pub n_demand: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub leaf_point: Option<PointId>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DistortionReport {
    pub pairs: usize,
    pub mean_ratio: f64,
    pub max_ratio: f64,
}

/// Ratio statistics of tree distance over normalized metric distance on
/// sampled distinct pairs. Pairs at distance zero are skipped. When
/// `sample_pairs` covers every pair, all pairs are used.
pub fn measure_distortion(
    tree: &HstTree,
    space: &MetricSpace,
    sample_pairs: usize,
    seed: RngSeed,
) -> Result<DistortionReport> {
    let n = space.len();
    if n < 2 {
        return Err(Error::invalid("distortion needs at least two points"));
    }
    let total = n * (n - 1) / 2;
    let pairs: Vec<(usize, usize)> = if sample_pairs >= total {
        (0..n).flat_map(|u| ((u + 1)..n).map(move |v| (u, v))).collect()
    } else {
        let mut rng = rng::stream(seed);
        let mut chosen = HashSet::with_capacity(sample_pairs);
        let mut out = Vec::with_capacity(sample_pairs);
        while out.len() < sample_pairs {
            let u = rng.random_range(0..n);
            let v = rng.random_range(0..n);
            if u == v {
                continue;
            }
            let key = (u.min(v), u.max(v));
            if chosen.insert(key) {
                out.push(key);
            }
        }
        out
    };

    let scale = tree.scale();
    let mut count = 0;
    let mut sum = 0.0;
    let mut max = 0.0f64;
    for (u, v) in pairs {
        let d = space.dist(u, v) * scale;
        if d <= 0.0 {
            continue;
        }
        let ratio = tree.tree_dist(u, v) / d;
        sum += ratio;
        max = max.max(ratio);
        count += 1;
    }
    Ok(DistortionReport {
        pairs: count,
        mean_ratio: if count > 0 { sum / count as f64 } else { 0.0 },
        max_ratio: max,
    })
}
