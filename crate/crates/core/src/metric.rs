//! Finite metric spaces over point identifiers.
//!
//! A [`MetricSpace`] is backed either by vector data with an L1/L2 norm
//! (distances computed on demand from rows) or by a weighted graph whose
//! all-pairs shortest-path table is computed once at construction.
//!
//! Diameter and minimum nonzero distance are computed exactly by a full
//! pairwise scan, which costs O(n²d) for vector data. That is fine at the
//! sizes this crate targets (tens of thousands of points at most).

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Index of a point inside a [`MetricSpace`], in `[0, n)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PointId(pub usize);

impl PointId {
    #[inline]
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for PointId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<usize> for PointId {
    fn from(i: usize) -> Self {
        PointId(i)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Norm {
    L1,
    L2,
}

impl Norm {
    /// Distance between two coordinate slices of equal length.
    #[inline]
    pub fn eval(self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            Norm::L1 => a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum(),
            Norm::L2 => a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt(),
        }
    }
}

impl std::str::FromStr for Norm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "l1" => Ok(Norm::L1),
            "l2" => Ok(Norm::L2),
            other => Err(Error::invalid(format!("unknown norm `{other}` (expected l1 or l2)"))),
        }
    }
}

#[derive(Clone, Debug)]
enum Backend {
    Vector { data: Vec<f64>, dim: usize, norm: Norm },
    Graph { table: Vec<f64> },
}

/// An immutable finite metric space.
#[derive(Clone, Debug)]
pub struct MetricSpace {
    n: usize,
    backend: Backend,
    diameter: f64,
    min_dist: f64,
}

impl MetricSpace {
    /// Build a space from `n` rows of `d` coordinates each.
    pub fn from_vectors(points: &[Vec<f64>], norm: Norm) -> Result<Self> {
        let n = points.len();
        if n == 0 {
            return Err(Error::invalid("vector data is empty"));
        }
        let dim = points[0].len();
        if dim == 0 {
            return Err(Error::invalid("vector rows must have at least one coordinate"));
        }
        let mut data = Vec::with_capacity(n * dim);
        for (i, row) in points.iter().enumerate() {
            if row.len() != dim {
                return Err(Error::invalid(format!(
                    "row {i} has {} coordinates, expected {dim}",
                    row.len()
                )));
            }
            if let Some(x) = row.iter().find(|x| !x.is_finite()) {
                return Err(Error::invalid(format!("row {i} contains non-finite value {x}")));
            }
            data.extend_from_slice(row);
        }
        Self::from_flat(data, dim, norm)
    }

    /// Build a space from a row-major `n × dim` buffer.
    pub fn from_flat(data: Vec<f64>, dim: usize, norm: Norm) -> Result<Self> {
        if dim == 0 || data.is_empty() || !data.len().is_multiple_of(dim) {
            return Err(Error::invalid("vector buffer is empty or not a multiple of the dimension"));
        }
        let n = data.len() / dim;
        let mut space = MetricSpace {
            n,
            backend: Backend::Vector { data, dim, norm },
            diameter: 0.0,
            min_dist: 0.0,
        };
        space.compute_extent();
        Ok(space)
    }

    /// Build a shortest-path metric over an undirected weighted graph.
    pub fn from_graph(n: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("graph has no nodes"));
        }
        let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for &(u, v, w) in edges {
            if u >= n || v >= n {
                return Err(Error::OutOfRange { id: u.max(v), n });
            }
            if !(w > 0.0) || !w.is_finite() {
                return Err(Error::invalid(format!(
                    "edge ({u}, {v}) has nonpositive or non-finite weight {w}"
                )));
            }
            adj[u].push((v, w));
            adj[v].push((u, w));
        }
        let mut table = vec![f64::INFINITY; n * n];
        table
            .par_chunks_mut(n)
            .enumerate()
            .for_each(|(src, row)| dijkstra(&adj, src, row));
        for u in 0..n {
            for v in (u + 1)..n {
                if table[u * n + v].is_infinite() {
                    return Err(Error::Disconnected { u: PointId(u), v: PointId(v) });
                }
                // Both directions come from independent Dijkstra runs; pin them
                // to one value so the table is exactly symmetric.
                let d = table[u * n + v].min(table[v * n + u]);
                table[u * n + v] = d;
                table[v * n + u] = d;
            }
        }
        let mut space = MetricSpace { n, backend: Backend::Graph { table }, diameter: 0.0, min_dist: 0.0 };
        space.compute_extent();
        Ok(space)
    }

    /// Build directly from a symmetric distance table (row-major `n × n`).
    ///
    /// The table is trusted to be a metric; only shape, symmetry and the zero
    /// diagonal are checked.
    pub fn from_distance_table(n: usize, table: Vec<f64>) -> Result<Self> {
        if n == 0 || table.len() != n * n {
            return Err(Error::invalid("distance table must be n × n with n ≥ 1"));
        }
        for u in 0..n {
            if table[u * n + u] != 0.0 {
                return Err(Error::invalid(format!("nonzero self-distance at {u}")));
            }
            for v in (u + 1)..n {
                let d = table[u * n + v];
                if !(d >= 0.0) || !d.is_finite() || d != table[v * n + u] {
                    return Err(Error::invalid(format!("entry ({u}, {v}) is negative or asymmetric")));
                }
            }
        }
        let mut space = MetricSpace { n, backend: Backend::Graph { table }, diameter: 0.0, min_dist: 0.0 };
        space.compute_extent();
        Ok(space)
    }

    fn compute_extent(&mut self) {
        let this = &*self;
        let (diameter, min_dist) = (0..self.n)
            .into_par_iter()
            .map(|u| {
                let mut hi = 0.0f64;
                let mut lo = f64::INFINITY;
                for v in (u + 1)..this.n {
                    let d = this.dist(u, v);
                    hi = hi.max(d);
                    if d > 0.0 && d < lo {
                        lo = d;
                    }
                }
                (hi, lo)
            })
            .reduce(|| (0.0, f64::INFINITY), |a, b| (a.0.max(b.0), a.1.min(b.1)));
        self.diameter = diameter;
        self.min_dist = if min_dist.is_finite() { min_dist } else { 0.0 };
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Largest pairwise distance.
    #[inline]
    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    /// Smallest nonzero pairwise distance; `0.0` when every pair coincides.
    #[inline]
    pub fn min_dist(&self) -> f64 {
        self.min_dist
    }

    /// Dimension of the vector backend, `None` for graph spaces.
    pub fn dim(&self) -> Option<usize> {
        match &self.backend {
            Backend::Vector { dim, .. } => Some(*dim),
            Backend::Graph { .. } => None,
        }
    }

    /// Coordinates of point `i` for vector-backed spaces.
    pub fn coords(&self, i: usize) -> Option<&[f64]> {
        match &self.backend {
            Backend::Vector { data, dim, .. } => Some(&data[i * dim..(i + 1) * dim]),
            Backend::Graph { .. } => None,
        }
    }

    pub fn norm(&self) -> Option<Norm> {
        match &self.backend {
            Backend::Vector { norm, .. } => Some(*norm),
            Backend::Graph { .. } => None,
        }
    }

    pub fn is_graph(&self) -> bool {
        matches!(self.backend, Backend::Graph { .. })
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = PointId> {
        (0..self.n).map(PointId)
    }

    pub fn check(&self, id: PointId) -> Result<()> {
        if id.0 < self.n {
            Ok(())
        } else {
            Err(Error::OutOfRange { id: id.0, n: self.n })
        }
    }

    /// Checked distance between two points.
    pub fn distance(&self, u: PointId, v: PointId) -> Result<f64> {
        self.check(u)?;
        self.check(v)?;
        Ok(self.dist(u.0, v.0))
    }

    /// Unchecked distance by raw index. Panics if an index is out of range.
    #[inline]
    pub fn dist(&self, u: usize, v: usize) -> f64 {
        match &self.backend {
            Backend::Graph { table } => table[u * self.n + v],
            Backend::Vector { data, dim, norm } => {
                if u == v {
                    return 0.0;
                }
                norm.eval(&data[u * dim..(u + 1) * dim], &data[v * dim..(v + 1) * dim])
            }
        }
    }
}

#[derive(Copy, Clone, PartialEq)]
struct HeapEntry {
    dist: f64,
    node: usize,
}

impl Eq for HeapEntry {}

impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| self.node.cmp(&other.node))
    }
}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn dijkstra(adj: &[Vec<(usize, f64)>], src: usize, out: &mut [f64]) {
    out[src] = 0.0;
    let mut heap = BinaryHeap::new();
    heap.push(HeapEntry { dist: 0.0, node: src });
    while let Some(HeapEntry { dist, node }) = heap.pop() {
        if dist > out[node] {
            continue;
        }
        for &(next, w) in &adj[node] {
            let nd = dist + w;
            if nd < out[next] {
                out[next] = nd;
                heap.push(HeapEntry { dist: nd, node: next });
            }
        }
    }
}

/// A nonempty subset of the points of a space whose clustering cost is measured.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DemandSet {
    members: Vec<PointId>,
}

impl DemandSet {
    /// Members are sorted and deduplicated.
    pub fn new(space: &MetricSpace, mut members: Vec<PointId>) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::invalid("demand set is empty"));
        }
        for &m in &members {
            space.check(m)?;
        }
        members.sort_unstable();
        members.dedup();
        Ok(DemandSet { members })
    }

    pub fn all(space: &MetricSpace) -> Self {
        DemandSet { members: space.points().collect() }
    }

    pub fn members(&self) -> &[PointId] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, p: PointId) -> bool {
        self.members.binary_search(&p).is_ok()
    }
}
