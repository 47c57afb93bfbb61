//! k-median / k-means cost and single-swap local search.

use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::{DemandSet, MetricSpace, PointId};
use crate::seeding::CenterSet;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Objective {
    /// Sum of distances to the nearest center.
    #[default]
    Median,
    /// Sum of squared distances to the nearest center.
    Means,
}

impl Objective {
    #[inline]
    pub fn apply(self, d: f64) -> f64 {
        match self {
            Objective::Median => d,
            Objective::Means => d * d,
        }
    }
}

impl FromStr for Objective {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "median" => Ok(Objective::Median),
            "means" => Ok(Objective::Means),
            other => Err(Error::invalid(format!("unknown objective `{other}` (expected median or means)"))),
        }
    }
}

/// Clustering cost of `centers` on `demand`.
pub fn cost(space: &MetricSpace, centers: &[PointId], demand: &DemandSet, objective: Objective) -> f64 {
    cost_by(centers, demand.members(), objective, |a, b| space.dist(a, b))
}

/// Clustering cost under an arbitrary distance function.
pub fn cost_by<D>(centers: &[PointId], points: &[PointId], objective: Objective, dist: D) -> f64
where
    D: Fn(usize, usize) -> f64,
{
    points
        .iter()
        .map(|p| {
            let d = centers
                .iter()
                .map(|c| dist(p.0, c.0))
                .fold(f64::INFINITY, f64::min);
            objective.apply(d)
        })
        .sum()
}

/// Per-demand nearest and second-nearest center costs.
struct Assignment {
    nearest: Vec<f64>,
    nearest_slot: Vec<usize>,
    second: Vec<f64>,
}

impl Assignment {
    fn new(space: &MetricSpace, demand: &[PointId], centers: &[PointId], objective: Objective) -> Self {
        let mut nearest = Vec::with_capacity(demand.len());
        let mut nearest_slot = Vec::with_capacity(demand.len());
        let mut second = Vec::with_capacity(demand.len());
        for p in demand {
            let (mut b1, mut s1, mut b2) = (f64::INFINITY, usize::MAX, f64::INFINITY);
            for (slot, c) in centers.iter().enumerate() {
                let w = objective.apply(space.dist(p.0, c.0));
                if w < b1 {
                    b2 = b1;
                    b1 = w;
                    s1 = slot;
                } else if w < b2 {
                    b2 = w;
                }
            }
            nearest.push(b1);
            nearest_slot.push(s1);
            second.push(b2);
        }
        Assignment { nearest, nearest_slot, second }
    }
}

/// Cost of every single swap `F - {x} + {y}` for `y` outside `F`.
///
/// Costs are evaluated in O(|D| + k) per incoming point using nearest and
/// second-nearest center distances.
#[derive(Clone, Debug)]
pub struct SwapTable {
    /// Outgoing centers, ascending by point id.
    pub outgoing: Vec<PointId>,
    /// Incoming candidates, ascending by point id.
    pub incoming: Vec<PointId>,
    /// Row-major `outgoing × incoming` costs.
    pub costs: Vec<f64>,
}

impl SwapTable {
    pub fn build(space: &MetricSpace, demand: &DemandSet, centers: &[PointId], objective: Objective) -> Self {
        let mut outgoing: Vec<PointId> = centers.to_vec();
        outgoing.sort_unstable();
        let assign = Assignment::new(space, demand.members(), &outgoing, objective);
        let mut is_center = vec![false; space.len()];
        for c in centers {
            is_center[c.0] = true;
        }
        let incoming: Vec<PointId> = space.points().filter(|p| !is_center[p.0]).collect();
        let k = outgoing.len();
        let m = incoming.len();
        let mut costs = vec![0.0; k * m];
        let mut delta = vec![0.0; k];
        for (j, y) in incoming.iter().enumerate() {
            delta.iter_mut().for_each(|d| *d = 0.0);
            let mut base = 0.0;
            for (i, p) in demand.members().iter().enumerate() {
                let wy = objective.apply(space.dist(p.0, y.0));
                let near = assign.nearest[i];
                let kept = wy.min(near);
                base += kept;
                let slot = assign.nearest_slot[i];
                delta[slot] += wy.min(assign.second[i]) - kept;
            }
            for x in 0..k {
                costs[x * m + j] = base + delta[x];
            }
        }
        SwapTable { outgoing, incoming, costs }
    }

    pub fn len(&self) -> usize {
        self.costs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.costs.is_empty()
    }

    /// The swap at flat index `idx`.
    pub fn swap_at(&self, idx: usize) -> (PointId, PointId) {
        let m = self.incoming.len();
        (self.outgoing[idx / m], self.incoming[idx % m])
    }

    /// Lowest-cost swap; ties go to the lexicographically smallest
    /// `(x, y)` pair.
    pub fn best(&self) -> Option<(PointId, PointId, f64)> {
        let mut best: Option<(usize, f64)> = None;
        for (idx, &c) in self.costs.iter().enumerate() {
            match best {
                Some((_, b)) if c >= b => {}
                _ => best = Some((idx, c)),
            }
        }
        best.map(|(idx, c)| {
            let (x, y) = self.swap_at(idx);
            (x, y, c)
        })
    }
}

/// Best single swap for the current centers, without any improvement
/// threshold.
pub fn best_swap(
    space: &MetricSpace,
    demand: &DemandSet,
    centers: &[PointId],
    objective: Objective,
) -> Option<(PointId, PointId, f64)> {
    SwapTable::build(space, demand, centers, objective).best()
}

/// Record of one local-search run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CostTrace {
    /// Cost before the first swap followed by the cost after each swap.
    pub per_iteration_costs: Vec<f64>,
    /// Accepted swaps as `(out, in)`.
    pub swaps: Vec<(PointId, PointId)>,
    #[serde(rename = "final")]
    pub final_centers: CenterSet,
    pub iterations: usize,
}

impl CostTrace {
    pub fn initial_cost(&self) -> f64 {
        self.per_iteration_costs[0]
    }

    pub fn final_cost(&self) -> f64 {
        *self.per_iteration_costs.last().expect("trace holds the initial cost")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalSearchConfig {
    pub alpha: f64,
    pub max_iter: usize,
    pub objective: Objective,
}

impl Default for LocalSearchConfig {
    fn default() -> Self {
        LocalSearchConfig { alpha: 1e-3, max_iter: 20, objective: Objective::Median }
    }
}

/// Single-swap local search.
///
/// Each iteration takes the lowest-cost swap over all `x ∈ F`, `y ∉ F`, and
/// accepts it only if it brings the cost to at most `(1 - α/k)` of the
/// current cost (and strictly below it, which matters at cost 0). Stops
/// when no swap qualifies or after `max_iter` swaps.
pub fn local_search(
    space: &MetricSpace,
    demand: &DemandSet,
    init: &CenterSet,
    config: LocalSearchConfig,
) -> Result<CostTrace> {
    if !(config.alpha > 0.0) {
        return Err(Error::invalid(format!("alpha must be positive, got {}", config.alpha)));
    }
    let k = init.k();
    for &c in init.centers() {
        space.check(c)?;
    }
    let mut centers = init.clone();
    let mut current = cost(space, centers.centers(), demand, config.objective);
    let mut costs = vec![current];
    let mut swaps = Vec::new();
    let factor = 1.0 - config.alpha / k as f64;
    while swaps.len() < config.max_iter {
        let Some((x, y, candidate)) = best_swap(space, demand, centers.centers(), config.objective) else {
            break;
        };
        if candidate > factor * current || candidate >= current {
            break;
        }
        centers.swap(x, y);
        current = cost(space, centers.centers(), demand, config.objective);
        costs.push(current);
        swaps.push((x, y));
    }
    Ok(CostTrace { iterations: swaps.len(), per_iteration_costs: costs, swaps, final_centers: centers })
}
