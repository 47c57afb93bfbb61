//! Differentially private initialization and local search.
//!
//! The universe `U` (the metric space) is public; only membership of the
//! demand set `D` is protected.

mod budget;
mod mechanism;

pub use budget::{LedgerEntry, PrivacyBudget};
pub use mechanism::{exponential_mechanism, laplace_noise, NoiseMode, NoiseRng};

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hst::{build_hst, Depth, HstTree, Level};
use crate::local_search::{cost, CostTrace, Objective, SwapTable};
use crate::metric::{DemandSet, MetricSpace};
use crate::rng::{derive_seed, RngSeed};
use crate::seeding::{self, find_leaf_by, subtree_search_scored, CenterSet, InitOrigin, SubtreeRootSet};

const TREE_STREAM: u64 = 0x7472_6565;
const NOISE_STREAM: u64 = 0x6e6f_6973;
const INIT_STREAM: u64 = 0x696e_6974;
const SWAP_STREAM: u64 = 0x7377_6170;

/// Laplace scale for a node at `level`: `2^((L - h) / divisor) / ε`.
pub fn count_noise_scale(levels: u32, level: Level, epsilon: f64, divisor: f64) -> f64 {
    2f64.powf((levels as i32 - level) as f64 / divisor) / epsilon
}

/// Options for private HST initialization.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DpHstConfig {
    pub k: usize,
    pub epsilon: f64,
    pub depth: Depth,
    pub seed: RngSeed,
    /// Divisor of the exponent in the per-level Laplace scale. 1 by default.
    pub exponent_divisor: f64,
    /// Draw noise from the OS entropy source instead of the seed.
    pub secure: bool,
}

impl DpHstConfig {
    pub fn new(k: usize, epsilon: f64, depth: Depth, seed: RngSeed) -> Self {
        DpHstConfig { k, epsilon, depth, seed, exponent_divisor: 1.0, secure: false }
    }

    fn noise_mode(&self) -> NoiseMode {
        if self.secure {
            NoiseMode::Secure
        } else {
            NoiseMode::Seeded(derive_seed(self.seed, NOISE_STREAM))
        }
    }
}

#[derive(Clone, Debug)]
pub struct DpHstOutput {
    pub centers: CenterSet,
    pub budget: PrivacyBudget,
    pub tree: HstTree,
    pub noisy_counts: Vec<f64>,
    pub roots: SubtreeRootSet,
}

/// Perturbed demand counts, one per node.
///
/// Every node except the root receives `Laplace(2^((L-h)/divisor)/ε)` noise
/// from a stream keyed by its node id. The root always covers all of `D`
/// and is never compared against other counts, so its true count is kept.
pub fn noisy_demand_counts(tree: &HstTree, epsilon: f64, divisor: f64, mode: NoiseMode) -> Result<Vec<f64>> {
    tree.nodes()
        .iter()
        .map(|node| {
            let n = node.n_demand as f64;
            if node.parent.is_none() {
                return Ok(n);
            }
            let b = count_noise_scale(tree.levels(), node.level, epsilon, divisor);
            Ok(n + laplace_noise(b, &mut mode.stream(node.id as u64))?)
        })
        .collect()
}

/// Private HST initialization.
///
/// The tree is built over the public universe at no privacy cost. Demand
/// counts are perturbed per node, and subtree search plus leaf descent run
/// on the noisy counts. Noisy counts are used as-is, negative values
/// included. The root is always ranked first: with `k ≥ 2` it is discarded
/// by the ancestor rule whatever its score, and with `k = 1` it is the
/// answer, so neither outcome depends on `D`.
pub fn dp_hst_init(space: &MetricSpace, demand: &DemandSet, cfg: &DpHstConfig) -> Result<DpHstOutput> {
    if cfg.k == 0 || cfg.k > space.len() {
        return Err(Error::invalid(format!("k = {} must be in [1, {}]", cfg.k, space.len())));
    }
    if !(cfg.exponent_divisor > 0.0) {
        return Err(Error::invalid("exponent divisor must be positive"));
    }
    let mut budget = PrivacyBudget::new(cfg.epsilon)?;
    let tree = build_hst(space, cfg.depth, derive_seed(cfg.seed, TREE_STREAM))?.annotate_demand(demand)?;
    let levels = tree.levels();
    let noisy = noisy_demand_counts(&tree, cfg.epsilon, cfg.exponent_divisor, cfg.noise_mode())?;

    // Subtrees at one level are disjoint, so each level costs one Laplace
    // release of sensitivity 1.
    let lowest = tree.nodes().iter().map(|n| n.level).min().unwrap_or(0).min(0);
    for h in (lowest..levels as Level).rev() {
        let spend = 1.0 / count_noise_scale(levels, h, cfg.epsilon, cfg.exponent_divisor);
        budget.spend(format!("dp_hst_init/level {h}"), spend)?;
    }

    let mut scores: Vec<f64> = tree
        .nodes()
        .iter()
        .zip(&noisy)
        .map(|(n, &c)| c * 2f64.powi(n.level))
        .collect();
    scores[tree.root()] = f64::INFINITY;
    let roots = subtree_search_scored(&tree, cfg.k, &scores)?;
    let centers = find_leaf_by(&tree, &roots, &noisy, InitOrigin::DpHst)?;
    Ok(DpHstOutput { centers, budget, tree, noisy_counts: noisy, roots })
}

/// How private local search obtains its starting centers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DpInit {
    /// Private HST initialization on half of the budget.
    Hst,
    /// Uniform over the public universe (no privacy cost).
    Random,
    /// k-median++ over the public universe (no privacy cost).
    Kmedianpp,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DpRunConfig {
    pub k: usize,
    pub epsilon: f64,
    /// Number of exponential-mechanism swaps `T`.
    pub iterations: usize,
    pub depth: Depth,
    pub seed: RngSeed,
    pub objective: Objective,
    /// Diameter used as the cost sensitivity; the space diameter when `None`.
    pub diameter: Option<f64>,
    pub exponent_divisor: f64,
    pub secure: bool,
}

impl DpRunConfig {
    pub fn new(k: usize, epsilon: f64, iterations: usize, seed: RngSeed) -> Self {
        DpRunConfig {
            k,
            epsilon,
            iterations,
            depth: Depth::Fixed(8),
            seed,
            objective: Objective::Median,
            diameter: None,
            exponent_divisor: 1.0,
            secure: false,
        }
    }

    /// Sensitivity of the cost of one demand point.
    pub fn sensitivity(&self, space: &MetricSpace) -> f64 {
        self.objective.apply(self.diameter.unwrap_or_else(|| space.diameter()))
    }

    /// `ε' = ε / (4 Δ (T + 1))`.
    pub fn eps_prime(&self, space: &MetricSpace) -> f64 {
        self.epsilon / (4.0 * self.sensitivity(space) * (self.iterations as f64 + 1.0))
    }

    fn noise_mode(&self, key: u64) -> NoiseMode {
        if self.secure {
            NoiseMode::Secure
        } else {
            NoiseMode::Seeded(derive_seed(self.seed, key))
        }
    }
}

#[derive(Clone, Debug)]
pub struct DpLocalSearchOutput {
    /// The released centers `F_j`.
    pub centers: CenterSet,
    /// Costs of `F_1 .. F_{T+1}` and the swaps between them.
    pub trace: CostTrace,
    /// Index into the trace of the released iterate (0-based).
    pub output_index: usize,
    pub budget: PrivacyBudget,
    /// Detailed spends of the private initialization, when used.
    pub init_budget: Option<PrivacyBudget>,
    /// Wall time spent choosing the starting centers.
    pub init_elapsed: Duration,
}

impl DpLocalSearchOutput {
    pub fn initial_cost(&self) -> f64 {
        self.trace.per_iteration_costs[0]
    }

    pub fn released_cost(&self) -> f64 {
        self.trace.per_iteration_costs[self.output_index]
    }

    /// Lowest cost among all iterates.
    pub fn best_cost(&self) -> f64 {
        self.trace.per_iteration_costs.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Costs after each of the `T` swaps.
    pub fn swap_costs(&self) -> &[f64] {
        &self.trace.per_iteration_costs[1..]
    }
}

/// Private local search: `T` exponential-mechanism swaps with utility
/// `-cost`, then an exponential-mechanism choice among the `T + 1` iterates.
///
/// Each step spends `2 Δ ε' = ε / (2(T+1))`. With [`DpInit::Hst`] the
/// initialization is charged `ε/2`, so the ledger totals `ε`.
pub fn dp_local_search(
    space: &MetricSpace,
    demand: &DemandSet,
    init: DpInit,
    cfg: &DpRunConfig,
) -> Result<DpLocalSearchOutput> {
    if cfg.iterations == 0 {
        return Err(Error::invalid("T must be at least 1"));
    }
    if cfg.k == 0 || cfg.k >= space.len() {
        return Err(Error::invalid(format!(
            "k = {} must be in [1, {}) so that swaps exist",
            cfg.k,
            space.len()
        )));
    }
    let mut budget = PrivacyBudget::new(cfg.epsilon)?;
    let init_seed = derive_seed(cfg.seed, INIT_STREAM);
    let started = Instant::now();
    let (start, init_budget) = match init {
        DpInit::Hst => {
            let hst_cfg = DpHstConfig {
                k: cfg.k,
                epsilon: cfg.epsilon / 2.0,
                depth: cfg.depth,
                seed: init_seed,
                exponent_divisor: cfg.exponent_divisor,
                secure: cfg.secure,
            };
            let out = dp_hst_init(space, demand, &hst_cfg)?;
            budget.spend("dp_hst_init", cfg.epsilon / 2.0)?;
            (out.centers, Some(out.budget))
        }
        DpInit::Random => (seeding::random_init(space, cfg.k, init_seed)?, None),
        DpInit::Kmedianpp => (seeding::kmedianpp_init(space, cfg.k, init_seed, cfg.objective == Objective::Means)?, None),
    };
    let init_elapsed = started.elapsed();

    let eps_prime = cfg.eps_prime(space);
    let step_spend = 2.0 * cfg.sensitivity(space) * eps_prime;
    let mut rng = cfg.noise_mode(SWAP_STREAM).stream(0);

    let mut current = start;
    let mut iterates = vec![current.clone()];
    let mut costs = vec![cost(space, current.centers(), demand, cfg.objective)];
    let mut swaps = Vec::with_capacity(cfg.iterations);
    let mut utilities = Vec::new();
    for i in 1..=cfg.iterations {
        let table = SwapTable::build(space, demand, current.centers(), cfg.objective);
        utilities.clear();
        utilities.extend(table.costs.iter().map(|c| -c));
        let pick = exponential_mechanism(&utilities, eps_prime, &mut rng)?;
        let (x, y) = table.swap_at(pick);
        current.swap(x, y);
        budget.spend(format!("dp_local_search/swap {i}"), step_spend)?;
        costs.push(cost(space, current.centers(), demand, cfg.objective));
        swaps.push((x, y));
        iterates.push(current.clone());
    }
    let utilities: Vec<f64> = costs.iter().map(|c| -c).collect();
    let output_index = exponential_mechanism(&utilities, eps_prime, &mut rng)?;
    budget.spend("dp_local_search/output", step_spend)?;

    let centers = iterates.swap_remove(output_index);
    Ok(DpLocalSearchOutput {
        trace: CostTrace {
            per_iteration_costs: costs,
            swaps,
            final_centers: centers.clone(),
            iterations: cfg.iterations,
        },
        centers,
        output_index,
        budget,
        init_budget,
        init_elapsed,
    })
}
