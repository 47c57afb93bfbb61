//! Experiment sweeps over methods, `k` values and repetitions.

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::demand::{sample_demand, two_largest_clusters, DemandMode};
use super::graph_gen::{gen_cluster_graph, GraphGenConfig};
use super::metrics::iteration_cost;
use super::vector_gen::{gen_gaussian_mixture, GaussianMixtureConfig};
use crate::dp::{dp_local_search, DpInit, DpRunConfig};
use crate::error::{Error, Result};
use crate::hst::Depth;
use crate::io::{read_graph, read_vectors};
use crate::local_search::{local_search, LocalSearchConfig, Objective};
use crate::metric::{DemandSet, MetricSpace, Norm};
use crate::rng::{derive_seed_path, RngSeed};
use crate::seeding::{hst_init_demand, kmedianpp_init_from, random_init_from, CenterSet};

const DATA_STREAM: u64 = 1;
const DEMAND_STREAM: u64 = 2;
const CELL_STREAM: u64 = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "NDP-rand")]
    NdpRand,
    #[serde(rename = "NDP-kmedianpp")]
    NdpKmedianpp,
    #[serde(rename = "NDP-HST")]
    NdpHst,
    #[serde(rename = "DP-rand")]
    DpRand,
    #[serde(rename = "DP-kmedianpp")]
    DpKmedianpp,
    #[serde(rename = "DP-HST")]
    DpHst,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::NdpRand,
        Method::NdpKmedianpp,
        Method::NdpHst,
        Method::DpRand,
        Method::DpKmedianpp,
        Method::DpHst,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::NdpRand => "NDP-rand",
            Method::NdpKmedianpp => "NDP-kmedianpp",
            Method::NdpHst => "NDP-HST",
            Method::DpRand => "DP-rand",
            Method::DpKmedianpp => "DP-kmedianpp",
            Method::DpHst => "DP-HST",
        }
    }

    pub fn is_private(self) -> bool {
        matches!(self, Method::DpRand | Method::DpKmedianpp | Method::DpHst)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown method `{s}`")))
    }
}

/// Where the universe comes from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum DatasetSpec {
    /// A fresh clustered graph per repetition. The generator seed is mixed
    /// with the experiment seed and the repetition index.
    GraphGen(GraphGenConfig),
    /// Gaussian blobs, redrawn per repetition like `GraphGen`.
    GaussianMixture(GaussianMixtureConfig),
    VectorCsv {
        path: PathBuf,
        #[serde(default = "default_norm")]
        norm: Norm,
    },
    GraphFile { path: PathBuf },
}

fn default_norm() -> Norm {
    Norm::L2
}

fn default_k() -> Vec<usize> {
    vec![2, 5, 10, 15, 20]
}
fn default_epsilon() -> f64 {
    1.0
}
fn default_iterations() -> usize {
    20
}
fn default_repetitions() -> usize {
    10
}
fn default_alpha() -> f64 {
    1e-3
}
fn default_max_iter() -> usize {
    20
}
fn default_ndp_depth() -> Depth {
    Depth::Fixed(6)
}
fn default_dp_depth() -> Depth {
    Depth::Fixed(8)
}
fn default_window() -> usize {
    5
}
fn default_divisor() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dataset: DatasetSpec,
    /// Demand size; 500 capped at the sampling pool when omitted.
    #[serde(default)]
    pub demand_size: Option<usize>,
    #[serde(default = "default_demand_mode")]
    pub demand_mode: DemandMode,
    /// Cluster pair for imbalanced demand; the two largest when omitted.
    #[serde(default)]
    pub imbalanced_clusters: Option<(usize, usize)>,
    pub methods: Vec<Method>,
    #[serde(default = "default_k")]
    pub k: Vec<usize>,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    /// Private local-search steps `T`.
    #[serde(default = "default_iterations")]
    pub iterations: usize,
    #[serde(default = "default_repetitions")]
    pub repetitions: usize,
    #[serde(default)]
    pub objective: Objective,
    #[serde(default)]
    pub seed: RngSeed,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default = "default_ndp_depth")]
    pub ndp_depth: Depth,
    #[serde(default = "default_dp_depth")]
    pub dp_depth: Depth,
    /// Moving-average window of the iteration-cost metric.
    #[serde(default = "default_window")]
    pub window: usize,
    #[serde(default = "default_divisor")]
    pub exponent_divisor: f64,
}

fn default_demand_mode() -> DemandMode {
    DemandMode::Balanced
}

impl ExperimentConfig {
    /// Defaults for everything except the dataset and methods.
    pub fn new(dataset: DatasetSpec, methods: Vec<Method>) -> Self {
        ExperimentConfig {
            dataset,
            demand_size: None,
            demand_mode: DemandMode::Balanced,
            imbalanced_clusters: None,
            methods,
            k: default_k(),
            epsilon: 1.0,
            iterations: 20,
            repetitions: 10,
            objective: Objective::Median,
            seed: 0,
            alpha: 1e-3,
            max_iter: 20,
            ndp_depth: default_ndp_depth(),
            dp_depth: default_dp_depth(),
            window: 5,
            exponent_divisor: 1.0,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// Checks that do not need the data.
    pub fn validate(&self) -> Result<()> {
        if self.methods.is_empty() {
            return Err(Error::invalid("methods: at least one method is required"));
        }
        if self.k.is_empty() || self.k.contains(&0) {
            return Err(Error::invalid("k: need a nonempty list of positive values"));
        }
        if self.repetitions == 0 {
            return Err(Error::invalid("repetitions: must be at least 1"));
        }
        if self.methods.iter().any(|m| m.is_private()) {
            if !(self.epsilon > 0.0) {
                return Err(Error::invalid(format!("epsilon: must be positive, got {}", self.epsilon)));
            }
            if self.iterations < self.window.max(1) {
                return Err(Error::invalid(format!(
                    "iterations: T = {} is shorter than the window {}",
                    self.iterations, self.window
                )));
            }
        }
        if self.window == 0 {
            return Err(Error::invalid("window: must be at least 1"));
        }
        if !(self.alpha > 0.0) {
            return Err(Error::invalid("alpha: must be positive"));
        }
        if self.demand_size == Some(0) {
            return Err(Error::invalid("demand_size: must be at least 1"));
        }
        Ok(())
    }
}

/// One universe with optional cluster labels.
#[derive(Clone, Debug)]
pub struct Dataset {
    pub space: MetricSpace,
    pub labels: Option<Vec<usize>>,
}

/// Materialize the dataset used by repetition `rep`.
pub fn load_dataset(spec: &DatasetSpec, seed: RngSeed, rep: usize) -> Result<Dataset> {
    match spec {
        DatasetSpec::GraphGen(gen) => {
            let cfg = GraphGenConfig {
                seed: derive_seed_path(seed, &[DATA_STREAM, gen.seed, rep as u64]),
                ..gen.clone()
            };
            let g = gen_cluster_graph(&cfg)?;
            Ok(Dataset { space: g.graph.to_metric()?, labels: Some(g.labels) })
        }
        DatasetSpec::GaussianMixture(gen) => {
            let cfg = GaussianMixtureConfig {
                seed: derive_seed_path(seed, &[DATA_STREAM, gen.seed, rep as u64]),
                ..gen.clone()
            };
            let (rows, labels) = gen_gaussian_mixture(&cfg)?;
            Ok(Dataset { space: MetricSpace::from_vectors(&rows, Norm::L2)?, labels: Some(labels) })
        }
        DatasetSpec::VectorCsv { path, norm } => {
            Ok(Dataset { space: MetricSpace::from_vectors(&read_vectors(path)?, *norm)?, labels: None })
        }
        DatasetSpec::GraphFile { path } => Ok(Dataset { space: read_graph(path)?.to_metric()?, labels: None }),
    }
}

impl DatasetSpec {
    /// Whether every repetition sees a different universe.
    fn regenerates(&self) -> bool {
        matches!(self, DatasetSpec::GraphGen(_) | DatasetSpec::GaussianMixture(_))
    }
}

/// Outcome of one `(method, k, repetition)` cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub method: Method,
    pub k: usize,
    pub rep: usize,
    pub seed: RngSeed,
    /// Cost of the starting centers.
    pub init_cost: Option<f64>,
    /// Cost of the returned centers (the released iterate for private runs).
    pub final_cost: Option<f64>,
    /// Lowest cost over the run's iterates.
    pub best_cost: Option<f64>,
    /// Mean cost over the `T` private steps.
    pub avg_cost: Option<f64>,
    /// Iteration at which the private trace's moving average bottoms out.
    pub iter_cost: Option<usize>,
    pub iterations: Option<usize>,
    /// Wall time of the initialization phase in milliseconds.
    pub wall_ms: Option<f64>,
    /// Total privacy spent, for private methods.
    pub epsilon_spent: Option<f64>,
    pub per_iteration_costs: Vec<f64>,
    pub error: Option<String>,
}

impl CellResult {
    fn empty(method: Method, k: usize, rep: usize, seed: RngSeed) -> Self {
        CellResult {
            method,
            k,
            rep,
            seed,
            init_cost: None,
            final_cost: None,
            best_cost: None,
            avg_cost: None,
            iter_cost: None,
            iterations: None,
            wall_ms: None,
            epsilon_spent: None,
            per_iteration_costs: Vec::new(),
            error: None,
        }
    }

    pub fn is_ok(&self) -> bool {
        self.error.is_none()
    }
}

/// Mean and sample standard deviation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub mean: f64,
    pub std: f64,
    pub count: usize,
}

impl Stat {
    pub fn of(values: &[f64]) -> Option<Stat> {
        if values.is_empty() {
            return None;
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let std = if values.len() > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        Some(Stat { mean, std, count: values.len() })
    }
}

/// Statistics across repetitions for one `(method, k)` pair.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub method: Method,
    pub k: usize,
    pub succeeded: usize,
    pub failed: usize,
    pub init_cost: Option<Stat>,
    pub final_cost: Option<Stat>,
    pub best_cost: Option<Stat>,
    pub avg_cost: Option<Stat>,
    pub iter_cost: Option<Stat>,
    pub wall_ms: Option<Stat>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostReport {
    pub config: ExperimentConfig,
    /// Ordered by repetition, then method (config order), then k (config order).
    pub cells: Vec<CellResult>,
    pub aggregates: Vec<Aggregate>,
}

impl CostReport {
    pub fn cell(&self, method: Method, k: usize, rep: usize) -> Option<&CellResult> {
        self.cells.iter().find(|c| c.method == method && c.k == k && c.rep == rep)
    }

    pub fn aggregate(&self, method: Method, k: usize) -> Option<&Aggregate> {
        self.aggregates.iter().find(|a| a.method == method && a.k == k)
    }

    pub fn write_json<W: Write>(&self, out: W) -> Result<()> {
        serde_json::to_writer_pretty(out, self)?;
        Ok(())
    }

    /// One row per cell: `method,k,rep,init_cost,final_cost,avg_cost,iter_cost,wall_ms`.
    /// Missing values (failed cells, non-private averages) are empty.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(out);
        let to_io = |e: csv::Error| Error::Io(std::io::Error::other(e));
        wtr.write_record(["method", "k", "rep", "init_cost", "final_cost", "avg_cost", "iter_cost", "wall_ms"])
            .map_err(to_io)?;
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for c in &self.cells {
            wtr.write_record([
                c.method.name().to_string(),
                c.k.to_string(),
                c.rep.to_string(),
                opt(c.init_cost),
                opt(c.final_cost),
                opt(c.avg_cost),
                c.iter_cost.map(|v| v.to_string()).unwrap_or_default(),
                opt(c.wall_ms),
            ])
            .map_err(to_io)?;
        }
        wtr.flush()?;
        Ok(())
    }

    /// Write `report.json` and `report.csv` into `dir`.
    pub fn write_files(&self, dir: &Path) -> Result<(PathBuf, PathBuf)> {
        std::fs::create_dir_all(dir)?;
        let json = dir.join("report.json");
        let csv = dir.join("report.csv");
        self.write_json(std::io::BufWriter::new(std::fs::File::create(&json)?))?;
        self.write_csv(std::fs::File::create(&csv)?)?;
        Ok((json, csv))
    }
}

/// Recompute per `(method, k)` statistics from the cells.
pub fn aggregate_cells(cfg: &ExperimentConfig, cells: &[CellResult]) -> Vec<Aggregate> {
    let mut out = Vec::new();
    for &method in &cfg.methods {
        for &k in &cfg.k {
            let group: Vec<&CellResult> = cells.iter().filter(|c| c.method == method && c.k == k).collect();
            let ok: Vec<&CellResult> = group.iter().copied().filter(|c| c.is_ok()).collect();
            let collect = |f: &dyn Fn(&CellResult) -> Option<f64>| -> Option<Stat> {
                Stat::of(&ok.iter().filter_map(|c| f(c)).collect::<Vec<_>>())
            };
            out.push(Aggregate {
                method,
                k,
                succeeded: ok.len(),
                failed: group.len() - ok.len(),
                init_cost: collect(&|c| c.init_cost),
                final_cost: collect(&|c| c.final_cost),
                best_cost: collect(&|c| c.best_cost),
                avg_cost: collect(&|c| c.avg_cost),
                iter_cost: collect(&|c| c.iter_cost.map(|v| v as f64)),
                wall_ms: collect(&|c| c.wall_ms),
            });
        }
    }
    out
}

fn run_cell(cfg: &ExperimentConfig, data: &Dataset, demand: &DemandSet, cell: &mut CellResult) -> Result<()> {
    let space = &data.space;
    let k = cell.k;
    if k > space.len() {
        return Err(Error::invalid(format!("k = {k} exceeds the universe size {}", space.len())));
    }
    if cell.method.is_private() {
        let init = match cell.method {
            Method::DpRand => DpInit::Random,
            Method::DpKmedianpp => DpInit::Kmedianpp,
            _ => DpInit::Hst,
        };
        let run = DpRunConfig {
            depth: cfg.dp_depth,
            objective: cfg.objective,
            exponent_divisor: cfg.exponent_divisor,
            ..DpRunConfig::new(k, cfg.epsilon, cfg.iterations, cell.seed)
        };
        let out = dp_local_search(space, demand, init, &run)?;
        let steps = out.swap_costs();
        cell.init_cost = Some(out.initial_cost());
        cell.final_cost = Some(out.released_cost());
        cell.best_cost = Some(out.best_cost());
        cell.avg_cost = Some(steps.iter().sum::<f64>() / steps.len() as f64);
        cell.iter_cost = Some(iteration_cost(steps, cfg.window)?);
        cell.iterations = Some(cfg.iterations);
        cell.wall_ms = Some(out.init_elapsed.as_secs_f64() * 1e3);
        cell.epsilon_spent = Some(out.budget.spent());
        cell.per_iteration_costs = out.trace.per_iteration_costs;
    } else {
        let started = Instant::now();
        let init: CenterSet = match cell.method {
            Method::NdpRand => random_init_from(demand.members(), k, cell.seed)?,
            Method::NdpKmedianpp => {
                kmedianpp_init_from(space, demand.members(), k, cell.seed, cfg.objective == Objective::Means)?
            }
            _ => hst_init_demand(space, demand, k, cfg.ndp_depth, cell.seed)?,
        };
        cell.wall_ms = Some(started.elapsed().as_secs_f64() * 1e3);
        let ls = LocalSearchConfig { alpha: cfg.alpha, max_iter: cfg.max_iter, objective: cfg.objective };
        let trace = local_search(space, demand, &init, ls)?;
        cell.init_cost = Some(trace.initial_cost());
        cell.final_cost = Some(trace.final_cost());
        cell.best_cost = Some(trace.final_cost());
        cell.iterations = Some(trace.iterations);
        cell.per_iteration_costs = trace.per_iteration_costs;
    }
    Ok(())
}

fn demand_for(cfg: &ExperimentConfig, data: &Dataset, rep: usize) -> Result<DemandSet> {
    let pair = match (cfg.demand_mode, data.labels.as_deref()) {
        (DemandMode::Balanced, _) => None,
        (DemandMode::Imbalanced, None) => {
            return Err(Error::invalid("imbalanced demand needs a generated dataset with cluster labels"))
        }
        (DemandMode::Imbalanced, Some(labels)) => {
            Some(cfg.imbalanced_clusters.map_or_else(|| two_largest_clusters(labels), Ok)?)
        }
    };
    let pool = match (pair, data.labels.as_deref()) {
        (Some((a, b)), Some(labels)) => labels.iter().filter(|&&l| l == a || l == b).count(),
        _ => data.space.len(),
    };
    sample_demand(
        &data.space,
        cfg.demand_mode,
        cfg.demand_size.unwrap_or(500.min(pool)),
        data.labels.as_deref(),
        pair,
        derive_seed_path(cfg.seed, &[DEMAND_STREAM, rep as u64]),
    )
}

/// Run every `(method, k, repetition)` cell.
///
/// Repetitions are processed in turn; the cells of one repetition share its
/// universe and demand set and run in parallel. A failing cell records its
/// error and the sweep continues. Apart from wall times the report is a pure
/// function of the config.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<CostReport> {
    cfg.validate()?;
    let mut cells = Vec::with_capacity(cfg.repetitions * cfg.methods.len() * cfg.k.len());
    // File datasets are loaded once; generated ones change per repetition.
    let fixed = (!cfg.dataset.regenerates())
        .then(|| load_dataset(&cfg.dataset, cfg.seed, 0).map_err(|e| e.to_string()));
    for rep in 0..cfg.repetitions {
        let mut rep_cells: Vec<CellResult> = Vec::new();
        for (mi, &method) in cfg.methods.iter().enumerate() {
            for (ki, &k) in cfg.k.iter().enumerate() {
                let seed = derive_seed_path(cfg.seed, &[CELL_STREAM, rep as u64, mi as u64, ki as u64]);
                rep_cells.push(CellResult::empty(method, k, rep, seed));
            }
        }

        let data = match &fixed {
            Some(data) => data.clone(),
            None => load_dataset(&cfg.dataset, cfg.seed, rep).map_err(|e| e.to_string()),
        };
        let prepared = data.and_then(|data| {
            let demand = demand_for(cfg, &data, rep).map_err(|e| e.to_string())?;
            Ok((data, demand))
        });

        match prepared {
            Ok((data, demand)) => {
                rep_cells.par_iter_mut().for_each(|cell| {
                    if let Err(e) = run_cell(cfg, &data, &demand, cell) {
                        cell.error = Some(e.to_string());
                    }
                });
            }
            Err(e) => {
                for cell in &mut rep_cells {
                    cell.error = Some(e.clone());
                }
            }
        }
        cells.extend(rep_cells);
    }
    let aggregates = aggregate_cells(cfg, &cells);
    Ok(CostReport { config: cfg.clone(), cells, aggregates })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn six_points() -> (tempfile::TempDir, PathBuf) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("six.csv");
        std::fs::write(&path, "0,0\n1,0\n0,1\n10,10\n11,10\n10,11\n").unwrap();
        (dir, path)
    }

    fn csv_config(path: PathBuf, methods: Vec<Method>, k: Vec<usize>) -> ExperimentConfig {
        ExperimentConfig {
            k,
            repetitions: 1,
            iterations: 6,
            ..ExperimentConfig::new(DatasetSpec::VectorCsv { path, norm: Norm::L2 }, methods)
        }
    }

    #[test]
    fn single_cell_report() {
        let (_dir, path) = six_points();
        let report = run_experiment(&csv_config(path, vec![Method::NdpRand], vec![2])).unwrap();
        assert_eq!(report.cells.len(), 1);
        let cell = &report.cells[0];
        assert!(cell.is_ok(), "{:?}", cell.error);
        assert!(cell.final_cost.unwrap() <= cell.init_cost.unwrap());
        assert!(cell.avg_cost.is_none() && cell.iter_cost.is_none());
        assert_eq!(report.aggregates.len(), 1);
    }

    #[test]
    fn every_cell_present_and_failures_recorded() {
        let (_dir, path) = six_points();
        let cfg = ExperimentConfig {
            repetitions: 2,
            ..csv_config(path, Method::ALL.to_vec(), vec![2, 6])
        };
        let report = run_experiment(&cfg).unwrap();
        assert_eq!(report.cells.len(), 2 * 6 * 2);
        for rep in 0..2 {
            for m in Method::ALL {
                let ok = report.cell(m, 2, rep).unwrap();
                assert!(ok.is_ok(), "{m}: {:?}", ok.error);
                // k = n leaves no swap for the private search
                assert_eq!(report.cell(m, 6, rep).unwrap().is_ok(), !m.is_private());
            }
        }
        for cell in report.cells.iter().filter(|c| c.method.is_private() && c.is_ok()) {
            // public initializations are free, leaving the swaps' half of ε
            let expected = if cell.method == Method::DpHst { 1.0 } else { 0.5 };
            assert!((cell.epsilon_spent.unwrap() - expected).abs() < 1e-12);
            assert_eq!(cell.per_iteration_costs.len(), 7);
            assert!((1..=2).contains(&cell.iter_cost.unwrap()));
        }
        assert_eq!(aggregate_cells(&cfg, &report.cells), report.aggregates);
        let agg = report.aggregate(Method::DpHst, 6).unwrap();
        assert_eq!((agg.succeeded, agg.failed), (0, 2));
    }

    #[test]
    fn deterministic_costs() {
        let (_dir, path) = six_points();
        let cfg = csv_config(path, Method::ALL.to_vec(), vec![1, 3]);
        let a = run_experiment(&cfg).unwrap();
        let b = run_experiment(&cfg).unwrap();
        for (x, y) in a.cells.iter().zip(&b.cells) {
            assert_eq!(x.per_iteration_costs, y.per_iteration_costs);
            assert_eq!(x.final_cost, y.final_cost);
        }
        let mut ca = Vec::new();
        a.write_csv(&mut ca).unwrap();
        let text = String::from_utf8(ca).unwrap();
        assert!(text.starts_with("method,k,rep,init_cost,final_cost,avg_cost,iter_cost,wall_ms\n"));
        assert_eq!(text.lines().count(), 1 + 12);
    }

    #[test]
    fn config_parsing() {
        let cfg = ExperimentConfig::from_json(
            r#"{"dataset": {"graph_gen": {"n": 40, "r": 5.0}}, "methods": ["NDP-HST", "DP-rand"]}"#,
        )
        .unwrap();
        assert_eq!(cfg.k, vec![2, 5, 10, 15, 20]);
        assert_eq!((cfg.epsilon, cfg.iterations, cfg.repetitions), (1.0, 20, 10));
        assert_eq!(cfg.demand_mode, DemandMode::Balanced);

        let err = ExperimentConfig::from_json(r#"{"dataset": {"graph_file": {"path": "g"}}, "methods": ["DP-magic"]}"#)
            .unwrap_err();
        assert!(err.to_string().contains("DP-magic"), "{err}");
        let err = ExperimentConfig::from_json(r#"{"dataset": {"graph_file": {"path": "g"}}, "methods": [], "kk": 1}"#)
            .unwrap_err();
        assert!(err.to_string().contains("kk"), "{err}");
        assert!(ExperimentConfig::from_json(r#"{"dataset": {"graph_file": {"path": "g"}}, "methods": []}"#).is_err());
    }

    #[test]
    fn imbalanced_graph_sweep() {
        let gen = GraphGenConfig::new(80, 20.0, 0);
        let cfg = ExperimentConfig {
            demand_mode: DemandMode::Imbalanced,
            demand_size: Some(12),
            k: vec![2],
            repetitions: 2,
            iterations: 5,
            ..ExperimentConfig::new(DatasetSpec::GraphGen(gen), vec![Method::NdpHst, Method::DpHst])
        };
        let report = run_experiment(&cfg).unwrap();
        assert!(report.cells.iter().all(|c| c.is_ok()));
        assert_ne!(report.cells[0].init_cost, report.cells[2].init_cost);
    }

    #[test]
    fn missing_file_fails_cells_not_run() {
        let cfg = csv_config(PathBuf::from("/nonexistent/data.csv"), vec![Method::NdpRand], vec![2]);
        let report = run_experiment(&cfg).unwrap();
        assert!(report.cells[0].error.as_deref().unwrap().contains("No such file"));
    }
}
