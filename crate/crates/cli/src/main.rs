//! `hstkm` command-line front end.
//!
//! Every stdout payload is JSON. Human-readable tables go to stderr unless
//! `--pretty` is given. Bad input or usage exits with 1, internal failures
//! with 2.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use hstkm::harness::{gen_cluster_graph, run_experiment, CostReport, ExperimentConfig, GraphGenConfig};
use hstkm::io::{load_space, read_ids, write_graph, DataFormat};
use hstkm::seeding::{hst_init_demand, kmedianpp_init_from, random_init_from};
use hstkm::{
    build_hst, dp_local_search, local_search, DemandSet, Depth, DpInit, DpRunConfig, LocalSearchConfig, MetricSpace,
    Norm, Objective, PointId, RngSeed,
};

#[derive(Parser, Debug)]
#[command(name = "hstkm", version, about = "Private and non-private k-median clustering with HST initialization")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a clustered random graph as an edge list.
    GenGraph(GenGraphArgs),
    /// Run one initialization plus local search.
    Cluster(ClusterArgs),
    /// Run a sweep described by a JSON config.
    Experiment(ExperimentArgs),
    /// Build an HST and print it as JSON.
    InspectHst(InspectArgs),
    /// Print version information as JSON.
    Version,
}

#[derive(Args, Debug)]
struct DataArgs {
    /// Vector CSV (`.csv`) or edge-list file.
    #[arg(long)]
    data: PathBuf,
    /// Override the format inferred from the file extension.
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    #[arg(long, value_enum, default_value = "l2")]
    norm: NormArg,
}

impl DataArgs {
    fn load(&self) -> Result<MetricSpace, CliError> {
        let format = match self.format {
            Some(FormatArg::Vectors) => DataFormat::Vectors,
            Some(FormatArg::Graph) => DataFormat::Graph,
            None => DataFormat::from_path(&self.data),
        };
        load_space(&self.data, format, self.norm.into()).map_err(|e| with_path(&self.data, e))
    }
}

#[derive(Args, Debug)]
struct GenGraphArgs {
    #[arg(long)]
    n: usize,
    /// Upper end of the inter-cluster weight range `[0.5, r]`.
    #[arg(long)]
    r: f64,
    #[arg(long, default_value_t = 10)]
    clusters: usize,
    #[arg(long, default_value_t = 0.2)]
    p_intra: f64,
    #[arg(long, default_value_t = 0.01)]
    p_inter: f64,
    #[arg(long, default_value_t = 0)]
    seed: RngSeed,
    /// Edge-list output path.
    #[arg(long)]
    out: PathBuf,
    /// Optional path for cluster labels, one per line.
    #[arg(long)]
    labels: Option<PathBuf>,
}

const DP_METHODS: [(&str, &str); 3] = [("method", "dp-rand"), ("method", "dp-kmedianpp"), ("method", "dp-hst")];

#[derive(Args, Debug)]
struct ClusterArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long)]
    k: usize,
    #[arg(long, value_enum)]
    method: MethodArg,
    #[arg(long, default_value_t = 0)]
    seed: RngSeed,
    #[arg(long, value_enum, default_value = "median")]
    objective: ObjectiveArg,
    /// Total privacy budget. Required by private methods.
    #[arg(long, required_if_eq_any(DP_METHODS))]
    epsilon: Option<f64>,
    /// File of demand point ids, one per line. Required by private methods;
    /// the whole dataset otherwise.
    #[arg(long, required_if_eq_any(DP_METHODS))]
    demand: Option<PathBuf>,
    /// Number of private swaps `T`.
    #[arg(long, default_value_t = 20)]
    iterations: usize,
    /// Tree depth: `auto` or a positive integer.
    #[arg(long, visible_alias = "L", default_value = "auto")]
    depth: Depth,
    #[arg(long, default_value_t = 1e-3)]
    alpha: f64,
    #[arg(long, default_value_t = 20)]
    max_iter: usize,
    /// Draw privacy noise from the OS entropy source. Output is then not
    /// reproducible from the seed.
    #[arg(long)]
    secure_rng: bool,
    #[arg(long)]
    pretty: bool,
}

#[derive(Args, Debug)]
struct ExperimentArgs {
    /// JSON experiment config.
    config: PathBuf,
    /// Directory receiving `report.json` and `report.csv`.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Print the aggregate table on stdout instead of JSON.
    #[arg(long)]
    pretty: bool,
}

#[derive(Args, Debug)]
struct InspectArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long, visible_alias = "L", default_value = "auto")]
    depth: Depth,
    #[arg(long, default_value_t = 0)]
    seed: RngSeed,
    /// Annotate nodes with counts from this demand id file.
    #[arg(long)]
    demand: Option<PathBuf>,
    /// Run the structural validator and report the result on stderr.
    #[arg(long)]
    check: bool,
    #[arg(long)]
    pretty: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Rand,
    Kmedianpp,
    Hst,
    DpRand,
    DpKmedianpp,
    DpHst,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ObjectiveArg {
    Median,
    Means,
}

impl From<ObjectiveArg> for Objective {
    fn from(o: ObjectiveArg) -> Self {
        match o {
            ObjectiveArg::Median => Objective::Median,
            ObjectiveArg::Means => Objective::Means,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum NormArg {
    L1,
    L2,
}

impl From<NormArg> for Norm {
    fn from(n: NormArg) -> Self {
        match n {
            NormArg::L1 => Norm::L1,
            NormArg::L2 => Norm::L2,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FormatArg {
    Vectors,
    Graph,
}

#[derive(Debug)]
enum CliError {
    Input(String),
    Internal(String),
}

impl From<hstkm::Error> for CliError {
    fn from(e: hstkm::Error) -> Self {
        if e.is_input_error() {
            CliError::Input(e.to_string())
        } else {
            CliError::Internal(e.to_string())
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Internal(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    if let Err(msg) = configure_threads() {
        eprintln!("error: {msg}");
        return ExitCode::from(1);
    }
    match std::panic::catch_unwind(|| run(cli)) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(CliError::Input(msg))) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Ok(Err(CliError::Internal(msg))) => {
            eprintln!("internal error: {msg}");
            ExitCode::from(2)
        }
        Err(_) => ExitCode::from(2),
    }
}

/// `HSTKM_THREADS` caps the worker pool used by experiment cells.
fn configure_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var("HSTKM_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("HSTKM_THREADS must be a positive integer, got `{raw}`"))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::GenGraph(args) => gen_graph(args),
        Command::Cluster(args) => cluster(args),
        Command::Experiment(args) => experiment(args),
        Command::InspectHst(args) => inspect_hst(args),
        Command::Version => emit(&json!({ "name": "hstkm", "version": env!("CARGO_PKG_VERSION") }), false),
    }
}

fn emit<T: Serialize>(value: &T, pretty: bool) -> Result<(), CliError> {
    let mut out = io::stdout().lock();
    let text = if pretty { serde_json::to_string_pretty(value) } else { serde_json::to_string(value) };
    let text = text.map_err(|e| CliError::Internal(e.to_string()))?;
    writeln!(out, "{text}")?;
    Ok(())
}

fn gen_graph(args: GenGraphArgs) -> Result<(), CliError> {
    let cfg = GraphGenConfig {
        n_clusters: args.clusters,
        p_intra: args.p_intra,
        p_inter: args.p_inter,
        ..GraphGenConfig::new(args.n, args.r, args.seed)
    };
    let generated = gen_cluster_graph(&cfg)?;
    write_graph(io::BufWriter::new(create(&args.out)?), &generated.graph)?;
    if let Some(path) = &args.labels {
        let text: String = generated.labels.iter().map(|l| format!("{l}\n")).collect();
        fs::write(path, text).map_err(|e| input_io(path, e))?;
    }
    emit(
        &json!({
            "path": args.out,
            "n": generated.graph.n,
            "edges": generated.graph.edges.len(),
            "regenerations": generated.regenerations,
            "patched_edges": generated.patched_edges,
        }),
        false,
    )
}

fn create(path: &Path) -> Result<fs::File, CliError> {
    fs::File::create(path).map_err(|e| input_io(path, e))
}

fn input_io(path: &Path, e: io::Error) -> CliError {
    CliError::Input(format!("{}: {e}", path.display()))
}

/// Io errors carry no file name; add it.
fn with_path(path: &Path, e: hstkm::Error) -> CliError {
    match e {
        hstkm::Error::Io(e) => input_io(path, e),
        e => e.into(),
    }
}

fn load_demand(space: &MetricSpace, path: Option<&Path>) -> Result<DemandSet, CliError> {
    match path {
        Some(path) => Ok(DemandSet::new(space, read_ids(path).map_err(|e| with_path(path, e))?)?),
        None => Ok(DemandSet::all(space)),
    }
}

#[derive(Serialize)]
struct ClusterOutput {
    method: String,
    k: usize,
    seed: RngSeed,
    centers: Vec<PointId>,
    initial_cost: f64,
    final_cost: f64,
    iterations: usize,
    per_iteration_costs: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    ledger: Option<serde_json::Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    epsilon_spent: Option<f64>,
}

fn cluster(args: ClusterArgs) -> Result<(), CliError> {
    let space = args.data.load()?;
    let demand = load_demand(&space, args.demand.as_deref())?;
    let objective: Objective = args.objective.into();
    let squared = objective == Objective::Means;
    let method_name = args.method.to_possible_value().expect("no skipped variants").get_name().to_string();

    let dp_init = match args.method {
        MethodArg::DpRand => Some(DpInit::Random),
        MethodArg::DpKmedianpp => Some(DpInit::Kmedianpp),
        MethodArg::DpHst => Some(DpInit::Hst),
        _ => None,
    };
    let output = if let Some(init) = dp_init {
        let epsilon = args.epsilon.expect("clap enforces --epsilon for private methods");
        let cfg = DpRunConfig {
            depth: args.depth,
            objective,
            secure: args.secure_rng,
            ..DpRunConfig::new(args.k, epsilon, args.iterations, args.seed)
        };
        let out = dp_local_search(&space, &demand, init, &cfg)?;
        ClusterOutput {
            method: method_name,
            k: args.k,
            seed: args.seed,
            centers: out.centers.centers().to_vec(),
            initial_cost: out.initial_cost(),
            final_cost: out.released_cost(),
            iterations: out.trace.iterations,
            per_iteration_costs: out.trace.per_iteration_costs.clone(),
            ledger: Some(out.budget.to_json()),
            epsilon_spent: Some(out.budget.spent()),
        }
    } else {
        let members = demand.members();
        let init = match args.method {
            MethodArg::Rand => random_init_from(members, args.k, args.seed)?,
            MethodArg::Kmedianpp => kmedianpp_init_from(&space, members, args.k, args.seed, squared)?,
            _ => hst_init_demand(&space, &demand, args.k, args.depth, args.seed)?,
        };
        let ls = LocalSearchConfig { alpha: args.alpha, max_iter: args.max_iter, objective };
        let trace = local_search(&space, &demand, &init, ls)?;
        ClusterOutput {
            method: method_name,
            k: args.k,
            seed: args.seed,
            centers: trace.final_centers.centers().to_vec(),
            initial_cost: trace.initial_cost(),
            final_cost: trace.final_cost(),
            iterations: trace.iterations,
            per_iteration_costs: trace.per_iteration_costs.clone(),
            ledger: None,
            epsilon_spent: None,
        }
    };
    emit(&output, args.pretty)
}

fn experiment(args: ExperimentArgs) -> Result<(), CliError> {
    let cfg = ExperimentConfig::load(&args.config).map_err(|e| with_path(&args.config, e))?;
    let report = run_experiment(&cfg)?;
    report.write_files(&args.out).map_err(|e| CliError::Input(format!("{}: {e}", args.out.display())))?;

    let table = render_table(&report);
    if args.pretty {
        print!("{table}");
    } else {
        eprint!("{table}");
        emit(&report.aggregates, false)?;
    }
    if !report.cells.is_empty() && report.cells.iter().all(|c| !c.is_ok()) {
        let first = report.cells[0].error.clone().unwrap_or_default();
        return Err(CliError::Input(format!("every cell failed; first error: {first}")));
    }
    Ok(())
}

fn render_table(report: &CostReport) -> String {
    let fmt = |s: Option<&hstkm::harness::Stat>| match s {
        Some(s) => format!("{:.4} ± {:.4}", s.mean, s.std),
        None => "-".to_string(),
    };
    let mut out = format!(
        "{:<14} {:>4} {:>4} {:>22} {:>22} {:>22} {:>10}\n",
        "method", "k", "ok", "init_cost", "final_cost", "avg_cost", "iter_cost"
    );
    for a in &report.aggregates {
        out.push_str(&format!(
            "{:<14} {:>4} {:>4} {:>22} {:>22} {:>22} {:>10}\n",
            a.method.name(),
            a.k,
            a.succeeded,
            fmt(a.init_cost.as_ref()),
            fmt(a.final_cost.as_ref()),
            fmt(a.avg_cost.as_ref()),
            a.iter_cost.as_ref().map(|s| format!("{:.1}", s.mean)).unwrap_or_else(|| "-".into()),
        ));
    }
    out
}

fn inspect_hst(args: InspectArgs) -> Result<(), CliError> {
    let space = args.data.load()?;
    let mut tree = build_hst(&space, args.depth, args.seed)?;
    if let Some(path) = &args.demand {
        let demand = load_demand(&space, Some(path))?;
        tree = tree.annotate_demand(&demand)?;
    }
    emit(&tree.to_dump(), args.pretty)?;
    if args.check {
        match tree.validate(&space) {
            Ok(()) => eprintln!("diameter-property: pass"),
            Err(msg) => {
                eprintln!("diameter-property: fail");
                return Err(CliError::Internal(msg));
            }
        }
    }
    Ok(())
}
