//! `gesn` — command-line toolkit for graph echo state networks.
//!
//! Subcommands: `stats`, `train`, `gridsearch`, `curve-iterations`,
//! `heatmap`, `sensitivity`, `synth`. Every run writes a `manifest.json`
//! echoing the fully resolved configuration into its output directory, and
//! all tabular output is plain CSV/JSON — plotting happens elsewhere.
//!
//! Exit codes: 0 success, 2 invalid flags, 3 dataset load errors,
//! 4 numeric/model errors, 5 output I/O errors.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use gesn::datasets::sbm::{generate_sbm, SbmSpec};
use gesn::datasets::{load_dataset, stratified_splits, write_dataset, Dataset, LoadError};
use gesn::export;
use gesn::paths::bfs_distances;
use gesn::selection::{
    grid_search, heatmap, iteration_curve, runs_csv, summary_json, train_artifacts, GridSpec,
    KChoice, ModelConfig,
};
use gesn::summary::summarize;
use gesn::{NodeData, Split};

const EXIT_LOAD: i32 = 3;
const EXIT_MODEL: i32 = 4;
const EXIT_OUTPUT: i32 = 5;

#[derive(Parser)]
#[command(
    name = "gesn",
    version,
    about = "Graph echo state networks: node classification and graph diagnostics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print and write dataset statistics (nodes, edges, spectral radius,
    /// homophily, shortest-path percentiles).
    Stats(StatsArgs),
    /// Train one model on one split and write predictions, metrics, and the
    /// fitted readout.
    Train(TrainArgs),
    /// Grid search over reservoir hyperparameters with seed averaging.
    Gridsearch(GridArgs),
    /// Test accuracy as a function of the iteration count K, next to the
    /// shortest-path ECD.
    CurveIterations(CurveArgs),
    /// Mean test accuracy over a radius × input-scaling grid.
    Heatmap(HeatmapArgs),
    /// Input-sensitivity bound between node pairs with per-path-length terms.
    Sensitivity(SensitivityArgs),
    /// Generate a stochastic block model dataset in the on-disk format.
    Synth(SynthArgs),
}

#[derive(Args, Serialize)]
struct CommonArgs {
    /// Output directory; defaults to $GESN_OUT_DIR or ./gesn-out.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (0 = all cores). Results do not depend on this.
    #[arg(long, default_value_t = 0)]
    workers: usize,
}

#[derive(Args, Serialize)]
struct ModelArgs {
    /// Reservoir units H.
    #[arg(long, default_value_t = 256)]
    units: usize,
    /// Reservoir spectral radius as a multiple of 1/alpha.
    #[arg(long, default_value_t = 5.0)]
    radius: f64,
    /// Input scaling factor.
    #[arg(long, default_value_t = 1.0)]
    scaling: f64,
    /// Readout ridge regularization.
    #[arg(long, default_value_t = 1e-3)]
    lambda: f64,
    /// Recurrent density in (0, 1]; default is about 10 nonzeros per row.
    #[arg(long)]
    density: Option<f64>,
    /// Number of state-system iterations K.
    #[arg(long, default_value_t = 100, conflicts_with = "k_auto")]
    k: usize,
    /// Set K from the 95th percentile of the shortest-path distribution + 1.
    #[arg(long)]
    k_auto: bool,
    /// Replace input features with a constant column (structure-only run).
    #[arg(long)]
    constant_features: bool,
}

impl ModelArgs {
    fn model(&self) -> ModelConfig {
        ModelConfig {
            units: self.units,
            radius_multiple: self.radius,
            input_scaling: self.scaling,
            lambda: self.lambda,
            density: self.density,
            iterations: if self.k_auto {
                KChoice::AutoPercentile95
            } else {
                KChoice::Fixed(self.k)
            },
        }
    }
}

#[derive(Args, Serialize)]
struct StatsArgs {
    /// Dataset directory.
    dataset: PathBuf,
    #[command(flatten)]
    #[serde(flatten)]
    common: CommonArgs,
}

#[derive(Args, Serialize)]
struct TrainArgs {
    dataset: PathBuf,
    #[command(flatten)]
    #[serde(flatten)]
    model: ModelArgs,
    /// Scaffold split id to use.
    #[arg(long, default_value_t = 0)]
    split: usize,
    /// Reservoir seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also write embeddings.bin (flat binary states).
    #[arg(long)]
    save_embeddings: bool,
    /// Also write embeddings.csv.
    #[arg(long)]
    save_embeddings_csv: bool,
    #[command(flatten)]
    #[serde(flatten)]
    common: CommonArgs,
}

#[derive(Args, Serialize)]
struct GridArgs {
    dataset: PathBuf,
    /// Reservoir unit counts.
    #[arg(long, value_delimiter = ',', default_value = "16,64,256,1024")]
    units: Vec<usize>,
    /// Radii as multiples of 1/alpha.
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "0.1,0.5,1,2,4,6,9,12.5,25,50"
    )]
    radii: Vec<f64>,
    /// Input scaling factors.
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "1,0.5,0.25,0.125,0.0625,0.03125,0.015625,0.0078125,0.00390625,0.003125"
    )]
    scalings: Vec<f64>,
    /// Readout regularization values.
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "1e-5,1e-4,1e-3,1e-2,1e-1,1,10,100"
    )]
    lambdas: Vec<f64>,
    /// Reservoir draws averaged per configuration.
    #[arg(long, default_value_t = 10)]
    seeds: usize,
    /// Scaffold split ids; defaults to every split shipped with the dataset.
    #[arg(long, value_delimiter = ',')]
    splits: Option<Vec<usize>>,
    #[arg(long, default_value_t = 100, conflicts_with = "k_auto")]
    k: usize,
    #[arg(long)]
    k_auto: bool,
    #[arg(long)]
    density: Option<f64>,
    #[arg(long)]
    constant_features: bool,
    #[arg(long, default_value_t = 0)]
    master_seed: u64,
    #[command(flatten)]
    #[serde(flatten)]
    common: CommonArgs,
}

#[derive(Args, Serialize)]
struct CurveArgs {
    dataset: PathBuf,
    /// Iteration counts to report.
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "1,2,3,4,6,8,12,16,24,32,48,64,100"
    )]
    k_list: Vec<usize>,
    #[command(flatten)]
    #[serde(flatten)]
    model: ModelArgs,
    #[arg(long, default_value_t = 0)]
    split: usize,
    /// Reservoir draws averaged per K.
    #[arg(long, default_value_t = 5)]
    seeds: usize,
    #[arg(long, default_value_t = 0)]
    master_seed: u64,
    #[command(flatten)]
    #[serde(flatten)]
    common: CommonArgs,
}

#[derive(Args, Serialize)]
struct HeatmapArgs {
    dataset: PathBuf,
    /// Radii as multiples of 1/alpha.
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "0.1,0.5,1,2,4,6,9,12.5,25,50"
    )]
    radii: Vec<f64>,
    /// Input scaling factors.
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "1,0.25,0.0625,0.015625,0.00390625"
    )]
    scalings: Vec<f64>,
    #[command(flatten)]
    #[serde(flatten)]
    model: ModelArgs,
    #[arg(long, default_value_t = 0)]
    split: usize,
    #[arg(long, default_value_t = 5)]
    seeds: usize,
    #[arg(long, default_value_t = 0)]
    master_seed: u64,
    #[command(flatten)]
    #[serde(flatten)]
    common: CommonArgs,
}

#[derive(Args, Serialize)]
struct SensitivityArgs {
    dataset: PathBuf,
    /// Node pairs as v:u, comma separated (e.g. 0:5,2:7).
    #[arg(long, value_delimiter = ',')]
    pairs: Vec<String>,
    #[command(flatten)]
    #[serde(flatten)]
    model: ModelArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    #[serde(flatten)]
    common: CommonArgs,
}

#[derive(Args, Serialize)]
struct SynthArgs {
    /// Directory to write the dataset into.
    outdir: PathBuf,
    #[arg(long, default_value_t = 1000)]
    nodes: usize,
    #[arg(long, default_value_t = 2)]
    classes: usize,
    #[arg(long, default_value_t = 0.02)]
    p_in: f64,
    #[arg(long, default_value_t = 0.02)]
    p_out: f64,
    #[arg(long, default_value_t = 8)]
    feature_dim: usize,
    #[arg(long, default_value_t = 0.0)]
    signal: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of stratified 48/32/20 splits to write.
    #[arg(long, default_value_t = 10)]
    num_splits: usize,
    #[arg(long, default_value_t = 0)]
    split_seed: u64,
}

#[derive(Debug)]
enum CliError {
    Load(LoadError),
    Model(gesn::Error),
    Output(std::io::Error),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Load(e) => write!(f, "dataset error: {e}"),
            CliError::Model(e) => write!(f, "model error: {e}"),
            CliError::Output(e) => write!(f, "output error: {e}"),
        }
    }
}

impl From<LoadError> for CliError {
    fn from(e: LoadError) -> Self {
        CliError::Load(e)
    }
}

impl From<gesn::Error> for CliError {
    fn from(e: gesn::Error) -> Self {
        CliError::Model(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Output(e)
    }
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Load(_) => EXIT_LOAD,
            CliError::Model(_) => EXIT_MODEL,
            CliError::Output(_) => EXIT_OUTPUT,
        }
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Stats(args) => cmd_stats(args),
        Command::Train(args) => cmd_train(args),
        Command::Gridsearch(args) => cmd_gridsearch(args),
        Command::CurveIterations(args) => cmd_curve(args),
        Command::Heatmap(args) => cmd_heatmap(args),
        Command::Sensitivity(args) => cmd_sensitivity(args),
        Command::Synth(args) => cmd_synth(args),
    }
}

/// Resolves the output directory (flag, then $GESN_OUT_DIR, then ./gesn-out)
/// and creates it.
fn out_dir(common: &CommonArgs) -> Result<PathBuf, CliError> {
    let dir = common
        .out
        .clone()
        .or_else(|| std::env::var_os("GESN_OUT_DIR").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("gesn-out"));
    fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn install_workers(common: &CommonArgs) {
    if common.workers > 0 {
        // Ignore the error if a pool is already installed (tests, repeats).
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(common.workers)
            .build_global();
    }
}

fn write_manifest<T: Serialize>(dir: &Path, command: &str, args: &T) -> Result<(), CliError> {
    #[derive(Serialize)]
    struct Manifest<'a, T> {
        command: &'a str,
        options: &'a T,
    }
    let text = serde_json::to_string_pretty(&Manifest {
        command,
        options: args,
    })
    .expect("manifest serialization");
    fs::write(dir.join("manifest.json"), text)?;
    Ok(())
}

fn load(dataset: &Path) -> Result<Dataset, CliError> {
    Ok(load_dataset(dataset)?)
}

fn pick_split(dataset: &Dataset, id: usize) -> Result<&Split, CliError> {
    dataset.split_by_id(id).ok_or_else(|| {
        CliError::Model(gesn::Error::InvalidConfig(format!(
            "split id {id} not found in dataset (available: {:?})",
            dataset.split_ids()
        )))
    })
}

fn effective_data(data: &NodeData, constant_features: bool) -> NodeData {
    if constant_features {
        gesn::selection::replace_features_constant(data)
    } else {
        data.clone()
    }
}

fn cmd_stats(args: StatsArgs) -> Result<(), CliError> {
    install_workers(&args.common);
    let dir = out_dir(&args.common)?;
    let dataset = load(&args.dataset)?;
    let summary = summarize(&dataset.graph, &dataset.node_data);

    let fmt_opt = |v: Option<f64>| v.map_or_else(|| "undefined".to_string(), |x| format!("{x:.4}"));
    println!("nodes            {}", summary.nodes);
    println!("edges            {}", summary.edges);
    println!(
        "radius alpha     {:.4}{}",
        summary.spectral_radius,
        if summary.spectral_radius_converged {
            ""
        } else {
            " (not converged)"
        }
    );
    println!("edge homophily   {}", fmt_opt(summary.edge_homophily));
    println!("node homophily   {}", fmt_opt(summary.node_homophily));
    println!("features         {}", summary.feature_dim);
    println!("classes          {}", summary.num_classes);
    println!(
        "path percentiles p50={} p95={} max={} (unreachable pairs: {})",
        summary.path_length_p50,
        summary.path_length_p95,
        summary.path_length_max,
        summary.unreachable_pairs
    );
    println!("splits           {:?}", dataset.split_ids());

    fs::write(
        dir.join("stats.json"),
        serde_json::to_string_pretty(&summary).expect("stats serialization"),
    )?;
    write_manifest(&dir, "stats", &args)?;
    Ok(())
}

fn cmd_train(args: TrainArgs) -> Result<(), CliError> {
    install_workers(&args.common);
    let dir = out_dir(&args.common)?;
    let dataset = load(&args.dataset)?;
    let split = pick_split(&dataset, args.split)?;
    let data = effective_data(&dataset.node_data, args.model.constant_features);
    let model = args.model.model();

    let (report, _reservoir, embeddings, readout) =
        train_artifacts(&dataset.graph, &data, split, &model, args.seed)?;

    println!(
        "alpha {:.4}  K {}  target radius {:.6}",
        report.alpha, report.k_used, report.target_radius
    );
    println!(
        "accuracy  train {:.4}  val {:.4}  test {:.4}",
        report.train_accuracy, report.val_accuracy, report.test_accuracy
    );
    println!(
        "time      embed {:.3}s  fit {:.3}s  predict {:.3}s",
        report.embed_seconds, report.fit_seconds, report.predict_seconds
    );

    fs::write(
        dir.join("metrics.json"),
        serde_json::to_string_pretty(&report).expect("metrics serialization"),
    )?;
    let mut predictions = String::from("node,label,predicted\n");
    for (i, &p) in report.predictions.iter().enumerate() {
        predictions.push_str(&format!("{i},{},{p}\n", data.labels[i]));
    }
    fs::write(dir.join("predictions.csv"), predictions)?;
    export::write_readout_csv(dir.join("readout.csv"), &readout)?;
    if args.save_embeddings {
        export::write_embeddings_binary(dir.join("embeddings.bin"), &embeddings)?;
    }
    if args.save_embeddings_csv {
        export::write_embeddings_csv(dir.join("embeddings.csv"), &embeddings)?;
    }
    write_manifest(&dir, "train", &args)?;
    Ok(())
}

fn cmd_gridsearch(args: GridArgs) -> Result<(), CliError> {
    install_workers(&args.common);
    let dir = out_dir(&args.common)?;
    let dataset = load(&args.dataset)?;
    let data = effective_data(&dataset.node_data, args.constant_features);
    let split_ids = args.splits.clone().unwrap_or_else(|| dataset.split_ids());

    let grid = GridSpec {
        units: args.units.clone(),
        radius_multiples: args.radii.clone(),
        input_scalings: args.scalings.clone(),
        lambdas: args.lambdas.clone(),
        iterations: if args.k_auto {
            KChoice::AutoPercentile95
        } else {
            KChoice::Fixed(args.k)
        },
        seeds_per_config: args.seeds,
        split_ids,
        recurrent_density: args.density,
        master_seed: args.master_seed,
    };
    let result = grid_search(&grid, &dataset.graph, &data, &dataset.splits)?;

    match (result.mean_test_accuracy, result.std_test_accuracy) {
        (Some(mean), Some(std)) => {
            println!(
                "test accuracy {:.4} ± {:.4} over {} splits (alpha {:.4}, K {})",
                mean,
                std,
                result.selected.len(),
                result.alpha,
                result.k_used
            );
        }
        _ => println!("no split produced a successful run"),
    }
    for sel in &result.selected {
        println!(
            "split {}: units {} radius {}/alpha scaling {} lambda {} -> val {:.4} test {:.4}",
            sel.split_id,
            sel.units,
            sel.radius_multiple,
            sel.input_scaling,
            sel.lambda,
            sel.mean_val_accuracy,
            sel.mean_test_accuracy
        );
    }
    if result.failed_runs > 0 {
        eprintln!("{} run(s) failed; see summary.json", result.failed_runs);
    }

    fs::write(dir.join("runs.csv"), runs_csv(&result))?;
    fs::write(dir.join("summary.json"), summary_json(&grid, &result))?;
    write_manifest(&dir, "gridsearch", &args)?;
    Ok(())
}

fn cmd_curve(args: CurveArgs) -> Result<(), CliError> {
    install_workers(&args.common);
    let dir = out_dir(&args.common)?;
    let dataset = load(&args.dataset)?;
    let split = pick_split(&dataset, args.split)?;
    let data = effective_data(&dataset.node_data, args.model.constant_features);
    let model = args.model.model();

    let curve = iteration_curve(
        &dataset.graph,
        &data,
        split,
        &model,
        &args.k_list,
        args.seeds,
        args.master_seed,
    )?;

    let mut csv = String::from("k,mean_test_accuracy,ecd_at_k_minus_1\n");
    for point in &curve {
        csv.push_str(&format!(
            "{},{},{}\n",
            point.k, point.mean_test_accuracy, point.ecd_at_k_minus_1
        ));
        println!(
            "K {:4}  test accuracy {:.4}  ECD(K-1) {:.4}",
            point.k, point.mean_test_accuracy, point.ecd_at_k_minus_1
        );
    }
    fs::write(dir.join("curve.csv"), csv)?;
    write_manifest(&dir, "curve-iterations", &args)?;
    Ok(())
}

fn cmd_heatmap(args: HeatmapArgs) -> Result<(), CliError> {
    install_workers(&args.common);
    let dir = out_dir(&args.common)?;
    let dataset = load(&args.dataset)?;
    let split = pick_split(&dataset, args.split)?;
    let data = effective_data(&dataset.node_data, args.model.constant_features);
    let model = args.model.model();

    let cells = heatmap(
        &dataset.graph,
        &data,
        split,
        &model,
        &args.radii,
        &args.scalings,
        args.seeds,
        args.master_seed,
    )?;

    let mut csv = String::from("radius_multiple,input_scaling,mean_test_accuracy,failed_runs\n");
    for cell in &cells {
        let acc = cell
            .mean_test_accuracy
            .map(|a| a.to_string())
            .unwrap_or_default();
        csv.push_str(&format!(
            "{},{},{},{}\n",
            cell.radius_multiple, cell.input_scaling, acc, cell.failed_runs
        ));
    }
    fs::write(dir.join("heatmap.csv"), csv)?;
    println!(
        "{} cells written to {}",
        cells.len(),
        dir.join("heatmap.csv").display()
    );
    write_manifest(&dir, "heatmap", &args)?;
    Ok(())
}

fn parse_pairs(raw: &[String]) -> Result<Vec<(usize, usize)>, CliError> {
    let mut pairs = Vec::with_capacity(raw.len());
    for item in raw {
        let parts: Vec<&str> = item.split(':').collect();
        let parsed = (parts.len() == 2)
            .then(|| Ok::<_, std::num::ParseIntError>((parts[0].parse()?, parts[1].parse()?)))
            .and_then(|r| r.ok());
        match parsed {
            Some(pair) => pairs.push(pair),
            None => {
                return Err(CliError::Model(gesn::Error::InvalidConfig(format!(
                    "bad node pair {item:?}; expected v:u"
                ))))
            }
        }
    }
    Ok(pairs)
}

fn cmd_sensitivity(args: SensitivityArgs) -> Result<(), CliError> {
    install_workers(&args.common);
    let dir = out_dir(&args.common)?;
    let dataset = load(&args.dataset)?;
    let data = effective_data(&dataset.node_data, args.model.constant_features);
    let model = args.model.model();
    let pairs = parse_pairs(&args.pairs)?;
    if pairs.is_empty() {
        return Err(CliError::Model(gesn::Error::InvalidConfig(
            "no node pairs given (use --pairs v:u,...)".into(),
        )));
    }

    let alpha = gesn::spectral_radius(&dataset.graph).value;
    if !(alpha > 0.0) {
        return Err(CliError::Model(gesn::Error::InvalidConfig(
            "graph spectral radius is zero".into(),
        )));
    }
    let k = gesn::selection::resolve_k(model.iterations, &dataset.graph);
    let cfg = gesn::ReservoirConfig {
        hidden_units: model.units,
        target_radius: model.radius_multiple / alpha,
        input_scaling: model.input_scaling,
        recurrent_density: model
            .density
            .unwrap_or_else(|| gesn::ReservoirConfig::default_density(model.units)),
        iterations: k,
        seed: args.seed,
    };
    let reservoir = gesn::init_reservoir(&cfg, data.feature_dim())?;

    let mut csv = String::from("v,u,distance,bound");
    for l in 0..k {
        csv.push_str(&format!(",term_{l}"));
    }
    csv.push('\n');
    for &(v, u) in &pairs {
        let terms =
            gesn::diagnostics::sensitivity_bound_terms(&reservoir, &dataset.graph, k, v, u)?;
        let bound: f64 = terms.iter().sum();
        let distance = bfs_distances(&dataset.graph, v)[u];
        let dist_field = distance.map(|d| d.to_string()).unwrap_or_default();
        csv.push_str(&format!("{v},{u},{dist_field},{bound}"));
        for t in &terms {
            csv.push_str(&format!(",{t}"));
        }
        csv.push('\n');
        println!(
            "pair ({v}, {u}): distance {}, bound {bound:.6e}",
            distance.map_or_else(|| "unreachable".into(), |d: usize| d.to_string())
        );
    }
    fs::write(dir.join("sensitivity.csv"), csv)?;
    write_manifest(&dir, "sensitivity", &args)?;
    Ok(())
}

fn cmd_synth(args: SynthArgs) -> Result<(), CliError> {
    let spec = SbmSpec {
        num_nodes: args.nodes,
        num_classes: args.classes,
        intra_edge_prob: args.p_in,
        inter_edge_prob: args.p_out,
        feature_dim: args.feature_dim,
        feature_signal: args.signal,
        seed: args.seed,
    };
    let (graph, data) = generate_sbm(&spec)?;
    let splits = stratified_splits(
        &data.labels,
        data.num_classes,
        args.num_splits,
        gesn::datasets::DEFAULT_SPLIT_FRACTIONS,
        args.split_seed,
    )?;
    write_dataset(&args.outdir, &graph, &data, &splits)?;
    write_manifest(&args.outdir, "synth", &args)?;
    println!(
        "wrote {} nodes, {} edge slots, {} splits to {}",
        graph.num_nodes(),
        graph.num_edges(),
        splits.len(),
        args.outdir.display()
    );
    Ok(())
}
