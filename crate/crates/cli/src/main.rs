//! `netclass` command-line interface.
//!
//! Exit codes: 0 success, 2 configuration error, 3 data error.

mod fetch;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use netclass::classify::{ClassifierConfig, ClassifierKind};
use netclass::features::{DistributionOptions, FeatureSet};
use netclass::graph::{load_edge_list, write_edge_collection};
use netclass::pipeline::{
    self, combine_days, degree_histogram, fit_degree_distributions, load_dataset, prepare_out_dir, read_id_list,
    read_study_csv, run_sampling_regression, run_sampling_study, write_json, write_study_csv, Dataset, DatasetSpec,
    ExperimentConfig, Protocol, StudyConfig,
};
use netclass::rng;
use netclass::sampling::{attribute_subsample, snowball, zip_values, ZipSubsample};
use netclass::synth::{generate_synthetic_cdr, SynthConfig};

#[derive(Debug)]
pub enum CliError {
    Core(netclass::Error),
    Config(String),
    Data(String),
}

impl From<netclass::Error> for CliError {
    fn from(e: netclass::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Core(e.into())
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) if e.is_config() => 2,
            CliError::Config(_) => 2,
            _ => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Data(m) => write!(f, "data error: {m}"),
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

#[derive(Parser)]
#[command(name = "netclass", version, about = "Classify networks from hand-selected features")]
struct Cli {
    /// Seed for every random choice (default 0).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output directory (or file destination where noted).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Log more (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Download a benchmark dataset archive and unpack it.
    Fetch {
        /// Dataset name, e.g. IMDB-BINARY.
        name: String,
        /// Destination directory.
        #[arg(long, default_value = "data")]
        dest: PathBuf,
        /// Expected SHA-256 of the archive.
        #[arg(long)]
        sha256: Option<String>,
        /// Override the download URL.
        #[arg(long)]
        url: Option<String>,
    },
    /// Compute a feature matrix (CSV to stdout, or features.csv under --out).
    Extract(ExperimentArgs),
    /// Train and evaluate a classifier; writes a run directory under --out.
    Eval(ExperimentArgs),
    /// Random-forest Gini importances; writes a run directory under --out.
    Importance(ExperimentArgs),
    /// Fit a degree distribution to every network.
    FitDist {
        #[command(flatten)]
        dataset: DatasetArgs,
        #[arg(long, value_enum, default_value_t = DistModel::Lognormal)]
        model: DistModel,
    },
    /// Draw snowball or zip-code subsamples from one network.
    Sample {
        /// Edge-list file.
        #[arg(long)]
        graph: PathBuf,
        /// Node attribute CSV (needed for zip subsamples).
        #[arg(long)]
        attributes: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = SampleKind::Snowball)]
        kind: SampleKind,
        #[arg(long, default_value_t = 4)]
        radius: usize,
        #[arg(long, default_value_t = netclass::sampling::MIN_SIZE)]
        min_size: usize,
        /// Number of snowball samples.
        #[arg(long, default_value_t = 1)]
        count: usize,
        /// Zip code to extract (default: every zip code).
        #[arg(long)]
        zip: Option<String>,
    },
    /// LAD fit of misclassification rate on size and sampling type, with a
    /// binned permutation test.
    SamplingRegression {
        /// CSV with columns mr, avg_network_size, sample_type.
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 1000)]
        n_perm: usize,
    },
    /// Snowball vs zip subsampling study on daily networks.
    SamplingStudy {
        /// Edge-list collection of labeled daily networks with attributes.
        #[arg(long, conflicts_with = "preset")]
        data: Option<PathBuf>,
        /// Generate the daily networks from a synthetic preset instead.
        #[arg(long)]
        preset: Option<String>,
        #[arg(long, value_delimiter = ',', default_value = "4,5,6")]
        radii: Vec<usize>,
        #[arg(long, default_value_t = 15)]
        per_radius: usize,
        #[arg(long, default_value_t = netclass::sampling::MIN_SIZE)]
        min_size: usize,
        #[arg(long, default_value_t = 7)]
        folds: usize,
        #[arg(long, default_value_t = 100)]
        trees: usize,
        #[arg(long, default_value_t = 1000)]
        n_perm: usize,
    },
    /// Generate synthetic daily call networks into --out.
    SynthCdr {
        /// One of distinct, zip-signal, identical, study.
        #[arg(long, default_value = "distinct")]
        preset: String,
        /// Read the full generator configuration from a JSON file instead.
        #[arg(long, conflicts_with = "preset")]
        config: Option<PathBuf>,
        #[arg(long)]
        days: Option<usize>,
        #[arg(long)]
        population: Option<usize>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum DistModel {
    Lognormal,
}

#[derive(Clone, Copy, ValueEnum)]
enum SampleKind {
    Snowball,
    Zip,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Tu,
    Edges,
    Bipartite,
}

#[derive(Clone, Copy, ValueEnum)]
enum ProtocolKind {
    Cv,
    Parity,
    Explicit,
}

#[derive(Args)]
struct DatasetArgs {
    /// Dataset directory.
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Edges)]
    format: Format,
    /// Dataset name for the benchmark layout (file prefix).
    #[arg(long)]
    name: Option<String>,
}

impl DatasetArgs {
    fn spec(&self) -> Result<DatasetSpec> {
        let path = self
            .data
            .clone()
            .ok_or_else(|| CliError::Config("--data is required".into()))?;
        Ok(match self.format {
            Format::Tu => {
                let name = match &self.name {
                    Some(n) => n.clone(),
                    None => path
                        .file_name()
                        .and_then(|n| n.to_str())
                        .map(str::to_owned)
                        .ok_or_else(|| CliError::Config("--name is required for --format tu".into()))?,
                };
                DatasetSpec::Tu { path, name }
            }
            Format::Edges => DatasetSpec::Edges { path },
            Format::Bipartite => DatasetSpec::Bipartite { path },
        })
    }
}

#[derive(Args)]
struct ExperimentArgs {
    /// Full experiment configuration as JSON; other experiment flags are ignored.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    dataset: DatasetArgs,
    /// benchmark6, cdr or bio.
    #[arg(long, default_value = "benchmark6")]
    features: String,
    /// Percentile threshold for bipartite weights.
    #[arg(long, default_value_t = netclass::bipartite::DEFAULT_Q)]
    q: f64,
    /// File of network ids to leave out (one per line).
    #[arg(long)]
    exclude: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = ClassifierArg::Rf)]
    classifier: ClassifierArg,
    #[arg(long, default_value_t = netclass::classify::DEFAULT_TREES)]
    trees: usize,
    #[arg(long)]
    mtry: Option<usize>,
    /// Neighbors for knn.
    #[arg(long, default_value_t = netclass::classify::DEFAULT_K)]
    k: usize,
    /// Clusters for kmeans (default: number of classes).
    #[arg(long)]
    clusters: Option<usize>,
    #[arg(long, default_value_t = 10)]
    restarts: usize,
    #[arg(long, value_enum, default_value_t = ProtocolKind::Cv)]
    protocol: ProtocolKind,
    #[arg(long, default_value_t = 10)]
    folds: usize,
    /// Training ids for the explicit protocol.
    #[arg(long)]
    train: Option<PathBuf>,
    /// Test ids for the explicit protocol.
    #[arg(long)]
    test: Option<PathBuf>,
    /// Flag features correlated above this |rho| as redundant (0 disables).
    #[arg(long, default_value_t = 0.9)]
    collinearity: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum ClassifierArg {
    Rf,
    Knn,
    Kmeans,
}

impl ExperimentArgs {
    fn config(&self, seed: Option<u64>) -> Result<ExperimentConfig> {
        if let Some(path) = &self.config {
            let text = fs::read_to_string(path).map_err(|e| netclass::Error::io(path, e))?;
            let mut config: ExperimentConfig =
                serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            if let Some(seed) = seed {
                config.seed = seed;
            }
            return Ok(config);
        }
        let feature_set: FeatureSet = self.features.parse()?;
        let mut config = ExperimentConfig::new(self.dataset.spec()?, feature_set);
        config.classifier = ClassifierConfig {
            classifier: match self.classifier {
                ClassifierArg::Rf => ClassifierKind::Rf,
                ClassifierArg::Knn => ClassifierKind::Knn,
                ClassifierArg::Kmeans => ClassifierKind::Kmeans,
            },
            trees: self.trees,
            mtry: self.mtry,
            k: self.k,
            clusters: self.clusters,
            restarts: self.restarts,
        };
        config.protocol = match self.protocol {
            ProtocolKind::Cv => Protocol::Cv { folds: self.folds },
            ProtocolKind::Parity => Protocol::Parity,
            ProtocolKind::Explicit => {
                let list = |p: &Option<PathBuf>, flag: &str| -> Result<Vec<String>> {
                    let p = p
                        .as_ref()
                        .ok_or_else(|| CliError::Config(format!("--protocol explicit needs {flag}")))?;
                    Ok(read_id_list(p)?)
                };
                Protocol::Explicit {
                    train: list(&self.train, "--train")?,
                    test: list(&self.test, "--test")?,
                }
            }
        };
        if let Some(path) = &self.exclude {
            config.exclude = read_id_list(path)?;
        }
        config.threshold_q = self.q;
        config.distribution = DistributionOptions::default();
        config.collinearity = (self.collinearity > 0.0).then_some(self.collinearity);
        config.seed = seed.unwrap_or(0);
        Ok(config)
    }
}

fn require_out(out: &Option<PathBuf>) -> Result<&Path> {
    out.as_deref()
        .ok_or_else(|| CliError::Config("--out is required for this command".into()))
}

fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Config("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(e.to_string()))?;
    }
    let seed = cli.seed.unwrap_or(0);
    match &cli.command {
        Command::Fetch { name, dest, sha256, url } => {
            let url = url.clone().unwrap_or_else(|| fetch::default_url(name));
            fetch::fetch(name, &url, dest, sha256.as_deref())
        }
        Command::Extract(args) => {
            let config = args.config(cli.seed)?;
            let ex = pipeline::run_extract(&config)?;
            match &cli.out {
                Some(out) => {
                    prepare_out_dir(out)?;
                    write_json(out.join("config.json"), &config)?;
                    pipeline::write_features(out, &ex.extraction.matrix)?;
                }
                None => ex.extraction.matrix.write_csv(std::io::stdout().lock())?,
            }
            Ok(())
        }
        Command::Eval(args) => {
            let config = args.config(cli.seed)?;
            let report = pipeline::run_eval(&config, require_out(&cli.out)?)?;
            for w in &report.warnings {
                eprintln!("warning: {w}");
            }
            say(&format!(
                "accuracy {:.4} (sd {:.4}, se {:.4}) over {} items; majority rate {:.4}",
                report.accuracy, report.accuracy_sd, report.accuracy_se, report.n_items, report.majority_rate
            ));
            Ok(())
        }
        Command::Importance(args) => {
            let config = args.config(cli.seed)?;
            let report = pipeline::run_importance(&config, require_out(&cli.out)?)?;
            for f in &report.importances {
                let note = f.redundant_with.as_ref().map(|r| format!("  (redundant with {r})")).unwrap_or_default();
                say(&format!("{:<14} {:>7.3}%{note}", f.feature, f.percent));
            }
            Ok(())
        }
        Command::FitDist { dataset, model: DistModel::Lognormal } => {
            let spec = dataset.spec()?;
            let Dataset::Unipartite(c) = load_dataset(&spec)? else {
                return Err(CliError::Config("fit-dist needs a unipartite dataset".into()));
            };
            let fits = fit_degree_distributions(&c, seed)?;
            match &cli.out {
                Some(out) => {
                    prepare_out_dir(out)?;
                    write_json(out.join("fits.json"), &fits)?;
                    let path = out.join("histogram.csv");
                    let file = fs::File::create(&path).map_err(|e| netclass::Error::io(&path, e))?;
                    let mut w = csv_writer(file);
                    w.write_record(["graph_id", "degree", "empirical", "fitted"]).map_err(netclass::Error::from)?;
                    for (fit, g) in fits.iter().zip(&c.graphs) {
                        for row in degree_histogram(&fit.graph_id, g, &fit.fit) {
                            w.write_record([
                                row.graph_id,
                                row.degree.to_string(),
                                row.empirical.to_string(),
                                row.fitted.to_string(),
                            ])
                            .map_err(netclass::Error::from)?;
                        }
                    }
                    w.flush().map_err(|e| netclass::Error::io(&path, e))?;
                }
                None => say(&serde_json::to_string_pretty(&fits)?),
            }
            Ok(())
        }
        Command::Sample { graph, attributes, kind, radius, min_size, count, zip } => {
            let (g, _) = load_edge_list(graph, attributes.as_deref())?;
            let mut results = Vec::new();
            match kind {
                SampleKind::Snowball => {
                    for k in 0..*count {
                        let s = snowball(&g, *radius, *min_size, &mut rng::stream(seed, k as u64))?;
                        results.push(serde_json::json!({
                            "kind": "snowball",
                            "radius": radius,
                            "seed_node": g.id(s.seed_node.unwrap()),
                            "size": s.len(),
                            "nodes": s.ids(&g),
                        }));
                    }
                }
                SampleKind::Zip => {
                    if g.attributes().is_none() {
                        return Err(CliError::Config("zip subsamples need --attributes".into()));
                    }
                    let zips = match zip {
                        Some(z) => vec![z.clone()],
                        None => zip_values(&g),
                    };
                    for z in zips {
                        results.push(match attribute_subsample(&g, &z, *min_size) {
                            ZipSubsample::Accepted(s) => serde_json::json!({
                                "kind": "zip", "zip": z, "accepted": true, "size": s.len(), "nodes": s.ids(&g),
                            }),
                            ZipSubsample::Rejected { size, .. } => serde_json::json!({
                                "kind": "zip", "zip": z, "accepted": false, "size": size,
                            }),
                        });
                    }
                }
            }
            let text = serde_json::to_string_pretty(&results)? + "\n";
            match &cli.out {
                Some(out) => fs::write(out, text).map_err(|e| netclass::Error::io(out, e))?,
                None => say(text.trim_end()),
            }
            Ok(())
        }
        Command::SamplingRegression { input, n_perm } => {
            let file = fs::File::open(input).map_err(|e| netclass::Error::io(input, e))?;
            let rows = read_study_csv(file)?;
            let (fit, test) = run_sampling_regression(&rows, *n_perm, seed)?;
            let report = serde_json::json!({
                "beta0": fit.beta0, "beta1": fit.beta1, "beta2": fit.beta2,
                "objective": fit.objective, "collinear": fit.collinear, "solver": fit.solver,
                "permutation": test,
            });
            let text = serde_json::to_string_pretty(&report)? + "\n";
            match &cli.out {
                Some(out) => fs::write(out, text).map_err(|e| netclass::Error::io(out, e))?,
                None => say(text.trim_end()),
            }
            Ok(())
        }
        Command::SamplingStudy { data, preset, radii, per_radius, min_size, folds, trees, n_perm } => {
            let out = require_out(&cli.out)?;
            let (days, combined) = match (data, preset) {
                (Some(path), _) => {
                    let Dataset::Unipartite(days) = load_dataset(&DatasetSpec::Edges { path: path.clone() })? else {
                        unreachable!()
                    };
                    let combined = combine_days(&days);
                    (days, combined)
                }
                (None, Some(name)) => {
                    let s = generate_synthetic_cdr(&SynthConfig::preset(name, seed)?)?;
                    (s.days, s.combined)
                }
                (None, None) => return Err(CliError::Config("give --data or --preset".into())),
            };
            let config = StudyConfig {
                radii: radii.clone(),
                snowballs_per_radius: *per_radius,
                min_size: *min_size,
                folds: *folds,
                trees: *trees,
                n_perm: *n_perm,
                seed,
            };
            prepare_out_dir(out)?;
            write_json(out.join("config.json"), &config)?;
            let result = run_sampling_study(&days, &combined, &config)?;
            let path = out.join("study.csv");
            let file = fs::File::create(&path).map_err(|e| netclass::Error::io(&path, e))?;
            write_study_csv(&result.rows, file)?;
            write_json(out.join("report.json"), &result)?;
            say(&format!(
                "beta1 {:.6} beta2 {:.6} permutation p {:.4} ({} subsamples)",
                result.fit.beta1,
                result.fit.beta2,
                result.permutation.pvalue,
                result.rows.len()
            ));
            Ok(())
        }
        Command::SynthCdr { preset, config, days, population } => {
            let out = require_out(&cli.out)?;
            let mut synth = match config {
                Some(path) => {
                    let text = fs::read_to_string(path).map_err(|e| netclass::Error::io(path, e))?;
                    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?
                }
                None => SynthConfig::preset(preset, seed)?,
            };
            if let Some(d) = days {
                synth.days = *d;
            }
            if let Some(p) = population {
                synth.population = *p;
            }
            if let Some(s) = cli.seed {
                synth.seed = s;
            }
            let generated = generate_synthetic_cdr(&synth)?;
            prepare_out_dir(out)?;
            write_edge_collection(out, &generated.days)?;
            write_json(out.join("synth_config.json"), &synth)?;
            say(&format!("{} daily networks -> {}", generated.days.len(), out.display()));
            Ok(())
        }
    }
}

/// Prints a line to stdout; a closed pipe is not an error.
fn say(line: &str) {
    use std::io::Write;
    let _ = writeln!(std::io::stdout().lock(), "{line}");
}

fn csv_writer<W: std::io::Write>(w: W) -> csv::Writer<W> {
    csv::Writer::from_writer(w)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("netclass: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
