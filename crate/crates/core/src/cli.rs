//! The `credal` command line: network files, `infer`, `generate` and
//! `benchmark`.
//!
//! Exit codes: 0 success, 1 usage, 2 invalid input, 3 evidence with zero
//! probability, 4 resource cap exceeded.

use std::ffi::OsString;
use std::io::Write;
use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use indexmap::IndexMap;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::ar::propagate;
use crate::ar_plus::{propagate_plus_detailed, VertexBudget, DEFAULT_MAX_VERTICES};
use crate::bnb::{solve_interval, Bounder, Mode, SolveConfig};
use crate::error::InferenceError;
use crate::exact::{exhaustive, DEFAULT_EXHAUSTIVE_CAP};
use crate::harness::{
    network2, random_polytree, run_ensemble, Algorithm, EnsembleConfig, GeneratorConfig, QuerySpec, QueryTarget, Skeleton,
};
use crate::local_search::multistart;
use crate::model::{
    decode_config, ConditionalCredalTable, CredalNetwork, Direction, Distribution, Evidence, Variable,
    NORMALIZATION_TOLERANCE,
};

/// Failure of a command, carrying its exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Inference(#[from] InferenceError),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Input(_) | CliError::Io { .. } => 2,
            CliError::Inference(InferenceError::ZeroEvidence) => 3,
            CliError::Inference(InferenceError::CapExceeded { .. }) => 4,
            CliError::Inference(_) => 2,
        }
    }
}

/// On-disk network document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkFile {
    pub variables: Vec<VariableEntry>,
    /// Variable name, then hyphen-joined parent labels, then vertex rows.
    pub credal_sets: IndexMap<String, IndexMap<String, Vec<Vec<f64>>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VariableEntry {
    pub name: String,
    pub categories: Vec<String>,
    #[serde(default)]
    pub parents: Vec<String>,
}

fn config_keys(variables: &[Variable], parents: &[usize]) -> Vec<String> {
    let radices: Vec<usize> = parents.iter().map(|&p| variables[p].cardinality()).collect();
    let count: usize = radices.iter().product();
    (0..count)
        .map(|c| {
            let digits = decode_config(c, &radices);
            parents.iter().zip(digits).map(|(&p, d)| variables[p].categories()[d].as_str()).collect::<Vec<_>>().join("-")
        })
        .collect()
}

impl NetworkFile {
    pub fn from_network(net: &CredalNetwork) -> Self {
        let variables = net
            .variables()
            .iter()
            .enumerate()
            .map(|(v, var)| VariableEntry {
                name: var.name().to_string(),
                categories: var.categories().to_vec(),
                parents: net.parents(v).iter().map(|&p| net.variable(p).name().to_string()).collect(),
            })
            .collect();
        let mut credal_sets = IndexMap::new();
        for (v, var) in net.variables().iter().enumerate() {
            let table = net.table(v);
            let keys = config_keys(net.variables(), table.parents());
            let sets = keys
                .into_iter()
                .zip(table.sets())
                .map(|(k, list)| (k, list.iter().map(|d| d.probs().to_vec()).collect()))
                .collect();
            credal_sets.insert(var.name().to_string(), sets);
        }
        NetworkFile { variables, credal_sets }
    }

    pub fn to_network(&self) -> Result<CredalNetwork, CliError> {
        let bad = |msg: String| CliError::Input(msg);
        let names: Vec<&str> = self.variables.iter().map(|v| v.name.as_str()).collect();
        for (i, name) in names.iter().enumerate() {
            if names[..i].contains(name) {
                return Err(bad(format!("variables[{i}]: duplicate name {name:?}")));
            }
        }
        let variables: Vec<Variable> =
            self.variables.iter().map(|v| Variable::new(v.name.as_str(), v.categories.clone())).collect();
        let mut parents = Vec::with_capacity(variables.len());
        for (i, entry) in self.variables.iter().enumerate() {
            if entry.categories.is_empty() {
                return Err(bad(format!("variable {:?}: no categories", entry.name)));
            }
            let ids = entry
                .parents
                .iter()
                .map(|p| {
                    names
                        .iter()
                        .position(|n| n == p)
                        .ok_or_else(|| bad(format!("variable {:?}: unknown parent {p:?}", entry.name)))
                })
                .collect::<Result<Vec<_>, _>>()?;
            if ids.contains(&i) {
                return Err(bad(format!("variable {:?}: lists itself as a parent", entry.name)));
            }
            parents.push(ids);
        }
        for name in self.credal_sets.keys() {
            if !names.contains(&name.as_str()) {
                return Err(bad(format!("credal_sets: unknown variable {name:?}")));
            }
        }
        let mut tables = Vec::with_capacity(variables.len());
        for (v, entry) in self.variables.iter().enumerate() {
            let given = self
                .credal_sets
                .get(&entry.name)
                .ok_or_else(|| bad(format!("credal_sets: missing variable {:?}", entry.name)))?;
            let keys = config_keys(&variables, &parents[v]);
            for (i, k) in keys.iter().enumerate() {
                if keys[..i].contains(k) {
                    return Err(bad(format!("variable {:?}: configuration key {k:?} is ambiguous", entry.name)));
                }
            }
            for k in given.keys() {
                if !keys.contains(k) {
                    return Err(bad(format!("variable {:?}: unknown configuration {k:?}", entry.name)));
                }
            }
            let card = entry.categories.len();
            let mut sets = Vec::with_capacity(keys.len());
            for k in &keys {
                let rows = given.get(k).ok_or_else(|| bad(format!("variable {:?}: missing configuration {k:?}", entry.name)))?;
                if rows.is_empty() {
                    return Err(bad(format!("variable {:?}, configuration {k:?}: no vertices", entry.name)));
                }
                let mut list = Vec::with_capacity(rows.len());
                for (r, row) in rows.iter().enumerate() {
                    let here = |what: String| bad(format!("variable {:?}, configuration {k:?}, row {r}: {what}", entry.name));
                    if row.len() != card {
                        return Err(here(format!("has {} entries, expected {card}", row.len())));
                    }
                    let sum: f64 = row.iter().sum();
                    if (sum - 1.0).abs() > NORMALIZATION_TOLERANCE {
                        return Err(here(format!("sums to {sum}, expected 1")));
                    }
                    list.push(Distribution::new(row.clone()).map_err(|e| here(e.to_string()))?);
                }
                sets.push(list);
            }
            tables.push(ConditionalCredalTable::new(v, parents[v].clone(), sets));
        }
        CredalNetwork::new(variables, tables).map_err(|e| bad(e.to_string()))
    }
}

pub fn parse_network_str(text: &str) -> Result<CredalNetwork, CliError> {
    let file: NetworkFile = serde_json::from_str(text).map_err(|e| CliError::Input(format!("malformed network: {e}")))?;
    file.to_network()
}

pub fn parse_network(path: &Path) -> Result<CredalNetwork, CliError> {
    parse_network_str(&read(path)?)
}

/// The network document, pretty printed, with a trailing newline.
pub fn network_to_string(net: &CredalNetwork) -> String {
    let mut text = serde_json::to_string_pretty(&NetworkFile::from_network(net)).expect("network serializes");
    text.push('\n');
    text
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.display().to_string(), source })
}

fn digest(bytes: &[u8]) -> String {
    format!("sha256:{}", hex::encode(Sha256::digest(bytes)))
}

fn parse_range(text: &str) -> Result<RangeInclusive<usize>, String> {
    let (lo, hi) = match text.split_once("..") {
        Some((lo, hi)) => (lo.trim(), hi.trim().trim_start_matches('=')),
        None => (text.trim(), text.trim()),
    };
    let lo: usize = lo.parse().map_err(|_| format!("bad range {text:?}, expected LO..HI"))?;
    let hi: usize = hi.parse().map_err(|_| format!("bad range {text:?}, expected LO..HI"))?;
    if lo == 0 || lo > hi {
        return Err(format!("bad range {text:?}: need 1 <= LO <= HI"));
    }
    Ok(lo..=hi)
}

fn parse_algorithm(text: &str) -> Result<Algorithm, String> {
    text.parse().map_err(|_| {
        let names: Vec<&str> = Algorithm::ALL.iter().map(|a| a.name()).collect();
        format!("unknown algorithm {text:?}; expected one of {}", names.join(", "))
    })
}

#[derive(Debug, Parser)]
#[command(name = "credal", version, about = "Inference in polytree-shaped credal networks")]
struct Cli {
    /// Worker threads; 0 uses every available core.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Bounds on p(query | evidence) for every query category.
    Infer(InferArgs),
    /// Writes a random polytree network file.
    Generate(GenerateArgs),
    /// Runs a seeded ensemble and reports error, interval length and cost.
    Benchmark(BenchmarkArgs),
}

#[derive(Debug, Args)]
struct InferArgs {
    #[arg(long)]
    network: PathBuf,
    #[arg(long)]
    query: String,
    /// Observations as VAR=CAT,VAR=CAT.
    #[arg(long, default_value = "")]
    evidence: String,
    #[arg(long, value_parser = parse_algorithm)]
    algorithm: Algorithm,
    #[arg(long, default_value_t = 0.0)]
    epsilon: f64,
    #[arg(long, default_value_t = DEFAULT_MAX_VERTICES)]
    max_vertices: usize,
    #[arg(long, default_value_t = 8)]
    restarts: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Most vertex selections the exhaustive algorithm may enumerate.
    #[arg(long, default_value_t = DEFAULT_EXHAUSTIVE_CAP)]
    cap: u64,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SkeletonKind {
    Random,
    Fig1Like,
    Collider,
}

#[derive(Debug, Args)]
struct GeneratorArgs {
    #[arg(long, default_value_t = 8)]
    nodes: usize,
    #[arg(long, default_value = "2..3", value_parser = parse_range)]
    categories: RangeInclusive<usize>,
    #[arg(long, default_value = "2..3", value_parser = parse_range)]
    vertices: RangeInclusive<usize>,
    #[arg(long, value_enum, default_value_t = SkeletonKind::Random)]
    skeleton: SkeletonKind,
}

impl GeneratorArgs {
    fn config(&self) -> Result<GeneratorConfig, CliError> {
        let config = match self.skeleton {
            SkeletonKind::Random => GeneratorConfig::new(self.nodes, self.categories.clone(), self.vertices.clone()),
            SkeletonKind::Fig1Like => {
                GeneratorConfig::with_skeleton(Skeleton::fig1_like(), self.categories.clone(), self.vertices.clone())
            }
            SkeletonKind::Collider => {
                let s = Skeleton::new(vec!["X".into(), "Y".into(), "Z".into()], vec![vec![], vec![0, 2], vec![]])?;
                GeneratorConfig::with_skeleton(s, self.categories.clone(), self.vertices.clone())
            }
        };
        config.check()?;
        Ok(config)
    }
}

#[derive(Debug, Args)]
struct GenerateArgs {
    #[command(flatten)]
    generator: GeneratorArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BenchmarkArgs {
    #[arg(long, default_value_t = 30)]
    ensemble_size: usize,
    #[command(flatten)]
    generator: GeneratorArgs,
    /// Comma-separated algorithm names.
    #[arg(long, default_value = "ar,ar-plus", value_delimiter = ',', value_parser = parse_algorithm)]
    algorithms: Vec<Algorithm>,
    /// Query variable name; every variable when absent.
    #[arg(long)]
    query: Option<String>,
    #[arg(long, default_value_t = 0)]
    category: usize,
    #[arg(long, default_value_t = DEFAULT_MAX_VERTICES)]
    max_vertices: usize,
    #[arg(long, default_value_t = 8)]
    restarts: usize,
    /// Skip exact references (no relative errors).
    #[arg(long)]
    no_reference: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    output: Option<PathBuf>,
}

fn emit(output: Option<&Path>, text: &str) -> Result<(), CliError> {
    match output {
        Some(path) => std::fs::write(path, text).map_err(|source| CliError::Io { path: path.display().to_string(), source }),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes()).map_err(|source| CliError::Io { path: "<stdout>".into(), source })
        }
    }
}

fn to_text(value: &Value) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("report serializes");
    text.push('\n');
    text
}

fn budget(max_vertices: usize) -> Result<VertexBudget, CliError> {
    VertexBudget::new(max_vertices).map_err(|e| CliError::Usage(e.to_string()))
}

fn infer(args: &InferArgs) -> Result<Value, CliError> {
    let start = Instant::now();
    let bytes = read(&args.network)?;
    let net = parse_network_str(&bytes)?;
    let query = net.find(&args.query).ok_or_else(|| CliError::Input(format!("unknown variable {:?}", args.query)))?;
    let evidence = Evidence::parse(&net, &args.evidence).map_err(|e| CliError::Input(e.to_string()))?;
    if !(args.epsilon >= 0.0) {
        return Err(CliError::Usage("--epsilon must be nonnegative".into()));
    }
    let budget = budget(args.max_vertices)?;
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let labels = net.variable(query).categories();
    let mut results = Vec::with_capacity(labels.len());
    let mut stats = serde_json::Map::new();
    let interval = |label: &str, lower: f64, upper: f64| json!({ "category": label, "lower": lower, "upper": upper });

    match args.algorithm {
        Algorithm::Ar => {
            let bounds = propagate(&net, query, &evidence)?;
            for (label, b) in labels.iter().zip(bounds.bounds()) {
                results.push(interval(label, b.lower, b.upper));
            }
        }
        Algorithm::ArPlus => {
            let r = propagate_plus_detailed(&net, query, &evidence, budget)?;
            for (label, b) in labels.iter().zip(r.bounds.bounds()) {
                results.push(interval(label, b.lower, b.upper));
            }
            stats.insert("sites".into(), json!(r.sites));
            stats.insert("fallbacks".into(), json!(r.fallbacks));
        }
        Algorithm::LocalSearch => {
            for (x, label) in labels.iter().enumerate() {
                let low = multistart(&net, query, x, &evidence, Direction::Min, args.restarts, &mut rng)?;
                let high = multistart(&net, query, x, &evidence, Direction::Max, args.restarts, &mut rng)?;
                results.push(interval(label, low.value, high.value));
            }
        }
        Algorithm::Bnb | Algorithm::BnbAr => {
            let bounder = if args.algorithm == Algorithm::Bnb { Bounder::ArPlus(budget) } else { Bounder::Ar };
            let config = SolveConfig { epsilon: args.epsilon, bounder, restarts: args.restarts, ..SolveConfig::default() };
            let (mut nodes, mut gap) = (0u64, 0.0f64);
            for (x, label) in labels.iter().enumerate() {
                let (_, low, high) = solve_interval(&net, query, x, &evidence, &config, &mut rng)?;
                let mut row = interval(label, low.value, high.value);
                let exact = low.mode == Mode::Exact && high.mode == Mode::Exact;
                row["mode"] = json!(if exact { "exact" } else { "approximate" });
                row["outer"] = json!([low.bound, high.bound]);
                row["nodes_expanded"] = json!([low.stats.nodes_expanded, high.stats.nodes_expanded]);
                nodes += low.stats.nodes_expanded + high.stats.nodes_expanded;
                gap = gap.max(low.stats.gap).max(high.stats.gap);
                results.push(row);
            }
            stats.insert("nodes_expanded".into(), json!(nodes));
            stats.insert("gap".into(), json!(gap));
        }
        Algorithm::Exhaustive => {
            let r = exhaustive(&net, query, &evidence, args.cap)?;
            for (label, b) in labels.iter().zip(r.bounds.bounds()) {
                results.push(interval(label, b.lower, b.upper));
            }
            stats.insert("selections".into(), json!(r.selections));
            stats.insert("skipped".into(), json!(r.skipped));
        }
    }
    stats.insert("wall_time_ms".into(), json!(start.elapsed().as_secs_f64() * 1e3));
    let evidence_map: serde_json::Map<String, Value> = evidence
        .iter()
        .map(|(v, c)| (net.variable(v).name().to_string(), json!(net.variable(v).categories()[c])))
        .collect();
    Ok(json!({
        "tool": "credal",
        "version": env!("CARGO_PKG_VERSION"),
        "command": "infer",
        "input_digest": digest(bytes.as_bytes()),
        "algorithm": args.algorithm.name(),
        "query": args.query,
        "evidence": evidence_map,
        "results": results,
        "stats": stats,
    }))
}

fn generate(args: &GenerateArgs) -> Result<String, CliError> {
    let config = args.generator.config()?;
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let net = if args.generator.skeleton == SkeletonKind::Collider && config.categories.start() == config.categories.end() {
        network2(*config.categories.start(), *config.vertices.start(), &mut rng)?
    } else {
        random_polytree(&config, &mut rng)?
    };
    Ok(network_to_string(&net))
}

fn benchmark(args: &BenchmarkArgs) -> Result<Value, CliError> {
    let start = Instant::now();
    if args.algorithms.is_empty() {
        return Err(CliError::Usage("--algorithms is empty".into()));
    }
    let generator = args.generator.config()?;
    let mut config = EnsembleConfig::new(generator, args.ensemble_size);
    config.budget = budget(args.max_vertices)?;
    config.restarts = args.restarts;
    config.reference = !args.no_reference;
    let target = args.query.clone().map_or(QueryTarget::All, QueryTarget::Named);
    let queries = [QuerySpec { target, category: args.category }];
    let echo = json!({
        "ensemble_size": args.ensemble_size,
        "nodes": config.generator.skeleton.as_ref().map_or(args.generator.nodes, Skeleton::len),
        "skeleton": args.generator.skeleton.to_possible_value().unwrap().get_name(),
        "categories": [config.generator.categories.start(), config.generator.categories.end()],
        "vertices": [config.generator.vertices.start(), config.generator.vertices.end()],
        "algorithms": args.algorithms.iter().map(|a| a.name()).collect::<Vec<_>>(),
        "query": args.query,
        "category": args.category,
        "max_vertices": args.max_vertices,
        "restarts": args.restarts,
        "reference": config.reference,
        "seed": args.seed,
    });
    let report = run_ensemble(&config, &args.algorithms, &queries, &mut ChaCha8Rng::seed_from_u64(args.seed))?;
    Ok(json!({
        "tool": "credal",
        "version": env!("CARGO_PKG_VERSION"),
        "command": "benchmark",
        "input_digest": digest(echo.to_string().as_bytes()),
        "config": echo,
        "summary": report.summary,
        "rows": report.rows,
        "wall_time_ms": start.elapsed().as_secs_f64() * 1e3,
    }))
}

fn execute(command: &Command) -> Result<(), CliError> {
    match command {
        Command::Infer(args) => emit(args.output.as_deref(), &to_text(&infer(args)?)),
        Command::Generate(args) => emit(args.output.as_deref(), &generate(args)?),
        Command::Benchmark(args) => emit(args.output.as_deref(), &to_text(&benchmark(args)?)),
    }
}

/// Runs the command line given by `args` (program name first) and returns
/// the process exit code.
pub fn run<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build() {
        Ok(pool) => pool,
        Err(e) => {
            eprintln!("credal: {e}");
            return 1;
        }
    };
    match pool.install(|| execute(&cli.command)) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("credal: {e}");
            e.exit_code()
        }
    }
}

pub fn main() -> ExitCode {
    ExitCode::from(run(std::env::args_os()))
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
  "variables": [{ "name": "X", "categories": ["a", "b"], "parents": [] }],
  "credal_sets": { "X": { "": [[0.25, 0.75], [0.5, 0.5]] } }
}"#;

    #[test]
    fn minimal_file() {
        let net = parse_network_str(MINIMAL).unwrap();
        assert_eq!(net.len(), 1);
        assert_eq!(net.vertices(crate::model::LocalSetId::new(0, 0)).len(), 2);
    }

    #[test]
    fn bad_row_is_named() {
        let text = MINIMAL.replace("[0.5, 0.5]", "[0.5, 0.4]");
        let err = parse_network_str(&text).unwrap_err().to_string();
        assert!(err.contains("\"X\"") && err.contains("configuration \"\"") && err.contains("row 1"), "{err}");
    }

    #[test]
    fn keys_follow_parent_order() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let net = network2(2, 2, &mut rng).unwrap();
        let file = NetworkFile::from_network(&net);
        let keys: Vec<&str> = file.credal_sets["Y"].keys().map(String::as_str).collect();
        assert_eq!(keys, ["x0-z0", "x0-z1", "x1-z0", "x1-z1"]);
        assert_eq!(parse_network_str(&network_to_string(&net)).unwrap(), net);
    }

    #[test]
    fn ranges() {
        assert_eq!(parse_range("2..4"), Ok(2..=4));
        assert_eq!(parse_range("3"), Ok(3..=3));
        assert_eq!(parse_range("2..=3"), Ok(2..=3));
        assert!(parse_range("4..2").is_err() && parse_range("0..2").is_err() && parse_range("x").is_err());
    }

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::Inference(InferenceError::ZeroEvidence).exit_code(), 3);
        assert_eq!(CliError::Inference(InferenceError::CapExceeded { count: "9".into(), cap: 1 }).exit_code(), 4);
        assert_eq!(run(["credal", "infer", "--algorithm", "nosuch"]), 1);
        assert_eq!(run(["credal", "--help"]), 0);
    }
}
