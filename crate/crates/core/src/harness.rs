//! Random networks and seeded benchmark ensembles.
//!
//! Generated skeletons are uniform random labelled trees (a random Prüfer
//! sequence) with every edge oriented by a fair coin. Vertices are drawn
//! uniformly from the simplex.

use std::fmt;
use std::ops::RangeInclusive;
use std::str::FromStr;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::ar::propagate;
use crate::ar_plus::{propagate_plus, VertexBudget};
use crate::bnb::{solve_interval, Bounder, SolveConfig};
use crate::error::InferenceError;
use crate::exact::{exhaustive, DEFAULT_EXHAUSTIVE_CAP};
use crate::geometry::sample_simplex;
use crate::local_search::multistart;
use crate::model::{
    ConditionalCredalTable, CredalNetwork, Direction, Distribution, Evidence, ProbabilityInterval, VarId, Variable,
};

/// Fixed graph for generated networks: names and parent lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Skeleton {
    names: Vec<String>,
    parents: Vec<Vec<VarId>>,
}

impl Skeleton {
    pub fn new(names: Vec<String>, parents: Vec<Vec<VarId>>) -> Result<Self, InferenceError> {
        if names.is_empty() || names.len() != parents.len() {
            return Err(InferenceError::Config("skeleton needs one parent list per name".into()));
        }
        // Validate the graph with binary singleton tables.
        let variables = names.iter().map(|n| Variable::with_cardinality(n.as_str(), 2)).collect();
        let tables = parents
            .iter()
            .enumerate()
            .map(|(v, ps)| {
                if ps.iter().any(|&p| p >= names.len()) {
                    return Err(InferenceError::Config(format!("parent index out of range for {}", names[v])));
                }
                let point = vec![Distribution::point_mass(2, 0)];
                Ok(ConditionalCredalTable::new(v, ps.clone(), vec![point; 1 << ps.len()]))
            })
            .collect::<Result<Vec<_>, _>>()?;
        CredalNetwork::new(variables, tables)?;
        Ok(Skeleton { names, parents })
    }

    /// Ten nodes with edges A→C, B→C, C→E, D→E, E→G, F→G, G→H, E→L, H→K.
    /// A made-up regression graph; not any published network.
    pub fn fig1_like() -> Self {
        let names: Vec<String> = ["A", "B", "C", "D", "E", "F", "G", "H", "K", "L"].map(String::from).into();
        let parents = vec![
            vec![],
            vec![],
            vec![0, 1],
            vec![],
            vec![2, 3],
            vec![],
            vec![4, 5],
            vec![6],
            vec![7],
            vec![4],
        ];
        Skeleton { names, parents }
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn parents(&self) -> &[Vec<VarId>] {
        &self.parents
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratorConfig {
    pub nodes: usize,
    pub categories: RangeInclusive<usize>,
    pub vertices: RangeInclusive<usize>,
    /// Use this graph instead of a random one; `nodes` is then ignored.
    pub skeleton: Option<Skeleton>,
}

impl GeneratorConfig {
    pub fn new(nodes: usize, categories: RangeInclusive<usize>, vertices: RangeInclusive<usize>) -> Self {
        GeneratorConfig { nodes, categories, vertices, skeleton: None }
    }

    pub fn with_skeleton(skeleton: Skeleton, categories: RangeInclusive<usize>, vertices: RangeInclusive<usize>) -> Self {
        GeneratorConfig { nodes: skeleton.len(), categories, vertices, skeleton: Some(skeleton) }
    }

    pub fn check(&self) -> Result<(), InferenceError> {
        let nodes = self.skeleton.as_ref().map_or(self.nodes, Skeleton::len);
        if nodes == 0 {
            return Err(InferenceError::Config("node count must be at least 1".into()));
        }
        if self.categories.is_empty() || *self.categories.start() == 0 {
            return Err(InferenceError::Config(format!("bad category range {:?}", self.categories)));
        }
        if self.vertices.is_empty() || *self.vertices.start() == 0 {
            return Err(InferenceError::Config(format!("bad vertex range {:?}", self.vertices)));
        }
        Ok(())
    }
}

/// Parent lists of a uniformly random labelled tree on `n` nodes with
/// randomly oriented edges.
pub fn random_skeleton<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<Vec<VarId>> {
    let mut parents = vec![Vec::new(); n];
    let mut edges = Vec::with_capacity(n.saturating_sub(1));
    if n == 2 {
        edges.push((0, 1));
    } else if n > 2 {
        let code: Vec<usize> = (0..n - 2).map(|_| rng.random_range(0..n)).collect();
        let mut degree = vec![1usize; n];
        for &c in &code {
            degree[c] += 1;
        }
        let mut leaves: std::collections::BTreeSet<usize> = (0..n).filter(|&v| degree[v] == 1).collect();
        for &c in &code {
            let leaf = leaves.pop_first().unwrap();
            edges.push((leaf, c));
            degree[c] -= 1;
            if degree[c] == 1 {
                leaves.insert(c);
            }
        }
        let a = leaves.pop_first().unwrap();
        let b = leaves.pop_first().unwrap();
        edges.push((a, b));
    }
    for (a, b) in edges {
        let (p, c) = if rng.random_bool(0.5) { (a, b) } else { (b, a) };
        parents[c].push(p);
    }
    for ps in &mut parents {
        ps.sort_unstable();
    }
    parents
}

/// A random polytree credal network, deterministic given the RNG state.
pub fn random_polytree<R: Rng + ?Sized>(config: &GeneratorConfig, rng: &mut R) -> Result<CredalNetwork, InferenceError> {
    config.check()?;
    let (names, parents) = match &config.skeleton {
        Some(s) => (s.names.clone(), s.parents.clone()),
        None => ((0..config.nodes).map(|i| format!("V{i}")).collect(), random_skeleton(config.nodes, rng)),
    };
    let cards: Vec<usize> = names.iter().map(|_| rng.random_range(config.categories.clone())).collect();
    let variables = names.iter().zip(&cards).map(|(n, &k)| Variable::with_cardinality(n.as_str(), k)).collect();
    let mut tables = Vec::with_capacity(names.len());
    for (v, ps) in parents.iter().enumerate() {
        let configs: usize = ps.iter().map(|&p| cards[p]).product();
        let mut sets = Vec::with_capacity(configs);
        for _ in 0..configs {
            let count = rng.random_range(config.vertices.clone());
            sets.push((0..count).map(|_| sample_simplex(cards[v], rng)).collect::<Result<Vec<_>, _>>()?);
        }
        tables.push(ConditionalCredalTable::new(v, ps.clone(), sets));
    }
    Ok(CredalNetwork::new(variables, tables)?)
}

/// The collider X → Y ← Z with random credal sets, every variable with
/// `categories` categories and every local set with `vertices` vertices.
pub fn network2<R: Rng + ?Sized>(categories: usize, vertices: usize, rng: &mut R) -> Result<CredalNetwork, InferenceError> {
    let skeleton = Skeleton::new(vec!["X".into(), "Y".into(), "Z".into()], vec![vec![], vec![0, 2], vec![]])?;
    random_polytree(&GeneratorConfig::with_skeleton(skeleton, categories..=categories, vertices..=vertices), rng)
}

/// `|approx − exact| / exact`; `Some(0)` when both are zero and `None`
/// when only the reference is zero.
pub fn relative_error(approx: f64, exact: f64) -> Option<f64> {
    let diff = (approx - exact).abs();
    if exact != 0.0 {
        Some(diff / exact.abs())
    } else if diff == 0.0 {
        Some(0.0)
    } else {
        None
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    Ar,
    ArPlus,
    LocalSearch,
    /// Branch and bound with A/R+ bounds.
    Bnb,
    /// Branch and bound with A/R bounds.
    BnbAr,
    Exhaustive,
}

impl Algorithm {
    pub const ALL: [Algorithm; 6] =
        [Algorithm::Ar, Algorithm::ArPlus, Algorithm::LocalSearch, Algorithm::Bnb, Algorithm::BnbAr, Algorithm::Exhaustive];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Ar => "ar",
            Algorithm::ArPlus => "ar-plus",
            Algorithm::LocalSearch => "local-search",
            Algorithm::Bnb => "bnb",
            Algorithm::BnbAr => "bnb-ar",
            Algorithm::Exhaustive => "exhaustive",
        }
    }

    /// Whether the interval encloses the exact one.
    pub fn is_outer(self) -> bool {
        !matches!(self, Algorithm::LocalSearch)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = InferenceError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| InferenceError::Config(format!("unknown algorithm {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum QueryTarget {
    Named(String),
    Index(VarId),
    All,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuerySpec {
    pub target: QueryTarget,
    pub category: usize,
}

impl QuerySpec {
    pub fn named(name: &str, category: usize) -> Self {
        QuerySpec { target: QueryTarget::Named(name.into()), category }
    }

    fn resolve(&self, net: &CredalNetwork) -> Result<Vec<VarId>, InferenceError> {
        match &self.target {
            QueryTarget::Named(n) => {
                net.find(n).map(|v| vec![v]).ok_or_else(|| InferenceError::Config(format!("no variable named {n:?}")))
            }
            QueryTarget::Index(v) if *v < net.len() => Ok(vec![*v]),
            QueryTarget::Index(v) => Err(InferenceError::UnknownVariable(*v)),
            QueryTarget::All => Ok((0..net.len()).collect()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleConfig {
    pub generator: GeneratorConfig,
    pub size: usize,
    pub budget: VertexBudget,
    pub restarts: usize,
    /// Compute exact references (exhaustive when the relevant strong
    /// extension has at most `exhaustive_limit` points, else bnb).
    pub reference: bool,
    pub exhaustive_limit: f64,
}

impl EnsembleConfig {
    pub fn new(generator: GeneratorConfig, size: usize) -> Self {
        EnsembleConfig {
            generator,
            size,
            budget: VertexBudget::default(),
            restarts: 8,
            reference: true,
            exhaustive_limit: (1u64 << 16) as f64,
        }
    }
}

/// One algorithm on one query category of one instance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InstanceRow {
    pub instance: usize,
    pub query: String,
    pub category: usize,
    pub algorithm: Algorithm,
    pub interval: Option<[f64; 2]>,
    pub exact: Option<[f64; 2]>,
    pub upper_relative_error: Option<f64>,
    pub lower_relative_error: Option<f64>,
    /// Branch-and-bound nodes for the upper and the lower optimum.
    pub nodes_expanded: Option<[u64; 2]>,
    /// Points of the strong extension over the query's relevant sets.
    pub potential_vertices: f64,
    pub wall_time_ms: f64,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlgorithmSummary {
    pub algorithm: Algorithm,
    pub rows: usize,
    pub failures: usize,
    /// Mean relative error of the upper bound.
    pub mean_relative_error: Option<f64>,
    pub mean_lower_relative_error: Option<f64>,
    /// Rows whose relative error is undefined (zero reference).
    pub undefined_errors: usize,
    pub mean_interval_length: Option<f64>,
    /// Median of upper-optimum nodes expanded.
    pub median_nodes_expanded: Option<f64>,
    /// Median of upper-optimum nodes expanded over potential vertices.
    pub median_node_ratio: Option<f64>,
    pub mean_wall_time_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchmarkReport {
    pub summary: Vec<AlgorithmSummary>,
    pub rows: Vec<InstanceRow>,
}

struct Outcome {
    interval: ProbabilityInterval,
    nodes: Option<[u64; 2]>,
    wall_ms: f64,
}

fn relevant_potential(net: &CredalNetwork, query: VarId) -> f64 {
    let relevant = net.relevant_variables(query, &Evidence::new());
    net.local_sets().filter(|id| relevant[id.variable]).map(|id| net.vertices(id).len() as f64).product()
}

fn run_algorithm(
    net: &CredalNetwork,
    query: VarId,
    category: usize,
    algorithm: Algorithm,
    config: &EnsembleConfig,
    seed: u64,
) -> Result<Outcome, InferenceError> {
    let evidence = Evidence::new();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let start = Instant::now();
    let mut nodes = None;
    let interval = match algorithm {
        Algorithm::Ar => propagate(net, query, &evidence)?[category],
        Algorithm::ArPlus => propagate_plus(net, query, &evidence, config.budget)?[category],
        Algorithm::LocalSearch => {
            let low = multistart(net, query, category, &evidence, Direction::Min, config.restarts, &mut rng)?;
            let high = multistart(net, query, category, &evidence, Direction::Max, config.restarts, &mut rng)?;
            ProbabilityInterval::new(low.value, high.value)
        }
        Algorithm::Bnb | Algorithm::BnbAr => {
            let bounder = if algorithm == Algorithm::Bnb { Bounder::ArPlus(config.budget) } else { Bounder::Ar };
            let solve = SolveConfig { bounder, restarts: config.restarts, ..SolveConfig::default() };
            let (interval, low, high) = solve_interval(net, query, category, &evidence, &solve, &mut rng)?;
            nodes = Some([high.stats.nodes_expanded, low.stats.nodes_expanded]);
            interval
        }
        Algorithm::Exhaustive => exhaustive(net, query, &evidence, DEFAULT_EXHAUSTIVE_CAP)?.bounds[category],
    };
    Ok(Outcome { interval, nodes, wall_ms: start.elapsed().as_secs_f64() * 1e3 })
}

fn run_instance(
    index: usize,
    base: u64,
    config: &EnsembleConfig,
    algorithms: &[Algorithm],
    queries: &[QuerySpec],
) -> Vec<InstanceRow> {
    let mut rng = ChaCha8Rng::seed_from_u64(base);
    rng.set_stream(index as u64);
    let failed = |query: String, category, algorithm, error: String| InstanceRow {
        instance: index,
        query,
        category,
        algorithm,
        interval: None,
        exact: None,
        upper_relative_error: None,
        lower_relative_error: None,
        nodes_expanded: None,
        potential_vertices: f64::NAN,
        wall_time_ms: 0.0,
        error: Some(error),
    };
    let net = match random_polytree(&config.generator, &mut rng) {
        Ok(net) => net,
        Err(e) => return algorithms.iter().map(|&a| failed(String::new(), 0, a, e.to_string())).collect(),
    };
    let seed = rng.random::<u64>();
    let mut rows = Vec::new();
    for spec in queries {
        let vars = match spec.resolve(&net) {
            Ok(v) => v,
            Err(e) => {
                rows.extend(algorithms.iter().map(|&a| failed(String::new(), spec.category, a, e.to_string())));
                continue;
            }
        };
        for q in vars {
            let name = net.variable(q).name().to_string();
            if spec.category >= net.cardinality(q) {
                let e = InferenceError::UnknownCategory { variable: name.clone(), category: spec.category };
                rows.extend(algorithms.iter().map(|&a| failed(name.clone(), spec.category, a, e.to_string())));
                continue;
            }
            let potential = relevant_potential(&net, q);
            let reference_run = config.reference.then(|| {
                let method = if potential <= config.exhaustive_limit { Algorithm::Exhaustive } else { Algorithm::Bnb };
                (method, run_algorithm(&net, q, spec.category, method, config, seed))
            });
            let reference = reference_run.as_ref().map(|(_, r)| match r {
                Ok(o) => Ok(o.interval),
                Err(e) => Err(e.to_string()),
            });
            for &a in algorithms {
                if let Some(Err(e)) = &reference {
                    rows.push(failed(name.clone(), spec.category, a, format!("reference failed: {e}")));
                    continue;
                }
                let exact = reference.as_ref().map(|r| *r.as_ref().unwrap());
                let owned;
                let result = match &reference_run {
                    Some((m, r)) if *m == a => r,
                    _ => {
                        owned = run_algorithm(&net, q, spec.category, a, config, seed);
                        &owned
                    }
                };
                let row = match result {
                    Ok(o) => InstanceRow {
                        instance: index,
                        query: name.clone(),
                        category: spec.category,
                        algorithm: a,
                        interval: Some([o.interval.lower, o.interval.upper]),
                        exact: exact.map(|x| [x.lower, x.upper]),
                        upper_relative_error: exact.and_then(|x| relative_error(o.interval.upper, x.upper)),
                        lower_relative_error: exact.and_then(|x| relative_error(o.interval.lower, x.lower)),
                        nodes_expanded: o.nodes,
                        potential_vertices: potential,
                        wall_time_ms: o.wall_ms,
                        error: None,
                    },
                    Err(e) => failed(name.clone(), spec.category, a, e.to_string()),
                };
                rows.push(row);
            }
        }
    }
    rows
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

/// Median; the mean of the two middle values for even counts.
pub fn median(mut values: Vec<f64>) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    let m = values.len() / 2;
    Some(if values.len() % 2 == 1 { values[m] } else { 0.5 * (values[m - 1] + values[m]) })
}

fn summarize(algorithm: Algorithm, rows: &[InstanceRow]) -> AlgorithmSummary {
    let mine: Vec<&InstanceRow> = rows.iter().filter(|r| r.algorithm == algorithm).collect();
    let ok: Vec<&InstanceRow> = mine.iter().copied().filter(|r| r.error.is_none()).collect();
    let undefined = ok
        .iter()
        .filter(|r| r.exact.is_some() && (r.upper_relative_error.is_none() || r.lower_relative_error.is_none()))
        .count();
    let nodes: Vec<(f64, f64)> =
        ok.iter().filter_map(|r| r.nodes_expanded.map(|n| (n[0] as f64, n[0] as f64 / r.potential_vertices))).collect();
    AlgorithmSummary {
        algorithm,
        rows: mine.len(),
        failures: mine.len() - ok.len(),
        mean_relative_error: mean(ok.iter().filter_map(|r| r.upper_relative_error)),
        mean_lower_relative_error: mean(ok.iter().filter_map(|r| r.lower_relative_error)),
        undefined_errors: undefined,
        mean_interval_length: mean(ok.iter().filter_map(|r| r.interval.map(|i| i[1] - i[0]))),
        median_nodes_expanded: median(nodes.iter().map(|n| n.0).collect()),
        median_node_ratio: median(nodes.iter().map(|n| n.1).collect()),
        mean_wall_time_ms: mean(ok.iter().map(|r| r.wall_time_ms)).unwrap_or(0.0),
    }
}

/// Generates `config.size` instances and runs every algorithm on every
/// query. Instances run in parallel; rows come back in instance order and
/// every instance derives its own RNG stream, so the report does not
/// depend on the thread count (timings aside).
pub fn run_ensemble<R: Rng + ?Sized>(
    config: &EnsembleConfig,
    algorithms: &[Algorithm],
    queries: &[QuerySpec],
    rng: &mut R,
) -> Result<BenchmarkReport, InferenceError> {
    if algorithms.is_empty() {
        return Err(InferenceError::Config("no algorithms to run".into()));
    }
    if queries.is_empty() {
        return Err(InferenceError::Config("no queries to run".into()));
    }
    config.generator.check()?;
    let base = rng.random::<u64>();
    let rows: Vec<InstanceRow> = (0..config.size)
        .into_par_iter()
        .map(|i| run_instance(i, base, config, algorithms, queries))
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect();
    let summary = algorithms.iter().map(|&a| summarize(a, &rows)).collect();
    Ok(BenchmarkReport { summary, rows })
}
