//! Depth-first branch-and-bound over vertex selections.
//!
//! A node fixes the vertices of a prefix of the branching order. Its bound
//! comes from an outer approximation on the network restricted by those
//! choices; the incumbent comes from local search and from the leaves.

use std::time::{Duration, Instant};

use rand::Rng;

use crate::ar::propagate;
use crate::ar_plus::{propagate_plus, VertexBudget};
use crate::error::InferenceError;
use crate::local_search::{multistart_with, NodeOrdering, Objective, DEFAULT_CYCLE_CAP};
use crate::model::{
    CredalNetwork, Direction, Evidence, LocalSetId, ProbabilityInterval, VarId, VertexSelection,
};

/// Additive slack under which a child cannot beat the incumbent.
pub const PRUNE_TOLERANCE: f64 = 1e-12;

/// Outer approximation used at interior nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bounder {
    ArPlus(VertexBudget),
    Ar,
}

impl Default for Bounder {
    fn default() -> Self {
        Bounder::ArPlus(VertexBudget::default())
    }
}

/// Order in which local sets are branched on.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum SetOrder {
    /// Larger vertex lists first; then sets of variables with fewer
    /// configurations; then by variable and configuration.
    LargestFirst,
    /// By depth (longest path from a root), then variable and
    /// configuration: ancestors come before descendants. Fixing the sets
    /// upstream of a message site first makes its bound exact early.
    #[default]
    Topological,
    /// Sets not listed are never branched on; they must not matter.
    Custom(Vec<LocalSetId>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveConfig {
    /// Stop once the global bound is within `epsilon` of the incumbent.
    pub epsilon: f64,
    pub bounder: Bounder,
    pub set_order: SetOrder,
    /// Local search restarts for the root incumbent.
    pub restarts: usize,
    /// Re-run local search from a leaf that improves the incumbent by more
    /// than this; `None` disables it.
    pub refresh_threshold: Option<f64>,
    /// Give up (approximate result) after this many expanded nodes.
    pub node_limit: Option<u64>,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            epsilon: 0.0,
            bounder: Bounder::default(),
            set_order: SetOrder::default(),
            restarts: 8,
            refresh_threshold: Some(1e-6),
            node_limit: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Exact,
    Approximate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveStats {
    /// Nodes taken off the stack and processed, leaves included.
    pub nodes_expanded: u64,
    pub leaves_evaluated: u64,
    /// Children discarded by their bound, or at removal from the stack.
    pub pruned: u64,
    pub bound_evaluations: u64,
    /// Local search runs that refreshed the incumbent.
    pub refreshes: u64,
    pub wall_time: Duration,
    /// Global bound minus incumbent at termination, as probabilities.
    pub gap: f64,
    /// `(incumbent, global bound)` after each change.
    pub trajectory: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub value: f64,
    pub witness: VertexSelection,
    pub mode: Mode,
    /// Outer bound on the optimum at termination.
    pub bound: f64,
    pub direction: Direction,
    pub stats: SolveStats,
}

struct Node {
    selection: VertexSelection,
    depth: usize,
    /// Outer bound, in score space (larger is better).
    score: f64,
}

fn branching_sets(net: &CredalNetwork, objective: &Objective, order: &SetOrder) -> Result<Vec<LocalSetId>, InferenceError> {
    let active: Vec<LocalSetId> = net.local_sets().filter(|&id| objective.is_active(id)).collect();
    Ok(match order {
        SetOrder::LargestFirst => {
            let mut ids = active;
            ids.sort_by_key(|id| {
                (std::cmp::Reverse(net.vertices(*id).len()), net.table(id.variable).configurations(), id.variable, id.config)
            });
            ids
        }
        SetOrder::Topological => {
            let mut depth = vec![0usize; net.len()];
            for v in net.topological_order() {
                depth[v] = net.parents(v).iter().map(|&p| depth[p] + 1).max().unwrap_or(0);
            }
            let mut ids = active;
            ids.sort_by_key(|id| (depth[id.variable], id.variable, id.config));
            ids
        }
        SetOrder::Custom(ids) => {
            for id in &active {
                if !ids.contains(id) {
                    return Err(InferenceError::Config(format!("branching order misses relevant set {id}")));
                }
            }
            let mut seen = std::collections::BTreeSet::new();
            for id in ids {
                if !net.contains_set(*id) || !seen.insert(*id) {
                    return Err(InferenceError::Config(format!("bad or repeated set {id} in branching order")));
                }
            }
            ids.iter().copied().filter(|id| objective.is_active(*id)).collect()
        }
    })
}

struct Search<'a> {
    net: &'a CredalNetwork,
    query: VarId,
    category: usize,
    evidence: &'a Evidence,
    direction: Direction,
    bounder: Bounder,
}

impl Search<'_> {
    /// Bound in score space, or `None` when the subproblem has no
    /// selection with positive evidence probability.
    fn bound(&self, selection: &VertexSelection) -> Result<Option<f64>, InferenceError> {
        let restricted = self.net.restricted(selection);
        let result = match self.bounder {
            Bounder::ArPlus(budget) => propagate_plus(&restricted, self.query, self.evidence, budget),
            Bounder::Ar => propagate(&restricted, self.query, self.evidence),
        };
        match result {
            Ok(b) => Ok(Some(self.direction.score(self.direction.bound(&b[self.category])))),
            Err(InferenceError::ZeroEvidence) => Ok(None),
            Err(e) => Err(e),
        }
    }
}

/// Optimizes `p(query = category | evidence)` in `direction`.
#[allow(clippy::too_many_arguments)]
pub fn solve<R: Rng + ?Sized>(
    net: &CredalNetwork,
    query: VarId,
    category: usize,
    evidence: &Evidence,
    direction: Direction,
    config: &SolveConfig,
    rng: &mut R,
) -> Result<SolveResult, InferenceError> {
    let start = Instant::now();
    if !(config.epsilon >= 0.0) {
        return Err(InferenceError::Config("epsilon must be nonnegative".into()));
    }
    let objective = Objective::new(net, query, category, evidence, direction)?;
    let order = branching_sets(net, &objective, &config.set_order)?;
    let ordering = NodeOrdering::topological(net);
    let search = Search { net, query, category, evidence, direction, bounder: config.bounder };
    let score = |v: f64| direction.score(v);

    let mut stats = SolveStats {
        nodes_expanded: 0,
        leaves_evaluated: 0,
        pruned: 0,
        bound_evaluations: 0,
        refreshes: 0,
        wall_time: Duration::ZERO,
        gap: 0.0,
        trajectory: Vec::new(),
    };

    let initial = multistart_with(&objective, &ordering, config.restarts, rng)?;
    let mut incumbent = score(initial.value);
    let mut witness = initial.selection;

    // Choices of the branching sets only; everything else reads vertex 0.
    let root = VertexSelection::empty(net);
    let root_score = if order.is_empty() {
        objective.value(&root).map(score)
    } else {
        stats.bound_evaluations += 1;
        search.bound(&root)?
    }
    .ok_or(InferenceError::ZeroEvidence)?
    .max(incumbent);
    let mut stack = vec![Node { selection: root, depth: 0, score: root_score }];

    let global = |stack: &[Node], incumbent: f64| stack.iter().map(|n| n.score).fold(incumbent, f64::max);
    let value_of = |s: f64| direction.score(s);
    stats.trajectory.push((value_of(incumbent), value_of(root_score)));

    let mut mode = Mode::Exact;
    while let Some(node) = stack.pop() {
        let g = node.score.max(global(&stack, incumbent));
        if config.epsilon > 0.0 && g - incumbent <= config.epsilon {
            stack.push(node);
            mode = Mode::Approximate;
            break;
        }
        if config.node_limit.is_some_and(|limit| stats.nodes_expanded >= limit) {
            stack.push(node);
            mode = Mode::Approximate;
            break;
        }
        if !order.is_empty() && node.score <= incumbent + PRUNE_TOLERANCE {
            stats.pruned += 1;
            continue;
        }
        stats.nodes_expanded += 1;
        if node.depth == order.len() {
            // Leaf: its score is the exact value.
            stats.leaves_evaluated += 1;
            let full = VertexSelection::total_from(net, |id| node.selection.get(net, id).unwrap_or(0));
            let improvement = node.score - incumbent;
            incumbent = node.score;
            witness = full;
            if config.refresh_threshold.is_some_and(|t| improvement > t) && !order.is_empty() {
                let refined = objective.run(&ordering, witness.clone(), DEFAULT_CYCLE_CAP)?;
                stats.refreshes += 1;
                if score(refined.value) > incumbent {
                    incumbent = score(refined.value);
                    witness = refined.selection;
                }
            }
        } else {
            let id = order[node.depth];
            let mut children = Vec::new();
            for i in 0..net.vertices(id).len() {
                let mut selection = node.selection.clone();
                selection.set_flat(net.flat_index(id), Some(i));
                let depth = node.depth + 1;
                let child = if depth == order.len() {
                    objective.value(&selection).map(score)
                } else {
                    stats.bound_evaluations += 1;
                    search.bound(&selection)?
                };
                match child.map(|s| s.min(node.score)) {
                    Some(s) if s > incumbent + PRUNE_TOLERANCE => children.push(Node { selection, depth, score: s }),
                    _ => stats.pruned += 1,
                }
            }
            // Best bound on top of the stack; lower vertex index first on ties.
            children.reverse();
            children.sort_by(|a, b| a.score.total_cmp(&b.score));
            stack.extend(children);
        }
        let g = global(&stack, incumbent);
        let last = *stats.trajectory.last().unwrap();
        let now = (value_of(incumbent), value_of(g));
        if now != last {
            stats.trajectory.push(now);
        }
    }
    let g = global(&stack, incumbent);
    stats.gap = if mode == Mode::Exact { 0.0 } else { g - incumbent };
    stats.wall_time = start.elapsed();
    Ok(SolveResult {
        value: value_of(incumbent),
        witness,
        mode,
        bound: if mode == Mode::Exact { value_of(incumbent) } else { value_of(g) },
        direction,
        stats,
    })
}

/// Lower and upper optimum of `p(query = category | evidence)`.
pub fn solve_interval<R: Rng + ?Sized>(
    net: &CredalNetwork,
    query: VarId,
    category: usize,
    evidence: &Evidence,
    config: &SolveConfig,
    rng: &mut R,
) -> Result<(ProbabilityInterval, SolveResult, SolveResult), InferenceError> {
    let low = solve(net, query, category, evidence, Direction::Min, config, rng)?;
    let high = solve(net, query, category, evidence, Direction::Max, config, rng)?;
    Ok((ProbabilityInterval::new(low.value, high.value), low, high))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::tests::{d, random_net};
    use crate::exact::{exhaustive, marginal, BayesNetView};
    use crate::model::{ConditionalCredalTable, Variable};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn precise_network_is_one_leaf() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let net = random_net(&mut rng, 5, 3, 1);
        let p = marginal(&BayesNetView::new(&net).unwrap(), 0, &Evidence::new()).unwrap();
        let r = solve(&net, 0, 0, &Evidence::new(), Direction::Max, &SolveConfig::default(), &mut rng).unwrap();
        assert_eq!((r.stats.nodes_expanded, r.stats.leaves_evaluated), (1, 1));
        assert!((r.value - p[0]).abs() < 1e-12);
        assert_eq!(r.mode, Mode::Exact);
    }

    #[test]
    fn single_credal_node_interval() {
        let net = CredalNetwork::new(
            vec![Variable::with_cardinality("X", 2)],
            vec![ConditionalCredalTable::root(0, vec![d(&[0.2, 0.8]), d(&[0.5, 0.5]), d(&[0.3, 0.7])])],
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let (i, _, _) = solve_interval(&net, 0, 0, &Evidence::new(), &SolveConfig::default(), &mut rng).unwrap();
        assert_eq!((i.lower, i.upper), (0.2, 0.5));
    }

    #[test]
    fn epsilon_one_stops_at_the_root() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let net = random_net(&mut rng, 6, 3, 3);
        let config = SolveConfig { epsilon: 1.0, ..SolveConfig::default() };
        let r = solve(&net, 0, 0, &Evidence::new(), Direction::Max, &config, &mut rng).unwrap();
        assert_eq!(r.stats.nodes_expanded, 0);
        assert!(r.stats.gap <= 1.0 && r.bound >= r.value);
    }

    #[test]
    fn bad_configuration() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let net = random_net(&mut rng, 3, 2, 2);
        let bad = SolveConfig { epsilon: -1.0, ..SolveConfig::default() };
        assert!(solve(&net, 0, 0, &Evidence::new(), Direction::Max, &bad, &mut rng).is_err());
        let bad = SolveConfig { set_order: SetOrder::Custom(vec![]), ..SolveConfig::default() };
        let relevant = net.relevant_variables(0, &Evidence::new());
        let has_active = net.local_sets().any(|id| relevant[id.variable] && net.vertices(id).len() > 1);
        assert_eq!(solve(&net, 0, 0, &Evidence::new(), Direction::Max, &bad, &mut rng).is_err(), has_active);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn matches_oracle_with_sound_trajectory(seed in any::<u64>(), n in 1usize..7, use_ar in any::<bool>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let net = random_net(&mut rng, n, 3, 3);
            let query = rng.random_range(0..n);
            let mut evidence = Evidence::new();
            for v in 0..n {
                if v != query && rng.random_bool(0.25) {
                    evidence.insert(v, rng.random_range(0..net.cardinality(v)));
                }
            }
            let Ok(r) = exhaustive(&net, query, &evidence, 1 << 14) else { return Ok(()) };
            let config = SolveConfig {
                bounder: if use_ar { Bounder::Ar } else { Bounder::default() },
                restarts: 1,
                ..SolveConfig::default()
            };
            for x in 0..net.cardinality(query) {
                for dir in [Direction::Min, Direction::Max] {
                    let s = solve(&net, query, x, &evidence, dir, &config, &mut rng).unwrap();
                    let truth = dir.bound(&r.bounds[x]);
                    prop_assert!((s.value - truth).abs() < 1e-9, "{} vs {}", s.value, truth);
                    prop_assert!(s.stats.nodes_expanded >= s.stats.leaves_evaluated);
                    let restricted = net.restricted(&s.witness);
                    let p = marginal(&BayesNetView::new(&restricted).unwrap(), query, &evidence).unwrap();
                    prop_assert!((p[x] - s.value).abs() < 1e-9);
                    let mut last_gap = f64::INFINITY;
                    for &(inc, bound) in &s.stats.trajectory {
                        prop_assert!(dir.score(inc) <= dir.score(truth) + 1e-9);
                        prop_assert!(dir.score(bound) >= dir.score(truth) - 1e-9);
                        let gap = dir.score(bound) - dir.score(inc);
                        prop_assert!(gap <= last_gap + 1e-12);
                        last_gap = gap;
                    }
                }
            }
        }
    }

    use rand::Rng;
}
