//! A/R with local credal-set elimination at every message that involves a
//! conditional table (the A/R+ outer approximation).
//!
//! Interval messages from parents are lifted to the largest credal set they
//! describe, the parents are summed out one at a time against the table's
//! vertices with redundant points pruned after each step, and the result is
//! projected back to intervals. A site whose sets grow past the vertex
//! budget is computed by plain A/R instead.

use std::cell::Cell;

use crate::ar::{ar_normalize, run_schedule, IntervalMessage, MessageRules, Tessem};
use crate::error::InferenceError;
use crate::geometry::{interval_credal_vertices, prune_redundant_capped, Point, DEFAULT_PRUNE_CAP};
use crate::model::{
    decode_config, encode_config, CredalNetwork, Evidence, IntervalPotential, LocalSetId, LocalSets,
    ProbabilityInterval, VarId,
};

pub const DEFAULT_MAX_VERTICES: usize = 256;

/// Largest vertex set a message site may hold before falling back to A/R.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VertexBudget {
    max_vertices: usize,
}

impl VertexBudget {
    pub fn new(max_vertices: usize) -> Result<Self, InferenceError> {
        if max_vertices == 0 {
            return Err(InferenceError::Config("vertex budget must be at least 1".into()));
        }
        Ok(VertexBudget { max_vertices })
    }

    pub fn max_vertices(&self) -> usize {
        self.max_vertices
    }
}

impl Default for VertexBudget {
    fn default() -> Self {
        VertexBudget { max_vertices: DEFAULT_MAX_VERTICES }
    }
}

/// A credal set over one variable, or a set of nonnegative potentials.
#[derive(Debug, Clone, PartialEq)]
pub struct CredalMessage {
    pub variable: VarId,
    pub vertices: Vec<Point>,
}

/// Outcome of a local elimination.
#[derive(Debug, Clone, PartialEq)]
pub enum Eliminated {
    Set(CredalMessage),
    /// A working set exceeded the budget.
    Fallback,
}

/// The vertices of the largest credal set inside an interval message.
pub fn lift_to_credal(variable: VarId, potential: &IntervalPotential) -> Result<CredalMessage, InferenceError> {
    let vertices = interval_credal_vertices(potential)?.into_iter().map(|d| d.into_vec()).collect();
    Ok(CredalMessage { variable, vertices })
}

/// Sums out the parents that have a message in `messages` (the others stay).
/// Returns one point set per configuration of the kept parents, in mixed
/// radix over the kept parents in declared order, or `None` on fallback.
fn eliminate(
    sets: &dyn LocalSets,
    child: VarId,
    messages: &[Option<&CredalMessage>],
    budget: VertexBudget,
) -> Result<Option<Vec<Vec<Point>>>, InferenceError> {
    let net = sets.network();
    let limit = budget.max_vertices;
    let card = net.cardinality(child);
    let mut radices = net.parent_cardinalities(child);
    if messages.len() != radices.len() {
        return Err(InferenceError::Config(format!("{} messages for {} parents", messages.len(), radices.len())));
    }
    for (m, &r) in messages.iter().zip(&radices) {
        if let Some(m) = m {
            if m.vertices.iter().any(|v| v.len() != r) {
                return Err(crate::model::ModelError::DimensionMismatch { expected: r, found: m.vertices[0].len() }.into());
            }
            if m.vertices.len() > limit {
                return Ok(None);
            }
        }
    }
    let mut working: Vec<Vec<Point>> = Vec::with_capacity(net.table(child).configurations());
    for c in 0..net.table(child).configurations() {
        let list = sets.vertices(LocalSetId::new(child, c));
        if list.len() > limit {
            return Ok(None);
        }
        working.push(list.iter().map(|d| d.probs().to_vec()).collect());
    }
    // Positions (in declared order) of the parents still present.
    let mut present: Vec<usize> = (0..radices.len()).collect();
    let mut order: Vec<usize> = (0..messages.len()).filter(|&j| messages[j].is_some()).collect();
    order.sort_by_key(|&j| (radices[j] * messages[j].unwrap().vertices.len(), j));

    for j in order {
        let slot = present.iter().position(|&p| p == j).unwrap();
        let message = messages[j].unwrap();
        let mut kept = radices.clone();
        kept.remove(slot);
        let kept_total: usize = kept.iter().product();
        let mut next = Vec::with_capacity(kept_total);
        for r in 0..kept_total {
            let rest = decode_config(r, &kept);
            let source = |y: usize| {
                let mut digits = rest.clone();
                digits.insert(slot, y);
                encode_config(&digits, &radices)
            };
            let mut candidates: Vec<Point> = Vec::new();
            for m in &message.vertices {
                // Minkowski sum of m(y) * S(y) over y, pruned as it grows.
                let mut acc: Vec<Point> = vec![vec![0.0; card]];
                for (y, &w) in m.iter().enumerate() {
                    if w == 0.0 {
                        continue;
                    }
                    let s = &working[source(y)];
                    if acc.len() * s.len() > limit.max(DEFAULT_PRUNE_CAP) * DEFAULT_PRUNE_CAP {
                        return Ok(None);
                    }
                    let mut sum = Vec::with_capacity(acc.len() * s.len());
                    for a in &acc {
                        for v in s {
                            sum.push(a.iter().zip(v).map(|(x, z)| x + w * z).collect());
                        }
                    }
                    acc = prune_redundant_capped(sum, DEFAULT_PRUNE_CAP)?;
                    if acc.len() > limit {
                        return Ok(None);
                    }
                }
                candidates.extend(acc);
            }
            let set = prune_redundant_capped(candidates, DEFAULT_PRUNE_CAP)?;
            if set.len() > limit {
                return Ok(None);
            }
            next.push(set);
        }
        working = next;
        radices = kept;
        present.remove(slot);
    }
    Ok(Some(working))
}

/// Sums out every parent of `child` against its table.
pub fn local_eliminate(
    sets: &dyn LocalSets,
    child: VarId,
    parent_messages: &[CredalMessage],
    budget: VertexBudget,
) -> Result<Eliminated, InferenceError> {
    let messages: Vec<Option<&CredalMessage>> = parent_messages.iter().map(Some).collect();
    Ok(match eliminate(sets, child, &messages, budget)? {
        Some(mut sets) => Eliminated::Set(CredalMessage { variable: child, vertices: sets.remove(0) }),
        None => Eliminated::Fallback,
    })
}

fn project(points: &[Point]) -> IntervalPotential {
    let n = points[0].len();
    IntervalPotential::new(
        (0..n)
            .map(|j| {
                let lo = points.iter().map(|p| p[j]).fold(f64::INFINITY, f64::min);
                let hi = points.iter().map(|p| p[j]).fold(f64::NEG_INFINITY, f64::max);
                ProbabilityInterval::new(lo.clamp(0.0, 1.0), hi.clamp(0.0, 1.0))
            })
            .collect(),
    )
}

struct Plus {
    budget: VertexBudget,
    sites: Cell<usize>,
    fallbacks: Cell<usize>,
}

impl Plus {
    fn lift_all(
        &self,
        net: &CredalNetwork,
        child: VarId,
        parents: &[IntervalPotential],
        skip: Option<usize>,
    ) -> Result<Option<Vec<CredalMessage>>, InferenceError> {
        let mut out = Vec::with_capacity(parents.len());
        for (j, (m, &p)) in parents.iter().zip(net.parents(child)).enumerate() {
            if Some(j) == skip {
                out.push(CredalMessage { variable: p, vertices: Vec::new() });
                continue;
            }
            let lifted = lift_to_credal(p, m)?;
            if lifted.vertices.len() > self.budget.max_vertices {
                return Ok(None);
            }
            out.push(lifted);
        }
        Ok(Some(out))
    }

    fn fell_back(&self) {
        self.fallbacks.set(self.fallbacks.get() + 1);
    }
}

impl MessageRules for Plus {
    fn pi(&self, sets: &dyn LocalSets, child: VarId, parents: &[IntervalPotential]) -> Result<IntervalPotential, InferenceError> {
        self.sites.set(self.sites.get() + 1);
        let net = sets.network();
        if let Some(lifted) = self.lift_all(net, child, parents, None)? {
            if let Eliminated::Set(m) = local_eliminate(sets, child, &lifted, self.budget)? {
                return Ok(project(&m.vertices));
            }
        }
        self.fell_back();
        Tessem.pi(sets, child, parents)
    }

    fn lambda(
        &self,
        sets: &dyn LocalSets,
        child: VarId,
        parent: usize,
        parents: &[IntervalPotential],
        lambda: &IntervalPotential,
    ) -> Result<IntervalPotential, InferenceError> {
        self.sites.set(self.sites.get() + 1);
        let net = sets.network();
        if let Some(lifted) = self.lift_all(net, child, parents, Some(parent))? {
            let messages: Vec<Option<&CredalMessage>> =
                lifted.iter().enumerate().map(|(j, m)| (j != parent).then_some(m)).collect();
            if let Some(per_value) = eliminate(sets, child, &messages, self.budget)? {
                let (ll, lu) = (lambda.lowers(), lambda.uppers());
                let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
                let out = per_value
                    .iter()
                    .map(|set| {
                        let lo = set.iter().map(|v| dot(&ll, v)).fold(f64::INFINITY, f64::min).max(0.0);
                        let hi = set.iter().map(|v| dot(&lu, v)).fold(f64::NEG_INFINITY, f64::max).max(lo);
                        ProbabilityInterval::new(lo, hi)
                    })
                    .collect();
                return ar_normalize(&IntervalPotential::new(out));
            }
        }
        self.fell_back();
        Tessem.lambda(sets, child, parent, parents, lambda)
    }
}

/// Bounds from [`propagate_plus_detailed`] with fallback counts.
#[derive(Debug, Clone, PartialEq)]
pub struct PlusResult {
    pub bounds: IntervalPotential,
    /// Message sites that involved a conditional table.
    pub sites: usize,
    /// Sites computed by plain A/R because of the budget.
    pub fallbacks: usize,
    pub messages: Vec<IntervalMessage>,
}

/// Outer bounds on `p(query = x | evidence)` for every category; never
/// wider than [`crate::ar::propagate`].
pub fn propagate_plus(
    sets: &dyn LocalSets,
    query: VarId,
    evidence: &Evidence,
    budget: VertexBudget,
) -> Result<IntervalPotential, InferenceError> {
    Ok(propagate_plus_detailed(sets, query, evidence, budget)?.bounds)
}

pub fn propagate_plus_detailed(
    sets: &dyn LocalSets,
    query: VarId,
    evidence: &Evidence,
    budget: VertexBudget,
) -> Result<PlusResult, InferenceError> {
    let rules = Plus { budget, sites: Cell::new(0), fallbacks: Cell::new(0) };
    let (bounds, messages) = run_schedule(sets, query, evidence, &rules)?;
    Ok(PlusResult { bounds, sites: rules.sites.get(), fallbacks: rules.fallbacks.get(), messages })
}
