//! Inner approximation by coordinate-wise vertex optimization: every local
//! set in turn is moved to the vertex that best improves the query
//! probability while all other choices stay fixed.

use rand::Rng;
use rayon::prelude::*;

use crate::error::{check_category, check_query, InferenceError};
use crate::exact::{evidence_possible, Evaluator};
use crate::model::{CredalNetwork, Direction, Distribution, Evidence, LocalSetId, VarId, VertexSelection};

pub const DEFAULT_CYCLE_CAP: usize = 100;

/// Improvements at or below this are not moves.
pub const MOVE_TOLERANCE: f64 = 1e-12;

/// Order in which local sets are visited.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeOrdering(Vec<LocalSetId>);

impl NodeOrdering {
    /// Variables in topological order, configurations in index order.
    pub fn topological(net: &CredalNetwork) -> Self {
        NodeOrdering(
            net.topological_order()
                .into_iter()
                .flat_map(|v| (0..net.table(v).configurations()).map(move |c| LocalSetId::new(v, c)))
                .collect(),
        )
    }

    /// Checks that `ids` lists every local set exactly once.
    pub fn new(net: &CredalNetwork, ids: Vec<LocalSetId>) -> Result<Self, InferenceError> {
        let mut seen = vec![false; net.local_set_count()];
        for &id in &ids {
            if !net.contains_set(id) {
                return Err(crate::model::ModelError::UnknownLocalSet(id).into());
            }
            if std::mem::replace(&mut seen[net.flat_index(id)], true) {
                return Err(InferenceError::Config(format!("local set {id} listed twice")));
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(InferenceError::Config("ordering misses a local set".into()));
        }
        Ok(NodeOrdering(ids))
    }

    pub fn sets(&self) -> &[LocalSetId] {
        &self.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchState {
    pub selection: VertexSelection,
    /// `p(query = category | evidence)` at `selection`.
    pub value: f64,
    pub direction: Direction,
    /// Full passes over the ordering, including the final one without moves.
    pub cycles: usize,
    pub moves: usize,
    /// Value after each accepted move, starting with the initial value.
    pub trajectory: Vec<f64>,
    /// The cycle cap stopped the search before it converged.
    pub hit_cycle_cap: bool,
}

/// The objective `p(query = category | evidence)` as a function of a
/// total selection.
pub(crate) struct Objective<'a> {
    net: &'a CredalNetwork,
    eval: Evaluator,
    category: usize,
    direction: Direction,
    /// Local sets with a choice that can matter, in flat order.
    active: Vec<bool>,
}

impl<'a> Objective<'a> {
    pub(crate) fn new(
        net: &'a CredalNetwork,
        query: VarId,
        category: usize,
        evidence: &Evidence,
        direction: Direction,
    ) -> Result<Self, InferenceError> {
        check_query(net, query, evidence)?;
        check_category(net, query, category)?;
        if !evidence_possible(net, evidence)? {
            return Err(InferenceError::ZeroEvidence);
        }
        let eval = Evaluator::conditional(net, query, evidence)?;
        let mut active = vec![false; net.local_set_count()];
        for &v in eval.scope() {
            for c in 0..net.table(v).configurations() {
                let id = LocalSetId::new(v, c);
                active[net.flat_index(id)] = net.vertices(id).len() > 1;
            }
        }
        Ok(Objective { net, eval, category, direction, active })
    }

    pub(crate) fn is_active(&self, id: LocalSetId) -> bool {
        self.active[self.net.flat_index(id)]
    }

    /// `None` when the evidence has probability zero.
    pub(crate) fn value_with(&self, selection: &VertexSelection, at: Option<(LocalSetId, usize)>) -> Option<f64> {
        let net = self.net;
        let joint = self.eval.joint(net, |id| {
            let list = net.vertices(id);
            match at {
                Some((s, i)) if s == id => &list[i],
                _ => &list[selection.get_flat(net.flat_index(id)).unwrap_or(0)],
            }
        });
        let pe: f64 = joint.iter().sum();
        (pe > 0.0).then(|| joint[self.category] / pe)
    }

    pub(crate) fn value(&self, selection: &VertexSelection) -> Option<f64> {
        self.value_with(selection, None)
    }

    /// Best vertex of `id` with the rest of `selection` fixed; lowest index
    /// on ties. `None` if every candidate gives zero evidence probability.
    pub(crate) fn best_vertex(&self, selection: &VertexSelection, id: LocalSetId) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        for i in 0..self.net.vertices(id).len() {
            if let Some(v) = self.value_with(selection, Some((id, i))) {
                if best.is_none_or(|(_, b)| self.direction.score(v) > self.direction.score(b)) {
                    best = Some((i, v));
                }
            }
        }
        best
    }

    /// Moves the active sets of `selection` to a choice with positive
    /// evidence probability. Sets are fixed one at a time while the
    /// undecided ones sit at their centroid: the centroid value is the
    /// average over the set's vertices, so some vertex keeps it positive.
    pub(crate) fn repair(&self, selection: &mut VertexSelection) {
        let net = self.net;
        let centroids: Vec<Distribution> = net
            .local_sets()
            .map(|id| {
                let list = net.vertices(id);
                let mut c = vec![0.0; list[0].len()];
                for d in list {
                    c.iter_mut().zip(d.probs()).for_each(|(a, b)| *a += b / list.len() as f64);
                }
                Distribution::from_vec_unchecked(c)
            })
            .collect();
        let mut decided = vec![true; net.local_set_count()];
        for (f, d) in decided.iter_mut().enumerate() {
            *d = !self.active[f];
        }
        for f in 0..net.local_set_count() {
            if decided[f] {
                continue;
            }
            let id = net.local_set_at(f);
            let list = net.vertices(id);
            let chosen = (0..list.len()).find(|&i| {
                let joint = self.eval.joint(net, |s| {
                    let g = net.flat_index(s);
                    if g == f {
                        &list[i]
                    } else if decided[g] {
                        &net.vertices(s)[selection.get_flat(g).unwrap_or(0)]
                    } else {
                        &centroids[g]
                    }
                });
                joint.iter().sum::<f64>() > 0.0
            });
            selection.set_flat(f, Some(chosen.unwrap_or(0)));
            decided[f] = true;
        }
    }

    pub(crate) fn random_selection<R: Rng + ?Sized>(&self, rng: &mut R) -> VertexSelection {
        VertexSelection::total_from(self.net, |id| rng.random_range(0..self.net.vertices(id).len()))
    }

    pub(crate) fn run(
        &self,
        ordering: &NodeOrdering,
        mut selection: VertexSelection,
        cycle_cap: usize,
    ) -> Result<SearchState, InferenceError> {
        selection.check(self.net)?;
        if !selection.is_total() {
            return Err(InferenceError::Config("initial selection must be total".into()));
        }
        let mut value = match self.value(&selection) {
            Some(v) => v,
            None => {
                self.repair(&mut selection);
                self.value(&selection).ok_or(InferenceError::ZeroEvidence)?
            }
        };
        let mut trajectory = vec![value];
        let (mut cycles, mut moves) = (0, 0);
        let mut hit_cycle_cap = true;
        while cycles < cycle_cap {
            cycles += 1;
            let mut changed = false;
            for &id in ordering.sets() {
                if !self.is_active(id) {
                    continue;
                }
                if let Some((i, v)) = self.best_vertex(&selection, id) {
                    if self.direction.score(v) > self.direction.score(value) + MOVE_TOLERANCE {
                        selection.set_flat(self.net.flat_index(id), Some(i));
                        value = v;
                        trajectory.push(v);
                        moves += 1;
                        changed = true;
                    }
                }
            }
            if !changed {
                hit_cycle_cap = false;
                break;
            }
        }
        Ok(SearchState { selection, value, direction: self.direction, cycles, moves, trajectory, hit_cycle_cap })
    }
}

/// The vertex of `set_id` that optimizes `p(query = category | evidence)`
/// with every other set fixed by `selection` (lowest index on ties).
pub fn best_vertex_for_set(
    net: &CredalNetwork,
    selection: &VertexSelection,
    set_id: LocalSetId,
    query: VarId,
    category: usize,
    evidence: &Evidence,
    direction: Direction,
) -> Result<(usize, f64), InferenceError> {
    if !net.contains_set(set_id) {
        return Err(crate::model::ModelError::UnknownLocalSet(set_id).into());
    }
    selection.check(net)?;
    let objective = Objective::new(net, query, category, evidence, direction)?;
    objective.best_vertex(selection, set_id).ok_or(InferenceError::ZeroEvidence)
}

/// One coordinate-wise search. Without `initial`, the start is drawn
/// uniformly per set from `rng`.
#[allow(clippy::too_many_arguments)]
pub fn optimize<R: Rng + ?Sized>(
    net: &CredalNetwork,
    query: VarId,
    category: usize,
    evidence: &Evidence,
    direction: Direction,
    ordering: &NodeOrdering,
    initial: Option<VertexSelection>,
    rng: &mut R,
) -> Result<SearchState, InferenceError> {
    let objective = Objective::new(net, query, category, evidence, direction)?;
    let start = initial.unwrap_or_else(|| objective.random_selection(rng));
    objective.run(ordering, start, DEFAULT_CYCLE_CAP)
}

/// Best of `restarts` searches from random starts drawn in sequence from
/// `rng`; ties go to the earliest restart. Restarts run in parallel.
pub fn multistart<R: Rng + ?Sized>(
    net: &CredalNetwork,
    query: VarId,
    category: usize,
    evidence: &Evidence,
    direction: Direction,
    restarts: usize,
    rng: &mut R,
) -> Result<SearchState, InferenceError> {
    let objective = Objective::new(net, query, category, evidence, direction)?;
    multistart_with(&objective, &NodeOrdering::topological(net), restarts, rng)
}

pub(crate) fn multistart_with<R: Rng + ?Sized>(
    objective: &Objective,
    ordering: &NodeOrdering,
    restarts: usize,
    rng: &mut R,
) -> Result<SearchState, InferenceError> {
    if restarts == 0 {
        return Err(InferenceError::Config("restarts must be at least 1".into()));
    }
    let starts: Vec<VertexSelection> = (0..restarts).map(|_| objective.random_selection(rng)).collect();
    let runs: Vec<Result<SearchState, InferenceError>> =
        starts.into_par_iter().map(|s| objective.run(ordering, s, DEFAULT_CYCLE_CAP)).collect();
    let mut best: Option<SearchState> = None;
    for run in runs {
        let run = run?;
        if best.as_ref().is_none_or(|b| run.direction.score(run.value) > run.direction.score(b.value)) {
            best = Some(run);
        }
    }
    Ok(best.unwrap())
}
