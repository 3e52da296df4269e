//! Precise inference on polytrees and the exhaustive credal oracle.

use num_bigint::BigUint;
use rayon::prelude::*;

use crate::error::{check_category, check_evidence, check_query, InferenceError};
use crate::model::{
    decode_config, CredalNetwork, Distribution, Evidence, IntervalPotential, LocalSetId, LocalSets,
    ProbabilityInterval, VarId, VertexSelection,
};

/// A network whose every local set holds exactly one vertex.
#[derive(Clone, Copy)]
pub struct BayesNetView<'a> {
    sets: &'a dyn LocalSets,
}

impl<'a> BayesNetView<'a> {
    pub fn new(sets: &'a dyn LocalSets) -> Result<Self, InferenceError> {
        let net = sets.network();
        for id in net.local_sets() {
            let len = sets.vertices(id).len();
            if len != 1 {
                return Err(InferenceError::NotPrecise { set: id, len });
            }
        }
        Ok(BayesNetView { sets })
    }

    pub fn network(&self) -> &CredalNetwork {
        self.sets.network()
    }

    fn vertex(&self, id: LocalSetId) -> &'a Distribution {
        &self.sets.vertices(id)[0]
    }
}

struct Step {
    inputs: Vec<usize>,
    maps: Vec<Vec<u32>>,
    out_map: Vec<u32>,
    out_slot: usize,
    out_size: usize,
}

/// Variable elimination plan along a leaf-stripping order, compiled once
/// and replayed for any choice of vertices.
///
/// The plan computes `p(query = x, e)` for every `x`, with the evidence
/// restricted to the part of the network connected to the query, or
/// `p(e)` when there is no query.
pub struct Evaluator {
    query: Option<VarId>,
    query_card: usize,
    scope: Vec<VarId>,
    evidence: Vec<Option<usize>>,
    slot_sizes: Vec<usize>,
    steps: Vec<Step>,
    finals: Vec<usize>,
}

impl Evaluator {
    /// Plan for `p(query, e)` over the variables relevant to the query.
    pub fn conditional(net: &CredalNetwork, query: VarId, evidence: &Evidence) -> Result<Self, InferenceError> {
        check_query(net, query, evidence)?;
        let relevant = net.relevant_variables(query, evidence);
        Ok(Self::build(net, Some(query), relevant, evidence))
    }

    /// Plan for `p(e)`.
    pub fn evidence_only(net: &CredalNetwork, evidence: &Evidence) -> Result<Self, InferenceError> {
        check_evidence(net, evidence)?;
        let ancestral = net.ancestral_set(evidence.iter().map(|(v, _)| v));
        Ok(Self::build(net, None, ancestral, evidence))
    }

    fn build(net: &CredalNetwork, query: Option<VarId>, in_scope: Vec<bool>, evidence: &Evidence) -> Self {
        let scope: Vec<VarId> = (0..net.len()).filter(|&v| in_scope[v]).collect();
        let mut slot_scopes: Vec<Vec<VarId>> = scope
            .iter()
            .map(|&v| {
                let mut s = net.parents(v).to_vec();
                s.push(v);
                s
            })
            .collect();
        let mut slot_sizes: Vec<usize> =
            slot_scopes.iter().map(|s| s.iter().map(|&v| net.cardinality(v)).product()).collect();
        let mut live: Vec<usize> = (0..scope.len()).collect();

        // Leaf stripping: repeatedly remove the lowest-numbered variable with
        // at most one remaining neighbour.
        let mut remaining = in_scope.clone();
        let mut degree: Vec<usize> =
            (0..net.len()).map(|v| if in_scope[v] { net.neighbours(v).filter(|&n| in_scope[n]).count() } else { 0 }).collect();
        let mut steps = Vec::new();
        loop {
            let next = (0..net.len()).find(|&v| remaining[v] && Some(v) != query && degree[v] <= 1);
            let Some(v) = next else { break };
            remaining[v] = false;
            for n in net.neighbours(v) {
                if remaining[n] {
                    degree[n] -= 1;
                }
            }
            let inputs: Vec<usize> = live.iter().copied().filter(|&s| slot_scopes[s].contains(&v)).collect();
            live.retain(|s| !inputs.contains(s));
            let mut union: Vec<VarId> = Vec::new();
            for &s in &inputs {
                for &u in &slot_scopes[s] {
                    if !union.contains(&u) {
                        union.push(u);
                    }
                }
            }
            union.sort_unstable();
            let out_scope: Vec<VarId> = union.iter().copied().filter(|&u| u != v).collect();
            let cards: Vec<usize> = union.iter().map(|&u| net.cardinality(u)).collect();
            let strides = |target: &[VarId]| -> Vec<usize> {
                // stride of each union position inside `target`, 0 if absent
                let mut st = vec![0; union.len()];
                let mut acc = 1;
                for &t in target.iter().rev() {
                    let pos = union.iter().position(|&u| u == t).unwrap();
                    st[pos] = acc;
                    acc *= net.cardinality(t);
                }
                st
            };
            let in_strides: Vec<Vec<usize>> = inputs.iter().map(|&s| strides(&slot_scopes[s])).collect();
            let out_strides = strides(&out_scope);
            let size: usize = cards.iter().product();
            let mut maps = vec![Vec::with_capacity(size); inputs.len()];
            let mut out_map = Vec::with_capacity(size);
            let mut digits = vec![0usize; union.len()];
            for _ in 0..size {
                for (m, st) in maps.iter_mut().zip(&in_strides) {
                    m.push(digits.iter().zip(st).map(|(d, s)| d * s).sum::<usize>() as u32);
                }
                out_map.push(digits.iter().zip(&out_strides).map(|(d, s)| d * s).sum::<usize>() as u32);
                for k in (0..digits.len()).rev() {
                    digits[k] += 1;
                    if digits[k] < cards[k] {
                        break;
                    }
                    digits[k] = 0;
                }
            }
            let out_size: usize = out_scope.iter().map(|&u| net.cardinality(u)).product();
            let out_slot = slot_scopes.len();
            slot_scopes.push(out_scope);
            slot_sizes.push(out_size);
            live.push(out_slot);
            steps.push(Step { inputs, maps, out_map, out_slot, out_size });
        }
        Evaluator {
            query,
            query_card: query.map_or(1, |q| net.cardinality(q)),
            evidence: scope.iter().map(|&v| evidence.get(v)).collect(),
            scope,
            slot_sizes,
            steps,
            finals: live,
        }
    }

    /// Variables whose local sets enter the computation.
    pub fn scope(&self) -> &[VarId] {
        &self.scope
    }

    pub fn query(&self) -> Option<VarId> {
        self.query
    }

    /// Replays the plan with `vertex(id)` as the distribution of each local
    /// set. Returns `p(query = x, e)` per category, or `[p(e)]`.
    pub fn joint<'a>(&self, net: &CredalNetwork, vertex: impl Fn(LocalSetId) -> &'a Distribution) -> Vec<f64> {
        let mut slots: Vec<Vec<f64>> = Vec::with_capacity(self.slot_sizes.len());
        for (k, &v) in self.scope.iter().enumerate() {
            let card = net.cardinality(v);
            let mut values = Vec::with_capacity(self.slot_sizes[k]);
            for config in 0..net.table(v).configurations() {
                let d = vertex(LocalSetId::new(v, config));
                match self.evidence[k] {
                    Some(e) => values.extend((0..card).map(|x| if x == e { d[x] } else { 0.0 })),
                    None => values.extend_from_slice(d.probs()),
                }
            }
            slots.push(values);
        }
        slots.resize(self.slot_sizes.len(), Vec::new());
        for step in &self.steps {
            let mut out = vec![0.0; step.out_size];
            for (a, &o) in step.out_map.iter().enumerate() {
                let mut prod = 1.0;
                for (s, m) in step.inputs.iter().zip(&step.maps) {
                    prod *= slots[*s][m[a] as usize];
                }
                out[o as usize] += prod;
            }
            slots[step.out_slot] = out;
        }
        let mut result = vec![1.0; self.query_card];
        for &s in &self.finals {
            let f = &slots[s];
            if f.len() == 1 {
                result.iter_mut().for_each(|r| *r *= f[0]);
            } else {
                result.iter_mut().zip(f).for_each(|(r, x)| *r *= x);
            }
        }
        result
    }

    /// `joint` using the first vertex of each list in `sets`.
    pub fn joint_first(&self, sets: &dyn LocalSets) -> Vec<f64> {
        self.joint(sets.network(), |id| &sets.vertices(id)[0])
    }
}

/// Exact `p(query | evidence)` on a precise network.
pub fn marginal(view: &BayesNetView, query: VarId, evidence: &Evidence) -> Result<Distribution, InferenceError> {
    let net = view.network();
    let eval = Evaluator::conditional(net, query, evidence)?;
    let joint = eval.joint(net, |id| view.vertex(id));
    let total: f64 = joint.iter().sum();
    if total <= 0.0 {
        return Err(InferenceError::ZeroEvidence);
    }
    // Evidence outside the query's component does not change the
    // conditional, but it can still be impossible.
    if evidence.iter().any(|(v, _)| !eval.scope().contains(&v)) && evidence_probability(view, evidence)? <= 0.0 {
        return Err(InferenceError::ZeroEvidence);
    }
    Ok(Distribution::from_vec_unchecked(joint.into_iter().map(|x| x / total).collect()))
}

/// Exact `p(e)`; zero for impossible evidence.
pub fn evidence_probability(view: &BayesNetView, evidence: &Evidence) -> Result<f64, InferenceError> {
    let net = view.network();
    let eval = Evaluator::evidence_only(net, evidence)?;
    Ok(eval.joint(net, |id| view.vertex(id))[0])
}

/// True when some vertex selection gives the evidence positive probability.
///
/// `p(e)` is multilinear in the local distributions, so its value at the
/// centroid of every local set is the average of its values over all
/// selections, and is positive exactly when one of them is.
pub fn evidence_possible(sets: &dyn LocalSets, evidence: &Evidence) -> Result<bool, InferenceError> {
    let net = sets.network();
    let eval = Evaluator::evidence_only(net, evidence)?;
    let centroids: Vec<Distribution> = net
        .local_sets()
        .map(|id| {
            let list = sets.vertices(id);
            let mut c = vec![0.0; list[0].len()];
            for d in list {
                c.iter_mut().zip(d.probs()).for_each(|(a, b)| *a += b / list.len() as f64);
            }
            Distribution::from_vec_unchecked(c)
        })
        .collect();
    Ok(eval.joint(net, |id| &centroids[net.flat_index(id)])[0] > 0.0)
}

pub const DEFAULT_EXHAUSTIVE_CAP: u64 = 1 << 24;

/// A value reached by the oracle and the first selection reaching it.
#[derive(Debug, Clone, PartialEq)]
pub struct Extremum {
    pub value: f64,
    pub selection: VertexSelection,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExhaustiveResult {
    pub bounds: IntervalPotential,
    pub lower: Vec<Extremum>,
    pub upper: Vec<Extremum>,
    /// Selections enumerated, over the local sets that affect the query.
    pub selections: u64,
    /// Selections dropped because they give the evidence probability zero.
    pub skipped: u64,
}

#[derive(Clone)]
struct Partial {
    low: Vec<(f64, u64)>,
    high: Vec<(f64, u64)>,
    skipped: u64,
}

impl Partial {
    fn empty(card: usize) -> Self {
        Partial { low: vec![(f64::INFINITY, u64::MAX); card], high: vec![(f64::NEG_INFINITY, u64::MAX); card], skipped: 0 }
    }

    fn merge(mut self, other: Partial) -> Partial {
        for (a, b) in self.low.iter_mut().zip(other.low) {
            if b.0 < a.0 || (b.0 == a.0 && b.1 < a.1) {
                *a = b;
            }
        }
        for (a, b) in self.high.iter_mut().zip(other.high) {
            if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) {
                *a = b;
            }
        }
        self.skipped += other.skipped;
        self
    }
}

const CHUNK: u64 = 2048;

/// Tight bounds on `p(query = x | evidence)` for every category `x`, by
/// enumerating every vertex selection of the local sets that affect the
/// query. Refuses when more than `cap` selections would be needed.
pub fn exhaustive(
    net: &CredalNetwork,
    query: VarId,
    evidence: &Evidence,
    cap: u64,
) -> Result<ExhaustiveResult, InferenceError> {
    let eval = Evaluator::conditional(net, query, evidence)?;
    if !evidence_possible(net, evidence)? {
        return Err(InferenceError::ZeroEvidence);
    }
    let free: Vec<LocalSetId> = eval
        .scope()
        .iter()
        .flat_map(|&v| (0..net.table(v).configurations()).map(move |c| LocalSetId::new(v, c)))
        .filter(|&id| net.vertices(id).len() > 1)
        .collect();
    let radices: Vec<usize> = free.iter().map(|&id| net.vertices(id).len()).collect();
    let total = radices.iter().try_fold(1u64, |acc, &r| acc.checked_mul(r as u64)).filter(|&t| t <= cap);
    let Some(total) = total else {
        let count = radices.iter().fold(BigUint::from(1u32), |acc, &r| acc * BigUint::from(r));
        return Err(InferenceError::CapExceeded { count: count.to_string(), cap });
    };
    let mut position = vec![None; net.local_set_count()];
    for (k, &id) in free.iter().enumerate() {
        position[net.flat_index(id)] = Some(k);
    }
    let card = net.cardinality(query);
    let chunks = total.div_ceil(CHUNK);
    let result = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let start = chunk * CHUNK;
            let end = (start + CHUNK).min(total);
            let mut part = Partial::empty(card);
            let mut digits = decode_config(start as usize, &radices);
            for index in start..end {
                let joint = eval.joint(net, |id| {
                    let list = net.vertices(id);
                    match position[net.flat_index(id)] {
                        Some(k) => &list[digits[k]],
                        None => &list[0],
                    }
                });
                let pe: f64 = joint.iter().sum();
                if pe > 0.0 {
                    for x in 0..card {
                        let value = joint[x] / pe;
                        if value < part.low[x].0 {
                            part.low[x] = (value, index);
                        }
                        if value > part.high[x].0 {
                            part.high[x] = (value, index);
                        }
                    }
                } else {
                    part.skipped += 1;
                }
                for k in (0..digits.len()).rev() {
                    digits[k] += 1;
                    if digits[k] < radices[k] {
                        break;
                    }
                    digits[k] = 0;
                }
            }
            part
        })
        .reduce(|| Partial::empty(card), Partial::merge);
    if result.skipped == total {
        return Err(InferenceError::ZeroEvidence);
    }
    let selection_at = |index: u64| {
        let digits = decode_config(index as usize, &radices);
        VertexSelection::total_from(net, |id| position[net.flat_index(id)].map_or(0, |k| digits[k]))
    };
    let lower: Vec<Extremum> =
        result.low.iter().map(|&(value, i)| Extremum { value, selection: selection_at(i) }).collect();
    let upper: Vec<Extremum> =
        result.high.iter().map(|&(value, i)| Extremum { value, selection: selection_at(i) }).collect();
    let bounds = IntervalPotential::new(
        lower.iter().zip(&upper).map(|(l, u)| ProbabilityInterval::new(l.value, u.value)).collect(),
    );
    Ok(ExhaustiveResult { bounds, lower, upper, selections: total, skipped: result.skipped })
}

/// Tight bounds on `p(query = category | evidence)` with the default cap.
pub fn exhaustive_bounds(
    net: &CredalNetwork,
    query: VarId,
    category: usize,
    evidence: &Evidence,
) -> Result<ProbabilityInterval, InferenceError> {
    check_query(net, query, evidence)?;
    check_category(net, query, category)?;
    Ok(exhaustive(net, query, evidence, DEFAULT_EXHAUSTIVE_CAP)?.bounds[category])
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::model::{encode_config, ConditionalCredalTable, Variable};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    pub(crate) fn d(p: &[f64]) -> Distribution {
        Distribution::new(p.to_vec()).unwrap()
    }

    pub(crate) fn collider() -> CredalNetwork {
        let y = [0.9, 0.5, 0.4, 0.1].iter().map(|&p| vec![d(&[p, 1.0 - p])]).collect();
        CredalNetwork::new(
            vec![
                Variable::with_cardinality("X", 2),
                Variable::with_cardinality("Y", 2),
                Variable::with_cardinality("Z", 2),
            ],
            vec![
                ConditionalCredalTable::root(0, vec![d(&[0.6, 0.4])]),
                ConditionalCredalTable::new(1, vec![0, 2], y),
                ConditionalCredalTable::root(2, vec![d(&[0.3, 0.7])]),
            ],
        )
        .unwrap()
    }

    /// Random polytree with arbitrary orientation and random vertex lists,
    /// independent of the harness generator.
    pub(crate) fn random_net(rng: &mut ChaCha8Rng, n: usize, max_card: usize, max_vertices: usize) -> CredalNetwork {
        let cards: Vec<usize> = (0..n).map(|_| rng.random_range(1..=max_card)).collect();
        let mut parents = vec![Vec::new(); n];
        for v in 1..n {
            let u = rng.random_range(0..v);
            if rng.random_bool(0.5) {
                parents[v].push(u);
            } else {
                parents[u].push(v);
            }
        }
        let mut point = |k: usize| {
            let raw: Vec<f64> = (0..k).map(|_| rng.random_range(0.0..1.0f64) + 1e-3).collect();
            let s: f64 = raw.iter().sum();
            Distribution::from_vec_unchecked(raw.iter().map(|x| x / s).collect())
        };
        let mut tables = Vec::new();
        for v in 0..n {
            let configs: usize = parents[v].iter().map(|&p| cards[p]).product();
            let sets = (0..configs)
                .map(|_| {
                    let m = 1 + (point(2)[0] * max_vertices as f64) as usize;
                    (0..m.min(max_vertices)).map(|_| point(cards[v])).collect()
                })
                .collect();
            tables.push(ConditionalCredalTable::new(v, parents[v].clone(), sets));
        }
        let vars = (0..n).map(|v| Variable::with_cardinality(format!("N{v}"), cards[v])).collect();
        CredalNetwork::new(vars, tables).unwrap()
    }

    /// Full joint summation over every assignment of every variable.
    fn naive(sets: &dyn LocalSets, query: VarId, evidence: &Evidence) -> Vec<f64> {
        let net = sets.network();
        let radices: Vec<usize> = (0..net.len()).map(|v| net.cardinality(v)).collect();
        let total: usize = radices.iter().product();
        let mut out = vec![0.0; net.cardinality(query)];
        for index in 0..total {
            let x = decode_config(index, &radices);
            if evidence.iter().any(|(v, c)| x[v] != c) {
                continue;
            }
            let mut p = 1.0;
            for v in 0..net.len() {
                let pa: Vec<usize> = net.parents(v).iter().map(|&u| x[u]).collect();
                let config = encode_config(&pa, &net.parent_cardinalities(v));
                p *= sets.vertices(LocalSetId::new(v, config))[0][x[v]];
            }
            out[x[query]] += p;
        }
        out
    }

    #[test]
    fn chain_and_root_examples() {
        let net = CredalNetwork::new(
            vec![Variable::with_cardinality("X", 2), Variable::with_cardinality("Y", 2)],
            vec![
                ConditionalCredalTable::root(0, vec![d(&[0.5, 0.5])]),
                ConditionalCredalTable::new(1, vec![0], vec![vec![d(&[1.0, 0.0])], vec![d(&[0.0, 1.0])]]),
            ],
        )
        .unwrap();
        let view = BayesNetView::new(&net).unwrap();
        assert_eq!(marginal(&view, 1, &Evidence::new()).unwrap().probs(), &[0.5, 0.5]);
        assert_eq!(marginal(&view, 0, &Evidence::new()).unwrap().probs(), &[0.5, 0.5]);
        assert_eq!(evidence_probability(&view, &Evidence::new()).unwrap(), 1.0);
        let c = collider();
        let view = BayesNetView::new(&c).unwrap();
        assert_eq!(evidence_probability(&view, &Evidence::new().with(2, 0)).unwrap(), 0.3);
    }

    #[test]
    fn collider_example() {
        let net = collider();
        let view = BayesNetView::new(&net).unwrap();
        let hand: f64 = 0.6 * (0.3 * 0.9 + 0.7 * 0.5) + 0.4 * (0.3 * 0.4 + 0.7 * 0.1);
        assert!((hand - 0.448).abs() < 1e-15);
        let p = marginal(&view, 1, &Evidence::new()).unwrap();
        assert!((p[0] - 0.448).abs() < 1e-12);
        let pe = evidence_probability(&view, &Evidence::new().with(1, 0)).unwrap();
        assert!((pe - 0.448).abs() < 1e-12);
        // Explaining away: p(x0 | y0) = 0.6 * 0.62 / 0.448
        let px = marginal(&view, 0, &Evidence::new().with(1, 0)).unwrap();
        assert!((px[0] - 0.6 * 0.62 / 0.448).abs() < 1e-12);
    }

    #[test]
    fn zero_evidence_is_reported() {
        let net = CredalNetwork::new(
            vec![Variable::with_cardinality("X", 2), Variable::with_cardinality("Y", 2)],
            vec![ConditionalCredalTable::root(0, vec![d(&[1.0, 0.0])]), ConditionalCredalTable::root(1, vec![d(&[0.5, 0.5])])],
        )
        .unwrap();
        let view = BayesNetView::new(&net).unwrap();
        let e = Evidence::new().with(0, 1);
        assert_eq!(evidence_probability(&view, &e).unwrap(), 0.0);
        assert_eq!(marginal(&view, 1, &e), Err(InferenceError::ZeroEvidence));
        assert_eq!(marginal(&view, 0, &e), Err(InferenceError::QueryObserved("X".into())));
        assert!(matches!(BayesNetView::new(&random_net(&mut ChaCha8Rng::seed_from_u64(3), 1, 2, 1)), Ok(_)));
    }

    #[test]
    fn exhaustive_single_node_and_chain() {
        let net = CredalNetwork::new(
            vec![Variable::with_cardinality("X", 2)],
            vec![ConditionalCredalTable::root(0, vec![d(&[0.2, 0.8]), d(&[0.5, 0.5])])],
        )
        .unwrap();
        let b = exhaustive_bounds(&net, 0, 0, &Evidence::new()).unwrap();
        assert_eq!((b.lower, b.upper), (0.2, 0.5));

        let two = |a: f64, b: f64| vec![d(&[a, 1.0 - a]), d(&[b, 1.0 - b])];
        let net = CredalNetwork::new(
            vec![Variable::with_cardinality("X", 2), Variable::with_cardinality("Y", 2)],
            vec![
                ConditionalCredalTable::root(0, two(0.2, 0.7)),
                ConditionalCredalTable::new(1, vec![0], vec![two(0.1, 0.6), two(0.3, 0.9)]),
            ],
        )
        .unwrap();
        // Hand enumeration of the 8 selections of p(y0).
        let mut values = Vec::new();
        for px in [0.2, 0.7] {
            for a in [0.1, 0.6] {
                for b in [0.3, 0.9] {
                    values.push(px * a + (1.0 - px) * b);
                }
            }
        }
        let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let r = exhaustive(&net, 1, &Evidence::new(), DEFAULT_EXHAUSTIVE_CAP).unwrap();
        assert_eq!(r.selections, 8);
        assert!((r.bounds[0].lower - lo).abs() < 1e-15 && (r.bounds[0].upper - hi).abs() < 1e-15);
        // Recorded witnesses replay.
        for (ext, want) in [(&r.lower[0], lo), (&r.upper[0], hi)] {
            let restricted = net.restricted(&ext.selection);
            let p = marginal(&BayesNetView::new(&restricted).unwrap(), 1, &Evidence::new()).unwrap();
            assert!((p[0] - want).abs() < 1e-15);
        }
        assert!(matches!(
            exhaustive(&net, 1, &Evidence::new(), 4),
            Err(InferenceError::CapExceeded { .. })
        ));
    }

    #[test]
    fn exhaustive_skips_impossible_selections() {
        let net = CredalNetwork::new(
            vec![Variable::with_cardinality("X", 2), Variable::with_cardinality("Y", 2)],
            vec![
                ConditionalCredalTable::root(0, vec![d(&[1.0, 0.0]), d(&[0.5, 0.5])]),
                ConditionalCredalTable::new(1, vec![0], vec![vec![d(&[0.2, 0.8])], vec![d(&[0.6, 0.4])]]),
            ],
        )
        .unwrap();
        let r = exhaustive(&net, 1, &Evidence::new().with(0, 1), DEFAULT_EXHAUSTIVE_CAP).unwrap();
        assert_eq!((r.selections, r.skipped), (2, 1));
        assert!((r.bounds[0].lower - 0.6).abs() < 1e-15 && (r.bounds[0].upper - 0.6).abs() < 1e-15);

        let net = CredalNetwork::new(
            vec![Variable::with_cardinality("X", 2), Variable::with_cardinality("Y", 2)],
            vec![ConditionalCredalTable::root(0, vec![d(&[1.0, 0.0])]), ConditionalCredalTable::root(1, vec![d(&[0.5, 0.5]), d(&[0.1, 0.9])])],
        )
        .unwrap();
        assert_eq!(
            exhaustive(&net, 1, &Evidence::new().with(0, 1), DEFAULT_EXHAUSTIVE_CAP),
            Err(InferenceError::ZeroEvidence)
        );
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn elimination_matches_full_joint(seed in any::<u64>(), n in 1usize..8) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let net = random_net(&mut rng, n, 3, 1);
            let query = rng.random_range(0..n);
            let mut evidence = Evidence::new();
            for v in 0..n {
                if v != query && rng.random_bool(0.3) {
                    evidence.insert(v, rng.random_range(0..net.cardinality(v)));
                }
            }
            let want = naive(&net, query, &evidence);
            let pe: f64 = want.iter().sum();
            let view = BayesNetView::new(&net).unwrap();
            let got_pe = evidence_probability(&view, &evidence).unwrap();
            prop_assert!((got_pe - pe).abs() < 1e-12);
            let p = marginal(&view, query, &evidence).unwrap();
            prop_assert!((p.probs().iter().sum::<f64>() - 1.0).abs() < 1e-9);
            for x in 0..p.len() {
                prop_assert!((p[x] - want[x] / pe).abs() < 1e-12);
            }
        }

        #[test]
        fn exhaustive_matches_selection_replay(seed in any::<u64>(), n in 1usize..5) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let net = random_net(&mut rng, n, 2, 2);
            let query = rng.random_range(0..n);
            let r = exhaustive(&net, query, &Evidence::new(), DEFAULT_EXHAUSTIVE_CAP).unwrap();
            // Brute force over every total selection of every set.
            let radices: Vec<usize> = net.local_sets().map(|id| net.vertices(id).len()).collect();
            let total: usize = radices.iter().product();
            let mut lo = vec![f64::INFINITY; net.cardinality(query)];
            let mut hi = vec![f64::NEG_INFINITY; net.cardinality(query)];
            for index in 0..total {
                let digits = decode_config(index, &radices);
                let sel = VertexSelection::total_from(&net, |id| digits[net.flat_index(id)]);
                let restricted = net.restricted(&sel);
                let joint = naive(&restricted, query, &Evidence::new());
                for x in 0..joint.len() {
                    lo[x] = lo[x].min(joint[x]);
                    hi[x] = hi[x].max(joint[x]);
                }
            }
            for x in 0..lo.len() {
                prop_assert!((r.bounds[x].lower - lo[x]).abs() < 1e-12);
                prop_assert!((r.bounds[x].upper - hi[x]).abs() < 1e-12);
                for (ext, want) in [(&r.lower[x], lo[x]), (&r.upper[x], hi[x])] {
                    let restricted = net.restricted(&ext.selection);
                    let p = marginal(&BayesNetView::new(&restricted).unwrap(), query, &Evidence::new()).unwrap();
                    prop_assert!((p[x] - want).abs() < 1e-12);
                }
            }
        }
    }
}
