//! Interval-valued belief propagation with annihilation/reinforcement
//! normalization (the A/R outer approximation).
//!
//! Messages toward a child (`π`) are boxes around a distribution. Messages
//! toward a parent (`λ`) are boxes around a likelihood vector known only up
//! to a positive factor, so they can be rescaled freely.

use std::cell::RefCell;

use crate::error::{check_query, InferenceError};
use crate::exact::evidence_possible;
use crate::geometry::{constrained_extreme_mass, greedy_mass};
use crate::model::{
    decode_config, encode_config, interval_projection, CredalNetwork, Direction, Evidence, IntervalPotential,
    LocalSetId, LocalSets, ProbabilityInterval, VarId,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MessageKind {
    /// Parent to child.
    Pi,
    /// Child to parent.
    Lambda,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntervalMessage {
    pub kind: MessageKind,
    pub source: VarId,
    pub target: VarId,
    pub payload: IntervalPotential,
}

fn interval(lower: f64, upper: f64) -> ProbabilityInterval {
    let (l, u) = (lower.clamp(0.0, 1.0), upper.clamp(0.0, 1.0));
    ProbabilityInterval::new(l.min(u), l.max(u))
}

/// Normalizes an interval likelihood: per category,
/// `l_i / (l_i + sum_{j != i} u_j)` and `u_i / (u_i + sum_{j != i} l_j)`.
pub fn ar_normalize(potential: &IntervalPotential) -> Result<IntervalPotential, InferenceError> {
    let b = potential.bounds();
    if b.iter().all(|x| x.upper <= 0.0) {
        return Err(InferenceError::ZeroEvidence);
    }
    let out = (0..b.len())
        .map(|i| {
            let others_upper: f64 = (0..b.len()).filter(|&j| j != i).map(|j| b[j].upper).sum();
            let others_lower: f64 = (0..b.len()).filter(|&j| j != i).map(|j| b[j].lower).sum();
            let (l, u) = (b[i].lower, b[i].upper);
            if u <= 0.0 {
                return ProbabilityInterval::point(0.0);
            }
            let lower = if l + others_upper > 0.0 { l / (l + others_upper) } else { 1.0 };
            interval(lower, u / (u + others_lower))
        })
        .collect();
    Ok(IntervalPotential::new(out))
}

/// Componentwise interval product; the empty product is all `[1, 1]`.
pub fn lambda_combine(messages: &[IntervalPotential], cardinality: usize) -> IntervalPotential {
    messages.iter().fold(IntervalPotential::constant(cardinality, 1.0), |acc, m| acc.product(m))
}

/// Tight bounds on `p_i λ_i / sum_j p_j λ_j` for `p` in the box `pi` (over
/// distributions) and `λ` in the box `lambda` (up to scale).
///
/// For the lower bound, `p_i` sits at its smallest feasible value, `λ_i` at
/// its lower end, and the remaining mass goes greedily to the largest
/// `λ_j` upper ends. The upper bound is symmetric.
pub fn normalize_product(
    pi: &IntervalPotential,
    lambda: &IntervalPotential,
) -> Result<IntervalPotential, InferenceError> {
    let n = pi.len();
    let (pl, pu) = (pi.lowers(), pi.uppers());
    let (ll, lu) = (lambda.lowers(), lambda.uppers());
    // A constant likelihood leaves the distribution alone; skipping the
    // division keeps e.g. the projection of a root set bit-exact.
    if ll[0] > 0.0 && ll.iter().chain(&lu).all(|&v| v == ll[0]) && pi.lower_sum() <= 1.0 && pi.upper_sum() >= 1.0 {
        return Ok(IntervalPotential::new(pi.bounds().iter().map(|b| interval(b.lower, b.upper)).collect()));
    }
    let (_, best) = constrained_extreme_mass(&lu, pi.bounds(), Direction::Max)?;
    if best <= 0.0 {
        return Err(InferenceError::ZeroEvidence);
    }
    let sum_l: f64 = pl.iter().sum();
    let sum_u: f64 = pu.iter().sum();
    let others = |v: &[f64], i: usize| -> Vec<f64> { (0..n).filter(|&j| j != i).map(|j| v[j]).collect() };
    let out = (0..n)
        .map(|i| {
            let (ol, ou) = (others(&pl, i), others(&pu, i));
            let p_min = pl[i].max(1.0 - (sum_u - pu[i])).clamp(0.0, pu[i].max(0.0));
            let coeffs = others(&lu, i);
            let q = greedy_mass(&coeffs, &ol, &ou, 1.0 - p_min, Direction::Max);
            let b: f64 = q.iter().zip(&coeffs).map(|(a, c)| a * c).sum();
            let a = p_min * ll[i];
            let lower = if b <= 0.0 { 1.0 } else { a / (a + b) };

            let p_max = pu[i].min(1.0 - (sum_l - pl[i])).max(pl[i]);
            let coeffs = others(&ll, i);
            let q = greedy_mass(&coeffs, &ol, &ou, 1.0 - p_max, Direction::Min);
            let b: f64 = q.iter().zip(&coeffs).map(|(a, c)| a * c).sum();
            let a = p_max * lu[i];
            let upper = if a <= 0.0 { 0.0 } else { a / (a + b) };
            interval(lower, upper)
        })
        .collect();
    Ok(IntervalPotential::new(out))
}

/// Box over the joint configurations of several variables (mixed radix,
/// first variable most significant) from their individual boxes.
pub(crate) fn joint_box(messages: &[&IntervalPotential]) -> Vec<ProbabilityInterval> {
    let radices: Vec<usize> = messages.iter().map(|m| m.len()).collect();
    let total: usize = radices.iter().product();
    (0..total)
        .map(|c| {
            let digits = decode_config(c, &radices);
            let (mut l, mut u) = (1.0, 1.0);
            for (m, &d) in messages.iter().zip(&digits) {
                l *= m[d].lower;
                u *= m[d].upper;
            }
            ProbabilityInterval::new(l, u)
        })
        .collect()
}

fn check_messages(net: &CredalNetwork, child: VarId, messages: &[IntervalPotential]) -> Result<(), InferenceError> {
    let parents = net.parents(child);
    if messages.len() != parents.len() {
        return Err(InferenceError::Config(format!(
            "{} parent messages for {} parents",
            messages.len(),
            parents.len()
        )));
    }
    for (m, &p) in messages.iter().zip(parents) {
        if m.len() != net.cardinality(p) {
            return Err(crate::model::ModelError::DimensionMismatch { expected: net.cardinality(p), found: m.len() }.into());
        }
    }
    Ok(())
}

/// `π(X)` from the parents' `π` messages by greedy extreme mass over the
/// joint parent box. Roots get the interval projection of their set.
pub fn pi_from_parents(
    sets: &dyn LocalSets,
    child: VarId,
    parent_messages: &[IntervalPotential],
) -> Result<IntervalPotential, InferenceError> {
    let net = sets.network();
    check_messages(net, child, parent_messages)?;
    let configs = net.table(child).configurations();
    let projections = (0..configs)
        .map(|c| interval_projection(sets.vertices(LocalSetId::new(child, c))))
        .collect::<Result<Vec<_>, _>>()?;
    if parent_messages.is_empty() {
        return Ok(projections.into_iter().next().unwrap());
    }
    let beta = joint_box(&parent_messages.iter().collect::<Vec<_>>());
    let out = (0..net.cardinality(child))
        .map(|x| {
            let lo: Vec<f64> = projections.iter().map(|p| p[x].lower).collect();
            let hi: Vec<f64> = projections.iter().map(|p| p[x].upper).collect();
            let (_, lower) = constrained_extreme_mass(&lo, &beta, Direction::Min)?;
            let (_, upper) = constrained_extreme_mass(&hi, &beta, Direction::Max)?;
            Ok(interval(lower, upper))
        })
        .collect::<Result<Vec<_>, InferenceError>>()?;
    Ok(IntervalPotential::new(out))
}

/// `λ_X(U_j)`: bounds on `sum_x λ(x) sum_{u_-j} p(x | u) prod_{i != j} π_i(u_i)`,
/// normalized. `parent_messages[j]` is not read.
pub fn lambda_to_parent(
    sets: &dyn LocalSets,
    child: VarId,
    parent: usize,
    parent_messages: &[IntervalPotential],
    lambda: &IntervalPotential,
) -> Result<IntervalPotential, InferenceError> {
    let net = sets.network();
    check_messages(net, child, parent_messages)?;
    let radices = net.parent_cardinalities(child);
    let configs = net.table(child).configurations();
    let (ll, lu) = (lambda.lowers(), lambda.uppers());
    let mut g_lo = Vec::with_capacity(configs);
    let mut g_hi = Vec::with_capacity(configs);
    for c in 0..configs {
        let b = interval_projection(sets.vertices(LocalSetId::new(child, c)))?;
        g_lo.push(constrained_extreme_mass(&ll, b.bounds(), Direction::Min)?.1);
        g_hi.push(constrained_extreme_mass(&lu, b.bounds(), Direction::Max)?.1);
    }
    let others: Vec<usize> = (0..radices.len()).filter(|&i| i != parent).collect();
    let other_radices: Vec<usize> = others.iter().map(|&i| radices[i]).collect();
    let other_box = joint_box(&others.iter().map(|&i| &parent_messages[i]).collect::<Vec<_>>());
    let out = (0..radices[parent])
        .map(|uj| {
            let full = |o: usize| {
                let od = decode_config(o, &other_radices);
                let mut digits = vec![0; radices.len()];
                digits[parent] = uj;
                for (k, &i) in others.iter().enumerate() {
                    digits[i] = od[k];
                }
                encode_config(&digits, &radices)
            };
            let lo: Vec<f64> = (0..other_box.len()).map(|o| g_lo[full(o)]).collect();
            let hi: Vec<f64> = (0..other_box.len()).map(|o| g_hi[full(o)]).collect();
            let (_, lower) = constrained_extreme_mass(&lo, &other_box, Direction::Min)?;
            let (_, upper) = constrained_extreme_mass(&hi, &other_box, Direction::Max)?;
            Ok(ProbabilityInterval::new(lower.max(0.0), upper.max(lower.max(0.0))))
        })
        .collect::<Result<Vec<_>, InferenceError>>()?;
    ar_normalize(&IntervalPotential::new(out))
}

/// The two message constructions that involve a conditional table.
pub(crate) trait MessageRules {
    fn pi(&self, sets: &dyn LocalSets, child: VarId, parents: &[IntervalPotential])
        -> Result<IntervalPotential, InferenceError>;

    fn lambda(
        &self,
        sets: &dyn LocalSets,
        child: VarId,
        parent: usize,
        parents: &[IntervalPotential],
        lambda: &IntervalPotential,
    ) -> Result<IntervalPotential, InferenceError>;
}

pub(crate) struct Tessem;

impl MessageRules for Tessem {
    fn pi(&self, sets: &dyn LocalSets, child: VarId, parents: &[IntervalPotential]) -> Result<IntervalPotential, InferenceError> {
        pi_from_parents(sets, child, parents)
    }

    fn lambda(
        &self,
        sets: &dyn LocalSets,
        child: VarId,
        parent: usize,
        parents: &[IntervalPotential],
        lambda: &IntervalPotential,
    ) -> Result<IntervalPotential, InferenceError> {
        lambda_to_parent(sets, child, parent, parents, lambda)
    }
}

struct Schedule<'a, R: MessageRules> {
    sets: &'a dyn LocalSets,
    relevant: Vec<bool>,
    evidence: &'a Evidence,
    rules: &'a R,
    trace: RefCell<Vec<IntervalMessage>>,
}

impl<R: MessageRules> Schedule<'_, R> {
    fn net(&self) -> &CredalNetwork {
        self.sets.network()
    }

    /// Incoming messages at `x` from every relevant neighbour except `skip`.
    fn gather(&self, x: VarId, skip: Option<VarId>) -> Result<(Vec<IntervalPotential>, IntervalPotential), InferenceError> {
        let net = self.net();
        let parents = net
            .parents(x)
            .iter()
            .map(|&u| {
                if Some(u) == skip {
                    Ok(IntervalPotential::constant(net.cardinality(u), 1.0))
                } else {
                    self.message(u, x)
                }
            })
            .collect::<Result<Vec<_>, _>>()?;
        let children = net
            .children(x)
            .iter()
            .filter(|&&c| self.relevant[c] && Some(c) != skip)
            .map(|&c| self.message(c, x))
            .collect::<Result<Vec<_>, _>>()?;
        let mut lambda = lambda_combine(&children, net.cardinality(x));
        if let Some(e) = self.evidence.get(x) {
            let mut mask = vec![0.0; net.cardinality(x)];
            mask[e] = 1.0;
            lambda = lambda.product(&IntervalPotential::degenerate(&mask));
        }
        Ok((parents, lambda))
    }

    /// The message `x` sends to its neighbour `to`.
    fn message(&self, x: VarId, to: VarId) -> Result<IntervalPotential, InferenceError> {
        let (parents, lambda) = self.gather(x, Some(to))?;
        let (kind, payload) = match self.net().parents(x).iter().position(|&u| u == to) {
            Some(j) => (MessageKind::Lambda, self.rules.lambda(self.sets, x, j, &parents, &lambda)?),
            None => {
                let pi = self.rules.pi(self.sets, x, &parents)?;
                (MessageKind::Pi, normalize_product(&pi, &lambda)?)
            }
        };
        self.trace.borrow_mut().push(IntervalMessage { kind, source: x, target: to, payload: payload.clone() });
        Ok(payload)
    }
}

/// Bounds on `p(query | evidence)` and every message computed on the way.
pub(crate) fn run_schedule<R: MessageRules>(
    sets: &dyn LocalSets,
    query: VarId,
    evidence: &Evidence,
    rules: &R,
) -> Result<(IntervalPotential, Vec<IntervalMessage>), InferenceError> {
    let net = sets.network();
    check_query(net, query, evidence)?;
    if !evidence_possible(sets, evidence)? {
        return Err(InferenceError::ZeroEvidence);
    }
    let schedule = Schedule {
        sets,
        relevant: net.relevant_variables(query, evidence),
        evidence,
        rules,
        trace: RefCell::new(Vec::new()),
    };
    let (parents, lambda) = schedule.gather(query, None)?;
    let pi = rules.pi(sets, query, &parents)?;
    let belief = normalize_product(&pi, &lambda)?;
    Ok((belief, schedule.trace.into_inner()))
}

/// Outer bounds on `p(query = x | evidence)` for every category.
///
/// Messages flow toward the query only, over the variables that can
/// influence it; messages leaving the query cannot change its belief.
pub fn propagate(sets: &dyn LocalSets, query: VarId, evidence: &Evidence) -> Result<IntervalPotential, InferenceError> {
    Ok(run_schedule(sets, query, evidence, &Tessem)?.0)
}

/// As [`propagate`], also returning the messages in the order computed.
pub fn propagate_traced(
    sets: &dyn LocalSets,
    query: VarId,
    evidence: &Evidence,
) -> Result<(IntervalPotential, Vec<IntervalMessage>), InferenceError> {
    run_schedule(sets, query, evidence, &Tessem)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::tests::{collider, d, random_net};
    use crate::exact::{exhaustive, marginal, BayesNetView, DEFAULT_EXHAUSTIVE_CAP};
    use crate::model::{ConditionalCredalTable, Variable};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn boxed(b: &[(f64, f64)]) -> IntervalPotential {
        IntervalPotential::new(b.iter().map(|&(l, u)| ProbabilityInterval::new(l, u)).collect())
    }

    fn close(a: &IntervalPotential, b: &IntervalPotential, tol: f64) -> bool {
        a.len() == b.len()
            && a.bounds().iter().zip(b.bounds()).all(|(x, y)| (x.lower - y.lower).abs() <= tol && (x.upper - y.upper).abs() <= tol)
    }

    #[test]
    fn normalize_examples() {
        assert_eq!(ar_normalize(&boxed(&[(1.0, 1.0), (1.0, 1.0)])).unwrap(), boxed(&[(0.5, 0.5), (0.5, 0.5)]));
        assert_eq!(ar_normalize(&boxed(&[(0.5, 0.5)])).unwrap(), boxed(&[(1.0, 1.0)]));
        let tight = boxed(&[(0.2, 0.4), (0.6, 0.8)]);
        assert!(close(&ar_normalize(&tight).unwrap(), &tight, 1e-15));
        assert_eq!(ar_normalize(&boxed(&[(0.0, 0.0), (0.0, 0.0)])), Err(InferenceError::ZeroEvidence));
    }

    #[test]
    fn normalize_tight_example_by_enumeration() {
        // Oracle: normalize every corner of the box and project.
        let b = [(0.2, 0.4), (0.6, 0.8)];
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for x in [b[0].0, b[0].1] {
            for y in [b[1].0, b[1].1] {
                let q = [x / (x + y), y / (x + y)];
                for k in 0..2 {
                    lo[k] = lo[k].min(q[k]);
                    hi[k] = hi[k].max(q[k]);
                }
            }
        }
        let got = ar_normalize(&boxed(&b)).unwrap();
        for k in 0..2 {
            assert!((got[k].lower - lo[k]).abs() < 1e-15 && (got[k].upper - hi[k]).abs() < 1e-15);
        }
    }

    #[test]
    fn combine_examples() {
        assert_eq!(lambda_combine(&[], 2), boxed(&[(1.0, 1.0), (1.0, 1.0)]));
        let a = boxed(&[(0.2, 0.5), (0.5, 0.8)]);
        assert_eq!(lambda_combine(std::slice::from_ref(&a), 2), a);
        let got = lambda_combine(&[a, boxed(&[(0.4, 0.4), (0.6, 0.6)])], 2);
        assert!(close(&got, &boxed(&[(0.08, 0.2), (0.3, 0.48)]), 1e-15));
    }

    fn collider_with(table: Vec<Vec<crate::model::Distribution>>) -> CredalNetwork {
        CredalNetwork::new(
            vec![Variable::with_cardinality("X", 2), Variable::with_cardinality("Y", 2), Variable::with_cardinality("Z", 2)],
            vec![
                ConditionalCredalTable::root(0, vec![d(&[0.5, 0.5])]),
                ConditionalCredalTable::new(1, vec![0, 2], table),
                ConditionalCredalTable::root(2, vec![d(&[0.5, 0.5])]),
            ],
        )
        .unwrap()
    }

    #[test]
    fn pi_examples() {
        let net = collider();
        let point = |p: f64| boxed(&[(p, p), (1.0 - p, 1.0 - p)]);
        let pi = pi_from_parents(&net, 1, &[point(0.6), point(0.3)]).unwrap();
        assert!(pi.is_degenerate());
        assert!((pi[0].lower - 0.448).abs() < 1e-12);

        let root = CredalNetwork::new(
            vec![Variable::with_cardinality("X", 2)],
            vec![ConditionalCredalTable::root(0, vec![d(&[0.2, 0.8]), d(&[0.5, 0.5])])],
        )
        .unwrap();
        assert_eq!(pi_from_parents(&root, 0, &[]).unwrap(), boxed(&[(0.2, 0.5), (0.5, 0.8)]));
    }

    #[test]
    fn pi_collider_matches_joint_polytope() {
        let p_y0 = [0.9, 0.5, 0.4, 0.1];
        let net = collider_with(p_y0.iter().map(|&p| vec![d(&[p, 1.0 - p])]).collect());
        let m = boxed(&[(0.3, 0.8), (0.2, 0.7)]);
        let pi = pi_from_parents(&net, 1, &[m.clone(), m]).unwrap();
        // Oracle: vertices of {q in joint box, sum q = 1}, one coordinate free.
        let lo = [0.3 * 0.3, 0.3 * 0.2, 0.2 * 0.3, 0.2 * 0.2];
        let hi = [0.8 * 0.8, 0.8 * 0.7, 0.7 * 0.8, 0.7 * 0.7];
        let mut best = (f64::INFINITY, f64::NEG_INFINITY);
        for free in 0..4 {
            for mask in 0..8 {
                let mut q = [0.0; 4];
                let mut bit = 0;
                for k in (0..4).filter(|&k| k != free) {
                    q[k] = if mask >> bit & 1 == 1 { hi[k] } else { lo[k] };
                    bit += 1;
                }
                q[free] = 1.0 - q.iter().sum::<f64>();
                if q[free] >= lo[free] - 1e-12 && q[free] <= hi[free] + 1e-12 {
                    let v: f64 = q.iter().zip(&p_y0).map(|(a, b)| a * b).sum();
                    best = (best.0.min(v), best.1.max(v));
                }
            }
        }
        assert!((pi[0].lower - best.0).abs() < 1e-12, "{} vs {}", pi[0].lower, best.0);
        assert!((pi[0].upper - best.1).abs() < 1e-12);
    }

    #[test]
    fn single_credal_root() {
        let net = CredalNetwork::new(
            vec![Variable::with_cardinality("X", 3)],
            vec![ConditionalCredalTable::root(0, vec![d(&[0.2, 0.3, 0.5]), d(&[0.5, 0.4, 0.1]), d(&[0.1, 0.8, 0.1])])],
        )
        .unwrap();
        let got = propagate(&net, 0, &Evidence::new()).unwrap();
        assert!(close(&got, &boxed(&[(0.1, 0.5), (0.3, 0.8), (0.1, 0.5)]), 1e-15));
    }

    #[test]
    fn trace_flows_toward_the_query() {
        let net = collider();
        let (_, trace) = propagate_traced(&net, 1, &Evidence::new()).unwrap();
        assert_eq!(trace.len(), 2);
        assert!(trace.iter().all(|m| m.kind == MessageKind::Pi && m.target == 1));
        let (_, trace) = propagate_traced(&net, 0, &Evidence::new().with(1, 0)).unwrap();
        assert_eq!(
            trace.iter().map(|m| (m.kind, m.source, m.target)).collect::<Vec<_>>(),
            vec![(MessageKind::Pi, 2, 1), (MessageKind::Lambda, 1, 0)]
        );
    }

    fn random_evidence(rng: &mut ChaCha8Rng, net: &CredalNetwork, query: VarId) -> Evidence {
        let mut e = Evidence::new();
        for v in 0..net.len() {
            if v != query && rng.random_bool(0.3) {
                e.insert(v, rng.random_range(0..net.cardinality(v)));
            }
        }
        e
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(96))]

        #[test]
        fn exact_on_precise_networks(seed in any::<u64>(), n in 1usize..9) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let net = random_net(&mut rng, n, 3, 1);
            let query = rng.random_range(0..n);
            let evidence = random_evidence(&mut rng, &net, query);
            let view = BayesNetView::new(&net).unwrap();
            match marginal(&view, query, &evidence) {
                Ok(p) => {
                    let got = propagate(&net, query, &evidence).unwrap();
                    for x in 0..p.len() {
                        prop_assert!((got[x].lower - p[x]).abs() < 1e-9 && (got[x].upper - p[x]).abs() < 1e-9,
                            "{:?} vs {:?}", got, p);
                    }
                }
                Err(_) => prop_assert_eq!(propagate(&net, query, &evidence), Err(InferenceError::ZeroEvidence)),
            }
        }

        #[test]
        fn encloses_exhaustive(seed in any::<u64>(), n in 1usize..7) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let net = random_net(&mut rng, n, 3, 2);
            let query = rng.random_range(0..n);
            let evidence = random_evidence(&mut rng, &net, query);
            if let Ok(r) = exhaustive(&net, query, &evidence, 1 << 16) {
                let got = propagate(&net, query, &evidence).unwrap();
                prop_assert!(got.encloses(&r.bounds, 1e-9), "{:?} vs {:?}", got, r.bounds);
            }
        }

        #[test]
        fn adding_a_vertex_never_narrows(seed in any::<u64>(), n in 1usize..7) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let net = random_net(&mut rng, n, 3, 2);
            let query = rng.random_range(0..n);
            let before = propagate(&net, query, &Evidence::new()).unwrap();
            let flat = rng.random_range(0..net.local_set_count());
            let id = net.local_set_at(flat);
            let card = net.cardinality(id.variable);
            let mut tables = net.tables().to_vec();
            let mut sets = tables[id.variable].sets().to_vec();
            let raw: Vec<f64> = (0..card).map(|_| rng.random_range(0.01..1.0)).collect();
            let s: f64 = raw.iter().sum();
            sets[id.config].push(d(&raw.iter().map(|x| x / s).collect::<Vec<_>>()));
            tables[id.variable] = ConditionalCredalTable::new(id.variable, net.parents(id.variable).to_vec(), sets);
            let wider = CredalNetwork::new(net.variables().to_vec(), tables).unwrap();
            let after = propagate(&wider, query, &Evidence::new()).unwrap();
            prop_assert!(after.encloses(&before, 1e-12));
        }

        #[test]
        fn normalize_is_idempotent_on_binary(a in 0.0f64..1.0, b in 0.0f64..1.0, c in 0.01f64..1.0, e in 0.0f64..1.0) {
            let p = boxed(&[(a.min(b), a.max(b)), (c.min(e), c.max(e))]);
            let once = ar_normalize(&p).unwrap();
            let twice = ar_normalize(&once).unwrap();
            prop_assert!(close(&once, &twice, 1e-12));
            prop_assert!(once.lower_sum() <= 1.0 + 1e-12 && once.upper_sum() >= 1.0 - 1e-12);
        }
    }

    #[test]
    fn unused_table_entries_keep_soundness() {
        // Wide table on one configuration only.
        let net = collider_with(vec![
            vec![d(&[0.9, 0.1]), d(&[0.2, 0.8])],
            vec![d(&[0.5, 0.5])],
            vec![d(&[0.4, 0.6])],
            vec![d(&[0.1, 0.9])],
        ]);
        let r = exhaustive(&net, 1, &Evidence::new(), DEFAULT_EXHAUSTIVE_CAP).unwrap();
        assert!(propagate(&net, 1, &Evidence::new()).unwrap().encloses(&r.bounds, 1e-12));
    }
}
