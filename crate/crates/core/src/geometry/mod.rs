//! Polytope utilities over credal sets and probability boxes.

pub mod lp;

use rand::Rng;
use rand_distr::Exp1;
use thiserror::Error;

use crate::model::{Direction, Distribution, IntervalPotential, ProbabilityInterval};

/// A point of a credal set, or an unnormalized potential row.
pub type Point = Vec<f64>;

/// Componentwise tolerance under which two points are the same point.
pub const DEDUP_TOLERANCE: f64 = 1e-12;

/// Hull pruning is skipped above this many points.
pub const DEFAULT_PRUNE_CAP: usize = 256;

/// Slack accepted on `sum(lower) <= 1 <= sum(upper)`.
pub const FEASIBILITY_TOLERANCE: f64 = 1e-9;

const HULL_TOLERANCE: f64 = 1e-11;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("empty point set")]
    Empty,
    #[error("point has dimension {found}, expected {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("non-finite coordinate")]
    NonFinite,
    #[error("infeasible bounds: lower sum {lower_sum}, upper sum {upper_sum}")]
    Infeasible { lower_sum: f64, upper_sum: f64 },
    #[error("bound {index} has lower > upper")]
    Inverted { index: usize },
    #[error("dimension must be at least 1")]
    ZeroDimension,
}

fn same_point(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).all(|(x, y)| (x - y).abs() <= DEDUP_TOLERANCE)
}

/// Drops duplicates, keeping the first copy.
pub fn dedup_points(points: Vec<Point>) -> Vec<Point> {
    // Kept points indexed by first coordinate, so each lookup only scans
    // the points within tolerance along that axis.
    let mut index: Vec<(f64, usize)> = Vec::new();
    let mut out: Vec<Point> = Vec::with_capacity(points.len());
    for p in points {
        let key = p.first().copied().unwrap_or(0.0);
        let start = index.partition_point(|&(k, _)| k < key - DEDUP_TOLERANCE);
        let duplicate = index[start..]
            .iter()
            .take_while(|&&(k, _)| k <= key + DEDUP_TOLERANCE)
            .any(|&(_, i)| same_point(&out[i], &p));
        if !duplicate {
            let at = index.partition_point(|&(k, _)| k < key);
            index.insert(at, (key, out.len()));
            out.push(p);
        }
    }
    out
}

/// Removes every point that is a convex combination of the others.
pub fn prune_redundant(points: &[Point]) -> Result<Vec<Point>, GeometryError> {
    prune_redundant_capped(points.to_vec(), DEFAULT_PRUNE_CAP)
}

/// As [`prune_redundant`], but only deduplicates when more than `cap`
/// distinct points are given.
pub fn prune_redundant_capped(points: Vec<Point>, cap: usize) -> Result<Vec<Point>, GeometryError> {
    let dim = points.first().ok_or(GeometryError::Empty)?.len();
    for p in &points {
        if p.len() != dim {
            return Err(GeometryError::DimensionMismatch { expected: dim, found: p.len() });
        }
        if p.iter().any(|x| !x.is_finite()) {
            return Err(GeometryError::NonFinite);
        }
    }
    let points = dedup_points(points);
    let n = points.len();
    if n <= 1 {
        return Ok(points);
    }
    if let Some(keep) = low_dimensional_hull(&points) {
        return Ok(points.into_iter().zip(keep).filter_map(|(p, k)| k.then_some(p)).collect());
    }
    if n > cap {
        return Ok(points);
    }

    // A strict unique maximizer or minimizer of a coordinate is a vertex.
    let mut certain = vec![false; n];
    for j in 0..dim {
        for extreme in [1.0f64, -1.0] {
            let best = (0..n)
                .max_by(|&a, &b| (extreme * points[a][j]).total_cmp(&(extreme * points[b][j])))
                .unwrap();
            let v = extreme * points[best][j];
            if (0..n).all(|k| k == best || extreme * points[k][j] < v - DEDUP_TOLERANCE) {
                certain[best] = true;
            }
        }
    }

    let mut keep = vec![true; n];
    for i in 0..n {
        if certain[i] {
            continue;
        }
        let others: Vec<&[f64]> =
            (0..n).filter(|&k| k != i && keep[k]).map(|k| points[k].as_slice()).collect();
        if lp::in_convex_hull(&points[i], &others, HULL_TOLERANCE) {
            keep[i] = false;
        }
    }
    Ok(points.into_iter().zip(keep).filter_map(|(p, k)| k.then_some(p)).collect())
}

/// Exact vertex marks for points spanning at most a plane. Points with a
/// common coordinate sum (distributions, partial Minkowski sums) lose one
/// dimension by dropping their last coordinate. `None` for higher
/// dimensions.
fn low_dimensional_hull(points: &[Point]) -> Option<Vec<bool>> {
    let n = points.len();
    let dim = points[0].len();
    let s0: f64 = points[0].iter().sum();
    let common = points.iter().all(|p| (p.iter().sum::<f64>() - s0).abs() <= DEDUP_TOLERANCE);
    let reduced = if common { dim - 1 } else { dim };
    let mut keep = vec![false; n];
    match reduced {
        0 => keep[0] = true,
        1 => {
            let lo = (0..n).min_by(|&a, &b| points[a][0].total_cmp(&points[b][0])).unwrap();
            let hi = (0..n).max_by(|&a, &b| points[a][0].total_cmp(&points[b][0]).then(b.cmp(&a))).unwrap();
            keep[lo] = true;
            keep[hi] = true;
        }
        2 => {
            let xy: Vec<(f64, f64)> = points.iter().map(|p| (p[0], p[1])).collect();
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&a, &b| xy[a].0.total_cmp(&xy[b].0).then(xy[a].1.total_cmp(&xy[b].1)).then(a.cmp(&b)));
            // Monotone chain; a point within the tolerance of the segment
            // joining its neighbours is not a vertex.
            let turns_left = |o: usize, a: usize, b: usize| {
                let (o, a, b) = (xy[o], xy[a], xy[b]);
                let cross = (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0);
                cross > HULL_TOLERANCE * ((b.0 - o.0).powi(2) + (b.1 - o.1).powi(2)).sqrt()
            };
            for pass in [order.clone(), order.iter().rev().copied().collect()] {
                let mut chain: Vec<usize> = Vec::with_capacity(n);
                for i in pass {
                    while chain.len() >= 2 && !turns_left(chain[chain.len() - 2], chain[chain.len() - 1], i) {
                        chain.pop();
                    }
                    chain.push(i);
                }
                for i in chain {
                    keep[i] = true;
                }
            }
        }
        _ => return None,
    }
    Some(keep)
}

fn check_box(bounds: &[ProbabilityInterval]) -> Result<(), GeometryError> {
    if bounds.is_empty() {
        return Err(GeometryError::Empty);
    }
    for (index, b) in bounds.iter().enumerate() {
        if !(b.lower.is_finite() && b.upper.is_finite()) {
            return Err(GeometryError::NonFinite);
        }
        if b.lower > b.upper + FEASIBILITY_TOLERANCE {
            return Err(GeometryError::Inverted { index });
        }
    }
    let lower_sum: f64 = bounds.iter().map(|b| b.lower).sum();
    let upper_sum: f64 = bounds.iter().map(|b| b.upper).sum();
    if lower_sum > 1.0 + FEASIBILITY_TOLERANCE || upper_sum < 1.0 - FEASIBILITY_TOLERANCE {
        return Err(GeometryError::Infeasible { lower_sum, upper_sum });
    }
    Ok(())
}

/// Vertices of `{p : lower <= p <= upper, sum(p) = 1}`.
///
/// Every vertex has all coordinates but (at most) one at a bound, so the
/// vertices are found by fixing one free coordinate and trying each
/// lower/upper pattern for the rest.
pub fn interval_credal_vertices(intervals: &IntervalPotential) -> Result<Vec<Distribution>, GeometryError> {
    let bounds = intervals.bounds();
    check_box(bounds)?;
    let n = bounds.len();
    if n == 1 {
        return Ok(vec![Distribution::from_vec_unchecked(vec![1.0])]);
    }
    let mut points: Vec<Point> = Vec::new();
    for free in 0..n {
        let (lo, hi) = (bounds[free].lower, bounds[free].upper);
        for mask in 0u64..(1u64 << (n - 1)) {
            let mut p = vec![0.0; n];
            let mut bit = 0;
            let mut rest = 0.0;
            for (k, b) in bounds.iter().enumerate() {
                if k == free {
                    continue;
                }
                p[k] = if mask >> bit & 1 == 1 { b.upper } else { b.lower };
                rest += p[k];
                bit += 1;
            }
            let x = 1.0 - rest;
            if x >= lo - DEDUP_TOLERANCE && x <= hi + DEDUP_TOLERANCE {
                p[free] = x.clamp(lo.max(0.0), hi.max(lo.max(0.0)));
                points.push(p);
            }
        }
    }
    Ok(dedup_points(points).into_iter().map(Distribution::from_vec_unchecked).collect())
}

/// Greedy optimum of `sum(coeffs[k] * q[k])` over `lower <= q <= upper`,
/// `sum(q) = mass`. Mass goes to the cheapest (or dearest) coordinates
/// first; ties are broken by coordinate index.
pub(crate) fn greedy_mass(
    coeffs: &[f64],
    lower: &[f64],
    upper: &[f64],
    mass: f64,
    direction: Direction,
) -> Vec<f64> {
    let mut q = lower.to_vec();
    let mut residual = (mass - lower.iter().sum::<f64>()).max(0.0);
    let mut order: Vec<usize> = (0..coeffs.len()).collect();
    match direction {
        Direction::Min => order.sort_by(|&a, &b| coeffs[a].total_cmp(&coeffs[b])),
        Direction::Max => order.sort_by(|&a, &b| coeffs[b].total_cmp(&coeffs[a])),
    }
    for k in order {
        if residual <= 0.0 {
            break;
        }
        let add = residual.min((upper[k] - lower[k]).max(0.0));
        q[k] += add;
        residual -= add;
    }
    q
}

/// Exact optimum of a linear function over a probability box.
pub fn constrained_extreme_mass(
    coeffs: &[f64],
    bounds: &[ProbabilityInterval],
    direction: Direction,
) -> Result<(Vec<f64>, f64), GeometryError> {
    if coeffs.len() != bounds.len() {
        return Err(GeometryError::DimensionMismatch { expected: bounds.len(), found: coeffs.len() });
    }
    check_box(bounds)?;
    let lower: Vec<f64> = bounds.iter().map(|b| b.lower).collect();
    let upper: Vec<f64> = bounds.iter().map(|b| b.upper).collect();
    let q = greedy_mass(coeffs, &lower, &upper, 1.0, direction);
    let objective = q.iter().zip(coeffs).map(|(a, b)| a * b).sum();
    Ok((q, objective))
}

/// A uniform draw from the probability simplex of the given dimension,
/// built from normalized exponential spacings.
pub fn sample_simplex<R: Rng + ?Sized>(dimension: usize, rng: &mut R) -> Result<Distribution, GeometryError> {
    if dimension == 0 {
        return Err(GeometryError::ZeroDimension);
    }
    if dimension == 1 {
        return Ok(Distribution::from_vec_unchecked(vec![1.0]));
    }
    loop {
        let draws: Vec<f64> = (0..dimension).map(|_| rng.sample::<f64, _>(Exp1)).collect();
        let total: f64 = draws.iter().sum();
        if total > 0.0 && total.is_finite() {
            return Ok(Distribution::from_vec_unchecked(draws.into_iter().map(|x| x / total).collect()));
        }
    }
}
