//! Dense phase-one simplex for small feasibility problems.

const PIVOT_EPS: f64 = 1e-12;
const COST_EPS: f64 = 1e-12;

/// Decides whether `{x >= 0 : A x = b}` is nonempty.
///
/// `rows` holds `A` row by row. Residual infeasibility up to `tolerance`
/// (sum of artificial variables at the optimum) counts as feasible.
pub fn feasible(rows: &[Vec<f64>], rhs: &[f64], tolerance: f64) -> bool {
    let m = rows.len();
    if m == 0 {
        return true;
    }
    let n = rows[0].len();
    let width = n + m + 1;
    // Columns: structural 0..n, artificial n..n+m, rhs last.
    let mut tab = vec![0.0; m * width];
    for (i, (row, &b)) in rows.iter().zip(rhs).enumerate() {
        debug_assert_eq!(row.len(), n);
        let sign = if b < 0.0 { -1.0 } else { 1.0 };
        let r = &mut tab[i * width..(i + 1) * width];
        for (j, &a) in row.iter().enumerate() {
            r[j] = sign * a;
        }
        r[n + i] = 1.0;
        r[width - 1] = sign * b;
    }
    let mut basis: Vec<usize> = (n..n + m).collect();

    // Reduced costs of minimizing the sum of artificials.
    let mut cost = vec![0.0; width];
    for i in 0..m {
        for j in 0..n {
            cost[j] -= tab[i * width + j];
        }
        cost[width - 1] -= tab[i * width + width - 1];
    }

    // Bland's rule keeps degenerate problems from cycling.
    let max_iter = 50 * (n + m) + 100;
    for _ in 0..max_iter {
        let Some(enter) = (0..n + m).find(|&j| cost[j] < -COST_EPS) else {
            break;
        };
        let mut leave: Option<(usize, f64)> = None;
        for i in 0..m {
            let a = tab[i * width + enter];
            if a > PIVOT_EPS {
                let ratio = tab[i * width + width - 1] / a;
                let better = match leave {
                    None => true,
                    Some((k, best)) => {
                        ratio < best - 1e-15 || ((ratio - best).abs() <= 1e-15 && basis[i] < basis[k])
                    }
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
        }
        let Some((row, _)) = leave else {
            // Unbounded direction cannot occur in phase one; treat as done.
            break;
        };
        pivot(&mut tab, &mut cost, width, row, enter);
        basis[row] = enter;
    }
    -cost[width - 1] <= tolerance
}

fn pivot(tab: &mut [f64], cost: &mut [f64], width: usize, row: usize, col: usize) {
    let p = tab[row * width + col];
    for j in 0..width {
        tab[row * width + j] /= p;
    }
    let (before, rest) = tab.split_at_mut(row * width);
    let (pivot_row, after) = rest.split_at_mut(width);
    for r in before.chunks_mut(width).chain(after.chunks_mut(width)) {
        let f = r[col];
        if f != 0.0 {
            for j in 0..width {
                r[j] -= f * pivot_row[j];
            }
        }
    }
    let f = cost[col];
    if f != 0.0 {
        for j in 0..width {
            cost[j] -= f * pivot_row[j];
        }
    }
}

/// True when `target` is a convex combination of `points`.
pub fn in_convex_hull(target: &[f64], points: &[&[f64]], tolerance: f64) -> bool {
    if points.is_empty() {
        return false;
    }
    let d = target.len();
    let mut rows: Vec<Vec<f64>> = (0..d).map(|j| points.iter().map(|p| p[j]).collect()).collect();
    rows.push(vec![1.0; points.len()]);
    let mut rhs = target.to_vec();
    rhs.push(1.0);
    feasible(&rows, &rhs, tolerance)
}
