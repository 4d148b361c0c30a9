//! Phase-one simplex on small dense systems.

const PIVOT_EPS: f64 = 1e-12;
const MAX_PIVOTS: usize = 100_000;

/// Minimises the total infeasibility `sum |A y - b|` over `y >= 0` with
/// artificial variables and Bland's rule. Returns the residual and a
/// minimising `y`; the system is feasible exactly when the residual is 0.
pub(crate) fn phase_one(a: &[Vec<f64>], b: &[f64]) -> (f64, Vec<f64>) {
    let rows = b.len();
    let cols = a.first().map_or(0, Vec::len);
    let width = cols + rows + 1;
    let rhs = width - 1;
    let mut t = vec![vec![0.0; width]; rows];
    for (i, row) in t.iter_mut().enumerate() {
        let sign = if b[i] < 0.0 { -1.0 } else { 1.0 };
        for j in 0..cols {
            row[j] = sign * a[i][j];
        }
        row[cols + i] = 1.0;
        row[rhs] = sign * b[i];
    }
    let mut basis: Vec<usize> = (cols..cols + rows).collect();
    let scale = t
        .iter()
        .flat_map(|r| r.iter())
        .fold(1.0_f64, |m, x| m.max(x.abs()));
    let eps = PIVOT_EPS * scale;

    // reduced costs of the phase-one objective
    let mut cost = vec![0.0; width];
    for row in &t {
        for j in 0..cols {
            cost[j] -= row[j];
        }
        cost[rhs] -= row[rhs];
    }

    for _ in 0..MAX_PIVOTS {
        let Some(enter) = (0..cols + rows).find(|&j| cost[j] < -eps) else {
            break;
        };
        let mut leave: Option<(usize, f64)> = None;
        for (i, row) in t.iter().enumerate() {
            if row[enter] > eps {
                let ratio = row[rhs] / row[enter];
                let better = match leave {
                    None => true,
                    Some((l, r)) => ratio < r - eps || (ratio <= r + eps && basis[i] < basis[l]),
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
        }
        let Some((r, _)) = leave else {
            // cannot happen for a phase-one objective, which is bounded below
            break;
        };
        let p = t[r][enter];
        t[r].iter_mut().for_each(|x| *x /= p);
        let pivot_row = t[r].clone();
        for (i, row) in t.iter_mut().enumerate() {
            if i != r && row[enter] != 0.0 {
                let f = row[enter];
                row.iter_mut()
                    .zip(&pivot_row)
                    .for_each(|(x, p)| *x -= f * p);
            }
        }
        let f = cost[enter];
        cost.iter_mut()
            .zip(&pivot_row)
            .for_each(|(x, p)| *x -= f * p);
        basis[r] = enter;
    }

    let mut y = vec![0.0; cols];
    let mut residual = 0.0;
    for (i, &v) in basis.iter().enumerate() {
        if v < cols {
            y[v] = t[i][rhs].max(0.0);
        } else {
            residual += t[i][rhs].abs();
        }
    }
    (residual, y)
}
