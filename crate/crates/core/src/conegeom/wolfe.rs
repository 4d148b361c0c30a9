//! Wolfe's algorithm for the point of minimum Euclidean norm in the convex
//! hull of finitely many points.

pub(crate) struct MinNorm {
    pub point: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Solves `m x = r` by Gaussian elimination with partial pivoting. `None`
/// if the matrix is numerically singular.
fn solve(mut m: Vec<Vec<f64>>, mut r: Vec<f64>) -> Option<Vec<f64>> {
    let n = r.len();
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| m[i][c].abs().total_cmp(&m[j][c].abs()))?;
        if m[p][c].abs() < 1e-300 {
            return None;
        }
        m.swap(c, p);
        r.swap(c, p);
        for i in c + 1..n {
            let f = m[i][c] / m[c][c];
            if f != 0.0 {
                for j in c..n {
                    m[i][j] -= f * m[c][j];
                }
                r[i] -= f * r[c];
            }
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|j| m[i][j] * x[j]).sum();
        x[i] = (r[i] - s) / m[i][i];
    }
    Some(x)
}

/// Coefficients of the point of minimum norm in the affine hull of
/// `pts[s]` for `s` in `support`.
fn affine_minimiser(pts: &[Vec<f64>], support: &[usize]) -> Option<Vec<f64>> {
    let k = support.len();
    let mut m = vec![vec![0.0; k + 1]; k + 1];
    for (a, &i) in support.iter().enumerate() {
        for (b, &j) in support.iter().enumerate() {
            m[a][b] = dot(&pts[i], &pts[j]);
        }
        m[a][k] = 1.0;
        m[k][a] = 1.0;
    }
    let mut r = vec![0.0; k + 1];
    r[k] = 1.0;
    solve(m, r).map(|mut x| {
        x.truncate(k);
        x
    })
}

fn combine(pts: &[Vec<f64>], support: &[usize], lambda: &[f64]) -> Vec<f64> {
    let mut x = vec![0.0; pts[0].len()];
    for (&i, &l) in support.iter().zip(lambda) {
        x.iter_mut().zip(&pts[i]).for_each(|(x, p)| *x += l * p);
    }
    x
}

pub(crate) fn min_norm_point(pts: &[Vec<f64>], tol: f64, max_iter: usize) -> MinNorm {
    let scale = pts
        .iter()
        .map(|p| dot(p, p))
        .fold(0.0_f64, f64::max)
        .max(1e-300);
    let start = (0..pts.len())
        .min_by(|&i, &j| dot(&pts[i], &pts[i]).total_cmp(&dot(&pts[j], &pts[j])))
        .expect("at least one point");
    let mut support = vec![start];
    let mut lambda = vec![1.0];
    let mut x = pts[start].clone();

    for iteration in 0..max_iter {
        let xx = dot(&x, &x);
        let (j, xj) = (0..pts.len())
            .map(|j| (j, dot(&x, &pts[j])))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("at least one point");
        if xx - xj <= tol * scale || support.contains(&j) {
            return MinNorm {
                point: x,
                converged: true,
                iterations: iteration,
            };
        }
        support.push(j);
        lambda.push(0.0);

        loop {
            let Some(mu) = affine_minimiser(pts, &support) else {
                // drop the newest point and stop: the hull is degenerate here
                support.pop();
                lambda.pop();
                return MinNorm {
                    point: x,
                    converged: true,
                    iterations: iteration,
                };
            };
            if mu.iter().all(|&m| m > 1e-14) {
                lambda = mu;
                x = combine(pts, &support, &lambda);
                break;
            }
            let theta = lambda
                .iter()
                .zip(&mu)
                .filter(|(_, &m)| m <= 1e-14)
                .map(|(&l, &m)| l / (l - m))
                .fold(1.0_f64, f64::min);
            for (l, m) in lambda.iter_mut().zip(&mu) {
                *l = theta * m + (1.0 - theta) * *l;
            }
            let mut a = 0;
            while a < support.len() {
                if lambda[a] <= 1e-14 {
                    support.remove(a);
                    lambda.remove(a);
                } else {
                    a += 1;
                }
            }
            let total: f64 = lambda.iter().sum();
            lambda.iter_mut().for_each(|l| *l /= total);
            x = combine(pts, &support, &lambda);
        }
    }
    MinNorm {
        point: x,
        converged: false,
        iterations: max_iter,
    }
}
