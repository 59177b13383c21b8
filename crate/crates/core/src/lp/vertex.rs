//! Exhaustive basic-feasible-solution enumeration for tiny LPs.
//!
//! Independent of the simplex: every choice of active constraints is solved
//! as a square system and the feasible ones are compared.

use super::{LinearProgram, LpStatus};

#[derive(Clone, Debug, PartialEq)]
pub struct VertexOracle {
    pub status: LpStatus,
    pub objective: f64,
    pub vertices_checked: usize,
}

const EPS: f64 = 1e-9;

fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Reduces `rows · x = rhs` to independent rows; `None` if inconsistent.
fn independent_rows(rows: &[Vec<f64>], rhs: &[f64], n: usize) -> Option<(Vec<Vec<f64>>, Vec<f64>)> {
    let mut a: Vec<Vec<f64>> = rows.iter().zip(rhs).map(|(r, b)| {
        let mut v = r.clone();
        v.push(*b);
        v
    }).collect();
    let mut rank = 0;
    for col in 0..n {
        let Some(p) = (rank..a.len()).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())) else {
            break;
        };
        if a[p][col].abs() <= EPS {
            continue;
        }
        a.swap(rank, p);
        let pivot = a[rank][col];
        for v in a[rank].iter_mut() {
            *v /= pivot;
        }
        for i in 0..a.len() {
            if i != rank {
                let f = a[i][col];
                if f != 0.0 {
                    for j in 0..=n {
                        let v = a[rank][j];
                        a[i][j] -= f * v;
                    }
                }
            }
        }
        rank += 1;
    }
    for row in &a[rank..] {
        if row[n].abs() > 1e-7 {
            return None;
        }
    }
    a.truncate(rank);
    let b = a.iter().map(|r| r[n]).collect();
    let rows = a.into_iter().map(|mut r| {
        r.pop();
        r
    }).collect();
    Some((rows, b))
}

fn solve_square(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs()))?;
        if a[p][k].abs() <= EPS {
            return None;
        }
        a.swap(k, p);
        b.swap(k, p);
        for i in k + 1..n {
            let f = a[i][k] / a[k][k];
            for j in k..n {
                let v = a[k][j];
                a[i][j] -= f * v;
            }
            let v = b[k];
            b[i] -= f * v;
        }
    }
    let mut x = vec![0.0; n];
    for k in (0..n).rev() {
        let s: f64 = (k + 1..n).map(|j| a[k][j] * x[j]).sum();
        x[k] = (b[k] - s) / a[k][k];
    }
    Some(x)
}

/// Max of `c · x` over the vertices of `{eq x = e, ineq x >= g}`; `None` if empty.
fn best_vertex(
    n: usize,
    eq: &[Vec<f64>],
    eq_rhs: &[f64],
    ineq: &[Vec<f64>],
    ineq_rhs: &[f64],
    c: &[f64],
    count: &mut usize,
) -> Option<f64> {
    let (eq, eq_rhs) = independent_rows(eq, eq_rhs, n)?;
    let k = n - eq.len();
    let m = ineq.len();
    if k > m {
        return None;
    }
    let mut best: Option<f64> = None;
    let mut pick: Vec<usize> = (0..k).collect();
    loop {
        *count += 1;
        let mut a = eq.clone();
        let mut b = eq_rhs.clone();
        for &i in &pick {
            a.push(ineq[i].clone());
            b.push(ineq_rhs[i]);
        }
        if let Some(x) = solve_square(a, b) {
            let feasible = ineq.iter().zip(ineq_rhs).all(|(r, g)| {
                let s: f64 = r.iter().zip(&x).map(|(u, v)| u * v).sum();
                s >= g - 1e-7 * (1.0 + g.abs())
            });
            if feasible {
                let v: f64 = c.iter().zip(&x).map(|(u, v)| u * v).sum();
                best = Some(best.map_or(v, |b: f64| b.max(v)));
            }
        }
        // Next k-subset in lexicographic order.
        let mut i = k;
        loop {
            if i == 0 {
                return best;
            }
            i -= 1;
            if pick[i] < m - k + i {
                pick[i] += 1;
                for j in i + 1..k {
                    pick[j] = pick[j - 1] + 1;
                }
                break;
            }
        }
        if k == 0 {
            return best;
        }
    }
}

/// Solves `lp` by enumerating every basis. Requires every variable to have
/// a finite lower bound (so the feasible set has vertices). Returns `None`
/// when that fails or the enumeration would exceed `limit` square solves.
pub fn enumerate_vertices(lp: &LinearProgram<f64>, limit: f64) -> Option<VertexOracle> {
    let n = lp.num_vars;
    if lp.lower.iter().any(|l| l.is_none()) {
        return None;
    }
    let mut ineq = lp.ge_matrix.clone();
    let mut ineq_rhs = lp.ge_rhs.clone();
    let unit = |j: usize, s: f64| {
        let mut r = vec![0.0; n];
        r[j] = s;
        r
    };
    for j in 0..n {
        if let Some(l) = lp.lower[j] {
            ineq.push(unit(j, 1.0));
            ineq_rhs.push(l);
        }
        if let Some(u) = lp.upper[j] {
            ineq.push(unit(j, -1.0));
            ineq_rhs.push(-u);
        }
    }
    let k = n.saturating_sub(lp.eq_rhs.len().min(n));
    if binomial(ineq.len(), k) * 2.0 > limit {
        return None;
    }
    let mut count = 0;
    let Some(best) = best_vertex(n, &lp.eq_matrix, &lp.eq_rhs, &ineq, &ineq_rhs, &lp.objective, &mut count) else {
        return Some(VertexOracle {
            status: LpStatus::Infeasible,
            objective: f64::NAN,
            vertices_checked: count,
        });
    };

    // Recession cone normalized by Σ d = 1; its vertices are the extreme rays.
    let zeros = vec![0.0; lp.eq_rhs.len()];
    let mut ray_eq = lp.eq_matrix.clone();
    let mut ray_eq_rhs = zeros;
    ray_eq.push(vec![1.0; n]);
    ray_eq_rhs.push(1.0);
    let mut ray_ineq = lp.ge_matrix.clone();
    let mut ray_rhs = vec![0.0; lp.ge_rhs.len()];
    for j in 0..n {
        ray_ineq.push(unit(j, 1.0));
        ray_rhs.push(0.0);
        if lp.upper[j].is_some() {
            ray_ineq.push(unit(j, -1.0));
            ray_rhs.push(0.0);
        }
    }
    let ray = best_vertex(n, &ray_eq, &ray_eq_rhs, &ray_ineq, &ray_rhs, &lp.objective, &mut count);
    if ray.is_some_and(|r| r > 1e-9) {
        return Some(VertexOracle {
            status: LpStatus::Unbounded,
            objective: f64::INFINITY,
            vertices_checked: count,
        });
    }
    Some(VertexOracle {
        status: LpStatus::Optimal,
        objective: best,
        vertices_checked: count,
    })
}
