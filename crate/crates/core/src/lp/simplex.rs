use super::{dot, DualCertificate, LPSolution, LinearProgram, LpStatus, ToleranceConfig};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// How an original variable maps onto nonnegative standard-form columns.
#[derive(Clone, Copy, Debug)]
enum VarMap<S> {
    /// x = offset + v
    Shift { col: usize, offset: S },
    /// x = offset - v
    Neg { col: usize, offset: S },
    /// x = v+ - v-
    Split { pos: usize, neg: usize },
}

#[derive(Clone, Copy, Debug)]
enum RowKind {
    Eq(usize),
    Ge(usize),
    Upper(usize),
}

/// The LP rewritten as `A v = b`, `v >= 0`, `b >= 0`, maximize `c · v`.
struct Standard<S> {
    a: Vec<Vec<S>>,
    b: Vec<S>,
    c: Vec<S>,
    kinds: Vec<RowKind>,
    signs: Vec<S>,
    vars: Vec<VarMap<S>>,
    ncols: usize,
}

fn standardize<S: Scalar>(lp: &LinearProgram<S>) -> Standard<S> {
    let n = lp.num_vars;
    let mut vars = Vec::with_capacity(n);
    let mut ncols = 0;
    let mut upper_rows = Vec::new();
    for j in 0..n {
        match (lp.lower[j], lp.upper[j]) {
            (Some(l), u) => {
                vars.push(VarMap::Shift { col: ncols, offset: l });
                if let Some(u) = u {
                    upper_rows.push((j, ncols, u - l));
                }
                ncols += 1;
            }
            (None, Some(u)) => {
                vars.push(VarMap::Neg { col: ncols, offset: u });
                ncols += 1;
            }
            (None, None) => {
                vars.push(VarMap::Split { pos: ncols, neg: ncols + 1 });
                ncols += 2;
            }
        }
    }
    let structural = ncols;
    let slack_count = lp.ge_rhs.len() + upper_rows.len();
    let total = structural + slack_count;

    let mut c = vec![S::zero(); total];
    for (j, vm) in vars.iter().enumerate() {
        match *vm {
            VarMap::Shift { col, .. } => c[col] = lp.objective[j],
            VarMap::Neg { col, .. } => c[col] = -lp.objective[j],
            VarMap::Split { pos, neg } => {
                c[pos] = lp.objective[j];
                c[neg] = -lp.objective[j];
            }
        }
    }

    let expand = |row: &[S], out: &mut [S]| -> S {
        let mut shift = S::zero();
        for (j, vm) in vars.iter().enumerate() {
            let v = row[j];
            if v == S::zero() {
                continue;
            }
            match *vm {
                VarMap::Shift { col, offset } => {
                    out[col] = v;
                    shift += v * offset;
                }
                VarMap::Neg { col, offset } => {
                    out[col] = -v;
                    shift += v * offset;
                }
                VarMap::Split { pos, neg } => {
                    out[pos] = v;
                    out[neg] = -v;
                }
            }
        }
        shift
    };

    let mut a = Vec::new();
    let mut b = Vec::new();
    let mut kinds = Vec::new();
    for (i, row) in lp.eq_matrix.iter().enumerate() {
        let mut r = vec![S::zero(); total];
        let shift = expand(row, &mut r);
        a.push(r);
        b.push(lp.eq_rhs[i] - shift);
        kinds.push(RowKind::Eq(i));
    }
    let mut slack = structural;
    for (i, row) in lp.ge_matrix.iter().enumerate() {
        let mut r = vec![S::zero(); total];
        let shift = expand(row, &mut r);
        r[slack] = -S::one();
        slack += 1;
        a.push(r);
        b.push(lp.ge_rhs[i] - shift);
        kinds.push(RowKind::Ge(i));
    }
    for (j, col, width) in upper_rows {
        let mut r = vec![S::zero(); total];
        r[col] = S::one();
        r[slack] = S::one();
        slack += 1;
        a.push(r);
        b.push(width);
        kinds.push(RowKind::Upper(j));
    }
    let mut signs = vec![S::one(); a.len()];
    for i in 0..a.len() {
        if b[i] < S::zero() {
            signs[i] = -S::one();
            b[i] = -b[i];
            for v in a[i].iter_mut() {
                *v = -*v;
            }
        }
    }
    Standard {
        a,
        b,
        c,
        kinds,
        signs,
        vars,
        ncols: total,
    }
}

/// Dense tableau: `m` rows of `width` entries, rhs in the last column.
struct Tableau<S> {
    t: Vec<S>,
    m: usize,
    width: usize,
    basis: Vec<usize>,
    /// Reduced costs c_j - c_B B⁻¹ A_j (maximization), one per column.
    d: Vec<S>,
    pivots: usize,
}

impl<S: Scalar> Tableau<S> {
    #[inline]
    fn at(&self, r: usize, c: usize) -> S {
        self.t[r * self.width + c]
    }

    fn rhs(&self, r: usize) -> S {
        self.at(r, self.width - 1)
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let w = self.width;
        let p = self.t[r * w + c];
        let inv = S::one() / p;
        for v in &mut self.t[r * w..(r + 1) * w] {
            *v *= inv;
        }
        self.t[r * w + c] = S::one();
        let (before, rest) = self.t.split_at_mut(r * w);
        let (prow, after) = rest.split_at_mut(w);
        let elim = |row: &mut [S]| {
            let f = row[c];
            if f != S::zero() {
                for (x, y) in row.iter_mut().zip(prow.iter()) {
                    *x -= f * *y;
                }
                row[c] = S::zero();
            }
        };
        for row in before.chunks_mut(w) {
            elim(row);
        }
        for row in after.chunks_mut(w) {
            elim(row);
        }
        let f = self.d[c];
        if f != S::zero() {
            for (x, y) in self.d.iter_mut().zip(prow.iter()) {
                *x -= f * *y;
            }
            self.d[c] = S::zero();
        }
        self.basis[r] = c;
        self.pivots += 1;
    }

    fn remove_row(&mut self, r: usize) {
        let w = self.width;
        self.t.drain(r * w..(r + 1) * w);
        self.basis.remove(r);
        self.m -= 1;
    }

    fn set_costs(&mut self, c: &[S]) {
        let mut d = c.to_vec();
        d.push(S::zero());
        for r in 0..self.m {
            let cb = c[self.basis[r]];
            if cb != S::zero() {
                for (j, v) in d.iter_mut().enumerate() {
                    *v -= cb * self.t[r * self.width + j];
                }
            }
        }
        for &bcol in &self.basis {
            d[bcol] = S::zero();
        }
        self.d = d;
    }
}

enum Outcome {
    Optimal,
    Unbounded,
}

/// Primal simplex over columns `0..allowed`.
fn run<S: Scalar>(tab: &mut Tableau<S>, allowed: usize, tol: &ToleranceConfig) -> Result<Outcome> {
    let opt = S::lit(tol.optimality);
    let piv = S::lit(tol.pivot);
    let tiny = S::epsilon() * S::lit(64.0);
    let cap = 50_000 + 200 * (tab.m + allowed);
    // Dantzig pricing; after a run of degenerate pivots fall back to Bland's
    // rule until the objective moves again.
    let mut degenerate_run = 0usize;
    let mut iters = 0;
    let mut candidates: Vec<usize> = Vec::with_capacity(allowed);
    loop {
        iters += 1;
        if iters > cap {
            return Err(Error::NumericalBreakdown(format!(
                "simplex exceeded {cap} iterations"
            )));
        }
        let bland = degenerate_run > 30;
        candidates.clear();
        candidates.extend((0..allowed).filter(|&j| tab.d[j] > opt));
        if !bland {
            candidates.sort_by(|&a, &b| tab.d[b].partial_cmp(&tab.d[a]).unwrap_or(std::cmp::Ordering::Equal).then(a.cmp(&b)));
        }
        let mut entering = None;
        let mut saw_tiny = false;
        for &j in &candidates {
            // Leaving row by minimum ratio, ties to the lowest basic index.
            let mut best: Option<(usize, S)> = None;
            let mut col_max = S::zero();
            for r in 0..tab.m {
                let a = tab.at(r, j);
                col_max = col_max.max(a);
                if a <= piv {
                    continue;
                }
                let ratio = tab.rhs(r).max(S::zero()) / a;
                best = match best {
                    None => Some((r, ratio)),
                    Some((br, bratio)) => {
                        let slackness = S::lit(1e-12) * (S::one() + bratio.abs());
                        if ratio < bratio - slackness
                            || (ratio <= bratio + slackness && tab.basis[r] < tab.basis[br])
                        {
                            Some((r, ratio))
                        } else {
                            Some((br, bratio))
                        }
                    }
                };
            }
            match best {
                Some((r, ratio)) => {
                    entering = Some((r, j, ratio));
                    break;
                }
                None if col_max <= tiny => return Ok(Outcome::Unbounded),
                None => saw_tiny = true,
            }
        }
        match entering {
            Some((r, j, ratio)) => {
                if ratio * tab.d[j] <= S::lit(1e-12) {
                    degenerate_run += 1;
                } else {
                    degenerate_run = 0;
                }
                tab.pivot(r, j)
            }
            None if saw_tiny => {
                return Err(Error::NumericalBreakdown(
                    "only pivots below the pivot tolerance remain".into(),
                ))
            }
            None => return Ok(Outcome::Optimal),
        }
    }
}

/// Solves `B x = rhs` by Gaussian elimination with partial pivoting.
fn lu_solve<S: Scalar>(mut b: Vec<Vec<S>>, mut rhs: Vec<S>) -> Option<Vec<S>> {
    let n = rhs.len();
    for k in 0..n {
        let mut p = k;
        for i in k + 1..n {
            if b[i][k].abs() > b[p][k].abs() {
                p = i;
            }
        }
        if b[p][k].abs() <= S::epsilon() {
            return None;
        }
        b.swap(k, p);
        rhs.swap(k, p);
        for i in k + 1..n {
            let f = b[i][k] / b[k][k];
            if f != S::zero() {
                for j in k..n {
                    let v = b[k][j];
                    b[i][j] -= f * v;
                }
                let v = rhs[k];
                rhs[i] -= f * v;
            }
        }
    }
    let mut x = vec![S::zero(); n];
    for k in (0..n).rev() {
        let mut s = rhs[k];
        for j in k + 1..n {
            s -= b[k][j] * x[j];
        }
        x[k] = s / b[k][k];
    }
    Some(x)
}

pub(super) fn solve<S: Scalar>(lp: &LinearProgram<S>, tol: &ToleranceConfig) -> Result<LPSolution<S>> {
    let std = standardize(lp);
    let m = std.a.len();
    let n = std.ncols;
    let width = n + m + 1;
    let mut t = vec![S::zero(); m * width];
    for r in 0..m {
        t[r * width..r * width + n].copy_from_slice(&std.a[r]);
        t[r * width + n + r] = S::one();
        t[r * width + width - 1] = std.b[r];
    }
    let mut tab = Tableau {
        t,
        m,
        width,
        basis: (n..n + m).collect(),
        d: Vec::new(),
        pivots: 0,
    };

    // Phase 1: maximize -Σ artificials.
    let mut c1 = vec![S::zero(); n + m];
    for v in &mut c1[n..] {
        *v = -S::one();
    }
    tab.set_costs(&c1);
    run(&mut tab, n, tol)?;
    let infeas: S = (0..tab.m)
        .filter(|&r| tab.basis[r] >= n)
        .map(|r| tab.rhs(r).abs())
        .sum();
    let bscale = std.b.iter().fold(S::one(), |acc, v| acc.max(v.abs()));
    if infeas > S::lit(tol.feasibility) * bscale {
        return Ok(LPSolution {
            status: LpStatus::Infeasible,
            primal: Vec::new(),
            objective: S::nan(),
            residual: infeas,
            pivots: tab.pivots,
            dual: None,
        });
    }

    // Drive the remaining artificials out, dropping rows that are redundant.
    let piv = S::lit(tol.pivot);
    let mut kept_rows: Vec<usize> = (0..m).collect();
    let mut r = 0;
    while r < tab.m {
        if tab.basis[r] >= n {
            let mut best: Option<(usize, S)> = None;
            for j in 0..n {
                let a = tab.at(r, j).abs();
                if a > piv && best.is_none_or(|(_, b)| a > b) {
                    best = Some((j, a));
                }
            }
            match best {
                Some((j, _)) => tab.pivot(r, j),
                None => {
                    tab.remove_row(r);
                    kept_rows.remove(r);
                    continue;
                }
            }
        }
        r += 1;
    }

    // Phase 2.
    let mut c2 = std.c.clone();
    c2.extend(std::iter::repeat_n(S::zero(), m));
    tab.set_costs(&c2);
    if let Outcome::Unbounded = run(&mut tab, n, tol)? {
        return Ok(LPSolution {
            status: LpStatus::Unbounded,
            primal: Vec::new(),
            objective: S::infinity(),
            residual: S::zero(),
            pivots: tab.pivots,
            dual: None,
        });
    }

    // Recompute the basic solution and multipliers from the original data.
    let mm = tab.m;
    let bmat: Vec<Vec<S>> = kept_rows
        .iter()
        .map(|&row| tab.basis.iter().map(|&col| std.a[row][col]).collect())
        .collect();
    let brhs: Vec<S> = kept_rows.iter().map(|&row| std.b[row]).collect();
    let bt: Vec<Vec<S>> = (0..mm).map(|i| (0..mm).map(|k| bmat[k][i]).collect()).collect();
    let cb: Vec<S> = tab.basis.iter().map(|&col| std.c[col]).collect();
    let xb = lu_solve(bmat, brhs).unwrap_or_else(|| (0..mm).map(|r| tab.rhs(r)).collect());
    let ystd = lu_solve(bt, cb).unwrap_or_else(|| {
        // Fall back to reading multipliers off the slack-free tableau.
        (0..mm).map(|r| -tab.d[n + kept_rows[r]]).collect()
    });

    let mut v = vec![S::zero(); n];
    for (r, &col) in tab.basis.iter().enumerate() {
        v[col] = xb[r].max(S::zero());
    }
    let x: Vec<S> = std
        .vars
        .iter()
        .map(|vm| match *vm {
            VarMap::Shift { col, offset } => offset + v[col],
            VarMap::Neg { col, offset } => offset - v[col],
            VarMap::Split { pos, neg } => v[pos] - v[neg],
        })
        .collect();

    let mut y_full = vec![S::zero(); m];
    for (k, &row) in kept_rows.iter().enumerate() {
        y_full[row] = ystd[k];
    }
    let mut eq = vec![S::zero(); lp.eq_rhs.len()];
    let mut ge = vec![S::zero(); lp.ge_rhs.len()];
    let mut upper = vec![S::zero(); lp.num_vars];
    for (row, kind) in std.kinds.iter().enumerate() {
        let y = std.signs[row] * y_full[row];
        match *kind {
            RowKind::Eq(i) => eq[i] = y,
            RowKind::Ge(i) => ge[i] = y,
            RowKind::Upper(j) => upper[j] = y,
        }
    }
    let mut lower = vec![S::zero(); lp.num_vars];
    for j in 0..lp.num_vars {
        let mut d = lp.objective[j] - upper[j];
        for (row, y) in lp.eq_matrix.iter().zip(&eq) {
            d -= row[j] * *y;
        }
        for (row, z) in lp.ge_matrix.iter().zip(&ge) {
            d -= row[j] * *z;
        }
        match std.vars[j] {
            VarMap::Shift { .. } => lower[j] = -d,
            VarMap::Neg { .. } => upper[j] = d,
            VarMap::Split { .. } => {}
        }
    }
    let mut dual_obj = dot(&lp.eq_rhs, &eq) + dot(&lp.ge_rhs, &ge);
    for j in 0..lp.num_vars {
        if let Some(l) = lp.lower[j] {
            dual_obj -= l * lower[j];
        }
        if let Some(u) = lp.upper[j] {
            dual_obj += u * upper[j];
        }
    }

    Ok(LPSolution {
        status: LpStatus::Optimal,
        objective: lp.objective_value(&x),
        residual: lp.max_residual(&x).max(S::zero()),
        primal: x,
        pivots: tab.pivots,
        dual: Some(DualCertificate {
            eq,
            ge,
            lower,
            upper,
            objective: dual_obj,
        }),
    })
}
