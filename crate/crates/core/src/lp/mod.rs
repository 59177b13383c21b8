//! Dense linear programs and a two-phase primal simplex.

mod mps;
mod simplex;
pub mod vertex;

pub use mps::write_mps;

use serde::{Deserialize, Serialize};

use crate::error::{Diagnostic, Error, Result};
use crate::scalar::Scalar;

/// maximize `objective · x` subject to `eq_matrix x = eq_rhs`,
/// `ge_matrix x >= ge_rhs` and `lower <= x <= upper` (`None` is unbounded).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearProgram<S> {
    pub num_vars: usize,
    pub objective: Vec<S>,
    pub eq_matrix: Vec<Vec<S>>,
    pub eq_rhs: Vec<S>,
    pub ge_matrix: Vec<Vec<S>>,
    pub ge_rhs: Vec<S>,
    pub lower: Vec<Option<S>>,
    pub upper: Vec<Option<S>>,
}

impl<S: Scalar> LinearProgram<S> {
    /// `n` variables, zero objective, all variables `>= 0`.
    pub fn new(n: usize) -> Self {
        Self {
            num_vars: n,
            objective: vec![S::zero(); n],
            eq_matrix: Vec::new(),
            eq_rhs: Vec::new(),
            ge_matrix: Vec::new(),
            ge_rhs: Vec::new(),
            lower: vec![Some(S::zero()); n],
            upper: vec![None; n],
        }
    }

    pub fn add_eq(&mut self, row: Vec<S>, rhs: S) {
        self.eq_matrix.push(row);
        self.eq_rhs.push(rhs);
    }

    pub fn add_ge(&mut self, row: Vec<S>, rhs: S) {
        self.ge_matrix.push(row);
        self.ge_rhs.push(rhs);
    }

    pub fn add_le(&mut self, row: Vec<S>, rhs: S) {
        self.add_ge(row.into_iter().map(|v| -v).collect(), -rhs);
    }

    pub fn set_free(&mut self, j: usize) {
        self.lower[j] = None;
        self.upper[j] = None;
    }

    pub fn num_constraints(&self) -> usize {
        self.eq_rhs.len() + self.ge_rhs.len()
    }

    pub fn check_shape(&self) -> Result<()> {
        let n = self.num_vars;
        let mut diags = Vec::new();
        if self.objective.len() != n {
            diags.push(Diagnostic::new("objective", format!("length {} != {n}", self.objective.len())));
        }
        if self.lower.len() != n || self.upper.len() != n {
            diags.push(Diagnostic::new("bounds", "length mismatch"));
        }
        if self.eq_matrix.len() != self.eq_rhs.len() {
            diags.push(Diagnostic::new("eq_rhs", "row count mismatch"));
        }
        if self.ge_matrix.len() != self.ge_rhs.len() {
            diags.push(Diagnostic::new("ge_rhs", "row count mismatch"));
        }
        for (name, m) in [("eq_matrix", &self.eq_matrix), ("ge_matrix", &self.ge_matrix)] {
            for (i, row) in m.iter().enumerate() {
                if row.len() != n {
                    diags.push(Diagnostic::new(name, format!("row has {} entries, expected {n}", row.len())).at(i.to_string()));
                } else if row.iter().any(|v| !v.is_finite()) {
                    diags.push(Diagnostic::new(name, "non-finite coefficient").at(i.to_string()));
                }
            }
        }
        let finite = |v: &S| v.is_finite();
        if !self.objective.iter().all(finite)
            || !self.eq_rhs.iter().all(finite)
            || !self.ge_rhs.iter().all(finite)
            || !self.lower.iter().flatten().all(finite)
            || !self.upper.iter().flatten().all(finite)
        {
            diags.push(Diagnostic::new("lp", "non-finite objective, rhs or bound"));
        }
        if diags.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(diags))
        }
    }

    pub fn objective_value(&self, x: &[S]) -> S {
        dot(&self.objective, x)
    }

    /// Worst violation of any constraint or bound at `x`.
    pub fn max_residual(&self, x: &[S]) -> S {
        let mut worst = S::zero();
        for (row, b) in self.eq_matrix.iter().zip(&self.eq_rhs) {
            worst = worst.max((dot(row, x) - *b).abs());
        }
        for (row, b) in self.ge_matrix.iter().zip(&self.ge_rhs) {
            worst = worst.max(*b - dot(row, x));
        }
        for j in 0..self.num_vars {
            if let Some(l) = self.lower[j] {
                worst = worst.max(l - x[j]);
            }
            if let Some(u) = self.upper[j] {
                worst = worst.max(x[j] - u);
            }
        }
        worst
    }
}

pub(crate) fn dot<S: Scalar>(a: &[S], b: &[S]) -> S {
    let mut acc = S::zero();
    for (x, y) in a.iter().zip(b) {
        acc += *x * *y;
    }
    acc
}

/// Numerical tolerances shared by the simplex and the node assembly.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ToleranceConfig {
    pub feasibility: f64,
    pub optimality: f64,
    pub pivot: f64,
    /// Slack granted to every incentive inequality (0 means exact).
    pub cisr_slack: f64,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        Self {
            feasibility: 1e-7,
            optimality: 1e-9,
            pivot: 1e-9,
            cisr_slack: 0.0,
        }
    }
}

impl ToleranceConfig {
    /// Defaults loosened to what the scalar type can actually resolve.
    pub fn for_scalar<S: Scalar>() -> Self {
        let eps = S::epsilon().to_f64_lossy();
        if eps > 1e-10 {
            Self {
                feasibility: 1e-3,
                optimality: 1e-5,
                pivot: 1e-5,
                cisr_slack: 0.0,
            }
        } else {
            Self::default()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// Lagrange multipliers proving optimality:
/// `objective = eq_matrixᵀ eq + ge_matrixᵀ ge + upper - lower`,
/// with `ge <= 0`, `lower >= 0`, `upper >= 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DualCertificate<S> {
    pub eq: Vec<S>,
    pub ge: Vec<S>,
    pub lower: Vec<S>,
    pub upper: Vec<S>,
    /// Dual objective; equals the primal objective at an optimum.
    pub objective: S,
}

impl<S: Scalar> DualCertificate<S> {
    /// Largest sign violation or stationarity residual of the multipliers.
    pub fn infeasibility(&self, lp: &LinearProgram<S>) -> S {
        let mut worst = S::zero();
        for z in &self.ge {
            worst = worst.max(*z);
        }
        for w in self.lower.iter().chain(&self.upper) {
            worst = worst.max(-*w);
        }
        for j in 0..lp.num_vars {
            let mut s = lp.objective[j] - self.upper[j] + self.lower[j];
            for (row, y) in lp.eq_matrix.iter().zip(&self.eq) {
                s -= row[j] * *y;
            }
            for (row, z) in lp.ge_matrix.iter().zip(&self.ge) {
                s -= row[j] * *z;
            }
            worst = worst.max(s.abs());
        }
        worst
    }

    /// Sum of |multiplier × slack| over inequalities and bounds.
    pub fn complementarity(&self, lp: &LinearProgram<S>, x: &[S]) -> S {
        let mut total = S::zero();
        for ((row, b), z) in lp.ge_matrix.iter().zip(&lp.ge_rhs).zip(&self.ge) {
            total += (*z * (dot(row, x) - *b)).abs();
        }
        for j in 0..lp.num_vars {
            if let Some(l) = lp.lower[j] {
                total += (self.lower[j] * (x[j] - l)).abs();
            }
            if let Some(u) = lp.upper[j] {
                total += (self.upper[j] * (u - x[j])).abs();
            }
        }
        total
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LPSolution<S> {
    pub status: LpStatus,
    /// Empty unless `Optimal`.
    pub primal: Vec<S>,
    /// NaN when infeasible, +inf when unbounded.
    pub objective: S,
    pub residual: S,
    pub pivots: usize,
    pub dual: Option<DualCertificate<S>>,
}

impl<S: Scalar> LPSolution<S> {
    pub fn duality_gap(&self) -> Option<S> {
        self.dual.as_ref().map(|d| (d.objective - self.objective).abs())
    }
}

/// Solves `lp` to optimality or proves it infeasible or unbounded.
/// Deterministic: every pricing and ratio tie breaks by lowest index.
pub fn solve_lp<S: Scalar>(lp: &LinearProgram<S>, tol: &ToleranceConfig) -> Result<LPSolution<S>> {
    lp.check_shape()?;
    simplex::solve(lp, tol)
}

/// Returns whether `point` satisfies every constraint within `tol`, and the worst residual.
pub fn check_feasible<S: Scalar>(lp: &LinearProgram<S>, point: &[S], tol: S) -> (bool, S) {
    assert_eq!(point.len(), lp.num_vars, "point has the wrong dimension");
    let r = lp.max_residual(point).max(S::zero());
    (r <= tol, r)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    #[test]
    fn box_1d() {
        let mut lp = LinearProgram::<f64>::new(1);
        lp.objective = vec![1.0];
        lp.add_le(vec![1.0], 1.0);
        let s = solve_lp(&lp, &tol()).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.primal[0] - 1.0).abs() < 1e-12);
        assert!((s.objective - 1.0).abs() < 1e-12);
        assert!(s.duality_gap().unwrap() < 1e-12);
    }

    #[test]
    fn equality_constrained() {
        let mut lp = LinearProgram::<f64>::new(2);
        lp.objective = vec![1.0, 1.0];
        lp.add_eq(vec![1.0, 1.0], 0.5);
        let s = solve_lp(&lp, &tol()).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.objective - 0.5).abs() < 1e-12);
    }

    #[test]
    fn infeasible_and_unbounded() {
        let mut lp = LinearProgram::<f64>::new(1);
        lp.objective = vec![1.0];
        lp.add_le(vec![1.0], -1.0);
        assert_eq!(solve_lp(&lp, &tol()).unwrap().status, LpStatus::Infeasible);

        let mut lp = LinearProgram::<f64>::new(2);
        lp.objective = vec![1.0, 0.0];
        lp.add_ge(vec![1.0, -1.0], 0.0);
        assert_eq!(solve_lp(&lp, &tol()).unwrap().status, LpStatus::Unbounded);
    }

    #[test]
    fn free_and_upper_bounded_variables() {
        // max -x + y, y <= 3, x free, x >= y - 5  =>  y = 3, x = -2, obj = 5
        let mut lp = LinearProgram::<f64>::new(2);
        lp.objective = vec![-1.0, 1.0];
        lp.set_free(0);
        lp.lower[1] = None;
        lp.upper[1] = Some(3.0);
        lp.add_ge(vec![1.0, -1.0], -5.0);
        let s = solve_lp(&lp, &tol()).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.objective - 5.0).abs() < 1e-10, "{}", s.objective);
        assert!((s.primal[0] + 2.0).abs() < 1e-10);
        let d = s.dual.as_ref().unwrap();
        assert!(d.infeasibility(&lp) < 1e-9);
        assert!(s.duality_gap().unwrap() < 1e-9);
    }

    #[test]
    fn shifted_boxes() {
        // max x - y, 1 <= x <= 4, -2 <= y <= 7, x + y >= 0
        let mut lp = LinearProgram::<f64>::new(2);
        lp.objective = vec![1.0, -1.0];
        lp.lower = vec![Some(1.0), Some(-2.0)];
        lp.upper = vec![Some(4.0), Some(7.0)];
        lp.add_ge(vec![1.0, 1.0], 0.0);
        let s = solve_lp(&lp, &tol()).unwrap();
        assert!((s.objective - 6.0).abs() < 1e-10);
        let d = s.dual.unwrap();
        assert!(d.infeasibility(&lp) < 1e-9);
        assert!(d.complementarity(&lp, &s.primal) < 1e-9);
    }

    #[test]
    fn redundant_equalities() {
        let mut lp = LinearProgram::<f64>::new(3);
        lp.objective = vec![1.0, 2.0, 3.0];
        lp.add_eq(vec![1.0, 1.0, 1.0], 1.0);
        lp.add_eq(vec![2.0, 2.0, 2.0], 2.0);
        lp.add_eq(vec![1.0, 0.0, 0.0], 0.25);
        let s = solve_lp(&lp, &tol()).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.objective - 2.5).abs() < 1e-10);
        assert!(s.duality_gap().unwrap() < 1e-9);
    }

    #[test]
    fn check_feasible_reports_worst() {
        let mut lp = LinearProgram::<f64>::new(1);
        lp.add_le(vec![1.0], 1.0);
        let (ok, r) = check_feasible(&lp, &[1.1], 1e-3);
        assert!(!ok);
        assert!((r - 0.1).abs() < 1e-12);
        let (ok, r) = check_feasible(&lp, &[1.0], 1e-9);
        assert!(ok && r <= 1e-12);
    }

    #[test]
    fn f32_solves_small_problem() {
        let mut lp = LinearProgram::<f32>::new(2);
        lp.objective = vec![3.0, 2.0];
        lp.add_le(vec![1.0, 1.0], 4.0);
        lp.add_le(vec![1.0, 3.0], 6.0);
        lp.upper[0] = Some(3.0);
        let s = solve_lp(&lp, &ToleranceConfig::for_scalar::<f32>()).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.objective - 11.0).abs() < 1e-4);
    }

    #[test]
    fn degenerate_problem_terminates() {
        // Classic cycling example (Beale) in maximization form.
        let mut lp = LinearProgram::<f64>::new(4);
        lp.objective = vec![0.75, -150.0, 0.02, -6.0];
        lp.add_le(vec![0.25, -60.0, -0.04, 9.0], 0.0);
        lp.add_le(vec![0.5, -90.0, -0.02, 3.0], 0.0);
        lp.add_le(vec![0.0, 0.0, 1.0, 0.0], 1.0);
        let s = solve_lp(&lp, &tol()).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.objective - 0.05).abs() < 1e-9);
    }
}
