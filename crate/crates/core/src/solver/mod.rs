//! Backward induction over the common-information tree, one LP per node.

mod assemble;
mod io;
mod symmetry;

pub use assemble::{
    assemble_cisr_inequalities, assemble_eta_constraints, assemble_node_lp, assemble_value_equalities, CisrRow,
    EtaBlock, EtaTerm, NodeContext, NodeLp, ValueRows, ValueTable,
};
pub use io::{load_solution, parse_solution, save_solution, solution_to_json};
pub use symmetry::{message_orbits, orbit_average};

use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::beliefs::{build_tree, check_assumption2, CommonNode, CommonTree};
use crate::error::{Error, Result};
use crate::lp::{check_feasible, solve_lp, LpStatus, ToleranceConfig};
use crate::model::{ProblemSpec, Variant};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SolveOptions {
    pub memoize: bool,
    /// Skip the strategy-independence check on beliefs.
    pub force: bool,
    /// On infeasibility, list every infeasible node of that level.
    pub scan_all: bool,
    /// Replace each kernel by its average over agent permutations when that
    /// average is provably as good.
    pub symmetrize: bool,
    pub tol: ToleranceConfig,
    pub assumption_trials: usize,
    pub assumption_tol: f64,
    pub seed: u64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            memoize: false,
            force: false,
            scan_all: false,
            symmetrize: true,
            tol: ToleranceConfig::default(),
            assumption_trials: 5,
            assumption_tol: 1e-9,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SolveStatus {
    Solved,
    InfeasibleAt {
        time: usize,
        node_key: String,
        /// Every infeasible node of that level (only the first without scan-all).
        nodes: Vec<String>,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct NodeSolution<S> {
    pub time: usize,
    pub index: usize,
    pub node_key: String,
    pub belief_key: String,
    pub members: usize,
    /// g(d | p⁰), rows by p⁰, columns over (m¹, ..., m^K, u⁰).
    pub kernel: Vec<Vec<S>>,
    pub w: Vec<S>,
    pub v: S,
    pub pivots: usize,
    pub symmetrized: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct SolveStats {
    pub lp_solves: usize,
    pub pivots: usize,
    pub symmetrized: usize,
    /// Only reported on request: it makes output nondeterministic.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_ms: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DesignerSolution<S> {
    pub variant: Variant,
    pub memoized: bool,
    pub status: SolveStatus,
    /// Σ P(c_1)·V_1(c_1); `None` unless solved.
    pub j0: Option<S>,
    pub stats: SolveStats,
    /// Parallel to the tree levels; levels above an infeasible one are empty.
    pub levels: Vec<Vec<NodeSolution<S>>>,
}

impl<S: Scalar> DesignerSolution<S> {
    pub fn is_solved(&self) -> bool {
        self.status == SolveStatus::Solved
    }

    pub fn value_table(&self, t: usize) -> ValueTable<S> {
        ValueTable {
            w: self.levels[t].iter().map(|n| n.w.clone()).collect(),
            v: self.levels[t].iter().map(|n| n.v).collect(),
        }
    }

    pub fn nodes(&self) -> impl Iterator<Item = &NodeSolution<S>> {
        self.levels.iter().flatten()
    }

    /// Errors unless the solution covers exactly the nodes of `tree`.
    pub fn check_matches(&self, tree: &CommonTree<S>) -> Result<()> {
        if tree.levels.len() != self.levels.len() {
            return Err(Error::UnknownNode(format!(
                "solution has {} levels, tree has {}",
                self.levels.len(),
                tree.levels.len()
            )));
        }
        for (t, (sl, tl)) in self.levels.iter().zip(&tree.levels).enumerate() {
            if sl.is_empty() {
                continue;
            }
            if sl.len() != tl.len() {
                return Err(Error::UnknownNode(format!(
                    "level {} has {} nodes in the solution and {} in the tree",
                    t + 1,
                    sl.len(),
                    tl.len()
                )));
            }
            for (s, n) in sl.iter().zip(tl) {
                if s.node_key != n.node_key {
                    return Err(Error::UnknownNode(format!("expected node {}, found {}", n.node_key, s.node_key)));
                }
            }
        }
        Ok(())
    }
}

/// Result of one node LP.
#[derive(Clone, Debug, PartialEq)]
pub enum NodeOutcome<S> {
    Optimal(NodeSolution<S>),
    Infeasible,
}

/// Solves LP_t(c_t) at `node` given the next level's values.
pub fn solve_node<S: Scalar>(
    spec: &ProblemSpec<S>,
    node: &CommonNode<S>,
    next: Option<&ValueTable<S>>,
    tol: &ToleranceConfig,
    symmetrize: bool,
) -> Result<NodeOutcome<S>> {
    let ctx = NodeContext::new(spec, node, next);
    let nlp = assemble_node_lp(&ctx, tol)?;
    let sol = solve_lp(&nlp.lp, tol)?;
    match sol.status {
        LpStatus::Optimal => {}
        LpStatus::Infeasible => return Ok(NodeOutcome::Infeasible),
        LpStatus::Unbounded => {
            return Err(Error::NumericalBreakdown(format!(
                "node LP at {} reported unbounded",
                node.node_key
            )))
        }
    }
    let mut x = sol.primal.clone();
    let mut symmetrized = false;
    if symmetrize {
        if let Some(avg) = orbit_average(spec, node.time, &nlp.kernel_of(&x)) {
            let cand = nlp.embed_kernel(&avg);
            let (ok, _) = check_feasible(&nlp.lp, &cand, S::lit(1e-9));
            let v_var = nlp.v_var();
            if ok && cand[v_var] >= x[v_var] - S::lit(1e-9) {
                x = cand;
                symmetrized = true;
            }
        }
    }
    Ok(NodeOutcome::Optimal(NodeSolution {
        time: node.time,
        index: node.index,
        node_key: node.node_key.clone(),
        belief_key: node.belief_key.clone(),
        members: node.members.len(),
        kernel: nlp.kernel_of(&x),
        w: (0..nlp.agents).map(|i| x[nlp.w_var(i)]).collect(),
        v: x[nlp.v_var()],
        pivots: sol.pivots,
        symmetrized,
    }))
}

/// Solves every node LP from the last level to the first.
pub fn solve_on_tree<S: Scalar>(spec: &ProblemSpec<S>, tree: &CommonTree<S>, opts: &SolveOptions) -> Result<DesignerSolution<S>> {
    let t_len = tree.levels.len();
    let mut levels: Vec<Vec<NodeSolution<S>>> = vec![Vec::new(); t_len];
    let mut stats = SolveStats::default();
    let mut next: Option<ValueTable<S>> = None;
    for t in (0..t_len).rev() {
        let outcomes: Vec<Result<NodeOutcome<S>>> = tree.levels[t]
            .par_iter()
            .map(|node| solve_node(spec, node, next.as_ref(), &opts.tol, opts.symmetrize))
            .collect();
        let mut solved = Vec::with_capacity(outcomes.len());
        let mut infeasible = Vec::new();
        for (node, out) in tree.levels[t].iter().zip(outcomes) {
            stats.lp_solves += 1;
            match out? {
                NodeOutcome::Optimal(s) => {
                    stats.pivots += s.pivots;
                    stats.symmetrized += s.symmetrized as usize;
                    solved.push(s);
                }
                NodeOutcome::Infeasible => infeasible.push(node.node_key.clone()),
            }
        }
        if let Some(first) = infeasible.first().cloned() {
            if !opts.scan_all {
                infeasible.truncate(1);
            }
            return Ok(DesignerSolution {
                variant: spec.variant,
                memoized: tree.memoized,
                status: SolveStatus::InfeasibleAt {
                    time: t + 1,
                    node_key: first,
                    nodes: infeasible,
                },
                j0: None,
                stats,
                levels,
            });
        }
        levels[t] = solved;
        next = Some(ValueTable {
            w: levels[t].iter().map(|n| n.w.clone()).collect(),
            v: levels[t].iter().map(|n| n.v).collect(),
        });
    }
    let mut j0 = S::zero();
    for (node, sol) in tree.levels[0].iter().zip(&levels[0]) {
        for m in &node.members {
            j0 += m.prob * sol.v;
        }
    }
    Ok(DesignerSolution {
        variant: spec.variant,
        memoized: tree.memoized,
        status: SolveStatus::Solved,
        j0: Some(j0),
        stats,
        levels,
    })
}

/// Full pipeline: validation, the belief-independence gate, tree
/// construction and the backward pass.
pub fn backward_induct<S: Scalar>(spec: &ProblemSpec<S>, opts: &SolveOptions) -> Result<DesignerSolution<S>> {
    let start = Instant::now();
    let diags = spec.validate();
    if !diags.is_empty() {
        return Err(Error::Validation(diags));
    }
    if opts.memoize {
        spec.belief_keyed().map_err(Error::MemoizationUnsound)?;
    }
    if !opts.force {
        let report = check_assumption2(spec, opts.assumption_trials, opts.assumption_tol, opts.seed);
        if !report.passes {
            return Err(Error::AssumptionViolation {
                deviation: report.max_deviation,
                node: report.worst_node.unwrap_or_default(),
            });
        }
    }
    let tree = build_tree(spec, opts.memoize)?;
    let mut sol = solve_on_tree(spec, &tree, opts)?;
    sol.stats.wall_ms = Some(start.elapsed().as_secs_f64() * 1e3);
    Ok(sol)
}
