use rayon::prelude::*;
use serde::Serialize;

use super::{child_value, expand_memoized, target_values, tree_for, views, NodeView, MASS_FLOOR};
use crate::beliefs::CommonTree;
use crate::error::{Error, Result};
use crate::model::ProblemSpec;
use crate::scalar::Scalar;
use crate::solver::DesignerSolution;

/// Enumeration bound for `brute_force_cisr`, per agent.
pub const DEFAULT_MAX_STRATEGIES: f64 = 1e6;

/// Where a deviation pays the most.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CisrLocation {
    /// 1-based.
    pub time: usize,
    pub node_key: String,
    /// 1-based.
    pub agent: usize,
    pub message: usize,
    pub private: usize,
    pub deviation: usize,
    /// Conditional gain of the one-step deviation given (message, private).
    pub gain: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NodeGain {
    pub time: usize,
    pub node_key: String,
    pub agent: usize,
    /// Best-response value W̃ at the node.
    pub best_response: f64,
    /// Target-following value recomputed from the kernels.
    pub target_value: f64,
    /// W stored in the solution.
    pub stored: f64,
    pub gain: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CisrReport {
    pub method: &'static str,
    pub passes: bool,
    pub tol: f64,
    pub max_gain: f64,
    /// Largest |recomputed − stored| W.
    pub max_value_mismatch: f64,
    /// Worst per agent, agent order.
    pub worst_by_agent: Vec<Option<CisrLocation>>,
    pub worst: Option<CisrLocation>,
    pub cells_checked: usize,
    /// Deviation strategies enumerated (brute force only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub strategies: Option<f64>,
    pub nodes: Vec<NodeGain>,
}

/// Per-cell action values for agent `i` at one node: `(mass, values[u])`
/// indexed by `m · P + p`, with `cont(b, a, n)` the continuation.
fn cell_values<S: Scalar>(
    view: &NodeView<'_, S>,
    i: usize,
    cont: &dyn Fn(usize, usize, usize) -> Result<S>,
) -> Result<Vec<(S, Vec<S>)>> {
    let (msize, psize, usize_) = (view.message_size(i), view.private_size(i), view.action_size(i));
    let mut cells = vec![(S::zero(), vec![S::zero(); usize_]); msize * psize];
    for (b, &pi) in view.node.belief.iter().enumerate() {
        if pi == S::zero() {
            continue;
        }
        let p = view.private(b, i);
        for (d, &g) in view.kernel[view.p0(b)].iter().enumerate() {
            if g == S::zero() {
                continue;
            }
            let cell = &mut cells[view.message(d, i) * psize + p];
            for (n, &q) in view.noise().iter().enumerate() {
                if q == S::zero() {
                    continue;
                }
                let w = pi * g * q;
                cell.0 += w;
                for u in 0..usize_ {
                    let a = view.action(b, d, Some((i, u)));
                    cell.1[u] += w * (view.reward(i + 1, b, a) + cont(b, a, n)?);
                }
            }
        }
    }
    Ok(cells)
}

/// R(c, b) for agent `i` when it plays `choice(m, p)` at this node.
fn node_values<S: Scalar>(
    view: &NodeView<'_, S>,
    i: usize,
    choice: &dyn Fn(usize, usize) -> usize,
    next: Option<&Vec<Vec<S>>>,
) -> Result<Vec<S>> {
    let mut r = vec![S::zero(); view.br.len()];
    for (b, slot) in r.iter_mut().enumerate() {
        let p = view.private(b, i);
        for (d, &g) in view.kernel[view.p0(b)].iter().enumerate() {
            if g == S::zero() {
                continue;
            }
            let a = view.action(b, d, Some((i, choice(view.message(d, i), p))));
            for (n, &q) in view.noise().iter().enumerate() {
                if q == S::zero() {
                    continue;
                }
                *slot += g * q * (view.reward(i + 1, b, a) + child_value(view, b, a, n, next, 1, 0)?);
            }
        }
    }
    Ok(r)
}

fn belief_mean<S: Scalar>(view: &NodeView<'_, S>, r: &[S], stride: usize, slot: usize) -> S {
    view.node
        .belief
        .iter()
        .enumerate()
        .map(|(b, &pi)| pi * r[b * stride + slot])
        .sum()
}

fn better<S: Scalar>(candidate: S, incumbent: S) -> bool {
    candidate > incumbent + S::lit(1e-12) * (S::one() + incumbent.abs())
}

struct Summary {
    nodes: Vec<NodeGain>,
    worst_by_agent: Vec<Option<CisrLocation>>,
    cells: usize,
    mismatch: f64,
}

fn finish(method: &'static str, tol: f64, s: Summary, strategies: Option<f64>) -> CisrReport {
    let max_gain = s.nodes.iter().map(|n| n.gain).fold(0.0, f64::max);
    let worst = s
        .worst_by_agent
        .iter()
        .flatten()
        .fold(None::<&CisrLocation>, |acc, l| match acc {
            Some(w) if w.gain >= l.gain => Some(w),
            _ => Some(l),
        })
        .cloned();
    CisrReport {
        method,
        passes: max_gain <= tol && s.mismatch <= tol,
        tol,
        max_gain,
        max_value_mismatch: s.mismatch,
        worst_by_agent: s.worst_by_agent,
        worst,
        cells_checked: s.cells,
        strategies,
        nodes: s.nodes,
    }
}

/// Largest one-step conditional gain at each node of agent `i`, using the
/// supplied continuation values.
fn worst_cell<S: Scalar>(
    view: &NodeView<'_, S>,
    i: usize,
    cells: &[(S, Vec<S>)],
    best: &mut Option<CisrLocation>,
    checked: &mut usize,
) {
    let psize = view.private_size(i);
    for (idx, (mass, vals)) in cells.iter().enumerate() {
        if mass.to_f64_lossy() < MASS_FLOOR {
            continue;
        }
        *checked += 1;
        let (m, p) = (idx / psize, idx % psize);
        let target = view.target(i, m, p);
        for (u, &v) in vals.iter().enumerate() {
            if u == target {
                continue;
            }
            let gain = ((v - vals[target]) / *mass).to_f64_lossy();
            if best.as_ref().is_none_or(|b| gain > b.gain) {
                *best = Some(CisrLocation {
                    time: view.t + 1,
                    node_key: view.node.node_key.clone(),
                    agent: i + 1,
                    message: m,
                    private: p,
                    deviation: u,
                    gain,
                });
            }
        }
    }
}

/// Checks that no agent can gain more than `tol` at any node by deviating
/// from its target, computing best-response values W̃ backward with the
/// maximization done per (message, private) cell under the node belief.
pub fn cisr_on_tree<S: Scalar>(
    spec: &ProblemSpec<S>,
    tree: &CommonTree<S>,
    sol: &DesignerSolution<S>,
    tol: f64,
) -> Result<CisrReport> {
    let levels = views(spec, tree, sol, &spec.targets)?;
    let target = target_values(&levels)?;
    let players = spec.players();
    let mut summary = Summary {
        nodes: Vec::new(),
        worst_by_agent: vec![None; spec.num_agents],
        cells: 0,
        mismatch: 0.0,
    };
    for i in 0..spec.num_agents {
        let mut best: Vec<Vec<Vec<S>>> = vec![Vec::new(); levels.len()];
        let mut gains = Vec::new();
        for t in (0..levels.len()).rev() {
            let next = best.get(t + 1).filter(|l| !l.is_empty());
            let mut level = Vec::with_capacity(levels[t].len());
            for (c, view) in levels[t].iter().enumerate() {
                let cont = |b: usize, a: usize, n: usize| child_value(view, b, a, n, next, 1, 0);
                let cells = cell_values(view, i, &cont)?;
                let psize = view.private_size(i);
                let choice = |m: usize, p: usize| {
                    let target = view.target(i, m, p);
                    let (mass, vals) = &cells[m * psize + p];
                    if mass.to_f64_lossy() < MASS_FLOOR {
                        return target;
                    }
                    let mut pick = target;
                    for (u, &v) in vals.iter().enumerate() {
                        if better(v, vals[pick]) {
                            pick = u;
                        }
                    }
                    pick
                };
                let r = node_values(view, i, &choice, next)?;
                worst_cell(view, i, &cells, &mut summary.worst_by_agent[i], &mut summary.cells);
                let w_tilde = belief_mean(view, &r, 1, 0).to_f64_lossy();
                let w_rec = belief_mean(view, &target[t][c], players, i + 1).to_f64_lossy();
                let stored = sol.levels[t][c].w[i].to_f64_lossy();
                summary.mismatch = summary.mismatch.max((w_rec - stored).abs());
                gains.push(NodeGain {
                    time: t + 1,
                    node_key: view.node.node_key.clone(),
                    agent: i + 1,
                    best_response: w_tilde,
                    target_value: w_rec,
                    stored,
                    gain: w_tilde - w_rec,
                });
                level.push(r);
            }
            best[t] = level;
        }
        gains.reverse();
        summary.nodes.extend(gains);
    }
    Ok(finish("dynamic_programming", tol, summary, None))
}

pub fn cisr_check<S: Scalar>(spec: &ProblemSpec<S>, sol: &DesignerSolution<S>, tol: f64) -> Result<CisrReport> {
    let tree = tree_for(spec, sol)?;
    cisr_on_tree(spec, &tree, sol, tol)
}

/// Checks the same property by enumerating every deterministic deviation
/// strategy of each agent over its positive-mass cells of `tree`.
pub fn brute_force_on_tree<S: Scalar>(
    spec: &ProblemSpec<S>,
    tree: &CommonTree<S>,
    sol: &DesignerSolution<S>,
    tol: f64,
    max_strategies: f64,
) -> Result<CisrReport> {
    let levels = views(spec, tree, sol, &spec.targets)?;
    let target = target_values(&levels)?;
    let players = spec.players();
    let mut summary = Summary {
        nodes: Vec::new(),
        worst_by_agent: vec![None; spec.num_agents],
        cells: 0,
        mismatch: 0.0,
    };
    let mut total_strategies = 0.0;
    for i in 0..spec.num_agents {
        // Cell masses do not depend on the agent's own actions.
        let mut radix = Vec::new();
        let mut cell_index: Vec<Vec<Vec<Option<usize>>>> = Vec::new();
        for level in &levels {
            let mut per_node = Vec::new();
            for view in level {
                let zero = |_: usize, _: usize, _: usize| Ok(S::zero());
                let masses = cell_values(view, i, &zero)?;
                let mut idx = vec![None; masses.len()];
                for (k, (mass, _)) in masses.iter().enumerate() {
                    if mass.to_f64_lossy() >= MASS_FLOOR {
                        idx[k] = Some(radix.len());
                        radix.push(view.action_size(i));
                    }
                }
                per_node.push(idx);
            }
            cell_index.push(per_node);
        }
        summary.cells += radix.len();
        let count: f64 = radix.iter().map(|&r| r as f64).product();
        if count > max_strategies {
            return Err(Error::TooLarge {
                what: "deviation strategy space",
                size: count,
                limit: max_strategies,
            });
        }
        total_strategies += count;
        let count = count as u64;

        let evaluate = |s: u64| -> Result<Vec<Vec<S>>> {
            let mut digits = vec![0usize; radix.len()];
            let mut rest = s;
            for (k, &r) in radix.iter().enumerate().rev() {
                digits[k] = (rest % r as u64) as usize;
                rest /= r as u64;
            }
            let mut vals: Vec<Vec<Vec<S>>> = vec![Vec::new(); levels.len()];
            let mut node_vals: Vec<Vec<S>> = vec![Vec::new(); levels.len()];
            for t in (0..levels.len()).rev() {
                let next = vals.get(t + 1).filter(|l| !l.is_empty());
                let mut level = Vec::with_capacity(levels[t].len());
                for (c, view) in levels[t].iter().enumerate() {
                    let psize = view.private_size(i);
                    let idx = &cell_index[t][c];
                    let choice = |m: usize, p: usize| match idx[m * psize + p] {
                        Some(k) => digits[k],
                        None => view.target(i, m, p),
                    };
                    let r = node_values(view, i, &choice, next)?;
                    node_vals[t].push(belief_mean(view, &r, 1, 0));
                    level.push(r);
                }
                vals[t] = level;
            }
            Ok(node_vals)
        };
        // Elementwise max over strategies; max is order-independent, so the
        // parallel reduction is deterministic.
        let best = (0..count)
            .into_par_iter()
            .map(evaluate)
            .try_reduce_with(|mut a, b| {
                for (at, bt) in a.iter_mut().zip(&b) {
                    for (x, y) in at.iter_mut().zip(bt) {
                        *x = x.max(*y);
                    }
                }
                Ok(a)
            })
            .transpose()?;
        let Some(best) = best else { continue };
        for (t, level) in levels.iter().enumerate() {
            for (c, view) in level.iter().enumerate() {
                let w_rec = belief_mean(view, &target[t][c], players, i + 1).to_f64_lossy();
                let stored = sol.levels[t][c].w[i].to_f64_lossy();
                let bf = best[t][c].to_f64_lossy();
                summary.mismatch = summary.mismatch.max((w_rec - stored).abs());
                summary.nodes.push(NodeGain {
                    time: t + 1,
                    node_key: view.node.node_key.clone(),
                    agent: i + 1,
                    best_response: bf,
                    target_value: w_rec,
                    stored,
                    gain: bf - w_rec,
                });
            }
        }
        // Locate the worst one-step deviation under target continuations.
        for (t, level) in levels.iter().enumerate() {
            let next = target.get(t + 1);
            for view in level {
                let cont = |b: usize, a: usize, n: usize| child_value(view, b, a, n, next, players, i + 1);
                let cells = cell_values(view, i, &cont)?;
                let mut ignored = 0;
                worst_cell(view, i, &cells, &mut summary.worst_by_agent[i], &mut ignored);
            }
        }
    }
    Ok(finish("brute_force", tol, summary, Some(total_strategies)))
}

pub fn brute_force_cisr<S: Scalar>(
    spec: &ProblemSpec<S>,
    sol: &DesignerSolution<S>,
    tol: f64,
    max_strategies: f64,
) -> Result<CisrReport> {
    // Deviations may depend on the full history, so a memoized solution is
    // spread back over the raw tree first.
    if sol.memoized {
        let (tree, raw) = expand_memoized(spec, sol)?;
        return brute_force_on_tree(spec, &tree, &raw, tol, max_strategies);
    }
    let tree = tree_for(spec, sol)?;
    brute_force_on_tree(spec, &tree, sol, tol, max_strategies)
}
