//! Oracles that check a returned solution without reusing the LP assembly:
//! exact evaluation of the profile, incentive checks by dynamic programming
//! and by enumeration, and simulation.

mod cisr;
mod monte_carlo;

pub use cisr::{
    brute_force_cisr, brute_force_on_tree, cisr_check, cisr_on_tree, CisrLocation, CisrReport, NodeGain,
    DEFAULT_MAX_STRATEGIES,
};
pub use monte_carlo::{monte_carlo, monte_carlo_on_tree, MonteCarloReport};

use std::collections::HashMap;

use serde::Serialize;

use crate::beliefs::{build_tree, initial_weights, CommonNode, CommonTree, Step};
use crate::error::{Error, Result};
use crate::index::MixedRadix;
use crate::model::{ProblemSpec, TargetStrategy};
use crate::scalar::Scalar;
use crate::solver::{DesignerSolution, SolveStatus};

/// Cells with less mass than this are treated as unreachable.
pub const MASS_FLOOR: f64 = 1e-14;

/// The profile (kernel plus targets) as seen at one node.
pub(crate) struct NodeView<'a, S> {
    pub spec: &'a ProblemSpec<S>,
    pub t: usize,
    pub node: &'a CommonNode<S>,
    pub kernel: &'a [Vec<S>],
    pub br: MixedRadix,
    pub ar: MixedRadix,
    pub kr: MixedRadix,
    step: Option<Step<'a, S>>,
    targets: Vec<&'a [usize]>,
    h0: Option<&'a [usize]>,
}

impl<'a, S: Scalar> NodeView<'a, S> {
    fn new(
        spec: &'a ProblemSpec<S>,
        node: &'a CommonNode<S>,
        kernel: &'a [Vec<S>],
        targets: &'a [TargetStrategy],
    ) -> Self {
        let t = node.time;
        Self {
            spec,
            t,
            node,
            kernel,
            br: spec.belief_radix(t),
            ar: spec.action_radix(t),
            kr: spec.kernel_radix(t),
            step: (t + 1 < spec.horizon).then(|| Step::new(spec, t)),
            targets: targets.iter().map(|h| h.table(t, &node.node_key, &node.belief_key)).collect(),
            h0: spec
                .h0
                .as_ref()
                .filter(|_| spec.fixed_action())
                .map(|h| h.table(t, &node.node_key, &node.belief_key)),
        }
    }

    pub fn agents(&self) -> usize {
        self.spec.num_agents
    }

    pub fn p0(&self, b: usize) -> usize {
        self.br.digit(b, 1)
    }

    /// Private information of agent `i` (0-based).
    pub fn private(&self, b: usize, i: usize) -> usize {
        self.br.digit(b, i + 2)
    }

    pub fn message(&self, d: usize, i: usize) -> usize {
        self.kr.digit(d, i)
    }

    pub fn private_size(&self, i: usize) -> usize {
        self.spec.spaces.private[i + 1][self.t]
    }

    pub fn message_size(&self, i: usize) -> usize {
        self.spec.spaces.messages[i][self.t]
    }

    pub fn action_size(&self, i: usize) -> usize {
        self.spec.spaces.agent_actions[i][self.t]
    }

    pub fn target(&self, i: usize, m: usize, p: usize) -> usize {
        self.targets[i][m * self.private_size(i) + p]
    }

    /// Action profile when agent `dev` (if any) plays `u` and everyone else
    /// follows the target.
    pub fn action(&self, b: usize, d: usize, dev: Option<(usize, usize)>) -> usize {
        let k = self.agents();
        let u0 = match self.h0 {
            Some(h0) => h0[self.p0(b)],
            None => self.kr.digit(d, k),
        };
        let mut a = u0 * self.ar.stride(0);
        for i in 0..k {
            let u = match dev {
                Some((j, u)) if j == i => u,
                _ => self.target(i, self.message(d, i), self.private(b, i)),
            };
            a += u * self.ar.stride(i + 1);
        }
        a
    }

    pub fn reward(&self, player: usize, b: usize, a: usize) -> S {
        let x = self.br.digit(b, 0);
        self.spec.rewards[self.t][player][x * self.ar.len() + a]
    }

    pub fn noise(&self) -> &'a [S] {
        &self.spec.noise[self.t]
    }

    /// Child node and next (x, p) index; `None` at the last time or when the
    /// increment has no child (only possible off the belief support).
    pub fn next(&self, b: usize, a: usize, n: usize) -> Option<(usize, usize)> {
        let step = self.step.as_ref()?;
        let child = self.node.child(step.increment(b, a, n))?;
        Some((child, step.next_belief_index(b, a, n)))
    }

    pub fn is_last(&self) -> bool {
        self.step.is_none()
    }
}

/// Node views for every level, checking that the solution fits the tree.
pub(crate) fn views<'a, S: Scalar>(
    spec: &'a ProblemSpec<S>,
    tree: &'a CommonTree<S>,
    sol: &'a DesignerSolution<S>,
    targets: &'a [TargetStrategy],
) -> Result<Vec<Vec<NodeView<'a, S>>>> {
    if let SolveStatus::InfeasibleAt { node_key, .. } = &sol.status {
        return Err(Error::Unsolved(node_key.clone()));
    }
    sol.check_matches(tree)?;
    if targets.len() != spec.num_agents {
        return Err(Error::UnknownNode(format!(
            "{} agent strategies for {} agents",
            targets.len(),
            spec.num_agents
        )));
    }
    Ok(tree
        .levels
        .iter()
        .zip(&sol.levels)
        .map(|(nodes, sols)| {
            nodes
                .iter()
                .zip(sols)
                .map(|(n, s)| NodeView::new(spec, n, &s.kernel, targets))
                .collect()
        })
        .collect())
}

/// Continuation lookup that tolerates missing children only off the support.
pub(crate) fn child_value<S: Scalar>(
    view: &NodeView<'_, S>,
    b: usize,
    a: usize,
    n: usize,
    next: Option<&Vec<Vec<S>>>,
    width: usize,
    slot: usize,
) -> Result<S> {
    if view.is_last() {
        return Ok(S::zero());
    }
    match (view.next(b, a, n), next) {
        (Some((c, nb)), Some(vals)) => Ok(vals[c][nb * width + slot]),
        _ if view.node.belief[b] > S::zero() => Err(Error::UnknownNode(format!(
            "no child below node {} for state {b}",
            view.node.node_key
        ))),
        _ => Ok(S::zero()),
    }
}

/// Reward-to-go R(c, b) of every player under the target profile, indexed
/// `[t][node][b · players + player]`.
pub(crate) fn target_values<S: Scalar>(levels: &[Vec<NodeView<'_, S>>]) -> Result<Vec<Vec<Vec<S>>>> {
    let t_len = levels.len();
    let mut out: Vec<Vec<Vec<S>>> = vec![Vec::new(); t_len];
    for t in (0..t_len).rev() {
        let next = out.get(t + 1);
        let mut level = Vec::with_capacity(levels[t].len());
        for view in &levels[t] {
            let players = view.spec.players();
            let mut r = vec![S::zero(); view.br.len() * players];
            for b in 0..view.br.len() {
                let row = &view.kernel[view.p0(b)];
                for (d, &g) in row.iter().enumerate() {
                    if g == S::zero() {
                        continue;
                    }
                    let a = view.action(b, d, None);
                    for (n, &q) in view.noise().iter().enumerate() {
                        if q == S::zero() {
                            continue;
                        }
                        for j in 0..players {
                            let cont = child_value(view, b, a, n, next, players, j)?;
                            r[b * players + j] += g * q * (view.reward(j, b, a) + cont);
                        }
                    }
                }
            }
            level.push(r);
        }
        out[t] = level;
    }
    Ok(out)
}

/// Level-1 node reached by each c_1.
pub(crate) fn initial_classes<S: Scalar>(tree: &CommonTree<S>) -> HashMap<usize, usize> {
    let mut map = HashMap::new();
    for node in &tree.levels[0] {
        for m in &node.members {
            map.insert(m.increment, node.index);
        }
    }
    map
}

/// Exact evaluation of one node.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NodeEvaluation {
    /// 1-based.
    pub time: usize,
    pub node_key: String,
    /// Probability of reaching the node under the profile.
    pub reach: f64,
    /// Conditional expected reward-to-go per player (designer first). Uses the
    /// node belief when the node is unreachable.
    pub to_go: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EvaluationReport {
    /// Expected total reward per player (designer first).
    pub j: Vec<f64>,
    pub nodes: Vec<NodeEvaluation>,
}

/// Exact expected rewards of the profile (solution kernels, `targets` for
/// the agents), by forward propagation of P(node, x, p) and backward
/// reward-to-go.
pub fn evaluate_on_tree<S: Scalar>(
    spec: &ProblemSpec<S>,
    tree: &CommonTree<S>,
    sol: &DesignerSolution<S>,
    targets: &[TargetStrategy],
) -> Result<EvaluationReport> {
    let levels = views(spec, tree, sol, targets)?;
    let values = target_values(&levels)?;
    let players = spec.players();

    let mut mass: Vec<Vec<S>> = levels[0].iter().map(|v| vec![S::zero(); v.br.len()]).collect();
    let classes = initial_classes(tree);
    for (c1, w) in initial_weights(spec).into_iter().enumerate() {
        if let Some(&node) = classes.get(&c1) {
            for (b, p) in w.into_iter().enumerate() {
                mass[node][b] += p;
            }
        }
    }
    let mut j = vec![S::zero(); players];
    let mut nodes = Vec::with_capacity(tree.node_count());
    for t in 0..levels.len() {
        let mut next_mass: Vec<Vec<S>> = levels
            .get(t + 1)
            .map(|l| l.iter().map(|v| vec![S::zero(); v.br.len()]).collect())
            .unwrap_or_default();
        for (c, view) in levels[t].iter().enumerate() {
            let r = &values[t][c];
            let reach: S = mass[c].iter().copied().sum();
            let mut to_go = vec![S::zero(); players];
            for (b, &mu) in mass[c].iter().enumerate() {
                for jj in 0..players {
                    to_go[jj] += mu * r[b * players + jj];
                }
            }
            if t == 0 {
                for jj in 0..players {
                    j[jj] += to_go[jj];
                }
            }
            if reach > S::zero() {
                for v in &mut to_go {
                    *v /= reach;
                }
            } else {
                to_go = vec![S::zero(); players];
                for (b, &pi) in view.node.belief.iter().enumerate() {
                    for jj in 0..players {
                        to_go[jj] += pi * r[b * players + jj];
                    }
                }
            }
            nodes.push(NodeEvaluation {
                time: t + 1,
                node_key: view.node.node_key.clone(),
                reach: reach.to_f64_lossy(),
                to_go: to_go.iter().map(|v| v.to_f64_lossy()).collect(),
            });
            if view.is_last() {
                continue;
            }
            for (b, &mu) in mass[c].iter().enumerate() {
                if mu == S::zero() {
                    continue;
                }
                for (d, &g) in view.kernel[view.p0(b)].iter().enumerate() {
                    if g == S::zero() {
                        continue;
                    }
                    let a = view.action(b, d, None);
                    for (n, &q) in view.noise().iter().enumerate() {
                        if q == S::zero() {
                            continue;
                        }
                        let (child, nb) = view.next(b, a, n).ok_or_else(|| {
                            Error::UnknownNode(format!("no child below node {} for state {b}", view.node.node_key))
                        })?;
                        next_mass[child][nb] += mu * g * q;
                    }
                }
            }
        }
        mass = next_mass;
    }
    Ok(EvaluationReport {
        j: j.iter().map(|v| v.to_f64_lossy()).collect(),
        nodes,
    })
}

/// Rebuilds the tree the solution was computed on.
pub fn tree_for<S: Scalar>(spec: &ProblemSpec<S>, sol: &DesignerSolution<S>) -> Result<CommonTree<S>> {
    let tree = build_tree(spec, sol.memoized)?;
    sol.check_matches(&tree)?;
    Ok(tree)
}

/// The unmemoized tree, with every raw node carrying its class's solution.
pub fn expand_memoized<S: Scalar>(
    spec: &ProblemSpec<S>,
    sol: &DesignerSolution<S>,
) -> Result<(CommonTree<S>, DesignerSolution<S>)> {
    if let SolveStatus::InfeasibleAt { node_key, .. } = &sol.status {
        return Err(Error::Unsolved(node_key.clone()));
    }
    let raw = build_tree(spec, false)?;
    let mut out = sol.clone();
    out.memoized = false;
    for (t, level) in raw.levels.iter().enumerate() {
        let by_key: HashMap<&str, usize> = sol.levels[t]
            .iter()
            .enumerate()
            .map(|(i, n)| (n.belief_key.as_str(), i))
            .collect();
        out.levels[t] = level
            .iter()
            .map(|node| {
                let class = by_key.get(node.belief_key.as_str()).ok_or_else(|| {
                    Error::UnknownNode(format!("no class with belief {} at t={}", node.belief_key, t + 1))
                })?;
                let mut ns = sol.levels[t][*class].clone();
                ns.index = node.index;
                ns.node_key = node.node_key.clone();
                ns.members = 1;
                Ok(ns)
            })
            .collect::<Result<_>>()?;
    }
    Ok((raw, out))
}

pub fn evaluate_profile<S: Scalar>(
    spec: &ProblemSpec<S>,
    sol: &DesignerSolution<S>,
    targets: &[TargetStrategy],
) -> Result<EvaluationReport> {
    let tree = tree_for(spec, sol)?;
    evaluate_on_tree(spec, &tree, sol, targets)
}
