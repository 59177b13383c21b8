//! Common-information tree and the beliefs attached to its nodes.

use std::collections::{BTreeMap, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::index::MixedRadix;
use crate::model::ProblemSpec;
use crate::scalar::Scalar;

/// Levels larger than this are refused rather than enumerated.
pub const MAX_LEVEL_NODES: usize = 2_000_000;

/// How a node (or memoized class) is entered from the previous level.
#[derive(Clone, Debug, PartialEq)]
pub struct Member<S> {
    /// Parent index in the previous level; `None` at t = 1.
    pub parent: Option<usize>,
    /// z_{t} (or c_1 at t = 1).
    pub increment: usize,
    /// P(z | parent) under the reference profile, or P(c_1) at t = 1.
    pub prob: S,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChildEdge<S> {
    pub increment: usize,
    pub child: usize,
    pub prob: S,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CommonNode<S> {
    /// 0-based time.
    pub time: usize,
    pub index: usize,
    /// `c1/z2/z3/...` of the first member.
    pub node_key: String,
    pub path: Vec<usize>,
    /// π_t over (x, p⁰, ..., p^K), canonicalized.
    pub belief: Vec<S>,
    pub belief_key: String,
    /// One entry per raw node coalesced into this one (just one without memoization).
    pub members: Vec<Member<S>>,
    /// Sorted by increment.
    pub children: Vec<ChildEdge<S>>,
}

impl<S: Scalar> CommonNode<S> {
    /// Child reached through increment `z`.
    pub fn child(&self, z: usize) -> Option<usize> {
        self.children
            .binary_search_by_key(&z, |e| e.increment)
            .ok()
            .map(|i| self.children[i].child)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CommonTree<S> {
    pub levels: Vec<Vec<CommonNode<S>>>,
    pub memoized: bool,
}

impl<S: Scalar> CommonTree<S> {
    pub fn node_count(&self) -> usize {
        self.levels.iter().map(|l| l.len()).sum()
    }

    /// Raw (uncoalesced) node count per level.
    pub fn raw_level_counts(&self) -> Vec<usize> {
        let mut counts: Vec<usize> = self.levels[0].iter().map(|n| n.members.len()).collect();
        let mut out = vec![counts.iter().sum()];
        for t in 1..self.levels.len() {
            let mut next = vec![0usize; self.levels[t].len()];
            for (i, node) in self.levels[t - 1].iter().enumerate() {
                for e in &node.children {
                    next[e.child] += counts[i];
                }
            }
            out.push(next.iter().sum());
            counts = next;
        }
        out
    }

    /// Raw (uncoalesced) node count represented by the tree.
    pub fn raw_count(&self) -> usize {
        self.raw_level_counts().iter().sum()
    }

    pub fn find(&self, node_key: &str) -> Option<&CommonNode<S>> {
        self.levels.iter().flatten().find(|n| n.node_key == node_key)
    }
}

fn round12<S: Scalar>(v: S) -> S {
    let scale = S::lit(1e12);
    (v * scale).round() / scale
}

/// Snaps a distribution to a 12-decimal grid and renormalizes, so equal
/// keys always carry bit-identical vectors.
pub fn canonicalize<S: Scalar>(v: &[S]) -> Vec<S> {
    let total: S = v.iter().copied().sum();
    let mut out: Vec<S> = v.iter().map(|x| round12(*x / total).max(S::zero())).collect();
    let s: S = out.iter().copied().sum();
    for x in &mut out {
        *x /= s;
    }
    out
}

/// Sorted support with 12-decimal probabilities.
pub fn belief_key<S: Scalar>(belief: &[S]) -> String {
    let mut parts = Vec::new();
    for (i, p) in belief.iter().enumerate() {
        let p = p.to_f64_lossy();
        if p > 0.0 {
            parts.push(format!("{i}:{p:.12}"));
        }
    }
    parts.join(",")
}

/// Joint weights P(b, c_1) from P_X1, Q_1 and Λ, grouped by c_1.
pub fn initial_weights<S: Scalar>(spec: &ProblemSpec<S>) -> Vec<Vec<S>> {
    let br = spec.belief_radix(0);
    let p_all = spec.private_radix(0).len();
    let c1 = spec.initial.c1_size;
    let n1 = spec.spaces.noise[0];
    let mut out = vec![vec![S::zero(); br.len()]; c1];
    for x in 0..spec.spaces.state[0] {
        let px = spec.initial.p_x1[x];
        if px == S::zero() {
            continue;
        }
        for n in 0..n1 {
            let q = spec.noise[0][n];
            if q == S::zero() {
                continue;
            }
            for p in 0..p_all {
                for c in 0..c1 {
                    let l = spec.initial.lambda[((x * n1 + n) * p_all + p) * c1 + c];
                    if l != S::zero() {
                        // b = x·P_all + p because x is the leading digit.
                        out[c][x * p_all + p] += px * q * l;
                    }
                }
            }
        }
    }
    out
}

/// One node per c_1 with positive probability, carrying π_1(· | c_1).
pub fn initial_nodes<S: Scalar>(spec: &ProblemSpec<S>) -> Vec<CommonNode<S>> {
    let mut nodes = Vec::new();
    for (c, w) in initial_weights(spec).into_iter().enumerate() {
        let total: S = w.iter().copied().sum();
        if total <= S::zero() {
            continue;
        }
        let belief = canonicalize(&w);
        nodes.push(CommonNode {
            time: 0,
            index: nodes.len(),
            node_key: c.to_string(),
            path: vec![c],
            belief_key: belief_key(&belief),
            belief,
            members: vec![Member {
                parent: None,
                increment: c,
                prob: total,
            }],
            children: Vec::new(),
        });
    }
    nodes
}

/// Lookup tables for one transition step t -> t+1.
pub(crate) struct Step<'a, S> {
    spec: &'a ProblemSpec<S>,
    t: usize,
    pub br: MixedRadix,
    pub next_br: MixedRadix,
    pub ar: MixedRadix,
    pub n: usize,
}

impl<'a, S: Scalar> Step<'a, S> {
    pub fn new(spec: &'a ProblemSpec<S>, t: usize) -> Self {
        Self {
            spec,
            t,
            br: spec.belief_radix(t),
            next_br: spec.belief_radix(t + 1),
            ar: spec.action_radix(t),
            n: spec.spaces.noise[t],
        }
    }

    #[inline]
    pub fn increment(&self, b: usize, a: usize, n: usize) -> usize {
        self.spec.zeta[self.t][(b * self.ar.len() + a) * self.n + n]
    }

    /// Next (x, p⁰, ..., p^K) flat index.
    pub fn next_belief_index(&self, b: usize, a: usize, n: usize) -> usize {
        let spec = self.spec;
        let x = self.br.digit(b, 0);
        let an = a * self.n + n;
        let mut flat = spec.dynamics[self.t][(x * self.ar.len()) * self.n + an] * self.next_br.stride(0);
        for j in 0..spec.players() {
            let pj = self.br.digit(b, j + 1);
            let size = spec.spaces.private[j][self.t];
            let nx = spec.xi[self.t][j][((x * size + pj) * self.ar.len()) * self.n + an];
            flat += nx * self.next_br.stride(j + 1);
        }
        flat
    }
}

/// Child increments with their probabilities and normalized beliefs, given
/// P(a | b) from `action_dist`. Sorted by increment.
pub(crate) fn step_beliefs<S: Scalar>(
    spec: &ProblemSpec<S>,
    t: usize,
    belief: &[S],
    action_dist: &dyn Fn(usize) -> Vec<(usize, S)>,
) -> Vec<(usize, S, Vec<S>)> {
    let step = Step::new(spec, t);
    let width = step.next_br.len();
    let mut acc: BTreeMap<usize, Vec<S>> = BTreeMap::new();
    for (b, &pb) in belief.iter().enumerate() {
        if pb == S::zero() {
            continue;
        }
        let actions = action_dist(b);
        for n in 0..step.n {
            let q = spec.noise[t][n];
            if q == S::zero() {
                continue;
            }
            for &(a, pa) in &actions {
                let w = pb * q * pa;
                if w == S::zero() {
                    continue;
                }
                let z = step.increment(b, a, n);
                let nb = step.next_belief_index(b, a, n);
                acc.entry(z).or_insert_with(|| vec![S::zero(); width])[nb] += w;
            }
        }
    }
    acc.into_iter()
        .map(|(z, w)| {
            let total: S = w.iter().copied().sum();
            let normalized = w.iter().map(|v| *v / total).collect();
            (z, total, normalized)
        })
        .collect()
}

fn uniform_actions<S: Scalar>(a_len: usize) -> impl Fn(usize) -> Vec<(usize, S)> {
    let w = S::one() / S::from_usize(a_len).unwrap();
    move |_| (0..a_len).map(|a| (a, w)).collect()
}

/// Children of `node` under the full-support reference profile (uniform
/// over every designer message and action and every agent action).
pub fn expand_children<S: Scalar>(spec: &ProblemSpec<S>, node: &CommonNode<S>) -> Vec<CommonNode<S>> {
    let t = node.time;
    let dist = uniform_actions::<S>(spec.action_radix(t).len());
    step_beliefs(spec, t, &node.belief, &dist)
        .into_iter()
        .enumerate()
        .map(|(i, (z, prob, b))| {
            let belief = canonicalize(&b);
            let mut path = node.path.clone();
            path.push(z);
            CommonNode {
                time: t + 1,
                index: i,
                node_key: format!("{}/{z}", node.node_key),
                path,
                belief_key: belief_key(&belief),
                belief,
                members: vec![Member {
                    parent: Some(node.index),
                    increment: z,
                    prob,
                }],
                children: Vec::new(),
            }
        })
        .collect()
}

/// Merges raw nodes (already in canonical order) into classes by belief key.
fn coalesce<S: Scalar>(raw: Vec<CommonNode<S>>, memoize: bool) -> (Vec<CommonNode<S>>, Vec<usize>) {
    let mut out: Vec<CommonNode<S>> = Vec::new();
    let mut class_of = Vec::with_capacity(raw.len());
    let mut by_key: HashMap<String, usize> = HashMap::new();
    for mut node in raw {
        if memoize {
            if let Some(&c) = by_key.get(&node.belief_key) {
                out[c].members.append(&mut node.members);
                class_of.push(c);
                continue;
            }
            by_key.insert(node.belief_key.clone(), out.len());
        }
        node.index = out.len();
        class_of.push(out.len());
        out.push(node);
    }
    (out, class_of)
}

/// The reachable common-information tree; with `memoize`, nodes at the same
/// time with equal belief keys share one class.
pub fn build_tree<S: Scalar>(spec: &ProblemSpec<S>, memoize: bool) -> Result<CommonTree<S>> {
    if memoize {
        spec.belief_keyed().map_err(Error::MemoizationUnsound)?;
    }
    let (first, _) = coalesce(initial_nodes(spec), memoize);
    let mut levels = vec![first];
    for t in 0..spec.horizon - 1 {
        let parents = &levels[t];
        let expanded: Vec<Vec<CommonNode<S>>> = parents.par_iter().map(|p| expand_children(spec, p)).collect();
        let total: usize = expanded.iter().map(|c| c.len()).sum();
        if total > MAX_LEVEL_NODES && !memoize {
            return Err(Error::TooLarge {
                what: "common-information level",
                size: total as f64,
                limit: MAX_LEVEL_NODES as f64,
            });
        }
        let owners: Vec<(usize, usize, S)> = expanded
            .iter()
            .enumerate()
            .flat_map(|(p, kids)| kids.iter().map(move |k| (p, k.members[0].increment, k.members[0].prob)))
            .collect();
        let (next, class_of) = coalesce(expanded.into_iter().flatten().collect(), memoize);
        let parents = &mut levels[t];
        for ((p, z, prob), c) in owners.into_iter().zip(class_of) {
            parents[p].children.push(ChildEdge {
                increment: z,
                child: c,
                prob,
            });
        }
        levels.push(next);
    }
    Ok(CommonTree { levels, memoized: memoize })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Assumption2Report {
    pub passes: bool,
    pub trials: usize,
    pub tol: f64,
    pub max_deviation: f64,
    pub worst_node: Option<String>,
    pub nodes_checked: usize,
    /// False when large levels were subsampled.
    pub exhaustive: bool,
}

/// A random strictly mixed behavioral profile at one node.
struct RandomProfile<S> {
    /// g(d | p⁰) over (m¹..m^K, u⁰), rows by p⁰.
    designer: Vec<Vec<S>>,
    /// σ^i(u | m, p^i), `[i][m·P_i + p_i][u]`.
    agents: Vec<Vec<Vec<S>>>,
}

fn mixed_row<S: Scalar>(rng: &mut ChaCha8Rng, len: usize) -> Vec<S> {
    let w: Vec<f64> = (0..len).map(|_| rng.gen_range(0.1..1.0)).collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|v| S::lit(v / s)).collect()
}

fn draw_profile<S: Scalar>(spec: &ProblemSpec<S>, t: usize, rng: &mut ChaCha8Rng) -> RandomProfile<S> {
    let sp = &spec.spaces;
    let mut full: Vec<usize> = sp.messages.iter().map(|m| m[t]).collect();
    full.push(sp.designer_action[t]);
    let d_len: usize = full.iter().product();
    let designer = (0..sp.private[0][t]).map(|_| mixed_row(rng, d_len)).collect();
    let agents = (0..spec.num_agents)
        .map(|i| {
            (0..sp.messages[i][t] * sp.private[i + 1][t])
                .map(|_| mixed_row(rng, sp.agent_actions[i][t]))
                .collect()
        })
        .collect();
    RandomProfile { designer, agents }
}

/// P(a | private info) induced by a profile, for every private tuple.
fn profile_actions<S: Scalar>(spec: &ProblemSpec<S>, t: usize, prof: &RandomProfile<S>) -> Vec<Vec<(usize, S)>> {
    let sp = &spec.spaces;
    let k = spec.num_agents;
    let pr = spec.private_radix(t);
    let ar = spec.action_radix(t);
    let mut full: Vec<usize> = sp.messages.iter().map(|m| m[t]).collect();
    full.push(sp.designer_action[t]);
    let dr = MixedRadix::new(full);
    let agent_r = MixedRadix::new(sp.agent_actions.iter().map(|u| u[t]).collect());
    let mut out = Vec::with_capacity(pr.len());
    let mut digits = vec![0; k];
    for p in 0..pr.len() {
        let p0 = pr.digit(p, 0);
        let mut dist = vec![S::zero(); ar.len()];
        for d in 0..dr.len() {
            let gd = prof.designer[p0][d];
            let u0 = dr.digit(d, k);
            for ua in 0..agent_r.len() {
                agent_r.decode_into(ua, &mut digits);
                let mut w = gd;
                for i in 0..k {
                    let m = dr.digit(d, i);
                    let pi = pr.digit(p, i + 1);
                    w *= prof.agents[i][m * sp.private[i + 1][t] + pi][digits[i]];
                }
                dist[u0 * ar.stride(0) + ua] += w;
            }
        }
        out.push(dist.into_iter().enumerate().collect());
    }
    out
}

/// Numerically tests whether node beliefs depend on the strategy profile by
/// recomputing them under `trials` random strictly mixed profiles.
pub fn check_assumption2<S: Scalar>(spec: &ProblemSpec<S>, trials: usize, tol: f64, seed: u64) -> Assumption2Report {
    check_assumption2_capped(spec, trials, tol, seed, 50_000)
}

pub fn check_assumption2_capped<S: Scalar>(
    spec: &ProblemSpec<S>,
    trials: usize,
    tol: f64,
    seed: u64,
    level_cap: usize,
) -> Assumption2Report {
    let mut report = Assumption2Report {
        passes: true,
        trials,
        tol,
        max_deviation: 0.0,
        worst_node: None,
        nodes_checked: 0,
        exhaustive: true,
    };
    let a_len: Vec<usize> = (0..spec.horizon).map(|t| spec.action_radix(t).len()).collect();
    for trial in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(trial as u64);
        // (node key, belief under the reference profile, belief under this profile)
        let mut level: Vec<(String, Vec<S>, Vec<S>)> = initial_weights(spec)
            .into_iter()
            .enumerate()
            .filter_map(|(c, w)| {
                let total: S = w.iter().copied().sum();
                (total > S::zero()).then(|| {
                    let b: Vec<S> = w.iter().map(|v| *v / total).collect();
                    (c.to_string(), b.clone(), b)
                })
            })
            .collect();
        report.nodes_checked += level.len();
        for t in 0..spec.horizon - 1 {
            let reference = uniform_actions::<S>(a_len[t]);
            let pr = spec.private_radix(t);
            let br = spec.belief_radix(t);
            let mut next = Vec::new();
            for (key, ref_b, prof_b) in &level {
                let prof = draw_profile(spec, t, &mut rng);
                let table = profile_actions(spec, t, &prof);
                let by_private = |b: usize| table[b % pr.len()].clone();
                debug_assert_eq!(br.len(), spec.spaces.state[t] * pr.len());
                let ref_kids = step_beliefs(spec, t, ref_b, &reference);
                let prof_kids = step_beliefs(spec, t, prof_b, &by_private);
                let prof_map: BTreeMap<usize, &Vec<S>> = prof_kids.iter().map(|(z, _, b)| (*z, b)).collect();
                for (z, _, rb) in &ref_kids {
                    let child_key = format!("{key}/{z}");
                    let dev = match prof_map.get(z) {
                        Some(pb) => rb.iter().zip(pb.iter()).map(|(a, b)| (*a - *b).abs().to_f64_lossy()).fold(0.0, f64::max),
                        None => 1.0,
                    };
                    if dev > report.max_deviation {
                        report.max_deviation = dev;
                        report.worst_node = Some(child_key.clone());
                    }
                    if let Some(pb) = prof_map.get(z) {
                        next.push((child_key, rb.clone(), (*pb).clone()));
                    }
                }
                if prof_kids.len() != ref_kids.len() {
                    report.max_deviation = report.max_deviation.max(1.0);
                    report.worst_node.get_or_insert_with(|| key.clone());
                }
            }
            if next.len() > level_cap {
                let stride = next.len().div_ceil(level_cap);
                next = next.into_iter().step_by(stride).collect();
                report.exhaustive = false;
            }
            report.nodes_checked += next.len();
            level = next;
        }
    }
    report.passes = report.max_deviation <= tol;
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_beliefs_are_stable() {
        let a = canonicalize(&[0.1f64 + 0.2, 0.7]);
        let b = canonicalize(&[0.3f64, 0.7]);
        assert_eq!(a, b);
        assert_eq!(belief_key(&a), "0:0.300000000000,1:0.700000000000");
        assert_eq!(belief_key(&[0.0f64, 1.0]), "1:1.000000000000");
    }
}
