//! Tabular problem instances.

mod io;

pub use io::{load_problem, parse_problem, save_problem, to_json, FORMAT_VERSION};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::Diagnostic;
use crate::index::MixedRadix;
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// One agent, designer action fixed by `h0`, kernel over messages.
    FixedAction,
    /// One agent, kernel over (message, designer action).
    JointMessageAction,
    /// K >= 2 agents, kernel over (messages, designer action).
    MultiAgent,
}

/// A finite index set with optional cosmetic names.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiniteSpace {
    pub label: String,
    pub size: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub element_names: Option<Vec<String>>,
}

/// Sizes of every space, indexed by time (0-based).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Spaces {
    pub state: Vec<usize>,
    pub designer_action: Vec<usize>,
    /// `[agent][t]`, agents numbered from 0 here (agent i+1 in the model).
    pub agent_actions: Vec<Vec<usize>>,
    pub messages: Vec<Vec<usize>>,
    pub noise: Vec<usize>,
    /// `[player][t]`, player 0 is the designer.
    pub private: Vec<Vec<usize>>,
    /// Increment spaces between consecutive times; `horizon - 1` entries.
    pub increments: Vec<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Names {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub state: Vec<Vec<String>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub designer_private: Vec<Vec<String>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct Initial<S> {
    pub p_x1: Vec<S>,
    /// Λ(p^{0:K}, c_1 | x_1, n_1), flat index `((x·N + n)·P + p)·C + c`.
    pub lambda: Vec<S>,
    pub c1_size: usize,
}

/// A deterministic table with per-key replacements.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct KeyedTable {
    pub default: Vec<usize>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub overrides: BTreeMap<String, Vec<usize>>,
}

impl KeyedTable {
    pub fn constant(values: Vec<usize>) -> Self {
        Self {
            default: values,
            overrides: BTreeMap::new(),
        }
    }

    pub fn lookup(&self, key: &str) -> &[usize] {
        self.overrides.get(key).unwrap_or(&self.default)
    }
}

/// h_t(m, p, key) for one agent (tables over `m·P + p`), or h⁰_t(p⁰, key)
/// for the designer (tables over `p⁰`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TargetStrategy {
    /// Overrides are keyed by belief key when set, by node key otherwise.
    pub belief_dependent: bool,
    pub tables: Vec<KeyedTable>,
}

impl TargetStrategy {
    pub fn table(&self, t: usize, node_key: &str, belief_key: &str) -> &[usize] {
        let key = if self.belief_dependent { belief_key } else { node_key };
        self.tables[t].lookup(key)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct ProblemSpec<S> {
    pub horizon: usize,
    pub num_agents: usize,
    pub variant: Variant,
    pub spaces: Spaces,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub names: Option<Names>,
    /// Q_t per time.
    pub noise: Vec<Vec<S>>,
    pub initial: Initial<S>,
    /// f_t for t < T: flat `(x·A + a)·N + n`.
    pub dynamics: Vec<Vec<usize>>,
    /// ξ^j_{t+1} for t < T, `[t][player]`: flat `((x·P_j + p_j)·A + a)·N + n`.
    pub xi: Vec<Vec<Vec<usize>>>,
    /// ζ_{t+1} for t < T: flat `(b·A + a)·N + n`.
    pub zeta: Vec<Vec<usize>>,
    /// r^j_t, `[t][player]`: flat `x·A + a`.
    pub rewards: Vec<Vec<Vec<S>>>,
    pub targets: Vec<TargetStrategy>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h0: Option<TargetStrategy>,
}

impl<S: Scalar> ProblemSpec<S> {
    pub fn players(&self) -> usize {
        self.num_agents + 1
    }

    /// (x, p⁰, p¹, ..., p^K) at time t.
    pub fn belief_radix(&self, t: usize) -> MixedRadix {
        let mut r = vec![self.spaces.state[t]];
        r.extend(self.spaces.private.iter().map(|p| p[t]));
        MixedRadix::new(r)
    }

    /// (p⁰, ..., p^K) at time t.
    pub fn private_radix(&self, t: usize) -> MixedRadix {
        MixedRadix::new(self.spaces.private.iter().map(|p| p[t]).collect())
    }

    /// (u⁰, u¹, ..., u^K) at time t.
    pub fn action_radix(&self, t: usize) -> MixedRadix {
        let mut r = vec![self.spaces.designer_action[t]];
        r.extend(self.spaces.agent_actions.iter().map(|u| u[t]));
        MixedRadix::new(r)
    }

    /// Kernel columns (m¹, ..., m^K, u⁰); the u⁰ digit is a singleton when
    /// the designer action is fixed by `h0`.
    pub fn kernel_radix(&self, t: usize) -> MixedRadix {
        let mut r: Vec<usize> = self.spaces.messages.iter().map(|m| m[t]).collect();
        r.push(match self.variant {
            Variant::FixedAction => 1,
            _ => self.spaces.designer_action[t],
        });
        MixedRadix::new(r)
    }

    /// The state space at time t, with names when the file provides them.
    pub fn state_space(&self, t: usize) -> FiniteSpace {
        FiniteSpace {
            label: format!("X_{}", t + 1),
            size: self.spaces.state[t],
            element_names: self.names.as_ref().and_then(|n| n.state.get(t).cloned()),
        }
    }

    /// Designer private information at time t.
    pub fn designer_private_space(&self, t: usize) -> FiniteSpace {
        FiniteSpace {
            label: format!("P0_{}", t + 1),
            size: self.spaces.private[0][t],
            element_names: self.names.as_ref().and_then(|n| n.designer_private.get(t).cloned()),
        }
    }

    pub fn fixed_action(&self) -> bool {
        self.variant == Variant::FixedAction
    }

    /// Every target (and h⁰) depends on the node only through its belief.
    pub fn belief_keyed(&self) -> Result<(), String> {
        for (i, h) in self.targets.iter().enumerate() {
            if !h.belief_dependent {
                return Err(format!("h^{}", i + 1));
            }
        }
        if let Some(h0) = &self.h0 {
            if !h0.belief_dependent {
                return Err("h^0".into());
            }
        }
        Ok(())
    }

    /// Every invariant violation; empty iff the spec is usable.
    pub fn validate(&self) -> Vec<Diagnostic> {
        validate(self)
    }
}

fn check_len<T>(diags: &mut Vec<Diagnostic>, field: &str, v: &[T], want: usize) -> bool {
    if v.len() != want {
        diags.push(Diagnostic::new(field, format!("has {} entries, expected {want}", v.len())));
        false
    } else {
        true
    }
}

fn check_range(diags: &mut Vec<Diagnostic>, field: &str, v: &[usize], bound: usize) {
    if let Some((i, x)) = v.iter().enumerate().find(|(_, x)| **x >= bound) {
        let bad = v.iter().filter(|x| **x >= bound).count();
        diags.push(
            Diagnostic::new(field, format!("{bad} entries out of range, first is {x} >= {bound}"))
                .at(i.to_string()),
        );
    }
}

fn check_distribution<S: Scalar>(diags: &mut Vec<Diagnostic>, field: &str, index: Option<String>, v: &[S]) {
    let mut d = None;
    if v.iter().any(|x| !x.is_finite() || *x < S::zero()) {
        d = Some(Diagnostic::new(field, "entries must be finite and nonnegative"));
    } else {
        let s: f64 = v.iter().map(|x| x.to_f64_lossy()).sum();
        let tol = if S::epsilon().to_f64_lossy() > 1e-10 { 1e-5 } else { 1e-12 };
        if (s - 1.0).abs() > tol {
            d = Some(Diagnostic::new(field, format!("sums to {s}, expected 1")));
        }
    }
    if let Some(mut d) = d {
        d.index = index;
        diags.push(d);
    }
}

fn validate<S: Scalar>(spec: &ProblemSpec<S>) -> Vec<Diagnostic> {
    let mut diags = Vec::new();
    let t_len = spec.horizon;
    let k = spec.num_agents;
    if t_len == 0 {
        diags.push(Diagnostic::new("horizon", "must be at least 1"));
        return diags;
    }
    if k == 0 {
        diags.push(Diagnostic::new("num_agents", "must be at least 1"));
        return diags;
    }
    match spec.variant {
        Variant::FixedAction => {
            if k != 1 {
                diags.push(Diagnostic::new("variant", format!("fixed_action requires exactly one agent, got {k}")));
            }
            if spec.h0.is_none() {
                diags.push(Diagnostic::new("h0", "fixed_action requires a designer action strategy"));
            }
        }
        Variant::JointMessageAction => {
            if k != 1 {
                diags.push(Diagnostic::new("variant", format!("joint_message_action requires exactly one agent, got {k}")));
            }
            if spec.h0.is_some() {
                diags.push(Diagnostic::new("h0", "only allowed with the fixed_action variant"));
            }
        }
        Variant::MultiAgent => {
            if k < 2 {
                diags.push(Diagnostic::new("variant", format!("multi_agent requires at least two agents, got {k}")));
            }
            if spec.h0.is_some() {
                diags.push(Diagnostic::new("h0", "only allowed with the fixed_action variant"));
            }
        }
    }

    // Space shapes. Everything below indexes through them, so stop early on mismatch.
    let sp = &spec.spaces;
    let mut ok = check_len(&mut diags, "spaces.state", &sp.state, t_len);
    ok &= check_len(&mut diags, "spaces.designer_action", &sp.designer_action, t_len);
    ok &= check_len(&mut diags, "spaces.noise", &sp.noise, t_len);
    ok &= check_len(&mut diags, "spaces.increments", &sp.increments, t_len - 1);
    ok &= check_len(&mut diags, "spaces.agent_actions", &sp.agent_actions, k);
    ok &= check_len(&mut diags, "spaces.messages", &sp.messages, k);
    ok &= check_len(&mut diags, "spaces.private", &sp.private, k + 1);
    if ok {
        for i in 0..k {
            ok &= check_len(&mut diags, &format!("spaces.agent_actions[{i}]"), &sp.agent_actions[i], t_len);
            ok &= check_len(&mut diags, &format!("spaces.messages[{i}]"), &sp.messages[i], t_len);
        }
        for j in 0..=k {
            ok &= check_len(&mut diags, &format!("spaces.private[{j}]"), &sp.private[j], t_len);
        }
    }
    if !ok {
        return diags;
    }
    let all_sizes = sp.state.iter().chain(&sp.designer_action).chain(&sp.noise).chain(&sp.increments)
        .chain(sp.agent_actions.iter().flatten())
        .chain(sp.messages.iter().flatten())
        .chain(sp.private.iter().flatten());
    if all_sizes.clone().any(|s| *s == 0) {
        diags.push(Diagnostic::new("spaces", "every space needs at least one element (use size 1 for an empty set)"));
        return diags;
    }
    if all_sizes.map(|s| *s as f64).fold(0.0f64, f64::max) > 1e7 {
        diags.push(Diagnostic::new("spaces", "space too large"));
        return diags;
    }
    if let Some(names) = &spec.names {
        for (field, lists, sizes) in [("names.state", &names.state, &sp.state), ("names.designer_private", &names.designer_private, &sp.private[0])] {
            if lists.is_empty() {
                continue;
            }
            if check_len(&mut diags, field, lists, t_len) {
                for (t, l) in lists.iter().enumerate() {
                    if l.len() != sizes[t] {
                        diags.push(Diagnostic::new(field, format!("{} names for a space of size {}", l.len(), sizes[t])).at(t.to_string()));
                    } else {
                        let mut sorted = l.clone();
                        sorted.sort();
                        sorted.dedup();
                        if sorted.len() != l.len() {
                            diags.push(Diagnostic::new(field, "names must be unique").at(t.to_string()));
                        }
                    }
                }
            }
        }
    }

    // Distributions.
    if check_len(&mut diags, "noise", &spec.noise, t_len) {
        for t in 0..t_len {
            let name = format!("Q_{}", t + 1);
            if check_len(&mut diags, &name, &spec.noise[t], sp.noise[t]) {
                check_distribution(&mut diags, &name, None, &spec.noise[t]);
            }
        }
    }
    let init = &spec.initial;
    if check_len(&mut diags, "P_X1", &init.p_x1, sp.state[0]) {
        check_distribution(&mut diags, "P_X1", None, &init.p_x1);
    }
    if init.c1_size == 0 {
        diags.push(Diagnostic::new("c1_size", "must be at least 1"));
    } else {
        let p_all = spec.private_radix(0).len();
        let row = p_all * init.c1_size;
        if check_len(&mut diags, "Lambda", &init.lambda, sp.state[0] * sp.noise[0] * row) {
            let mut bad = Vec::new();
            for (r, chunk) in init.lambda.chunks(row).enumerate() {
                let mut tmp = Vec::new();
                check_distribution(&mut tmp, "Lambda", None, chunk);
                if !tmp.is_empty() {
                    bad.push(r);
                }
            }
            if let Some(r) = bad.first() {
                let (x, n) = (r / sp.noise[0], r % sp.noise[0]);
                diags.push(
                    Diagnostic::new("Lambda", format!("{} rows are not distributions, first at x={x}, n={n}", bad.len()))
                        .at(r.to_string()),
                );
            }
        }
    }

    // Transition tables for t < T.
    let steps = t_len - 1;
    let dyn_ok = check_len(&mut diags, "dynamics", &spec.dynamics, steps);
    let xi_ok = check_len(&mut diags, "xi", &spec.xi, steps);
    let zeta_ok = check_len(&mut diags, "zeta", &spec.zeta, steps);
    for t in 0..steps {
        let a = spec.action_radix(t).len();
        let n = sp.noise[t];
        let x = sp.state[t];
        if dyn_ok {
            let name = format!("f_{}", t + 1);
            if check_len(&mut diags, &name, &spec.dynamics[t], x * a * n) {
                check_range(&mut diags, &name, &spec.dynamics[t], sp.state[t + 1]);
            }
        }
        if xi_ok && check_len(&mut diags, &format!("xi[{t}]"), &spec.xi[t], k + 1) {
            for j in 0..=k {
                let name = format!("xi^{j}_{}", t + 2);
                let pj = sp.private[j][t];
                if check_len(&mut diags, &name, &spec.xi[t][j], x * pj * a * n) {
                    check_range(&mut diags, &name, &spec.xi[t][j], sp.private[j][t + 1]);
                }
            }
        }
        if zeta_ok {
            let name = format!("zeta_{}", t + 2);
            let b = spec.belief_radix(t).len();
            if check_len(&mut diags, &name, &spec.zeta[t], b * a * n) {
                check_range(&mut diags, &name, &spec.zeta[t], sp.increments[t]);
            }
        }
    }

    if check_len(&mut diags, "rewards", &spec.rewards, t_len) {
        for t in 0..t_len {
            let want = sp.state[t] * spec.action_radix(t).len();
            if check_len(&mut diags, &format!("rewards[{t}]"), &spec.rewards[t], k + 1) {
                for j in 0..=k {
                    let name = format!("r^{j}_{}", t + 1);
                    if check_len(&mut diags, &name, &spec.rewards[t][j], want)
                        && spec.rewards[t][j].iter().any(|v| !v.is_finite())
                    {
                        diags.push(Diagnostic::new(name, "entries must be finite"));
                    }
                }
            }
        }
    }

    let check_strategy = |diags: &mut Vec<Diagnostic>, name: &str, h: &TargetStrategy, size: &dyn Fn(usize) -> usize, bound: &dyn Fn(usize) -> usize| {
        if !check_len(diags, &format!("{name}.tables"), &h.tables, t_len) {
            return;
        }
        for t in 0..t_len {
            let field = format!("{name}_{}", t + 1);
            let tab = &h.tables[t];
            if check_len(diags, &field, &tab.default, size(t)) {
                check_range(diags, &field, &tab.default, bound(t));
            }
            for (key, v) in &tab.overrides {
                let f = format!("{field}[{key}]");
                if check_len(diags, &f, v, size(t)) {
                    check_range(diags, &f, v, bound(t));
                }
            }
        }
    };
    if check_len(&mut diags, "targets", &spec.targets, k) {
        for i in 0..k {
            let size = |t: usize| sp.messages[i][t] * sp.private[i + 1][t];
            let bound = |t: usize| sp.agent_actions[i][t];
            check_strategy(&mut diags, &format!("h^{}", i + 1), &spec.targets[i], &size, &bound);
        }
    }
    if let Some(h0) = &spec.h0 {
        let size = |t: usize| sp.private[0][t];
        let bound = |t: usize| sp.designer_action[t];
        check_strategy(&mut diags, "h^0", h0, &size, &bound);
    }
    diags
}

#[cfg(test)]
mod tests {
    use super::*;

    /// T=1, K=1, every space a singleton.
    pub(crate) fn minimal() -> ProblemSpec<f64> {
        ProblemSpec {
            horizon: 1,
            num_agents: 1,
            variant: Variant::JointMessageAction,
            spaces: Spaces {
                state: vec![1],
                designer_action: vec![1],
                agent_actions: vec![vec![1]],
                messages: vec![vec![1]],
                noise: vec![1],
                private: vec![vec![1], vec![1]],
                increments: vec![],
            },
            names: None,
            noise: vec![vec![1.0]],
            initial: Initial {
                p_x1: vec![1.0],
                lambda: vec![1.0],
                c1_size: 1,
            },
            dynamics: vec![],
            xi: vec![],
            zeta: vec![],
            rewards: vec![vec![vec![2.0], vec![1.0]]],
            targets: vec![TargetStrategy {
                belief_dependent: true,
                tables: vec![KeyedTable::constant(vec![0])],
            }],
            h0: None,
        }
    }

    #[test]
    fn minimal_is_valid() {
        assert_eq!(minimal().validate(), vec![]);
    }

    #[test]
    fn noise_normalization_names_q1() {
        let mut s = minimal();
        s.spaces.noise = vec![2];
        s.noise = vec![vec![0.5, 0.4]];
        s.initial.lambda = vec![1.0, 1.0];
        let d = s.validate();
        assert_eq!(d.len(), 1, "{d:?}");
        assert_eq!(d[0].field, "Q_1");
    }

    #[test]
    fn target_out_of_range() {
        let mut s = minimal();
        s.spaces.agent_actions = vec![vec![2]];
        s.rewards = vec![vec![vec![0.0, 0.0], vec![0.0, 0.0]]];
        s.targets[0].tables[0] = KeyedTable::constant(vec![5]);
        let d = s.validate();
        assert_eq!(d.len(), 1, "{d:?}");
        assert_eq!(d[0].field, "h^1_1");
    }

    #[test]
    fn fixed_action_needs_one_agent() {
        let mut s = minimal();
        s.num_agents = 2;
        s.variant = Variant::FixedAction;
        s.h0 = Some(TargetStrategy {
            belief_dependent: true,
            tables: vec![KeyedTable::constant(vec![0])],
        });
        s.spaces.agent_actions.push(vec![1]);
        s.spaces.messages.push(vec![1]);
        s.spaces.private.push(vec![1]);
        s.initial.lambda = vec![1.0];
        s.rewards = vec![vec![vec![0.0]; 3]];
        s.targets.push(s.targets[0].clone());
        let d = s.validate();
        assert_eq!(d.len(), 1, "{d:?}");
        assert_eq!(d[0].field, "variant");
    }

    #[test]
    fn override_lookup() {
        let mut t = KeyedTable::constant(vec![0, 1]);
        t.overrides.insert("k".into(), vec![1, 1]);
        assert_eq!(t.lookup("k"), &[1, 1]);
        assert_eq!(t.lookup("other"), &[0, 1]);
    }
}
