use serde::{Deserialize, Serialize};

use crate::error::{Diagnostic, Error, Result};
use crate::model::{Initial, KeyedTable, Names, ProblemSpec, Spaces, TargetStrategy, Variant};

/// K agents pick a safe route (condition `a`) or a risky one whose condition
/// follows a two-state Markov chain over {θ¹, θ²}; only the designer sees it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CongestionParams {
    pub k: usize,
    pub horizon: usize,
    pub a: f64,
    pub theta1: f64,
    pub theta2: f64,
    /// P(X_1 = θ¹).
    pub p1: f64,
    /// P(θⁱ, θⁱ), the chance the risky route keeps its condition.
    pub rho: f64,
}

impl Default for CongestionParams {
    fn default() -> Self {
        Self {
            k: 10,
            horizon: 2,
            a: 1.5,
            theta1: 1.2,
            theta2: 2.8,
            p1: 0.5,
            rho: 0.9,
        }
    }
}

/// Largest K accepted (the kernel has 2^K columns per state).
pub const MAX_CONGESTION_AGENTS: usize = 16;

impl CongestionParams {
    pub fn validate(&self) -> Vec<Diagnostic> {
        let mut d = Vec::new();
        if self.k == 0 || self.k > MAX_CONGESTION_AGENTS {
            d.push(Diagnostic::new("k", format!("must be in 1..={MAX_CONGESTION_AGENTS}")));
        }
        if self.horizon == 0 {
            d.push(Diagnostic::new("t", "must be at least 1"));
        }
        if !(0.0..=1.0).contains(&self.p1) {
            d.push(Diagnostic::new("p1", "must be a probability"));
        }
        if !(0.0..=1.0).contains(&self.rho) {
            d.push(Diagnostic::new("rho", "must be a probability"));
        }
        if ![self.a, self.theta1, self.theta2].iter().all(|v| v.is_finite()) {
            d.push(Diagnostic::new("a", "route conditions must be finite"));
        }
        d
    }
}

/// Agent i's reward: route condition minus the fraction of agents sharing its route.
fn agent_reward(p: &CongestionParams, x: usize, actions: &[usize], i: usize) -> f64 {
    let k = p.k as f64;
    let ones = actions.iter().filter(|u| **u == 1).count() as f64;
    if actions[i] == 0 {
        p.a - (k - ones) / k
    } else {
        let theta = if x == 0 { p.theta1 } else { p.theta2 };
        theta - ones / k
    }
}

pub fn generate_congestion(p: &CongestionParams) -> Result<ProblemSpec<f64>> {
    let diags = p.validate();
    if !diags.is_empty() {
        return Err(Error::Validation(diags));
    }
    let (k, t_len) = (p.k, p.horizon);
    let a_len = 1usize << k;
    let per_t = |v: usize| vec![v; t_len];

    // Action profiles: agent 0 is the most significant bit.
    let profiles: Vec<Vec<usize>> = (0..a_len).map(|a| (0..k).map(|i| (a >> (k - 1 - i)) & 1).collect()).collect();
    let mut rewards_t = vec![vec![0.0; 2 * a_len]; k + 1];
    for x in 0..2 {
        for (a, u) in profiles.iter().enumerate() {
            let mut total = 0.0;
            for i in 0..k {
                let r = agent_reward(p, x, u, i);
                rewards_t[i + 1][x * a_len + a] = r;
                total += r;
            }
            rewards_t[0][x * a_len + a] = total;
        }
    }

    // Noise: n = 0 keeps the condition, n = 1 flips it.
    let next_x = |x: usize, n: usize| if n == 0 { x } else { 1 - x };
    let mut dynamics = Vec::new();
    let mut xi = Vec::new();
    let mut zeta = Vec::new();
    for _ in 0..t_len.saturating_sub(1) {
        let mut f = vec![0; 2 * a_len * 2];
        let mut xi0 = vec![0; 2 * 2 * a_len * 2];
        let mut z = vec![0; 4 * a_len * 2];
        for x in 0..2 {
            for a in 0..a_len {
                for n in 0..2 {
                    f[(x * a_len + a) * 2 + n] = next_x(x, n);
                    for p0 in 0..2 {
                        xi0[((x * 2 + p0) * a_len + a) * 2 + n] = next_x(x, n);
                        // b = (x, p⁰) with the agents' singleton digits trailing.
                        let b = x * 2 + p0;
                        z[(b * a_len + a) * 2 + n] = x * a_len + a;
                    }
                }
            }
        }
        let mut per_player = vec![xi0];
        per_player.extend((0..k).map(|_| vec![0; 2 * a_len * 2]));
        dynamics.push(f);
        xi.push(per_player);
        zeta.push(z);
    }

    // Λ(p⁰ = x | x, n) = 1, a single c_1.
    let mut lambda = vec![0.0; 2 * 2 * 2];
    for x in 0..2 {
        for n in 0..2 {
            lambda[(x * 2 + n) * 2 + x] = 1.0;
        }
    }
    let obedient = TargetStrategy {
        belief_dependent: true,
        tables: (0..t_len).map(|_| KeyedTable::constant(vec![0, 1])).collect(),
    };
    let labels = vec![vec![format!("{}", p.theta1), format!("{}", p.theta2)]; t_len];
    let spec = ProblemSpec {
        horizon: t_len,
        num_agents: k,
        variant: if k == 1 { Variant::JointMessageAction } else { Variant::MultiAgent },
        spaces: Spaces {
            state: per_t(2),
            designer_action: per_t(1),
            agent_actions: vec![per_t(2); k],
            messages: vec![per_t(2); k],
            noise: per_t(2),
            private: std::iter::once(per_t(2)).chain((0..k).map(|_| per_t(1))).collect(),
            increments: vec![2 * a_len; t_len - 1],
        },
        names: Some(Names {
            state: labels.clone(),
            designer_private: labels,
        }),
        noise: vec![vec![p.rho, 1.0 - p.rho]; t_len],
        initial: Initial {
            p_x1: vec![p.p1, 1.0 - p.p1],
            lambda,
            c1_size: 1,
        },
        dynamics,
        xi,
        zeta,
        rewards: vec![rewards_t; t_len],
        targets: vec![obedient; k],
        h0: None,
    };
    debug_assert!(spec.validate().is_empty());
    Ok(spec)
}
