use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::beliefs::build_tree;
use crate::lp::LinearProgram;
use crate::model::{Initial, KeyedTable, ProblemSpec, Spaces, TargetStrategy, Variant};

/// Information structures whose beliefs cannot depend on strategies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// The increment reveals the whole current state, private information and actions.
    Revealing,
    /// A single increment value; the state and private information are
    /// redrawn each step from the noise.
    Blind,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RandomParams {
    pub variant: Variant,
    pub family: Family,
    /// Random in 1..=3 when absent.
    pub horizon: Option<usize>,
    /// Replace the obedient target at some beliefs by its mirror image.
    pub belief_overrides: bool,
    /// Upper bound on the number of unmemoized tree nodes.
    pub node_budget: usize,
}

impl RandomParams {
    pub fn new(variant: Variant, family: Family) -> Self {
        Self {
            variant,
            family,
            horizon: None,
            belief_overrides: false,
            node_budget: 400,
        }
    }
}

fn distribution(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..len).map(|_| rng.gen_range(0.05..1.0)).collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|v| v / s).collect()
}

fn reward(rng: &mut ChaCha8Rng) -> f64 {
    (rng.gen_range(-1000..=1000) as f64) / 1000.0
}

struct Dims {
    t_len: usize,
    x: usize,
    u0: usize,
    n: usize,
    c1: usize,
    private: Vec<usize>,
}

/// A small random instance with binary actions and messages.
pub fn random_instance(seed: u64, params: &RandomParams) -> ProblemSpec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = if params.variant == Variant::MultiAgent { 2 } else { 1 };
    let dims = loop {
        let t_len = params.horizon.unwrap_or_else(|| rng.gen_range(1..=3));
        let d = Dims {
            t_len,
            x: rng.gen_range(2..=3),
            u0: rng.gen_range(1..=2),
            n: rng.gen_range(1..=2),
            c1: rng.gen_range(1..=2),
            private: (0..=k).map(|_| rng.gen_range(1..=2)).collect(),
        };
        let b: usize = d.x * d.private.iter().product::<usize>();
        let a = d.u0 * (1 << k);
        let z = match params.family {
            Family::Revealing => b * a,
            Family::Blind => 1,
        };
        let mut level = d.c1;
        let mut total = level;
        for _ in 1..t_len {
            level *= z;
            total += level;
        }
        if total <= params.node_budget {
            break d;
        }
    };
    let Dims { t_len, x, u0, n, c1, ref private } = dims;
    let per_t = |v: usize| vec![v; t_len];
    let a_len = u0 * (1 << k);
    let p_all: usize = private.iter().product();
    let b_len = x * p_all;

    let mut dynamics = Vec::new();
    let mut xi = Vec::new();
    let mut zeta = Vec::new();
    for _ in 1..t_len {
        // Revealing: transitions may depend on everything. Blind: the next
        // state and private information are redrawn from the noise alone.
        let revealing = params.family == Family::Revealing;
        let cell = |xx: usize, pj: usize, psize: usize, a: usize, nn: usize| -> usize {
            if revealing {
                ((xx * psize + pj) * a_len + a) * n + nn
            } else {
                nn
            }
        };
        let f_base: Vec<usize> = (0..x * a_len * n).map(|_| rng.gen_range(0..x)).collect();
        let mut f = vec![0; x * a_len * n];
        for xx in 0..x {
            for a in 0..a_len {
                for nn in 0..n {
                    f[(xx * a_len + a) * n + nn] = f_base[cell(xx, 0, 1, a, nn)];
                }
            }
        }
        dynamics.push(f);
        let mut per_player = Vec::new();
        for &pj in private.iter() {
            let base: Vec<usize> = (0..x * pj * a_len * n).map(|_| rng.gen_range(0..pj)).collect();
            let mut table = vec![0; x * pj * a_len * n];
            for xx in 0..x {
                for pp in 0..pj {
                    for a in 0..a_len {
                        for nn in 0..n {
                            table[((xx * pj + pp) * a_len + a) * n + nn] = base[cell(xx, pp, pj, a, nn)];
                        }
                    }
                }
            }
            per_player.push(table);
        }
        xi.push(per_player);
        let mut z = vec![0; b_len * a_len * n];
        if params.family == Family::Revealing {
            for b in 0..b_len {
                for a in 0..a_len {
                    for nn in 0..n {
                        z[(b * a_len + a) * n + nn] = b * a_len + a;
                    }
                }
            }
        }
        zeta.push(z);
    }
    let increments = match params.family {
        Family::Revealing => vec![b_len * a_len; t_len - 1],
        Family::Blind => vec![1; t_len - 1],
    };

    let mut lambda = Vec::with_capacity(x * n * p_all * c1);
    for _ in 0..x * n {
        lambda.extend(distribution(&mut rng, p_all * c1));
    }
    let rewards: Vec<Vec<Vec<f64>>> = (0..t_len)
        .map(|_| (0..=k).map(|_| (0..x * a_len).map(|_| reward(&mut rng)).collect()).collect())
        .collect();
    let targets: Vec<TargetStrategy> = (0..k)
        .map(|i| TargetStrategy {
            belief_dependent: true,
            tables: (0..t_len)
                .map(|_| {
                    let pi = private[i + 1];
                    let table = (0..2 * pi)
                        .map(|cell| {
                            let m = cell / pi;
                            if rng.gen_bool(0.8) {
                                m
                            } else {
                                rng.gen_range(0..2)
                            }
                        })
                        .collect();
                    KeyedTable::constant(table)
                })
                .collect(),
        })
        .collect();
    let h0 = (params.variant == Variant::FixedAction).then(|| TargetStrategy {
        belief_dependent: true,
        tables: (0..t_len)
            .map(|_| KeyedTable::constant((0..private[0]).map(|_| rng.gen_range(0..u0)).collect()))
            .collect(),
    });
    let noise: Vec<Vec<f64>> = (0..t_len).map(|_| distribution(&mut rng, n)).collect();
    let mut spec = ProblemSpec {
        horizon: t_len,
        num_agents: k,
        variant: params.variant,
        spaces: Spaces {
            state: per_t(x),
            designer_action: per_t(u0),
            agent_actions: vec![per_t(2); k],
            messages: vec![per_t(2); k],
            noise: per_t(n),
            private: private.iter().map(|p| per_t(*p)).collect(),
            increments,
        },
        names: None,
        noise,
        initial: Initial {
            p_x1: distribution(&mut rng, x),
            lambda,
            c1_size: c1,
        },
        dynamics,
        xi,
        zeta,
        rewards,
        targets,
        h0,
    };

    if params.belief_overrides {
        if let Ok(tree) = build_tree(&spec, false) {
            for (t, level) in tree.levels.iter().enumerate() {
                let keys: BTreeSet<&str> = level.iter().map(|n| n.belief_key.as_str()).collect();
                for key in keys {
                    if rng.gen_bool(0.5) {
                        for h in spec.targets.iter_mut() {
                            let mirrored: Vec<usize> = h.tables[t].default.iter().map(|u| 1 - u).collect();
                            h.tables[t].overrides.insert(key.to_string(), mirrored);
                        }
                    }
                }
            }
        }
    }
    spec
}

const MAX_BASES: f64 = 3e5;

fn bases(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// A random LP with small integer data around a known feasible point.
/// Every variable is lower-bounded; some are also upper-bounded.

pub fn random_lp(rng: &mut impl Rng) -> LinearProgram<f64> {
    let n = rng.gen_range(1..=12);
    let m_eq = rng.gen_range(0..=n.min(6) - 1);
    let m_ge = rng.gen_range(0..=(20 - m_eq).min(10));
    let x0: Vec<f64> = (0..n).map(|_| rng.gen_range(0..=3) as f64).collect();
    let mut lp = LinearProgram::new(n);
    lp.objective = (0..n).map(|_| rng.gen_range(-5..=5) as f64).collect();
    fn row(rng: &mut impl Rng, n: usize) -> Vec<f64> {
        let mut r: Vec<f64> = (0..n).map(|_| rng.gen_range(-5..=5) as f64).collect();
        if r.iter().all(|v| *v == 0.0) {
            r[0] = 1.0;
        }
        r
    }
    for _ in 0..m_eq {
        let r = row(rng, n);
        let b = r.iter().zip(&x0).map(|(a, x)| a * x).sum();
        lp.add_eq(r, b);
    }
    for _ in 0..m_ge {
        let r = row(rng, n);
        let b: f64 = r.iter().zip(&x0).map(|(a, x)| a * x).sum::<f64>() - rng.gen_range(0..=2) as f64;
        lp.add_ge(r, b);
    }
    if m_ge > 0 && rng.gen_bool(0.1) {
        let i = rng.gen_range(0..m_ge);
        lp.ge_rhs[i] += 50.0;
    }
    for j in 0..n {
        if rng.gen_bool(0.2) {
            lp.lower[j] = Some(-(rng.gen_range(0..=2) as f64));
        }
        if rng.gen_bool(0.3) {
            lp.upper[j] = Some(x0[j] + rng.gen_range(0..=3) as f64);
        }
    }
    // Keep basis enumeration cheap enough to serve as an oracle.
    let uppers = lp.upper.iter().filter(|u| u.is_some()).count();
    while !lp.ge_rhs.is_empty() && bases(n + lp.ge_rhs.len() + uppers, n - m_eq) > MAX_BASES {
        lp.ge_matrix.pop();
        lp.ge_rhs.pop();
    }
    lp
}
