//! Small hand-built instances with known answers.

use crate::model::{Initial, KeyedTable, ProblemSpec, Spaces, TargetStrategy, Variant};

fn obedience(t_len: usize, p: usize) -> TargetStrategy {
    TargetStrategy {
        belief_dependent: true,
        tables: (0..t_len)
            .map(|_| KeyedTable::constant((0..2 * p).map(|cell| cell / p).collect()))
            .collect(),
    }
}

fn constant_target(values: Vec<Vec<usize>>) -> TargetStrategy {
    TargetStrategy {
        belief_dependent: true,
        tables: values.into_iter().map(KeyedTable::constant).collect(),
    }
}

/// One-shot persuasion: the state is 1 with probability `prior`, the
/// designer knows it, the agent is paid 1 for matching it and the designer
/// is paid 1 whenever the agent plays 1. The optimum is min(1, 2·prior).
pub fn static_persuasion(prior: f64) -> ProblemSpec<f64> {
    ProblemSpec {
        horizon: 1,
        num_agents: 1,
        variant: Variant::JointMessageAction,
        spaces: Spaces {
            state: vec![2],
            designer_action: vec![1],
            agent_actions: vec![vec![2]],
            messages: vec![vec![2]],
            noise: vec![1],
            private: vec![vec![2], vec![1]],
            increments: vec![],
        },
        names: None,
        noise: vec![vec![1.0]],
        initial: Initial {
            p_x1: vec![1.0 - prior, prior],
            // p⁰ = x
            lambda: vec![1.0, 0.0, 0.0, 1.0],
            c1_size: 1,
        },
        dynamics: vec![],
        xi: vec![],
        zeta: vec![],
        // r[x·A + a], a = u¹ since |U⁰| = 1
        rewards: vec![vec![vec![0.0, 1.0, 0.0, 1.0], vec![1.0, 0.0, 0.0, 1.0]]],
        targets: vec![obedience(1, 1)],
        h0: None,
    }
}

/// Two periods; the state is drawn once and revealed after the first. The
/// agent has a single message and is asked to play 1 throughout, which is
/// strictly dominated at the second-period node where the state is 1
/// (node key `0/1`).
pub fn dominated_target() -> ProblemSpec<f64> {
    ProblemSpec {
        horizon: 2,
        num_agents: 1,
        variant: Variant::JointMessageAction,
        spaces: Spaces {
            state: vec![2, 2],
            designer_action: vec![1, 1],
            agent_actions: vec![vec![2, 2]],
            messages: vec![vec![1, 1]],
            noise: vec![1, 1],
            private: vec![vec![1, 1], vec![1, 1]],
            increments: vec![2],
        },
        names: None,
        noise: vec![vec![1.0], vec![1.0]],
        initial: Initial {
            p_x1: vec![0.5, 0.5],
            lambda: vec![1.0, 1.0],
            c1_size: 1,
        },
        // x stays put and is revealed: z = x.
        dynamics: vec![vec![0, 0, 1, 1]],
        xi: vec![vec![vec![0; 4], vec![0; 4]]],
        zeta: vec![vec![0, 0, 1, 1]],
        rewards: vec![
            vec![vec![0.0; 4], vec![0.0; 4]],
            // Agent: u = 1 pays 1 when x = 0, u = 0 pays 1 when x = 1.
            vec![vec![0.0, 1.0, 0.0, 1.0], vec![0.0, 1.0, 1.0, 0.0]],
        ],
        targets: vec![constant_target(vec![vec![1], vec![1]])],
        h0: None,
    }
}

/// The next state and the agent's next private information both equal the
/// agent's action, and nothing is made public, so second-period beliefs
/// depend on how the agent plays. At the second step the agent is asked to
/// act on its own private value.
pub fn private_action_leak() -> ProblemSpec<f64> {
    // a = u¹ (|U⁰| = 1), N = 1: f(x, a, n) = a, ξ¹ = a, ξ⁰ = 0, ζ = 0.
    ProblemSpec {
        horizon: 2,
        num_agents: 1,
        variant: Variant::JointMessageAction,
        spaces: Spaces {
            state: vec![2, 2],
            designer_action: vec![1, 1],
            agent_actions: vec![vec![2, 2]],
            messages: vec![vec![2, 2]],
            noise: vec![1, 1],
            private: vec![vec![1, 1], vec![1, 2]],
            increments: vec![1],
        },
        names: None,
        noise: vec![vec![1.0], vec![1.0]],
        initial: Initial {
            p_x1: vec![0.5, 0.5],
            lambda: vec![1.0, 1.0],
            c1_size: 1,
        },
        dynamics: vec![vec![0, 1, 0, 1]],
        xi: vec![vec![vec![0; 4], vec![0, 1, 0, 1]]],
        zeta: vec![vec![0; 4]],
        rewards: vec![
            vec![vec![0.0, 1.0, 0.0, 1.0], vec![1.0, 0.0, 0.0, 1.0]],
            vec![vec![0.0, 1.0, 0.0, 1.0], vec![1.0, 0.0, 0.0, 1.0]],
        ],
        targets: vec![TargetStrategy {
            belief_dependent: true,
            tables: vec![KeyedTable::constant(vec![0, 1]), KeyedTable::constant(vec![0, 1, 0, 1])],
        }],
        h0: None,
    }
}
