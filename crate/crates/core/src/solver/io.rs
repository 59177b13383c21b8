use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{DesignerSolution, NodeSolution, SolveStats, SolveStatus};
use crate::error::{Error, Result};
use crate::model::Variant;
use crate::scalar::Scalar;

#[derive(Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
struct NodeFile<S> {
    /// 1-based.
    time: usize,
    index: usize,
    node_key: String,
    belief_key: String,
    members: usize,
    kernel_cols: usize,
    /// Nonzero entries per p⁰ row as `[column, probability]`.
    kernel: Vec<Vec<(usize, S)>>,
    #[serde(rename = "W")]
    w: Vec<S>,
    #[serde(rename = "V")]
    v: S,
    #[serde(default)]
    symmetrized: bool,
}

#[derive(Serialize, Deserialize)]
struct StatsFile {
    lp_solves: usize,
    pivots: usize,
    symmetrized: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    wall_ms: Option<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum StatusFile {
    Solved,
    InfeasibleAt { time: usize, node_key: String, nodes: Vec<String> },
}

#[derive(Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
struct SolutionFile<S> {
    variant: Variant,
    memoized: bool,
    horizon: usize,
    status: StatusFile,
    #[serde(rename = "J0")]
    j0: Option<S>,
    stats: StatsFile,
    nodes: Vec<NodeFile<S>>,
}

/// Solution JSON; wall time is included only when `timing` is set.
pub fn solution_to_json<S: Scalar>(sol: &DesignerSolution<S>, timing: bool) -> Result<String> {
    let file = SolutionFile {
        variant: sol.variant,
        memoized: sol.memoized,
        horizon: sol.levels.len(),
        status: match &sol.status {
            SolveStatus::Solved => StatusFile::Solved,
            SolveStatus::InfeasibleAt { time, node_key, nodes } => StatusFile::InfeasibleAt {
                time: *time,
                node_key: node_key.clone(),
                nodes: nodes.clone(),
            },
        },
        j0: sol.j0,
        stats: StatsFile {
            lp_solves: sol.stats.lp_solves,
            pivots: sol.stats.pivots,
            symmetrized: sol.stats.symmetrized,
            wall_ms: if timing { sol.stats.wall_ms } else { None },
        },
        nodes: sol
            .nodes()
            .map(|n| NodeFile {
                time: n.time + 1,
                index: n.index,
                node_key: n.node_key.clone(),
                belief_key: n.belief_key.clone(),
                members: n.members,
                kernel_cols: n.kernel.first().map_or(0, |r| r.len()),
                kernel: n
                    .kernel
                    .iter()
                    .map(|row| row.iter().enumerate().filter(|(_, p)| **p != S::zero()).map(|(d, p)| (d, *p)).collect())
                    .collect(),
                w: n.w.clone(),
                v: n.v,
                symmetrized: n.symmetrized,
            })
            .collect(),
    };
    Ok(serde_json::to_string_pretty(&file)?)
}

pub fn parse_solution<S: Scalar>(text: &str) -> Result<DesignerSolution<S>> {
    let file: SolutionFile<S> = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let mut levels: Vec<Vec<NodeSolution<S>>> = vec![Vec::new(); file.horizon];
    for n in file.nodes {
        if n.time == 0 || n.time > file.horizon {
            return Err(Error::Parse(format!("node {} has time {} outside 1..={}", n.node_key, n.time, file.horizon)));
        }
        let mut kernel = vec![vec![S::zero(); n.kernel_cols]; n.kernel.len()];
        for (r, entries) in n.kernel.iter().enumerate() {
            for &(d, p) in entries {
                if d >= n.kernel_cols {
                    return Err(Error::Parse(format!("kernel column {d} out of range at node {}", n.node_key)));
                }
                kernel[r][d] = p;
            }
        }
        let level = &mut levels[n.time - 1];
        if n.index != level.len() {
            return Err(Error::Parse(format!("node {} is out of order", n.node_key)));
        }
        level.push(NodeSolution {
            time: n.time - 1,
            index: n.index,
            node_key: n.node_key,
            belief_key: n.belief_key,
            members: n.members,
            kernel,
            w: n.w,
            v: n.v,
            pivots: 0,
            symmetrized: n.symmetrized,
        });
    }
    Ok(DesignerSolution {
        variant: file.variant,
        memoized: file.memoized,
        status: match file.status {
            StatusFile::Solved => SolveStatus::Solved,
            StatusFile::InfeasibleAt { time, node_key, nodes } => SolveStatus::InfeasibleAt { time, node_key, nodes },
        },
        j0: file.j0,
        stats: SolveStats {
            lp_solves: file.stats.lp_solves,
            pivots: file.stats.pivots,
            symmetrized: file.stats.symmetrized,
            wall_ms: file.stats.wall_ms,
        },
        levels,
    })
}

pub fn load_solution<S: Scalar>(path: impl AsRef<Path>) -> Result<DesignerSolution<S>> {
    parse_solution(&std::fs::read_to_string(path)?)
}

pub fn save_solution<S: Scalar>(sol: &DesignerSolution<S>, path: impl AsRef<Path>, timing: bool) -> Result<()> {
    std::fs::write(path, solution_to_json(sol, timing)?)?;
    Ok(())
}
