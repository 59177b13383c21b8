//! Human-readable summaries of a solution.

use std::fmt::Write;

use crate::model::ProblemSpec;
use crate::scalar::Scalar;
use crate::solver::{message_orbits, DesignerSolution, NodeSolution, SolveStatus};

/// Entries below this are omitted from printed kernels.
const SHOW_FLOOR: f64 = 1e-12;
/// Grouped entries must agree this closely for a compressed view.
const GROUP_TOL: f64 = 1e-9;

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn multinomial(counts: &[usize]) -> f64 {
    let mut left: usize = counts.iter().sum();
    let mut out = 1.0;
    for &c in counts {
        out *= binomial(left, c);
        left -= c;
    }
    out
}

fn p0_label<S: Scalar>(spec: &ProblemSpec<S>, t: usize, p0: usize) -> String {
    match spec.designer_private_space(t).element_names {
        Some(names) => format!("p0={}", names[p0]),
        None => format!("p0={p0}"),
    }
}

/// Compressed rows keyed by message counts, when every group of the kernel
/// is constant.
fn compressed<S: Scalar>(spec: &ProblemSpec<S>, node: &NodeSolution<S>) -> Option<Vec<String>> {
    let mut orbits = message_orbits(spec, node.time)?;
    // Fewest agents on the higher messages first.
    orbits.sort_by(|(a, _), (b, _)| (a[0], a[1..].iter().rev().collect::<Vec<_>>()).cmp(&(b[0], b[1..].iter().rev().collect())));
    let binary = spec.spaces.messages.iter().all(|m| m[node.time] == 2);
    let mut lines = Vec::new();
    for (p0, row) in node.kernel.iter().enumerate() {
        for (key, cols) in &orbits {
            let first = row[cols[0]].to_f64_lossy();
            if cols.iter().any(|&d| (row[d].to_f64_lossy() - first).abs() > GROUP_TOL) {
                return None;
            }
            if first <= SHOW_FLOOR {
                continue;
            }
            let counts = &key[1..];
            let group = if binary {
                format!("Σ={}", counts[1])
            } else {
                format!("counts={counts:?}")
            };
            let u0 = if spec.fixed_action() || spec.spaces.designer_action[node.time] == 1 {
                String::new()
            } else {
                format!(" u0={}", key[0])
            };
            let vectors = multinomial(counts);
            lines.push(format!(
                "  {}:{u0} {group}, mass/vector {first:.6}, vectors {vectors}, count mass {:.6}",
                p0_label(spec, node.time, p0),
                first * vectors
            ));
        }
    }
    Some(lines)
}

fn full<S: Scalar>(spec: &ProblemSpec<S>, node: &NodeSolution<S>) -> Vec<String> {
    let kr = spec.kernel_radix(node.time);
    let k = spec.num_agents;
    let mut lines = Vec::new();
    for (p0, row) in node.kernel.iter().enumerate() {
        let entries: Vec<String> = row
            .iter()
            .enumerate()
            .filter(|(_, g)| g.to_f64_lossy() > SHOW_FLOOR)
            .map(|(d, g)| {
                let digits = kr.decode(d);
                let m: Vec<String> = digits[..k].iter().map(|v| v.to_string()).collect();
                let u0 = if spec.fixed_action() {
                    String::new()
                } else {
                    format!(" u0={}", digits[k])
                };
                format!("m=({}){u0}: {:.6}", m.join(","), g.to_f64_lossy())
            })
            .collect();
        lines.push(format!("  {}: {}", p0_label(spec, node.time, p0), entries.join("; ")));
    }
    lines
}

pub fn report<S: Scalar>(spec: &ProblemSpec<S>, sol: &DesignerSolution<S>) -> String {
    let mut out = String::new();
    match &sol.status {
        SolveStatus::Solved => {
            let _ = writeln!(out, "status: solved");
        }
        SolveStatus::InfeasibleAt { time, node_key, nodes } => {
            let _ = writeln!(out, "status: infeasible at t={time}, node {node_key}");
            if nodes.len() > 1 {
                let _ = writeln!(out, "infeasible nodes at that level: {}", nodes.join(" "));
            }
        }
    }
    if let Some(j0) = sol.j0 {
        let _ = writeln!(out, "J0 = {:.9}", j0.to_f64_lossy());
    }
    let per_level: Vec<String> = sol
        .levels
        .iter()
        .enumerate()
        .map(|(t, l)| format!("t={}: {}", t + 1, l.len()))
        .collect();
    let _ = writeln!(
        out,
        "LP solves: {} ({}); pivots: {}; symmetrized: {}; memoized: {}",
        sol.stats.lp_solves,
        per_level.join(", "),
        sol.stats.pivots,
        sol.stats.symmetrized,
        if sol.memoized { "yes" } else { "no" }
    );
    for node in sol.nodes() {
        let w: Vec<String> = node.w.iter().map(|v| format!("{:.6}", v.to_f64_lossy())).collect();
        let _ = writeln!(
            out,
            "\nt={} node {} (belief {}, {} member{})\n  V = {:.6}  W = [{}]",
            node.time + 1,
            node.node_key,
            node.belief_key,
            node.members,
            if node.members == 1 { "" } else { "s" },
            node.v.to_f64_lossy(),
            w.join(", ")
        );
        let lines = compressed(spec, node).unwrap_or_else(|| full(spec, node));
        for l in lines {
            let _ = writeln!(out, "{l}");
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counting() {
        assert_eq!(binomial(10, 4), 210.0);
        assert_eq!(binomial(10, 0), 1.0);
        assert_eq!(multinomial(&[6, 4]), 210.0);
        assert_eq!(multinomial(&[1, 1, 1]), 6.0);
    }
}
