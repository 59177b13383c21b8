use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use persuade_core::beliefs::{build_tree, check_assumption2, CommonTree};
use persuade_core::generate::{generate_congestion, random_instance, CongestionParams, Family, RandomParams};
use persuade_core::lp::{write_mps, ToleranceConfig};
use persuade_core::model::{load_problem, to_json, Variant};
use persuade_core::report::report;
use persuade_core::solver::{
    assemble_node_lp, backward_induct, load_solution, solution_to_json, NodeContext, SolveOptions, SolveStatus,
};
use persuade_core::verify::{brute_force_cisr, cisr_on_tree, evaluate_on_tree, monte_carlo_on_tree, tree_for, CisrReport};
use persuade_core::{Error, Result, Solution, Spec};
use serde_json::json;

use crate::{
    CheckArgs, Cli, Command, CongestionArgs, ExampleKind, FamilyArg, InspectArgs, RandomArgs, ReportArgs, SimulateArgs,
    SolveArgs, VariantArg, VerifyArgs,
};

const OK: u8 = 0;
const FAILED: u8 = 1;
const INFEASIBLE: u8 = 2;
const INTERNAL: u8 = 3;

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::NumericalBreakdown(_) => INTERNAL,
        _ => FAILED,
    }
}

fn print_error(e: &Error) {
    match e {
        Error::Validation(diags) => {
            eprintln!("error: invalid problem");
            for d in diags {
                eprintln!("  {d}");
            }
        }
        other => eprintln!("error: {other}"),
    }
}

pub fn run(cli: Cli) -> u8 {
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return INTERNAL;
        }
    }
    let result = match cli.command {
        Command::Solve(a) => solve(a),
        Command::Verify(a) => verify(a),
        Command::Simulate(a) => simulate(a),
        Command::Inspect(a) => inspect(a),
        Command::Example(a) => match a.kind {
            ExampleKind::Congestion(c) => congestion(c),
            ExampleKind::Random(r) => random(r),
        },
        Command::CheckAssumptions(a) => check(a),
        Command::Report(a) => show_report(a),
    };
    result.unwrap_or_else(|e| {
        print_error(&e);
        exit_code(&e)
    })
}

fn write_out(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn load_pair(problem: &PathBuf, solution: &PathBuf) -> Result<(Spec, Solution)> {
    Ok((load_problem(problem)?, load_solution(solution)?))
}

fn tolerances(feas: f64, cisr: f64) -> ToleranceConfig {
    ToleranceConfig {
        feasibility: feas,
        cisr_slack: cisr,
        ..ToleranceConfig::default()
    }
}

fn solve(a: SolveArgs) -> Result<u8> {
    let spec: Spec = load_problem(&a.problem)?;
    let opts = SolveOptions {
        memoize: a.memoize && !a.no_memoize,
        force: a.force,
        scan_all: a.scan_all,
        symmetrize: !a.no_symmetrize,
        tol: tolerances(a.tol_feas, a.tol_cisr),
        seed: a.seed,
        ..SolveOptions::default()
    };
    let sol = backward_induct(&spec, &opts)?;
    write_out(a.out.as_deref(), &solution_to_json(&sol, a.timing)?)?;
    Ok(match &sol.status {
        SolveStatus::Solved => {
            eprintln!(
                "solved: J0 = {:.9}, {} LP solves, {} pivots",
                sol.j0.unwrap_or(f64::NAN),
                sol.stats.lp_solves,
                sol.stats.pivots
            );
            OK
        }
        SolveStatus::InfeasibleAt { time, node_key, nodes } => {
            eprintln!("infeasible at t={time}, node {node_key}");
            for n in nodes.iter().skip(1) {
                eprintln!("also infeasible: {n}");
            }
            INFEASIBLE
        }
    })
}

fn gain_table(rep: &CisrReport, agents: usize) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{} check (tol {:.1e})", rep.method.replace('_', " "), rep.tol);
    let _ = writeln!(out, "agent  max gain     worst one-step deviation");
    for i in 0..agents {
        let gain = rep
            .nodes
            .iter()
            .filter(|n| n.agent == i + 1)
            .map(|n| n.gain)
            .fold(0.0, f64::max);
        let worst = match &rep.worst_by_agent[i] {
            Some(l) => format!(
                "t={} node {} m={} p={} u={} ({:+.3e})",
                l.time, l.node_key, l.message, l.private, l.deviation, l.gain
            ),
            None => "none".to_string(),
        };
        let verdict = if gain <= rep.tol { "PASS" } else { "FAIL" };
        let _ = writeln!(out, "{:<6} {:<12.3e} {worst}  {verdict}", i + 1, gain);
    }
    let _ = writeln!(out, "value mismatch: {:.3e}", rep.max_value_mismatch);
    out
}

fn verify(a: VerifyArgs) -> Result<u8> {
    let (spec, sol) = load_pair(&a.problem, &a.solution)?;
    let tree = tree_for(&spec, &sol)?;
    let rep = cisr_on_tree(&spec, &tree, &sol, a.tol)?;
    print!("{}", gain_table(&rep, spec.num_agents));
    let mut ok = rep.passes;
    let mut json = serde_json::Map::new();
    json.insert("cisr".into(), serde_json::to_value(&rep)?);
    if a.brute_force {
        match brute_force_cisr(&spec, &sol, a.tol, a.max_strategies) {
            Ok(bf) => {
                print!("{}", gain_table(&bf, spec.num_agents));
                if bf.passes != rep.passes {
                    println!("verdicts disagree");
                    ok = false;
                }
                ok &= bf.passes;
                json.insert("brute_force".into(), serde_json::to_value(&bf)?);
            }
            Err(e @ Error::TooLarge { .. }) => println!("brute force skipped: {e}"),
            Err(e) => return Err(e),
        }
    }
    if a.values {
        let ev = evaluate_on_tree(&spec, &tree, &sol, &spec.targets)?;
        let mut worst = (ev.j[0] - sol.j0.unwrap_or(f64::NAN)).abs();
        for (n, s) in ev.nodes.iter().zip(sol.nodes()) {
            worst = worst.max((n.to_go[0] - s.v).abs());
            for (e, w) in n.to_go[1..].iter().zip(&s.w) {
                worst = worst.max((e - w).abs());
            }
        }
        let pass = worst <= a.tol;
        println!(
            "exact evaluation: J = {:?}, max value gap {worst:.3e}  {}",
            ev.j,
            if pass { "PASS" } else { "FAIL" }
        );
        ok &= pass;
        json.insert("evaluation".into(), serde_json::to_value(&ev)?);
        json.insert("max_value_gap".into(), worst.into());
    }
    println!("overall: {}", if ok { "PASS" } else { "FAIL" });
    if let Some(p) = &a.out {
        std::fs::write(p, serde_json::to_string_pretty(&json)?)?;
    }
    Ok(if ok { OK } else { FAILED })
}

fn simulate(a: SimulateArgs) -> Result<u8> {
    let (spec, sol) = load_pair(&a.problem, &a.solution)?;
    let tree = tree_for(&spec, &sol)?;
    let rep = monte_carlo_on_tree(&spec, &tree, &sol, a.episodes.max(1), a.seed)?;
    let mut text = serde_json::to_string_pretty(&rep)?;
    text.push('\n');
    write_out(a.out.as_deref(), &text)?;
    Ok(OK)
}

fn inspect(a: InspectArgs) -> Result<u8> {
    let spec: Spec = load_problem(&a.problem)?;
    let sol: Option<Solution> = a.solution.as_ref().map(load_solution).transpose()?;
    let memoize = sol.as_ref().map_or(a.memoize, |s| s.memoized);
    let tree = build_tree(&spec, memoize)?;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "variant: {}\nhorizon: {}\nagents: {}",
        serde_json::to_value(spec.variant)?.as_str().unwrap_or("?"),
        spec.horizon,
        spec.num_agents
    );
    if a.json {
        println!("{}", serde_json::to_string_pretty(&tree_json(&spec, &tree))?);
        return Ok(OK);
    }
    let raw = tree.raw_level_counts();
    for (t, level) in tree.levels.iter().enumerate() {
        let kr = spec.kernel_radix(t);
        let _ = writeln!(
            out,
            "t={}: |X|={} |N|={} joint actions {} kernel {}x{}, {} node(s) from {} raw",
            t + 1,
            spec.spaces.state[t],
            spec.spaces.noise[t],
            spec.action_radix(t).len(),
            spec.spaces.private[0][t],
            kr.len(),
            level.len(),
            raw[t]
        );
    }
    print!("{out}");
    if let (Some(key), Some(path)) = (&a.node, &a.mps) {
        let node = tree
            .find(key)
            .ok_or_else(|| Error::UnknownNode(format!("no node {key} in the tree")))?;
        let next = if node.time + 1 < spec.horizon {
            let sol = sol
                .as_ref()
                .ok_or_else(|| Error::UnknownNode("a solution is needed for nodes before the last level".into()))?;
            sol.check_matches(&tree)?;
            if sol.levels[node.time + 1].is_empty() {
                return Err(Error::Unsolved(format!("level {} has no values", node.time + 2)));
            }
            Some(sol.value_table(node.time + 1))
        } else {
            None
        };
        let ctx = NodeContext::new(&spec, node, next.as_ref());
        let nlp = assemble_node_lp(&ctx, &tolerances(a.tol_feas, a.tol_cisr))?;
        std::fs::write(path, write_mps(&nlp.lp, &format!("NODE{}", node.index)))?;
        println!(
            "wrote {} ({} variables, {} constraints)",
            path.display(),
            nlp.lp.num_vars,
            nlp.lp.num_constraints()
        );
    }
    Ok(OK)
}

/// Nodes by level; nodes sharing a belief share a class id.
fn tree_json(spec: &Spec, tree: &CommonTree<f64>) -> serde_json::Value {
    let levels: Vec<serde_json::Value> = tree
        .levels
        .iter()
        .enumerate()
        .map(|(t, level)| {
            let radix = spec.belief_radix(t);
            let mut classes: HashMap<&str, usize> = HashMap::new();
            let nodes: Vec<serde_json::Value> = level
                .iter()
                .map(|n| {
                    let next = classes.len();
                    let class = *classes.entry(n.belief_key.as_str()).or_insert(next);
                    let support: Vec<serde_json::Value> = n
                        .belief
                        .iter()
                        .enumerate()
                        .filter(|(_, p)| **p > 0.0)
                        .map(|(b, p)| {
                            let digits = radix.decode(b);
                            json!({ "state": digits[0], "private": digits[1..], "prob": p })
                        })
                        .collect();
                    json!({
                        "node_key": n.node_key,
                        "path": n.path,
                        "belief_key": n.belief_key,
                        "class": class,
                        "members": n.members.len(),
                        "support": support,
                    })
                })
                .collect();
            json!({ "time": t + 1, "nodes": nodes })
        })
        .collect();
    json!({ "memoized": tree.memoized, "levels": levels })
}

fn congestion(c: CongestionArgs) -> Result<u8> {
    let params = CongestionParams {
        k: c.k,
        horizon: c.t,
        a: c.a,
        theta1: c.theta1,
        theta2: c.theta2,
        p1: c.p1,
        rho: c.rho,
    };
    let spec = generate_congestion(&params)?;
    write_out(c.out.as_deref(), &to_json(&spec)?)?;
    Ok(OK)
}

fn random(r: RandomArgs) -> Result<u8> {
    let variant = match r.variant {
        VariantArg::FixedAction => Variant::FixedAction,
        VariantArg::JointMessageAction => Variant::JointMessageAction,
        VariantArg::MultiAgent => Variant::MultiAgent,
    };
    let family = match r.family {
        FamilyArg::Revealing => Family::Revealing,
        FamilyArg::Blind => Family::Blind,
    };
    let mut params = RandomParams::new(variant, family);
    params.horizon = r.horizon;
    params.belief_overrides = r.overrides;
    let spec = random_instance(r.seed, &params);
    write_out(r.out.as_deref(), &to_json(&spec)?)?;
    Ok(OK)
}

fn check(a: CheckArgs) -> Result<u8> {
    let spec: Spec = load_problem(&a.problem)?;
    let rep = check_assumption2(&spec, a.trials, a.tol, a.seed);
    println!("{}", serde_json::to_string_pretty(&rep)?);
    Ok(if rep.passes { OK } else { FAILED })
}

fn show_report(a: ReportArgs) -> Result<u8> {
    let (spec, sol) = load_pair(&a.problem, &a.solution)?;
    print!("{}", report(&spec, &sol));
    Ok(OK)
}
