//! One PASS/FAIL line per acceptance criterion; exits nonzero on any FAIL.

use std::process::{Command, ExitCode};
use std::time::Instant;

use persuade_core::beliefs::{build_tree, check_assumption2};
use persuade_core::generate::{
    dominated_target, generate_congestion, private_action_leak, random_instance, random_lp, CongestionParams, Family,
    RandomParams,
};
use persuade_core::lp::vertex::enumerate_vertices;
use persuade_core::lp::{check_feasible, solve_lp, LpStatus, ToleranceConfig};
use persuade_core::model::{save_problem, Variant};
use persuade_core::solver::{assemble_node_lp, backward_induct, save_solution, NodeContext, SolveOptions, SolveStatus};
use persuade_core::verify::{brute_force_cisr, cisr_check, evaluate_profile, monte_carlo};
use persuade_core::{Error, Solution, Spec};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const VARIANTS: [Variant; 3] = [Variant::FixedAction, Variant::JointMessageAction, Variant::MultiAgent];
const BRUTE_FORCE_LIMIT: f64 = 65_536.0;

type Outcome = Result<String, String>;

fn persuade(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_persuade")).args(args).output().expect("run persuade")
}

fn solve(spec: &Spec, memoize: bool) -> Result<Solution, String> {
    backward_induct(spec, &SolveOptions { memoize, ..SolveOptions::default() }).map_err(|e| e.to_string())
}

fn suite(variant: Variant) -> impl Iterator<Item = (u64, Spec)> {
    (0..50u64).map(move |seed| {
        let family = if seed % 2 == 0 { Family::Revealing } else { Family::Blind };
        let mut p = RandomParams::new(variant, family);
        p.belief_overrides = seed % 3 == 0;
        (seed, random_instance(seed, &p))
    })
}

/// Per-vector masses of the published kernel, by number of agents told to
/// take the risky route.
fn by_count(masses: &[(u32, f64)], agents: u32) -> Vec<f64> {
    (0..1usize << agents)
        .map(|d| masses.iter().find(|(c, _)| *c == (d as u32).count_ones()).map_or(0.0, |m| m.1))
        .collect()
}

fn criterion_1() -> Outcome {
    let spec = generate_congestion(&CongestionParams::default()).map_err(|e| e.to_string())?;
    let start = Instant::now();
    let sol = solve(&spec, true)?;
    let secs = start.elapsed().as_secs_f64();
    if sol.stats.lp_solves != 3 || secs >= 60.0 {
        return Err(format!("{} LP solves in {secs:.1}s", sol.stats.lp_solves));
    }
    // Rows are indexed by the designer's private value (x at this step).
    let after_low = vec![by_count(&[(4, 0.0048)], 10), by_count(&[(8, 0.0222)], 10)];
    let after_high = vec![by_count(&[(5, 0.0039), (6, 0.0001)], 10), by_count(&[(9, 0.0557), (10, 0.4426)], 10)];
    let tree = build_tree(&spec, true).map_err(|e| e.to_string())?;
    let mut worst_gap: f64 = 0.0;
    let mut worst_renorm_gap: f64 = 0.0;
    let mut worst_residual: f64 = 0.0;
    let mut all_feasible = true;
    for t in 0..2 {
        let next = (t + 1 < 2).then(|| sol.value_table(t + 1));
        for (node, ns) in tree.levels[t].iter().zip(&sol.levels[t]) {
            let ctx = NodeContext::new(&spec, node, next.as_ref());
            let nlp = assemble_node_lp(&ctx, &ToleranceConfig::default()).map_err(|e| e.to_string())?;
            // At t=2 the node where the first state was θ² puts most weight there.
            let published = if t == 1 && node.belief[0] < 0.5 { &after_high } else { &after_low };
            let x = nlp.embed_kernel(published);
            let (ok, residual) = check_feasible(&nlp.lp, &x, 2e-2);
            all_feasible &= ok;
            worst_residual = worst_residual.max(residual);
            worst_gap = worst_gap.max((x[nlp.v_var()] - ns.v).abs());
            let renorm: Vec<Vec<f64>> = published
                .iter()
                .map(|r| {
                    let s: f64 = r.iter().sum();
                    r.iter().map(|v| v / s).collect()
                })
                .collect();
            let xr = nlp.embed_kernel(&renorm);
            worst_renorm_gap = worst_renorm_gap.max((xr[nlp.v_var()] - ns.v).abs());
        }
    }
    let detail = format!(
        "3 LP solves in {secs:.2}s, published kernel residual {worst_residual:.4}, objective gap {worst_gap:.4} \
         (rows renormalized: {worst_renorm_gap:.1e})"
    );
    if all_feasible && worst_gap <= 1e-2 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn criterion_2_and_3() -> (Outcome, Outcome) {
    let (mut solved, mut compared) = (0, 0);
    let mut problems = Vec::new();
    let mut worst_identity: f64 = 0.0;
    let mut identity_problems = Vec::new();
    for v in VARIANTS {
        for (seed, spec) in suite(v) {
            let sol = match solve(&spec, false) {
                Ok(s) if s.is_solved() => s,
                Ok(_) => continue,
                Err(e) => {
                    problems.push(format!("{v:?}/{seed}: {e}"));
                    continue;
                }
            };
            solved += 1;
            let dp = match cisr_check(&spec, &sol, 1e-6) {
                Ok(r) => r,
                Err(e) => {
                    problems.push(format!("{v:?}/{seed}: {e}"));
                    continue;
                }
            };
            if !dp.passes {
                problems.push(format!("{v:?}/{seed}: gain {:.2e}", dp.max_gain));
            }
            match brute_force_cisr(&spec, &sol, 1e-6, BRUTE_FORCE_LIMIT) {
                Ok(bf) => {
                    compared += 1;
                    if bf.passes != dp.passes {
                        problems.push(format!("{v:?}/{seed}: exhaustive check disagrees"));
                    }
                }
                Err(Error::TooLarge { .. }) => {}
                Err(e) => problems.push(format!("{v:?}/{seed}: {e}")),
            }
            match evaluate_profile(&spec, &sol, &spec.targets) {
                Ok(ev) => {
                    let mut gap = (ev.j[0] - sol.j0.unwrap_or(f64::NAN)).abs();
                    for (e, n) in ev.nodes.iter().zip(sol.nodes()) {
                        gap = gap.max((e.to_go[0] - n.v).abs());
                        for (a, b) in e.to_go[1..].iter().zip(&n.w) {
                            gap = gap.max((a - b).abs());
                        }
                    }
                    if !(gap <= 1e-8) {
                        identity_problems.push(format!("{v:?}/{seed}: {gap:.2e}"));
                    }
                    worst_identity = worst_identity.max(gap);
                }
                Err(e) => identity_problems.push(format!("{v:?}/{seed}: {e}")),
            }
        }
    }
    let c2 = if problems.is_empty() && solved > 0 {
        Ok(format!("{solved} of 150 solved, all pass; exhaustive check agrees on {compared}"))
    } else {
        Err(format!("{solved} solved; {}", problems.join(", ")))
    };
    let c3 = if identity_problems.is_empty() && solved > 0 {
        Ok(format!("max gap {worst_identity:.1e} over {solved} solutions"))
    } else {
        Err(identity_problems.join(", "))
    };
    (c2, c3)
}

fn criterion_4() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut solved = 0;
    for seed in 0..20u64 {
        let v = VARIANTS[seed as usize % 3];
        let mut p = RandomParams::new(v, if seed % 2 == 0 { Family::Revealing } else { Family::Blind });
        p.belief_overrides = true;
        let spec = random_instance(1000 + seed, &p);
        let (a, b) = (solve(&spec, true)?, solve(&spec, false)?);
        match (a.j0, b.j0) {
            (Some(x), Some(y)) => {
                solved += 1;
                worst = worst.max((x - y).abs());
            }
            (None, None) if a.status == b.status => {}
            _ => return Err(format!("seed {seed}: {:?} vs {:?}", a.status, b.status)),
        }
    }
    let detail = format!("max |ΔJ0| {worst:.1e} on {solved} solved of 20");
    if worst <= 1e-9 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn criterion_5() -> Outcome {
    let (mut checked, mut worst) = (0, f64::INFINITY);
    let mut seed = 2000u64;
    while checked < 20 && seed < 2400 {
        let spec = random_instance(seed, &RandomParams::new(Variant::FixedAction, Family::Revealing));
        seed += 1;
        let fixed = solve(&spec, false)?;
        let Some(jf) = fixed.j0 else { continue };
        let mut joint = spec.clone();
        joint.variant = Variant::JointMessageAction;
        joint.h0 = None;
        let jj = solve(&joint, false)?.j0.unwrap_or(f64::NEG_INFINITY);
        worst = worst.min(jj - jf);
        checked += 1;
    }
    let detail = format!("{checked} instances, min(joint - fixed) {worst:.2e}");
    if checked == 20 && worst >= -1e-7 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn criterion_6(dir: &std::path::Path) -> Outcome {
    let spec = dominated_target();
    let sol = solve(&spec, false)?;
    let want = SolveStatus::InfeasibleAt { time: 2, node_key: "0/1".into(), nodes: vec!["0/1".into()] };
    if sol.status != want {
        return Err(format!("{:?}", sol.status));
    }
    let p = dir.join("dominated.json");
    save_problem(&spec, &p).map_err(|e| e.to_string())?;
    let code = persuade(&["solve", "--problem", p.to_str().unwrap()]).status.code();
    if code == Some(2) {
        Ok("infeasible at t=2 node 0/1, exit code 2".into())
    } else {
        Err(format!("exit code {code:?}"))
    }
}

fn criterion_7(dir: &std::path::Path) -> Outcome {
    let spec = private_action_leak();
    let rep = check_assumption2(&spec, 5, 1e-9, 0);
    let p = dir.join("leak.json");
    save_problem(&spec, &p).map_err(|e| e.to_string())?;
    let refused = persuade(&["solve", "--problem", p.to_str().unwrap()]).status.code();
    let forced = persuade(&["solve", "--problem", p.to_str().unwrap(), "--force"]).status.code();
    let detail = format!(
        "deviation {:.3}, exit {} without --force, {} with",
        rep.max_deviation,
        refused.unwrap_or(-1),
        forced.unwrap_or(-1)
    );
    if !rep.passes && rep.max_deviation > 1e-6 && refused == Some(1) && forced == Some(0) {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn criterion_8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let tol = ToleranceConfig::default();
    let (mut counts, mut worst_obj, mut worst_gap) = ([0usize; 3], 0.0f64, 0.0f64);
    for k in 0..200 {
        let lp = random_lp(&mut rng);
        let oracle = enumerate_vertices(&lp, 1e7).ok_or(format!("lp {k}: oracle not applicable"))?;
        let got = solve_lp(&lp, &tol).map_err(|e| format!("lp {k}: {e}"))?;
        if got.status != oracle.status {
            return Err(format!("lp {k}: {:?} vs {:?}", got.status, oracle.status));
        }
        counts[got.status as usize] += 1;
        if got.status == LpStatus::Optimal {
            worst_obj = worst_obj.max((got.objective - oracle.objective).abs());
            worst_gap = worst_gap.max(got.duality_gap().unwrap_or(f64::INFINITY));
        }
    }
    let detail = format!(
        "{} optimal, {} infeasible, {} unbounded; objective error {worst_obj:.1e}, duality gap {worst_gap:.1e}",
        counts[0], counts[1], counts[2]
    );
    if worst_obj <= 1e-7 && worst_gap <= 1e-6 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn criterion_9(dir: &std::path::Path) -> Outcome {
    let spec = generate_congestion(&CongestionParams::default()).map_err(|e| e.to_string())?;
    let sol = solve(&spec, true)?;
    let j0 = sol.j0.ok_or("congestion not solved")?;
    let mc = monte_carlo(&spec, &sol, 100_000, 2024).map_err(|e| e.to_string())?;
    let z = (mc.mean[0] - j0).abs() / mc.std_error[0];
    let (p, s) = (dir.join("c.json"), dir.join("s.json"));
    save_problem(&spec, &p).map_err(|e| e.to_string())?;
    save_solution(&sol, &s, false).map_err(|e| e.to_string())?;
    let run = || {
        persuade(&["simulate", "--problem", p.to_str().unwrap(), "--solution", s.to_str().unwrap(), "--seed", "2024"]).stdout
    };
    let identical = run() == run();
    let detail = format!("mean {:.4} vs exact {j0:.4}, {z:.2} standard errors, repeat identical: {identical}", mc.mean[0]);
    if z <= 3.0 && identical {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn main() -> ExitCode {
    let dir = tempfile::tempdir().expect("temp dir");
    let (c2, c3) = criterion_2_and_3();
    let results = [
        ("congestion reproduction", criterion_1()),
        ("incentive soundness", c2),
        ("value identity", c3),
        ("memoization equivalence", criterion_4()),
        ("variant dominance", criterion_5()),
        ("infeasibility detection", criterion_6(dir.path())),
        ("belief independence gate", criterion_7(dir.path())),
        ("LP kernel correctness", criterion_8()),
        ("Monte Carlo consistency", criterion_9(dir.path())),
    ];
    let mut failed = 0;
    for (i, (name, outcome)) in results.iter().enumerate() {
        match outcome {
            Ok(d) => println!("criterion {} {name}: PASS ({d})", i + 1),
            Err(d) => {
                failed += 1;
                println!("criterion {} {name}: FAIL ({d})", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
