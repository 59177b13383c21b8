use persuade_core::beliefs::build_tree;
use persuade_core::generate::{dominated_target, generate_congestion, private_action_leak, static_persuasion, CongestionParams};
use persuade_core::lp::ToleranceConfig;
use persuade_core::model::{parse_problem, to_json};
use persuade_core::solver::{
    assemble_cisr_inequalities, assemble_eta_constraints, backward_induct, parse_solution, solution_to_json, NodeContext,
    SolveOptions, SolveStatus,
};
use persuade_core::{Error, Spec32};

#[test]
fn static_persuasion_value() {
    for (prior, want) in [(0.3, 0.6), (0.1, 0.2), (0.5, 1.0), (0.7, 1.0)] {
        let sol = backward_induct(&static_persuasion(prior), &SolveOptions::default()).unwrap();
        assert!(sol.is_solved());
        assert!((sol.j0.unwrap() - want).abs() < 1e-9, "prior {prior}: {:?}", sol.j0);
        assert_eq!(sol.stats.lp_solves, 1);
    }
}

#[test]
fn static_persuasion_kernel() {
    // Always recommend 1 in state 1; recommend it in state 0 just often
    // enough to leave the agent indifferent.
    let sol = backward_induct(&static_persuasion(0.3), &SolveOptions::default()).unwrap();
    let g = &sol.levels[0][0].kernel;
    assert!((g[0][1] - 3.0 / 7.0).abs() < 1e-9, "{g:?}");
    assert!((g[1][1] - 1.0).abs() < 1e-9, "{g:?}");
    assert!(sol.levels[0][0].w[0] >= 0.7 - 1e-9);
}

#[test]
fn single_precision_solve() {
    let spec: Spec32 = parse_problem(&to_json(&static_persuasion(0.3)).unwrap()).unwrap();
    let opts = SolveOptions {
        tol: ToleranceConfig::for_scalar::<f32>(),
        ..SolveOptions::default()
    };
    let sol = backward_induct(&spec, &opts).unwrap();
    assert!((sol.j0.unwrap() - 0.6).abs() < 1e-4);
}

#[test]
fn dominated_target_is_infeasible_at_its_node() {
    let sol = backward_induct(&dominated_target(), &SolveOptions::default()).unwrap();
    assert_eq!(
        sol.status,
        SolveStatus::InfeasibleAt {
            time: 2,
            node_key: "0/1".into(),
            nodes: vec!["0/1".into()]
        }
    );
    assert!(sol.j0.is_none());
    assert!(sol.levels[0].is_empty());
    let scan = backward_induct(&dominated_target(), &SolveOptions { scan_all: true, ..SolveOptions::default() }).unwrap();
    assert_eq!(scan.status, sol.status);
}

#[test]
fn refuses_strategy_dependent_beliefs() {
    let spec = private_action_leak();
    match backward_induct(&spec, &SolveOptions::default()) {
        Err(Error::AssumptionViolation { deviation, .. }) => assert!(deviation > 1e-6),
        other => panic!("{other:?}"),
    }
    let forced = backward_induct(&spec, &SolveOptions { force: true, ..SolveOptions::default() }).unwrap();
    assert!(forced.is_solved());
    assert_eq!(forced.stats.lp_solves, 2);
}

#[test]
fn incentive_row_count() {
    // One row per agent, message, private value and non-target action.
    let spec = static_persuasion(0.3);
    let tree = build_tree(&spec, false).unwrap();
    let ctx = NodeContext::new(&spec, &tree.levels[0][0], None);
    let eta = assemble_eta_constraints(&ctx);
    assert_eq!(assemble_cisr_inequalities(&ctx, &eta).unwrap().len(), 2);

    let spec = generate_congestion(&CongestionParams::default()).unwrap();
    let tree = build_tree(&spec, true).unwrap();
    let ctx = NodeContext::new(&spec, &tree.levels[1][0], None);
    let eta = assemble_eta_constraints(&ctx);
    assert_eq!(assemble_cisr_inequalities(&ctx, &eta).unwrap().len(), 10 * 2);
}

#[test]
fn congestion_solves_with_three_programs() {
    let spec = generate_congestion(&CongestionParams::default()).unwrap();
    let sol = backward_induct(&spec, &SolveOptions { memoize: true, ..SolveOptions::default() }).unwrap();
    assert!(sol.is_solved());
    assert_eq!(sol.stats.lp_solves, 3);
    assert!((sol.j0.unwrap() - 27.05).abs() < 1e-6, "{:?}", sol.j0);
    let again = backward_induct(&spec, &SolveOptions { memoize: true, ..SolveOptions::default() }).unwrap();
    assert_eq!(solution_to_json(&sol, false).unwrap(), solution_to_json(&again, false).unwrap());
}

#[test]
fn solution_json_round_trip() {
    let sol = backward_induct(&static_persuasion(0.3), &SolveOptions::default()).unwrap();
    let text = solution_to_json(&sol, false).unwrap();
    let back = parse_solution::<f64>(&text).unwrap();
    assert_eq!(solution_to_json(&back, false).unwrap(), text);
    assert_eq!(back.j0, sol.j0);
}
