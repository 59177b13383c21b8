use persuade_core::generate::{generate_congestion, random_instance, static_persuasion, CongestionParams, Family, RandomParams};
use persuade_core::model::Variant;
use persuade_core::solver::{backward_induct, SolveOptions};
use persuade_core::verify::{brute_force_cisr, cisr_check, evaluate_profile, monte_carlo};
use persuade_core::Error;

#[test]
fn optimal_static_kernel_has_no_profitable_deviation() {
    let spec = static_persuasion(0.3);
    let sol = backward_induct(&spec, &SolveOptions::default()).unwrap();
    let rep = cisr_check(&spec, &sol, 1e-9).unwrap();
    assert!(rep.passes);
    assert!(rep.max_gain <= 1e-12, "{rep:?}");
    let bf = brute_force_cisr(&spec, &sol, 1e-9, 1e3).unwrap();
    assert!(bf.passes);
    assert_eq!(bf.strategies, Some(4.0));
}

#[test]
fn perturbed_kernel_fails() {
    let spec = static_persuasion(0.3);
    let mut sol = backward_induct(&spec, &SolveOptions::default()).unwrap();
    // Recommend 1 more often in state 0: the recommendation stops being credible.
    let row = &mut sol.levels[0][0].kernel[0];
    row[0] -= 0.2;
    row[1] += 0.2;
    let rep = cisr_check(&spec, &sol, 1e-6).unwrap();
    assert!(!rep.passes);
    let worst = rep.worst.as_ref().unwrap();
    assert_eq!((worst.message, worst.deviation), (1, 0));
    assert!(!brute_force_cisr(&spec, &sol, 1e-6, 1e3).unwrap().passes);
}

#[test]
fn exhaustive_and_dynamic_checks_agree() {
    let mut compared = 0;
    for v in [Variant::FixedAction, Variant::JointMessageAction, Variant::MultiAgent] {
        for seed in 0..12 {
            let family = if seed % 2 == 0 { Family::Revealing } else { Family::Blind };
            let spec = random_instance(seed, &RandomParams::new(v, family));
            let sol = backward_induct(&spec, &SolveOptions::default()).unwrap();
            if !sol.is_solved() {
                continue;
            }
            let dp = cisr_check(&spec, &sol, 1e-6).unwrap();
            assert!(dp.passes, "{v:?} {seed}");
            match brute_force_cisr(&spec, &sol, 1e-6, 4096.0) {
                Ok(bf) => {
                    assert_eq!(bf.passes, dp.passes);
                    assert!((bf.max_gain - dp.max_gain).abs() <= 1e-9);
                    compared += 1;
                }
                Err(Error::TooLarge { .. }) => {}
                Err(e) => panic!("{e}"),
            }
        }
    }
    assert!(compared >= 10, "{compared}");
}

#[test]
fn exact_evaluation_matches_values() {
    for seed in 0..10 {
        let spec = random_instance(seed, &RandomParams::new(Variant::MultiAgent, Family::Revealing));
        let sol = backward_induct(&spec, &SolveOptions::default()).unwrap();
        if !sol.is_solved() {
            continue;
        }
        let ev = evaluate_profile(&spec, &sol, &spec.targets).unwrap();
        assert!((ev.j[0] - sol.j0.unwrap()).abs() <= 1e-8);
        for (e, n) in ev.nodes.iter().zip(sol.nodes()) {
            assert_eq!(e.node_key, n.node_key);
            assert!((e.to_go[0] - n.v).abs() <= 1e-8);
            for (a, b) in e.to_go[1..].iter().zip(&n.w) {
                assert!((a - b).abs() <= 1e-8);
            }
        }
    }
}

#[test]
fn monte_carlo_is_reproducible_and_converges() {
    let spec = generate_congestion(&CongestionParams::default()).unwrap();
    let sol = backward_induct(&spec, &SolveOptions { memoize: true, ..SolveOptions::default() }).unwrap();
    let a = monte_carlo(&spec, &sol, 20_000, 3).unwrap();
    let b = monte_carlo(&spec, &sol, 20_000, 3).unwrap();
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    assert!((a.mean[0] - sol.j0.unwrap()).abs() <= 4.0 * a.std_error[0]);
    let big = monte_carlo(&spec, &sol, 80_000, 3).unwrap();
    let ratio = big.std_error[0] / a.std_error[0];
    assert!((0.4..0.6).contains(&ratio), "{ratio}");
}

#[test]
fn unsolved_solutions_are_rejected() {
    let spec = persuade_core::generate::dominated_target();
    let sol = backward_induct(&spec, &SolveOptions::default()).unwrap();
    assert!(matches!(cisr_check(&spec, &sol, 1e-6), Err(Error::Unsolved(_))));
}
