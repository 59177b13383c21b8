use persuade_core::generate::random_lp;
use persuade_core::lp::vertex::enumerate_vertices;
use persuade_core::lp::{check_feasible, solve_lp, LinearProgram, LpStatus, ToleranceConfig};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn lps(seed: u64, count: usize) -> Vec<LinearProgram<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| random_lp(&mut rng)).collect()
}

#[test]
fn simplex_matches_vertex_enumeration() {
    let tol = ToleranceConfig::default();
    let mut seen = [0usize; 3];
    for (k, lp) in lps(11, 200).iter().enumerate() {
        let oracle = enumerate_vertices(lp, 1e7).expect("oracle applicable");
        let got = solve_lp(lp, &tol).unwrap();
        assert_eq!(got.status, oracle.status, "lp {k}");
        seen[got.status as usize] += 1;
        if got.status == LpStatus::Optimal {
            assert!((got.objective - oracle.objective).abs() <= 1e-7, "lp {k}: {} vs {}", got.objective, oracle.objective);
            assert!(got.duality_gap().unwrap() <= 1e-6, "lp {k}");
            assert!(check_feasible(lp, &got.primal, 1e-7).0, "lp {k}");
            let dual = got.dual.as_ref().unwrap();
            assert!(dual.infeasibility(lp) <= 1e-7, "lp {k}");
            assert!(dual.complementarity(lp, &got.primal) <= 1e-6, "lp {k}");
        }
    }
    // The generator must exercise every outcome.
    assert!(seen.iter().all(|&c| c > 0), "{seen:?}");
}

#[test]
fn free_variables_and_infeasibility() {
    // max x - y, x + y = 1, x - y <= 3, x,y free
    let mut lp = LinearProgram::<f64>::new(2);
    lp.objective = vec![1.0, -1.0];
    lp.set_free(0);
    lp.set_free(1);
    lp.add_eq(vec![1.0, 1.0], 1.0);
    lp.add_le(vec![1.0, -1.0], 3.0);
    let s = solve_lp(&lp, &ToleranceConfig::default()).unwrap();
    assert_eq!(s.status, LpStatus::Optimal);
    assert!((s.objective - 3.0).abs() < 1e-12);
    assert!((s.primal[0] - 2.0).abs() < 1e-12);

    lp.add_ge(vec![1.0, 1.0], 2.0);
    assert_eq!(solve_lp(&lp, &ToleranceConfig::default()).unwrap().status, LpStatus::Infeasible);
}

#[test]
fn solves_are_deterministic() {
    let tol = ToleranceConfig::default();
    for lp in lps(3, 40) {
        let a = serde_json::to_string(&solve_lp(&lp, &tol).unwrap()).unwrap();
        assert_eq!(a, serde_json::to_string(&solve_lp(&lp, &tol).unwrap()).unwrap());
    }
}

#[test]
fn single_precision_solves() {
    let tol = ToleranceConfig::for_scalar::<f32>();
    for (k, lp) in lps(5, 60).iter().enumerate() {
        let want = solve_lp(lp, &ToleranceConfig::default()).unwrap();
        let lp32 = LinearProgram::<f32> {
            num_vars: lp.num_vars,
            objective: lp.objective.iter().map(|&v| v as f32).collect(),
            eq_matrix: lp.eq_matrix.iter().map(|r| r.iter().map(|&v| v as f32).collect()).collect(),
            eq_rhs: lp.eq_rhs.iter().map(|&v| v as f32).collect(),
            ge_matrix: lp.ge_matrix.iter().map(|r| r.iter().map(|&v| v as f32).collect()).collect(),
            ge_rhs: lp.ge_rhs.iter().map(|&v| v as f32).collect(),
            lower: lp.lower.iter().map(|b| b.map(|v| v as f32)).collect(),
            upper: lp.upper.iter().map(|b| b.map(|v| v as f32)).collect(),
        };
        let got = solve_lp(&lp32, &tol).unwrap();
        assert_eq!(got.status, want.status, "lp {k}");
        if got.status == LpStatus::Optimal {
            assert!((got.objective as f64 - want.objective).abs() <= 1e-3 * (1.0 + want.objective.abs()), "lp {k}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Scaling the objective by c > 0 scales the optimum and keeps the status.
    #[test]
    fn objective_scaling(seed in 0u64..10_000, c in 0.25f64..8.0) {
        let lp = lps(seed, 1).remove(0);
        let tol = ToleranceConfig::default();
        let base = solve_lp(&lp, &tol).unwrap();
        let mut scaled = lp.clone();
        scaled.objective.iter_mut().for_each(|v| *v *= c);
        let s = solve_lp(&scaled, &tol).unwrap();
        prop_assert_eq!(s.status, base.status);
        if s.status == LpStatus::Optimal {
            prop_assert!((s.objective - c * base.objective).abs() <= 1e-7 * (1.0 + s.objective.abs()));
        }
    }

    /// Every optimum carries a dual certificate with matching objective.
    #[test]
    fn strong_duality(seed in 0u64..10_000) {
        let lp = lps(seed, 1).remove(0);
        let s = solve_lp(&lp, &ToleranceConfig::default()).unwrap();
        if s.status == LpStatus::Optimal {
            prop_assert!(s.duality_gap().unwrap() <= 1e-6);
        } else {
            prop_assert!(s.primal.is_empty());
        }
    }
}
