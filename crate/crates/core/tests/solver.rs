mod common;

use common::{baseline_params, random_profile, rel};
use plap_core::eigen::lambda1;
use plap_core::energy::energy;
use plap_core::nehari::project;
use plap_core::solver::{solve, validate, SolveOptions, WARN_OUTSIDE_WINDOW, WARN_P_BELOW_TWO};
use plap_core::{ProblemParams, RadialGrid, SingularTerm};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn run(m: usize) -> plap_core::solver::Solution {
    let grid = RadialGrid::new(1.0, 2, m).unwrap();
    solve(&grid, &baseline_params(7.0), SolveOptions::default()).unwrap()
}

#[test]
fn baseline_regression() {
    let grid = RadialGrid::new(1.0, 2, 512).unwrap();
    let params = baseline_params(7.0);
    let sol = solve(&grid, &params, SolveOptions::default()).unwrap();
    assert!(sol.converged);
    assert!(sol.warnings.is_empty());
    assert!(rel(sol.energy, 3.474_934_696_128) < 1e-10, "{}", sol.energy);
    assert!(rel(sol.u.values()[0], 1.609_726_093_9) < 1e-9, "{}", sol.u.values()[0]);
    assert!(sol.iterations <= 50, "{}", sol.iterations);
    let report = validate(&sol, &grid, &params);
    assert!(report.valid, "{report:?}");
}

#[test]
fn accepted_steps_never_raise_the_energy() {
    for m in [128, 512] {
        let sol = run(m);
        let slack = 1e-12 * sol.energy.abs();
        for w in sol.energy_history.windows(2) {
            assert!(w[1] <= w[0] + slack, "M={m}: {} -> {}", w[0], w[1]);
        }
        assert!(sol.energy_history[0] > *sol.energy_history.last().unwrap());
    }
}

#[test]
fn solution_is_no_worse_than_random_nehari_points() {
    let grid = RadialGrid::new(1.0, 2, 256).unwrap();
    let params = baseline_params(7.0);
    let sol = solve(&grid, &params, SolveOptions::default()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let mut tried = 0;
    while tried < 20 {
        let w = random_profile(&mut rng, &grid);
        let Ok(proj) = project(&w, &grid, &params) else {
            continue;
        };
        tried += 1;
        let e = energy(&w.scaled(proj.t), &grid, &params);
        assert!(sol.energy <= e + 1e-12 * e.abs(), "{} > {e}", sol.energy);
    }
}

#[test]
fn refinement_is_cauchy_at_first_order() {
    let sols: Vec<_> = [128, 256, 512, 1024].iter().map(|&m| (m, run(m))).collect();
    let gaps: Vec<f64> = sols
        .windows(2)
        .map(|w| {
            let (coarse, fine) = (&w[0].1, &w[1].1);
            (0..=w[0].0)
                .map(|j| (coarse.u.values()[j] - fine.u.values()[2 * j]).abs())
                .fold(0.0, f64::max)
        })
        .collect();
    for (k, g) in gaps.iter().enumerate() {
        let m = 128 << k;
        assert!(g * m as f64 <= 1.0, "M={m}: gap {g:e}");
    }
    for w in gaps.windows(2) {
        assert!(w[0] / w[1] >= 1.8, "gaps {gaps:?}");
    }
}

#[test]
fn baseline_profile_is_non_increasing() {
    let sol = run(512);
    assert!(sol.u.values().windows(2).all(|w| w[1] <= w[0]));
}

#[test]
fn three_dimensional_case_inside_window() {
    let grid = RadialGrid::new(1.0, 3, 256).unwrap();
    let params =
        ProblemParams::new(3, 2.0, 11.0, 1.0, SingularTerm::new(1.0, 0.5).unwrap()).unwrap();
    let sol = solve(&grid, &params, SolveOptions::default()).unwrap();
    assert!(sol.converged && sol.warnings.is_empty());
    assert!(validate(&sol, &grid, &params).valid);
}

#[test]
fn above_window_warns_but_solves() {
    let grid = RadialGrid::new(1.0, 2, 256).unwrap();
    let params = baseline_params(8.0);
    let sol = solve(&grid, &params, SolveOptions::default()).unwrap();
    assert_eq!(sol.warnings, vec![WARN_OUTSIDE_WINDOW.to_string()]);
    assert!(sol.converged);
}

#[test]
fn p_below_two_is_flagged_not_rejected() {
    let grid = RadialGrid::new(1.0, 2, 256).unwrap();
    let p = 1.8;
    let l1 = lambda1(&grid, p).unwrap().lambda1;
    let params =
        ProblemParams::new(2, p, 1.15 * l1, 1.0, SingularTerm::new(1.0, 0.5).unwrap()).unwrap();
    let sol = solve(&grid, &params, SolveOptions::default()).unwrap();
    assert!(sol.warnings.contains(&WARN_P_BELOW_TWO.to_string()));
    assert!(sol.converged, "residuals {} {}", sol.stationarity_residual, sol.nehari_residual);
    assert!(sol.positivity_margin > 0.0);
}

#[test]
fn non_default_p_converges() {
    let grid = RadialGrid::new(1.0, 2, 256).unwrap();
    for p in [2.5, 3.0] {
        let l1 = lambda1(&grid, p).unwrap().lambda1;
        let params =
            ProblemParams::new(2, p, 1.15 * l1, 1.0, SingularTerm::new(1.0, 0.5).unwrap())
                .unwrap();
        let sol = solve(&grid, &params, SolveOptions::default()).unwrap();
        assert!(sol.converged, "p={p}: {} {}", sol.stationarity_residual, sol.nehari_residual);
        assert!(validate(&sol, &grid, &params).valid, "p={p}");
    }
}
