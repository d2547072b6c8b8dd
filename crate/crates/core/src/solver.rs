//! Positive radial solutions as minimisers of the energy on the Nehari set.
//!
//! Each iteration takes a step along the stiffness-preconditioned negative
//! gradient, folds the trial back to `u >= 0` with `|·|`, rescales it onto
//! the Nehari set with the closed-form fibering projection, and accepts it
//! under an Armijo test on the projected energy.

use serde::{Deserialize, Serialize};

use crate::analysis::existence_window;
use crate::eigen::{lambda1, EigenResult};
use crate::energy::{
    energy, energy_gradient, moments, stiffness, weighted_sup_norm, Moments, POSITIVITY_FLOOR,
};
use crate::error::{Error, Result};
use crate::grid::{RadialFn, RadialGrid};
use crate::nehari::{in_w, nehari_residual, project, projection_scale};
use crate::params::ProblemParams;

pub const WARN_OUTSIDE_WINDOW: &str = "lambda outside the existence window";
pub const WARN_P_BELOW_TWO: &str = "p < 2: existence is not guaranteed";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    /// Bound on both the Nehari residual and the stationarity residual.
    pub tol: f64,
    pub max_iter: usize,
    /// Initial step length of each line search.
    pub step0: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self { tol: 1e-8, max_iter: 50_000, step0: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub u: RadialFn,
    pub energy: f64,
    pub nehari_residual: f64,
    /// [`weighted_sup_norm`] of the energy gradient at `u`.
    pub stationarity_residual: f64,
    /// Smallest nodal value over `r < R`.
    pub positivity_margin: f64,
    pub iterations: usize,
    pub converged: bool,
    pub tol: f64,
    pub lambda1: f64,
    pub warnings: Vec<String>,
    /// Energy after each accepted step, starting with the projected guess.
    pub energy_history: Vec<f64>,
}

impl Solution {
    /// Diagnostics for an arbitrary nonnegative profile. `converged` is set
    /// when both residuals are within `tol`.
    pub fn from_profile(
        u: RadialFn,
        grid: &RadialGrid,
        params: &ProblemParams,
        tol: f64,
    ) -> Result<Self> {
        u.check_grid(grid)?;
        let m = moments(&u, grid, params);
        let stationarity_residual = match energy_gradient(&u, grid, params) {
            Ok(g) => weighted_sup_norm(&g, grid),
            Err(Error::SingularGradient { .. }) => f64::INFINITY,
            Err(e) => return Err(e),
        };
        let nres = nehari_residual(&m, params);
        let e = energy(&u, grid, params);
        Ok(Self {
            positivity_margin: u.interior_min(),
            energy: e,
            nehari_residual: nres,
            stationarity_residual,
            iterations: 0,
            converged: nres <= tol && stationarity_residual <= tol,
            tol,
            lambda1: f64::NAN,
            warnings: Vec::new(),
            energy_history: vec![e],
            u,
        })
    }
}

/// Starting profile in `W`: the first eigenfunction, or `cos(πr/2R)` when
/// the eigenfunction misses `W` by round-off.
pub fn initial_guess(grid: &RadialGrid, params: &ProblemParams, eig: &RadialFn) -> Result<RadialFn> {
    eig.check_grid(grid)?;
    let m = moments(eig, grid, params);
    let lambda1 = m.grad_p / m.mass_p;
    let outside = Error::OutsideWindow { lambda: params.lambda, lambda1 };
    if params.lambda <= lambda1 {
        return Err(outside);
    }
    let eig = eig.abs();
    if in_w(&eig, grid, params)? {
        return Ok(eig.scaled(m.mass_p.powf(-1.0 / params.p)));
    }
    let radius = grid.radius();
    let fallback =
        RadialFn::from_fn(grid, |r| (std::f64::consts::FRAC_PI_2 * r / radius).cos());
    if in_w(&fallback, grid, params)? {
        Ok(fallback)
    } else {
        Err(outside)
    }
}

pub fn solve(grid: &RadialGrid, params: &ProblemParams, opts: SolveOptions) -> Result<Solution> {
    params.validate_variational()?;
    let eig = lambda1(grid, params.p)?;
    solve_with_eigen(grid, params, opts, &eig)
}

fn energy_scale(m: &Moments, params: &ProblemParams) -> f64 {
    let t = params.term;
    m.grad_p / params.p + (params.lambda * m.mass_p / params.p).abs()
        + t.gamma * m.sub / (1.0 - t.alpha)
}

/// `|v|` floored at the positivity floor, with `v_0 = v_1`.
///
/// The quadrature weights vanish at `r = 0`, so `F` depends on `v_0` only
/// through `|v_1 - v_0|^p` and `v_0 = v_1` is the exact minimizer in that
/// coordinate. Setting it directly avoids the slow approach to `d_0 = 0`
/// when `p < 2`, where that term has unbounded curvature.
fn floored(values: impl Iterator<Item = f64>) -> RadialFn {
    let mut v: Vec<f64> = values.map(|x| x.abs().max(POSITIVITY_FLOOR)).collect();
    if v.len() > 1 {
        v[0] = v[1];
    }
    RadialFn::from_interior(v)
}

/// Same as [`solve`] with a precomputed eigenpair on the same grid.
pub fn solve_with_eigen(
    grid: &RadialGrid,
    params: &ProblemParams,
    opts: SolveOptions,
    eig: &EigenResult,
) -> Result<Solution> {
    params.validate_variational()?;
    if grid.dim() != params.dim || grid.radius() != params.radius {
        return Err(Error::InvalidParams("grid does not match dim/radius".into()));
    }
    if !(opts.tol > 0.0 && opts.step0 > 0.0) {
        return Err(Error::InvalidParams("tol and step0 must be positive".into()));
    }
    let mut warnings = Vec::new();
    if params.p < 2.0 {
        warnings.push(WARN_P_BELOW_TWO.to_string());
    }
    let (m1, m2) = params.term.bounds();
    if let Ok(win) = existence_window(params.dim, params.p, params.term.alpha, m1, m2, eig.lambda1)
    {
        if params.lambda > win.lambda_hi {
            warnings.push(WARN_OUTSIDE_WINDOW.to_string());
        }
    }

    let guess = initial_guess(grid, params, &eig.eigfn)?;
    let t0 = project(&guess, grid, params)?.t;
    let mut v = floored(guess.scaled(t0).values()[..grid.cells()].iter().copied());
    let n = grid.cells();

    let mut m = moments(&v, grid, params);
    let mut e = energy(&v, grid, params);
    let mut grad = energy_gradient(&v, grid, params)?;
    let mut res = weighted_sup_norm(&grad, grid);
    let mut history = vec![e];
    let mut iterations = 0;
    let mut eta_start = opts.step0;

    while iterations < opts.max_iter {
        if res <= opts.tol && nehari_residual(&m, params) <= opts.tol {
            break;
        }
        iterations += 1;
        let k = stiffness(v.values(), grid, params.p);
        let g = &grad.values()[..n];
        let d: Vec<f64> = k.solve(g).into_iter().map(|x| -x).collect();
        let slope: f64 = g.iter().zip(&d).map(|(a, b)| a * b).sum();
        let slack = 1e-13 * energy_scale(&m, params);

        let mut eta = eta_start;
        let mut accepted = None;
        while eta >= 1e-20 {
            let trial = floored((0..n).map(|j| v.values()[j] + eta * d[j]));
            let tm = moments(&trial, grid, params);
            let t = match projection_scale(&tm, params) {
                Ok(t) => t,
                Err(Error::NotInW { .. }) => {
                    eta *= 0.5;
                    continue;
                }
                Err(err) => return Err(err),
            };
            let cand = floored(trial.values()[..n].iter().map(|x| x * t));
            let ce = energy(&cand, grid, params);
            if ce <= e + 1e-4 * eta * slope {
                accepted = Some((cand, ce, None));
                break;
            }
            // once the predicted decrease is below round-off in F, accept
            // steps that still reduce the gradient
            if -eta * slope <= slack && ce <= e + slack {
                let cg = energy_gradient(&cand, grid, params)?;
                let cres = weighted_sup_norm(&cg, grid);
                if cres < res {
                    accepted = Some((cand, ce, Some((cg, cres))));
                    break;
                }
            }
            eta *= 0.5;
        }
        let Some((cand, ce, cached)) = accepted else {
            break;
        };
        eta_start = (2.0 * eta).min(opts.step0);
        v = cand;
        e = ce;
        m = moments(&v, grid, params);
        match cached {
            Some((cg, cres)) => {
                grad = cg;
                res = cres;
            }
            None => {
                grad = energy_gradient(&v, grid, params)?;
                res = weighted_sup_norm(&grad, grid);
            }
        }
        history.push(e);
    }

    let nres = nehari_residual(&m, params);
    Ok(Solution {
        positivity_margin: v.interior_min(),
        energy: e,
        nehari_residual: nres,
        stationarity_residual: res,
        iterations,
        converged: res <= opts.tol && nres <= opts.tol,
        tol: opts.tol,
        lambda1: eig.lambda1,
        warnings,
        energy_history: history,
        u: v,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    /// Minimum over `r < R` is positive.
    pub positivity: bool,
    /// No interior node vanishes between positive values.
    pub no_interior_zero: bool,
    /// `F(u) >= F(s u)` on the sampled scales.
    pub fibering_max: bool,
    pub on_nehari: bool,
    /// Weak-form stationarity: the gradient residual is within tolerance.
    pub stationary: bool,
    pub valid: bool,
}

/// `F(u) >= F(s u)` for `samples` log-spaced `s ∈ [1/100, 100]`.
pub fn fibering_max_check(
    u: &RadialFn,
    grid: &RadialGrid,
    params: &ProblemParams,
    samples: usize,
) -> bool {
    let e = energy(u, grid, params);
    let slack = 1e-12 * e.abs().max(1.0);
    (0..samples).all(|k| {
        let s = 10f64.powf(-2.0 + 4.0 * k as f64 / (samples.max(2) - 1) as f64);
        energy(&u.scaled(s), grid, params) <= e + slack
    })
}

pub fn validate(sol: &Solution, grid: &RadialGrid, params: &ProblemParams) -> ValidationReport {
    let u = &sol.u;
    let vals = u.values();
    let n = vals.len() - 1;
    let positivity = u.interior_min() > 0.0;

    let no_interior_zero = (1..n).all(|j| {
        vals[j] > POSITIVITY_FLOOR
            || !(vals[..j].iter().any(|&x| x > POSITIVITY_FLOOR)
                && vals[j + 1..n].iter().any(|&x| x > POSITIVITY_FLOOR))
    });

    let nonzero = !u.is_zero();
    let fibering_max = nonzero && fibering_max_check(u, grid, params, 50);
    let on_nehari = nonzero && nehari_residual(&moments(u, grid, params), params) <= sol.tol;
    let stationary = match energy_gradient(u, grid, params) {
        Ok(g) => weighted_sup_norm(&g, grid) <= sol.tol,
        Err(_) => false,
    };
    ValidationReport {
        positivity,
        no_interior_zero,
        fibering_max,
        on_nehari,
        stationary,
        valid: positivity && no_interior_zero && fibering_max && on_nehari && stationary,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::build_grid;
    use crate::params::SingularTerm;

    fn params(lambda: f64, gamma: f64) -> ProblemParams {
        ProblemParams::new(2, 2.0, lambda, 1.0, SingularTerm::new(gamma, 0.5).unwrap()).unwrap()
    }

    #[test]
    fn refuses_linear_term() {
        let g = build_grid(1.0, 2, 64).unwrap();
        let r = solve(&g, &params(7.0, 0.0), SolveOptions::default());
        assert!(matches!(r, Err(Error::InvalidParams(_))));
    }

    #[test]
    fn below_first_eigenvalue_is_outside_window() {
        let g = build_grid(1.0, 2, 128).unwrap();
        let r = solve(&g, &params(5.0, 1.0), SolveOptions::default());
        assert!(matches!(r, Err(Error::OutsideWindow { .. })));
    }

    #[test]
    fn guess_at_exact_lambda1_is_rejected() {
        let g = build_grid(1.0, 2, 128).unwrap();
        let eig = lambda1(&g, 2.0).unwrap();
        let m = moments(&eig.eigfn, &g, &params(1.0, 1.0));
        let exact = m.grad_p / m.mass_p;
        let r = initial_guess(&g, &params(exact, 1.0), &eig.eigfn);
        assert!(matches!(r, Err(Error::OutsideWindow { .. })));
        let ok = initial_guess(&g, &params(7.0, 1.0), &eig.eigfn).unwrap();
        assert!(in_w(&ok, &g, &params(7.0, 1.0)).unwrap());
    }

    #[test]
    fn small_grid_converges_and_validates() {
        let g = build_grid(1.0, 2, 64).unwrap();
        let p = params(7.0, 1.0);
        let sol = solve(&g, &p, SolveOptions::default()).unwrap();
        assert!(sol.converged, "{sol:?}");
        let rep = validate(&sol, &g, &p);
        assert!(rep.valid, "{rep:?}");
    }

    #[test]
    fn spliced_zero_and_unprojected_guess_fail_validation() {
        let g = build_grid(1.0, 2, 64).unwrap();
        let p = params(7.0, 1.0);
        let sol = solve(&g, &p, SolveOptions::default()).unwrap();

        let mut vals = sol.u.values().to_vec();
        vals[32] = 0.0;
        let spliced = Solution::from_profile(RadialFn::new(vals).unwrap(), &g, &p, sol.tol).unwrap();
        let rep = validate(&spliced, &g, &p);
        assert!(!rep.no_interior_zero);
        assert!(!rep.valid);

        let eig = lambda1(&g, 2.0).unwrap();
        let guess = initial_guess(&g, &p, &eig.eigfn).unwrap();
        let raw = Solution::from_profile(guess, &g, &p, sol.tol).unwrap();
        let rep = validate(&raw, &g, &p);
        assert!(!rep.on_nehari);
        assert!(!rep.valid);
    }
}
