//! First Dirichlet eigenvalue of the radial p-Laplacian.
//!
//! Minimises the discrete Rayleigh quotient `A(u)/B(u)` by descent steps
//! preconditioned with the stiffness of `A/p`, renormalising to `B = 1`
//! after each accepted step. For `p = 2` a unit step is one step of inverse
//! iteration.

use serde::{Deserialize, Serialize};

use crate::energy::{
    grad_moment, grad_moment_gradient, power_moment, power_moment_gradient, stiffness,
};
use crate::error::{Error, Result};
use crate::grid::{RadialFn, RadialGrid};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenResult {
    pub lambda1: f64,
    /// Positive eigenfunction normalised to `B = ∫|u|^p = 1`.
    pub eigfn: RadialFn,
    /// Relative strong-form residual `max_j |∂(A - λ₁B)_j| / (p |shell_j| λ₁ max|u|)`.
    pub residual: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenOptions {
    /// Stop once the quotient changes by less than `tol` relative.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for EigenOptions {
    fn default() -> Self {
        Self { tol: 1e-10, max_iter: 20_000 }
    }
}

fn normalize(u: &[f64], grid: &RadialGrid, p: f64) -> RadialFn {
    let f = RadialFn::from_interior(u.to_vec());
    let b = power_moment(&f, grid, p);
    f.scaled(b.powf(-1.0 / p))
}

fn quotient(u: &RadialFn, grid: &RadialGrid, p: f64) -> f64 {
    grad_moment(u, grid, p) / power_moment(u, grid, p)
}

/// Gradient of `(A - ρB)/p` on the free nodes.
fn rayleigh_gradient(u: &RadialFn, grid: &RadialGrid, p: f64, rho: f64) -> Vec<f64> {
    let n = grid.cells();
    let ga = grad_moment_gradient(u.values(), grid, p);
    let gb = power_moment_gradient(u.values(), grid, p);
    (0..n).map(|j| (ga[j] - rho * gb[j]) / p).collect()
}

pub fn lambda1(grid: &RadialGrid, p: f64) -> Result<EigenResult> {
    lambda1_with(grid, p, EigenOptions::default())
}

pub fn lambda1_with(grid: &RadialGrid, p: f64, opts: EigenOptions) -> Result<EigenResult> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(Error::InvalidParams(format!("p = {p} must be > 1")));
    }
    let n = grid.cells();
    let radius = grid.radius();
    let start: Vec<f64> = grid.nodes()[..n].iter().map(|r| 1.0 - (r / radius).powi(2)).collect();
    let mut u = normalize(&start, grid, p);
    let mut rho = quotient(&u, grid, p);
    let mut calm = 0;

    for it in 1..=opts.max_iter {
        let r = rayleigh_gradient(&u, grid, p, rho);
        let k = stiffness(u.values(), grid, p);
        let d: Vec<f64> = k.solve(&r).into_iter().map(|x| -x).collect();
        let slope: f64 = p * r.iter().zip(&d).map(|(a, b)| a * b).sum::<f64>();

        let mut eta = 1.0;
        let mut next = None;
        while eta > 1e-16 {
            let trial: Vec<f64> =
                (0..n).map(|j| (u.values()[j] + eta * d[j]).abs()).collect();
            let cand = normalize(&trial, grid, p);
            let q = quotient(&cand, grid, p);
            if q <= rho + 1e-4 * eta * slope {
                next = Some((cand, q));
                break;
            }
            eta *= 0.5;
        }
        let Some((cand, q)) = next else {
            // no admissible decrease left: the quotient is stationary to round-off
            return Ok(finish(u, rho, grid, p, it));
        };
        let change = (rho - q).abs() / q;
        u = cand;
        rho = q;
        if change <= opts.tol {
            calm += 1;
            if calm >= 3 {
                return Ok(finish(u, rho, grid, p, it));
            }
        } else {
            calm = 0;
        }
    }
    let residual = finish(u, rho, grid, p, opts.max_iter).residual;
    Err(Error::NoConvergence { iterations: opts.max_iter, residual })
}

fn finish(u: RadialFn, rho: f64, grid: &RadialGrid, p: f64, iterations: usize) -> EigenResult {
    let r = rayleigh_gradient(&u, grid, p, rho);
    let top = u.sup_norm();
    let residual = r
        .iter()
        .zip(grid.dual_volumes())
        .map(|(g, v)| g.abs() / v)
        .fold(0.0, f64::max)
        / (rho * top.powf(p - 1.0));
    EigenResult { lambda1: rho, eigfn: u, residual, iterations }
}
