//! Fibering maps and the Nehari projection.
//!
//! Along a ray `s ↦ s·u` the energy is
//! `F(su) = (s^p/p)(A - λB) + γ s^{1-α} C/(1-α)` and its derivative times `s`
//! is the slope `ψ(s) = s^p (A - λB) + γ s^{1-α} C`. On
//! `W = {A < λB}` the ratio `ψ(s)/s^p` is strictly decreasing from `+∞` to
//! `A - λB < 0`, so `ψ` has exactly one positive root `t(u)`, which is also
//! the maximiser of the fibering map.

use serde::{Deserialize, Serialize};

use crate::energy::{moments, Moments};
use crate::error::{Error, Result};
use crate::grid::{RadialFn, RadialGrid};
use crate::params::ProblemParams;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NehariResult {
    /// Scale with `t·u ∈ V`.
    pub t: f64,
    /// `ψ(t) / max(1, λ t^p B)`.
    pub slope_residual: f64,
}

fn nonzero(u: &RadialFn) -> Result<()> {
    if u.is_zero() {
        Err(Error::ZeroFunction)
    } else {
        Ok(())
    }
}

pub fn in_w(u: &RadialFn, grid: &RadialGrid, params: &ProblemParams) -> Result<bool> {
    nonzero(u)?;
    let m = moments(u, grid, params);
    Ok(m.grad_p < params.lambda * m.mass_p)
}

/// Relative violation of `A + γC = λB`.
pub fn nehari_residual(m: &Moments, params: &ProblemParams) -> f64 {
    let lb = params.lambda * m.mass_p;
    (m.grad_p + params.term.gamma * m.sub - lb).abs() / lb.abs().max(1.0)
}

pub fn in_v(u: &RadialFn, grid: &RadialGrid, params: &ProblemParams, tol: f64) -> Result<bool> {
    nonzero(u)?;
    Ok(nehari_residual(&moments(u, grid, params), params) <= tol)
}

/// `ψ(t) = t^p (A - λB) + γ t^{1-α} C`.
pub fn fiber_slope(t: f64, m: &Moments, params: &ProblemParams) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::InvalidScale(t));
    }
    let term = params.term;
    Ok(t.powf(params.p) * (m.grad_p - params.lambda * m.mass_p)
        + term.gamma * t.powf(1.0 - term.alpha) * m.sub)
}

/// `F(s·u)` from the moments of `u`.
pub fn fiber_energy(s: f64, m: &Moments, params: &ProblemParams) -> f64 {
    let term = params.term;
    s.powf(params.p) / params.p * (m.grad_p - params.lambda * m.mass_p)
        + term.gamma * s.powf(1.0 - term.alpha) * m.sub / (1.0 - term.alpha)
}

fn require_w(m: &Moments, params: &ProblemParams) -> Result<()> {
    let lambda_mass = params.lambda * m.mass_p;
    if m.grad_p < lambda_mass && m.sub > 0.0 && params.term.gamma > 0.0 {
        Ok(())
    } else {
        Err(Error::NotInW { grad_p: m.grad_p, lambda_mass })
    }
}

/// Closed form `t = (γC / (λB - A))^{1/(p-1+α)}`.
pub fn projection_scale(m: &Moments, params: &ProblemParams) -> Result<f64> {
    require_w(m, params)?;
    let term = params.term;
    let gap = params.lambda * m.mass_p - m.grad_p;
    Ok((term.gamma * m.sub / gap).powf(1.0 / (params.p - 1.0 + term.alpha)))
}

/// Root of `ψ` by bracketing from `t = 1` and bisection to `rel_tol`.
///
/// Only uses the sign of `ψ`, so it carries over to any `g` for which the
/// fibering slope changes sign once.
pub fn projection_scale_bisect(m: &Moments, params: &ProblemParams, rel_tol: f64) -> Result<f64> {
    require_w(m, params)?;
    let term = params.term;
    let gap = m.grad_p - params.lambda * m.mass_p;
    let e = params.p - 1.0 + term.alpha;
    // ψ(t)/t^{1-α}: same sign as ψ, no overflow for extreme t
    let sign = |t: f64| t.powf(e) * gap + term.gamma * m.sub > 0.0;

    let (mut lo, mut hi) = (1.0_f64, 1.0_f64);
    if sign(1.0) {
        while sign(hi) {
            hi *= 2.0;
        }
        lo = hi / 2.0;
    } else {
        while !sign(lo) {
            lo /= 2.0;
        }
        hi = lo * 2.0;
    }
    while hi - lo > rel_tol * hi {
        let mid = 0.5 * (lo + hi);
        if sign(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Unique `t > 0` with `t·u ∈ V`; requires `u ∈ W`.
pub fn project(u: &RadialFn, grid: &RadialGrid, params: &ProblemParams) -> Result<NehariResult> {
    nonzero(u)?;
    let m = moments(u, grid, params);
    let t = projection_scale(&m, params)?;
    let psi = fiber_slope(t, &m, params)?;
    let scale = (params.lambda * t.powf(params.p) * m.mass_p).abs().max(1.0);
    Ok(NehariResult { t, slope_residual: psi / scale })
}
