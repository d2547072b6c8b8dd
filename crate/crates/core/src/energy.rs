//! Discrete energy
//!
//! ```text
//!   F(u) = A/p - λ B/p + γ C/(1-α)
//!   A = ∫|u'|^p,  B = ∫|u|^p,  C = ∫|u|^{1-α}
//! ```
//!
//! `A` is a sum over cells of the squared-difference quotient weighted by
//! `|S| m^{N-1}` at the cell midpoint; `B` and `C` use the nodal trapezoid
//! weights. [`energy_gradient`] differentiates exactly this sum, so it agrees
//! with finite differences of [`energy`] up to round-off.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{RadialFn, RadialGrid};
use crate::linalg::SymTridiag;
use crate::params::ProblemParams;

/// Nodal values below this are treated as zero by the singular term.
pub const POSITIVITY_FLOOR: f64 = 1e-12;

/// The three integrals entering the energy and the Nehari constraint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    /// `A = ∫ |∇u|^p dx`
    pub grad_p: f64,
    /// `B = ∫ |u|^p dx`
    pub mass_p: f64,
    /// `C = ∫ |u|^{1-α} dx`
    pub sub: f64,
}

impl Moments {
    /// Moments of `s·u` for `s > 0`.
    pub fn scaled(&self, s: f64, p: f64, alpha: f64) -> Self {
        let sp = s.powf(p);
        Self {
            grad_p: sp * self.grad_p,
            mass_p: sp * self.mass_p,
            sub: s.powf(1.0 - alpha) * self.sub,
        }
    }
}

#[inline]
fn diffs(u: &[f64], h: f64) -> impl Iterator<Item = f64> + '_ {
    u.windows(2).map(move |w| (w[1] - w[0]) / h)
}

pub fn grad_moment(u: &RadialFn, grid: &RadialGrid, p: f64) -> f64 {
    let h = grid.step();
    diffs(u.values(), h)
        .zip(grid.cell_factors())
        .map(|(d, c)| c * h * d.abs().powf(p))
        .sum()
}

pub fn power_moment(u: &RadialFn, grid: &RadialGrid, q: f64) -> f64 {
    u.values()
        .iter()
        .zip(grid.weights())
        .map(|(v, w)| if *v == 0.0 { 0.0 } else { w * v.abs().powf(q) })
        .sum()
}

pub fn moments(u: &RadialFn, grid: &RadialGrid, params: &ProblemParams) -> Moments {
    Moments {
        grad_p: grad_moment(u, grid, params.p),
        mass_p: power_moment(u, grid, params.p),
        sub: power_moment(u, grid, 1.0 - params.term.alpha),
    }
}

pub fn energy_from_moments(m: &Moments, params: &ProblemParams) -> f64 {
    let p = params.p;
    let t = params.term;
    m.grad_p / p - params.lambda * m.mass_p / p + t.gamma * m.sub / (1.0 - t.alpha)
}

/// Discrete `F(u)`. Callers pass `u >= 0`; negative values enter through `|u|`.
pub fn energy(u: &RadialFn, grid: &RadialGrid, params: &ProblemParams) -> f64 {
    energy_from_moments(&moments(u, grid, params), params)
}

#[inline]
fn signed_pow(x: f64, e: f64) -> f64 {
    // |x|^{e} sign(x), with 0 at x = 0 for any e > 0
    if x == 0.0 {
        0.0
    } else {
        x.signum() * x.abs().powf(e)
    }
}

/// `∂A/∂u_j` for the free nodes `j = 0..M-1` (boundary entry is 0).
pub(crate) fn grad_moment_gradient(u: &[f64], grid: &RadialGrid, p: f64) -> Vec<f64> {
    let n = u.len();
    let mut g = vec![0.0; n];
    for (i, (d, c)) in diffs(u, grid.step()).zip(grid.cell_factors()).enumerate() {
        let flux = p * c * signed_pow(d, p - 1.0);
        g[i] -= flux;
        g[i + 1] += flux;
    }
    g[n - 1] = 0.0;
    g
}

/// `∂B/∂u_j` with `B = ∫|u|^q`.
pub(crate) fn power_moment_gradient(u: &[f64], grid: &RadialGrid, q: f64) -> Vec<f64> {
    let mut g: Vec<f64> = u
        .iter()
        .zip(grid.weights())
        .map(|(v, w)| q * w * signed_pow(*v, q - 1.0))
        .collect();
    *g.last_mut().unwrap() = 0.0;
    g
}

/// Exact gradient of [`energy`] with respect to the free nodal values.
///
/// Fails with [`Error::SingularGradient`] when `γ > 0` and some node with
/// `r < R` lies below [`POSITIVITY_FLOOR`].
pub fn energy_gradient(u: &RadialFn, grid: &RadialGrid, params: &ProblemParams) -> Result<RadialFn> {
    u.check_grid(grid)?;
    let vals = u.values();
    let n = vals.len();
    let t = params.term;
    if !t.is_linear() {
        if let Some((node, &value)) =
            vals[..n - 1].iter().enumerate().find(|(_, v)| **v < POSITIVITY_FLOOR)
        {
            return Err(Error::SingularGradient { node, value });
        }
    }
    let p = params.p;
    let mut g = grad_moment_gradient(vals, grid, p);
    let w = grid.weights();
    for j in 0..n - 1 {
        let mut s = g[j] / p - params.lambda * w[j] * signed_pow(vals[j], p - 1.0);
        if !t.is_linear() && w[j] > 0.0 {
            s += w[j] * t.g(vals[j]);
        }
        g[j] = s;
    }
    Ok(RadialFn::from_interior(g[..n - 1].to_vec()))
}

/// `max_j |v_j| / |shell_j|`, the nodal strong-form size of a gradient.
pub fn weighted_sup_norm(v: &RadialFn, grid: &RadialGrid) -> f64 {
    let n = v.len();
    v.values()[..n - 1]
        .iter()
        .zip(grid.dual_volumes())
        .map(|(g, vol)| g.abs() / vol)
        .fold(0.0, f64::max)
}

/// Hessian of `A/p` on the free nodes, with `|u'|^{p-2}` floored at
/// `1e-3 max|u'|` so the matrix stays positive definite for `p != 2`.
/// Exact (and constant) for `p = 2`.
pub(crate) fn stiffness(u: &[f64], grid: &RadialGrid, p: f64) -> SymTridiag {
    let n = u.len() - 1;
    let h = grid.step();
    let ds: Vec<f64> = diffs(u, h).collect();
    let dmax = ds.iter().fold(0.0_f64, |m, d| m.max(d.abs()));
    let floor = if dmax > 0.0 { 1e-3 * dmax } else { 1.0 };
    let mut diag = vec![0.0; n];
    let mut off = vec![0.0; n.saturating_sub(1)];
    for (i, (d, c)) in ds.iter().zip(grid.cell_factors()).enumerate() {
        let k = if p == 2.0 {
            c / h
        } else {
            (p - 1.0) * c * d.abs().max(floor).powf(p - 2.0) / h
        };
        diag[i] += k;
        if i + 1 < n {
            diag[i + 1] += k;
            off[i] -= k;
        }
    }
    SymTridiag { diag, off }
}
