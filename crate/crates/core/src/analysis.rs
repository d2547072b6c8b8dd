//! Parameter-space analysis: the constants condition and the `λ`-window where
//! existence is guaranteed, the Pohozaev identity on the ball, and the β-interval
//! nonexistence certificate.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::energy::moments;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::grid::{fmt_f64, RadialFn, RadialGrid};
use crate::params::ProblemParams;

fn check_domain(p: f64, alpha: f64, m1: f64, m2: f64) -> Result<()> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(Error::InvalidParams(format!("p = {p} must be > 1")));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParams(format!("alpha = {alpha} must lie in (0, 1)")));
    }
    if !(m1 > 0.0 && m2 > 0.0 && m1.is_finite() && m2.is_finite()) {
        return Err(Error::InvalidParams(format!("m1 = {m1}, m2 = {m2} must be > 0")));
    }
    Ok(())
}

/// `p m1 / (1-α) > m2 >= m1`.
pub fn check_constants(p: f64, alpha: f64, m1: f64, m2: f64) -> Result<bool> {
    check_domain(p, alpha, m1, m2)?;
    Ok(p * m1 / (1.0 - alpha) > m2 && m2 >= m1)
}

/// `λ ∈ (lambda_lo, lambda_hi]` with `lambda_lo = λ₁`, `lambda_hi = λ₁/(1-c)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExistenceWindow {
    pub lambda_lo: f64,
    pub lambda_hi: f64,
    pub constants_valid: bool,
    /// `D = pN m2 - (N-p)(1-α) m1`
    pub denominator: f64,
    /// `c = p(1-α) m1 / D`
    pub c: f64,
}

impl ExistenceWindow {
    pub fn contains(&self, lambda: f64) -> bool {
        lambda > self.lambda_lo && lambda <= self.lambda_hi
    }
}

pub fn existence_window(
    dim: usize,
    p: f64,
    alpha: f64,
    m1: f64,
    m2: f64,
    lambda1: f64,
) -> Result<ExistenceWindow> {
    if dim < 2 {
        return Err(Error::InvalidParams(format!("dim = {dim} must be >= 2")));
    }
    if !(lambda1 > 0.0 && lambda1.is_finite()) {
        return Err(Error::InvalidParams(format!("lambda1 = {lambda1} must be > 0")));
    }
    if !check_constants(p, alpha, m1, m2)? {
        return Err(Error::InvalidParams(format!(
            "constants violate p*m1/(1-alpha) > m2 >= m1 (p={p}, alpha={alpha}, m1={m1}, m2={m2})"
        )));
    }
    let n = dim as f64;
    let denominator = p * n * m2 - (n - p) * (1.0 - alpha) * m1;
    let c = p * (1.0 - alpha) * m1 / denominator;
    Ok(ExistenceWindow {
        lambda_lo: lambda1,
        lambda_hi: lambda1 / (1.0 - c),
        constants_valid: true,
        denominator,
        c,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityResult {
    pub beta_lo: f64,
    pub beta_hi: f64,
    /// Some `β` satisfies all three inequalities; certifies nonexistence.
    pub feasible: bool,
    /// Some feasible `β` makes at least one inequality strict.
    pub strictness_possible: bool,
}

/// The three inequalities in `β` behind the nonexistence test:
///
/// ```text
///   (N-p)/p + β >= 0
///   -λ (N/p + β) >= 0
///   -(N m2/(1-α) + β m1) >= 0
/// ```
pub fn pohozaev_feasibility(
    dim: usize,
    p: f64,
    alpha: f64,
    m1: f64,
    m2: f64,
    lambda: f64,
) -> Result<FeasibilityResult> {
    if dim < 2 {
        return Err(Error::InvalidParams(format!("dim = {dim} must be >= 2")));
    }
    check_domain(p, alpha, m1, m2)?;
    if !lambda.is_finite() {
        return Err(Error::InvalidParams("lambda must be finite".into()));
    }
    let n = dim as f64;
    let mut lo = (p - n) / p;
    let mut hi = -n * m2 / ((1.0 - alpha) * m1);
    if lambda < 0.0 {
        lo = lo.max(-n / p);
    } else if lambda > 0.0 {
        hi = hi.min(-n / p);
    }
    let feasible = lo <= hi;
    let strict_at = |b: f64| {
        (n - p) / p + b > 0.0 || -lambda * (n / p + b) > 0.0 || -(n * m2 / (1.0 - alpha) + b * m1) > 0.0
    };
    let strictness_possible =
        feasible && (lo < hi || strict_at(lo) || strict_at(hi) || strict_at(0.5 * (lo + hi)));
    Ok(FeasibilityResult { beta_lo: lo, beta_hi: hi, feasible, strictness_possible })
}

/// Which sign the singular term carries in the equation being tested.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SourceSign {
    /// `-Δp u = λ|u|^{p-2}u - g(u)`
    Absorption,
    /// `-Δp u = λ|u|^{p-2}u + g(u)`
    Source,
}

impl SourceSign {
    /// `-1` for absorption, `+1` for source.
    pub fn from_sign(s: i32) -> Result<Self> {
        match s {
            -1 => Ok(SourceSign::Absorption),
            1 => Ok(SourceSign::Source),
            _ => Err(Error::InvalidParams(format!("source sign {s} must be -1 or +1"))),
        }
    }

    pub fn sign(self) -> f64 {
        match self {
            SourceSign::Absorption => -1.0,
            SourceSign::Source => 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PohozaevReport {
    /// `(N-p)/p A - λN/p B ∓ N ∫G(u)`
    pub lhs: f64,
    /// `-(1 - 1/p) |u'(R)|^p R |∂B_R|`
    pub rhs: f64,
    pub residual: f64,
    pub boundary_slope: f64,
}

/// `u'(R)` by the second-order one-sided difference.
pub fn boundary_slope(u: &RadialFn, grid: &RadialGrid) -> f64 {
    let v = u.values();
    let m = v.len() - 1;
    (3.0 * v[m] - 4.0 * v[m - 1] + v[m - 2]) / (2.0 * grid.step())
}

pub fn pohozaev_residual(
    u: &RadialFn,
    grid: &RadialGrid,
    params: &ProblemParams,
    sign: SourceSign,
) -> Result<PohozaevReport> {
    u.check_grid(grid)?;
    let p = params.p;
    let n = params.dim as f64;
    let term = params.term;
    let m = moments(u, grid, params);
    let primitive = term.gamma * m.sub / (1.0 - term.alpha);
    let lhs = (n - p) / p * m.grad_p - params.lambda * n / p * m.mass_p
        - sign.sign() * n * primitive;
    let slope = boundary_slope(u, grid);
    let r = grid.radius();
    let rhs = -(1.0 - 1.0 / p) * slope.abs().powf(p) * r.powi(params.dim as i32) * grid.sphere_area();
    Ok(PohozaevReport { lhs, rhs, residual: lhs - rhs, boundary_slope: slope })
}

/// One row of a window or feasibility sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepCase {
    pub dim: usize,
    pub p: f64,
    pub alpha: f64,
    pub m1: f64,
    pub m2: f64,
    /// `λ₁` for window sweeps, `λ` for feasibility sweeps.
    pub lambda: f64,
}

pub fn window_sweep(cases: &[SweepCase], exec: Execution) -> Vec<Result<ExistenceWindow>> {
    exec.map(cases, |c| existence_window(c.dim, c.p, c.alpha, c.m1, c.m2, c.lambda))
}

pub fn feasibility_sweep(cases: &[SweepCase], exec: Execution) -> Vec<Result<FeasibilityResult>> {
    exec.map(cases, |c| pohozaev_feasibility(c.dim, c.p, c.alpha, c.m1, c.m2, c.lambda))
}

fn case_cells(c: &SweepCase) -> String {
    format!(
        "{},{},{},{},{},{}",
        c.dim,
        fmt_f64(c.p),
        fmt_f64(c.alpha),
        fmt_f64(c.m1),
        fmt_f64(c.m2),
        fmt_f64(c.lambda)
    )
}

/// `N,p,alpha,m1,m2,lambda1,lambda_lo,lambda_hi,c,error`
pub fn write_window_csv<W: Write>(
    cases: &[SweepCase],
    rows: &[Result<ExistenceWindow>],
    mut out: W,
) -> Result<()> {
    writeln!(out, "N,p,alpha,m1,m2,lambda1,lambda_lo,lambda_hi,c,error")?;
    for (c, r) in cases.iter().zip(rows) {
        match r {
            Ok(w) => writeln!(
                out,
                "{},{},{},{},",
                case_cells(c),
                fmt_f64(w.lambda_lo),
                fmt_f64(w.lambda_hi),
                fmt_f64(w.c)
            )?,
            Err(e) => writeln!(out, "{},,,,{}", case_cells(c), e.kind())?,
        }
    }
    Ok(())
}

/// `N,p,alpha,m1,m2,lambda,beta_lo,beta_hi,feasible,strictness_possible,error`
pub fn write_feasibility_csv<W: Write>(
    cases: &[SweepCase],
    rows: &[Result<FeasibilityResult>],
    mut out: W,
) -> Result<()> {
    writeln!(out, "N,p,alpha,m1,m2,lambda,beta_lo,beta_hi,feasible,strictness_possible,error")?;
    for (c, r) in cases.iter().zip(rows) {
        match r {
            Ok(f) => writeln!(
                out,
                "{},{},{},{},{},",
                case_cells(c),
                fmt_f64(f.beta_lo),
                fmt_f64(f.beta_hi),
                f.feasible,
                f.strictness_possible
            )?,
            Err(e) => writeln!(out, "{},,,,,{}", case_cells(c), e.kind())?,
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::build_grid;
    use crate::params::SingularTerm;

    #[test]
    fn constants_examples() {
        assert!(check_constants(2.0, 0.5, 1.0, 1.0).unwrap());
        assert!(!check_constants(2.0, 0.5, 1.0, 5.0).unwrap());
        assert!(!check_constants(2.0, 0.5, 1.0, 0.5).unwrap());
        assert!(check_constants(1.0, 0.5, 1.0, 1.0).is_err());
        assert!(check_constants(2.0, 1.0, 1.0, 1.0).is_err());
        assert!(check_constants(2.0, 0.5, 0.0, 1.0).is_err());
    }

    #[test]
    fn window_examples() {
        let w = existence_window(2, 2.0, 0.5, 1.0, 1.0, 5.7832).unwrap();
        assert!((w.denominator - 4.0).abs() < 1e-15);
        assert!((w.c - 0.25).abs() < 1e-15);
        assert_eq!(w.lambda_lo, 5.7832);
        assert!((w.lambda_hi - 5.7832 / 0.75).abs() < 1e-12);
        assert!((w.lambda_hi - 7.7109).abs() < 1e-4);

        let w = existence_window(3, 2.0, 0.5, 1.0, 1.0, 9.8696).unwrap();
        assert!((w.denominator - 5.5).abs() < 1e-15);
        assert!((w.c - 2.0 / 11.0).abs() < 1e-15);
        assert!((w.lambda_hi - 12.063).abs() < 1e-3);

        let w = existence_window(2, 2.0, 0.99, 1.0, 1.0, 5.7832).unwrap();
        assert!((w.c - 2.0 * 0.01 / w.denominator).abs() < 1e-15);
        assert!(w.lambda_hi - w.lambda_lo < 0.02 * 5.7832);

        assert!(matches!(
            existence_window(2, 2.0, 0.5, 1.0, 5.0, 5.7832),
            Err(Error::InvalidParams(_))
        ));
        assert!(w.contains(5.79) && !w.contains(5.7832));
    }

    #[test]
    fn feasibility_examples() {
        let f = pohozaev_feasibility(3, 2.0, 0.5, 1.0, 1.0, -1.0).unwrap();
        assert_eq!(f.beta_lo, -0.5);
        assert_eq!(f.beta_hi, -6.0);
        assert!(!f.feasible && !f.strictness_possible);

        let f = pohozaev_feasibility(2, 2.0, 0.5, 1.0, 1.0, 1.0).unwrap();
        assert_eq!(f.beta_lo, 0.0);
        assert_eq!(f.beta_hi, -4.0);
        assert!(!f.feasible);

        let f = pohozaev_feasibility(2, 2.0, 0.5, 1.0, 1.0, 0.0).unwrap();
        assert_eq!((f.beta_lo, f.beta_hi), (0.0, -4.0));
        assert!(!f.feasible);

        assert!(matches!(
            pohozaev_feasibility(2, 1.0, 0.5, 1.0, 1.0, 0.0),
            Err(Error::InvalidParams(_))
        ));
    }

    #[test]
    fn zero_profile_has_zero_residual() {
        let g = build_grid(1.0, 3, 32).unwrap();
        let params =
            ProblemParams::new(3, 2.0, 5.0, 1.0, SingularTerm::new(1.0, 0.5).unwrap()).unwrap();
        let r = pohozaev_residual(&RadialFn::zeros(&g), &g, &params, SourceSign::Absorption).unwrap();
        assert_eq!((r.lhs, r.rhs, r.residual), (0.0, 0.0, 0.0));
    }

    #[test]
    fn source_sign_flips_primitive_term() {
        let g = build_grid(1.0, 2, 64).unwrap();
        let params =
            ProblemParams::new(2, 2.0, 7.0, 1.0, SingularTerm::new(1.0, 0.5).unwrap()).unwrap();
        let u = RadialFn::from_fn(&g, |r| 1.0 - r * r);
        let a = pohozaev_residual(&u, &g, &params, SourceSign::Absorption).unwrap();
        let b = pohozaev_residual(&u, &g, &params, SourceSign::Source).unwrap();
        let c = moments(&u, &g, &params).sub;
        assert!((a.lhs - b.lhs - 2.0 * 2.0 * c / 0.5).abs() < 1e-12);
        assert_eq!(a.rhs, b.rhs);
        assert!(SourceSign::from_sign(0).is_err());
    }
}
