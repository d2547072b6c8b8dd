//! Scalar parameters of the boundary-value problem
//!
//! ```text
//!   -Δp u = λ |u|^{p-2} u - g(u)   in B_R ⊂ ℝ^N,
//!       u = 0                      on ∂B_R,
//! ```
//!
//! with the singular absorption `g(τ) = γ τ^{-α}`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Power-law singular term `g(τ) = γ τ^{-α}` with `0 < α < 1`.
///
/// `γ = 0` is representable so that the shooting oracle can be checked
/// against linear closed forms; the variational solver rejects it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SingularTerm {
    pub gamma: f64,
    pub alpha: f64,
}

impl SingularTerm {
    pub fn new(gamma: f64, alpha: f64) -> Result<Self> {
        if !(gamma.is_finite() && gamma >= 0.0) {
            return Err(Error::InvalidParams(format!("gamma = {gamma} must be finite and >= 0")));
        }
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidParams(format!("alpha = {alpha} must lie in (0, 1)")));
        }
        Ok(Self { gamma, alpha })
    }

    /// The classical shooting case `g(τ) = τ^{-α} / (1 + α)`.
    pub fn chen(alpha: f64) -> Result<Self> {
        Self::new(1.0 / (1.0 + alpha), alpha)
    }

    #[inline]
    pub fn g(&self, tau: f64) -> f64 {
        self.gamma * tau.powf(-self.alpha)
    }

    /// `G(τ) = ∫₀^τ g = γ τ^{1-α} / (1-α)`.
    #[inline]
    pub fn primitive(&self, tau: f64) -> f64 {
        self.gamma * tau.powf(1.0 - self.alpha) / (1.0 - self.alpha)
    }

    #[inline]
    pub fn derivative(&self, tau: f64) -> f64 {
        -self.alpha * self.gamma * tau.powf(-self.alpha - 1.0)
    }

    /// Constants `(m1, m2)` with `m1 τ^{-α} <= g(τ) <= m2 τ^{-α}`; both equal
    /// `γ` for the pure power law.
    pub fn bounds(&self) -> (f64, f64) {
        (self.gamma, self.gamma)
    }

    /// `H(τ) = G(τ) / τ^p`, strictly decreasing on `τ > 0` whenever `γ > 0`.
    pub fn h_ratio(&self, tau: f64, p: f64) -> f64 {
        self.primitive(tau) / tau.powf(p)
    }

    pub fn is_linear(&self) -> bool {
        self.gamma == 0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProblemParams {
    pub dim: usize,
    pub p: f64,
    pub lambda: f64,
    pub radius: f64,
    pub term: SingularTerm,
}

impl ProblemParams {
    /// Validates the structural invariants shared by every module
    /// (`N >= 2`, `R > 0`, `p > 1`, finite `λ`).
    pub fn new(dim: usize, p: f64, lambda: f64, radius: f64, term: SingularTerm) -> Result<Self> {
        let params = Self { dim, p, lambda, radius, term };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim < 2 {
            return Err(Error::InvalidParams(format!("dim = {} must be >= 2", self.dim)));
        }
        if !(self.p > 1.0 && self.p.is_finite()) {
            return Err(Error::InvalidParams(format!("p = {} must be > 1", self.p)));
        }
        if !self.lambda.is_finite() {
            return Err(Error::InvalidParams("lambda must be finite".into()));
        }
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return Err(Error::InvalidParams(format!("radius = {} must be > 0", self.radius)));
        }
        SingularTerm::new(self.term.gamma, self.term.alpha)?;
        Ok(())
    }

    /// Extra requirements of the variational existence path: `γ > 0`.
    pub fn validate_variational(&self) -> Result<()> {
        self.validate()?;
        if self.term.is_linear() {
            return Err(Error::InvalidParams(
                "gamma = 0 is only accepted by the shooting oracle".into(),
            ));
        }
        Ok(())
    }

    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = lambda;
        self
    }

    pub fn with_radius(mut self, radius: f64) -> Self {
        self.radius = radius;
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn term_rejects_bad_alpha() {
        assert!(SingularTerm::new(1.0, 0.0).is_err());
        assert!(SingularTerm::new(1.0, 1.0).is_err());
        assert!(SingularTerm::new(-1.0, 0.5).is_err());
        assert!(SingularTerm::new(0.0, 0.5).is_ok());
    }

    #[test]
    fn chen_preset() {
        let t = SingularTerm::chen(0.5).unwrap();
        assert!((t.gamma - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn primitive_matches_quadrature_of_g() {
        let t = SingularTerm::new(1.3, 0.4).unwrap();
        // substitution τ = s^2 removes the endpoint singularity
        let x = 0.7_f64;
        let n = 20_000;
        let hs = x.sqrt() / n as f64;
        let mut acc = 0.0;
        for k in 0..n {
            let s = (k as f64 + 0.5) * hs;
            acc += t.g(s * s) * 2.0 * s * hs;
        }
        assert!((acc - t.primitive(x)).abs() < 1e-5 * t.primitive(x));
    }

    #[test]
    fn derivative_negative_and_consistent() {
        let t = SingularTerm::new(2.0, 0.5).unwrap();
        for &x in &[0.01, 0.3, 1.0, 7.0] {
            let e = 1e-6 * x;
            let fd = (t.g(x + e) - t.g(x - e)) / (2.0 * e);
            assert!(t.derivative(x) < 0.0);
            assert!((fd - t.derivative(x)).abs() <= 1e-6 * t.derivative(x).abs());
        }
    }

    #[test]
    fn bounds_are_tight() {
        let t = SingularTerm::new(0.8, 0.3).unwrap();
        let (m1, m2) = t.bounds();
        for &x in &[1e-3_f64, 0.5, 2.0, 40.0] {
            let base = x.powf(-t.alpha);
            assert!(m1 * base <= t.g(x) * (1.0 + 1e-15));
            assert!(t.g(x) <= m2 * base * (1.0 + 1e-15));
        }
    }

    #[test]
    fn params_validation() {
        let term = SingularTerm::new(1.0, 0.5).unwrap();
        assert!(ProblemParams::new(1, 2.0, 7.0, 1.0, term).is_err());
        assert!(ProblemParams::new(2, 1.0, 7.0, 1.0, term).is_err());
        assert!(ProblemParams::new(2, 2.0, 7.0, 0.0, term).is_err());
        let lin = SingularTerm::new(0.0, 0.5).unwrap();
        let p = ProblemParams::new(3, 2.0, 9.0, 1.0, lin).unwrap();
        assert!(p.validate_variational().is_err());
    }
}
