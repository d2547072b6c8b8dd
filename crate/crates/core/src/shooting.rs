//! Shooting oracle for radial solutions.
//!
//! Integrates
//!
//! ```text
//!   u' = sign(w) (|w| / r^{N-1})^{1/(p-1)},
//!   w' = -r^{N-1} (λ u^{p-1} - γ u^{-α}),
//! ```
//!
//! with `w = r^{N-1}|u'|^{p-2}u'`, from `u(0) = d`, `u'(0) = 0` with the
//! classical fourth-order Runge–Kutta scheme, and adjusts `d` by bisection
//! until the first zero of `u` lands on the prescribed radius.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::grid::fmt_f64;
use crate::params::ProblemParams;

/// `|ρ(d) - R| / R` accepted as a boundary-value match.
pub const BVP_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub r: f64,
    pub u: f64,
    pub du: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShootTrace {
    pub d: f64,
    pub samples: Vec<Sample>,
    /// First zero `ρ(d)` of `u`, if reached before `r_max`.
    pub first_zero: Option<f64>,
    /// `u'(ρ)`.
    pub flux_at_zero: Option<f64>,
}

impl ShootTrace {
    /// Cubic Hermite interpolation of `u` from the `(u, u')` samples.
    pub fn interpolate(&self, r: f64) -> Option<f64> {
        let s = &self.samples;
        if s.is_empty() || r < s[0].r || r > s[s.len() - 1].r {
            return None;
        }
        let k = s.partition_point(|x| x.r <= r).clamp(1, s.len() - 1);
        let (a, b) = (s[k - 1], s[k]);
        let h = b.r - a.r;
        if h == 0.0 {
            return Some(a.u);
        }
        let t = (r - a.r) / h;
        let (t2, t3) = (t * t, t * t * t);
        Some(
            (2.0 * t3 - 3.0 * t2 + 1.0) * a.u
                + (t3 - 2.0 * t2 + t) * h * a.du
                + (-2.0 * t3 + 3.0 * t2) * b.u
                + (t3 - t2) * h * b.du,
        )
    }

    /// First zero reached while `u` is still strictly decreasing.
    pub fn descending_zero(&self) -> Option<f64> {
        let z = self.first_zero?;
        self.samples[1..].iter().all(|s| s.du < 0.0).then_some(z)
    }

    /// Writes `r,u,du`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "r,u,du")?;
        for s in &self.samples {
            writeln!(out, "{},{},{}", fmt_f64(s.r), fmt_f64(s.u), fmt_f64(s.du))?;
        }
        Ok(())
    }
}

struct Rhs<'a> {
    params: &'a ProblemParams,
    e: i32,
    inv: f64,
}

impl<'a> Rhs<'a> {
    fn new(params: &'a ProblemParams) -> Self {
        Self { params, e: params.dim as i32 - 1, inv: 1.0 / (params.p - 1.0) }
    }

    fn source(&self, u: f64) -> f64 {
        let t = self.params.term;
        let mut f = self.params.lambda * u.powf(self.params.p - 1.0);
        if !t.is_linear() {
            f -= t.g(u);
        }
        f
    }

    fn du(&self, r: f64, w: f64) -> f64 {
        if w == 0.0 {
            return 0.0;
        }
        w.signum() * (w.abs() / r.powi(self.e)).powf(self.inv)
    }

    /// `None` when `u <= 0`, where the singular term is undefined.
    fn eval(&self, r: f64, u: f64, w: f64) -> Option<(f64, f64)> {
        if u <= 0.0 {
            return None;
        }
        Some((self.du(r, w), -r.powi(self.e) * self.source(u)))
    }

    fn rk4(&self, r: f64, u: f64, w: f64, h: f64) -> Option<(f64, f64)> {
        let (k1u, k1w) = self.eval(r, u, w)?;
        let (k2u, k2w) = self.eval(r + 0.5 * h, u + 0.5 * h * k1u, w + 0.5 * h * k1w)?;
        let (k3u, k3w) = self.eval(r + 0.5 * h, u + 0.5 * h * k2u, w + 0.5 * h * k2w)?;
        let (k4u, k4w) = self.eval(r + h, u + h * k3u, w + h * k3w)?;
        let un = u + h / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
        let wn = w + h / 6.0 * (k1w + 2.0 * k2w + 2.0 * k3w + k4w);
        (un > 0.0).then_some((un, wn))
    }
}

/// Integrates from `u(0) = d` with fixed step `step` until the first zero
/// of `u` or `r_max`.
///
/// Steps whose stages would leave `u > 0` are halved; once the step falls
/// below `1e-13 max(r, 1)` the zero is placed by a linear extrapolation from
/// the last state. A stall (halving exhausted while `u' >= 0`) returns
/// [`Error::IntegrationStall`] with the partial trace.
pub fn integrate_ivp(d: f64, params: &ProblemParams, step: f64, r_max: f64) -> Result<ShootTrace> {
    params.validate()?;
    if !(d > 0.0 && d.is_finite()) {
        return Err(Error::InvalidParams(format!("center value d = {d} must be > 0")));
    }
    if !(step > 0.0 && r_max > 0.0) {
        return Err(Error::InvalidParams("step and r_max must be > 0".into()));
    }
    let rhs = Rhs::new(params);
    let n = params.dim as f64;
    let p = params.p;

    // series start: w ≈ -f(d) r^N / N; steps stay below r/8 until they
    // reach `step`, so the 1/r^{N-1} coefficient is resolved near the center
    let f0 = rhs.source(d);
    let r0 = (1e-3 * step).min(r_max);
    let mut r = r0;
    let mut w = -f0 * r0.powf(n) / n;
    let mut u = d - f0.signum() * (p - 1.0) / p * (f0.abs() / n).powf(1.0 / (p - 1.0))
        * r0.powf(p / (p - 1.0));
    let mut samples = vec![Sample { r: 0.0, u: d, du: 0.0 }];
    if u <= 0.0 {
        return Err(Error::IntegrationStall {
            r: r0,
            trace: Box::new(ShootTrace { d, samples, first_zero: None, flux_at_zero: None }),
        });
    }
    samples.push(Sample { r, u, du: rhs.du(r, w) });

    let mut h = 0.125 * r0;
    while r < r_max {
        h = h.min(r_max - r);
        match rhs.rk4(r, u, w, h) {
            Some((un, wn)) => {
                r += h;
                u = un;
                w = wn;
                samples.push(Sample { r, u, du: rhs.du(r, w) });
                h = (2.0 * h).min(step).min(0.125 * r);
            }
            None if h > 1e-13 * r.max(1.0) => h *= 0.5,
            None => {
                let du = rhs.du(r, w);
                let trace = ShootTrace { d, samples, first_zero: None, flux_at_zero: None };
                if du >= 0.0 {
                    return Err(Error::IntegrationStall { r, trace: Box::new(trace) });
                }
                let rho = r + u / -du;
                let mut trace = trace;
                trace.samples.push(Sample { r: rho, u: 0.0, du });
                trace.first_zero = Some(rho);
                trace.flux_at_zero = Some(du);
                return Ok(trace);
            }
        }
    }
    Ok(ShootTrace { d, samples, first_zero: None, flux_at_zero: None })
}

/// `ρ(d) - R`, with `+∞` when no zero is reached by `1.5 R`.
fn miss(d: f64, params: &ProblemParams, radius: f64, step: f64) -> Result<f64> {
    match integrate_ivp(d, params, step, 1.5 * radius) {
        Ok(t) => Ok(t.first_zero.map_or(f64::INFINITY, |z| z - radius)),
        Err(Error::IntegrationStall { .. }) => Ok(f64::INFINITY),
        Err(e) => Err(e),
    }
}

/// Center value `d` in `d_bracket` whose trajectory first vanishes at
/// `params.radius`, by bisection in `log d`.
pub fn shoot_bvp(params: &ProblemParams, d_bracket: (f64, f64), step: f64) -> Result<ShootTrace> {
    params.validate()?;
    if params.term.is_linear() {
        return Err(Error::DegenerateLinear);
    }
    let radius = params.radius;
    let (mut lo, mut hi) = d_bracket;
    if !(lo > 0.0 && hi > lo) {
        return Err(Error::InvalidParams(format!("bad bracket [{lo}, {hi}]")));
    }
    let no_bracket = Error::NoBracket { lo, hi };
    let mut m_lo = miss(lo, params, radius, step)?;
    let mut m_hi = miss(hi, params, radius, step)?;
    if (m_lo > 0.0) == (m_hi > 0.0) {
        return Err(no_bracket);
    }
    for _ in 0..200 {
        if hi / lo - 1.0 <= 1e-14 {
            break;
        }
        let mid = (lo * hi).sqrt();
        let m = miss(mid, params, radius, step)?;
        if m == 0.0 {
            lo = mid;
            hi = mid;
            m_lo = 0.0;
            m_hi = 0.0;
            break;
        }
        if (m > 0.0) == (m_lo > 0.0) {
            lo = mid;
            m_lo = m;
        } else {
            hi = mid;
            m_hi = m;
        }
    }
    let d = if m_lo.abs() <= m_hi.abs() { lo } else { hi };
    let best = m_lo.abs().min(m_hi.abs());
    if !(best <= BVP_TOL * radius) {
        // the sign change is a jump (touchdown), not a root
        return Err(no_bracket);
    }
    integrate_ivp(d, params, step, 1.5 * radius)
}

/// Log-spaced trial center values around the equilibrium level
/// `(γ/λ)^{1/(p-1+α)}`.
pub fn trial_centers(params: &ProblemParams) -> Vec<f64> {
    let t = params.term;
    let e = 1.0 / (params.p - 1.0 + t.alpha);
    let level = if params.lambda > 0.0 { (t.gamma / params.lambda).powf(e) } else { t.gamma.powf(e) };
    (0..=26).map(|k| 0.1 * level * 4f64.powi(k)).collect()
}

/// Scans [`trial_centers`] for sign changes of `ρ(d) - R` and returns the
/// first one that bisects to a genuine match.
pub fn shoot_auto(params: &ProblemParams, step: f64) -> Result<ShootTrace> {
    params.validate()?;
    if params.term.is_linear() {
        return Err(Error::DegenerateLinear);
    }
    let ds = trial_centers(params);
    let ms = ds
        .iter()
        .map(|&d| miss(d, params, params.radius, step))
        .collect::<Result<Vec<_>>>()?;
    for k in 0..ds.len() - 1 {
        if (ms[k] > 0.0) != (ms[k + 1] > 0.0) {
            match shoot_bvp(params, (ds[k], ds[k + 1]), step) {
                Ok(t) => return Ok(t),
                Err(Error::NoBracket { .. }) => continue,
                Err(e) => return Err(e),
            }
        }
    }
    Err(Error::NoBracket { lo: ds[0], hi: ds[ds.len() - 1] })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub radius: f64,
    pub solvable: bool,
    pub d: Option<f64>,
    pub flux: Option<f64>,
    /// Error kind for unsolvable rows.
    pub note: Option<String>,
}

pub fn sweep_radius(
    params: &ProblemParams,
    radii: &[f64],
    step: f64,
    exec: Execution,
) -> Vec<SweepRow> {
    exec.map(radii, |&radius| {
        let row = |r: Result<ShootTrace>| match r {
            Ok(t) => SweepRow {
                radius,
                solvable: true,
                d: Some(t.d),
                flux: t.flux_at_zero,
                note: None,
            },
            Err(e) => SweepRow {
                radius,
                solvable: false,
                d: None,
                flux: None,
                note: Some(e.kind().to_string()),
            },
        };
        match ProblemParams::new(params.dim, params.p, params.lambda, radius, params.term) {
            Ok(pr) => row(shoot_auto(&pr, step)),
            Err(e) => row(Err(e)),
        }
    })
}

/// `(min R, max R)` of the solvable rows and whether they are contiguous in
/// the table.
pub fn solvable_band(rows: &[SweepRow]) -> Option<((f64, f64), bool)> {
    let idx: Vec<usize> = rows.iter().enumerate().filter(|(_, r)| r.solvable).map(|(i, _)| i).collect();
    let (&first, &last) = (idx.first()?, idx.last()?);
    Some(((rows[first].radius, rows[last].radius), last - first + 1 == idx.len()))
}

/// Writes `R,solvable,d,flux`; empty cells for unsolvable rows.
pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], mut out: W) -> Result<()> {
    writeln!(out, "R,solvable,d,flux")?;
    let opt = |x: Option<f64>| x.map(fmt_f64).unwrap_or_default();
    for r in rows {
        writeln!(out, "{},{},{},{}", fmt_f64(r.radius), r.solvable, opt(r.d), opt(r.flux))?;
    }
    Ok(())
}

/// Estimated radii bounding the positive-solution band for fixed `λ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandEdges {
    /// `lim ρ(d)` as `d → ∞`.
    pub lower: f64,
    /// `ρ(d)` just above the touchdown center value.
    pub upper: f64,
    /// Center value at which the trajectory touches zero with zero slope.
    pub touchdown_d: f64,
}

/// Locates the band edges from the first zero map `d ↦ ρ(d)` restricted to
/// trajectories that decrease all the way to their zero: the lower edge from
/// a very large center value, the upper edge by bisecting the touchdown
/// value between trajectories that reach zero and those that turn back.
pub fn band_edges(params: &ProblemParams, step: f64) -> Result<BandEdges> {
    params.validate()?;
    if params.term.is_linear() {
        return Err(Error::DegenerateLinear);
    }
    let ds = trial_centers(params);
    let horizon = 10.0 * params.radius;
    let rho = |d: f64| -> Result<Option<f64>> {
        match integrate_ivp(d, params, step, horizon) {
            Ok(t) => Ok(t.descending_zero()),
            Err(Error::IntegrationStall { .. }) => Ok(None),
            Err(e) => Err(e),
        }
    };
    let top = *ds.last().unwrap();
    let lower = rho(top)?.ok_or(Error::NoBracket { lo: top, hi: top })?;
    // first trial center whose trajectory reaches zero
    let mut hi = top;
    let mut lo = ds[0];
    for &d in &ds {
        if rho(d)?.is_some() {
            hi = d;
            break;
        }
        lo = d;
    }
    if lo >= hi {
        return Err(Error::NoBracket { lo, hi });
    }
    let mut upper = rho(hi)?.unwrap_or(lower);
    while hi / lo - 1.0 > 1e-12 {
        let mid = (lo * hi).sqrt();
        match rho(mid)? {
            Some(z) => {
                hi = mid;
                upper = z;
            }
            None => lo = mid,
        }
    }
    Ok(BandEdges { lower, upper, touchdown_d: hi })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::SingularTerm;
    use std::f64::consts::PI;

    fn linear(dim: usize, lambda: f64) -> ProblemParams {
        ProblemParams::new(dim, 2.0, lambda, 1.0, SingularTerm::new(0.0, 0.5).unwrap()).unwrap()
    }

    #[test]
    fn spherical_bessel_zero() {
        let p = linear(3, PI * PI);
        for d in [1.0, 2.0] {
            let t = integrate_ivp(d, &p, 1e-4, 2.0).unwrap();
            assert!((t.first_zero.unwrap() - 1.0).abs() < 1e-6, "{:?}", t.first_zero);
        }
        // profile follows sin(πr)/(πr)
        let t = integrate_ivp(1.0, &p, 1e-3, 2.0).unwrap();
        for s in t.samples.iter().step_by(50).skip(1) {
            let exact = (PI * s.r).sin() / (PI * s.r);
            assert!((s.u - exact).abs() < 1e-8, "r={} u={} exact={exact}", s.r, s.u);
        }
    }

    #[test]
    fn rejects_bad_center() {
        let p = linear(3, 1.0);
        assert!(matches!(integrate_ivp(0.0, &p, 1e-3, 1.0), Err(Error::InvalidParams(_))));
    }

    #[test]
    fn linear_bvp_is_degenerate() {
        let p = linear(3, PI * PI);
        assert!(matches!(shoot_bvp(&p, (0.5, 2.0), 1e-3), Err(Error::DegenerateLinear)));
        let rows = sweep_radius(&p, &[0.5, 1.0], 1e-3, Execution::Sequential);
        assert!(rows.iter().all(|r| !r.solvable && r.note.as_deref() == Some("DegenerateLinear")));
    }

    #[test]
    fn empty_sweep() {
        let p = ProblemParams::new(2, 2.0, 7.0, 1.0, SingularTerm::chen(0.5).unwrap()).unwrap();
        assert!(sweep_radius(&p, &[], 1e-3, Execution::default()).is_empty());
    }

    #[test]
    fn constant_sign_bracket() {
        let p = ProblemParams::new(2, 2.0, 7.0, 1.0, SingularTerm::new(1.0, 0.5).unwrap()).unwrap();
        // both centers overshoot: ρ(d) < 1 for large d
        let r = shoot_bvp(&p, (50.0, 100.0), 1e-3);
        assert!(matches!(r, Err(Error::NoBracket { .. })));
    }

    #[test]
    fn hermite_interpolation_is_exact_on_cubics() {
        let f = |r: f64| 1.0 + r - 2.0 * r * r + 0.5 * r * r * r;
        let df = |r: f64| 1.0 - 4.0 * r + 1.5 * r * r;
        let samples = [0.0, 0.3, 0.7, 1.0].iter().map(|&r| Sample { r, u: f(r), du: df(r) }).collect();
        let t = ShootTrace { d: 1.0, samples, first_zero: None, flux_at_zero: None };
        for r in [0.1, 0.5, 0.9, 1.0] {
            assert!((t.interpolate(r).unwrap() - f(r)).abs() < 1e-14);
        }
        assert!(t.interpolate(1.1).is_none());
    }
}
