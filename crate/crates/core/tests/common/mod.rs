//! Independent oracles shared by the integration tests and the acceptance
//! binary. Nothing here calls into the discretization beyond `energy`.
#![allow(dead_code)]

use std::f64::consts::PI;

use plap_core::energy::energy;
use plap_core::{ProblemParams, RadialFn, RadialGrid, SingularTerm};
use rand::Rng;

/// First zero of `J_0`.
pub const J01: f64 = 2.404_825_557_695_773;
/// First zero of `J_1`.
pub const J11: f64 = 3.831_705_970_207_512_5;

/// First Dirichlet zero of the radial Laplacian eigenfunction
/// `r^{1-N/2} J_{N/2-1}` on the unit ball.
pub fn bessel_zero(dim: usize) -> f64 {
    match dim {
        2 => J01,
        3 => PI,
        4 => J11,
        _ => panic!("no tabulated zero for N = {dim}"),
    }
}

/// `∫₀¹ (1-x)^q x^{n-1} dx = (n-1)! / ((q+1)(q+2)...(q+n))`.
pub fn beta_int(n: usize, q: f64) -> f64 {
    let mut v = 1.0;
    for k in 1..n {
        v *= k as f64;
    }
    for k in 1..=n {
        v /= q + k as f64;
    }
    v
}

pub fn sphere_area(dim: usize) -> f64 {
    match dim {
        2 => 2.0 * PI,
        3 => 4.0 * PI,
        4 => 2.0 * PI * PI,
        5 => 8.0 * PI * PI / 3.0,
        6 => PI * PI * PI,
        _ => panic!("unsupported N = {dim}"),
    }
}

/// Central finite differences of `energy` in each free nodal value.
pub fn fd_gradient(u: &RadialFn, grid: &RadialGrid, params: &ProblemParams, h: f64) -> Vec<f64> {
    let n = grid.cells();
    (0..n)
        .map(|j| {
            let mut plus = u.values().to_vec();
            let mut minus = u.values().to_vec();
            plus[j] += h;
            minus[j] -= h;
            let ep = energy(&RadialFn::new(plus).unwrap(), grid, params);
            let em = energy(&RadialFn::new(minus).unwrap(), grid, params);
            (ep - em) / (2.0 * h)
        })
        .collect()
}

/// Positive interior values: a random smooth bump with multiplicative noise.
pub fn random_profile<R: Rng>(rng: &mut R, grid: &RadialGrid) -> RadialFn {
    let radius = grid.radius();
    let a = rng.gen_range(0.3..2.0);
    let k = rng.gen_range(0.5..3.0);
    let b = rng.gen_range(0.0..0.4);
    let noise = rng.gen_range(0.0..0.2);
    let mut vals: Vec<f64> = grid
        .nodes()
        .iter()
        .map(|&r| {
            let x = r / radius;
            let base = a * (1.0 - x * x) * (1.0 + b * (k * PI * x).cos());
            base * (1.0 + noise * rng.gen_range(-1.0..1.0))
        })
        .collect();
    *vals.last_mut().unwrap() = 0.0;
    RadialFn::new(vals).unwrap()
}

pub fn baseline_params(lambda: f64) -> ProblemParams {
    ProblemParams::new(2, 2.0, lambda, 1.0, SingularTerm::new(1.0, 0.5).unwrap()).unwrap()
}

pub fn chen_params() -> ProblemParams {
    ProblemParams::new(2, 2.0, 7.0, 1.0, SingularTerm::chen(0.5).unwrap()).unwrap()
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}
