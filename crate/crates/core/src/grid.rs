//! Uniform radial mesh, `r^{N-1}`-weighted quadrature and nodal profiles.

use std::f64::consts::PI;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Surface measure of the unit sphere in ℝ^N, `2 π^{N/2} / Γ(N/2)`.
pub fn sphere_area(dim: usize) -> f64 {
    2.0 * PI.powf(dim as f64 / 2.0) / half_integer_gamma(dim)
}

/// `Γ(n/2)` for a positive integer `n`.
fn half_integer_gamma(n: usize) -> f64 {
    let (mut x, mut acc) = if n % 2 == 0 { (1.0, 1.0) } else { (0.5, PI.sqrt()) };
    while x < n as f64 / 2.0 {
        acc *= x;
        x += 1.0;
    }
    acc
}

/// Nodes `r_i = i h`, `i = 0..=M`, on `[0, R]`.
///
/// `weights[i]` is the trapezoid weight for `∫_Ω f dx = |S| ∫ f r^{N-1} dr`,
/// `cell_factors[i]` is `|S| m_i^{N-1}` at the midpoint `m_i` of cell
/// `[r_i, r_{i+1}]`, and `dual_volumes[i]` is the measure of the shell
/// `|r - r_i| < h/2` clipped to the ball.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid {
    radius: f64,
    dim: usize,
    h: f64,
    sphere: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    cell_factors: Vec<f64>,
    dual_volumes: Vec<f64>,
}

impl RadialGrid {
    pub fn new(radius: f64, dim: usize, cells: usize) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidGrid(format!("radius = {radius} must be > 0")));
        }
        if cells < 4 {
            return Err(Error::InvalidGrid(format!("M = {cells} must be >= 4")));
        }
        if dim < 2 {
            return Err(Error::InvalidGrid(format!("dim = {dim} must be >= 2")));
        }
        let h = radius / cells as f64;
        let sphere = sphere_area(dim);
        let e = (dim - 1) as i32;
        let nodes: Vec<f64> = (0..=cells).map(|i| i as f64 * h).collect();
        let weights = nodes
            .iter()
            .enumerate()
            .map(|(i, &r)| {
                let end = if i == 0 || i == cells { 0.5 } else { 1.0 };
                sphere * h * end * r.powi(e)
            })
            .collect();
        let cell_factors = (0..cells)
            .map(|i| sphere * ((i as f64 + 0.5) * h).powi(e))
            .collect();
        let nf = dim as f64;
        let dual_volumes = nodes
            .iter()
            .map(|&r| {
                let lo = (r - 0.5 * h).max(0.0);
                let hi = (r + 0.5 * h).min(radius);
                sphere * (hi.powi(dim as i32) - lo.powi(dim as i32)) / nf
            })
            .collect();
        Ok(Self { radius, dim, h, sphere, nodes, weights, cell_factors, dual_volumes })
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Mesh width `h = R / M`.
    pub fn step(&self) -> f64 {
        self.h
    }

    /// Number of cells `M`.
    pub fn cells(&self) -> usize {
        self.nodes.len() - 1
    }

    /// Number of nodes `M + 1`.
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn sphere_area(&self) -> f64 {
        self.sphere
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn cell_factors(&self) -> &[f64] {
        &self.cell_factors
    }

    pub fn dual_volumes(&self) -> &[f64] {
        &self.dual_volumes
    }

    /// Exact ball volume `|S| R^N / N`.
    pub fn ball_volume(&self) -> f64 {
        self.sphere * self.radius.powi(self.dim as i32) / self.dim as f64
    }

    /// Nodal quadrature of `f(r)` against `dx` over the ball.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        self.weights.iter().zip(values).map(|(w, v)| w * v).sum()
    }
}

/// Same as [`RadialGrid::new`].
pub fn build_grid(radius: f64, dim: usize, cells: usize) -> Result<RadialGrid> {
    RadialGrid::new(radius, dim, cells)
}

/// Nodal values `u(r_i)` of a radial function with `u(R) = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialFn {
    values: Vec<f64>,
}

impl RadialFn {
    /// Wraps nodal values; the last one must be exactly zero.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        match values.last() {
            None => Err(Error::InvalidProfile("empty profile".into())),
            Some(&v) if v != 0.0 => {
                Err(Error::InvalidProfile(format!("boundary value {v} is not 0")))
            }
            Some(_) if values.iter().any(|v| !v.is_finite()) => {
                Err(Error::InvalidProfile("non-finite nodal value".into()))
            }
            Some(_) => Ok(Self { values }),
        }
    }

    /// Samples `f` at the grid nodes and pins the boundary value to zero.
    pub fn from_fn(grid: &RadialGrid, f: impl Fn(f64) -> f64) -> Self {
        let mut values: Vec<f64> = grid.nodes().iter().map(|&r| f(r)).collect();
        *values.last_mut().unwrap() = 0.0;
        Self { values }
    }

    pub fn zeros(grid: &RadialGrid) -> Self {
        Self { values: vec![0.0; grid.len()] }
    }

    /// Builds a profile from interior values `u_0..u_{M-1}`.
    pub(crate) fn from_interior(mut interior: Vec<f64>) -> Self {
        interior.push(0.0);
        Self { values: interior }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn check_grid(&self, grid: &RadialGrid) -> Result<()> {
        if self.values.len() != grid.len() {
            return Err(Error::InvalidProfile(format!(
                "profile has {} nodes, grid has {}",
                self.values.len(),
                grid.len()
            )));
        }
        Ok(())
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { values: self.values.iter().map(|v| v * s).collect() }
    }

    pub fn abs(&self) -> Self {
        Self { values: self.values.iter().map(|v| v.abs()).collect() }
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Minimum over the interior nodes `r < R`.
    pub fn interior_min(&self) -> f64 {
        let n = self.values.len() - 1;
        self.values[..n].iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Writes `r,u` with 17 significant digits per value.
    pub fn write_csv<W: Write>(&self, grid: &RadialGrid, mut out: W) -> Result<()> {
        writeln!(out, "r,u")?;
        for (r, u) in grid.nodes().iter().zip(&self.values) {
            writeln!(out, "{},{}", fmt_f64(*r), fmt_f64(*u))?;
        }
        Ok(())
    }

    /// Reads a `r,u` table. Returns the radii alongside the profile.
    pub fn read_csv<R: BufRead>(input: R) -> Result<(Vec<f64>, Self)> {
        let mut radii = Vec::new();
        let mut values = Vec::new();
        for (lineno, line) in input.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || (lineno == 0 && line.starts_with('r')) {
                continue;
            }
            let mut it = line.split(',');
            let parse = |s: Option<&str>| -> Result<f64> {
                s.map(str::trim)
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| Error::InvalidProfile(format!("bad row {}: {line}", lineno + 1)))
            };
            radii.push(parse(it.next())?);
            values.push(parse(it.next())?);
        }
        Ok((radii, Self::new(values)?))
    }
}

/// Fixed 17-significant-digit formatting used by every emitted table.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}
