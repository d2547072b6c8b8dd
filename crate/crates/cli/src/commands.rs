use std::io::BufReader;

use plap_core::analysis::{
    existence_window, feasibility_sweep, pohozaev_feasibility, pohozaev_residual,
    write_feasibility_csv, SourceSign, SweepCase,
};
use plap_core::eigen::{lambda1_with, EigenOptions, EigenResult};
use plap_core::energy::moments;
use plap_core::nehari::{fiber_energy, fiber_slope, project, projection_scale_bisect};
use plap_core::shooting::{
    band_edges, integrate_ivp, shoot_auto, solvable_band, sweep_radius, write_sweep_csv, ShootTrace,
    BVP_TOL,
};
use plap_core::solver::{initial_guess, solve_with_eigen, validate, SolveOptions, WARN_OUTSIDE_WINDOW};
use plap_core::{Error, Execution, ProblemParams, RadialFn, RadialGrid, Result, SingularTerm};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

use crate::args::{Command, Flags};
use crate::output::Obj;
use crate::{Report, EXIT_NO_CONVERGENCE, EXIT_OK};

pub struct Ctx {
    pub command: Command,
    pub flags: Flags,
}

impl Ctx {
    pub fn new(command: Command, flags: Flags) -> Self {
        Self { command, flags }
    }

    fn dim(&self) -> usize {
        self.flags.dim.unwrap_or(2)
    }
    fn p(&self) -> f64 {
        self.flags.p.unwrap_or(2.0)
    }
    fn alpha(&self) -> f64 {
        self.flags.alpha.unwrap_or(0.5)
    }
    fn gamma(&self) -> f64 {
        self.flags.gamma.unwrap_or(1.0)
    }
    fn m1(&self) -> f64 {
        self.flags.m1.unwrap_or_else(|| self.gamma())
    }
    fn m2(&self) -> f64 {
        self.flags.m2.unwrap_or_else(|| self.gamma())
    }
    fn lambda(&self) -> f64 {
        self.flags.lambda.unwrap_or(7.0)
    }
    fn radius(&self) -> f64 {
        self.flags.radius.unwrap_or(1.0)
    }
    fn nodes(&self) -> usize {
        self.flags.nodes.unwrap_or(512)
    }
    fn exec(&self) -> Execution {
        if self.flags.sequential.unwrap_or(false) {
            Execution::Sequential
        } else {
            Execution::default()
        }
    }

    pub fn params_json(&self) -> Value {
        Obj::new()
            .set("dim", self.dim() as u64)
            .set("p", self.p())
            .set("alpha", self.alpha())
            .set("gamma", self.gamma())
            .set("m1", self.m1())
            .set("m2", self.m2())
            .set("lambda", self.lambda())
            .set("radius", self.radius())
            .into()
    }

    fn params(&self) -> Result<ProblemParams> {
        let term = SingularTerm::new(self.gamma(), self.alpha())?;
        ProblemParams::new(self.dim(), self.p(), self.lambda(), self.radius(), term)
    }

    fn grid(&self) -> Result<RadialGrid> {
        RadialGrid::new(self.radius(), self.dim(), self.nodes())
    }

    fn eigen(&self, grid: &RadialGrid) -> Result<EigenResult> {
        let mut opts = EigenOptions::default();
        if self.command == Command::Eigen {
            opts.tol = self.flags.tol.unwrap_or(opts.tol);
            opts.max_iter = self.flags.max_iter.unwrap_or(opts.max_iter);
        }
        lambda1_with(grid, self.p(), opts)
    }

    /// Profile from `--profile` with the grid its radii describe.
    fn read_profile(&self) -> Result<Option<(RadialGrid, RadialFn)>> {
        let Some(path) = &self.flags.profile else {
            return Ok(None);
        };
        let file = std::fs::File::open(path)?;
        let (radii, u) = RadialFn::read_csv(BufReader::new(file))?;
        if radii.len() < 5 {
            return Err(Error::InvalidProfile("profile needs at least 5 rows".into()));
        }
        let radius = *radii.last().unwrap();
        if let Some(r) = self.flags.radius {
            if (r - radius).abs() > 1e-12 * r {
                return Err(Error::InvalidProfile(format!(
                    "profile ends at r = {radius}, --radius is {r}"
                )));
            }
        }
        let grid = RadialGrid::new(radius, self.dim(), radii.len() - 1)?;
        let tol = 1e-9 * radius;
        if radii.iter().zip(grid.nodes()).any(|(a, b)| (a - b).abs() > tol) {
            return Err(Error::InvalidProfile("radii are not a uniform grid from 0".into()));
        }
        Ok(Some((grid, u)))
    }
}

fn grid_json(g: &RadialGrid) -> Value {
    Obj::new()
        .set("nodes", g.cells() as u64)
        .set("radius", g.radius())
        .set("dim", g.dim() as u64)
        .set("step", g.step())
        .into()
}

fn profile_csv(u: &RadialFn, grid: &RadialGrid) -> Result<String> {
    let mut buf = Vec::new();
    u.write_csv(grid, &mut buf)?;
    Ok(String::from_utf8(buf).expect("ascii"))
}

fn report(grid: Value, result: Obj, diagnostics: Obj) -> Report {
    Report {
        grid,
        result: result.into(),
        diagnostics: diagnostics.into(),
        warnings: Vec::new(),
        table: None,
        exit: EXIT_OK,
    }
}

pub fn dispatch(ctx: &Ctx) -> Result<Report> {
    match ctx.command {
        Command::Eigen => eigen(ctx),
        Command::Solve => solve(ctx),
        Command::Window => window(ctx),
        Command::Pohozaev => pohozaev(ctx),
        Command::Residual => residual(ctx),
        Command::Shoot => shoot(ctx),
        Command::Sweep => sweep(ctx),
        Command::Fiber => fiber(ctx),
    }
}

fn eigen(ctx: &Ctx) -> Result<Report> {
    let grid = ctx.grid()?;
    let eig = ctx.eigen(&grid)?;
    let mut r = report(
        grid_json(&grid),
        Obj::new().set("lambda1", eig.lambda1).set("u0", eig.eigfn.values()[0]),
        Obj::new().set("iterations", eig.iterations as u64).set("residual", eig.residual),
    );
    r.table = Some(profile_csv(&eig.eigfn, &grid)?);
    Ok(r)
}

struct Solved {
    grid: RadialGrid,
    sol: plap_core::solver::Solution,
    report: plap_core::solver::ValidationReport,
    warnings: Vec<String>,
    window: Value,
}

fn run_solver(ctx: &Ctx) -> Result<Solved> {
    let params = ctx.params()?;
    params.validate_variational()?;
    let grid = ctx.grid()?;
    let eig = ctx.eigen(&grid)?;
    let mut opts = SolveOptions::default();
    opts.tol = ctx.flags.tol.unwrap_or(opts.tol);
    opts.max_iter = ctx.flags.max_iter.unwrap_or(opts.max_iter);
    opts.step0 = ctx.flags.step.unwrap_or(opts.step0);
    let sol = solve_with_eigen(&grid, &params, opts, &eig)?;
    let report = validate(&sol, &grid, &params);

    // the window is judged with the configured growth constants
    let mut warnings: Vec<String> =
        sol.warnings.iter().filter(|w| w.as_str() != WARN_OUTSIDE_WINDOW).cloned().collect();
    let window = match existence_window(ctx.dim(), ctx.p(), ctx.alpha(), ctx.m1(), ctx.m2(), eig.lambda1)
    {
        Ok(w) => {
            let inside = w.contains(params.lambda);
            if !inside {
                warnings.push(WARN_OUTSIDE_WINDOW.to_string());
            }
            Obj::new().set("lambda_lo", w.lambda_lo).set("lambda_hi", w.lambda_hi).set("contains", inside)
        }
        Err(e) => {
            warnings.push(format!("no existence window: {e}"));
            Obj::new().set("lambda_lo", eig.lambda1).set("lambda_hi", Value::Null).set("contains", false)
        }
    };
    Ok(Solved { grid, sol, report, warnings, window: window.into() })
}

fn solve(ctx: &Ctx) -> Result<Report> {
    let s = run_solver(ctx)?;
    let sol = &s.sol;
    let v = &s.report;
    let validation = Obj::new()
        .set("positivity", v.positivity)
        .set("no_interior_zero", v.no_interior_zero)
        .set("fibering_max", v.fibering_max)
        .set("on_nehari", v.on_nehari)
        .set("stationary", v.stationary)
        .set("valid", v.valid);
    let result = Obj::new()
        .set("energy", sol.energy)
        .set("u0", sol.u.values()[0])
        .set("positivity_margin", sol.positivity_margin)
        .set("nehari_residual", sol.nehari_residual)
        .set("stationarity_residual", sol.stationarity_residual)
        .set("converged", sol.converged)
        .set("validation", validation)
        .set("window", s.window.clone());
    let diagnostics = Obj::new()
        .set("iterations", sol.iterations as u64)
        .set("lambda1", sol.lambda1)
        .set("tol", sol.tol)
        .set("energy_initial", sol.energy_history[0])
        .set("energy_final", *sol.energy_history.last().unwrap());
    let mut r = report(grid_json(&s.grid), result, diagnostics);
    r.warnings = s.warnings.clone();
    r.table = Some(profile_csv(&sol.u, &s.grid)?);
    if !sol.converged {
        r.exit = EXIT_NO_CONVERGENCE;
    }
    Ok(r)
}

fn window(ctx: &Ctx) -> Result<Report> {
    let grid = ctx.grid()?;
    let eig = ctx.eigen(&grid)?;
    let w = existence_window(ctx.dim(), ctx.p(), ctx.alpha(), ctx.m1(), ctx.m2(), eig.lambda1)?;
    let inside = ctx.flags.lambda.map(|l| Value::Bool(w.contains(l))).unwrap_or(Value::Null);
    Ok(report(
        grid_json(&grid),
        Obj::new()
            .set("lambda1", eig.lambda1)
            .set("lambda_lo", w.lambda_lo)
            .set("lambda_hi", w.lambda_hi)
            .set("c", w.c)
            .set("denominator", w.denominator)
            .set("contains_lambda", inside),
        Obj::new().set("eigen_iterations", eig.iterations as u64),
    ))
}

fn pohozaev(ctx: &Ctx) -> Result<Report> {
    let Some(n) = ctx.flags.samples else {
        let f = pohozaev_feasibility(ctx.dim(), ctx.p(), ctx.alpha(), ctx.m1(), ctx.m2(), ctx.lambda())?;
        return Ok(report(
            Value::Null,
            Obj::new()
                .set("feasible", f.feasible)
                .set("beta_lo", f.beta_lo)
                .set("beta_hi", f.beta_hi)
                .set("strictness_possible", f.strictness_possible),
            Obj::new(),
        ));
    };
    let seed = ctx.flags.seed.unwrap_or(0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cases: Vec<SweepCase> = (0..n)
        .map(|_| {
            let m1 = rng.gen_range(0.1..5.0);
            SweepCase {
                dim: rng.gen_range(2..=6),
                p: rng.gen_range(1.01..5.0),
                alpha: rng.gen_range(0.01..0.99),
                m1,
                m2: m1 * rng.gen_range(1.0..4.0),
                lambda: rng.gen_range(-10.0..10.0),
            }
        })
        .collect();
    let rows = feasibility_sweep(&cases, ctx.exec());
    let feasible = rows.iter().filter(|r| matches!(r, Ok(f) if f.feasible)).count();
    let errors = rows.iter().filter(|r| r.is_err()).count();
    let mut buf = Vec::new();
    write_feasibility_csv(&cases, &rows, &mut buf)?;
    let mut r = report(
        Value::Null,
        Obj::new()
            .set("feasible", feasible > 0)
            .set("cases", n as u64)
            .set("feasible_count", feasible as u64)
            .set("errors", errors as u64),
        Obj::new().set("seed", seed),
    );
    r.table = Some(String::from_utf8(buf).expect("ascii"));
    Ok(r)
}

fn residual(ctx: &Ctx) -> Result<Report> {
    let sign = SourceSign::from_sign(ctx.flags.source_sign.unwrap_or(-1))?;
    let (grid, u, solved) = match ctx.read_profile()? {
        Some((grid, u)) => (grid, u, None),
        None => {
            let s = run_solver(ctx)?;
            let converged = s.sol.converged;
            (s.grid, s.sol.u, Some(converged))
        }
    };
    let params = ctx.params()?.with_radius(grid.radius());
    let rep = pohozaev_residual(&u, &grid, &params, sign)?;
    let scale = rep.lhs.abs().max(rep.rhs.abs()).max(f64::MIN_POSITIVE);
    let mut diagnostics = Obj::new().set("source", if solved.is_some() { "solve" } else { "profile" });
    if let Some(c) = solved {
        diagnostics = diagnostics.set("solve_converged", c);
    }
    let mut r = report(
        grid_json(&grid),
        Obj::new()
            .set("lhs", rep.lhs)
            .set("rhs", rep.rhs)
            .set("residual", rep.residual)
            .set("relative_residual", rep.residual.abs() / scale)
            .set("boundary_slope", rep.boundary_slope)
            .set("source_sign", sign.sign() as i64),
        diagnostics,
    );
    if solved.is_some() {
        r.table = Some(profile_csv(&u, &grid)?);
    }
    Ok(r)
}

fn trace_csv(t: &ShootTrace) -> Result<String> {
    let mut buf = Vec::new();
    t.write_csv(&mut buf)?;
    Ok(String::from_utf8(buf).expect("ascii"))
}

fn shoot(ctx: &Ctx) -> Result<Report> {
    let params = ctx.params()?;
    let step = ctx.flags.step.unwrap_or(1e-4);
    let trace = match ctx.flags.d {
        Some(d) => {
            let r_max = ctx.flags.r_max.unwrap_or(1.5 * params.radius);
            integrate_ivp(d, &params, step, r_max)?
        }
        None => shoot_auto(&params, step)?,
    };
    let matched = trace
        .first_zero
        .is_some_and(|z| (z - params.radius).abs() <= BVP_TOL * params.radius);
    let mut r = report(
        Value::Null,
        Obj::new()
            .set("d", trace.d)
            .opt("first_zero", trace.first_zero)
            .opt("flux_at_zero", trace.flux_at_zero)
            .set("matches_radius", matched),
        Obj::new()
            .set("step", step)
            .set("samples", trace.samples.len() as u64)
            .set("mode", if ctx.flags.d.is_some() { "ivp" } else { "bvp" }),
    );
    r.table = Some(trace_csv(&trace)?);
    Ok(r)
}

fn sweep(ctx: &Ctx) -> Result<Report> {
    let params = ctx.params()?;
    let step = ctx.flags.step.unwrap_or(1e-3);
    let (lo, hi) = (ctx.flags.r_min.unwrap_or(0.2), ctx.flags.r_max.unwrap_or(2.0));
    let count = ctx.flags.r_count.unwrap_or(10);
    if !(lo > 0.0 && hi >= lo && count >= 1) {
        return Err(Error::InvalidParams(format!(
            "sweep needs 0 < r-min <= r-max and r-count >= 1 (got {lo}, {hi}, {count})"
        )));
    }
    let radii: Vec<f64> = if count == 1 {
        vec![lo]
    } else {
        (0..count).map(|k| lo + (hi - lo) * k as f64 / (count - 1) as f64).collect()
    };
    let rows = sweep_radius(&params, &radii, step, ctx.exec());
    let band = match solvable_band(&rows) {
        Some(((a, b), contiguous)) => {
            Obj::new().set("r_lo", a).set("r_hi", b).set("contiguous", contiguous).into()
        }
        None => Value::Null,
    };
    let row_values: Vec<Value> = rows
        .iter()
        .map(|r| {
            Obj::new()
                .set("R", r.radius)
                .set("solvable", r.solvable)
                .opt("d", r.d)
                .opt("flux", r.flux)
                .set("note", r.note.clone().map(Value::from).unwrap_or(Value::Null))
                .into()
        })
        .collect();
    let mut result = Obj::new().set("rows", row_values).set("band", band);
    if ctx.flags.edges.unwrap_or(false) {
        let e = band_edges(&params, step)?;
        result = result.set(
            "edges",
            Obj::new().set("lower", e.lower).set("upper", e.upper).set("touchdown_d", e.touchdown_d),
        );
    }
    let mut buf = Vec::new();
    write_sweep_csv(&rows, &mut buf)?;
    let mut r = report(Value::Null, result, Obj::new().set("step", step));
    if params.p != 2.0 {
        r.warnings.push("p != 2: sweep is exploratory".into());
    }
    r.table = Some(String::from_utf8(buf).expect("ascii"));
    Ok(r)
}

fn fiber(ctx: &Ctx) -> Result<Report> {
    let params = ctx.params()?;
    params.validate_variational()?;
    let (grid, u) = match ctx.read_profile()? {
        Some(pair) => pair,
        None => {
            let grid = ctx.grid()?;
            let eig = ctx.eigen(&grid)?;
            let u = initial_guess(&grid, &params, &eig.eigfn)?;
            (grid, u)
        }
    };
    let params = params.with_radius(grid.radius());
    let proj = project(&u, &grid, &params)?;
    let m = moments(&u, &grid, &params);
    let t_bisect = projection_scale_bisect(&m, &params, 1e-14)?;
    let n = ctx.flags.samples.unwrap_or(50).max(2);
    let peak = fiber_energy(proj.t, &m, &params);
    let slack = 1e-12 * peak.abs().max(1.0);
    let mut table = String::from("s,energy,slope\n");
    let mut is_max = true;
    for k in 0..n {
        let s = proj.t * 10f64.powf(-2.0 + 4.0 * k as f64 / (n - 1) as f64);
        let e = fiber_energy(s, &m, &params);
        is_max &= e <= peak + slack;
        let psi = fiber_slope(s, &m, &params)?;
        table.push_str(&format!(
            "{},{},{}\n",
            plap_core::grid::fmt_f64(s),
            plap_core::grid::fmt_f64(e),
            plap_core::grid::fmt_f64(psi)
        ));
    }
    let mut r = report(
        grid_json(&grid),
        Obj::new()
            .set("t", proj.t)
            .set("t_bisect", t_bisect)
            .set("slope_residual", proj.slope_residual)
            .set("energy_at_t", peak)
            .set("maximum_on_samples", is_max),
        Obj::new()
            .set("grad_p", m.grad_p)
            .set("mass_p", m.mass_p)
            .set("sub", m.sub)
            .set("samples", n as u64),
    );
    r.table = Some(table);
    Ok(r)
}
