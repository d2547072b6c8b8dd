use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Deserialize;

#[derive(Debug, Parser)]
#[command(name = "plap", version, about = "Radial solver for a singular p-Laplacian eigenvalue problem on a ball")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    #[command(flatten)]
    pub flags: Flags,

    /// JSON file whose keys are long flag names; explicit flags take precedence.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// First Dirichlet eigenvalue of the radial p-Laplacian.
    Eigen,
    /// Ground state by descent on the Nehari manifold.
    Solve,
    /// Lambda interval guaranteeing existence.
    Window,
    /// Feasibility of the beta inequalities behind the nonexistence test.
    Pohozaev,
    /// Pohozaev identity residual of a profile (solved when --profile is absent).
    Residual,
    /// Shooting from the center: a single trajectory with --d, else the boundary-value match.
    Shoot,
    /// Solvability of the shooting problem over a range of radii.
    Sweep,
    /// Fibering map and Nehari projection of a profile.
    Fiber,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Eigen => "eigen",
            Command::Solve => "solve",
            Command::Window => "window",
            Command::Pohozaev => "pohozaev",
            Command::Residual => "residual",
            Command::Shoot => "shoot",
            Command::Sweep => "sweep",
            Command::Fiber => "fiber",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

/// Every option is optional here so that command-line values, config file
/// values and defaults can be layered.
#[derive(Debug, Clone, Default, clap::Args, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct Flags {
    /// Space dimension N (>= 2).
    #[arg(long, global = true)]
    pub dim: Option<usize>,
    /// Exponent p (> 1).
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub p: Option<f64>,
    /// Singularity exponent alpha in (0, 1).
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    /// Coefficient gamma of the singular term.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub gamma: Option<f64>,
    /// Lower growth constant (defaults to gamma).
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub m1: Option<f64>,
    /// Upper growth constant (defaults to gamma).
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub m2: Option<f64>,
    /// Eigenvalue parameter lambda
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub lambda: Option<f64>,
    /// Ball radius R.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub radius: Option<f64>,
    /// Number of grid cells M; nodes are r_0 = 0, ..., r_M = R.
    #[arg(long, global = true)]
    pub nodes: Option<usize>,
    /// Convergence tolerance.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub tol: Option<f64>,
    /// Iteration cap
    #[arg(long, global = true)]
    pub max_iter: Option<usize>,
    /// Initial descent step for solve; integration step for shoot and sweep.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub step: Option<f64>,
    /// Primary output path (standard output when absent).
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Primary output format.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Side CSV path; defaults to --out with a .csv extension.
    #[arg(long, global = true, value_name = "PATH")]
    pub csv_out: Option<PathBuf>,
    /// Input profile CSV with columns r,u.
    #[arg(long, global = true, value_name = "PATH")]
    pub profile: Option<PathBuf>,
    /// -1 for the absorption equation, +1 for the source form.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub source_sign: Option<i32>,
    /// Center value u(0) for a single shooting trajectory.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub d: Option<f64>,
    /// Lower radius of a sweep
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub r_min: Option<f64>,
    /// Upper radius of a sweep, or the integration horizon of shoot --d.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub r_max: Option<f64>,
    /// Number of radii in a sweep
    #[arg(long, global = true)]
    pub r_count: Option<usize>,
    /// Also locate the band edges in sweep.
    #[arg(long, global = true, num_args = 0..=1, default_missing_value = "true")]
    pub edges: Option<bool>,
    /// Number of samples (fibering table, randomized feasibility sweep).
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    /// Seed of the randomized feasibility sweep
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Run sweeps sequentially.
    #[arg(long, global = true, num_args = 0..=1, default_missing_value = "true")]
    pub sequential: Option<bool>,
}

macro_rules! layer {
    ($a:ident, $b:ident; $($f:ident),*) => {
        Flags { $($f: $a.$f.or($b.$f)),* }
    };
}

impl Flags {
    /// Fields set in `self` win over those in `lower`.
    pub fn over(self, lower: Flags) -> Flags {
        layer!(self, lower; dim, p, alpha, gamma, m1, m2, lambda, radius, nodes, tol, max_iter,
            step, out, format, csv_out, profile, source_sign, d, r_min, r_max, r_count, edges,
            samples, seed, sequential)
    }

    pub fn from_config(path: &Path) -> Result<Flags, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        serde_json::from_str(&text).map_err(|e| format!("bad config {}: {e}", path.display()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn explicit_flags_override_config() {
        let cli = Flags { dim: Some(3), ..Default::default() };
        let cfg: Flags = serde_json::from_str(r#"{"dim": 2, "max-iter": 10, "lambda": 7.5}"#).unwrap();
        let f = cli.over(cfg);
        assert_eq!(f.dim, Some(3));
        assert_eq!(f.max_iter, Some(10));
        assert_eq!(f.lambda, Some(7.5));
        assert_eq!(f.p, None);
    }

    #[test]
    fn config_rejects_unknown_keys() {
        assert!(serde_json::from_str::<Flags>(r#"{"dimension": 2}"#).is_err());
    }

    #[test]
    fn flags_after_subcommand() {
        let cli = Cli::try_parse_from(["plap", "solve", "--lambda", "-3", "--nodes", "64"]).unwrap();
        assert_eq!(cli.command, Command::Solve);
        assert_eq!(cli.flags.lambda, Some(-3.0));
        assert_eq!(cli.flags.nodes, Some(64));
    }
}
