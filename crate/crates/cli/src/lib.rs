//! Front end for `plap-core`: flag/config layering, dispatch, and
//! deterministic JSON and CSV output.

pub mod args;
mod commands;
pub mod output;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::Parser;
use plap_core::Error;
use serde_json::Value;

use crate::args::{Cli, Command, Flags, Format};
use crate::output::{to_json, Obj};

/// Everything a command produces besides the envelope fields.
pub struct Report {
    pub grid: Value,
    pub result: Value,
    pub diagnostics: Value,
    pub warnings: Vec<String>,
    /// CSV table (profile, trace, sweep rows, fibering samples).
    pub table: Option<String>,
    pub exit: i32,
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_NO_CONVERGENCE: i32 = 3;

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::NoConvergence { .. } | Error::NoBracket { .. } | Error::IntegrationStall { .. } => {
            EXIT_NO_CONVERGENCE
        }
        Error::Io(_) => EXIT_IO,
        _ => EXIT_INVALID,
    }
}

/// Parses `argv`, runs the command and writes its artifacts. Returns the
/// process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let command = cli.command;
    let flags = match &cli.config {
        Some(path) => match Flags::from_config(path) {
            Ok(cfg) => cli.flags.over(cfg),
            Err(msg) => {
                let err = Error::InvalidParams(msg);
                return emit_error(command, &err, cli.flags.out.as_deref());
            }
        },
        None => cli.flags,
    };
    let ctx = commands::Ctx::new(command, flags);
    match commands::dispatch(&ctx) {
        Ok(report) => match emit(&ctx, report) {
            Ok(code) => code,
            Err(e) => emit_error(command, &e, None),
        },
        Err(e) => emit_error(command, &e, ctx.flags.out.as_deref()),
    }
}

fn write_target(path: Option<&Path>, text: &str) -> std::io::Result<()> {
    match path {
        Some(p) => std::fs::write(p, text),
        None => std::io::stdout().lock().write_all(text.as_bytes()),
    }
}

/// Side table path: `--csv-out`, else `--out` with a `.csv` extension.
fn side_path(flags: &Flags) -> Option<PathBuf> {
    if let Some(p) = &flags.csv_out {
        return Some(p.clone());
    }
    let out = flags.out.as_ref()?;
    let side = out.with_extension("csv");
    if &side == out {
        let mut s = out.clone().into_os_string();
        s.push(".table.csv");
        Some(PathBuf::from(s))
    } else {
        Some(side)
    }
}

fn emit(ctx: &commands::Ctx, report: Report) -> Result<i32, Error> {
    let flags = &ctx.flags;
    match flags.format.unwrap_or(Format::Json) {
        Format::Json => {
            let doc: Value = Obj::new()
                .set("command", ctx.command.name())
                .set("params", ctx.params_json())
                .set("grid", report.grid)
                .set("result", report.result)
                .set("diagnostics", report.diagnostics)
                .set("warnings", report.warnings)
                .set("version", plap_core::VERSION)
                .into();
            write_target(flags.out.as_deref(), &to_json(&doc))?;
            if let (Some(table), Some(path)) = (&report.table, side_path(flags)) {
                std::fs::write(path, table)?;
            }
        }
        Format::Csv => {
            let text = match report.table {
                Some(t) => t,
                None => key_value_csv(&report.result),
            };
            write_target(flags.out.as_deref(), &text)?;
        }
    }
    Ok(report.exit)
}

/// `key,value` rows for the scalar members of a result object.
fn key_value_csv(result: &Value) -> String {
    let mut s = String::from("key,value\n");
    if let Some(map) = result.as_object() {
        for (k, v) in map {
            let cell = match v {
                Value::Number(n) if n.is_f64() => plap_core::grid::fmt_f64(n.as_f64().unwrap()),
                Value::Number(n) => n.to_string(),
                Value::Bool(b) => b.to_string(),
                Value::String(t) => t.clone(),
                Value::Null => String::new(),
                _ => continue,
            };
            s.push_str(&format!("{k},{cell}\n"));
        }
    }
    s
}

fn emit_error(command: Command, e: &Error, out: Option<&Path>) -> i32 {
    let doc: Value = Obj::new()
        .set("command", command.name())
        .set("error", Obj::new().set("kind", e.kind()).set("message", e.to_string()))
        .set("version", plap_core::VERSION)
        .into();
    eprintln!("error: {e}");
    if write_target(out, &to_json(&doc)).is_err() {
        let _ = write_target(None, &to_json(&doc));
    }
    exit_code(e)
}
