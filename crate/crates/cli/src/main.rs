//! `spectral`: read a curve spec, run the requested commands, write a JSON
//! report. Exit codes: 0 all checks pass, 1 a check failed, 2 the spec or
//! the flags are invalid, 3 a computation could not be carried out.

mod pipeline;
mod spec;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use spectral_core::ring::{ComplexFloat, Surd};

use pipeline::{Failure, Outcome};
use spec::{Command, Field, Overrides, SpecError};

const CHECK_FAILURE: u8 = 1;
const SPEC_ERROR: u8 = 2;
const COMPUTE_ERROR: u8 = 3;

#[derive(Debug, Parser)]
#[command(name = "spectral", version, about = "Topological recursion invariants and their intersection-number formula")]
struct Args {
    /// Curve spec (JSON).
    spec: PathBuf,
    /// Commands to run; defaults to the spec's `commands`.
    #[arg(value_enum)]
    commands: Vec<Command>,
    /// Targets as `g,n` pairs separated by `;`, replacing the spec's.
    #[arg(long)]
    targets: Option<String>,
    /// Orders as `bergman=N,times=M,chart=C`, overriding the spec's.
    #[arg(long)]
    orders: Option<String>,
    /// Field: rational, quadratic:m, surd or float:bits.
    #[arg(long)]
    field: Option<String>,
    /// Worker threads; changes timing only.
    #[arg(long)]
    threads: Option<usize>,
    /// Report path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn load(args: &Args) -> Result<spec::Resolved, SpecError> {
    let text = std::fs::read_to_string(&args.spec)
        .map_err(|e| SpecError(format!("cannot read {}: {e}", args.spec.display())))?;
    let file = spec::parse_file(&text)?;
    let over = Overrides {
        field: args.field.clone(),
        orders: args.orders.as_deref().map(spec::parse_orders).transpose()?,
        targets: args.targets.as_deref().map(spec::parse_targets).transpose()?,
        commands: args.commands.clone(),
    };
    spec::resolve(file, over)
}

fn execute(spec: &spec::Resolved) -> Result<Outcome, Failure> {
    match spec.field {
        Field::Float(_) => pipeline::run::<ComplexFloat>(spec),
        _ => pipeline::run::<Surd>(spec),
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    let spec = match load(&args) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("spectral: spec error: {e}");
            return ExitCode::from(SPEC_ERROR);
        }
    };
    if let Some(n) = args.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("spectral: cannot start {n} threads: {e}");
            return ExitCode::from(COMPUTE_ERROR);
        }
    }
    let outcome = match execute(&spec) {
        Ok(o) => o,
        Err(Failure::Spec(e)) => {
            eprintln!("spectral: spec error: {e}");
            return ExitCode::from(SPEC_ERROR);
        }
        Err(Failure::Compute { section, message }) => {
            eprintln!("spectral: compute error in {section}: {message}");
            return ExitCode::from(COMPUTE_ERROR);
        }
    };
    let json = outcome.report.to_json();
    let written = match &args.out {
        Some(p) => std::fs::write(p, json).map_err(|e| format!("cannot write {}: {e}", p.display())),
        None => {
            print!("{json}");
            Ok(())
        }
    };
    if let Err(e) = written {
        eprintln!("spectral: {e}");
        return ExitCode::from(COMPUTE_ERROR);
    }
    match outcome.first_failure {
        Some(section) => {
            eprintln!("spectral: check failed in section {section}");
            ExitCode::from(CHECK_FAILURE)
        }
        None => ExitCode::SUCCESS,
    }
}
