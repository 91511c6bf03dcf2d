use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use bondgraph_core::document::{parse_document, serialize};
use bondgraph_core::fixtures;
use bondgraph_core::model::{Arena, NodeId};
use bondgraph_core::reduce::{constitutive_relations, ReduceError};
use bondgraph_core::sim::{self, SimError};
use clap::{Parser, Subcommand};

const USAGE: u8 = 1;
const MODEL: u8 = 2;
const NUMERIC: u8 = 3;

/// Bond graph models: validate, reduce and simulate.
#[derive(Parser)]
#[command(name = "bondgraph", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a model document for structural problems.
    Validate { file: PathBuf },
    /// Print the reduced constitutive relations, one per line.
    Relations { file: PathBuf },
    /// Integrate a model and write a CSV trajectory.
    Simulate {
        file: PathBuf,
        /// Initial state, comma separated.
        #[arg(long, allow_hyphen_values = true)]
        x0: String,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        t0: f64,
        #[arg(long, allow_hyphen_values = true)]
        t1: f64,
        #[arg(long)]
        dt: f64,
        /// Expression in `t` for each control, in order.
        #[arg(long = "control", allow_hyphen_values = true)]
        controls: Vec<String>,
        /// Output path; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print a built-in example model as a document.
    Example { name: String },
}

struct Failure {
    code: u8,
    message: String,
}

fn fail(code: u8, message: impl ToString) -> Failure {
    Failure {
        code,
        message: message.to_string(),
    }
}

fn load(path: &Path) -> Result<(Arena, NodeId), Failure> {
    let text = fs::read_to_string(path).map_err(|e| fail(USAGE, format!("{}: {e}", path.display())))?;
    parse_document(&text).map_err(|e| fail(MODEL, format!("{}: {e}", path.display())))
}

fn sim_code(e: &SimError) -> u8 {
    match e {
        SimError::Step(_)
        | SimError::Timespan { .. }
        | SimError::Dimension { .. }
        | SimError::ControlArity { .. }
        | SimError::ControlSyntax { .. }
        | SimError::ControlNotTimeOnly { .. } => USAGE,
        SimError::Inconsistent { .. } | SimError::Divergence { .. } | SimError::Domain { .. } => NUMERIC,
        _ => MODEL,
    }
}

fn reduce_code(e: &ReduceError) -> u8 {
    match e {
        ReduceError::Expr(_) => NUMERIC,
        _ => MODEL,
    }
}

fn parse_vector(text: &str) -> Result<Vec<f64>, Failure> {
    if text.trim().is_empty() {
        return Ok(Vec::new());
    }
    text.split(',')
        .map(|v| v.trim().parse::<f64>().map_err(|_| fail(USAGE, format!("--x0: `{v}` is not a number"))))
        .collect()
}

fn run(command: Command) -> Result<(), Failure> {
    let mut stdout = io::stdout().lock();
    let io_err = |e: io::Error| fail(USAGE, e);
    match command {
        Command::Validate { file } => {
            let (arena, root) = load(&file)?;
            let diagnostics = arena.validate(root);
            if !diagnostics.is_empty() {
                let lines: Vec<String> = diagnostics.iter().map(ToString::to_string).collect();
                return Err(fail(MODEL, lines.join("\n")));
            }
            constitutive_relations(&arena, root).map_err(|e| fail(reduce_code(&e), e))?;
            writeln!(stdout, "ok").map_err(io_err)?;
        }
        Command::Relations { file } => {
            let (arena, root) = load(&file)?;
            let relations = constitutive_relations(&arena, root).map_err(|e| fail(reduce_code(&e), e))?;
            for r in relations {
                writeln!(stdout, "{r}").map_err(io_err)?;
            }
        }
        Command::Simulate {
            file,
            x0,
            t0,
            t1,
            dt,
            controls,
            out,
        } => {
            let x0 = parse_vector(&x0)?;
            let (arena, root) = load(&file)?;
            let traj = sim::simulate(&arena, root, &x0, (t0, t1), dt, &controls).map_err(|e| fail(sim_code(&e), e))?;
            match out {
                Some(path) => {
                    let mut f = io::BufWriter::new(
                        fs::File::create(&path).map_err(|e| fail(USAGE, format!("{}: {e}", path.display())))?,
                    );
                    sim::write_csv(&traj, &mut f).and_then(|_| f.flush()).map_err(io_err)?;
                }
                None => sim::write_csv(&traj, &mut stdout).map_err(io_err)?,
            }
            eprintln!("steps {}, newton iterations {}", traj.t.len() - 1, traj.iterations);
        }
        Command::Example { name } => {
            let Some((arena, root)) = fixtures::build(&name) else {
                return Err(fail(
                    USAGE,
                    format!("unknown example `{name}`; expected one of: {}", fixtures::NAMES.join(", ")),
                ));
            };
            write!(stdout, "{}", serialize(&arena, root)).map_err(io_err)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { USAGE } else { 0 });
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
