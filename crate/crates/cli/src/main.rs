use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use solvstruct::expr::{parse, Expr, Symbol};
use solvstruct::pipeline::{Report, Session, Settings, Status};
use solvstruct::problem::{bundled, ProblemFile};
use solvstruct::Error;

/// Solvable structures and differential constraints for evolution PDEs.
#[derive(Parser)]
#[command(name = "solvstruct", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Seed for the zero tests and the residual sampler.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Number of residual samples.
    #[arg(long, global = true)]
    samples: Option<usize>,
    /// Jet truncation level K.
    #[arg(long, global = true)]
    truncation: Option<u32>,
    /// Write the key=value report to this file.
    #[arg(long, global = true)]
    report: Option<PathBuf>,
    /// Decide zero tests by sampling only.
    #[arg(long, global = true)]
    numeric_only: bool,
    /// Set a template integer (`n=5`) or specialize a parameter (`b=0`).
    #[arg(long = "set", global = true, value_name = "NAME=VALUE")]
    set: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Compatibility of the differential constraint.
    CheckConstraint { problem: String },
    /// Bracket conditions and transversality of the symmetry fields.
    CheckStructure { problem: String },
    /// Descent through the first integrals to an explicit solution.
    Reduce { problem: String },
    /// Residuals of a solution read from a report file (`solution.<dep>=…`
    /// lines), or of the reduced solution when no file is given.
    Verify {
        problem: String,
        #[arg(long)]
        chain: Option<PathBuf>,
    },
    /// Every stage in order.
    All { problem: String },
}

impl Command {
    fn problem(&self) -> &str {
        match self {
            Command::CheckConstraint { problem }
            | Command::CheckStructure { problem }
            | Command::Reduce { problem }
            | Command::Verify { problem, .. }
            | Command::All { problem } => problem,
        }
    }
}

fn input_error(file: &str, message: impl Into<String>) -> Error {
    Error::Input {
        file: file.to_string(),
        line: 0,
        column: 0,
        message: message.into(),
    }
}

/// Reads a problem file; names of bundled problems work from any directory.
fn load(name: &str, sets: &[String]) -> Result<ProblemFile, Error> {
    let text = if Path::new(name).exists() {
        std::fs::read_to_string(name).map_err(|e| input_error(name, e.to_string()))?
    } else if let Some(t) = bundled::get(name) {
        t.to_string()
    } else {
        return Err(input_error(name, "no such file or bundled problem"));
    };
    let plain = ProblemFile::parse(name, &text, &[])?;
    let mut templates = Vec::new();
    let mut params = Vec::new();
    for s in sets {
        let (k, v) = s
            .split_once('=')
            .ok_or_else(|| input_error(name, format!("--set {s}: expected NAME=VALUE")))?;
        let (k, v) = (k.trim(), v.trim());
        if plain.options.templates.contains_key(k) {
            let n = v
                .parse()
                .map_err(|_| input_error(name, format!("--set {k}: expected an integer")))?;
            templates.push((k.to_string(), n));
        } else {
            params.push((k, v));
        }
    }
    let mut p = if templates.is_empty() {
        plain
    } else {
        ProblemFile::parse(name, &text, &templates)?
    };
    for (k, v) in params {
        p = p.specialize(k, v)?;
    }
    Ok(p)
}

/// `c3`, `k3`, `k3_2`: names the descent gives level constants.
fn is_level_name(s: &str) -> bool {
    let Some(rest) = s.strip_prefix('c').or_else(|| s.strip_prefix('k')) else {
        return false;
    };
    let (a, b) = rest.split_once('_').unwrap_or((rest, "1"));
    [a, b]
        .iter()
        .all(|p| !p.is_empty() && p.bytes().all(|c| c.is_ascii_digit()))
}

/// `solution.<dep>=expr` lines of a report file, in dependent order.
fn read_solution(path: &Path, session: &Session) -> Result<Vec<Expr>, Error> {
    let file = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|e| input_error(&file, e.to_string()))?;
    let mut table = session.sys.table().clone();
    let mut out = Vec::new();
    for dep in session.problem.dependents.clone() {
        let key = format!("solution.{dep}=");
        let (no, line) = text
            .lines()
            .enumerate()
            .find(|(_, l)| l.starts_with(&key))
            .ok_or_else(|| input_error(&file, format!("no {key} line")))?;
        let src = &line[key.len()..];
        for word in src.split(|c: char| !(c.is_ascii_alphanumeric() || c == '_')) {
            if is_level_name(word) && table.lookup(word).is_none() {
                table.insert(Symbol::level(word));
            }
        }
        let e = parse(src, &table).map_err(|e| Error::Input {
            file: file.clone(),
            line: no + 1,
            column: key.len() + 1,
            message: e.to_string(),
        })?;
        if let Some(s) = e.free_symbols().into_iter().find(|s| s.is_jet()) {
            return Err(Error::Input {
                file: file.clone(),
                line: no + 1,
                column: key.len() + 1,
                message: format!("solution depends on the jet coordinate {s}"),
            });
        }
        out.push(e);
    }
    Ok(out)
}

fn run(cli: &Cli, rep: &mut Report) -> Result<Status, Error> {
    let problem = load(cli.command.problem(), &cli.set)?;
    let settings = Settings {
        truncation: cli.truncation,
        samples: cli.samples,
        seed: cli.seed,
        numeric_only: cli.numeric_only,
    };
    let session = Session::new(&problem, &settings)?;
    match &cli.command {
        Command::CheckConstraint { .. } => session.report_constraint(rep),
        Command::CheckStructure { .. } => session.report_structure(rep),
        Command::Reduce { .. } => Ok(session.report_reduce(rep)?.0),
        Command::Verify {
            chain: Some(path), ..
        } => {
            let sol = read_solution(path, &session)?;
            session.report_verify(&sol, rep)
        }
        Command::Verify { chain: None, .. } => match session.report_reduce(rep)? {
            (_, Some(chain)) => {
                let sol: Vec<Expr> = chain
                    .solution
                    .unwrap_or_default()
                    .into_iter()
                    .map(|(_, e)| e)
                    .collect();
                session.report_verify(&sol, rep)
            }
            (s, None) => Ok(s),
        },
        Command::All { .. } => session.report_all(rep),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut rep = Report::default();
    let status = match run(&cli, &mut rep) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            let s = Status::of_error(&e);
            let mut b = solvstruct::pipeline::Block::new("error");
            b.put("verdict", "error").put("message", &e);
            rep.blocks.push(b);
            s
        }
    };
    for line in &rep.summary {
        println!("{line}");
    }
    if let Some(path) = &cli.report {
        if let Err(e) = std::fs::write(path, rep.to_string()) {
            eprintln!("error: cannot write {}: {e}", path.display());
            return ExitCode::from(Status::InputError.code() as u8);
        }
    }
    ExitCode::from(status.code() as u8)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn level_names() {
        for s in ["c1", "k3", "k3_2", "c12"] {
            assert!(is_level_name(s), "{s}");
        }
        for s in ["c", "k_", "x", "ka", "k3_"] {
            assert!(!is_level_name(s), "{s}");
        }
    }
}
