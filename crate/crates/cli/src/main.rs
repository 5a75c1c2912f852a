mod args;
mod commands;
mod config;
mod output;

use std::fmt;
use std::process::ExitCode;

use clap::Parser;
use serde_json::json;

use args::{Cli, Command};
use commands::Ctx;
use config::Resolver;

/// Error reported as a JSON object on stderr.
#[derive(Debug)]
pub struct Failure {
    kind: String,
    message: String,
}

impl Failure {
    pub fn new(kind: &str, message: impl Into<String>) -> Self {
        Failure { kind: kind.to_string(), message: message.into() }
    }

    pub fn usage(message: impl Into<String>) -> Self {
        Failure::new("usage", message)
    }

    pub fn config(message: impl Into<String>) -> Self {
        Failure::new("config", message)
    }

    fn exit_code(&self) -> u8 {
        if self.kind == "usage" || self.kind == "config" {
            2
        } else {
            1
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.kind, self.message)
    }
}

impl From<treesearch::Error> for Failure {
    fn from(e: treesearch::Error) -> Self {
        Failure::new(e.kind(), e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::new("io", e.to_string())
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let workers = cli.workers.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    if workers == 0 {
        return Err(Failure::usage("--workers must be at least 1"));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build_global()
        .map_err(|e| Failure::new("runtime", e.to_string()))?;

    let file = match &cli.config {
        Some(path) => config::load_config(path)?,
        None => Default::default(),
    };
    let mut ctx = Ctx { format: cli.format, out: cli.out.is_some(), res: Resolver::new(file) };
    ctx.res.record("command", cli.command.name());
    let docs = match &cli.command {
        Command::Reduce(a) => commands::reduce(&mut ctx, a)?,
        Command::Evolve(a) => commands::evolve(&mut ctx, a)?,
        Command::Sweep(a) => commands::sweep(&mut ctx, a)?,
        Command::Scaling(a) => commands::scaling(&mut ctx, a)?,
        Command::Classical(a) => commands::classical(&mut ctx, a)?,
        Command::Centrality(a) => commands::centrality(&mut ctx, a)?,
        Command::Analytic(a) => commands::analytic(&mut ctx, a)?,
    };
    output::emit(&docs, cli.out.as_deref())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let msg = e.render().to_string();
            let first = msg.lines().next().unwrap_or("").trim_start_matches("error: ").to_string();
            return report(&Failure::usage(first));
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => report(&f),
    }
}

fn report(f: &Failure) -> ExitCode {
    eprintln!("{}", json!({ "error": { "kind": f.kind, "message": f.message } }));
    ExitCode::from(f.exit_code())
}
