use std::io;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use stella_cli::{cmd_check, cmd_run, cmd_test, Flags, DEFAULT_FUEL};

/// Typechecker and interpreter for the Stella teaching language.
#[derive(Parser)]
#[command(name = "stella", version)]
struct Cli {
    /// Accept every language construct regardless of `extend with` pragmas.
    #[arg(long, global = true)]
    no_gate: bool,
    /// Print diagnostics as JSON objects on stdout.
    #[arg(long, global = true)]
    json: bool,
    /// Evaluation step limit for `run` and `test`.
    #[arg(long, global = true, default_value_t = DEFAULT_FUEL)]
    fuel: u64,
    /// Print typing judgments to stderr.
    #[arg(long, global = true)]
    trace: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Typecheck a program.
    Check { file: PathBuf },
    /// Typecheck a program and evaluate `main` on an input.
    Run {
        file: PathBuf,
        /// Argument for `main`, as a Stella expression (e.g. `3`).
        #[arg(long)]
        input: String,
    },
    /// Run a conformance corpus.
    Test { dir: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let flags = Flags { no_gate: cli.no_gate, json: cli.json, fuel: cli.fuel, trace: cli.trace };
    let (mut out, mut err) = (io::stdout().lock(), io::stderr().lock());
    let code = match &cli.command {
        Command::Check { file } => cmd_check(file, &flags, &mut out, &mut err),
        Command::Run { file, input } => cmd_run(file, input, &flags, &mut out, &mut err),
        Command::Test { dir } => cmd_test(dir, &flags, &mut out, &mut err),
    };
    ExitCode::from(code as u8)
}
