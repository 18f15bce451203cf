use std::io::{BufRead, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use qrhl_cli::commands::{self, Outcome, Suite};
use qrhl_cli::repl::{Repl, Reply};
use qrhl_cli::{service, Limits};

#[derive(Parser)]
#[command(name = "qrhl", version, about = "Proof checker and simulator for quantum relational Hoare logic")]
struct Cli {
    #[command(flatten)]
    limits: Limits,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Replay a proof script; exit 0 iff every proof is closed
    Check { path: PathBuf },
    /// Interactive prover reading commands from standard input
    Repl,
    /// JSON session service on the loopback interface
    Serve {
        #[arg(long, env = "QRHL_PORT", default_value_t = 8091)]
        port: u16,
    },
    /// Run a program of a script and print the resulting distribution
    Sim {
        path: PathBuf,
        /// Name of a declared program, or program text
        #[arg(long)]
        program: String,
        /// Name of an `init` declaration; defaults to the all-zero state
        #[arg(long)]
        init: Option<String>,
        /// Boolean expression whose final probability is printed
        #[arg(long = "pr")]
        queries: Vec<String>,
    },
    /// Run a randomized oracle suite
    Oracle {
        #[arg(long, value_enum)]
        suite: Suite,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        trials: usize,
    },
}

fn finish(o: Outcome) -> ExitCode {
    print!("{}", o.stdout);
    if !o.stderr.is_empty() {
        eprintln!("{}", o.stderr);
    }
    ExitCode::from(o.code as u8)
}

fn repl(limits: Limits) -> ExitCode {
    let mut r = Repl::new(limits.settings());
    let stdin = std::io::stdin();
    let mut out = std::io::stdout();
    let mut prompt = "qrhl> ";
    loop {
        print!("{prompt}");
        let _ = out.flush();
        let mut line = String::new();
        match stdin.lock().read_line(&mut line) {
            Ok(0) => return ExitCode::SUCCESS,
            Ok(_) => {}
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
        }
        prompt = match r.feed(&line) {
            Reply::More => "  ... ",
            Reply::Output(text) => {
                println!("{text}");
                "qrhl> "
            }
            Reply::Quit => return ExitCode::SUCCESS,
        };
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let settings = cli.limits.settings();
    match cli.cmd {
        Cmd::Check { path } => finish(commands::check(&path, settings)),
        Cmd::Repl => repl(cli.limits),
        Cmd::Serve { port } => {
            let rt = match tokio::runtime::Runtime::new() {
                Ok(rt) => rt,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(2);
                }
            };
            match rt.block_on(service::serve(port, settings)) {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(2)
                }
            }
        }
        Cmd::Sim { path, program, init, queries } => {
            finish(commands::sim(&path, &program, init.as_deref(), &queries, settings))
        }
        Cmd::Oracle { suite, seed, trials } => finish(commands::oracle(suite, seed, trials)),
    }
}
