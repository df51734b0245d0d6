use std::io::{self, BufWriter};
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Duration;

use clap::{Parser, Subcommand};

use domineering_cli::commands::{self, DeriveArgs, PlayArgs, SolveArgs, ValueArgs};
use domineering_cli::engine::Engine;
use domineering_cli::server::{router, AppState};

#[derive(Parser)]
#[command(name = "domineering", version, about = "Who wins at Domineering, and how")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Search one board.
    Solve(SolveArgs),
    /// Canonical value of an empty board.
    Value(ValueArgs),
    /// Saturate the seeds and print an atlas, a trace or the whole base.
    Derive(DeriveArgs),
    /// Play against the engine.
    Play(PlayArgs),
    /// Serve the HTTP API.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        /// Knowledge-base file; sessions are kept beside it.
        #[arg(long)]
        kb: Option<PathBuf>,
        /// Seconds allowed per engine move.
        #[arg(long, default_value_t = 5)]
        budget: u64,
    },
}

fn load(kb: &Option<PathBuf>) -> anyhow::Result<Engine> {
    match kb {
        Some(path) => Engine::load(path),
        None => Engine::standard(),
    }
}

fn main() -> std::process::ExitCode {
    match run() {
        Ok(()) => std::process::ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            std::process::ExitCode::FAILURE
        }
    }
}

fn run() -> anyhow::Result<()> {
    let cli = Cli::parse();
    let mut stdout = BufWriter::new(io::stdout().lock());
    match cli.command {
        Command::Solve(a) => commands::solve(&a, &mut stdout),
        Command::Value(a) => commands::value_cmd(&a, &mut stdout),
        Command::Derive(a) => commands::derive(&a, &mut stdout),
        Command::Play(a) => {
            let engine = load(&a.kb)?;
            let mut input = io::stdin().lock();
            commands::play(&engine, &a, &mut input, &mut stdout).map(|_| ())
        }
        Command::Serve { port, kb, budget } => {
            let engine = load(&kb)?;
            let sidecar = kb.map(|p| p.with_extension("sessions.json"));
            let state = AppState::new(Arc::new(engine), sidecar, Duration::from_secs(budget))?;
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(async move {
                let listener = tokio::net::TcpListener::bind(("0.0.0.0", port)).await?;
                eprintln!("listening on {}", listener.local_addr()?);
                axum::serve(listener, router(Arc::new(state))).await?;
                anyhow::Ok(())
            })
        }
    }
}
