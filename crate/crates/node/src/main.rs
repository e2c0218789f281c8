use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use pause_core::crypto::Keypair;
use pause_core::ledger::{save_chain_dir, verify_chain_dir, ChainVerification};
use pause_core::scenario::{replay, run, Scenario};
use pause_node::NodeConfig;
use rand::RngCore;

#[derive(Parser)]
#[command(name = "pause", version, about = "Trusted humanitarian signalling network")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write events.jsonl, picture.geojson, report.md and the report node's ledger.
    Run {
        scenario: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory; defaults to out/<scenario name>.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Verify a ledger directory of block files.
    VerifyLedger { dir: PathBuf },
    /// Ledger tools.
    Ledger {
        #[command(subcommand)]
        command: LedgerCommand,
    },
    /// Re-run the scenario recorded in an event log and compare byte for byte.
    Replay { events: PathBuf },
    /// Run a node daemon.
    Serve {
        #[arg(long)]
        config: PathBuf,
    },
    /// Write a fresh signing key (hex seed) and print its public key.
    Keygen { out: PathBuf },
}

#[derive(Subcommand)]
enum LedgerCommand {
    /// Verify a ledger directory of block files.
    Verify { dir: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(command: Command) -> anyhow::Result<ExitCode> {
    match command {
        Command::Run { scenario, seed, out } => run_scenario(&scenario, seed, out),
        Command::VerifyLedger { dir } | Command::Ledger { command: LedgerCommand::Verify { dir } } => verify(&dir),
        Command::Replay { events } => replay_log(&events),
        Command::Serve { config } => {
            tracing_subscriber::fmt()
                .with_env_filter(
                    tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()),
                )
                .init();
            let config = NodeConfig::load(&config)?;
            tokio::runtime::Runtime::new()?.block_on(pause_node::serve(config))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Keygen { out } => {
            let mut seed = [0u8; 32];
            rand::rngs::OsRng.fill_bytes(&mut seed);
            std::fs::write(&out, hex::encode(seed) + "\n").with_context(|| format!("writing {}", out.display()))?;
            println!("{}", hex::encode(Keypair::from_seed(seed).public().0));
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn run_scenario(path: &Path, seed: Option<u64>, out: Option<PathBuf>) -> anyhow::Result<ExitCode> {
    let scenario = Scenario::load(path)?;
    let outcome = run(&scenario, seed)?;
    let dir = out.unwrap_or_else(|| PathBuf::from("out").join(&scenario.name));
    outcome.write_outputs(&dir)?;
    if let Some(node) = outcome.report_node().and_then(|id| outcome.node(id)) {
        save_chain_dir(&dir.join("ledger"), node.ledger.chain())?;
    }
    let sc = outcome.scenario();
    println!("scenario {} (seed {}): {} log records -> {}", sc.name, sc.seed, outcome.log.lines.len(), dir.display());
    for a in &outcome.assertions {
        println!("  [{}] {}: {}", if a.passed { "pass" } else { "FAIL" }, a.description, a.detail);
    }
    Ok(if outcome.passed() { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

fn verify(dir: &Path) -> anyhow::Result<ExitCode> {
    match verify_chain_dir(dir)? {
        ChainVerification::Ok => {
            let blocks = pause_core::ledger::load_chain_dir(dir)?;
            let head = blocks.last().map_or("-".to_owned(), |b| b.block_hash.to_hex());
            println!("ok: {} blocks, head {head}", blocks.len());
            Ok(ExitCode::SUCCESS)
        }
        ChainVerification::Broken { broken_at, reason } => {
            println!("broken at height {broken_at}: {reason}");
            Ok(ExitCode::FAILURE)
        }
    }
}

fn replay_log(path: &Path) -> anyhow::Result<ExitCode> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let r = replay(&text)?;
    match r.first_difference {
        None => {
            println!("identical: {} records reproduced", r.outcome.log.lines.len());
            Ok(ExitCode::SUCCESS)
        }
        Some(line) => {
            println!("differs from line {line}");
            Ok(ExitCode::FAILURE)
        }
    }
}
