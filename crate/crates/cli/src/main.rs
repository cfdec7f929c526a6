use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result, bail};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::Value;

use dci_core::harness::{FuzzParams, Population, fuzz_termination, replay_file, run_scenario};
use dci_core::packet::validate_document;
use dci_core::parse_move;
use dci_core::session::{SessionConfig, effective_bound, per_depth_caps, termination_bound};

// Writes to stdout, ignoring a closed pipe.
macro_rules! out {
    ($($t:tt)*) => {{
        use std::io::Write as _;
        let _ = writeln!(std::io::stdout(), $($t)*);
    }};
}

#[derive(Parser)]
#[command(name = "dci", version, about = "Run, fuzz and replay deliberation sessions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Auto,
    Move,
    Packet,
}

#[derive(Clone, Copy, ValueEnum)]
enum Pop {
    Mixed,
    Adversarial,
    Cooperative,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file and print its decision packet.
    Run {
        scenario: PathBuf,
        /// Where to write the JSONL event log.
        #[arg(long)]
        log: Option<PathBuf>,
        /// Base address for delegates with a remote endpoint.
        #[arg(long, env = "DCI_REMOTE_ENDPOINT")]
        remote: Option<String>,
    },
    /// Fuzz session termination and print the report.
    Fuzz {
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value_t = 1000)]
        runs: u64,
        #[arg(long, value_enum, default_value = "mixed")]
        population: Pop,
        /// Round budget range, e.g. 1-4.
        #[arg(long, value_parser = range_u32, default_value = "1-4")]
        max_rounds: (u32, u32),
        #[arg(long, value_parser = range_u32, default_value = "0-3")]
        max_depth: (u32, u32),
        #[arg(long, value_parser = range_u32, default_value = "5-50")]
        ceiling: (u32, u32),
    },
    /// Replay a JSONL event log and check it reproduces its packet.
    Replay { log: PathBuf },
    /// Check a move or packet document.
    Validate {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "auto")]
        kind: Kind,
    },
    /// Print the worst-case round count for a session config.
    Bound {
        #[arg(long)]
        config: PathBuf,
    },
}

fn range_u32(s: &str) -> Result<(u32, u32), String> {
    let (lo, hi) = s.split_once('-').unwrap_or((s, s));
    let lo: u32 = lo.trim().parse().map_err(|e| format!("{e}"))?;
    let hi: u32 = hi.trim().parse().map_err(|e| format!("{e}"))?;
    if lo > hi {
        return Err(format!("empty range {s}"));
    }
    Ok((lo, hi))
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Run { scenario, log, remote } => {
            if let Some(base) = remote {
                // scenario loading reads the endpoint from the environment
                std::env::set_var("DCI_REMOTE_ENDPOINT", base);
            }
            let r = run_scenario(&scenario)?;
            if let Some(path) = log {
                r.write_log(&path)
                    .with_context(|| format!("writing {}", path.display()))?;
            }
            out!("{}", serde_json::to_string_pretty(&r.packet)?);
            for m in &r.mismatches {
                eprintln!("{m}");
            }
            Ok(r.passed())
        }
        Command::Fuzz { seed, runs, population, max_rounds, max_depth, ceiling } => {
            let params = FuzzParams {
                max_rounds,
                max_depth,
                ceiling,
                population: match population {
                    Pop::Mixed => Population::Mixed,
                    Pop::Adversarial => Population::AdversarialOnly,
                    Pop::Cooperative => Population::CooperativeOnly,
                },
                ..FuzzParams::default()
            };
            let report = fuzz_termination(seed, runs, &params);
            out!("{}", serde_json::to_string_pretty(&report)?);
            Ok(report.passed())
        }
        Command::Replay { log } => {
            let r = replay_file(&log)?;
            out!("{}", serde_json::to_string_pretty(&r.packet)?);
            Ok(true)
        }
        Command::Validate { file, kind } => {
            let text = fs::read_to_string(&file)?;
            let doc: Value = serde_json::from_str(&text)?;
            let kind = match kind {
                Kind::Auto if doc.get("act").is_some() => Kind::Move,
                Kind::Auto => Kind::Packet,
                k => k,
            };
            match kind {
                Kind::Move => match parse_move(&doc) {
                    Ok(m) => {
                        out!("valid move {} ({})", m.move_id, m.act);
                        Ok(true)
                    }
                    Err(e) => {
                        out!("rejected: {} ({})", e, e.field().unwrap_or("document"));
                        Ok(false)
                    }
                },
                _ => match validate_document(&doc) {
                    Ok(p) => {
                        out!("valid packet for session {}", p.session_id);
                        Ok(true)
                    }
                    Err(problems) => {
                        for p in problems {
                            out!("missing or invalid: {p}");
                        }
                        Ok(false)
                    }
                },
            }
        }
        Command::Bound { config } => {
            let text = fs::read_to_string(&config)?;
            let cfg: SessionConfig = serde_json::from_str(&text)?;
            let env = cfg.envelope();
            if env.max_rounds == 0 {
                bail!("max_rounds must be at least 1");
            }
            let caps = per_depth_caps(env.max_depth, env.max_spawns_per_session);
            out!("formula: {}", termination_bound(env.max_rounds, &caps));
            out!("effective: {}", effective_bound(&env));
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
