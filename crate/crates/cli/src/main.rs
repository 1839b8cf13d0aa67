use std::path::{Path, PathBuf};
use std::process::ExitCode;

use caosr_core::emit::{run_to_dir, write_report, EmitError};
use caosr_core::preset::{Figure, Preset};
use caosr_core::scenario::{Scenario, ScenarioError};
use clap::{Parser, Subcommand};

const EXIT_USAGE: u8 = 1;
const EXIT_VALIDATION: u8 = 2;
const EXIT_RUNTIME: u8 = 3;

/// Deterministic MANET simulator with cognitive-agent belief exchange.
#[derive(Parser, Debug)]
#[command(name = "caosr", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one scenario and write metrics, contacts and a manifest.
    Run {
        #[arg(long)]
        scenario: PathBuf,
        /// Overrides the seed in the scenario file.
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory; defaults to $CAOSR_OUT or ./out.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Abort on protocol violations instead of counting them.
        #[arg(long)]
        strict: bool,
        /// Also write the binary request/reply log.
        #[arg(long)]
        messages: bool,
    },
    /// Run a figure preset sweep.
    Preset {
        name: String,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Seeds averaged per sweep point.
        #[arg(long, default_value_t = 1)]
        replicates: usize,
        /// Base scenario; the shipped default when omitted.
        #[arg(long)]
        scenario: Option<PathBuf>,
    },
    /// Parse and validate a scenario file.
    Validate {
        #[arg(long)]
        scenario: PathBuf,
    },
}

fn out_dir(arg: Option<PathBuf>) -> PathBuf {
    arg.or_else(|| std::env::var_os("CAOSR_OUT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"))
}

fn load(path: &Path) -> Result<Scenario, u8> {
    Scenario::load(path).map_err(|e| {
        eprintln!("error: {}: {e}", path.display());
        match e {
            ScenarioError::Io { .. } => EXIT_USAGE,
            _ => EXIT_VALIDATION,
        }
    })
}

fn emit_failure(e: EmitError) -> u8 {
    eprintln!("error: {e}");
    match e {
        EmitError::Sim(_) | EmitError::Write { .. } => EXIT_RUNTIME,
        _ => EXIT_VALIDATION,
    }
}

fn execute(cli: Cli) -> Result<(), u8> {
    match cli.command {
        Command::Run {
            scenario,
            seed,
            out,
            strict,
            messages,
        } => {
            let mut s = load(&scenario)?;
            if let Some(seed) = seed {
                s.seed = seed;
            }
            s.protocol.strict |= strict;
            let dir = out_dir(out);
            let m = run_to_dir(s, &dir, messages).map_err(emit_failure)?;
            println!(
                "wrote {} (seed {}, metrics {})",
                dir.display(),
                m.get("seed").unwrap_or_default(),
                m.get("metrics_digest").unwrap_or_default()
            );
            Ok(())
        }
        Command::Preset {
            name,
            out,
            seed,
            replicates,
            scenario,
        } => {
            let figure: Figure = name.parse().map_err(|e| {
                eprintln!("error: {e}");
                EXIT_USAGE
            })?;
            if replicates == 0 {
                eprintln!("error: --replicates must be at least 1");
                return Err(EXIT_USAGE);
            }
            let base = match scenario {
                Some(p) => load(&p)?,
                None => Scenario::default_scenario(),
            };
            let seeds = Preset::seeds(seed, replicates);
            let report = Preset::new(figure, &base).run(&seeds).map_err(|e| {
                eprintln!("error: {e}");
                EXIT_RUNTIME
            })?;
            let dir = out_dir(out);
            let (path, _) = write_report(&report, &base, &seeds, &dir).map_err(emit_failure)?;
            println!("wrote {} ({})", path.display(), figure.title());
            Ok(())
        }
        Command::Validate { scenario } => {
            let s = load(&scenario)?;
            println!(
                "ok: {} ({} nodes, digest {})",
                s.name,
                s.node_count(),
                s.digest()
            );
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(code) => ExitCode::from(code),
    }
}
