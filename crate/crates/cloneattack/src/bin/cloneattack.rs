//! Thin CLI over the workbench: parses the subcommand and flags, merges the
//! optional config file, and delegates to `workbench::execute`.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use cloneattack::workbench::{run_from_sources, Command as WorkbenchCommand};

#[derive(Parser)]
#[command(
    name = "cloneattack",
    version,
    about = "Optimal-cloning eavesdropping workbench for BB84 and trine-state R04 QKD"
)]
struct Cli {
    /// Flat key = value config file; command-line flags override its entries.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory for reports, tables and the run manifest.
    #[arg(long, global = true)]
    output: Option<PathBuf>,

    #[command(subcommand)]
    command: CliCommand,
}

#[derive(Args, Default)]
struct AttackArgs {
    /// Protocol name: "bb84" or "r04".
    #[arg(long)]
    protocol: Option<String>,
    /// Clone asymmetry p in [0, 1].
    #[arg(long)]
    p: Option<f64>,
    /// Cloning strength squared, Lambda^2 in [0, 1].
    #[arg(long)]
    lambda2: Option<f64>,
    /// Optics preset: "measured" or "ideal".
    #[arg(long)]
    optics: Option<String>,
}

#[derive(Subcommand)]
enum CliCommand {
    /// Security figures for one attack configuration.
    Analyze {
        #[command(flatten)]
        attack: AttackArgs,
    },
    /// Find the optimal attack: max I_AB subject to zero key rate.
    Optimize {
        #[command(flatten)]
        attack: AttackArgs,
    },
    /// Dense (p, Lambda^2) map with the zero-key-rate contour.
    Map {
        #[command(flatten)]
        attack: AttackArgs,
        /// Grid points per axis (default 101).
        #[arg(long)]
        grid: Option<usize>,
    },
    /// Seeded Monte Carlo protocol run with empirical statistics.
    Simulate {
        #[command(flatten)]
        attack: AttackArgs,
        /// Transmitted rounds before sifting (default 1000000).
        #[arg(long)]
        rounds: Option<u64>,
        /// RNG seed (default 1).
        #[arg(long)]
        seed: Option<u64>,
        /// Optional clone purity target in (0.25, 1]; admixes white noise.
        #[arg(long)]
        purity: Option<f64>,
    },
    /// Photon-source adequacy report from detector clicks.
    SourceCheck {
        /// Detector clicks per second.
        #[arg(long)]
        clicks: Option<f64>,
        /// Detection window in nanoseconds.
        #[arg(long)]
        window_ns: Option<f64>,
        /// Detector dead time in nanoseconds (default 35 windows).
        #[arg(long)]
        dead_time_ns: Option<f64>,
        /// Detector efficiency in (0, 1].
        #[arg(long)]
        eta: Option<f64>,
    },
    /// Simulate tomographic counts of the clone state and reconstruct it.
    TomoDemo {
        #[command(flatten)]
        attack: AttackArgs,
        /// Shots per projector (default 100000).
        #[arg(long)]
        shots: Option<u64>,
        /// RNG seed (default 1).
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn push(pairs: &mut Vec<(String, String)>, key: &str, value: Option<String>) {
    if let Some(v) = value {
        pairs.push((key.to_string(), v));
    }
}

fn attack_pairs(pairs: &mut Vec<(String, String)>, attack: AttackArgs) {
    push(pairs, "protocol", attack.protocol);
    push(pairs, "p", attack.p.map(|v| v.to_string()));
    push(pairs, "lambda2", attack.lambda2.map(|v| v.to_string()));
    push(pairs, "optics", attack.optics);
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut pairs: Vec<(String, String)> = Vec::new();
    if let Some(out) = &cli.output {
        pairs.push(("output".into(), out.display().to_string()));
    }
    let command = match cli.command {
        CliCommand::Analyze { attack } => {
            attack_pairs(&mut pairs, attack);
            WorkbenchCommand::Analyze
        }
        CliCommand::Optimize { attack } => {
            attack_pairs(&mut pairs, attack);
            WorkbenchCommand::Optimize
        }
        CliCommand::Map { attack, grid } => {
            attack_pairs(&mut pairs, attack);
            push(&mut pairs, "grid", grid.map(|v| v.to_string()));
            WorkbenchCommand::Map
        }
        CliCommand::Simulate {
            attack,
            rounds,
            seed,
            purity,
        } => {
            attack_pairs(&mut pairs, attack);
            push(&mut pairs, "rounds", rounds.map(|v| v.to_string()));
            push(&mut pairs, "seed", seed.map(|v| v.to_string()));
            push(&mut pairs, "purity", purity.map(|v| v.to_string()));
            WorkbenchCommand::Simulate
        }
        CliCommand::SourceCheck {
            clicks,
            window_ns,
            dead_time_ns,
            eta,
        } => {
            push(&mut pairs, "clicks", clicks.map(|v| v.to_string()));
            push(&mut pairs, "window_ns", window_ns.map(|v| v.to_string()));
            push(&mut pairs, "dead_time_ns", dead_time_ns.map(|v| v.to_string()));
            push(&mut pairs, "eta", eta.map(|v| v.to_string()));
            WorkbenchCommand::SourceCheck
        }
        CliCommand::TomoDemo {
            attack,
            shots,
            seed,
        } => {
            attack_pairs(&mut pairs, attack);
            push(&mut pairs, "shots", shots.map(|v| v.to_string()));
            push(&mut pairs, "seed", seed.map(|v| v.to_string()));
            WorkbenchCommand::TomoDemo
        }
    };

    // config file first, CLI flags after it so they win
    let file_pairs_first = {
        let mut merged = Vec::new();
        if cli.config.is_some() {
            // run_from_sources reads the file itself; we only order overrides
        }
        merged.append(&mut pairs);
        merged
    };

    match run_from_sources(command, cli.config.as_deref(), &file_pairs_first) {
        Ok(result) => {
            print!("{}", result.summary);
            for file in &result.files {
                eprintln!("wrote {}", file.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
