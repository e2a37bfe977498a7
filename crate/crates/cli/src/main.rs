//! `dtnmap` command-line front end.
//!
//! Exit codes: 0 ok, 2 bad input, 3 model error, 4 expansion mismatch,
//! 5 rank deficient, 6 round-trip failure.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "dtnmap", version, about = "Resistor-network DtN maps and conductivity recovery")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print the Dirichlet-to-Neumann map of a network.
    Forward {
        /// Network file (`-` for stdin).
        network: PathBuf,
    },
    /// List the disjoint path systems from P to Q and check their expansion.
    Paths {
        network: PathBuf,
        /// Row set P, comma separated.
        #[arg(long, value_delimiter = ',', num_args = 0..)]
        from: Vec<usize>,
        /// Column set Q, comma separated.
        #[arg(long, value_delimiter = ',', num_args = 0..)]
        to: Vec<usize>,
    },
    /// Exact rank of the log-linear system of a topology.
    Rank {
        network: PathBuf,
        /// Largest |P| to try (default: number of boundary vertices).
        #[arg(long)]
        max_pair_size: Option<usize>,
        /// Scan every pair instead of stopping at full rank.
        #[arg(long)]
        exhaustive: bool,
    },
    /// Recover conductivities of a topology from a DtN map.
    Invert {
        /// Network file; its conductivities are ignored.
        topology: PathBuf,
        /// DtN matrix file (`-` for stdin).
        dtn: PathBuf,
        #[arg(long)]
        max_pair_size: Option<usize>,
        #[arg(long)]
        exhaustive: bool,
    },
    /// Forward-then-invert trials with random conductivities on a topology.
    Roundtrip {
        network: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        trials: usize,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Forward { network } => commands::forward(&network),
        Command::Paths { network, from, to } => commands::paths(&network, from, to),
        Command::Rank {
            network,
            max_pair_size,
            exhaustive,
        } => commands::rank(&network, max_pair_size, !exhaustive),
        Command::Invert {
            topology,
            dtn,
            max_pair_size,
            exhaustive,
        } => commands::invert(&topology, &dtn, max_pair_size, !exhaustive),
        Command::Roundtrip {
            network,
            seed,
            trials,
        } => commands::roundtrip(&network, seed, trials),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("dtnmap: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
