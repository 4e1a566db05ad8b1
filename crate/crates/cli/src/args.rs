use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use rationd::offline::DEFAULT_ORACLE_BUDGET;

/// Quota-constrained rationing: generate instances, solve them online and
/// offline, compare and verify.
///
/// Set RATIOND_LOG (e.g. `debug`) for diagnostic output on stderr.
#[derive(Debug, Parser)]
#[command(name = "rationd", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a synthetic instance from a generator config.
    Generate {
        /// JSON generator config.
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Overrides the config's seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run one algorithm and print a run summary.
    Solve {
        instance: PathBuf,
        #[arg(long, value_enum)]
        algorithm: Algorithm,
        /// Where to write the allocation.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the daily metric series as CSV.
        #[arg(long)]
        metrics: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Run online and offline side by side and report the ratio.
    Compare {
        instance: PathBuf,
        #[arg(long)]
        model2: bool,
        /// Directory for `online_metrics.csv` and `offline_metrics.csv`.
        #[arg(long, default_value = ".")]
        metrics_dir: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Check feasibility, non-wastefulness, the competitive bound, the
    /// charging certificate and sampled deviations.
    Verify {
        instance: PathBuf,
        #[arg(long)]
        model2: bool,
        /// Additionally check the feasibility of this allocation file.
        #[arg(long)]
        allocation: Option<PathBuf>,
        /// Agents sampled for the deviation test.
        #[arg(long, default_value_t = 8)]
        sample_agents: usize,
        /// Seed for the agent sample.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Debug, Args)]
pub struct Common {
    /// `input`, `adversarial`, or a comma-separated agent order.
    #[arg(long, default_value = "input")]
    pub tie_break: String,
    /// Node budget for the exact search.
    #[arg(long, default_value_t = DEFAULT_ORACLE_BUDGET)]
    pub budget: u64,
    /// Print exact rationals next to the six-decimal rendering.
    #[arg(long)]
    pub exact: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Algorithm {
    /// Min-cost flow optimum, daily quotas only.
    Offline1,
    /// Greedy online, daily quotas only.
    Online1,
    /// Greedy online with overall quotas.
    Online2,
    /// Exact search, daily quotas only.
    Oracle,
    /// Exact search with overall quotas.
    Oracle2,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Offline1 => "offline1",
            Algorithm::Online1 => "online1",
            Algorithm::Online2 => "online2",
            Algorithm::Oracle => "oracle",
            Algorithm::Oracle2 => "oracle2",
        }
    }

    pub fn model2(self) -> bool {
        matches!(self, Algorithm::Online2 | Algorithm::Oracle2)
    }
}
