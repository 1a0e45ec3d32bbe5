//! `topoindex` command-line front end.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{CommandFactory, FromArgMatches, Parser, Subcommand};
use topoindex::config::CONFIG_KEYS;
use topoindex::{Error, ErrorClass};

#[derive(Debug, Parser)]
#[command(name = "topoindex", version, about = "Topological features of market point clouds for index-direction backtests")]
pub struct Cli {
    /// Pipeline config file (TOML).
    #[arg(short, long, global = true, env = "TOPOINDEX_CONFIG")]
    pub config: Option<PathBuf>,

    /// Output directory; overrides `run.output_dir`.
    #[arg(long, global = true, env = "TOPOINDEX_OUTPUT_DIR")]
    pub output_dir: Option<PathBuf>,

    /// Worker threads; overrides `run.jobs` (0 = available parallelism).
    #[arg(short, long, global = true)]
    pub jobs: Option<usize>,

    /// Root seed; overrides `run.seed`.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// More log output (repeat for debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build one point cloud and write it as CSV.
    Cloud {
        /// takens, correlation (corr) or factor.
        #[arg(long)]
        method: String,
        /// Target date (must be a trading date in the data).
        #[arg(long)]
        date: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Persistence diagram of a cloud CSV.
    Persist {
        /// Cloud CSV as written by `cloud`.
        cloud_file: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Feature vector of a diagram CSV for one combination code.
    Features {
        /// Diagram CSV as written by `persist`.
        diagram_file: PathBuf,
        /// Combination code 1..=15.
        #[arg(long, default_value_t = 15)]
        combo: u8,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write train/test feature CSVs for external classifiers.
    Export {
        #[arg(long)]
        cloud: String,
        #[arg(long)]
        combo: u8,
    },
    /// Walk-forward backtest of one (cloud, combo, model) cell.
    Backtest {
        #[arg(long)]
        cloud: String,
        #[arg(long)]
        combo: u8,
        #[arg(long)]
        model: String,
    },
    /// Walk-forward backtest of every (cloud, combo, model) cell.
    Sweep {
        /// Comma-separated combination codes; overrides `backtest.combos`.
        #[arg(long, value_delimiter = ',')]
        combos: Option<Vec<u8>>,
        /// Comma-separated cloud types; overrides `backtest.clouds`.
        #[arg(long, value_delimiter = ',')]
        clouds: Option<Vec<String>>,
        /// Comma-separated models; overrides `models.kinds`.
        #[arg(long, value_delimiter = ',')]
        models: Option<Vec<String>>,
    },
    /// Render a report CSV as Markdown.
    Report {
        /// Report CSV (default: <output_dir>/report.csv).
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate a seeded synthetic market with a ready-to-run config.
    Synth {
        #[arg(long)]
        dir: PathBuf,
        #[arg(long, default_value_t = 1040)]
        days: usize,
        #[arg(long, default_value_t = 20)]
        tickers: usize,
        #[arg(long, default_value_t = 6)]
        predict_months: usize,
    },
    /// Print the effective config (defaults when no config is given).
    DumpConfig {
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn config_help() -> String {
    let width = CONFIG_KEYS.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    let mut s = String::from("Config keys (TOML sections [data] [cloud] [persistence] [features] [models] [backtest] [run]):\n");
    for (k, v) in CONFIG_KEYS {
        s.push_str(&format!("  {k:width$}  {v}\n"));
    }
    s.push_str("\nExit codes: 0 ok, 2 config/usage error, 3 data error, 4 internal error.");
    s
}

fn exit_code(e: &Error) -> (u8, &'static str) {
    match e.class() {
        ErrorClass::Config => (2, "E_CONFIG"),
        ErrorClass::Data => (3, "E_DATA"),
        ErrorClass::Internal => (4, "E_INTERNAL"),
    }
}

fn main() -> ExitCode {
    let matches = Cli::command().after_long_help(config_help()).get_matches();
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(c) => c,
        Err(e) => e.exit(),
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let (code, tag) = exit_code(&e);
            eprintln!("{tag}: {}", e.to_string().replace('\n', " "));
            ExitCode::from(code)
        }
    }
}
