use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use chaosid::{exit_code, report_lines, run_to_writer, sweep, write_summary, RawConfig};

#[derive(Parser)]
#[command(version, about = "Identify discontinuity points and delays of chaotic systems by adaptive synchronization")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment, write its trace and print the convergence report.
    Run {
        config: PathBuf,
        /// Override a configuration key (repeatable).
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
        /// Trace file (defaults to `output` from the config, then `<experiment>_seed<N>.csv`).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run one experiment per value of a key and write a summary table.
    Sweep {
        config: PathBuf,
        #[arg(long)]
        key: String,
        #[arg(long, value_delimiter = ',', num_args = 0..)]
        values: Vec<String>,
        /// Summary file (defaults to standard output).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn load(path: &PathBuf) -> Result<RawConfig, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    RawConfig::parse(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn run(config: PathBuf, set: Vec<String>, out: Option<PathBuf>, seed: Option<u64>) -> Result<i32, String> {
    let mut raw = load(&config)?;
    for pair in &set {
        raw.set_pair(pair).map_err(|e| e.to_string())?;
    }
    if let Some(seed) = seed {
        raw.set("seed", &seed.to_string());
    }
    let cfg = raw.build().map_err(|e| format!("{}: {e}", config.display()))?;
    let path = out
        .or_else(|| cfg.output.clone())
        .unwrap_or_else(|| PathBuf::from(format!("{}_seed{}.csv", cfg.name(), cfg.seed())));
    let file = File::create(&path).map_err(|e| format!("{}: {e}", path.display()))?;
    let (outcome, _) = run_to_writer(&cfg, BufWriter::new(file)).map_err(|e| format!("{}: {e}", path.display()))?;
    print!("{}", report_lines(&cfg, &outcome));
    println!("trace={}", path.display());
    Ok(exit_code(&outcome))
}

fn run_sweep(config: PathBuf, key: String, values: Vec<String>, out: Option<PathBuf>) -> Result<i32, String> {
    let raw = load(&config)?;
    let values: Vec<String> = values.into_iter().map(|v| v.trim().to_string()).filter(|v| !v.is_empty()).collect();
    let rows = sweep(&raw, &key, &values).map_err(|e| e.to_string())?;
    let written = match out {
        Some(path) => {
            let file = File::create(&path).map_err(|e| format!("{}: {e}", path.display()))?;
            write_summary(&rows, BufWriter::new(file))
        }
        None => write_summary(&rows, io::stdout().lock()).and_then(|_| io::stdout().flush()),
    };
    written.map_err(|e| e.to_string())?;
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config, set, out, seed } => run(config, set, out, seed),
        Command::Sweep { config, key, values, out } => run_sweep(config, key, values, out),
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
