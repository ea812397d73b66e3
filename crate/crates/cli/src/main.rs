use clap::Parser;
use csd_cli::{parse_config, run};
use std::path::PathBuf;
use std::process::ExitCode;

/// Batch driver for the Chern-Simons-Dirac spectral laboratory.
///
/// The experiment (simulate, picard, probe-bilinear, probe-nullform,
/// probe-interaction, illposed-sweep, identities) and its parameters come
/// from the configuration file; outputs are CSV tables, CSDF1 field dumps,
/// and a manifest tying them to the configuration hash and seed.
#[derive(Parser)]
#[command(name = "csd-lab", version)]
struct Args {
    /// Path to the flat key/value configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides `output_dir` from the configuration).
    #[arg(long)]
    output: Option<PathBuf>,
    /// Seed override (otherwise `seed` from the configuration, default 0).
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for parallel sections (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
}

fn main() -> ExitCode {
    let args = Args::parse();

    let text = match std::fs::read_to_string(&args.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error[io]: cannot read {}: {e}", args.config.display());
            return ExitCode::from(3);
        }
    };

    let mut cfg = match parse_config(&text) {
        Ok(c) => c,
        Err(issues) => {
            for issue in &issues {
                eprintln!("error[config]: {issue}");
            }
            return ExitCode::from(2);
        }
    };
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    for w in &cfg.warnings {
        eprintln!("warning: {w}");
    }

    let threads = args.threads.unwrap_or_else(num_threads_default);
    if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
        // A pool may already exist (tests); that is fine.
        let _ = e;
    }

    let out_dir = match args.output.or_else(|| cfg.output_dir.clone()) {
        Some(d) => d,
        None => {
            eprintln!("error[config]: no output directory (pass --output or set output_dir)");
            return ExitCode::from(2);
        }
    };

    match run(&cfg, &out_dir, threads) {
        Ok(summary) => {
            println!(
                "{}: wrote {} files to {} in {:.2}s",
                cfg.command.name(),
                summary.files.len(),
                out_dir.display(),
                summary.wall_time
            );
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn num_threads_default() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}
