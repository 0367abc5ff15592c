use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use abc_engine::config::render_config_json;
use abc_engine::{parse_config, run_to_dir, verify_manifest, EngineError};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "abc",
    version,
    about = "Approximate Bayesian computation runner"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the sampler described by a config file.
    Run {
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads; overrides the config file.
        #[arg(long, env = "ABC_WORKERS")]
        workers: Option<usize>,
        /// Output directory; overrides the config file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a config file and print it with defaults filled in.
    Validate {
        config: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Re-hash the files listed in an output directory's manifest.
    Verify { dir: PathBuf },
}

fn read_config(path: &PathBuf) -> Result<abc_engine::RunConfig, EngineError> {
    let text = fs::read_to_string(path).map_err(|source| EngineError::Io {
        path: path.clone(),
        source,
    })?;
    Ok(parse_config(&text)?)
}

fn execute(cli: Cli) -> Result<(), EngineError> {
    match cli.command {
        Command::Run {
            config,
            seed,
            workers,
            out,
        } => {
            let mut config = read_config(&config)?;
            if let Some(seed) = seed {
                config.seed = seed;
            }
            if let Some(workers) = workers {
                config.workers = workers;
            }
            let dir = out.unwrap_or_else(|| PathBuf::from(&config.output));
            config.output = dir.display().to_string();
            config.validate()?;
            eprintln!(
                "abc: {} with n = {}, seed = {}, {} worker(s)",
                config.algorithm, config.n, config.seed, config.workers
            );
            let (bundle, manifest) = run_to_dir(&config, &dir)?;
            let meta = &bundle.metadata;
            for (t, eps) in meta.epsilons.iter().enumerate() {
                eprintln!(
                    "abc: generation {} eps = {eps}: {} attempts",
                    t + 1,
                    meta.attempts[t]
                );
                if let Some(m) = &bundle.marginals {
                    eprintln!("abc:   model marginals {:?}", m.per_generation[t]);
                }
            }
            eprintln!(
                "abc: {} simulations in {:.2}s, results in {}",
                meta.total_simulations,
                meta.wall_time_secs,
                dir.display()
            );
            print!("{manifest}");
        }
        Command::Validate { config, json } => {
            let config = read_config(&config)?;
            if json {
                println!("{}", render_config_json(&config));
            } else {
                print!("{}", abc_engine::render_config(&config));
            }
        }
        Command::Verify { dir } => {
            let manifest = verify_manifest(&dir)?;
            eprintln!("abc: {} file(s) verified", manifest.entries.len());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("abc: error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
