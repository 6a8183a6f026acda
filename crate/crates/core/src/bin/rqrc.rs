use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use rydberg_qrc::runner::{self, Overrides, EXIT_INVALID};

#[derive(Parser)]
#[command(name = "rqrc", version, about = "Rydberg-array quantum reservoir computing experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a TOML config or a manifest.json.
    Run {
        config: PathBuf,
        #[command(flatten)]
        common: Common,
        /// Output directory [default: config out_dir, else $RQRC_OUT_DIR/<experiment>, else ./rqrc-out/<experiment>].
        #[arg(long)]
        out_dir: Option<PathBuf>,
        /// Worker threads (results do not depend on this).
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Check a config without running it.
    Validate {
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args)]
struct Common {
    /// Override the master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the number of atoms.
    #[arg(long)]
    n_atoms: Option<usize>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Validate { config, common } => validate(config, common),
        Command::Run { config, common, out_dir, threads } => run(config, common, out_dir, threads),
    };
    ExitCode::from(code as u8)
}

fn validate(path: PathBuf, common: Common) -> i32 {
    let mut loaded = match runner::load_input(&path) {
        Ok(l) => l,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_INVALID;
        }
    };
    runner::apply_overrides(&mut loaded.config, &Overrides { seed: common.seed, n_atoms: common.n_atoms, out_dir: None });
    let report = runner::validate_loaded(&loaded);
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    for e in &report.errors {
        eprintln!("error: {e}");
    }
    println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
    if report.is_ok() {
        0
    } else {
        EXIT_INVALID
    }
}

fn run(path: PathBuf, common: Common, out_dir: Option<PathBuf>, threads: Option<usize>) -> i32 {
    if let Some(t) = threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: cannot start {t} threads: {e}");
            return EXIT_INVALID;
        }
    }
    let loaded = match runner::load_input(&path) {
        Ok(l) => l,
        Err(e) => {
            eprintln!("error: {e}");
            return runner::exit_code(&e);
        }
    };
    let overrides = Overrides { seed: common.seed, n_atoms: common.n_atoms, out_dir };
    match runner::execute(loaded, &overrides) {
        Err(e) => {
            eprintln!("error: {e}");
            runner::exit_code(&e)
        }
        Ok(outcome) => match outcome.error {
            None => {
                log::info!(
                    "{} finished in {:.1} s; results in {}",
                    outcome.manifest.config.experiment.name(),
                    outcome.manifest.wall_clock_seconds,
                    outcome.out_dir.display()
                );
                0
            }
            Some(e) => {
                eprintln!("error: {e}");
                eprintln!("partial manifest written to {}", outcome.out_dir.join(runner::MANIFEST_FILE).display());
                runner::exit_code(&e)
            }
        },
    }
}
