use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use ensembles::cli::{parse_config, run, CliError, Experiment, EXIT_ERROR};

#[derive(Parser, Debug)]
#[command(name = "ensembles", version, about = "Area-tilted line ensemble experiments")]
struct Args {
    /// One of exact, sample, mixing, invariance, converge, dominance, blocks, slope, oracle.
    experiment: String,
    #[arg(long)]
    config: PathBuf,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Overrides the seed in the config file.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    threads: Option<usize>,
}

fn execute(args: &Args) -> Result<i32, CliError> {
    let text = std::fs::read_to_string(&args.config).map_err(|source| CliError::Io {
        path: args.config.clone(),
        source,
    })?;
    let mut config = parse_config(&text)?;
    if Experiment::parse(&args.experiment) != Some(config.experiment()) {
        return Err(CliError::Invalid(format!(
            "command asks for `{}` but the config declares `{}`",
            args.experiment,
            config.experiment().name()
        )));
    }
    if let Some(seed) = args.seed {
        config = config.with_seed(seed);
    }
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(k) = args.threads {
        pool = pool.num_threads(k);
    }
    let pool = pool
        .build()
        .map_err(|e| CliError::Invalid(format!("thread pool: {e}")))?;
    let outcome = pool.install(|| run(&config, &args.out))?;
    if let Some(pass) = outcome.verdict {
        println!("{}: {}", config.experiment().name(), if pass { "PASS" } else { "FAIL" });
    }
    Ok(outcome.exit_code())
}

fn main() -> ExitCode {
    let args = Args::parse();
    match execute(&args) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_ERROR as u8)
        }
    }
}
