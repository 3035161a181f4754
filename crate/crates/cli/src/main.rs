use clap::Parser;
use vpblimit::cli::{execute, formats, workers_from_env, Cli};
use vpblimit::exit_code;

fn main() {
    let cli = Cli::parse();
    let run = || -> vpblimit::Result<()> {
        if let Some(n) = workers_from_env()? {
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .map_err(|e| vpblimit::Error::InvalidInput(format!("worker pool: {e}")))?;
        }
        execute(cli.command, cli.config.as_deref(), &cli.out, &formats(&cli.format))
    };
    if let Err(e) = run() {
        eprintln!("error: {e}");
        std::process::exit(exit_code(&e));
    }
}
