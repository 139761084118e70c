use anyhow::{Context, Result};
use clap::Parser;

use sparse_gof_cli::commands::{self, Cli};

fn main() -> Result<()> {
    // GOF_THREADS caps the simulation thread pool; results are identical at
    // any setting.
    if let Ok(raw) = std::env::var("GOF_THREADS") {
        let threads: usize = raw
            .parse()
            .with_context(|| format!("parsing GOF_THREADS='{raw}'"))?;
        if threads > 0 {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build_global()
                .context("installing the simulation thread pool")?;
        }
    }

    let cli = Cli::parse();
    let content = commands::run(&cli)?;
    commands::emit(commands::output_path(&cli), &content)
}
