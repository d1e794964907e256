use clap::Parser;
use qlga_cli::{run, Cli};

fn main() {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        // Ignore "already initialized": tests may drive `run` in-process.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }
    if let Err(err) = run(&cli) {
        eprintln!("{err}");
        std::process::exit(err.exit_code());
    }
}
