use clap::Parser;
use gaac_cli::{configure_threads, run, Cli};

fn main() {
    let cli = Cli::parse();
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        std::process::exit(2);
    }
    std::process::exit(run(&cli));
}
