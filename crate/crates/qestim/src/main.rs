use std::io::Write;

use clap::Parser;
use qestim::cli::{run, Cli};

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let status = match run(cli, &mut out) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("qestim: {e}");
            e.exit_code()
        }
    };
    let _ = out.flush();
    std::process::exit(status);
}
