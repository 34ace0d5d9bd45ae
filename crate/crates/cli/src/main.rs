use std::process::ExitCode;

use clap::Parser;
use helmfield_cli::{exit_code, run, Cli, EXIT_ERROR};

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Ok(v) = std::env::var("HF_THREADS") {
        match v.parse::<usize>() {
            Ok(n) if n > 0 => {
                if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                    eprintln!("error: thread pool: {e}");
                    return ExitCode::from(EXIT_ERROR as u8);
                }
            }
            _ => {
                eprintln!("error: HF_THREADS = {v:?} must be a positive integer");
                return ExitCode::from(EXIT_ERROR as u8);
            }
        }
    }
    let result = run(&cli, &mut std::io::stdout().lock());
    if let Err(e) = &result {
        eprintln!("error: {e}");
    }
    ExitCode::from(exit_code(&result) as u8)
}
