use std::env;
use std::process::ExitCode;

use clap::Parser;

use onebit_harness::config::{self, Cli, SEED_ENV};
use onebit_harness::runner;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = config::resolve(cli, env::var(SEED_ENV).ok()).and_then(|rc| runner::run(&rc));
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("onebit: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
