use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use cryamabe_cli::{exit_code, run, Cli, EXIT_PASS, EXIT_VALIDATION};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            return ExitCode::from(if err.use_stderr() { EXIT_VALIDATION as u8 } else { EXIT_PASS as u8 });
        }
    };
    match run(cli.command, cli.flags) {
        Ok(done) => {
            let mut stdout = std::io::stdout().lock();
            if stdout.write_all(done.rendered.as_bytes()).and_then(|()| stdout.flush()).is_err() {
                return ExitCode::from(EXIT_VALIDATION as u8);
            }
            ExitCode::from(done.exit_code() as u8)
        }
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err) as u8)
        }
    }
}
