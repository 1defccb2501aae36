use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    // Usage errors are input errors; clap's own code 2 means degenerate data here.
    let cli = match datared::Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match datared::run(&cli) {
        Ok(status) => ExitCode::from(status.code()),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
