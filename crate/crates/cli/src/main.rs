use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use syncgain_cli::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(report) => match serde_json::to_string_pretty(&report) {
            Ok(text) => {
                // a closed stdout (e.g. piped into head) is not an error
                let _ = writeln!(std::io::stdout(), "{text}");
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(1)
            }
        },
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
