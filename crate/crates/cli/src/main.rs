use std::process::ExitCode;

use clap::Parser;

use sphere_re_cli::{run, Cli, Exit};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            // usage errors are bad input, not "not an equilibrium"
            return if e.use_stderr() {
                ExitCode::from(Exit::BadInput as u8)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(&cli) {
        Ok(exit) => ExitCode::from(exit as u8),
        Err(f) => {
            eprintln!("sphere-re: {}", f.message);
            ExitCode::from(f.exit as u8)
        }
    }
}
