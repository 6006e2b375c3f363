use std::process::ExitCode;

use lidspace::cli;

fn main() -> ExitCode {
    let cli = match cli::parse_with_config(std::env::args_os()) {
        Ok(Ok(cli)) => cli,
        Ok(Err(e)) => e.exit(),
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    match cli::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
