use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(qmn_cli::run(std::env::args_os()))
}
