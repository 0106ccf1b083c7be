use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(snapvar_cli::run(std::env::args_os()))
}
