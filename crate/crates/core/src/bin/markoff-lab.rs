use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(markoff_lab::cli::run_command(std::env::args_os()).code())
}
