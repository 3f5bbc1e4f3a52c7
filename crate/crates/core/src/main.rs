use std::process::ExitCode;

fn main() -> ExitCode {
    flwbc::cli::main_with_args(std::env::args_os())
}
