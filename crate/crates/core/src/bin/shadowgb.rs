use std::process::ExitCode;

fn main() -> ExitCode {
    shadowgb::cli::main_with(std::env::args_os())
}
