use std::process::ExitCode;

fn main() -> ExitCode {
    fracdelay::cli::main_with_args(std::env::args_os())
}
