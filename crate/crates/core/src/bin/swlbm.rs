use std::process::ExitCode;

fn main() -> ExitCode {
    swlbm::cli::run(std::env::args_os())
}
