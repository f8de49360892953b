use std::process::ExitCode;

fn main() -> ExitCode {
    qms_cli::run(std::env::args_os())
}
