use std::process::ExitCode;

fn main() -> ExitCode {
    pir_db::cli::run(std::env::args_os())
}
