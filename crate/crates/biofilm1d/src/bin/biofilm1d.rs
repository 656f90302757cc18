use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(biofilm1d::cli::run() as u8)
}
