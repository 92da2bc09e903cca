use std::process::ExitCode;

fn main() -> ExitCode {
    redcal::cli::run()
}
