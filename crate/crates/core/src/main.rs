use std::process::ExitCode;

fn main() -> ExitCode {
    entropy_gap::cli::run()
}
