use std::process::ExitCode;

fn main() -> ExitCode {
    let result = hsw_consensus::cli::run(std::env::args_os());
    print!("{}", result.output);
    if result.exit_code != 0 || !result.summary.is_empty() {
        eprintln!("{}", result.summary);
    }
    ExitCode::from(result.exit_code as u8)
}
