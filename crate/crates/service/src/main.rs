use clap::Parser;

fn main() -> std::process::ExitCode {
    let cli = dribbleforge::cli::Cli::parse();
    match dribbleforge::cli::run(cli) {
        Ok(()) => std::process::ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            std::process::ExitCode::FAILURE
        }
    }
}
