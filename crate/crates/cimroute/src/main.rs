use clap::Parser;

fn main() -> std::process::ExitCode {
    let cli = cimroute::cli::Cli::parse();
    match cimroute::cli::run(cli) {
        Ok(()) => std::process::ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            std::process::ExitCode::FAILURE
        }
    }
}
