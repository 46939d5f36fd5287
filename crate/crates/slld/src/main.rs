use std::process::ExitCode;

use clap::Parser;

use slld::cli::{self, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let file = match cli::load_file_config(&cli) {
        Ok(f) => f,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let level = cli::log_level(&cli, &file).unwrap_or_else(|| "warn".into());
    env_logger::Builder::new()
        .parse_filters(&level)
        .target(env_logger::Target::Stderr)
        .format_timestamp(None)
        .init();

    match cli::run(&cli, &file) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
