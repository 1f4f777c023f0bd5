use std::process::ExitCode;

use clap::Parser;
use lesionmetrics_cli::args::Cli;
use lesionmetrics_cli::CommandError;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { CommandError::EXIT_CONFIG } else { CommandError::EXIT_OK };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    match lesionmetrics_cli::run(&cli).map_err(anyhow::Error::from) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            let code = e.downcast_ref::<CommandError>().map_or(CommandError::EXIT_DATA, CommandError::exit_code);
            ExitCode::from(code as u8)
        }
    }
}
