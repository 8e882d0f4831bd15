mod args;
mod commands;
mod report;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command, Format};
use commands::Runner;
use report::{emit, render_json, CliError, CliResult};

fn run(cli: &Cli) -> CliResult<()> {
    let runner = Runner::new(&cli.common, &cli.command)?;
    let out = match (&cli.command, cli.common.format) {
        (Command::Validate, None) => runner.validate_lines()?,
        _ => runner.run(&cli.command)?,
    };
    let bytes = match (cli.common.format, &out.text) {
        (None, Some(text)) => text.clone().into_bytes(),
        (Some(Format::Csv), _) => out.table.to_csv()?,
        _ => render_json(cli.command.name(), &runner.config, &out.result)?,
    };
    emit(&bytes, cli.common.out.as_deref())?;
    match out.failure {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();

    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.common.workers).build() {
        Ok(p) => p,
        Err(e) => {
            let e = CliError::runtime(format!("cannot start worker pool: {e}"));
            eprintln!("error: {e}");
            return ExitCode::from(e.code as u8);
        }
    };
    match pool.install(|| run(&cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code as u8)
        }
    }
}
