mod args;
mod commands;
mod summary;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter("RATIOND_LOG")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Generate { config, out, seed } => commands::generate_cmd(config, out, *seed),
        Command::Solve {
            instance,
            algorithm,
            out,
            metrics,
            common,
        } => commands::solve_cmd(instance, *algorithm, out.as_deref(), metrics.as_deref(), common),
        Command::Compare {
            instance,
            model2,
            metrics_dir,
            common,
        } => commands::compare_cmd(instance, *model2, metrics_dir, common),
        Command::Verify {
            instance,
            model2,
            allocation,
            sample_agents,
            seed,
            common,
        } => commands::verify_cmd(instance, *model2, allocation.as_deref(), *sample_agents, *seed, common),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            log::debug!("exiting with {e:?}");
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
