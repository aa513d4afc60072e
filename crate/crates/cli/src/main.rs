mod args;
mod commands;
mod failure;
mod synth;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use args::{Cli, Command};
use failure::Failure;

fn run(cli: &Cli) -> Result<(), Failure> {
    match &cli.command {
        Command::Render(c) => commands::render(c),
        Command::Stack(c) => commands::stack(c),
        Command::Compose(c) => commands::compose(c),
        Command::Refine(c) => commands::refine(c),
        Command::Defocus(c) => commands::defocus(c),
        Command::Eval(c) => commands::eval(c),
        Command::GenScene(c) => commands::gen_scene(c),
    }
}

fn echo_config(cli: &Cli, threads: usize) {
    eprintln!("config: threads={threads} {:?}", cli.command);
    let lens = match &cli.command {
        Command::Render(c) => Some(&c.lens),
        Command::Stack(c) => Some(&c.lens),
        Command::Defocus(c) => Some(&c.lens),
        Command::GenScene(c) => Some(&c.lens),
        _ => None,
    };
    if let Some(Ok(lens)) = lens.map(|l| l.lens()) {
        eprintln!("lens: {lens:?}");
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let rendered = e.to_string();
            let summary: Vec<&str> = rendered
                .lines()
                .map(str::trim)
                .take_while(|l| !l.starts_with("Usage:") && !l.starts_with("For more information"))
                .filter(|l| !l.is_empty())
                .collect();
            let failure = Failure::usage(summary.join(" ").trim_start_matches("error: "));
            eprintln!("{failure}");
            return ExitCode::from(failure.code);
        }
    };

    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build() {
        Ok(pool) => pool,
        Err(e) => {
            let failure = Failure::usage(format!("cannot start {} threads: {e}", cli.threads));
            eprintln!("{failure}");
            return ExitCode::from(failure.code);
        }
    };
    if cli.verbose {
        echo_config(&cli, pool.current_num_threads());
    }
    match pool.install(|| run(&cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("{failure}");
            ExitCode::from(failure.code)
        }
    }
}
