mod args;
mod commands;
mod config;
mod error;
mod model;
mod output;
mod parse;
mod svg;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command, Format};
use config::Layer;
use error::{CliError, EXIT_CHECK_FAILED};
use output::{PlotSink, Sink};

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    let name = cli.command.name();
    let layer = Layer::load(cli.common.config.as_deref(), name)?;
    let default_format = if matches!(cli.command, Command::Check(_)) { Format::Jsonl } else { Format::Csv };
    let format = layer.get(cli.common.format, "format", default_format)?;
    let output = layer.opt(cli.common.output.clone(), "output")?;
    let plot_path = layer.opt(cli.common.plot.clone(), "plot")?;
    let (seed, threads) = (cli.common.seed, cli.common.threads);

    let sink = Sink::open(output, format, name)?;
    let plot = PlotSink::open(plot_path)?;
    if plot.wanted() && matches!(cli.command, Command::Check(_)) {
        return Err(CliError::flag("plot", "the check command has no plot"));
    }
    let written = sink.path().map(|p| p.display().to_string());

    let mut code = ExitCode::SUCCESS;
    match &cli.command {
        Command::Theory(a) => commands::theory::run(a, &layer, sink, plot)?,
        Command::Sweep(a) => commands::simulate::run_sweep(a, &layer, seed, threads, sink, plot)?,
        Command::Simulate(a) => commands::simulate::run_simulate(a, &layer, seed, threads, sink, plot)?,
        Command::Anova(a) => commands::simulate::run_anova(a, &layer, seed, threads, sink, plot)?,
        Command::Empirical(a) => commands::empirical::run(a, &layer, seed, threads, sink, plot)?,
        Command::Check(a) => {
            let results = commands::check::run(a, &layer, seed)?;
            let failed: Vec<_> = results.iter().filter(|r| r.failed()).collect();
            let asserted = results.iter().filter(|r| r.asserted).count();
            for r in &failed {
                eprintln!("FAIL {}/{}: value {:e}, tolerance {:e}; {}", r.suite, r.check, r.value, r.tolerance, r.detail);
            }
            eprintln!("check: {} of {asserted} asserted checks passed", asserted - failed.len());
            if !failed.is_empty() {
                code = ExitCode::from(EXIT_CHECK_FAILED);
            }
            sink.write(&results)?;
        }
    }
    for key in layer.unused() {
        eprintln!("warning: config key '{key}' is not used by the {name} command");
    }
    if let Some(p) = written {
        eprintln!("wrote {p}");
    }
    Ok(code)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code)
        }
    }
}
