use std::process::ExitCode;
use std::time::Instant;

use anyhow::Result;
use clap::Parser;
use morrey_cli::{run, Cli, RunConfig};

fn main() -> ExitCode {
    match real_main() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn real_main() -> Result<bool> {
    let cli = Cli::parse();
    let config = RunConfig::resolve(&cli.overrides)?;
    if let Some(t) = config.threads {
        rayon::ThreadPoolBuilder::new().num_threads(t).build_global()?;
    }
    let start = Instant::now();
    let report = run(cli.command, &config)?;
    report.write(config.format, config.out.as_deref())?;
    // kept out of the report so identical runs give identical bytes
    eprintln!("{}: {} checks, {} failed, {:.2?}", cli.command.name(), report.checks.len(), report.failures().count(), start.elapsed());
    for f in report.failures() {
        eprintln!(
            "FAIL {}: expected {:?} computed {:?} tolerance {}",
            f.name, f.expected, f.computed, f.tolerance
        );
    }
    Ok(report.passed)
}
