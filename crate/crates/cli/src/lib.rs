//! Report-producing front end for `morrey-core`: norm evaluation, checks of
//! the witness constructions, and searches over function pairs.

pub mod commands;
pub mod config;
pub mod report;

use anyhow::Result;
use clap::{Parser, Subcommand};

pub use config::{Format, ModeSel, Overrides, RunConfig};
pub use report::{Check, Relation, Report};

#[derive(Debug, Parser)]
#[command(name = "morrey", version, about = "Morrey norms and geometric constants")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub overrides: Overrides,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Norm of one function (`--function`).
    Norm,
    /// Norms and ratios of the Morrey witness pair.
    VerifyThm1,
    /// Small Morrey witness pairs along the `--eps` ladder.
    VerifyThm2,
    /// Lower bounds for the four constants.
    Constants,
    /// Random pair sweep; every ratio must stay at or below 2.
    Search,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Norm => "norm",
            Command::VerifyThm1 => "verify-thm1",
            Command::VerifyThm2 => "verify-thm2",
            Command::Constants => "constants",
            Command::Search => "search",
        }
    }
}

pub fn run(command: Command, config: &RunConfig) -> Result<Report> {
    match command {
        Command::Norm => commands::cmd_norm(config),
        Command::VerifyThm1 => commands::cmd_verify_thm1(config),
        Command::VerifyThm2 => commands::cmd_verify_thm2(config),
        Command::Constants => commands::cmd_constants(config),
        Command::Search => commands::cmd_search(config),
    }
}
