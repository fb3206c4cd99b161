//! Command-line experiment runner for `roelab`: typed commands, TOML
//! configs, JSON/CSV reports and report diffs.

pub mod args;
pub mod commands;
pub mod config;
pub mod diff;
pub mod parse;
pub mod report;

use std::ffi::OsString;

use anyhow::anyhow;
use clap::parser::ValueSource;
use clap::{ArgMatches, CommandFactory, FromArgMatches};

pub use commands::run_config;
pub use config::ExperimentConfig;
pub use diff::{report_diff, DiffEntry, DiffError};
pub use report::{Outcome, Report, Verdict};

use args::{Cli, DiffArgs, Group};

pub const GLOBAL_ARGS: [&str; 4] = ["config", "seed", "out", "format"];

/// What the command line asks for.
#[derive(Debug)]
pub enum Invocation {
    Run(ExperimentConfig),
    Diff(DiffArgs),
}

#[derive(Debug)]
pub enum InvocationError {
    /// Help, version, or a malformed command line; clap renders it.
    Clap(clap::Error),
    Usage(anyhow::Error),
}

impl From<clap::Error> for InvocationError {
    fn from(e: clap::Error) -> Self {
        InvocationError::Clap(e)
    }
}

impl From<anyhow::Error> for InvocationError {
    fn from(e: anyhow::Error) -> Self {
        InvocationError::Usage(e)
    }
}

/// The command words of the `--config` file, if one is named on the command line.
fn config_command(argv: &[OsString]) -> anyhow::Result<Option<Vec<String>>> {
    let mut path = None;
    for (i, a) in argv.iter().enumerate() {
        match a.to_str() {
            Some("--config") => path = argv.get(i + 1).cloned(),
            Some(s) if s.starts_with("--config=") => path = Some(OsString::from(&s["--config=".len()..])),
            _ => {}
        }
    }
    let Some(path) = path else { return Ok(None) };
    let cfg = ExperimentConfig::load(std::path::Path::new(&path))?;
    Ok(Some(cfg.command.split_whitespace().map(String::from).collect()))
}

fn leaf(matches: &ArgMatches) -> (Vec<String>, &ArgMatches) {
    let mut words = Vec::new();
    let mut m = matches;
    while let Some((name, sub)) = m.subcommand() {
        words.push(name.to_string());
        m = sub;
    }
    (words, m)
}

/// Parses the command line, folding in `--config` so that flags given
/// explicitly override the file and the file overrides defaults.
pub fn parse_invocation<I, T>(argv: I) -> Result<Invocation, InvocationError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let mut argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    if let Some(words) = config_command(&argv)? {
        let group = Cli::command().get_subcommands().any(|c| argv.iter().skip(1).any(|a| a.to_str() == Some(c.get_name())));
        if !group {
            argv.splice(1..1, words.into_iter().map(OsString::from));
        }
    }
    let matches = Cli::command().try_get_matches_from(&argv)?;
    let cli = Cli::from_arg_matches(&matches)?;
    let file = cli.config.as_deref().map(ExperimentConfig::load).transpose()?;
    let Some(group) = cli.command else {
        return Err(anyhow!("no command given; pass a subcommand or --config with a `command` key (see --help)").into());
    };
    if let Group::Diff(d) = group {
        return Ok(Invocation::Diff(d));
    }
    let (words, leaf_matches) = leaf(&matches);
    let command = words.join(" ");
    if let Some(f) = &file {
        let fc = f.command.split_whitespace().collect::<Vec<_>>().join(" ");
        if fc != command {
            return Err(anyhow!("config command `{fc}` differs from the command line `{command}`").into());
        }
    }
    let flags = commands::params_table(&group)?;
    let explicit: Vec<String> = leaf_matches
        .ids()
        .map(|id| id.as_str().to_string())
        .filter(|id| !GLOBAL_ARGS.contains(&id.as_str()) && leaf_matches.value_source(id) == Some(ValueSource::CommandLine))
        .collect();
    let mut cfg = file.unwrap_or_else(|| ExperimentConfig::new(command.clone(), 0));
    cfg.command = command;
    for key in explicit {
        if let Some(v) = flags.get(&key) {
            cfg.params.insert(key, v.clone());
        }
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if cli.out.is_some() {
        cfg.out = cli.out;
    }
    if let Some(format) = cli.format {
        cfg.format = format;
    }
    Ok(Invocation::Run(cfg))
}
