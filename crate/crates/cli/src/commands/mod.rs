//! Command dispatch: every run goes through [`run_config`].

pub mod oper;
pub mod propa;
pub mod ql;
pub mod randsub;
pub mod reps;
pub mod space;
pub mod translations;

use std::time::Instant;

use anyhow::{anyhow, bail, Result};
use clap::Parser;
use serde::Serialize;
use serde_json::json;

use crate::args::{AllParams, Cli, Group, OperCmd, PropaCmd, QlCmd, RandsubCmd, RepsCmd, SpaceCmd, TranslationsCmd};
use crate::config::{apply_params, ExperimentConfig};
use crate::report::{Outcome, Report, Verdict};

/// Calls `$go` with the parameter struct of whichever leaf command `$group` holds.
macro_rules! each_leaf {
    ($group:expr, $go:ident) => {
        match $group {
            Group::Space(SpaceCmd::Gen(p)) => $go!(p, space::gen),
            Group::Space(SpaceCmd::Kappa(p)) => $go!(p, space::kappa),
            Group::Oper(OperCmd::EpsProp(p)) => $go!(p, oper::eps_prop),
            Group::Oper(OperCmd::BandDist(p)) => $go!(p, oper::band_dist),
            Group::Translations(TranslationsCmd::Decompose(p)) => $go!(p, translations::decompose),
            Group::Reps(RepsCmd::IrrCheck(p)) => $go!(p, reps::irr_check),
            Group::Reps(RepsCmd::GapCert(p)) => $go!(p, reps::gap_cert),
            Group::Reps(RepsCmd::TheoremARadius(p)) => $go!(p, reps::theorem_a),
            Group::Randsub(RandsubCmd::Mc(p)) => $go!(p, randsub::mc),
            Group::Randsub(RandsubCmd::Levy(p)) => $go!(p, randsub::levy),
            Group::Randsub(RandsubCmd::Entropy(p)) => $go!(p, randsub::entropy),
            Group::Randsub(RandsubCmd::Agree(p)) => $go!(p, randsub::agree),
            Group::Ql(QlCmd::Build(p)) => $go!(p, ql::build_cmd),
            Group::Ql(QlCmd::Profile(p)) => $go!(p, ql::profile),
            Group::Ql(QlCmd::Witness(p)) => $go!(p, ql::witness),
            Group::Propa(PropaCmd::Sz(p)) => $go!(p, propa::sz),
            Group::Propa(PropaCmd::Lip(p)) => $go!(p, propa::lip),
            Group::Propa(PropaCmd::Rademacher(p)) => $go!(p, propa::rademacher),
            Group::All(p) => $go!(p, all),
            Group::Diff(_) => bail!("`diff` compares reports and has no config form"),
        }
    };
}

/// The parameter table a parsed command line carries, defaults included.
pub fn params_table(group: &Group) -> Result<toml::Table> {
    macro_rules! table {
        ($p:expr, $f:path) => {
            toml::Table::try_from($p)?
        };
    }
    Ok(each_leaf!(group, table))
}

fn parse_command(command: &str) -> Result<Group> {
    let words = command.split_whitespace();
    let cli =
        Cli::try_parse_from(std::iter::once("roelab").chain(words)).map_err(|e| anyhow!("unknown command `{command}`: {}", e.kind()))?;
    cli.command.ok_or_else(|| anyhow!("config has an empty command"))
}

fn echo<P: Serialize>(p: &P) -> Result<toml::Table> {
    Ok(toml::Table::try_from(p)?)
}

/// Resolves the parameters of `cfg` against the command's defaults and runs it.
pub fn run_config(cfg: &ExperimentConfig) -> Result<Report> {
    let group = parse_command(&cfg.command)?;
    let seed = cfg.seed;
    let start = Instant::now();
    macro_rules! go {
        ($p:expr, $f:path) => {{
            let p = apply_params($p, &cfg.params)?;
            (echo(&p)?, $f(&p, seed)?)
        }};
    }
    let (params, outcome): (toml::Table, Outcome) = each_leaf!(&group, go);
    let mut config = cfg.clone();
    config.params = params;
    Ok(Report {
        command: cfg.command.split_whitespace().collect::<Vec<_>>().join(" "),
        config,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        wall_time_ms: start.elapsed().as_millis() as u64,
        verdict: outcome.verdict,
        results: outcome.results,
        witnesses: outcome.witnesses,
    })
}

/// Small instances of every command.
pub fn smoke_battery() -> Vec<ExperimentConfig> {
    let c = ExperimentConfig::new;
    vec![
        c("space gen", 1).with_param("space", "regular:16:4:1"),
        c("space kappa", 1).with_param("space", "regular:12:4:1"),
        c("oper eps-prop", 1).with_param("space", "path:8"),
        c("oper band-dist", 1).with_param("space", "cycle:8"),
        c("translations decompose", 1).with_param("space", "cycle:8").with_param("r", 2.0),
        c("reps irr-check", 1).with_param("group", "heis:3").with_param("trials", 10),
        c("reps gap-cert", 1).with_param("group", "heis:5").with_param("space", "far:5"),
        c("reps theorem-a-radius", 1),
        c("randsub mc", 1).with_param("d", 40).with_param("n", 2).with_param("delta", 0.1).with_param("trials", 4),
        c("randsub levy", 1).with_param("trials", 200),
        c("randsub entropy", 1).with_param("d", vec![100i64, 200]),
        c("randsub agree", 1).with_param("seeds", 4),
        c("ql build", 1).with_param("members", vec![16i64, 32]),
        c("ql profile", 1).with_param("members", vec![16i64, 32]).with_param("budget", 100),
        c("ql witness", 1).with_param("members", vec![16i64, 32]).with_param("budget", 100),
        c("propa sz", 1).with_param("n", 60).with_param("eps", 0.01).with_param("r", 1.0),
        c("propa lip", 1).with_param("n", 40).with_param("instances", 10),
        c("propa rademacher", 1).with_param("n", 60).with_param("trials", 200),
    ]
}

/// Acceptance-scale instances of every command.
pub fn full_battery() -> Vec<ExperimentConfig> {
    let c = ExperimentConfig::new;
    vec![
        c("space kappa", 1).with_param("space", "regular:20:4:1"),
        c("translations decompose", 1).with_param("space", "regular:64:4:1").with_param("r", 3.0),
        c("reps irr-check", 1).with_param("group", "heis:7"),
        c("reps irr-check", 1).with_param("group", "sym:5"),
        c("reps gap-cert", 1).with_param("group", "heis:67").with_param("space", "far:67"),
        c("randsub mc", 1),
        c("randsub levy", 1),
        c("randsub entropy", 1),
        c("randsub agree", 1),
        c("ql profile", 2),
        c("ql witness", 2),
        c("propa sz", 1).with_param("contractions", 20),
        c("propa lip", 1),
        c("propa rademacher", 8),
    ]
}

pub fn all(p: &AllParams, _seed: u64) -> Result<Outcome> {
    let battery = if p.smoke { smoke_battery() } else { full_battery() };
    let mut rows = Vec::new();
    let mut ok = true;
    for cfg in &battery {
        let r = run_config(cfg)?;
        ok &= r.verdict == Verdict::Pass;
        rows.push(json!({ "command": r.command, "seed": cfg.seed, "params": r.config.params, "verdict": r.verdict }));
    }
    Ok(Outcome::new(json!({ "smoke": p.smoke, "runs": rows }), Verdict::from_holds(ok)))
}
