use anyhow::{ensure, Result};
use roelab::space::{self, KappaMode};
use serde_json::json;

use crate::args::{KappaModeArg, SpaceGenParams, SpaceKappaParams};
use crate::parse;
use crate::report::{Outcome, Verdict};

pub fn gen(p: &SpaceGenParams, seed: u64) -> Result<Outcome> {
    let s = match &p.regular {
        Some(nd) => {
            ensure!(nd.len() == 2, "--regular takes two values: N D");
            std::sync::Arc::new(space::random_regular(nd[0], nd[1], seed)?)
        }
        None => parse::space(&p.space)?,
    };
    let results = json!({
        "label": s.label(),
        "n": s.len(),
        "diameter": s.diameter(),
        "growth_1": s.growth(1.0),
        "space": s.to_json(),
    });
    Ok(Outcome::new(results, Verdict::Pass))
}

pub fn kappa(p: &SpaceKappaParams, _seed: u64) -> Result<Outcome> {
    let s = parse::space(&p.space)?;
    let mode = match p.mode {
        KappaModeArg::Exact => KappaMode::Exact,
        KappaModeArg::Spectral => KappaMode::Spectral,
    };
    let k = space::expansion_kappa(&s, p.r, mode)?;
    let witnesses = json!([{ "name": "minimizing_set", "set": k.witness }]);
    let results = json!({ "label": s.label(), "n": s.len(), "radius": p.r, "kappa": k });
    Ok(Outcome::new(results, Verdict::Pass).with_witnesses(witnesses))
}
