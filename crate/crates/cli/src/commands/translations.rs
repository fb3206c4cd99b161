use anyhow::Result;
use roelab::translations::decompose_band;
use serde_json::json;

use crate::args::DecomposeParams;
use crate::parse;
use crate::report::{Outcome, Verdict};

pub fn decompose(p: &DecomposeParams, _seed: u64) -> Result<Outcome> {
    let s = parse::space(&p.space)?;
    let d = decompose_band(s.clone(), p.r);
    let growth = s.growth(p.r);
    let verified = d.verify().is_ok();
    let cap = 2 * growth;
    let results = json!({
        "label": s.label(),
        "n": s.len(),
        "growth": growth,
        "cap": cap,
        "part_count": d.parts.len(),
        "verified": verified,
        "decomposition": d.to_json(),
    });
    Ok(Outcome::new(results, Verdict::from_holds(verified && d.parts.len() <= cap)))
}
