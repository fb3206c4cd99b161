use std::sync::Arc;

use anyhow::{Context, Result};
use roelab::linalg::C64;
use roelab::oper::{self, EpsMode, OperatorJson};
use roelab::rng;
use roelab::space::FiniteMetricSpace;
use roelab::SpaceOperator;
use serde_json::{json, Value};

use crate::args::{BandDistParams, EpsModeArg, EpsPropParams};
use crate::parse;
use crate::report::{Outcome, Verdict};

/// Reads the operator file, or draws a unit-norm band operator plus a full
/// perturbation of norm `noise`.
fn operator(space: Arc<FiniteMetricSpace>, file: Option<&str>, band: f64, noise: f64, seed: u64) -> Result<(SpaceOperator, Value)> {
    if let Some(path) = file {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {path}"))?;
        let json: OperatorJson = serde_json::from_str(&text).with_context(|| format!("parsing operator JSON {path}"))?;
        let u = SpaceOperator::from_json(space, &json)?;
        return Ok((u, json!({ "source": path })));
    }
    let b = oper::random_band(space.clone(), band, rng::mix(seed, 0));
    let g = oper::random_gaussian(space.clone(), rng::mix(seed, 1));
    let scaled = |u: &SpaceOperator, t: f64| -> Result<roelab::linalg::CMatrix> {
        let norm = u.opnorm()?;
        Ok(if norm > 0.0 { u.entries() * C64::from(t / norm) } else { u.entries().clone() })
    };
    let entries = scaled(&b, 1.0)? + scaled(&g, noise)?;
    let u = SpaceOperator::new(space, entries)?;
    Ok((u, json!({ "source": "random", "band": band, "noise": noise })))
}

pub fn eps_prop(p: &EpsPropParams, seed: u64) -> Result<Outcome> {
    let s = parse::space(&p.space)?;
    let (u, source) = operator(s.clone(), p.operator.as_deref(), p.band, p.noise, seed)?;
    let mode = match p.mode {
        EpsModeArg::Exact => EpsMode::Exact,
        EpsModeArg::Heuristic => EpsMode::Heuristic,
    };
    let prop = u.eps_propagation_radius(p.eps, mode, p.budget, rng::mix(seed, 2))?;
    let verdict = Verdict::from_holds(prop.lower <= prop.upper || prop.lower.is_nan());
    let witnesses = json!([{ "name": "separated_rectangle", "rectangle": prop.witness }]);
    let results = json!({
        "label": s.label(),
        "n": s.len(),
        "operator": source,
        "norm": u.opnorm()?,
        "eps": p.eps,
        "propagation": prop,
    });
    Ok(Outcome::new(results, verdict).with_witnesses(witnesses))
}

pub fn band_dist(p: &BandDistParams, seed: u64) -> Result<Outcome> {
    let s = parse::space(&p.space)?;
    let (u, source) = operator(s.clone(), p.operator.as_deref(), p.band, p.noise, seed)?;
    let d = u.dist_to_band_bounds(p.r, p.budget, rng::mix(seed, 2))?;
    let verdict = Verdict::from_holds(d.lower <= d.upper + 1e-9);
    let witnesses = json!([{ "name": "separated_rectangle", "rectangle": d.witness }]);
    let results = json!({
        "label": s.label(),
        "n": s.len(),
        "operator": source,
        "norm": u.opnorm()?,
        "distance": d,
    });
    Ok(Outcome::new(results, verdict).with_witnesses(witnesses))
}
