use anyhow::Result;
use rayon::prelude::*;
use roelab::randsub::{self, SubsetMode};
use roelab::rng;
use serde_json::json;

use crate::args::{AgreeParams, EntropyParams, LevyParams, McParams};
use crate::report::{Outcome, Verdict};

pub fn mc(p: &McParams, seed: u64) -> Result<Outcome> {
    let report = randsub::mc_lemma_random(p.d, p.n, p.delta, p.c0, p.trials, seed)?;
    let witnesses: Vec<_> = report.results.iter().map(|t| json!({ "name": "subset", "trial": t.trial, "set": t.witness })).collect();
    Ok(Outcome::new(serde_json::to_value(&report)?, Verdict::Pass).with_witnesses(witnesses.into()))
}

pub fn levy(p: &LevyParams, seed: u64) -> Result<Outcome> {
    let report = randsub::levy_median_check(p.d, p.delta, p.trials, seed)?;
    let sd = (p.d as f64).sqrt();
    let window = [p.delta.sqrt() - 3.0 / sd, p.delta.sqrt() + 12.0 / sd];
    let in_window = report.median >= window[0] && report.median <= window[1];
    let holds = report.median_holds && report.tails.iter().all(|t| t.holds);
    let mut results = serde_json::to_value(&report)?;
    results["median_window"] = json!(window);
    results["median_in_window"] = json!(in_window);
    Ok(Outcome::new(results, Verdict::from_holds(holds)))
}

pub fn entropy(p: &EntropyParams, _seed: u64) -> Result<Outcome> {
    let mut checks = Vec::new();
    for &d in &p.d {
        for &delta in &p.delta {
            checks.push(randsub::entropy_count_bound(d, delta)?);
        }
    }
    let below: Vec<_> = p.delta.iter().map(|&delta| json!({ "delta": delta, "holds": randsub::entropy_below_eps_sq(delta) })).collect();
    let all_hold = checks.iter().all(|c| c.holds);
    let results = json!({ "points": checks.len(), "all_hold": all_hold, "checks": checks, "entropy_below_eps_sq": below });
    Ok(Outcome::new(results, Verdict::from_holds(all_hold)))
}

pub fn agree(p: &AgreeParams, seed: u64) -> Result<Outcome> {
    let rows: Vec<_> = (0..p.seeds)
        .into_par_iter()
        .map(|i| -> roelab::Result<_> {
            let s = rng::mix(seed, i as u64);
            let sample = randsub::sample_subspace(p.d, p.n, s)?;
            let exact = randsub::restricted_norm_max(&sample, p.delta, SubsetMode::Exact, randsub::DEFAULT_C0)?;
            let greedy = randsub::restricted_norm_max(&sample, p.delta, SubsetMode::Greedy, randsub::DEFAULT_C0)?;
            Ok(json!({
                "seed": s,
                "exact": exact.value,
                "greedy": greedy.value,
                "gap": exact.value - greedy.value,
                "exact_witness": exact.witness,
                "greedy_witness": greedy.witness,
            }))
        })
        .collect::<roelab::Result<_>>()?;
    let gaps: Vec<f64> = rows.iter().map(|r: &serde_json::Value| r["gap"].as_f64().unwrap_or(f64::NAN)).collect();
    let max_gap = gaps.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min_gap = gaps.iter().copied().fold(f64::INFINITY, f64::min);
    let results = json!({
        "d": p.d,
        "n": p.n,
        "delta": p.delta,
        "k": randsub::subset_size(p.d, p.delta),
        "max_gap": max_gap,
        "min_gap": min_gap,
        "tol": p.tol,
        "within_tol": max_gap <= p.tol,
        "greedy_never_exceeds_exact": min_gap >= -1e-12,
        "rows": rows,
    });
    Ok(Outcome::new(results, Verdict::from_holds(min_gap >= -1e-12)))
}
