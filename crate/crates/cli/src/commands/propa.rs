use std::sync::Arc;

use anyhow::Result;
use rand::Rng as _;
use rayon::prelude::*;
use roelab::propa::{
    commutator_bound_check, rademacher_diagnostics, random_valid_contraction, sz_approximate, IsometryField, PropertyAKernel,
    RademacherInput, SaturationPolicy,
};
use roelab::rng;
use roelab::space::interval;
use serde_json::json;

use crate::args::{LipParams, PolicyArg, RademacherParams, SzParams};
use crate::report::{Outcome, Verdict};

pub fn sz(p: &SzParams, seed: u64) -> Result<Outcome> {
    let space = Arc::new(interval(p.n));
    let policy = match p.policy {
        PolicyArg::Saturate => SaturationPolicy::Saturate,
        PolicyArg::Strict => SaturationPolicy::Strict,
    };
    let reports: Vec<_> = (0..p.contractions)
        .map(|i| -> roelab::Result<_> {
            let u = random_valid_contraction(space.clone(), p.r, p.eps, rng::mix(seed, i as u64))?;
            Ok(sz_approximate(&u, p.eps, p.r, policy)?.1)
        })
        .collect::<roelab::Result<_>>()?;
    let first = &reports[0];
    let all_hold = reports.iter().all(|r| r.holds && r.propagation_ok);
    let max_error = reports.iter().map(|r| r.error).fold(0.0, f64::max);
    let results = json!({
        "N": p.n,
        "eps": p.eps,
        "R": p.r,
        "delta": first.delta,
        "S": first.s,
        "T": first.t,
        "bound": first.bound,
        "vacuous": first.vacuous,
        "saturated": first.mu_saturated || first.nu_saturated,
        "max_error": max_error,
        "min_slack": first.bound - max_error,
        "all_hold": all_hold,
        "reports": reports,
    });
    Ok(Outcome::new(results, Verdict::from_holds(all_hold)))
}

/// A random walk with steps in `[−δ/R, δ/R]`, clamped to `[0, 1]`.
fn random_multiplier(n: usize, r: f64, delta: f64, g: &mut impl rand::Rng) -> Vec<f64> {
    let mut h = Vec::with_capacity(n);
    let mut v: f64 = g.random();
    for _ in 0..n {
        h.push(v);
        v = (v + g.random_range(-1.0..=1.0) * delta / r.max(1.0)).clamp(0.0, 1.0);
    }
    h
}

pub fn lip(p: &LipParams, seed: u64) -> Result<Outcome> {
    let space = Arc::new(interval(p.n));
    let rows: Vec<_> = (0..p.instances)
        .into_par_iter()
        .map(|i| -> roelab::Result<_> {
            let mut g = rng::derived(seed, i as u64);
            let delta = g.random_range(0.005..0.2);
            let eps = if g.random_bool(0.25) { 0.0 } else { g.random_range(0.0..0.05) };
            let h = random_multiplier(p.n, p.r, delta, &mut g);
            let u = random_valid_contraction(space.clone(), p.r, eps, rng::mix(seed, i as u64))?;
            let rep = commutator_bound_check(&u, &h, p.r, delta, eps)?;
            Ok(json!({
                "instance": i,
                "delta": delta,
                "eps": eps,
                "commutator_norm": rep.commutator_norm,
                "bound": rep.bound,
                "slack": rep.slack,
                "holds": rep.holds,
            }))
        })
        .collect::<roelab::Result<_>>()?;
    let all_hold = rows.iter().all(|r: &serde_json::Value| r["holds"] == true);
    let min_slack = rows.iter().filter_map(|r| r["slack"].as_f64()).fold(f64::INFINITY, f64::min);
    let results = json!({ "N": p.n, "R": p.r, "instances": p.instances, "all_hold": all_hold, "min_slack": min_slack, "rows": rows });
    Ok(Outcome::new(results, Verdict::from_holds(all_hold)))
}

pub fn rademacher(p: &RademacherParams, seed: u64) -> Result<Outcome> {
    let mu = PropertyAKernel::interval(p.n, p.r, p.delta, SaturationPolicy::Strict)?;
    let nu = PropertyAKernel::interval(p.n, mu.support(), p.delta, SaturationPolicy::Strict)?;
    let field = IsometryField::new(nu)?;
    let u = random_valid_contraction(field.space().clone(), p.r, p.eps, rng::mix(seed, 1))?;
    let report = rademacher_diagnostics(&field, RademacherInput { mu: Some(&mu), u: Some((&u, p.eps)) }, p.trials, seed)?;
    let results = json!({
        "N": p.n,
        "R": p.r,
        "delta": p.delta,
        "eps": p.eps,
        "S": mu.support(),
        "T": field.t(),
        "growth_T": field.space().growth(field.t()),
        "diagnostics": report,
    });
    Ok(Outcome::new(results, Verdict::from_holds(report.pass)))
}
