use anyhow::Result;
use rayon::prelude::*;
use roelab::reps::{gap_certificate, gap_lower_bound, random_phases, theorem_a_radius, Approximants, GapCertificateInput};
use roelab::rng;
use serde_json::json;

use crate::args::{GapCertParams, IrrCheckParams, TheoremARadiusParams};
use crate::parse;
use crate::report::{Outcome, Verdict};

pub const AVERAGE_TOL: f64 = 1e-9;

pub fn irr_check(p: &IrrCheckParams, seed: u64) -> Result<Outcome> {
    let rep = parse::group(&p.group)?;
    let cert = rep.certificate()?;
    let norms: Vec<f64> = (0..p.trials)
        .into_par_iter()
        .map(|t| rep.averaged_norm(&random_phases(rep.order(), rng::mix(seed, t as u64))))
        .collect::<roelab::Result<_>>()?;
    let (worst, max) = norms.iter().copied().enumerate().fold((0, f64::NEG_INFINITY), |b, (i, v)| if v > b.1 { (i, v) } else { b });
    let bound = 1.0 / (rep.dim() as f64).sqrt();
    let holds = max <= bound + AVERAGE_TOL;
    let results = json!({
        "group": p.group,
        "dim": rep.dim(),
        "order": rep.order(),
        "structure": rep.structure(),
        "homomorphism_error": rep.homomorphism_error(seed),
        "certificate": cert,
        "trials": p.trials,
        "max_averaged_norm": max,
        "bound": bound,
        "slack": bound - max,
        "holds": holds,
    });
    let witnesses = json!([{ "name": "worst_coefficients", "trial": worst, "seed": rng::mix(seed, worst as u64) }]);
    Ok(Outcome::new(results, Verdict::from_holds(holds && cert.passes)).with_witnesses(witnesses))
}

pub fn gap_cert(p: &GapCertParams, _seed: u64) -> Result<Outcome> {
    let rep = parse::group(&p.group)?;
    let space = parse::space(&p.space)?;
    let input =
        GapCertificateInput { rep: &rep, space, radius: p.r, placement: None, approximants: Approximants::BandTruncation, corners: None };
    let report = gap_certificate(&input)?;
    let verdict = Verdict::from_holds(report.pass);
    Ok(Outcome::new(serde_json::to_value(&report)?, verdict))
}

pub fn theorem_a(p: &TheoremARadiusParams, _seed: u64) -> Result<Outcome> {
    let rep = parse::group(&p.group)?;
    let space = parse::space(&p.space)?;
    let n = rep.dim();
    let radius = theorem_a_radius(n, &space);
    let growth = (radius >= 0).then(|| space.growth(radius as f64));
    let results = json!({
        "group": p.group,
        "n": n,
        "threshold": (n as f64).sqrt() / 8.0,
        "radius": radius,
        "growth": growth,
        "gap_bound": growth.map(|g| gap_lower_bound(n as f64, g as f64)),
    });
    Ok(Outcome::new(results, Verdict::Pass))
}
