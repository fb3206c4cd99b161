use anyhow::Result;
use roelab::quasilocal::{self, QuasiLocalAssembly};
use roelab::rng;
use roelab::ExpanderFamily;
use serde_json::{json, Value};

use crate::args::{QlBuildParams, QlProfileParams, QlWitnessParams};
use crate::report::{Outcome, Verdict};

pub struct Family<'a> {
    pub members: &'a [usize],
    pub degree: usize,
    pub r0: f64,
    pub c0: f64,
    pub max_rejects: usize,
}

/// Builds the family and the assembly; the summary lists each member's selection.
pub fn build(f: &Family<'_>, seed: u64) -> Result<(QuasiLocalAssembly, Value)> {
    let family = ExpanderFamily::random_regular(f.members, f.degree, f.r0, seed)?;
    let selections = quasilocal::select_subspaces(&family, f.c0, None, f.max_rejects, rng::mix(seed, 1))?;
    let rows: Vec<Value> = selections
        .iter()
        .enumerate()
        .map(|(m, s)| json!({ "member": m, "d": s.sample.d, "dim": s.sample.n, "seed": s.sample.seed, "rejections": s.rejections, "checks": s.checks }))
        .collect();
    let samples = selections.into_iter().map(|s| s.sample).collect();
    let a = quasilocal::assemble(&family, samples, f.c0)?;
    let summary = json!({
        "members": f.members,
        "degree": f.degree,
        "r0": f.r0,
        "c0": f.c0,
        "kappa": family.kappa(),
        "kappa_kind": family.kappa_kind(),
        "member_kappas": family.member_kappas(),
        "ambient_points": a.ambient.len(),
        "schedule": a.schedule,
        "selections": rows,
        "is_projection": a.is_projection,
        "projection_error": a.projection_error(),
        "trace": a.trace(),
        "off_block_max": a.off_block_max(),
    });
    Ok((a, summary))
}

pub fn build_cmd(p: &QlBuildParams, seed: u64) -> Result<Outcome> {
    let f = Family { members: &p.members, degree: p.degree, r0: p.r0, c0: p.c0, max_rejects: p.max_rejects };
    let (a, summary) = build(&f, seed)?;
    let ok = a.is_projection && a.projection_error() <= quasilocal::PROJECTION_TOL;
    Ok(Outcome::new(summary, Verdict::from_holds(ok)))
}

pub fn profile(p: &QlProfileParams, seed: u64) -> Result<Outcome> {
    let f = Family { members: &p.members, degree: p.degree, r0: p.r0, c0: p.c0, max_rejects: p.max_rejects };
    let (a, summary) = build(&f, seed)?;
    let prof = quasilocal::quasilocality_profile(&a, &p.eps, p.budget, rng::mix(seed, 2))?;
    let ordered = prof.rows.iter().all(|r| r.lower <= r.upper);
    let monotone = prof.rows.windows(2).all(|w| w[0].lower <= w[1].lower && w[0].upper <= w[1].upper);
    let witnesses: Vec<Value> = prof
        .rows
        .iter()
        .map(|r| json!({ "name": "separated_rectangle", "eps": r.eps, "member": r.member, "rectangle": r.witness }))
        .collect();
    let results = json!({
        "assembly": summary,
        "rows": prof.rows,
        "brackets_ordered": ordered,
        "monotone": monotone,
        "mechanism": prof.mechanism,
    });
    Ok(Outcome::new(results, Verdict::from_holds(ordered && prof.mechanism.all_hold)).with_witnesses(witnesses.into()))
}

pub fn witness(p: &QlWitnessParams, seed: u64) -> Result<Outcome> {
    let f = Family { members: &p.members, degree: p.degree, r0: p.r0, c0: p.c0, max_rejects: p.max_rejects };
    let (a, summary) = build(&f, seed)?;
    let w = quasilocal::non_band_witness(&a, p.r, p.budget, rng::mix(seed, 3))?;
    let witnesses = json!([{ "name": "separated_rectangle", "member": w.member, "rectangle": w.witness }]);
    let results = json!({ "assembly": summary, "witness": w });
    Ok(Outcome::new(results, Verdict::from_holds(w.lower <= w.upper + 1e-9)).with_witnesses(witnesses))
}
