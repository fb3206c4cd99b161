//! The averaging map `Φ_ν`, the commutator estimate for slowly varying
//! multipliers, and generators of operators satisfying its hypotheses.

use std::sync::Arc;

use rand::seq::IndexedRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, C64};
use crate::oper::{self, EpsMode, SpaceOperator, DEFAULT_BUDGET, EXACT_EPS_MAX};
use crate::propa::kernel::IsometryField;
use crate::rng;
use crate::space::FiniteMetricSpace;

pub const COMMUTATOR_TOL: f64 = 1e-9;
/// Slack allowed when comparing a band tail norm with `ε`.
pub const TAIL_TOL: f64 = 1e-12;

/// `Φ_ν(u) = Σ_z f_z u f_z`, i.e. `u[y][x] · k(x, y)` with the Gram kernel of the field.
pub fn phi_nu(u: &SpaceOperator, field: &IsometryField) -> Result<SpaceOperator> {
    if u.len() != field.space().len() {
        return Err(Error::DimensionMismatch(format!("operator on {} points, field on {}", u.len(), field.space().len())));
    }
    let k = field.gram();
    let entries = CMatrix::from_fn(u.len(), u.len(), |y, x| u.entry(y, x) * k[(x, y)]);
    u.with_entries(entries)
}

/// How the `ε`-propagation hypothesis was confirmed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PropagationCheck {
    /// `‖u − band_R(u)‖ <= ε`, which bounds every `R`-separated rectangle.
    BandTail,
    /// Exact subset scan.
    Exact,
}

/// Confirms that `u` has `ε`-propagation at most `r`.
pub fn certify_eps_propagation(u: &SpaceOperator, eps: f64, r: f64) -> Result<PropagationCheck> {
    let tail = u.band_tail_norm(r)?;
    if tail <= eps + TAIL_TOL {
        return Ok(PropagationCheck::BandTail);
    }
    if u.len() <= EXACT_EPS_MAX {
        let p = u.eps_propagation_radius(eps, EpsMode::Exact, DEFAULT_BUDGET, 0)?;
        if p.upper <= r {
            return Ok(PropagationCheck::Exact);
        }
        let w = p.witness.expect("exact scan returns a witness when the radius is positive");
        return Err(Error::HypothesisViolated(format!(
            "eps-propagation {} > R = {r}: rows {:?}, columns {:?} have norm {} > eps = {eps}",
            p.upper, w.a, w.b, w.value
        )));
    }
    Err(Error::HypothesisViolated(format!(
        "cannot confirm eps-propagation <= {r}: band tail norm {tail} exceeds eps = {eps} and {} points is too many for the exact scan",
        u.len()
    )))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommutatorReport {
    pub radius: f64,
    pub delta: f64,
    pub eps: f64,
    pub u_norm: f64,
    pub commutator_norm: f64,
    /// `4δ‖u‖ + 2ε/δ`.
    pub bound: f64,
    pub slack: f64,
    pub holds: bool,
    pub propagation_check: PropagationCheck,
}

/// Checks that `h` takes values in `[0, 1]` and varies by at most `δ` over distance `R`.
pub fn validate_multiplier(space: &FiniteMetricSpace, h: &[f64], r: f64, delta: f64) -> Result<()> {
    let n = space.len();
    if h.len() != n {
        return Err(Error::DimensionMismatch(format!("multiplier has {} values on {n} points", h.len())));
    }
    if let Some(x) = (0..n).find(|&x| !(0.0..=1.0).contains(&h[x])) {
        return Err(Error::HypothesisViolated(format!("h({x}) = {} is outside [0, 1]", h[x])));
    }
    for x in 0..n {
        for y in x + 1..n {
            if space.dist(x, y) <= r && (h[x] - h[y]).abs() > delta + TAIL_TOL {
                return Err(Error::HypothesisViolated(format!(
                    "|h({x}) - h({y})| = {} > delta = {delta} at distance {}",
                    (h[x] - h[y]).abs(),
                    space.dist(x, y)
                )));
            }
        }
    }
    Ok(())
}

/// `[h, u] = hu − uh` for the multiplier `h`.
pub fn commutator(u: &SpaceOperator, h: &[f64]) -> CMatrix {
    CMatrix::from_fn(u.len(), u.len(), |y, x| u.entry(y, x) * (h[y] - h[x]))
}

/// Validates the hypotheses and compares `‖[h, u]‖` with `4δ‖u‖ + 2ε/δ`.
pub fn commutator_bound_check(u: &SpaceOperator, h: &[f64], r: f64, delta: f64, eps: f64) -> Result<CommutatorReport> {
    if !(delta > 0.0) || !(eps >= 0.0) {
        return Err(Error::InvalidParameter(format!("need delta > 0 and eps >= 0 (delta = {delta}, eps = {eps})")));
    }
    validate_multiplier(u.space(), h, r, delta)?;
    let propagation_check = certify_eps_propagation(u, eps, r)?;
    let u_norm = u.opnorm()?;
    let commutator_norm = linalg::opnorm(&commutator(u, h))?;
    let bound = 4.0 * delta * u_norm + 2.0 * eps / delta;
    Ok(CommutatorReport {
        radius: r,
        delta,
        eps,
        u_norm,
        commutator_norm,
        bound,
        slack: bound - commutator_norm,
        holds: commutator_norm <= bound + COMMUTATOR_TOL,
        propagation_check,
    })
}

/// A contraction of `ε`-propagation at most `r`: a random band-`r` operator of
/// norm `1 − ε` plus a random `r`-separated rectangle of norm `ε`. The band
/// tail of the result is exactly that rectangle.
pub fn random_valid_contraction(space: Arc<FiniteMetricSpace>, r: f64, eps: f64, seed: u64) -> Result<SpaceOperator> {
    if !(0.0..1.0).contains(&eps) {
        return Err(Error::InvalidParameter(format!("eps = {eps} must lie in [0, 1)")));
    }
    let n = space.len();
    let band = oper::random_band(space.clone(), r, rng::mix(seed, 0));
    let norm = band.opnorm()?;
    let mut entries = band.into_entries();
    if norm > 0.0 {
        entries *= C64::from((1.0 - eps) / norm);
    }
    if eps > 0.0 {
        let mut g = rng::derived(seed, 1);
        let all: Vec<usize> = (0..n).collect();
        let x0 = *all.choose(&mut g).expect("nonempty space");
        let a = space.ball(x0, 1.0_f64.min(r));
        let b: Vec<usize> = (0..n).filter(|&z| a.iter().all(|&p| space.dist(p, z) > r)).collect();
        if !b.is_empty() {
            let raw = oper::random_gaussian(space.clone(), rng::mix(seed, 2));
            let block = linalg::submatrix(raw.entries(), &a, &b);
            let scale = eps / linalg::opnorm(&block)?;
            for (i, &y) in a.iter().enumerate() {
                for (j, &x) in b.iter().enumerate() {
                    entries[(y, x)] += block[(i, j)] * scale;
                }
            }
        }
    }
    SpaceOperator::new(space, entries)
}

/// A random positive semidefinite operator `g g*` scaled to norm one.
pub fn random_psd(space: Arc<FiniteMetricSpace>, seed: u64) -> Result<SpaceOperator> {
    let g = oper::random_gaussian(space.clone(), seed);
    let m = g.entries() * g.entries().adjoint();
    let norm = linalg::opnorm(&m)?;
    SpaceOperator::new(space, m / C64::from(norm))
}
