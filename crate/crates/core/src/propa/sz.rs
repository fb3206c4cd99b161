//! Approximating a contraction of small `ε`-propagation by an operator of
//! honest finite propagation, via two property-A kernels and `Φ_ν`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oper::SpaceOperator;
use crate::propa::kernel::{IsometryField, PropertyAKernel, SaturationPolicy};
use crate::propa::phi::{certify_eps_propagation, phi_nu, PropagationCheck};

pub const CONTRACTION_TOL: f64 = 1e-9;
/// `‖u − Φ_ν(u)‖ <= 2` always holds for contractions, so bounds at or above this say nothing.
pub const TRIVIAL_BOUND: f64 = 2.0;

/// Scales, flags and the measured error of one approximation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SzReport {
    pub eps: f64,
    pub radius: f64,
    /// `δ = ε^{1/2}`.
    pub delta: f64,
    /// Support radius of `μ`.
    pub s: f64,
    /// Support radius of `ν`.
    pub t: f64,
    /// `N_X(T)`.
    pub growth_t: usize,
    pub mu_saturated: bool,
    pub nu_saturated: bool,
    pub u_norm: f64,
    pub error: f64,
    /// `18 ε^{1/4}`.
    pub bound: f64,
    pub slack: f64,
    pub holds: bool,
    pub vacuous: bool,
    pub approx_propagation: f64,
    pub propagation_ok: bool,
    pub propagation_check: PropagationCheck,
}

/// Builds `μ` for `(δ, R)` and `ν` for `(δ, S)` with `δ = ε^{1/2}`, and
/// returns `Φ_ν(u)` with `‖u − Φ_ν(u)‖` compared against `18 ε^{1/4}`.
pub fn sz_approximate(u: &SpaceOperator, eps: f64, r: f64, policy: SaturationPolicy) -> Result<(SpaceOperator, SzReport)> {
    if !(eps > 0.0) || !(r >= 0.0) {
        return Err(Error::InvalidParameter(format!("need eps > 0 and R >= 0 (eps = {eps}, R = {r})")));
    }
    let u_norm = u.opnorm()?;
    if u_norm > 1.0 + CONTRACTION_TOL {
        return Err(Error::NotAContraction(u_norm));
    }
    let propagation_check = certify_eps_propagation(u, eps, r)?;
    let delta = eps.sqrt();
    let space = u.space().clone();
    let mu = PropertyAKernel::uniform_ball(space.clone(), r, delta, policy)?;
    let nu = PropertyAKernel::uniform_ball(space.clone(), mu.support(), delta, policy)?;
    let (mu_saturated, nu_saturated) = (mu.saturated(), nu.saturated());
    let field = IsometryField::new(nu)?;
    let approx = phi_nu(u, &field)?;
    let error = crate::linalg::opnorm(&(u.entries() - approx.entries()))?;
    let bound = 18.0 * eps.powf(0.25);
    let approx_propagation = approx.propagation(0.0);
    let report = SzReport {
        eps,
        radius: r,
        delta,
        s: mu.support(),
        t: field.t(),
        growth_t: space.growth(field.t()),
        mu_saturated,
        nu_saturated,
        u_norm,
        error,
        bound,
        slack: bound - error,
        holds: error < bound,
        vacuous: bound >= TRIVIAL_BOUND,
        approx_propagation,
        propagation_ok: approx_propagation <= 2.0 * field.t(),
        propagation_check,
    };
    Ok((approx, report))
}
