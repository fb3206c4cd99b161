//! Monte Carlo diagnostics for the random functions `f_ω = Σ_z ω_z f_z`,
//! their truncations `g_ω` at `±C` with `C = δ^{-1/2}`, and the smoothings
//! `h_ω = Σ_z μ_x(z) g_ω(z)`.

use nalgebra::{DMatrix, DVector};
use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, C64};
use crate::oper::SpaceOperator;
use crate::propa::kernel::{IsometryField, PropertyAKernel};
use crate::propa::phi::{commutator, phi_nu};
use crate::rng;

pub const MIN_TRIALS: usize = 100;
const CHUNK: usize = 64;
const POINTWISE_TOL: f64 = 1e-12;
/// Number of leading samples on which `‖[h_ω, u]‖` is measured.
pub const COMMUTATOR_SAMPLES: usize = 8;

/// Optional ingredients of the diagnostics.
#[derive(Clone, Copy, Default)]
pub struct RademacherInput<'a> {
    /// `μ` at scale `R`; enables the `h_ω` checks.
    pub mu: Option<&'a PropertyAKernel>,
    /// An operator and its `ε`; enables the reconstruction and commutator checks.
    pub u: Option<(&'a SpaceOperator, f64)>,
}

/// Per-point empirical moment with its standard error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentStat {
    pub point: usize,
    pub value: f64,
    pub std_err: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionPoint {
    pub trials: usize,
    /// `‖avg f_ω u f_ω − Φ_ν(u)‖`.
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RademacherReport {
    pub trials: usize,
    pub seed: u64,
    pub delta: f64,
    /// `C = δ^{-1/2}`.
    pub c: f64,
    pub relevant_sites: usize,
    /// `N_X(T)^{1/2}`.
    pub sup_bound: f64,
    pub max_sup_f: f64,
    pub max_sup_g: f64,
    /// Worst `|m₂(x) − 1| / SE`.
    pub second_moment_worst_z: f64,
    pub second_moment_worst: MomentStat,
    pub second_moment_ok: bool,
    /// `max_x 3 − 2 Σ_z f_z(x)⁴`.
    pub fourth_closed_max: f64,
    pub fourth_closed_ok: bool,
    /// Worst `|m₄(x) − closed form| / SE`.
    pub fourth_mc_worst_z: f64,
    pub fourth_mc_ok: bool,
    /// `max_x` of the empirical `∫|f − g|²`, against `3C⁻²`.
    pub fg_max: f64,
    pub fg_bound: f64,
    pub fg_ok: bool,
    /// `max_x` of the empirical `∫|g − h|²`, against `δ`.
    pub gh_max: Option<f64>,
    pub gh_ok: Option<bool>,
    /// `max |h_ω(x) − h_ω(y)|` over samples and `dist(x, y) <= R`, against `Cδ`.
    pub lipschitz_max: Option<f64>,
    pub lipschitz_ok: Option<bool>,
    /// `max ‖[h_ω, u]‖` over the leading samples, against `(2δ + 4ε/δ)·2C`.
    pub commutator_max: Option<f64>,
    pub commutator_bound: Option<f64>,
    pub reconstruction: Vec<ReconstructionPoint>,
    pub pass: bool,
}

/// Sufficient statistics of one block of samples.
#[derive(Clone)]
struct Acc {
    m2: DVector<f64>,
    m4: DVector<f64>,
    m8: DVector<f64>,
    fg: DVector<f64>,
    fg2: DVector<f64>,
    gh: DVector<f64>,
    outer: DMatrix<f64>,
    sup_f: f64,
    sup_g: f64,
    lip: f64,
    comm: f64,
}

impl Acc {
    fn new(n: usize) -> Self {
        let z = DVector::zeros(n);
        Self {
            m2: z.clone(),
            m4: z.clone(),
            m8: z.clone(),
            fg: z.clone(),
            fg2: z.clone(),
            gh: z,
            outer: DMatrix::zeros(n, n),
            sup_f: 0.0,
            sup_g: 0.0,
            lip: 0.0,
            comm: 0.0,
        }
    }

    fn merge(mut self, o: &Acc) -> Self {
        self.m2 += &o.m2;
        self.m4 += &o.m4;
        self.m8 += &o.m8;
        self.fg += &o.fg;
        self.fg2 += &o.fg2;
        self.gh += &o.gh;
        self.outer += &o.outer;
        self.sup_f = self.sup_f.max(o.sup_f);
        self.sup_g = self.sup_g.max(o.sup_g);
        self.lip = self.lip.max(o.lip);
        self.comm = self.comm.max(o.comm);
        self
    }
}

fn sample_signs(relevant: &[usize], n: usize, seed: u64, trial: usize) -> DVector<f64> {
    let mut g = rng::derived(seed, trial as u64);
    let mut omega = DVector::zeros(n);
    for &z in relevant {
        omega[z] = if g.random::<bool>() { 1.0 } else { -1.0 };
    }
    omega
}

/// Runs `trials` Rademacher samples (≥ 100) and checks the moment,
/// truncation, smoothing and reconstruction identities.
pub fn rademacher_diagnostics(field: &IsometryField, input: RademacherInput<'_>, trials: usize, seed: u64) -> Result<RademacherReport> {
    if trials < MIN_TRIALS {
        return Err(Error::InvalidParameter(format!("trials = {trials} < {MIN_TRIALS}")));
    }
    let space = field.space().clone();
    let n = space.len();
    if let Some(mu) = input.mu {
        if mu.space().len() != n {
            return Err(Error::DimensionMismatch("mu and the field live on different spaces".into()));
        }
    }
    if let Some((u, _)) = input.u {
        if u.len() != n {
            return Err(Error::DimensionMismatch("operator and field live on different spaces".into()));
        }
    }
    let f = field.f();
    let delta = field.delta();
    let c = delta.powf(-0.5);
    let relevant: Vec<usize> = (0..n).filter(|&z| f.column(z).iter().any(|&v| v != 0.0)).collect();
    let r = input.mu.map_or(0.0, |m| m.scale());
    let near: Vec<(usize, usize)> =
        (0..n).flat_map(|x| (x + 1..n).map(move |y| (x, y))).filter(|&(x, y)| input.mu.is_some() && space.dist(x, y) <= r).collect();

    let run = |lo: usize, hi: usize| -> Acc {
        let mut acc = Acc::new(n);
        for t in lo..hi {
            let omega = sample_signs(&relevant, n, seed, t);
            let fw = f * &omega;
            let gw = fw.map(|v| v.clamp(-c, c));
            for x in 0..n {
                let (fx, d) = (fw[x], fw[x] - gw[x]);
                acc.m2[x] += fx * fx;
                acc.m4[x] += fx.powi(4);
                acc.m8[x] += fx.powi(8);
                acc.fg[x] += d * d;
                acc.fg2[x] += d.powi(4);
            }
            acc.outer += &fw * fw.transpose();
            acc.sup_f = acc.sup_f.max(fw.amax());
            acc.sup_g = acc.sup_g.max(gw.amax());
            if let Some(mu) = input.mu {
                let hw = mu.mu() * &gw;
                acc.gh += (&gw - &hw).map(|v| v * v);
                for &(x, y) in &near {
                    acc.lip = acc.lip.max((hw[x] - hw[y]).abs());
                }
                if let Some((u, _)) = input.u {
                    if t < COMMUTATOR_SAMPLES {
                        let norm = linalg::opnorm(&commutator(u, hw.as_slice())).unwrap_or(f64::NAN);
                        acc.comm = acc.comm.max(norm);
                    }
                }
            }
        }
        acc
    };
    let block = |lo: usize, hi: usize| -> Acc {
        let chunks: Vec<(usize, usize)> = (lo..hi).step_by(CHUNK).map(|s| (s, (s + CHUNK).min(hi))).collect();
        let parts: Vec<Acc> = chunks.par_iter().map(|&(a, b)| run(a, b)).collect();
        parts.iter().fold(Acc::new(n), |acc, p| acc.merge(p))
    };

    let marks = [trials / 4, trials / 2, trials];
    let mut total = Acc::new(n);
    let mut done = 0;
    let target = input.u.map(|(u, _)| (u, phi_nu(u, field))).map(|(u, p)| p.map(|p| (u, p))).transpose()?;
    let mut reconstruction = Vec::new();
    for &m in &marks {
        total = total.merge(&block(done, m));
        done = m;
        if let Some((u, phi)) = &target {
            let avg = &total.outer / m as f64;
            let diff = CMatrix::from_fn(n, n, |y, x| u.entry(y, x) * C64::from(avg[(x, y)]) - phi.entry(y, x));
            reconstruction.push(ReconstructionPoint { trials: m, gap: linalg::opnorm(&diff)? });
        }
    }

    let tn = trials as f64;
    let mean = |v: f64| v / tn;
    let se = |s1: f64, s2: f64| ((mean(s2) - mean(s1).powi(2)).max(0.0) / tn).sqrt();
    let zscore = |dev: f64, err: f64| {
        if err > 0.0 {
            dev / err
        } else if dev <= POINTWISE_TOL {
            0.0
        } else {
            f64::INFINITY
        }
    };

    let mut second_worst = MomentStat { point: 0, value: 1.0, std_err: 0.0 };
    let mut second_z = 0.0;
    let mut fourth_closed_max = f64::NEG_INFINITY;
    let mut fourth_z: f64 = 0.0;
    let mut fg_max: f64 = 0.0;
    let mut fg_ok = true;
    let fg_bound = 3.0 / (c * c);
    for x in 0..n {
        let err2 = se(total.m2[x], total.m4[x]);
        let z = zscore((mean(total.m2[x]) - 1.0).abs(), err2);
        if z > second_z || x == 0 {
            second_z = z;
            second_worst = MomentStat { point: x, value: mean(total.m2[x]), std_err: err2 };
        }
        let closed = 3.0 - 2.0 * f.row(x).iter().map(|v| v.powi(4)).sum::<f64>();
        fourth_closed_max = fourth_closed_max.max(closed);
        fourth_z = fourth_z.max(zscore((mean(total.m4[x]) - closed).abs(), se(total.m4[x], total.m8[x])));
        let fg = mean(total.fg[x]);
        fg_max = fg_max.max(fg);
        fg_ok &= fg <= fg_bound + 3.0 * se(total.fg[x], total.fg2[x]) + POINTWISE_TOL;
    }
    let second_moment_ok = second_z <= 3.0;
    let fourth_closed_ok = fourth_closed_max <= 3.0 + POINTWISE_TOL;
    let fourth_mc_ok = fourth_z <= 4.0;
    let (gh_max, gh_ok, lipschitz_max, lipschitz_ok) = match input.mu {
        Some(_) => {
            let gh = total.gh.iter().map(|&v| mean(v)).fold(0.0, f64::max);
            (Some(gh), Some(gh < delta), Some(total.lip), Some(total.lip <= c * delta + POINTWISE_TOL))
        }
        None => (None, None, None, None),
    };
    let (commutator_max, commutator_bound) = match (input.mu, input.u) {
        (Some(_), Some((_, eps))) => (Some(total.comm), Some((2.0 * delta + 4.0 * eps / delta) * 2.0 * c)),
        _ => (None, None),
    };
    let sup_bound = (space.growth(field.t()) as f64).sqrt();
    let pass = second_moment_ok
        && fourth_closed_ok
        && fourth_mc_ok
        && fg_ok
        && total.sup_f <= sup_bound + POINTWISE_TOL
        && total.sup_g <= c + POINTWISE_TOL
        && gh_ok.unwrap_or(true)
        && lipschitz_ok.unwrap_or(true)
        && commutator_max.zip(commutator_bound).is_none_or(|(m, b)| m <= b + POINTWISE_TOL);
    Ok(RademacherReport {
        trials,
        seed,
        delta,
        c,
        relevant_sites: relevant.len(),
        sup_bound,
        max_sup_f: total.sup_f,
        max_sup_g: total.sup_g,
        second_moment_worst_z: second_z,
        second_moment_worst: second_worst,
        second_moment_ok,
        fourth_closed_max,
        fourth_closed_ok,
        fourth_mc_worst_z: fourth_z,
        fourth_mc_ok,
        fg_max,
        fg_bound,
        fg_ok,
        gh_max,
        gh_ok,
        lipschitz_max,
        lipschitz_ok,
        commutator_max,
        commutator_bound,
        reconstruction,
        pass,
    })
}
