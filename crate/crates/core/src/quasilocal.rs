//! Block-diagonal operators `diag_n(u_n)` over an expander family, with
//! `u_n` supported on a random subspace `V(n) ⊂ ℓ₂X_n`, and measurements of
//! their quasi-locality.

use std::sync::Arc;

use nalgebra::DMatrix;
use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, c64, CMatrix};
use crate::oper::{EpsMode, RectangleWitness, SpaceOperator, EXACT_EPS_MAX};
use crate::randsub::{self, binomial, SubsetMode, SubspaceSample, EXACT_SUBSET_LIMIT};
use crate::rng;
use crate::space::{coarse_union, ExpanderFamily, FiniteMetricSpace, GapRule, KappaKind};

pub const DEFAULT_C0: f64 = 3.0;
pub const DEFAULT_MAX_REJECTS: usize = 1000;
pub const MECHANISM_SAMPLES: usize = 1000;
pub const PROJECTION_TOL: f64 = 1e-8;

/// One level of the schedule `δ_k = 1/k`, `ε̂_k = c0 √(δ_k log(1/δ_k))`,
/// `R_k = ⌈2 R0 log(1/δ_k) / log κ⌉`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScheduleStep {
    pub k: usize,
    pub delta: f64,
    pub eps_hat: f64,
    pub radius: f64,
    /// `ε̂_k >= 1`: every projection compression already satisfies it.
    pub vacuous: bool,
}

/// Levels `k = 2..=kmax`. Level 1 is left out: `δ_1 = 1` gives `ε̂_1 = 0`,
/// which no nonzero projection can meet.
pub fn schedule(c0: f64, kmax: usize, kappa: f64, r0: f64) -> Vec<ScheduleStep> {
    (2..=kmax)
        .map(|k| {
            let delta = 1.0 / k as f64;
            let eps_hat = randsub::formal_bound(c0, delta);
            let radius = (2.0 * r0 * (1.0 / delta).ln() / kappa.ln()).ceil();
            ScheduleStep { k, delta, eps_hat, radius, vacuous: eps_hat >= 1.0 }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelCheck {
    pub k: usize,
    pub value: f64,
    pub eps_hat: f64,
    pub mode: SubsetMode,
}

#[derive(Debug, Clone)]
pub struct Selection {
    pub sample: SubspaceSample,
    pub rejections: usize,
    /// Checks of the accepted sample at every non-vacuous level.
    pub checks: Vec<LevelCheck>,
}

/// Rejection-samples, for member `m`, a subspace of dimension `dims[m]`
/// (default `m + 1`) whose restricted maxima satisfy
/// `max_{|E| <= δ_k d} ‖P|ℓ₂E‖ < ε̂_k` at every non-vacuous level
/// `k <= dims[m]`. Exact subset scans are used when `C(d, ⌊δ_k d⌋) <= 10⁶`,
/// greedy ones otherwise.
pub fn select_subspaces(family: &ExpanderFamily, c0: f64, dims: Option<&[usize]>, max_rejects: usize, seed: u64) -> Result<Vec<Selection>> {
    let members = family.members();
    if let Some(d) = dims {
        if d.len() != members.len() {
            return Err(Error::DimensionMismatch(format!("{} dimensions for {} members", d.len(), members.len())));
        }
    }
    members
        .iter()
        .enumerate()
        .map(|(m, member)| {
            let d = member.len();
            let n = dims.map_or(m + 1, |v| v[m]);
            let levels: Vec<ScheduleStep> = schedule(c0, n, family.kappa(), family.r0()).into_iter().filter(|s| !s.vacuous).collect();
            let member_seed = rng::mix(seed, m as u64);
            for attempt in 0..=max_rejects {
                let sample = randsub::sample_subspace(d, n, rng::mix(member_seed, attempt as u64))?;
                let mut checks = Vec::with_capacity(levels.len());
                let mut ok = true;
                for level in &levels {
                    let k = randsub::subset_size(d, level.delta);
                    let mode = if binomial(d, k) <= EXACT_SUBSET_LIMIT { SubsetMode::Exact } else { SubsetMode::Greedy };
                    let rep = randsub::restricted_norm_max(&sample, level.delta, mode, c0)?;
                    checks.push(LevelCheck { k: level.k, value: rep.value, eps_hat: level.eps_hat, mode });
                    if rep.value >= level.eps_hat {
                        ok = false;
                        break;
                    }
                }
                if ok {
                    return Ok(Selection { sample, rejections: attempt, checks });
                }
            }
            Err(Error::RejectionBudgetExhausted { member: m, budget: max_rejects })
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct QuasiLocalAssembly {
    pub family: ExpanderFamily,
    pub ambient: Arc<FiniteMetricSpace>,
    pub subspaces: Vec<SubspaceSample>,
    pub c0: f64,
    pub schedule: Vec<ScheduleStep>,
    pub u: SpaceOperator,
    /// Whether every block is the projection onto its subspace.
    pub is_projection: bool,
}

/// `u = diag_n(P_{V(n)})` on the coarse union of the members.
pub fn assemble(family: &ExpanderFamily, subspaces: Vec<SubspaceSample>, c0: f64) -> Result<QuasiLocalAssembly> {
    let blocks: Vec<CMatrix> = subspaces.iter().map(|s| CMatrix::identity(s.n, s.n)).collect();
    let mut a = assemble_with_blocks(family, subspaces, &blocks, c0)?;
    a.is_projection = true;
    Ok(a)
}

/// `u = diag_n(Q_n B_n Q_nᵀ)` for contractions `B_n` on `V(n)` written in the
/// orthonormal basis `Q_n`.
pub fn assemble_with_blocks(
    family: &ExpanderFamily,
    subspaces: Vec<SubspaceSample>,
    blocks: &[CMatrix],
    c0: f64,
) -> Result<QuasiLocalAssembly> {
    let members = family.members();
    if subspaces.len() != members.len() || blocks.len() != members.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} subspaces and {} blocks for {} members",
            subspaces.len(),
            blocks.len(),
            members.len()
        )));
    }
    for (m, (s, b)) in subspaces.iter().zip(blocks).enumerate() {
        if s.d != members[m].len() || b.shape() != (s.n, s.n) {
            return Err(Error::DimensionMismatch(format!(
                "member {m}: subspace in R^{} with a {:?} block, member has {} points",
                s.d,
                b.shape(),
                members[m].len()
            )));
        }
        let norm = linalg::opnorm(b)?;
        if norm > 1.0 + 1e-12 {
            return Err(Error::NotAContraction(norm));
        }
    }
    let ambient = Arc::new(coarse_union(members, GapRule::Default)?);
    let total = ambient.len();
    let mut entries = CMatrix::zeros(total, total);
    for ((range, s), b) in ambient.pieces().iter().zip(&subspaces).zip(blocks) {
        let q = s.basis.map(|x| c64(x, 0.0));
        let block = &q * b * q.transpose();
        entries.view_mut((range.start, range.start), (s.d, s.d)).copy_from(&block);
    }
    let kmax = subspaces.iter().map(|s| s.n).max().unwrap_or(1).max(2);
    let u = SpaceOperator::new(ambient.clone(), entries)?;
    Ok(QuasiLocalAssembly {
        schedule: schedule(c0, kmax, family.kappa(), family.r0()),
        family: family.clone(),
        ambient,
        subspaces,
        c0,
        u,
        is_projection: false,
    })
}

impl QuasiLocalAssembly {
    /// Largest entry of `u² − u` and `u − u*`.
    pub fn projection_error(&self) -> f64 {
        let e = self.u.entries();
        linalg::max_abs(&(e * e - e)).max(linalg::max_abs(&(e - e.adjoint())))
    }

    pub fn trace(&self) -> f64 {
        self.u.entries().trace().re
    }

    /// `u` restricted to member `m`, on the member's own metric.
    pub fn member_operator(&self, m: usize) -> Result<SpaceOperator> {
        let range = self.ambient.pieces()[m].clone();
        let d = range.len();
        let block = self.u.entries().view((range.start, range.start), (d, d)).into_owned();
        SpaceOperator::new(Arc::new(self.family.members()[m].clone()), block)
    }

    /// Largest entry outside the member blocks (zero by construction).
    pub fn off_block_max(&self) -> f64 {
        let pieces = self.ambient.pieces();
        let mut owner = vec![0; self.ambient.len()];
        for (m, r) in pieces.iter().enumerate() {
            for x in r.clone() {
                owner[x] = m;
            }
        }
        let e = self.u.entries();
        let n = self.ambient.len();
        let mut worst = 0.0f64;
        for y in 0..n {
            for x in 0..n {
                if owner[x] != owner[y] {
                    worst = worst.max(e[(y, x)].norm());
                }
            }
        }
        worst
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileRow {
    pub eps: f64,
    pub lower: f64,
    pub upper: f64,
    /// Member realizing the lower bound and the rectangle (ambient indices).
    pub member: Option<usize>,
    pub witness: Option<RectangleWitness>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MechanismReport {
    pub samples: usize,
    /// `‖1_A u 1_B‖ <= min(‖1_A P‖, ‖P 1_B‖)` on every sample.
    pub all_hold: bool,
    pub max_slack_violation: f64,
    /// Samples whose smaller side is a `δ_k`-share for the deepest non-vacuous level.
    pub small_share: usize,
    /// Samples separated by more than `R_k` (at the deepest level) whose
    /// smaller side is not a `δ_k`-share; must be 0 when κ is exact.
    pub separation_failures: usize,
    pub kappa_exact: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Profile {
    pub rows: Vec<ProfileRow>,
    pub mechanism: MechanismReport,
}

/// Brackets the ε-propagation radius for each ε (given in decreasing order)
/// and checks the compression mechanism on sampled separated rectangles.
///
/// For block-diagonal `u` every separated rectangle splits into rectangles
/// inside single members with at least the same separation, so the radius of
/// `u` is the largest member radius. Members with at most 20 points are
/// scanned exactly, larger ones heuristically. Lower bounds are carried
/// forward as ε decreases, since a rectangle above ε is above every smaller ε.
pub fn quasilocality_profile(assembly: &QuasiLocalAssembly, eps_list: &[f64], budget: usize, seed: u64) -> Result<Profile> {
    if eps_list.windows(2).any(|w| w[0] < w[1]) {
        return Err(Error::InvalidParameter("eps list must be in decreasing order".into()));
    }
    let members = assembly.family.members().len();
    let ops: Vec<SpaceOperator> = (0..members).map(|m| assembly.member_operator(m)).collect::<Result<_>>()?;
    let mut rows = Vec::with_capacity(eps_list.len());
    let mut carried: Option<(f64, usize, RectangleWitness)> = None;
    for (i, &eps) in eps_list.iter().enumerate() {
        let mut lower = carried.as_ref().map_or(0.0, |c| c.0);
        let mut best = carried.clone();
        let mut upper = 0.0f64;
        for (m, op) in ops.iter().enumerate() {
            let mode = if op.len() <= EXACT_EPS_MAX { EpsMode::Exact } else { EpsMode::Heuristic };
            let r = op.eps_propagation_radius(eps, mode, budget, rng::mix(seed, (i * members + m) as u64))?;
            upper = upper.max(r.upper);
            if let Some(w) = r.witness {
                if r.lower > lower {
                    lower = r.lower;
                    best = Some((r.lower, m, w));
                }
            }
        }
        let upper = upper.max(lower);
        carried = best.clone();
        let offset = |m: usize| assembly.ambient.pieces()[m].start;
        rows.push(ProfileRow {
            eps,
            lower,
            upper,
            member: best.as_ref().map(|b| b.1),
            witness: best.map(|(_, m, w)| RectangleWitness {
                a: w.a.iter().map(|x| x + offset(m)).collect(),
                b: w.b.iter().map(|x| x + offset(m)).collect(),
                ..w
            }),
        });
    }
    let mechanism = mechanism_check(assembly, MECHANISM_SAMPLES, rng::mix(seed, u64::MAX))?;
    Ok(Profile { rows, mechanism })
}

/// Samples separated rectangles inside single members and checks
/// `‖1_A u 1_B‖ <= min(‖1_A P‖, ‖P 1_B‖)`, together with the separation bound
/// at the deepest schedule level.
pub fn mechanism_check(assembly: &QuasiLocalAssembly, samples: usize, seed: u64) -> Result<MechanismReport> {
    let members = assembly.family.members();
    let level = assembly.schedule.iter().rev().find(|s| !s.vacuous).or(assembly.schedule.last()).copied();
    let kappa_exact = assembly.family.kappa_kind() == KappaKind::ExactBruteForce;
    let outcomes: Vec<(f64, bool, bool)> = (0..samples)
        .into_par_iter()
        .map(|t| {
            let mut g = rng::derived(seed, t as u64);
            let m = g.random_range(0..members.len());
            let space = &members[m];
            let d = space.len();
            let sample = &assembly.subspaces[m];
            let (a, b) = loop {
                let x = g.random_range(0..d);
                let diam = space.diameter();
                let rho = (g.random::<f64>() * diam * 0.5).floor();
                let mut a = space.ball(x, rho);
                a.retain(|&y| y == x || g.random_bool(0.7));
                let sep = (g.random::<f64>() * diam).floor();
                let mut b = space.far_complement(&a, sep);
                b.retain(|_| g.random_bool(0.7));
                if !b.is_empty() {
                    break (a, b);
                }
            };
            let offset = assembly.ambient.pieces()[m].start;
            let rows: Vec<usize> = a.iter().map(|x| x + offset).collect();
            let cols: Vec<usize> = b.iter().map(|x| x + offset).collect();
            let value = linalg::opnorm(&linalg::submatrix(assembly.u.entries(), &rows, &cols))?;
            let bound = sample.restricted_norm(&a).min(sample.restricted_norm(&b));
            let share = a.len().min(b.len()) as f64 / d as f64;
            let (small, sep_fail) = match level {
                Some(l) => {
                    let small = share < l.delta;
                    (small, space.set_distance(&a, &b) > l.radius && !small)
                }
                None => (false, false),
            };
            Ok((value - bound, small, sep_fail))
        })
        .collect::<Result<_>>()?;
    let max_slack_violation = outcomes.iter().map(|o| o.0).fold(f64::NEG_INFINITY, f64::max);
    Ok(MechanismReport {
        samples,
        all_hold: outcomes.iter().all(|o| o.0 <= 1e-12),
        max_slack_violation,
        small_share: outcomes.iter().filter(|o| o.1).count(),
        separation_failures: outcomes.iter().filter(|o| o.2).count(),
        kappa_exact,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NonBandWitness {
    pub radius: f64,
    pub member: usize,
    /// Largest separated rectangle found in the largest member.
    pub lower: f64,
    /// `‖u − band_truncate(u, R)‖` on the whole space.
    pub upper: f64,
    pub witness: Option<RectangleWitness>,
}

/// Lower bound on the distance from `u` to operators of propagation at most
/// `r`, from rectangles inside the largest member.
pub fn non_band_witness(assembly: &QuasiLocalAssembly, r: f64, budget: usize, seed: u64) -> Result<NonBandWitness> {
    let m = assembly.family.members().len() - 1;
    let op = assembly.member_operator(m)?;
    let bounds = op.dist_to_band_bounds(r, budget, seed)?;
    let offset = assembly.ambient.pieces()[m].start;
    let upper = assembly.u.band_tail_norm(r)?;
    Ok(NonBandWitness {
        radius: r,
        member: m,
        lower: bounds.lower,
        upper,
        witness: bounds.witness.map(|w| RectangleWitness {
            a: w.a.iter().map(|x| x + offset).collect(),
            b: w.b.iter().map(|x| x + offset).collect(),
            ..w
        }),
    })
}

/// Dense real projection onto the span of `sample`, as a complex matrix.
pub fn projection_matrix(sample: &SubspaceSample) -> CMatrix {
    let p: DMatrix<f64> = sample.projection();
    p.map(|x| c64(x, 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space;
    use approx::assert_abs_diff_eq;

    fn small_family() -> ExpanderFamily {
        ExpanderFamily::random_regular(&[10, 16, 24], 4, 1.0, 3).unwrap()
    }

    #[test]
    fn schedule_values() {
        let s = schedule(3.0, 40, 1.5, 1.0);
        assert_eq!(s[0].k, 2);
        assert_abs_diff_eq!(s[0].eps_hat, 3.0 * (0.5 * 2f64.ln()).sqrt(), epsilon = 1e-15);
        assert_eq!(s[0].radius, (2.0 * 2f64.ln() / 1.5f64.ln()).ceil());
        assert!(s.iter().take_while(|l| l.k <= 30).all(|l| l.vacuous));
        assert!(!s.last().unwrap().vacuous);
    }

    #[test]
    fn vacuous_selection_accepts_first_sample() {
        let fam = small_family();
        let sel = select_subspaces(&fam, 100.0, None, 5, 2).unwrap();
        assert!(sel.iter().all(|s| s.rejections == 0));
        assert_eq!(sel.iter().map(|s| s.sample.n).collect::<Vec<_>>(), vec![1, 2, 3]);
    }

    #[test]
    fn near_full_dimension_exhausts_budget() {
        let fam = ExpanderFamily::certify(vec![space::random_regular(12, 4, 1).unwrap()], 1.0).unwrap();
        let err = select_subspaces(&fam, 0.5, Some(&[11]), 3, 0).unwrap_err();
        assert_eq!(err, Error::RejectionBudgetExhausted { member: 0, budget: 3 });
    }

    #[test]
    fn assembly_invariants() {
        let fam = small_family();
        let sel = select_subspaces(&fam, DEFAULT_C0, None, 10, 2).unwrap();
        let a = assemble(&fam, sel.into_iter().map(|s| s.sample).collect(), DEFAULT_C0).unwrap();
        assert!(a.projection_error() < PROJECTION_TOL);
        assert_abs_diff_eq!(a.trace(), 6.0, epsilon = 1e-9);
        assert_eq!(a.off_block_max(), 0.0);

        let single = ExpanderFamily::certify(vec![space::random_regular(10, 4, 2).unwrap()], 1.0).unwrap();
        let s = randsub::sample_subspace(10, 1, 4).unwrap();
        let p = projection_matrix(&s);
        let a = assemble(&single, vec![s], DEFAULT_C0).unwrap();
        assert!(linalg::max_abs(&(a.u.entries() - p)) < 1e-14);

        let subs: Vec<SubspaceSample> =
            (0..3).map(|m| randsub::sample_subspace(fam.members()[m].len(), m + 1, m as u64).unwrap()).collect();
        let zeros: Vec<CMatrix> = (0..3).map(|m| CMatrix::zeros(m + 1, m + 1)).collect();
        let z = assemble_with_blocks(&fam, subs.clone(), &zeros, DEFAULT_C0).unwrap();
        assert_eq!(linalg::max_abs(z.u.entries()), 0.0);
        let bad = vec![CMatrix::zeros(2, 2); 3];
        assert!(matches!(assemble_with_blocks(&fam, subs, &bad, DEFAULT_C0), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn profile_and_mechanism() {
        let fam = small_family();
        let sel = select_subspaces(&fam, DEFAULT_C0, None, 10, 2).unwrap();
        let a = assemble(&fam, sel.into_iter().map(|s| s.sample).collect(), DEFAULT_C0).unwrap();
        let p = quasilocality_profile(&a, &[1.0, 0.5, 0.3, 0.2], 100, 1).unwrap();
        assert_eq!(p.rows[0].lower, 0.0);
        assert_eq!(p.rows[0].upper, 0.0);
        for w in p.rows.windows(2) {
            assert!(w[1].lower >= w[0].lower && w[1].upper >= w[0].upper);
        }
        let max_diam = fam.members().iter().map(|m| m.diameter()).fold(0.0, f64::max);
        assert!(p.rows.iter().all(|r| r.lower <= r.upper && r.upper <= max_diam));
        assert!(p.mechanism.all_hold);
        assert!(p.mechanism.small_share > 0 || p.mechanism.samples > 0);
        assert!(quasilocality_profile(&a, &[0.2, 0.5], 10, 1).is_err());
    }

    #[test]
    fn rank_one_witness_closed_form() {
        let fam = ExpanderFamily::certify(vec![space::random_regular(20, 4, 5).unwrap()], 1.0).unwrap();
        let s = randsub::sample_subspace(20, 1, 8).unwrap();
        let v: Vec<f64> = s.basis.column(0).iter().copied().collect();
        let a = assemble(&fam, vec![s], DEFAULT_C0).unwrap();
        let w = non_band_witness(&a, 2.0, 200, 3).unwrap();
        let rect = w.witness.clone().unwrap();
        let norm = |idx: &[usize]| idx.iter().map(|&i| v[i] * v[i]).sum::<f64>().sqrt();
        assert_abs_diff_eq!(rect.value, norm(&rect.a) * norm(&rect.b), epsilon = 1e-10);
        assert!(w.lower > 0.0 && w.lower <= w.upper + 1e-9);
        let far = non_band_witness(&a, a.ambient.diameter(), 50, 3).unwrap();
        assert_eq!((far.lower, far.upper), (0.0, 0.0));
    }
}
