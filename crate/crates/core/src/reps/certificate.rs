//! Numeric certificate for the band-approximation obstruction of an
//! irreducible unitary family placed on a coordinate block of `ℓ₂X`.
//!
//! With approximants `c_g` of propagation at most `R` and
//! `ε = max_g ‖π(g) + b_g − c_g‖`, the certificate evaluates
//!
//! * `L = ‖|Γ|⁻¹ Σ_g c_g ⊗ conj(π(g))‖ >= 1 − ε`,
//! * a band part `i` with `‖(Φ_i ⊗ id)(…)‖ >= (1 − ε) / #parts`,
//! * every part `<= (1 + ε)/√n`, being a sup of averaged norms,
//!
//! and concludes `ε >= (√n − 2N)/(√n + 2N)` with `N = N_X(R)`.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::rep::{Structure, UnitaryRep};
use crate::error::{Error, Result};
use crate::linalg::{self, c64, CMatrix, C64};
use crate::oper::ZERO_TOL;
use crate::space::FiniteMetricSpace;
use crate::translations::decompose_band;

/// Tolerance on every inequality of the chain.
pub const CHAIN_TOL: f64 = 1e-7;
/// Offset between the clean chain and the distance form `ε − 1/10`.
pub const DISTANCE_OFFSET: f64 = 0.1;
/// Cap on stored coefficient blocks (`band pairs × n²`).
const MAX_BLOCK_ENTRIES: usize = 50_000_000;

/// `max(0, (√n − 2N)/(√n + 2N))`: the smallest ε compatible with
/// `(1 − ε)/(2N) <= (1 + ε)/√n`.
pub fn gap_lower_bound(n: f64, growth: f64) -> f64 {
    let s = n.sqrt();
    ((s - 2.0 * growth) / (s + 2.0 * growth)).max(0.0)
}

/// Largest integer `R >= 1` with `N_X(R) < √n/8`, minus one; `-1` if there is none.
pub fn theorem_a_radius(n: usize, space: &FiniteMetricSpace) -> i64 {
    let threshold = (n as f64).sqrt() / 8.0;
    let top = space.diameter().ceil() as i64;
    (1..=top.max(1)).rev().find(|&r| (space.growth(r as f64) as f64) < threshold).map_or(-1, |r| r - 1)
}

/// Band approximants `c_g` in block coordinates.
pub enum Approximants<'a> {
    /// `c_g` = band truncation of the placed `π(g)`.
    BandTruncation,
    /// User-supplied `n × n` blocks; must vanish off the band.
    Custom(&'a (dyn Fn(usize) -> CMatrix + Sync)),
}

pub struct GapCertificateInput<'a> {
    pub rep: &'a UnitaryRep,
    pub space: Arc<FiniteMetricSpace>,
    pub radius: f64,
    /// Points hosting the coordinates of `ℂⁿ`; defaults to `0..n`.
    pub placement: Option<Vec<usize>>,
    pub approximants: Approximants<'a>,
    /// Corner terms `b_g` on the complement of the block; only their norms enter.
    pub corners: Option<&'a (dyn Fn(usize) -> CMatrix + Sync)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateReport {
    pub group: String,
    pub n: usize,
    pub radius: f64,
    pub growth: usize,
    pub parts: usize,
    pub eps_achieved: f64,
    pub gap_bound: f64,
    /// `max(0, gap_bound − 1/10)`: the distance form of the bound.
    pub distance_bound: f64,
    pub tensor_norm: f64,
    pub part_sups: Vec<f64>,
    pub max_part_sup: f64,
    pub per_part_bound: f64,
    pub tensor_check: bool,
    pub pigeonhole_check: bool,
    pub averaging_check: bool,
    pub count_check: bool,
    pub conclusion_check: bool,
    pub pass: bool,
}

/// Runs the chain. A failing verdict contradicts the obstruction and means a
/// bug in the inputs or in this code.
pub fn gap_certificate(input: &GapCertificateInput<'_>) -> Result<CertificateReport> {
    let rep = input.rep;
    let space = &input.space;
    let n = rep.dim();
    let r = input.radius;
    let placement = input.placement.clone().unwrap_or_else(|| (0..n).collect());
    if placement.len() != n || placement.iter().any(|&x| x >= space.len()) {
        return Err(Error::DimensionMismatch(format!(
            "placement of {} points for dimension {n} in a space of {}",
            placement.len(),
            space.len()
        )));
    }
    let mut sorted = placement.clone();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != n {
        return Err(Error::DimensionMismatch("placement points must be distinct".into()));
    }
    let in_band = |i: usize, j: usize| space.dist(placement[i], placement[j]) <= r;

    // Coefficient α_g(i, j) = c_g[j][i] (block coordinates, pair (x_i, x_j)).
    let custom: Option<Vec<CMatrix>> = match &input.approximants {
        Approximants::BandTruncation => None,
        Approximants::Custom(f) => {
            let blocks: Vec<CMatrix> = (0..rep.order()).map(f).collect();
            for (g, c) in blocks.iter().enumerate() {
                if c.shape() != (n, n) {
                    return Err(Error::DimensionMismatch(format!("approximant {g} has shape {:?}", c.shape())));
                }
                for i in 0..n {
                    for j in 0..n {
                        if !in_band(i, j) && c[(j, i)].norm() > ZERO_TOL {
                            return Err(Error::HypothesisViolated(format!("approximant {g} has an entry at distance > R")));
                        }
                    }
                }
            }
            Some(blocks)
        }
    };

    let eps_achieved = achieved_eps(rep, &in_band, custom.as_deref(), input.corners)?;

    let decomposition = decompose_band(space.clone(), r);
    let growth = space.growth(r);
    let mut position = vec![usize::MAX; space.len()];
    for (i, &x) in placement.iter().enumerate() {
        position[x] = i;
    }
    // Band pairs inside the block, grouped by part.
    let part_pairs: Vec<Vec<(usize, usize)>> = decomposition
        .parts
        .iter()
        .map(|t| {
            t.pairs
                .iter()
                .filter(|&&(x, y)| position[x] != usize::MAX && position[y] != usize::MAX)
                .map(|&(x, y)| (position[x], position[y]))
                .collect()
        })
        .collect();
    let pair_count: usize = part_pairs.iter().map(Vec::len).sum();
    if pair_count.saturating_mul(n * n) > MAX_BLOCK_ENTRIES {
        return Err(Error::TooLarge { what: "band pairs × n²", size: pair_count * n * n, limit: MAX_BLOCK_ENTRIES });
    }

    // M_ij = |Γ|⁻¹ Σ_g α_g(i, j) conj(π(g)).
    let flat: Vec<(usize, usize)> = part_pairs.iter().flatten().copied().collect();
    let blocks: Vec<CMatrix> = flat.par_iter().map(|&(i, j)| coefficient_block(rep, i, j, custom.as_deref())).collect();
    let block_norms: Vec<f64> = blocks.par_iter().map(linalg::opnorm).collect::<Result<_>>()?;

    let mut part_sups = Vec::with_capacity(part_pairs.len());
    let mut k = 0;
    for pairs in &part_pairs {
        let sup = block_norms[k..k + pairs.len()].iter().copied().fold(0.0, f64::max);
        part_sups.push(sup);
        k += pairs.len();
    }
    let tensor_norm = block_sparse_norm(n, &flat, &blocks)?;

    let parts = decomposition.parts.len();
    let max_part_sup = part_sups.iter().copied().fold(0.0, f64::max);
    let per_part_bound = (1.0 + eps_achieved) / (n as f64).sqrt();
    let gap_bound = gap_lower_bound(n as f64, growth as f64);
    let tensor_check = tensor_norm >= 1.0 - eps_achieved - CHAIN_TOL;
    let pigeonhole_check = max_part_sup >= (1.0 - eps_achieved) / parts as f64 - CHAIN_TOL;
    let averaging_check = part_sups.iter().all(|&s| s <= per_part_bound + CHAIN_TOL);
    let count_check = parts <= 2 * growth;
    let conclusion_check = eps_achieved >= gap_bound - CHAIN_TOL;
    Ok(CertificateReport {
        group: rep.label().to_string(),
        n,
        radius: r,
        growth,
        parts,
        eps_achieved,
        gap_bound,
        distance_bound: (gap_bound - DISTANCE_OFFSET).max(0.0),
        tensor_norm,
        part_sups,
        max_part_sup,
        per_part_bound,
        tensor_check,
        pigeonhole_check,
        averaging_check,
        count_check,
        conclusion_check,
        pass: tensor_check && pigeonhole_check && averaging_check && count_check && conclusion_check,
    })
}

/// `max_g ‖π(g) + b_g − c_g‖`; with the corner on the complementary block this
/// is `max(‖π(g) − c_g‖, ‖b_g‖)`.
fn achieved_eps(
    rep: &UnitaryRep,
    in_band: &(dyn Fn(usize, usize) -> bool + Sync),
    custom: Option<&[CMatrix]>,
    corners: Option<&(dyn Fn(usize) -> CMatrix + Sync)>,
) -> Result<f64> {
    let n = rep.dim();
    let per_g: Vec<f64> = (0..rep.order())
        .into_par_iter()
        .map(|g| -> Result<f64> {
            let block = match (custom, rep.structure()) {
                (None, Structure::Monomial) => {
                    // π(g) minus its band part is monomial: its norm is the largest off-band modulus.
                    let mono = rep.monomial(g).unwrap();
                    (0..n).filter(|&t| !in_band(mono.cols[t], t)).map(|t| mono.phases[t].norm()).fold(0.0, f64::max)
                }
                (None, Structure::Generic) => {
                    let img = rep.image(g);
                    let off = CMatrix::from_fn(n, n, |j, i| if in_band(i, j) { C64::default() } else { img[(j, i)] });
                    linalg::opnorm(&off)?
                }
                (Some(c), _) => linalg::opnorm(&(rep.image(g) - &c[g]))?,
            };
            let corner = match corners {
                Some(f) => {
                    let b = f(g);
                    let v = linalg::opnorm(&b)?;
                    if v > 1.0 + 1e-12 {
                        return Err(Error::NotAContraction(v));
                    }
                    v
                }
                None => 0.0,
            };
            Ok(block.max(corner))
        })
        .collect::<Result<_>>()?;
    Ok(per_g.into_iter().fold(0.0, f64::max))
}

fn coefficient_block(rep: &UnitaryRep, i: usize, j: usize, custom: Option<&[CMatrix]>) -> CMatrix {
    let n = rep.dim();
    let mut acc = CMatrix::zeros(n, n);
    let add = |acc: &mut CMatrix, g: usize, alpha: C64| {
        if alpha == C64::default() {
            return;
        }
        match rep.monomial(g) {
            Some(mono) => {
                for t in 0..n {
                    acc[(t, mono.cols[t])] += alpha * mono.phases[t].conj();
                }
            }
            None => *acc += rep.image(g).map(|z| z.conj()) * alpha,
        }
    };
    match (custom, rep.group().heisenberg_coords(0).is_some()) {
        (None, true) => {
            // Entry (j, i) of π(a, b, c) is nonzero only when i = j + a (mod p).
            let p = rep.dim();
            let a = (i + p - j) % p;
            for bc in 0..p * p {
                let g = a * p * p + bc;
                add(&mut acc, g, rep.entry(g, j, i));
            }
        }
        (None, false) => {
            for g in 0..rep.order() {
                add(&mut acc, g, rep.entry(g, j, i));
            }
        }
        (Some(c), _) => {
            for (g, cg) in c.iter().enumerate() {
                add(&mut acc, g, cg[(j, i)]);
            }
        }
    }
    acc / c64(rep.order() as f64, 0.0)
}

/// Norm of `K = Σ e_{j i} ⊗ M_ij` on `ℂⁿ ⊗ ℂⁿ`, where the first factor is the block.
fn block_sparse_norm(n: usize, pairs: &[(usize, usize)], blocks: &[CMatrix]) -> Result<f64> {
    use nalgebra::DVector;
    let dim = n * n;
    let apply = |v: &DVector<C64>| {
        let mut w = DVector::<C64>::zeros(dim);
        for (&(i, j), m) in pairs.iter().zip(blocks) {
            let vi = v.rows(i * n, n);
            let prod = m * vi;
            let mut wj = w.rows_mut(j * n, n);
            wj += prod;
        }
        let mut out = DVector::<C64>::zeros(dim);
        for (&(i, j), m) in pairs.iter().zip(blocks) {
            let wj = w.rows(j * n, n);
            let prod = m.adjoint() * wj;
            let mut oi = out.rows_mut(i * n, n);
            oi += prod;
        }
        out
    };
    let (lambda, _) = linalg::hermitian_top(dim, apply)?;
    Ok(lambda.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::{self, cycle};
    use approx::assert_abs_diff_eq;

    fn input<'a>(rep: &'a UnitaryRep, space: FiniteMetricSpace, r: f64) -> GapCertificateInput<'a> {
        GapCertificateInput {
            rep,
            space: Arc::new(space),
            radius: r,
            placement: None,
            approximants: Approximants::BandTruncation,
            corners: None,
        }
    }

    #[test]
    fn gap_bound_values() {
        assert_abs_diff_eq!(gap_lower_bound(64.0, 1.0), 0.6, epsilon = 1e-15);
        assert_abs_diff_eq!(gap_lower_bound(25.0, 1.0), 3.0 / 7.0, epsilon = 1e-15);
        // Cross-check: the smallest ε with (1 − ε)/(2N) <= (1 + ε)/√n by bisection.
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if (1.0 - mid) / 2.0 <= (1.0 + mid) / 5.0 {
                hi = mid
            } else {
                lo = mid
            }
        }
        assert_abs_diff_eq!(hi, 3.0 / 7.0, epsilon = 1e-12);
        assert_eq!(gap_lower_bound(16.0, 2.0), 0.0);
        assert!(gap_lower_bound(100.0, 1.0) > gap_lower_bound(100.0, 2.0));
        assert!(gap_lower_bound(400.0, 2.0) > gap_lower_bound(100.0, 2.0));
    }

    #[test]
    fn theorem_a_radius_examples() {
        assert_eq!(theorem_a_radius(64, &cycle(12)), -1);
        assert_eq!(theorem_a_radius(256, &space::far(6, 6.0).unwrap()), 4);
        assert_eq!(theorem_a_radius(256, &cycle(12)), -1);
        // √n/8 = 4: on C₁₂, N(1) = 3 < 4 and N(2) = 5.
        assert_eq!(theorem_a_radius(1024, &cycle(12)), 0);
    }

    #[test]
    fn heisenberg_five_on_far_points() {
        let rep = UnitaryRep::heisenberg(5).unwrap();
        let report = gap_certificate(&input(&rep, space::far(5, 3.0).unwrap(), 1.0)).unwrap();
        assert!(report.pass, "{report:?}");
        assert_eq!(report.eps_achieved, 1.0);
        assert_eq!((report.growth, report.parts), (1, 1));
        assert_abs_diff_eq!(report.gap_bound, (5f64.sqrt() - 2.0) / (5f64.sqrt() + 2.0), epsilon = 1e-15);
        assert_abs_diff_eq!(report.tensor_norm, 0.2, epsilon = 1e-12);
    }

    #[test]
    fn full_band_has_no_obstruction() {
        let rep = UnitaryRep::heisenberg(3).unwrap();
        let report = gap_certificate(&input(&rep, cycle(3), 5.0)).unwrap();
        assert!(report.pass);
        assert_eq!(report.eps_achieved, 0.0);
        assert_eq!(report.gap_bound, 0.0);
        assert_abs_diff_eq!(report.tensor_norm, 1.0, epsilon = 1e-9);
    }

    #[test]
    fn symmetric_rep_on_path() {
        let rep = UnitaryRep::symmetric_standard(4).unwrap();
        for r in [0.0, 1.0, 2.0] {
            let report = gap_certificate(&input(&rep, space::path(5), r)).unwrap();
            assert!(report.pass, "R = {r}: {report:?}");
        }
    }

    #[test]
    fn custom_approximants_and_corners() {
        let rep = UnitaryRep::heisenberg(3).unwrap();
        let zero = |_g: usize| CMatrix::zeros(3, 3);
        let half = |_g: usize| CMatrix::identity(2, 2) * c64(0.5, 0.0);
        let inp = GapCertificateInput {
            rep: &rep,
            space: Arc::new(cycle(3)),
            radius: 1.0,
            placement: Some(vec![2, 0, 1]),
            approximants: Approximants::Custom(&zero),
            corners: Some(&half),
        };
        let report = gap_certificate(&inp).unwrap();
        assert_eq!(report.eps_achieved, 1.0);
        assert!(report.pass);
        let bad = |_g: usize| CMatrix::from_element(3, 3, c64(1.0, 0.0));
        let inp = GapCertificateInput { approximants: Approximants::Custom(&bad), radius: 0.0, corners: None, ..inp };
        assert!(matches!(gap_certificate(&inp), Err(Error::HypothesisViolated(_))));
    }

    #[test]
    fn placement_errors() {
        let rep = UnitaryRep::heisenberg(5).unwrap();
        let mut inp = input(&rep, cycle(4), 1.0);
        assert!(matches!(gap_certificate(&inp), Err(Error::DimensionMismatch(_))));
        inp.space = Arc::new(cycle(6));
        inp.placement = Some(vec![0, 1, 2, 3, 3]);
        assert!(matches!(gap_certificate(&inp), Err(Error::DimensionMismatch(_))));
    }
}
