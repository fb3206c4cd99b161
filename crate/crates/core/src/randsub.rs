//! Random subspaces of `ℝ^d`, norms of their projections restricted to
//! coordinate subsets, and Monte Carlo checks of the concentration estimates
//! behind them.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::linalg;
use crate::rng;

/// Largest number of subsets scanned in exact mode.
pub const EXACT_SUBSET_LIMIT: u64 = 1_000_000;
pub const DEFAULT_C0: f64 = 100.0;
pub const MAX_SWAPS: usize = 500;
const SAMPLE_RETRIES: usize = 10;
const RANK_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct SubspaceSample {
    pub d: usize,
    pub n: usize,
    pub seed: u64,
    /// Unit spanning vectors as columns (`d × n`).
    pub vectors: DMatrix<f64>,
    /// Orthonormal basis of the span as columns (`d × n`).
    pub basis: DMatrix<f64>,
}

/// `n` independent uniform points of `S^{d-1}` and an orthonormal basis of
/// their span. Attempts after the first use derived seeds.
pub fn sample_subspace(d: usize, n: usize, seed: u64) -> Result<SubspaceSample> {
    if n == 0 || n >= d {
        return Err(Error::InvalidParameter(format!("subspace needs 1 <= n < d (n = {n}, d = {d})")));
    }
    for attempt in 0..SAMPLE_RETRIES {
        let mut g = rng::seeded(if attempt == 0 { seed } else { rng::mix(seed, attempt as u64) });
        let mut vectors = DMatrix::<f64>::from_fn(d, n, |_, _| StandardNormal.sample(&mut g));
        for mut col in vectors.column_iter_mut() {
            let norm = col.norm();
            col /= norm;
        }
        let qr = vectors.clone().qr();
        let r = qr.r();
        if (0..n).any(|i| r[(i, i)].abs() < RANK_TOL) {
            continue;
        }
        let basis = qr.q();
        return Ok(SubspaceSample { d, n, seed, vectors, basis });
    }
    Err(Error::RankDeficient(SAMPLE_RETRIES))
}

impl SubspaceSample {
    /// Subspace with the given orthonormal basis columns.
    pub fn from_basis(basis: DMatrix<f64>, seed: u64) -> Result<Self> {
        let (d, n) = basis.shape();
        let gram = basis.transpose() * &basis;
        if (gram - DMatrix::identity(n, n)).amax() > 1e-9 {
            return Err(Error::InvalidParameter("basis columns are not orthonormal".into()));
        }
        Ok(Self { d, n, seed, vectors: basis.clone(), basis })
    }

    pub fn projection(&self) -> DMatrix<f64> {
        &self.basis * self.basis.transpose()
    }

    /// Largest of `‖P² − P‖`, `‖P − Pᵀ‖` (entrywise) and `|trace P − n|`.
    pub fn projection_error(&self) -> f64 {
        let p = self.projection();
        let idem = (&p * &p - &p).amax();
        let sym = (&p - p.transpose()).amax();
        idem.max(sym).max((p.trace() - self.n as f64).abs())
    }

    /// `‖P_V|ℓ₂E‖ = σ_max` of the `E`-rows of the basis.
    pub fn restricted_norm(&self, e: &[usize]) -> f64 {
        self.gram_lambda_max(e).max(0.0).sqrt()
    }

    /// `‖P_V|ℓ₂E‖` as the norm of the `E`-columns of `P`.
    pub fn restricted_norm_via_projection(&self, e: &[usize]) -> Result<f64> {
        let p = self.projection();
        let cols = DMatrix::from_fn(self.d, e.len(), |i, j| p[(i, e[j])]);
        linalg::opnorm_real(&cols)
    }

    /// `Σ_{i ∈ E} q_i q_iᵀ` over the basis rows `q_i`.
    fn gram(&self, e: &[usize]) -> DMatrix<f64> {
        let n = self.n;
        let mut g = DMatrix::<f64>::zeros(n, n);
        for &i in e {
            let row = self.basis.row(i);
            for a in 0..n {
                for b in 0..n {
                    g[(a, b)] += row[a] * row[b];
                }
            }
        }
        g
    }

    fn gram_lambda_max(&self, e: &[usize]) -> f64 {
        linalg::sym_lambda_max(&self.gram(e))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SubsetMode {
    Exact,
    Greedy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RestrictedNormReport {
    pub delta: f64,
    pub k: usize,
    pub mode: SubsetMode,
    /// Exact maximum, or the best value found (a lower bound) in greedy mode.
    pub value: f64,
    pub witness: Vec<usize>,
    pub c0: f64,
    /// `c0 √(δ log(1/δ))`.
    pub bound: f64,
    /// The bound is at least 1, so it holds for every projection.
    pub vacuous: bool,
    pub formal_bound_holds: bool,
}

/// `c0 √(δ log(1/δ))`.
pub fn formal_bound(c0: f64, delta: f64) -> f64 {
    c0 * (delta * (1.0 / delta).ln()).sqrt()
}

pub fn subset_size(d: usize, delta: f64) -> usize {
    (delta * d as f64 + 1e-9).floor() as usize
}

/// `C(d, k)`, saturating.
pub fn binomial(d: usize, k: usize) -> u64 {
    let k = k.min(d - k.min(d));
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (d - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return u64::MAX;
        }
    }
    acc as u64
}

/// Largest `‖P_V|ℓ₂E‖` over `|E| = ⌊δd⌋`.
pub fn restricted_norm_max(sample: &SubspaceSample, delta: f64, mode: SubsetMode, c0: f64) -> Result<RestrictedNormReport> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::InvalidParameter(format!("delta must lie in (0, 1], got {delta}")));
    }
    let k = subset_size(sample.d, delta);
    let (value, witness) = if k == 0 {
        (0.0, Vec::new())
    } else {
        match mode {
            SubsetMode::Exact => exact_max(sample, k)?,
            SubsetMode::Greedy => greedy_max(sample, k),
        }
    };
    let bound = formal_bound(c0, delta);
    let vacuous = bound >= 1.0;
    let formal_bound_holds = if vacuous { value <= 1.0 + 1e-9 } else { value < bound };
    Ok(RestrictedNormReport { delta, k, mode, value, witness, c0, bound, vacuous, formal_bound_holds })
}

fn exact_max(sample: &SubspaceSample, k: usize) -> Result<(f64, Vec<usize>)> {
    let d = sample.d;
    let count = binomial(d, k);
    if count > EXACT_SUBSET_LIMIT {
        return Err(Error::TooLargeForExact {
            what: "C(d, k)",
            size: count.min(usize::MAX as u64) as usize,
            limit: EXACT_SUBSET_LIMIT as usize,
        });
    }
    let per_first: Vec<(f64, Vec<usize>)> = (0..=d - k)
        .into_par_iter()
        .map(|first| {
            let mut best = (f64::NEG_INFINITY, Vec::new());
            let mut combo: Vec<usize> = (first..first + k).collect();
            loop {
                let v = sample.restricted_norm(&combo);
                if v > best.0 {
                    best = (v, combo.clone());
                }
                if !next_combination(&mut combo[1..], d) {
                    break;
                }
            }
            best
        })
        .collect();
    Ok(per_first.into_iter().fold((f64::NEG_INFINITY, Vec::new()), |a, b| if b.0 > a.0 { b } else { a }))
}

/// Advances a sorted combination with entries below `hi`.
fn next_combination(c: &mut [usize], hi: usize) -> bool {
    let k = c.len();
    if k == 0 {
        return false;
    }
    let mut i = k;
    while i > 0 {
        i -= 1;
        if c[i] < hi - (k - i) {
            c[i] += 1;
            for j in i + 1..k {
                c[j] = c[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Leverage-score seed followed by first-improvement single swaps, candidates
/// ordered by their overlap with the top right singular vector.
fn greedy_max(sample: &SubspaceSample, k: usize) -> (f64, Vec<usize>) {
    let d = sample.d;
    let leverage: Vec<f64> = (0..d).map(|i| sample.basis.row(i).norm_squared()).collect();
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| leverage[b].total_cmp(&leverage[a]).then(a.cmp(&b)));
    let mut e: Vec<usize> = order[..k].to_vec();
    e.sort_unstable();
    let mut value = sample.restricted_norm(&e);
    if k == d {
        return (value, e);
    }
    for _ in 0..MAX_SWAPS {
        let eig = SymmetricEigen::new(sample.gram(&e));
        let top = eig.eigenvalues.imax();
        let alpha: DVector<f64> = eig.eigenvectors.column(top).into_owned();
        let overlap = |i: usize| sample.basis.row(i).transpose().dot(&alpha).powi(2);
        let mut inside: Vec<usize> = e.clone();
        inside.sort_by(|&a, &b| overlap(a).total_cmp(&overlap(b)).then(a.cmp(&b)));
        let member: Vec<bool> = (0..d).map(|i| e.binary_search(&i).is_ok()).collect();
        let mut outside: Vec<usize> = (0..d).filter(|&i| !member[i]).collect();
        outside.sort_by(|&a, &b| overlap(b).total_cmp(&overlap(a)).then(a.cmp(&b)));
        let mut swapped = false;
        'search: for &j in &outside {
            for &i in &inside {
                let mut cand: Vec<usize> = e.iter().copied().filter(|&x| x != i).collect();
                cand.push(j);
                cand.sort_unstable();
                let v = sample.restricted_norm(&cand);
                if v > value + 1e-12 {
                    e = cand;
                    value = v;
                    swapped = true;
                    break 'search;
                }
            }
        }
        if !swapped {
            break;
        }
    }
    (value, e)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub trial: usize,
    pub seed: u64,
    pub value: f64,
    pub witness: Vec<usize>,
    pub below_bound: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McReport {
    pub d: usize,
    pub n: usize,
    pub delta: f64,
    pub k: usize,
    pub c0: f64,
    pub bound: f64,
    pub vacuous: bool,
    pub mode: SubsetMode,
    pub trials: usize,
    pub successes: usize,
    pub probability: f64,
    /// Empirical 99th percentile of the restricted maxima.
    pub percentile_99: f64,
    pub max_value: f64,
    pub results: Vec<TrialResult>,
}

/// Fraction of random subspaces whose restricted maximum is below
/// `c0 √(δ log(1/δ))`. Exact subset scans are used when affordable, greedy
/// (a lower bound for the maximum) otherwise.
pub fn mc_lemma_random(d: usize, n: usize, delta: f64, c0: f64, trials: usize, seed: u64) -> Result<McReport> {
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be at least 1".into()));
    }
    let k = subset_size(d, delta);
    let mode = if binomial(d, k) <= EXACT_SUBSET_LIMIT { SubsetMode::Exact } else { SubsetMode::Greedy };
    let bound = formal_bound(c0, delta);
    let results: Vec<TrialResult> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let s = rng::mix(seed, t as u64);
            let sample = sample_subspace(d, n, s)?;
            let rep = restricted_norm_max(&sample, delta, mode, c0)?;
            Ok(TrialResult { trial: t, seed: s, value: rep.value, witness: rep.witness, below_bound: rep.value < bound })
        })
        .collect::<Result<_>>()?;
    let successes = results.iter().filter(|r| r.below_bound).count();
    let mut values: Vec<f64> = results.iter().map(|r| r.value).collect();
    values.sort_by(f64::total_cmp);
    let idx = ((0.99 * trials as f64).ceil() as usize).clamp(1, trials) - 1;
    Ok(McReport {
        d,
        n,
        delta,
        k,
        c0,
        bound,
        vacuous: bound >= 1.0,
        mode,
        trials,
        successes,
        probability: successes as f64 / trials as f64,
        percentile_99: values[idx],
        max_value: values[trials - 1],
        results,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailCheck {
    pub t: f64,
    pub fraction: f64,
    pub bound: f64,
    pub slack: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevyReport {
    pub d: usize,
    pub delta: f64,
    pub k: usize,
    pub trials: usize,
    pub median: f64,
    /// `√δ + 12/√d`.
    pub median_bound: f64,
    pub median_holds: bool,
    pub mean_square: f64,
    pub mean_square_se: f64,
    /// `|mean ‖1_E x‖² − k/d| <= 3 SE`.
    pub mean_square_holds: bool,
    pub tails: Vec<TailCheck>,
}

/// Distribution of `‖1_E x‖` for uniform `x ∈ S^{d-1}` and `E` the first
/// `⌊δd⌋` coordinates.
pub fn levy_median_check(d: usize, delta: f64, trials: usize, seed: u64) -> Result<LevyReport> {
    let k = subset_size(d, delta);
    if k == 0 || k > d || trials == 0 {
        return Err(Error::InvalidParameter(format!("need 1 <= floor(delta d) <= d and trials >= 1 (d = {d}, delta = {delta})")));
    }
    let values: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut g = rng::derived(seed, t as u64);
            let x: Vec<f64> = (0..d).map(|_| StandardNormal.sample(&mut g)).collect();
            let total: f64 = x.iter().map(|v| v * v).sum();
            let part: f64 = x[..k].iter().map(|v| v * v).sum();
            (part / total).sqrt()
        })
        .collect();
    let mut sorted = values.clone();
    sorted.sort_by(f64::total_cmp);
    let median = if trials % 2 == 1 { sorted[trials / 2] } else { 0.5 * (sorted[trials / 2 - 1] + sorted[trials / 2]) };
    let median_bound = delta.sqrt() + 12.0 / (d as f64).sqrt();
    let squares: Vec<f64> = values.iter().map(|v| v * v).collect();
    let mean_square = squares.iter().sum::<f64>() / trials as f64;
    let var = if trials > 1 { squares.iter().map(|s| (s - mean_square).powi(2)).sum::<f64>() / (trials - 1) as f64 } else { 0.0 };
    let mean_square_se = (var / trials as f64).sqrt();
    let expected = k as f64 / d as f64;
    let tails = [0.05, 0.1]
        .iter()
        .map(|&t| {
            let fraction = values.iter().filter(|&&v| v > median + t).count() as f64 / trials as f64;
            let bound = 2.0 * (-t * t * d as f64 / 2.0).exp();
            let p = bound.min(1.0);
            let slack = 3.0 * (p * (1.0 - p) / trials as f64).sqrt() + 1.0 / trials as f64;
            TailCheck { t, fraction, bound, slack, holds: fraction <= bound + slack }
        })
        .collect();
    Ok(LevyReport {
        d,
        delta,
        k,
        trials,
        median,
        median_bound,
        median_holds: median <= median_bound,
        mean_square,
        mean_square_se,
        mean_square_holds: (mean_square - expected).abs() <= 3.0 * mean_square_se + 1e-15,
        tails,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntropyCheck {
    pub d: usize,
    pub delta: f64,
    pub log_binomial: f64,
    /// `H(δ) d`.
    pub h_bound: f64,
    pub holds: bool,
}

/// `H(δ) = −δ log δ − (1 − δ) log(1 − δ)`.
pub fn binary_entropy(delta: f64) -> f64 {
    -delta * delta.ln() - (1.0 - delta) * (1.0 - delta).ln()
}

/// `log C(d, δd)` against `H(δ) d`.
pub fn entropy_count_bound(d: usize, delta: f64) -> Result<EntropyCheck> {
    let kd = delta * d as f64;
    if !(delta > 0.0 && delta < 1.0) || (kd - kd.round()).abs() > 1e-9 {
        return Err(Error::InvalidParameter(format!("need 0 < delta < 1 with delta d integral (d = {d}, delta = {delta})")));
    }
    let k = kd.round();
    let n = d as f64;
    let log_binomial = ln_gamma(n + 1.0) - ln_gamma(k + 1.0) - ln_gamma(n - k + 1.0);
    let h_bound = binary_entropy(delta) * n;
    Ok(EntropyCheck { d, delta, log_binomial, h_bound, holds: log_binomial <= h_bound + 1e-9 })
}

/// `H(δ) < ε²/4` with `ε = 25 √(δ log(1/δ))`.
pub fn entropy_below_eps_sq(delta: f64) -> bool {
    let eps = 25.0 * (delta * (1.0 / delta).ln()).sqrt();
    binary_entropy(delta) < eps * eps / 4.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn sample_invariants() {
        let s = sample_subspace(10, 3, 4).unwrap();
        assert!(s.projection_error() < 1e-10);
        assert_abs_diff_eq!(s.projection().trace(), 3.0, epsilon = 1e-10);
        let one = sample_subspace(7, 1, 2).unwrap();
        let x = one.vectors.column(0);
        assert!((one.projection() - x * x.transpose()).amax() < 1e-12);
        let other = sample_subspace(10, 3, 5).unwrap();
        assert!((s.projection() - other.projection()).amax() > 0.1);
        assert_eq!(sample_subspace(10, 3, 4).unwrap().basis, s.basis);
        assert!(sample_subspace(4, 4, 0).is_err());
    }

    #[test]
    fn restricted_norm_examples() {
        let mut e1 = DMatrix::zeros(6, 1);
        e1[(0, 0)] = 1.0;
        let s = SubspaceSample::from_basis(e1, 0).unwrap();
        assert_abs_diff_eq!(s.restricted_norm(&[0, 3]), 1.0, epsilon = 1e-15);
        let uniform = SubspaceSample::from_basis(DMatrix::from_element(8, 1, 1.0 / 8f64.sqrt()), 0).unwrap();
        let r = restricted_norm_max(&uniform, 0.25, SubsetMode::Exact, DEFAULT_C0).unwrap();
        assert_abs_diff_eq!(r.value, 0.5, epsilon = 1e-12);
        assert!(r.vacuous && r.formal_bound_holds);
    }

    #[test]
    fn two_routes_agree() {
        let s = sample_subspace(20, 4, 9).unwrap();
        for e in [vec![0, 5, 7], vec![1, 2, 3, 4, 19], vec![11]] {
            assert_abs_diff_eq!(s.restricted_norm(&e), s.restricted_norm_via_projection(&e).unwrap(), epsilon = 1e-9);
        }
    }

    #[test]
    fn exact_scan_matches_enumeration() {
        let s = sample_subspace(12, 2, 5).unwrap();
        let exact = restricted_norm_max(&s, 0.25, SubsetMode::Exact, DEFAULT_C0).unwrap();
        let mut best = 0.0f64;
        for a in 0..12 {
            for b in a + 1..12 {
                for c in b + 1..12 {
                    best = best.max(s.restricted_norm_via_projection(&[a, b, c]).unwrap());
                }
            }
        }
        assert_abs_diff_eq!(exact.value, best, epsilon = 1e-9);
        let greedy = restricted_norm_max(&s, 0.25, SubsetMode::Greedy, DEFAULT_C0).unwrap();
        assert!(greedy.value <= exact.value + 1e-12);
        assert!(exact.value <= 1.0 + 1e-9);
    }

    #[test]
    fn exact_is_monotone_in_delta_and_n() {
        let s = sample_subspace(10, 2, 1).unwrap();
        let mut prev = 0.0;
        for delta in [0.1, 0.2, 0.3, 0.4] {
            let v = restricted_norm_max(&s, delta, SubsetMode::Exact, 3.0).unwrap().value;
            assert!(v >= prev - 1e-12);
            prev = v;
        }
        // Adding a basis vector can only enlarge V.
        let big = sample_subspace(10, 3, 1).unwrap();
        let small = SubspaceSample::from_basis(big.basis.columns(0, 2).into_owned(), 0).unwrap();
        let vs = restricted_norm_max(&small, 0.3, SubsetMode::Exact, 3.0).unwrap().value;
        let vb = restricted_norm_max(&big, 0.3, SubsetMode::Exact, 3.0).unwrap().value;
        assert!(vb >= vs - 1e-12);
        assert!(matches!(
            restricted_norm_max(&sample_subspace(60, 2, 0).unwrap(), 0.5, SubsetMode::Exact, 3.0),
            Err(Error::TooLargeForExact { .. })
        ));
    }

    #[test]
    fn mc_vacuous_and_degenerate() {
        let r = mc_lemma_random(40, 2, 0.05, 100.0, 10, 3).unwrap();
        assert!(r.vacuous);
        assert_eq!(r.probability, 1.0);
        assert_abs_diff_eq!(r.bound, 100.0 * (0.05 * 20f64.ln()).sqrt(), epsilon = 1e-12);
        let near = mc_lemma_random(12, 11, 0.25, 1.0, 5, 1).unwrap();
        assert_eq!(near.probability, 0.0);
        assert!(near.results.iter().all(|t| t.value > 0.99));
    }

    #[test]
    fn levy_examples() {
        let full = levy_median_check(50, 1.0, 20, 0).unwrap();
        assert_abs_diff_eq!(full.median, 1.0, epsilon = 1e-12);
        assert!(full.median_holds);
        let r = levy_median_check(400, 0.04, 500, 11).unwrap();
        assert!((r.median - 0.2).abs() <= 3.0 / 20.0);
        assert!(r.mean_square_holds && r.tails.iter().all(|t| t.holds));
    }

    #[test]
    fn entropy_examples() {
        let e = entropy_count_bound(2, 0.5).unwrap();
        assert_abs_diff_eq!(e.log_binomial, 2f64.ln(), epsilon = 1e-12);
        assert_abs_diff_eq!(e.h_bound, 2.0 * 2f64.ln(), epsilon = 1e-12);
        let e = entropy_count_bound(100, 0.1).unwrap();
        // log C(100, 10) from the exact integer.
        let exact = (0..10).map(|i| ((100 - i) as f64 / (i + 1) as f64).ln()).sum::<f64>();
        assert_abs_diff_eq!(e.log_binomial, exact, epsilon = 1e-9);
        assert!(e.holds);
        assert!(entropy_count_bound(10, 0.15).is_err());
        assert!((1..100).map(|i| i as f64 / 1000.0).all(entropy_below_eps_sq));
    }

    #[test]
    fn binomial_values() {
        assert_eq!(binomial(12, 3), 220);
        assert_eq!(binomial(5, 0), 1);
        assert_eq!(binomial(400, 16), u64::MAX);
        assert!(binomial(400, 16) > EXACT_SUBSET_LIMIT);
    }
}
