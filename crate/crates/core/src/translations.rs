//! Partition of the `R`-band `{(x, y) : dist(x, y) <= R}` into graphs of
//! partial translations, and the entrywise restrictions onto those graphs.
//!
//! A pair `(x, y)` stands for the matrix entry `u[y][x]`, i.e. `T(x) = y`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, C64};
use crate::oper::SpaceOperator;
use crate::space::FiniteMetricSpace;

/// An injective partial map given by its graph, sorted by domain point.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartialTranslation {
    pub pairs: Vec<(usize, usize)>,
}

impl PartialTranslation {
    /// Validates injectivity and single-valuedness.
    pub fn new(mut pairs: Vec<(usize, usize)>, n: usize) -> Result<Self> {
        pairs.sort_unstable();
        let mut seen_dom = vec![false; n];
        let mut seen_ran = vec![false; n];
        for &(x, y) in &pairs {
            if x >= n || y >= n {
                return Err(Error::DimensionMismatch(format!("pair ({x}, {y}) outside a space of {n} points")));
            }
            if std::mem::replace(&mut seen_dom[x], true) || std::mem::replace(&mut seen_ran[y], true) {
                return Err(Error::InvalidParameter(format!("pair ({x}, {y}) breaks injectivity")));
            }
        }
        Ok(Self { pairs })
    }

    pub fn identity(n: usize) -> Self {
        Self { pairs: (0..n).map(|x| (x, x)).collect() }
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct TranslationDecomposition {
    pub space: Arc<FiniteMetricSpace>,
    pub radius: f64,
    pub parts: Vec<PartialTranslation>,
}

/// Decomposition JSON: `{R, parts: [{pairs: [[x, y], ...]}]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompositionJson {
    #[serde(rename = "R")]
    pub radius: f64,
    pub parts: Vec<PartialTranslation>,
}

impl TranslationDecomposition {
    pub fn to_json(&self) -> DecompositionJson {
        DecompositionJson { radius: self.radius, parts: self.parts.clone() }
    }

    /// Number of parts covering each pair; the partition property says this
    /// is the band indicator.
    pub fn cover_counts(&self) -> Vec<u32> {
        let n = self.space.len();
        let mut counts = vec![0u32; n * n];
        for part in &self.parts {
            for &(x, y) in &part.pairs {
                counts[x * n + y] += 1;
            }
        }
        counts
    }

    /// Checks disjointness, exact coverage of the band, injectivity and the
    /// part count bound `2 N_X(R)`.
    pub fn verify(&self) -> Result<()> {
        let n = self.space.len();
        let counts = self.cover_counts();
        for x in 0..n {
            for y in 0..n {
                let want = u32::from(self.space.dist(x, y) <= self.radius);
                if counts[x * n + y] != want {
                    return Err(Error::HypothesisViolated(format!("pair ({x}, {y}) covered {} times, expected {want}", counts[x * n + y])));
                }
            }
        }
        for part in &self.parts {
            PartialTranslation::new(part.pairs.clone(), n)?;
        }
        let cap = 2 * self.space.growth(self.radius);
        if self.parts.len() > cap {
            return Err(Error::HypothesisViolated(format!("{} parts exceed 2 N_X(R) = {cap}", self.parts.len())));
        }
        Ok(())
    }
}

/// Greedy decomposition: pairs in lexicographic `(x, y)` order go to the first
/// part whose domain misses `x` and whose range misses `y`.
///
/// A pair `(x, y)` is blocked only by parts already using `x` as a source or
/// `y` as a target; at most `N_X(R) - 1` other band pairs leave `x` and at
/// most `N_X(R) - 1` enter `y`, so some part among the first `2 N_X(R) - 1`
/// is always free.
pub fn decompose_band(space: Arc<FiniteMetricSpace>, r: f64) -> TranslationDecomposition {
    let n = space.len();
    let cap = 2 * space.growth(r);
    let mut parts: Vec<PartialTranslation> = Vec::new();
    let mut dom: Vec<Vec<bool>> = Vec::new();
    let mut ran: Vec<Vec<bool>> = Vec::new();
    for x in 0..n {
        for y in 0..n {
            if space.dist(x, y) > r {
                continue;
            }
            let slot = match (0..parts.len()).find(|&i| !dom[i][x] && !ran[i][y]) {
                Some(i) => i,
                None => {
                    parts.push(PartialTranslation { pairs: Vec::new() });
                    dom.push(vec![false; n]);
                    ran.push(vec![false; n]);
                    assert!(parts.len() <= cap, "band decomposition needs more than 2 N_X(R) = {cap} parts");
                    parts.len() - 1
                }
            };
            parts[slot].pairs.push((x, y));
            dom[slot][x] = true;
            ran[slot][y] = true;
        }
    }
    TranslationDecomposition { space, radius: r, parts }
}

/// Keeps the entries of `u` on the graph of `t` and zeroes the rest.
pub fn schur_restrict(u: &SpaceOperator, t: &PartialTranslation) -> SpaceOperator {
    let n = u.len();
    let mut entries = CMatrix::from_element(n, n, C64::default());
    for &(x, y) in &t.pairs {
        entries[(y, x)] = u.entry(y, x);
    }
    u.with_entries(entries).expect("same shape as u")
}

/// Norm of `schur_restrict(u, t)`: the restriction has at most one nonzero per
/// row and column, so its norm is the largest entry modulus.
pub fn restricted_norm(u: &SpaceOperator, t: &PartialTranslation) -> f64 {
    t.pairs.iter().map(|&(x, y)| u.entry(y, x).norm()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oper::random_gaussian;
    use crate::rng;
    use crate::space::{self, complete, path};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::Rng as _;

    #[test]
    fn far_points_give_identity() {
        let s = Arc::new(space::far(5, 3.0).unwrap());
        let d = decompose_band(s, 1.0);
        assert_eq!(d.parts, vec![PartialTranslation::identity(5)]);
    }

    #[test]
    fn path_four_hand_enumeration() {
        let d = decompose_band(Arc::new(path(4)), 1.0);
        let expect = vec![vec![(0, 0), (1, 1), (2, 2), (3, 3)], vec![(0, 1), (1, 0), (2, 3), (3, 2)], vec![(1, 2), (2, 1)]];
        assert_eq!(d.parts.iter().map(|p| p.pairs.clone()).collect::<Vec<_>>(), expect);
        d.verify().unwrap();
    }

    #[test]
    fn complete_graph_k6() {
        let d = decompose_band(Arc::new(complete(6)), 1.0);
        d.verify().unwrap();
        assert!(d.parts.len() <= 11);
        assert_eq!(d.parts.iter().map(PartialTranslation::len).sum::<usize>(), 36);
    }

    #[test]
    fn schur_restrict_examples() {
        let s = Arc::new(space::random_regular(10, 3, 2).unwrap());
        let u = random_gaussian(s.clone(), 1);
        let id = PartialTranslation::identity(10);
        let diag = schur_restrict(&u, &id);
        assert_eq!(diag.entries(), u.band_truncate(0.0).entries());
        let max_diag = (0..10).map(|x| u.entry(x, x).norm()).fold(0.0, f64::max);
        assert_abs_diff_eq!(diag.opnorm().unwrap(), max_diag, epsilon = 1e-10);
        let off = u.sub(&u.band_truncate(0.0)).unwrap();
        assert!(schur_restrict(&off, &id).entries().iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn random_translation_norm_is_max_entry() {
        let mut g = rng::seeded(17);
        for seed in 0..10 {
            let s = Arc::new(path(12));
            let u = random_gaussian(s.clone(), seed);
            let mut ys: Vec<usize> = (0..12).collect();
            rand::seq::SliceRandom::shuffle(&mut ys[..], &mut g);
            let pairs = (0..12).filter(|_| g.random_bool(0.6)).map(|x| (x, ys[x])).collect();
            let t = PartialTranslation::new(pairs, 12).unwrap();
            let res = schur_restrict(&u, &t);
            assert_abs_diff_eq!(res.opnorm().unwrap(), restricted_norm(&u, &t), epsilon = 1e-10);
            assert!(restricted_norm(&u, &t) <= u.opnorm().unwrap() + 1e-12);
        }
    }

    #[test]
    fn injectivity_is_enforced() {
        assert!(PartialTranslation::new(vec![(0, 1), (2, 1)], 3).is_err());
        assert!(PartialTranslation::new(vec![(0, 1), (0, 2)], 3).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]
        #[test]
        fn partition_and_sum_identity(n in 2usize..40, p in 0.0f64..0.15, seed in 0u64..1000, r in 1u32..4) {
            let s = Arc::new(space::random_graph(n, p, seed).unwrap());
            let r = r as f64;
            let d = decompose_band(s.clone(), r);
            d.verify().unwrap();
            let u = random_gaussian(s, seed);
            let mut sum = CMatrix::zeros(n, n);
            for t in &d.parts {
                sum += schur_restrict(&u, t).entries();
            }
            let band = u.band_truncate(r);
            prop_assert_eq!(&sum, band.entries());
        }
    }
}
