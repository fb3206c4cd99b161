//! Operators on `ℓ₂X` stored as dense complex matrices `u[y][x] = ⟨uδ_x, δ_y⟩`.

use std::sync::Arc;

use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, c64, CMatrix, C64};
use crate::rng;
use crate::space::FiniteMetricSpace;

/// Largest space stored densely.
pub const DENSE_MAX: usize = 4096;
/// Largest space for the exact ε-propagation scan.
pub const EXACT_EPS_MAX: usize = 20;
/// Largest space for the exhaustive separated-rectangle scan.
pub const EXHAUSTIVE_RECT_MAX: usize = 12;
/// Modulus below which an entry counts as zero.
pub const ZERO_TOL: f64 = 1e-9;
pub const DEFAULT_BUDGET: usize = 1000;
const GROWTH_SWEEPS: usize = 20;
const GROWTH_SEEDS: usize = 4;
const GROWTH_CANDIDATES: usize = 6;

#[derive(Debug, Clone)]
pub struct SpaceOperator {
    space: Arc<FiniteMetricSpace>,
    entries: CMatrix,
}

/// A compression `1_A u 1_B`: rows in `a`, columns in `b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RectangleWitness {
    pub a: Vec<usize>,
    pub b: Vec<usize>,
    pub separation: f64,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EpsMode {
    Exact,
    Heuristic,
}

/// Result of an ε-propagation query. In exact mode `lower == upper`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpsPropagation {
    pub lower: f64,
    pub upper: f64,
    pub exact: bool,
    /// A rectangle of norm `> eps`, separated by at least `lower`.
    pub witness: Option<RectangleWitness>,
}

/// Two-sided bounds on the distance from `u` to the operators of propagation at most `R`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandDistance {
    pub radius: f64,
    pub lower: f64,
    pub upper: f64,
    pub exhaustive: bool,
    pub witness: Option<RectangleWitness>,
}

/// Operator JSON: `{space_label, n, rows}` with `rows` the row-major `[re, im]` entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatorJson {
    pub space_label: String,
    pub n: usize,
    pub rows: Vec<[f64; 2]>,
}

impl SpaceOperator {
    pub fn new(space: Arc<FiniteMetricSpace>, entries: CMatrix) -> Result<Self> {
        let n = space.len();
        if entries.shape() != (n, n) {
            return Err(Error::DimensionMismatch(format!("operator is {:?}, space has {n} points", entries.shape())));
        }
        if n > DENSE_MAX {
            return Err(Error::TooLarge { what: "dense operator size", size: n, limit: DENSE_MAX });
        }
        Ok(Self { space, entries })
    }

    /// Builds `u` from `f(y, x) = ⟨uδ_x, δ_y⟩`.
    pub fn from_fn(space: Arc<FiniteMetricSpace>, f: impl FnMut(usize, usize) -> C64) -> Result<Self> {
        let n = space.len();
        Self::new(space, CMatrix::from_fn(n, n, f))
    }

    pub fn zeros(space: Arc<FiniteMetricSpace>) -> Self {
        let n = space.len();
        Self { space, entries: CMatrix::zeros(n, n) }
    }

    pub fn identity(space: Arc<FiniteMetricSpace>) -> Self {
        let n = space.len();
        Self { space, entries: CMatrix::identity(n, n) }
    }

    pub fn space(&self) -> &Arc<FiniteMetricSpace> {
        &self.space
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    pub fn into_entries(self) -> CMatrix {
        self.entries
    }

    pub fn len(&self) -> usize {
        self.space.len()
    }

    pub fn is_empty(&self) -> bool {
        self.space.is_empty()
    }

    /// `⟨uδ_x, δ_y⟩`.
    #[inline]
    pub fn entry(&self, y: usize, x: usize) -> C64 {
        self.entries[(y, x)]
    }

    pub fn with_entries(&self, entries: CMatrix) -> Result<Self> {
        Self::new(self.space.clone(), entries)
    }

    pub fn opnorm(&self) -> Result<f64> {
        linalg::opnorm(&self.entries)
    }

    /// Largest `dist(x, y)` over entries of modulus `> tol`; `-∞` if there are none.
    pub fn propagation(&self, tol: f64) -> f64 {
        let n = self.len();
        let mut best = f64::NEG_INFINITY;
        for x in 0..n {
            for y in 0..n {
                if self.entries[(y, x)].norm() > tol {
                    best = best.max(self.space.dist(x, y));
                }
            }
        }
        best
    }

    /// `‖1_A u 1_B‖` with the separation `dist(A, B)`.
    pub fn rect_norm(&self, a: &[usize], b: &[usize]) -> Result<RectangleWitness> {
        if a.is_empty() || b.is_empty() {
            return Err(Error::EmptySubset);
        }
        let value = linalg::opnorm(&linalg::submatrix(&self.entries, a, b))?;
        Ok(RectangleWitness { a: a.to_vec(), b: b.to_vec(), separation: self.space.set_distance(a, b), value })
    }

    /// Keeps the entries with `dist(x, y) <= r`.
    pub fn band_truncate(&self, r: f64) -> Self {
        let n = self.len();
        let entries = CMatrix::from_fn(n, n, |y, x| if self.space.dist(x, y) <= r { self.entries[(y, x)] } else { C64::default() });
        Self { space: self.space.clone(), entries }
    }

    /// `‖u − band_truncate(u, r)‖`.
    pub fn band_tail_norm(&self, r: f64) -> Result<f64> {
        let n = self.len();
        let tail = CMatrix::from_fn(n, n, |y, x| if self.space.dist(x, y) > r { self.entries[(y, x)] } else { C64::default() });
        linalg::opnorm(&tail)
    }

    pub fn to_json(&self) -> OperatorJson {
        let n = self.len();
        let mut rows = Vec::with_capacity(n * n);
        for y in 0..n {
            for x in 0..n {
                let z = self.entries[(y, x)];
                rows.push([z.re, z.im]);
            }
        }
        OperatorJson { space_label: self.space.label().to_string(), n, rows }
    }

    pub fn from_json(space: Arc<FiniteMetricSpace>, json: &OperatorJson) -> Result<Self> {
        let n = space.len();
        if json.n != n || json.rows.len() != n * n {
            return Err(Error::DimensionMismatch(format!(
                "operator JSON has n = {} and {} entries; space has {n} points",
                json.n,
                json.rows.len()
            )));
        }
        Self::from_fn(space, |y, x| {
            let [re, im] = json.rows[y * n + x];
            c64(re, im)
        })
    }

    /// Smallest radius `R` such that every rectangle separated by more than
    /// `R` has norm at most `eps`, or a bracket around it.
    pub fn eps_propagation_radius(&self, eps: f64, mode: EpsMode, budget: usize, seed: u64) -> Result<EpsPropagation> {
        if !(eps > 0.0) {
            return Err(Error::InvalidParameter(format!("eps must be positive, got {eps}")));
        }
        match mode {
            EpsMode::Exact => self.exact_eps(eps),
            EpsMode::Heuristic => self.heuristic_eps(eps, budget, seed),
        }
    }

    fn exact_eps(&self, eps: f64) -> Result<EpsPropagation> {
        let n = self.len();
        if n > EXACT_EPS_MAX {
            return Err(Error::TooLargeForExact { what: "|X|", size: n, limit: EXACT_EPS_MAX });
        }
        if n == 0 {
            return Ok(EpsPropagation { lower: 0.0, upper: 0.0, exact: true, witness: None });
        }
        let scan = SubsetScan::new(self);
        let radii = &scan.radii;
        let total: u32 = 1 << n;
        const CHUNK: u32 = 1 << 10;
        let chunks: Vec<u32> = (0..total.div_ceil(CHUNK)).collect();
        // Per chunk: the largest radius index needed and the first subset needing it.
        let per_chunk: Vec<(usize, u32)> = chunks
            .par_iter()
            .map(|&c| {
                let mut k = 0usize;
                let mut arg = 0u32;
                for mask in (c * CHUNK).max(1)..((c + 1) * CHUNK).min(total) {
                    while k < radii.len() - 1 && scan.value(mask, radii[k]) > eps {
                        k += 1;
                        arg = mask;
                    }
                }
                (k, arg)
            })
            .collect();
        let (k, arg) = per_chunk.into_iter().fold((0, 0), |acc, b| if b.0 > acc.0 { b } else { acc });
        let radius = radii[k];
        let witness = if k == 0 {
            None
        } else {
            let (a, b) = scan.rectangle(arg, radii[k - 1]);
            Some(self.rect_norm(&a, &b)?)
        };
        Ok(EpsPropagation { lower: radius, upper: radius, exact: true, witness })
    }

    fn heuristic_eps(&self, eps: f64, budget: usize, seed: u64) -> Result<EpsPropagation> {
        let radii = self.space.distinct_distances();
        let mut upper = *radii.last().unwrap_or(&0.0);
        for &r in &radii {
            if self.band_tail_norm(r)? <= eps {
                upper = r;
                break;
            }
        }
        for (i, &r) in radii.iter().enumerate().rev() {
            if r >= upper {
                continue;
            }
            let best = self.search_rectangles(r, budget, rng::mix(seed, i as u64))?;
            if let Some(w) = best.filter(|w| w.value > eps) {
                return Ok(EpsPropagation { lower: w.separation, upper, exact: false, witness: Some(w) });
            }
        }
        Ok(EpsPropagation { lower: 0.0, upper, exact: false, witness: None })
    }

    /// Lower and upper bounds on `inf ‖u − c‖` over `c` of propagation at most `r`.
    /// The lower bound is the largest rectangle separated by more than `r`,
    /// exhaustive for `|X| <= 12` and searched otherwise.
    pub fn dist_to_band_bounds(&self, r: f64, budget: usize, seed: u64) -> Result<BandDistance> {
        let upper = self.band_tail_norm(r)?;
        let n = self.len();
        let exhaustive = n <= EXHAUSTIVE_RECT_MAX;
        let witness = if exhaustive { self.exhaustive_rectangle(r)? } else { self.search_rectangles(r, budget, seed)? };
        let lower = witness.as_ref().map_or(0.0, |w| w.value);
        Ok(BandDistance { radius: r, lower, upper, exhaustive, witness })
    }

    /// Supremum of `‖1_A u 1_B‖` over `dist(A, B) > r` by scanning all `A` with
    /// `B` the points farther than `r` from `A`.
    pub fn exhaustive_rectangle(&self, r: f64) -> Result<Option<RectangleWitness>> {
        let n = self.len();
        if n > EXACT_EPS_MAX {
            return Err(Error::TooLargeForExact { what: "|X|", size: n, limit: EXACT_EPS_MAX });
        }
        let scan = SubsetScan::new(self);
        let total: u32 = 1 << n;
        let (value, mask) = (1..total)
            .into_par_iter()
            .map(|mask| (scan.value(mask, r), mask))
            .reduce(|| (0.0, 0), |a, b| if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1 && b.0 > 0.0) { b } else { a });
        if value <= 0.0 {
            return Ok(None);
        }
        let (a, b) = scan.rectangle(mask, r);
        Ok(Some(self.rect_norm(&a, &b)?))
    }

    /// Heuristic search for the largest rectangle separated by more than `r`:
    /// `budget` random seeds (balls, half of them randomly thinned), then
    /// greedy growth sweeps from the best few seeds.
    pub fn search_rectangles(&self, r: f64, budget: usize, seed: u64) -> Result<Option<RectangleWitness>> {
        let n = self.len();
        if n == 0 {
            return Ok(None);
        }
        let radii = self.space.distinct_distances();
        let seeds: Vec<Vec<usize>> = {
            let mut g = rng::seeded(seed);
            (0..budget.max(1))
                .map(|i| {
                    let x = g.random_range(0..n);
                    let rho = radii[g.random_range(0..radii.len())] * g.random::<f64>();
                    let mut a = self.space.ball(x, rho);
                    if i % 2 == 1 {
                        a.retain(|&y| y == x || g.random_bool(0.5));
                    }
                    a
                })
                .collect()
        };
        let mut scored: Vec<(f64, Vec<usize>)> =
            seeds.into_par_iter().map(|a| Ok((self.worst_partner(&a, r)?.1, a))).collect::<Result<Vec<_>>>()?;
        scored.sort_by(|p, q| q.0.total_cmp(&p.0));
        let mut best: Option<(f64, Vec<usize>)> = None;
        for (_, a) in scored.into_iter().take(GROWTH_SEEDS) {
            let grown = self.grow(a, r)?;
            if best.as_ref().is_none_or(|b| grown.0 > b.0) {
                best = Some(grown);
            }
        }
        match best {
            Some((v, a)) if v > 0.0 => {
                let b = self.space.far_complement(&a, r);
                Ok(Some(self.rect_norm(&a, &b)?))
            }
            _ => Ok(None),
        }
    }

    /// The farther-than-`r` complement of `a` and `‖1_A u 1_B‖` for it.
    fn worst_partner(&self, a: &[usize], r: f64) -> Result<(Vec<usize>, f64)> {
        let b = self.space.far_complement(a, r);
        if a.is_empty() || b.is_empty() {
            return Ok((b, 0.0));
        }
        let v = linalg::opnorm(&linalg::submatrix(&self.entries, a, &b))?;
        Ok((b, v))
    }

    /// Alternates closing `A` to the far complement of its partner and adding
    /// the row with the largest overlap with the top right singular vector.
    fn grow(&self, mut a: Vec<usize>, r: f64) -> Result<(f64, Vec<usize>)> {
        let (mut b, mut value) = self.worst_partner(&a, r)?;
        for _ in 0..GROWTH_SWEEPS {
            let mut improved = false;
            let closed = self.space.far_complement(&b, r);
            if closed.len() > a.len() {
                let (b2, v2) = self.worst_partner(&closed, r)?;
                if v2 > value {
                    (a, b, value) = (closed, b2, v2);
                    improved = true;
                }
            }
            if b.is_empty() {
                break;
            }
            let top = linalg::top_singular(&linalg::submatrix(&self.entries, &a, &b))?;
            let mut candidates: Vec<(f64, usize)> = (0..self.len())
                .filter(|z| !a.contains(z))
                .map(|z| {
                    let s: C64 = b.iter().zip(top.right.iter()).map(|(&x, v)| self.entries[(z, x)] * v).sum();
                    (s.norm(), z)
                })
                .collect();
            candidates.sort_by(|p, q| q.0.total_cmp(&p.0).then(p.1.cmp(&q.1)));
            for &(_, z) in candidates.iter().take(GROWTH_CANDIDATES) {
                let mut a2 = a.clone();
                a2.push(z);
                a2.sort_unstable();
                let (b2, v2) = self.worst_partner(&a2, r)?;
                if v2 > value {
                    (a, b, value) = (a2, b2, v2);
                    improved = true;
                    break;
                }
            }
            if !improved {
                break;
            }
        }
        Ok((value, a))
    }

    pub fn add(&self, other: &SpaceOperator) -> Result<Self> {
        self.with_entries(&self.entries + &other.entries)
    }

    pub fn sub(&self, other: &SpaceOperator) -> Result<Self> {
        self.with_entries(&self.entries - &other.entries)
    }
}

/// Bitmask subset scan over a small operator.
struct SubsetScan<'a> {
    u: &'a SpaceOperator,
    n: usize,
    radii: Vec<f64>,
    sq: Vec<f64>,
}

impl<'a> SubsetScan<'a> {
    fn new(u: &'a SpaceOperator) -> Self {
        let n = u.len();
        let sq = (0..n * n).map(|i| u.entries[(i / n, i % n)].norm_sqr()).collect();
        Self { u, n, radii: u.space.distinct_distances(), sq }
    }

    fn far_mask(&self, a: u32, r: f64) -> u32 {
        let space = &self.u.space;
        (0..self.n).filter(|&x| (0..self.n).all(|y| a & (1 << y) == 0 || space.dist(x, y) > r)).fold(0, |m, x| m | (1 << x))
    }

    fn rectangle(&self, a: u32, r: f64) -> (Vec<usize>, Vec<usize>) {
        let b = self.far_mask(a, r);
        (bits(a, self.n), bits(b, self.n))
    }

    /// `‖1_A u 1_B‖` for `B` the points farther than `r` from `A`.
    fn value(&self, a: u32, r: f64) -> f64 {
        let b = self.far_mask(a, r);
        if b == 0 {
            return 0.0;
        }
        let rows = bits(a, self.n);
        let cols = bits(b, self.n);
        let mut frob = 0.0;
        let mut max_line = 0.0f64;
        let mut col_sums = vec![0.0; cols.len()];
        for &y in &rows {
            let mut row = 0.0;
            for (j, &x) in cols.iter().enumerate() {
                let s = self.sq[y * self.n + x];
                row += s;
                col_sums[j] += s;
            }
            frob += row;
            max_line = max_line.max(row);
        }
        if frob == 0.0 {
            return 0.0;
        }
        max_line = col_sums.into_iter().fold(max_line, f64::max);
        if rows.len() == 1 || cols.len() == 1 || (frob - max_line) <= 1e-15 * frob {
            return max_line.sqrt();
        }
        linalg::small_opnorm(&linalg::submatrix(&self.u.entries, &rows, &cols))
    }
}

fn bits(mask: u32, n: usize) -> Vec<usize> {
    (0..n).filter(|&i| mask & (1 << i) != 0).collect()
}

/// Independent standard complex Gaussian entries.
pub fn random_gaussian(space: Arc<FiniteMetricSpace>, seed: u64) -> SpaceOperator {
    let mut g = rng::seeded(seed);
    let n = space.len();
    let entries = CMatrix::from_fn(n, n, |_, _| {
        let re: f64 = StandardNormal.sample(&mut g);
        let im: f64 = StandardNormal.sample(&mut g);
        c64(re, im)
    });
    SpaceOperator { space, entries }
}

/// Gaussian entries on the pairs with `dist(x, y) <= r`, zero elsewhere.
pub fn random_band(space: Arc<FiniteMetricSpace>, r: f64, seed: u64) -> SpaceOperator {
    random_gaussian(space, seed).band_truncate(r)
}
