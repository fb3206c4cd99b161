//! Finite metric spaces, growth functions, coarse disjoint unions and
//! expander families.

use std::collections::VecDeque;
use std::ops::Range;

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

/// Tolerance for symmetry and triangle checks on real-valued metrics.
pub const METRIC_TOL: f64 = 1e-9;
/// Largest space on which the exact expansion constant is computed.
pub const EXACT_KAPPA_MAX: usize = 22;
const REGULAR_MAX_ATTEMPTS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MetricKind {
    /// Integer valued, validated exactly.
    Integer,
    /// Real valued, validated to [`METRIC_TOL`].
    Real,
}

/// A finite metric space on the points `0..len()`.
#[derive(Debug, Clone)]
pub struct FiniteMetricSpace {
    label: String,
    n: usize,
    dist: Vec<f64>,
    kind: MetricKind,
    adjacency: Option<Vec<Vec<usize>>>,
    pieces: Vec<Range<usize>>,
}

impl FiniteMetricSpace {
    fn raw(label: String, n: usize, dist: Vec<f64>, kind: MetricKind) -> Self {
        Self { label, n, dist, kind, adjacency: None, pieces: std::iter::once(0..n).collect() }
    }

    /// Shortest-path metric of a connected graph given as a symmetric 0/1 array.
    pub fn from_graph(label: impl Into<String>, adjacency: &[Vec<u8>]) -> Result<Self> {
        let n = adjacency.len();
        for (x, row) in adjacency.iter().enumerate() {
            if row.len() != n {
                return Err(Error::DimensionMismatch(format!("adjacency row {x} has length {}, expected {n}", row.len())));
            }
            if row[x] != 0 {
                return Err(Error::InvalidMetric(format!("nonzero diagonal at {x}")));
            }
            for (y, &a) in row.iter().enumerate() {
                if a > 1 {
                    return Err(Error::InvalidMetric(format!("entry ({x}, {y}) is not 0/1")));
                }
                if adjacency[y][x] != a {
                    return Err(Error::NonSymmetricInput(x, y));
                }
            }
        }
        let lists = adjacency.iter().map(|row| row.iter().enumerate().filter(|(_, &a)| a == 1).map(|(y, _)| y).collect()).collect();
        Self::from_adjacency_lists(label, lists)
    }

    /// Shortest-path metric of a connected graph given by neighbor lists.
    pub fn from_adjacency_lists(label: impl Into<String>, mut lists: Vec<Vec<usize>>) -> Result<Self> {
        let n = lists.len();
        for (x, nbrs) in lists.iter_mut().enumerate() {
            nbrs.sort_unstable();
            nbrs.dedup();
            if let Some(&y) = nbrs.iter().find(|&&y| y >= n) {
                return Err(Error::DimensionMismatch(format!("neighbor {y} of {x} out of range")));
            }
            if nbrs.contains(&x) {
                return Err(Error::InvalidMetric(format!("loop at {x}")));
            }
        }
        for x in 0..n {
            for &y in &lists[x] {
                if lists[y].binary_search(&x).is_err() {
                    return Err(Error::NonSymmetricInput(x, y));
                }
            }
        }
        let mut dist = vec![f64::INFINITY; n * n];
        let mut queue = VecDeque::new();
        for s in 0..n {
            dist[s * n + s] = 0.0;
            queue.push_back(s);
            while let Some(v) = queue.pop_front() {
                let dv = dist[s * n + v];
                for &w in &lists[v] {
                    if dist[s * n + w].is_infinite() {
                        dist[s * n + w] = dv + 1.0;
                        queue.push_back(w);
                    }
                }
            }
            if let Some(t) = (0..n).find(|&t| dist[s * n + t].is_infinite()) {
                return Err(Error::DisconnectedGraph(s, t));
            }
        }
        let mut space = Self::raw(label.into(), n, dist, MetricKind::Integer);
        space.adjacency = Some(lists);
        Ok(space)
    }

    /// Explicit metric given as a full distance array. Integer-valued input is
    /// validated exactly, anything else to [`METRIC_TOL`].
    pub fn from_distances(label: impl Into<String>, rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut dist = Vec::with_capacity(n * n);
        for (x, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::DimensionMismatch(format!("distance row {x} has length {}, expected {n}", row.len())));
            }
            dist.extend_from_slice(row);
        }
        let kind = if dist.iter().all(|d| d.is_finite() && d.fract() == 0.0) { MetricKind::Integer } else { MetricKind::Real };
        let space = Self::raw(label.into(), n, dist, kind);
        space.validate()?;
        Ok(space)
    }

    /// Checks the metric axioms over all pairs and triples.
    pub fn validate(&self) -> Result<()> {
        let n = self.n;
        let tol = match self.kind {
            MetricKind::Integer => 0.0,
            MetricKind::Real => METRIC_TOL,
        };
        for x in 0..n {
            if self.dist(x, x) != 0.0 {
                return Err(Error::InvalidMetric(format!("dist({x}, {x}) = {} != 0", self.dist(x, x))));
            }
            for y in 0..n {
                let d = self.dist(x, y);
                if !d.is_finite() || d < 0.0 || (x != y && d <= 0.0) {
                    return Err(Error::InvalidMetric(format!("dist({x}, {y}) = {d}")));
                }
                if (d - self.dist(y, x)).abs() > tol {
                    return Err(Error::NonSymmetricInput(x, y));
                }
            }
        }
        let bad = (0..n).into_par_iter().find_map_first(|x| {
            for y in 0..n {
                let dxy = self.dist(x, y);
                for z in 0..n {
                    if self.dist(x, z) > dxy + self.dist(y, z) + tol {
                        return Some((x, y, z));
                    }
                }
            }
            None
        });
        match bad {
            Some((x, y, z)) => Err(Error::InvalidMetric(format!("triangle inequality fails for ({x}, {y}, {z})"))),
            None => Ok(()),
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn kind(&self) -> MetricKind {
        self.kind
    }

    #[inline]
    pub fn dist(&self, x: usize, y: usize) -> f64 {
        self.dist[x * self.n + y]
    }

    /// Neighbor lists when the space was built from a graph.
    pub fn adjacency(&self) -> Option<&[Vec<usize>]> {
        self.adjacency.as_deref()
    }

    /// Point ranges of the pieces of a coarse union; a single range otherwise.
    pub fn pieces(&self) -> &[Range<usize>] {
        &self.pieces
    }

    pub fn diameter(&self) -> f64 {
        self.dist.iter().copied().fold(0.0, f64::max)
    }

    /// Sorted distinct distance values, starting with 0.
    pub fn distinct_distances(&self) -> Vec<f64> {
        let mut v = self.dist.clone();
        v.push(0.0);
        v.sort_by(f64::total_cmp);
        v.dedup();
        v
    }

    pub fn ball(&self, x: usize, r: f64) -> Vec<usize> {
        (0..self.n).filter(|&y| self.dist(x, y) <= r).collect()
    }

    /// `N_X(R)`: the largest ball cardinality at radius `r`.
    pub fn growth(&self, r: f64) -> usize {
        (0..self.n).map(|x| (0..self.n).filter(|&y| self.dist(x, y) <= r).count()).max().unwrap_or(0)
    }

    /// Membership mask of `{x : dist(x, A) <= r}`.
    pub fn neighborhood(&self, a: &[usize], r: f64) -> Vec<bool> {
        (0..self.n).map(|x| a.iter().any(|&y| self.dist(x, y) <= r)).collect()
    }

    /// Points at distance greater than `r` from every point of `a`.
    pub fn far_complement(&self, a: &[usize], r: f64) -> Vec<usize> {
        (0..self.n).filter(|&x| a.iter().all(|&y| self.dist(x, y) > r)).collect()
    }

    /// `dist(A, B)`; infinite when either set is empty.
    pub fn set_distance(&self, a: &[usize], b: &[usize]) -> f64 {
        let mut best = f64::INFINITY;
        for &x in a {
            for &y in b {
                best = best.min(self.dist(x, y));
            }
        }
        best
    }

    /// Restriction of the metric to the points of `range`.
    pub fn restrict(&self, range: Range<usize>, label: impl Into<String>) -> Self {
        let m = range.len();
        let mut dist = Vec::with_capacity(m * m);
        for x in range.clone() {
            for y in range.clone() {
                dist.push(self.dist(x, y));
            }
        }
        Self::raw(label.into(), m, dist, self.kind)
    }

    pub fn to_json(&self) -> SpaceJson {
        let metric = match &self.adjacency {
            Some(lists) => MetricJson::Graph(lists.clone()),
            None => MetricJson::Explicit((0..self.n).map(|x| self.dist[x * self.n..(x + 1) * self.n].to_vec()).collect()),
        };
        SpaceJson { label: self.label.clone(), n: self.n, metric }
    }

    pub fn from_json(json: &SpaceJson) -> Result<Self> {
        let space = match &json.metric {
            MetricJson::Graph(lists) => Self::from_adjacency_lists(json.label.clone(), lists.clone())?,
            MetricJson::Explicit(rows) => Self::from_distances(json.label.clone(), rows)?,
        };
        if space.len() != json.n {
            return Err(Error::DimensionMismatch(format!("declared n = {} but metric has {} points", json.n, space.len())));
        }
        Ok(space)
    }
}

/// JSON form: `{label, n, metric: {kind: "graph"|"explicit", data}}`. Graph
/// data are neighbor lists, explicit data are distance rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpaceJson {
    pub label: String,
    pub n: usize,
    pub metric: MetricJson,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "data", rename_all = "lowercase")]
pub enum MetricJson {
    Graph(Vec<Vec<usize>>),
    Explicit(Vec<Vec<f64>>),
}

// ---------------------------------------------------------------------------
// Generators
// ---------------------------------------------------------------------------

pub fn path(n: usize) -> FiniteMetricSpace {
    let dist = (0..n * n).map(|i| (i / n).abs_diff(i % n) as f64).collect();
    let mut s = FiniteMetricSpace::raw(format!("path:{n}"), n, dist, MetricKind::Integer);
    s.adjacency = Some((0..n).map(|x| (x.saturating_sub(1)..(x + 2).min(n)).filter(|&y| y != x).collect()).collect());
    s
}

/// The path `{0, .., n-1}` with `dist(x, y) = |x - y|`, labelled as an interval.
pub fn interval(n: usize) -> FiniteMetricSpace {
    let mut s = path(n);
    s.label = format!("interval:{n}");
    s
}

pub fn cycle(n: usize) -> FiniteMetricSpace {
    let dist = (0..n * n)
        .map(|i| {
            let d = (i / n).abs_diff(i % n);
            d.min(n - d) as f64
        })
        .collect();
    let mut s = FiniteMetricSpace::raw(format!("cycle:{n}"), n, dist, MetricKind::Integer);
    if n >= 3 {
        s.adjacency = Some(
            (0..n)
                .map(|x| {
                    let mut v = vec![(x + n - 1) % n, (x + 1) % n];
                    v.sort_unstable();
                    v
                })
                .collect(),
        );
    }
    s
}

pub fn complete(n: usize) -> FiniteMetricSpace {
    let dist = (0..n * n).map(|i| if i / n == i % n { 0.0 } else { 1.0 }).collect();
    let mut s = FiniteMetricSpace::raw(format!("complete:{n}"), n, dist, MetricKind::Integer);
    s.adjacency = Some((0..n).map(|x| (0..n).filter(|&y| y != x).collect()).collect());
    s
}

/// `n` points at pairwise distance `d`.
pub fn far(n: usize, d: f64) -> Result<FiniteMetricSpace> {
    if d <= 0.0 || !d.is_finite() {
        return Err(Error::InvalidParameter(format!("far-point distance must be positive, got {d}")));
    }
    let dist = (0..n * n).map(|i| if i / n == i % n { 0.0 } else { d }).collect();
    let kind = if d.fract() == 0.0 { MetricKind::Integer } else { MetricKind::Real };
    Ok(FiniteMetricSpace::raw(format!("far:{n}:{d}"), n, dist, kind))
}

/// Connected simple `d`-regular graph from the pairing (configuration) model:
/// a uniformly shuffled stub list is paired consecutively and the attempt is
/// rejected on loops, multi-edges or disconnection.
pub fn random_regular(n: usize, d: usize, seed: u64) -> Result<FiniteMetricSpace> {
    if d >= n || !(n * d).is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!("random regular graph needs d < n and n*d even (n = {n}, d = {d})")));
    }
    let mut r = rng::seeded(seed);
    let mut stubs: Vec<usize> = (0..n).flat_map(|x| std::iter::repeat_n(x, d)).collect();
    'attempt: for _ in 0..REGULAR_MAX_ATTEMPTS {
        stubs.shuffle(&mut r);
        let mut lists = vec![Vec::with_capacity(d); n];
        for pair in stubs.chunks_exact(2) {
            let (x, y) = (pair[0], pair[1]);
            if x == y || lists[x].contains(&y) {
                continue 'attempt;
            }
            lists[x].push(y);
            lists[y].push(x);
        }
        match FiniteMetricSpace::from_adjacency_lists(format!("regular:{n}:{d}:{seed}"), lists) {
            Ok(space) => return Ok(space),
            Err(Error::DisconnectedGraph(..)) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::GenerationFailed(REGULAR_MAX_ATTEMPTS))
}

/// Connected random graph: a random recursive tree (each vertex attached to a
/// uniformly chosen earlier vertex) plus every other edge independently with
/// probability `p`.
pub fn random_graph(n: usize, p: f64, seed: u64) -> Result<FiniteMetricSpace> {
    if n == 0 || !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!("random graph needs n >= 1 and p in [0, 1] (n = {n}, p = {p})")));
    }
    let mut r = rng::seeded(seed);
    let mut lists = vec![Vec::new(); n];
    for v in 1..n {
        let w = r.random_range(0..v);
        lists[v].push(w);
        lists[w].push(v);
    }
    for x in 0..n {
        for y in x + 1..n {
            if r.random_bool(p) && !lists[x].contains(&y) {
                lists[x].push(y);
                lists[y].push(x);
            }
        }
    }
    FiniteMetricSpace::from_adjacency_lists(format!("random:{n}:{p}:{seed}"), lists)
}

// ---------------------------------------------------------------------------
// Coarse unions
// ---------------------------------------------------------------------------

/// Distance between pieces of a coarse disjoint union.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GapRule {
    /// Pieces `i < j` (0-based) sit at distance `max(max_{l <= j} diam_l, 2^j)`.
    Default,
    /// Every pair of distinct pieces sits at this distance; must be at least
    /// half of every piece diameter.
    Constant(f64),
}

/// Cross-piece distances for the pieces `diams` under `rule`.
pub fn union_gaps(diams: &[f64], rule: GapRule) -> Result<Vec<f64>> {
    let max_diam = diams.iter().copied().fold(0.0, f64::max);
    match rule {
        GapRule::Constant(g) => {
            if !(g > 0.0 && 2.0 * g >= max_diam) {
                return Err(Error::InvalidParameter(format!(
                    "gap {g} must be positive and at least half of the largest diameter {max_diam}"
                )));
            }
            Ok(vec![g; diams.len()])
        }
        GapRule::Default => {
            let mut running = 0.0f64;
            Ok(diams
                .iter()
                .enumerate()
                .map(|(j, &d)| {
                    running = running.max(d);
                    running.max(2f64.powi(j as i32))
                })
                .collect())
        }
    }
}

/// Disjoint union whose restriction to each member is that member's metric and
/// whose cross distances are constant per pair of pieces, `gap(i, j) = g[max(i, j)]`.
pub fn coarse_union(members: &[FiniteMetricSpace], rule: GapRule) -> Result<FiniteMetricSpace> {
    if members.is_empty() {
        return Err(Error::InvalidParameter("coarse union needs at least one member".into()));
    }
    if members.len() == 1 {
        return Ok(members[0].clone());
    }
    let diams: Vec<f64> = members.iter().map(FiniteMetricSpace::diameter).collect();
    let gaps = union_gaps(&diams, rule)?;
    let mut offsets = Vec::with_capacity(members.len());
    let mut total = 0;
    for m in members {
        offsets.push(total..total + m.len());
        total += m.len();
    }
    let mut dist = vec![0.0; total * total];
    for (i, ri) in offsets.iter().enumerate() {
        for (j, rj) in offsets.iter().enumerate() {
            for x in ri.clone() {
                for y in rj.clone() {
                    dist[x * total + y] = if i == j { members[i].dist(x - ri.start, y - ri.start) } else { gaps[i.max(j)] };
                }
            }
        }
    }
    let integral = members.iter().all(|m| m.kind == MetricKind::Integer) && gaps.iter().all(|g| g.fract() == 0.0);
    let label = format!("union({})", members.iter().map(|m| m.label.as_str()).collect::<Vec<_>>().join(","));
    let mut space = FiniteMetricSpace::raw(label, total, dist, if integral { MetricKind::Integer } else { MetricKind::Real });
    space.pieces = offsets;
    Ok(space)
}

// ---------------------------------------------------------------------------
// Expansion
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KappaMode {
    Exact,
    Spectral,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KappaKind {
    ExactBruteForce,
    SpectralLowerBound,
    Declared,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Kappa {
    pub value: f64,
    pub kind: KappaKind,
    /// Minimizing subset (exact mode only).
    pub witness: Option<Vec<usize>>,
}

/// Expansion constant `min |N_R(A)| / |A|` over `0 < |A| <= |X|/2`, exactly or
/// as a Cheeger lower bound `1 + a(G_R) / (2 Δ(G_R))` where `G_R` joins points
/// at distance in `(0, R]`, `a` is its Laplacian spectral gap and `Δ` its
/// maximum degree.
pub fn expansion_kappa(space: &FiniteMetricSpace, r: f64, mode: KappaMode) -> Result<Kappa> {
    match mode {
        KappaMode::Exact => exact_kappa(space, r),
        KappaMode::Spectral => Ok(spectral_kappa(space, r)),
    }
}

fn exact_kappa(space: &FiniteMetricSpace, r: f64) -> Result<Kappa> {
    let n = space.len();
    if n > EXACT_KAPPA_MAX {
        return Err(Error::TooLargeForExact { what: "|X|", size: n, limit: EXACT_KAPPA_MAX });
    }
    if n < 2 {
        return Err(Error::InvalidParameter("expansion needs at least two points".into()));
    }
    let balls: Vec<u32> = (0..n).map(|x| (0..n).filter(|&y| space.dist(x, y) <= r).fold(0u32, |m, y| m | (1 << y))).collect();
    let total: u32 = 1 << n;
    const CHUNK: u32 = 1 << 14;
    let chunks: Vec<u32> = (0..total.div_ceil(CHUNK)).collect();
    let best = chunks
        .par_iter()
        .map(|&c| {
            let mut best = (f64::INFINITY, 0u32);
            for mask in (c * CHUNK).max(1)..((c + 1) * CHUNK).min(total) {
                let size = mask.count_ones() as usize;
                if 2 * size > n {
                    continue;
                }
                let mut nb = 0u32;
                let mut bits = mask;
                while bits != 0 {
                    let x = bits.trailing_zeros() as usize;
                    nb |= balls[x];
                    bits &= bits - 1;
                }
                let ratio = nb.count_ones() as f64 / size as f64;
                if ratio < best.0 {
                    best = (ratio, mask);
                }
            }
            best
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold((f64::INFINITY, 0u32), |acc, b| if b.0 < acc.0 { b } else { acc });
    let witness = (0..n).filter(|&x| best.1 & (1 << x) != 0).collect();
    Ok(Kappa { value: best.0, kind: KappaKind::ExactBruteForce, witness: Some(witness) })
}

/// Second-smallest Laplacian eigenvalue and maximum degree of the graph joining
/// points at distance in `(0, r]`.
pub fn fiedler_and_degree(space: &FiniteMetricSpace, r: f64) -> (f64, usize) {
    let n = space.len();
    let mut lap = DMatrix::<f64>::zeros(n, n);
    let mut max_deg = 0;
    for x in 0..n {
        let mut deg = 0;
        for y in 0..n {
            if x != y && space.dist(x, y) <= r {
                lap[(x, y)] = -1.0;
                deg += 1;
            }
        }
        lap[(x, x)] = deg as f64;
        max_deg = max_deg.max(deg);
    }
    if n < 2 {
        return (0.0, max_deg);
    }
    let mut ev: Vec<f64> = lap.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    (ev[1].max(0.0), max_deg)
}

fn spectral_kappa(space: &FiniteMetricSpace, r: f64) -> Kappa {
    let (gap, max_deg) = fiedler_and_degree(space, r);
    let value = if max_deg == 0 { 1.0 } else { 1.0 + gap / (2.0 * max_deg as f64) };
    Kappa { value, kind: KappaKind::SpectralLowerBound, witness: None }
}

/// Outcome of the separation inequality `min(|A|,|B|)/|X| <= κ^(-dist(A,B)/(2 R0))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeparationCheck {
    pub distance: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

pub fn separation_bound(space: &FiniteMetricSpace, a: &[usize], b: &[usize], kappa: f64, r0: f64) -> Result<SeparationCheck> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySubset);
    }
    if kappa <= 1.0 || r0 <= 0.0 {
        return Err(Error::InvalidParameter(format!("separation bound needs kappa > 1 and R0 > 0 (got {kappa}, {r0})")));
    }
    let n = space.len() as f64;
    let distance = space.set_distance(a, b);
    let lhs = (a.len().min(b.len()) as f64) / n;
    let rhs = kappa.powf(-distance / (2.0 * r0));
    Ok(SeparationCheck { distance, lhs, rhs, holds: lhs <= rhs + 1e-12 })
}

// ---------------------------------------------------------------------------
// Expander families
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct ExpanderFamily {
    members: Vec<FiniteMetricSpace>,
    r0: f64,
    kappa: f64,
    kappa_kind: KappaKind,
    member_kappas: Vec<Kappa>,
}

impl ExpanderFamily {
    /// Certifies κ member by member: exact when the member has at most
    /// [`EXACT_KAPPA_MAX`] points, spectral otherwise. The family value is the
    /// minimum and is exact only if every member was.
    pub fn certify(members: Vec<FiniteMetricSpace>, r0: f64) -> Result<Self> {
        check_sizes(&members)?;
        let member_kappas = members
            .iter()
            .map(|m| {
                let mode = if m.len() <= EXACT_KAPPA_MAX { KappaMode::Exact } else { KappaMode::Spectral };
                expansion_kappa(m, r0, mode)
            })
            .collect::<Result<Vec<_>>>()?;
        let kappa = member_kappas.iter().map(|k| k.value).fold(f64::INFINITY, f64::min);
        let kappa_kind = if member_kappas.iter().all(|k| k.kind == KappaKind::ExactBruteForce) {
            KappaKind::ExactBruteForce
        } else {
            KappaKind::SpectralLowerBound
        };
        if kappa <= 1.0 {
            return Err(Error::NotAnExpander(format!("certified kappa {kappa} <= 1")));
        }
        Ok(Self { members, r0, kappa, kappa_kind, member_kappas })
    }

    pub fn declared(members: Vec<FiniteMetricSpace>, r0: f64, kappa: f64) -> Result<Self> {
        check_sizes(&members)?;
        let member_kappas = members.iter().map(|_| Kappa { value: kappa, kind: KappaKind::Declared, witness: None }).collect();
        Ok(Self { members, r0, kappa, kappa_kind: KappaKind::Declared, member_kappas })
    }

    /// Random `degree`-regular members of the given sizes; member `i` uses seed `mix(seed, i)`.
    pub fn random_regular(sizes: &[usize], degree: usize, r0: f64, seed: u64) -> Result<Self> {
        let members =
            sizes.iter().enumerate().map(|(i, &n)| random_regular(n, degree, rng::mix(seed, i as u64))).collect::<Result<Vec<_>>>()?;
        Self::certify(members, r0)
    }

    pub fn members(&self) -> &[FiniteMetricSpace] {
        &self.members
    }

    pub fn r0(&self) -> f64 {
        self.r0
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn kappa_kind(&self) -> KappaKind {
        self.kappa_kind
    }

    pub fn member_kappas(&self) -> &[Kappa] {
        &self.member_kappas
    }
}

fn check_sizes(members: &[FiniteMetricSpace]) -> Result<()> {
    if members.is_empty() {
        return Err(Error::InvalidParameter("expander family needs at least one member".into()));
    }
    if members.windows(2).any(|w| w[0].len() >= w[1].len()) {
        return Err(Error::InvalidParameter("expander member sizes must strictly increase".into()));
    }
    Ok(())
}
