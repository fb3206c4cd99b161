//! Probability kernels with small variation at a given scale, and the
//! square-root isometry field built from them.

use std::sync::Arc;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::space::{interval, FiniteMetricSpace};

pub const ROW_SUM_TOL: f64 = 1e-12;

/// What to do when the support radius required by `δ` and `R` reaches the
/// size of the space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SaturationPolicy {
    /// Build the (truncated) kernel anyway, validate it and flag it.
    #[default]
    Saturate,
    /// Refuse: `IntervalTooShort` / `SpaceTooSmall`.
    Strict,
}

/// Kernel `x ↦ μ_x ∈ Prob(X)` with `supp μ_x ⊂ Ball(x, S)` and
/// `‖μ_x − μ_y‖₁ < δ` whenever `dist(x, y) <= R`.
#[derive(Debug, Clone)]
pub struct PropertyAKernel {
    space: Arc<FiniteMetricSpace>,
    /// Row `x` is `μ_x`.
    mu: DMatrix<f64>,
    support: f64,
    delta: f64,
    scale: f64,
    /// `2S >= diam + 1`: the support radius reaches across the space.
    saturated: bool,
}

/// `⌈2R/δ⌉`, guarded against round-off just above an integer.
pub fn support_radius(r: f64, delta: f64) -> f64 {
    (2.0 * r / delta - 1e-9).ceil().max(0.0)
}

impl PropertyAKernel {
    /// Validated kernel from explicit rows.
    pub fn from_rows(space: Arc<FiniteMetricSpace>, mu: DMatrix<f64>, support: f64, scale: f64, delta: f64) -> Result<Self> {
        let saturated = 2.0 * support >= space.diameter() + 1.0;
        let k = Self { space, mu, support, delta, scale, saturated };
        k.validate()?;
        Ok(k)
    }

    /// `μ_x` uniform on `Ball(x, S)` with `S = ⌈2R/δ⌉`; near the boundary of
    /// the space the ball is truncated and renormalized.
    pub fn uniform_ball(space: Arc<FiniteMetricSpace>, r: f64, delta: f64, policy: SaturationPolicy) -> Result<Self> {
        if !(delta > 0.0) || !(r >= 0.0) {
            return Err(Error::InvalidParameter(format!("kernel needs delta > 0 and R >= 0 (delta = {delta}, R = {r})")));
        }
        let s = support_radius(r, delta);
        let n = space.len();
        if policy == SaturationPolicy::Strict && 2.0 * s >= space.diameter() + 1.0 {
            return Err(Error::SpaceTooSmall(format!("support radius {s} needs more than {n} points")));
        }
        let mut mu = DMatrix::<f64>::zeros(n, n);
        for x in 0..n {
            let ball = space.ball(x, s);
            let w = 1.0 / ball.len() as f64;
            for z in ball {
                mu[(x, z)] = w;
            }
        }
        Self::from_rows(space, mu, s, r, delta)
    }

    /// Uniform-ball kernel on the interval `{0, .., N-1}`.
    pub fn interval(n: usize, r: f64, delta: f64, policy: SaturationPolicy) -> Result<Self> {
        let s = support_radius(r, delta);
        if policy == SaturationPolicy::Strict && (n as f64) <= 2.0 * s {
            return Err(Error::IntervalTooShort { n, s: s as usize });
        }
        Self::uniform_ball(Arc::new(interval(n)), r, delta, SaturationPolicy::Saturate)
    }

    /// Row sums, supports and the variation bound, all pairs.
    pub fn validate(&self) -> Result<()> {
        let n = self.space.len();
        if self.mu.shape() != (n, n) {
            return Err(Error::DimensionMismatch(format!("kernel is {:?} on {n} points", self.mu.shape())));
        }
        for x in 0..n {
            let row = self.mu.row(x);
            if row.iter().any(|&v| v < 0.0 || !v.is_finite()) {
                return Err(Error::InvalidKernel(format!("row {x} has a negative or non-finite entry")));
            }
            if (row.sum() - 1.0).abs() > ROW_SUM_TOL {
                return Err(Error::InvalidKernel(format!("row {x} sums to {}", row.sum())));
            }
            if let Some(z) = (0..n).find(|&z| row[z] != 0.0 && self.space.dist(x, z) > self.support) {
                return Err(Error::InvalidKernel(format!("mu_{x} charges {z} outside Ball({x}, {})", self.support)));
            }
        }
        let bad = (0..n).into_par_iter().find_map_first(|x| {
            (x + 1..n).find_map(|y| {
                if self.space.dist(x, y) > self.scale {
                    return None;
                }
                let v: f64 = (0..n).map(|z| (self.mu[(x, z)] - self.mu[(y, z)]).abs()).sum();
                (v >= self.delta).then_some((x, y, v))
            })
        });
        match bad {
            Some((x, y, v)) => Err(Error::InvalidKernel(format!("||mu_{x} - mu_{y}||_1 = {v} >= delta = {}", self.delta))),
            None => Ok(()),
        }
    }

    pub fn space(&self) -> &Arc<FiniteMetricSpace> {
        &self.space
    }

    pub fn mu(&self) -> &DMatrix<f64> {
        &self.mu
    }

    pub fn support(&self) -> f64 {
        self.support
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn saturated(&self) -> bool {
        self.saturated
    }

    /// Largest `‖μ_x − μ_y‖₁` over `dist(x, y) <= R`.
    pub fn max_variation(&self) -> f64 {
        let n = self.space.len();
        (0..n)
            .into_par_iter()
            .map(|x| {
                (x + 1..n)
                    .filter(|&y| self.space.dist(x, y) <= self.scale)
                    .map(|y| (0..n).map(|z| (self.mu[(x, z)] - self.mu[(y, z)]).abs()).sum::<f64>())
                    .fold(0.0, f64::max)
            })
            .reduce(|| 0.0, f64::max)
    }
}

/// `f_z(x) = ν_x(z)^{1/2}` for a kernel `ν` at scale `S`, with support radius `T`.
#[derive(Debug, Clone)]
pub struct IsometryField {
    nu: PropertyAKernel,
    /// `f[(x, z)] = f_z(x)`.
    f: DMatrix<f64>,
}

impl IsometryField {
    pub fn new(nu: PropertyAKernel) -> Result<Self> {
        let f = nu.mu.map(f64::sqrt);
        let field = Self { nu, f };
        field.validate()?;
        Ok(field)
    }

    /// `Σ_z f_z(x)² = 1`, `supp f_z ⊂ Ball(z, T)` and
    /// `Σ_z |f_z(x) − f_z(y)|² < δ` for `dist(x, y) <= S`.
    pub fn validate(&self) -> Result<()> {
        let space = &self.nu.space;
        let n = space.len();
        let t = self.nu.support;
        for x in 0..n {
            let s: f64 = self.f.row(x).iter().map(|v| v * v).sum();
            if (s - 1.0).abs() > ROW_SUM_TOL {
                return Err(Error::InvalidKernel(format!("sum_z f_z({x})^2 = {s}")));
            }
            if let Some(z) = (0..n).find(|&z| self.f[(x, z)] != 0.0 && space.dist(x, z) > t) {
                return Err(Error::InvalidKernel(format!("f_{z} is nonzero at {x}, outside Ball({z}, {t})")));
            }
        }
        let (worst, pair) = self.max_hellinger();
        if worst >= self.nu.delta {
            return Err(Error::InvalidKernel(format!("sum_z |f_z(x) - f_z(y)|^2 = {worst} >= delta at {pair:?}")));
        }
        Ok(())
    }

    /// Largest `Σ_z |f_z(x) − f_z(y)|²` over `dist(x, y) <= S` and a pair attaining it.
    pub fn max_hellinger(&self) -> (f64, (usize, usize)) {
        let space = &self.nu.space;
        let n = space.len();
        let s = self.nu.scale;
        (0..n)
            .into_par_iter()
            .map(|x| {
                let mut best = (0.0, (x, x));
                for y in x + 1..n {
                    if space.dist(x, y) <= s {
                        let v: f64 = (0..n).map(|z| (self.f[(x, z)] - self.f[(y, z)]).powi(2)).sum();
                        if v > best.0 {
                            best = (v, (x, y));
                        }
                    }
                }
                best
            })
            .reduce(|| (0.0, (0, 0)), |a, b| if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) { b } else { a })
    }

    pub fn kernel(&self) -> &PropertyAKernel {
        &self.nu
    }

    pub fn f(&self) -> &DMatrix<f64> {
        &self.f
    }

    pub fn space(&self) -> &Arc<FiniteMetricSpace> {
        &self.nu.space
    }

    /// Support radius `T` of the field.
    pub fn t(&self) -> f64 {
        self.nu.support
    }

    pub fn delta(&self) -> f64 {
        self.nu.delta
    }

    /// `k(x, y) = Σ_z f_z(x) f_z(y)`.
    pub fn gram(&self) -> DMatrix<f64> {
        &self.f * self.f.transpose()
    }
}
