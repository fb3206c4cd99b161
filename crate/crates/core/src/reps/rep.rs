//! Unitary representations of finite groups and the averaged norm
//! `‖|Γ|⁻¹ Σ_g α_g π(g)‖`.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DMatrix;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::group::FiniteGroup;
use crate::error::{Error, Result};
use crate::linalg::{self, c64, CMatrix, C64};
use crate::rng;

/// Largest dimension for which the dense `n² × n²` invariant projection is formed.
pub const DENSE_CERTIFICATE_MAX_DIM: usize = 8;
pub const ALPHA_TOL: f64 = 1e-12;
pub const CERTIFICATE_TOL: f64 = 1e-8;
const HOMOMORPHISM_SAMPLES: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Structure {
    Generic,
    /// Every `π(g)` has exactly one nonzero entry per row.
    Monomial,
}

/// Row `t` of a monomial matrix has its nonzero entry `phases[t]` in column `cols[t]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Monomial {
    pub cols: Vec<usize>,
    pub phases: Vec<C64>,
}

impl Monomial {
    pub fn to_dense(&self) -> CMatrix {
        let n = self.cols.len();
        let mut m = CMatrix::zeros(n, n);
        for t in 0..n {
            m[(t, self.cols[t])] = self.phases[t];
        }
        m
    }
}

#[derive(Debug, Clone)]
enum Images {
    /// `π(a, b, c)ξ(t) = ω^{c + b t} ξ(t + a)`, computed on demand.
    Heisenberg {
        p: usize,
        roots: Vec<C64>,
    },
    /// Permutation matrices `δ_i ↦ δ_{g(i)}`, computed on demand.
    Permutation,
    Dense(Vec<CMatrix>),
}

#[derive(Debug, Clone)]
pub struct UnitaryRep {
    label: String,
    group: Arc<FiniteGroup>,
    dim: usize,
    images: Images,
}

impl UnitaryRep {
    /// The `p`-dimensional Schrödinger representation of the Heisenberg group mod `p`.
    pub fn heisenberg(p: u32) -> Result<Self> {
        let group = Arc::new(FiniteGroup::heisenberg(p)?);
        let p = p as usize;
        let roots = (0..p).map(|k| C64::from_polar(1.0, 2.0 * PI * k as f64 / p as f64)).collect();
        Ok(Self { label: format!("heis:{p}"), group, dim: p, images: Images::Heisenberg { p, roots } })
    }

    /// The `(m-1)`-dimensional standard representation of `S_m` on the mean-zero
    /// subspace of `ℓ₂[m]`, written in the Helmert orthonormal basis.
    pub fn symmetric_standard(m: usize) -> Result<Self> {
        let group = Arc::new(FiniteGroup::symmetric(m)?);
        let h = helmert_basis(m);
        let images = (0..group.order())
            .map(|g| {
                let perm = group.permutation(g).unwrap();
                let pm = DMatrix::<f64>::from_fn(m, m, |i, j| if perm[j] as usize == i { 1.0 } else { 0.0 });
                (h.transpose() * pm * &h).map(|x| c64(x, 0.0))
            })
            .collect();
        Ok(Self { label: format!("sym:{m}"), group, dim: m - 1, images: Images::Dense(images) })
    }

    /// The full permutation representation of `S_m` on `ℓ₂[m]`. It contains
    /// the trivial representation, so it is reducible for every `m >= 2`.
    pub fn permutation(m: usize) -> Result<Self> {
        let group = Arc::new(FiniteGroup::symmetric(m)?);
        Ok(Self { label: format!("perm:{m}"), group, dim: m, images: Images::Permutation })
    }

    /// Representation from explicit images, indexed like the group elements.
    pub fn from_images(label: impl Into<String>, group: Arc<FiniteGroup>, images: Vec<CMatrix>) -> Result<Self> {
        if images.len() != group.order() {
            return Err(Error::DimensionMismatch(format!("{} images for a group of order {}", images.len(), group.order())));
        }
        let dim = images.first().map_or(0, |m| m.nrows());
        if images.iter().any(|m| m.shape() != (dim, dim)) {
            return Err(Error::DimensionMismatch("images must be square of a common size".into()));
        }
        Ok(Self { label: label.into(), group, dim, images: Images::Dense(images) })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn group(&self) -> &Arc<FiniteGroup> {
        &self.group
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> usize {
        self.group.order()
    }

    pub fn structure(&self) -> Structure {
        match self.images {
            Images::Heisenberg { .. } | Images::Permutation => Structure::Monomial,
            Images::Dense(_) => Structure::Generic,
        }
    }

    /// Monomial form of `π(g)` when the structure is monomial.
    pub fn monomial(&self, g: usize) -> Option<Monomial> {
        match &self.images {
            Images::Heisenberg { p, roots } => {
                let p = *p;
                let (a, b, c) = self.group.heisenberg_coords(g).unwrap();
                Some(Monomial { cols: (0..p).map(|t| (t + a) % p).collect(), phases: (0..p).map(|t| roots[(c + b * t) % p]).collect() })
            }
            Images::Permutation => {
                let perm = self.group.permutation(g).unwrap();
                let mut cols = vec![0; self.dim];
                for (j, &i) in perm.iter().enumerate() {
                    cols[i as usize] = j;
                }
                Some(Monomial { cols, phases: vec![c64(1.0, 0.0); self.dim] })
            }
            Images::Dense(_) => None,
        }
    }

    /// Dense `π(g)`.
    pub fn image(&self, g: usize) -> CMatrix {
        match &self.images {
            Images::Dense(m) => m[g].clone(),
            _ => self.monomial(g).unwrap().to_dense(),
        }
    }

    /// Entry `π(g)[row][col]`.
    pub fn entry(&self, g: usize, row: usize, col: usize) -> C64 {
        match &self.images {
            Images::Dense(m) => m[g][(row, col)],
            _ => {
                let mono = self.monomial(g).unwrap();
                if mono.cols[row] == col {
                    mono.phases[row]
                } else {
                    C64::default()
                }
            }
        }
    }

    pub fn character(&self, g: usize) -> C64 {
        match &self.images {
            Images::Dense(m) => m[g].trace(),
            _ => {
                let mono = self.monomial(g).unwrap();
                (0..self.dim).filter(|&t| mono.cols[t] == t).map(|t| mono.phases[t]).sum()
            }
        }
    }

    /// Largest deviation of `π(g)π(h)` from `π(gh)` and of `π(g)*π(g)` from
    /// the identity over sampled pairs.
    pub fn homomorphism_error(&self, seed: u64) -> f64 {
        let mut r = rng::seeded(seed);
        let order = self.order();
        let id = CMatrix::identity(self.dim, self.dim);
        let mut worst = 0.0f64;
        let mut pairs: Vec<(usize, usize)> = vec![(self.group.identity(), self.group.identity())];
        pairs.extend((0..HOMOMORPHISM_SAMPLES).map(|_| (r.random_range(0..order), r.random_range(0..order))));
        for (g, h) in pairs {
            let pg = self.image(g);
            let prod = &pg * self.image(h);
            worst = worst.max(linalg::max_abs(&(prod - self.image(self.group.mul(g, h)))));
            worst = worst.max(linalg::max_abs(&(pg.adjoint() * &pg - &id)));
        }
        worst
    }

    /// `|Γ|⁻¹ Σ_g α_g π(g)`, skipping zero coefficients.
    pub fn averaged_matrix(&self, alpha: &[C64]) -> Result<CMatrix> {
        self.check_alpha(alpha)?;
        let n = self.dim;
        let mut acc = CMatrix::zeros(n, n);
        for (g, &a) in alpha.iter().enumerate() {
            if a == C64::default() {
                continue;
            }
            match self.monomial(g) {
                Some(mono) => {
                    for t in 0..n {
                        acc[(t, mono.cols[t])] += a * mono.phases[t];
                    }
                }
                None => acc += self.image(g) * a,
            }
        }
        Ok(acc / c64(self.order() as f64, 0.0))
    }

    /// Dense accumulation of `|Γ|⁻¹ Σ_g α_g π(g)`, ignoring the monomial structure.
    pub fn averaged_matrix_dense(&self, alpha: &[C64]) -> Result<CMatrix> {
        self.check_alpha(alpha)?;
        let n = self.dim;
        let mut acc = CMatrix::zeros(n, n);
        for (g, &a) in alpha.iter().enumerate() {
            acc += self.image(g) * a;
        }
        Ok(acc / c64(self.order() as f64, 0.0))
    }

    /// `‖|Γ|⁻¹ Σ_g α_g π(g)‖` for `|α_g| <= 1`; at most `1/√n` when `π` is irreducible.
    pub fn averaged_norm(&self, alpha: &[C64]) -> Result<f64> {
        linalg::opnorm(&self.averaged_matrix(alpha)?)
    }

    fn check_alpha(&self, alpha: &[C64]) -> Result<()> {
        if alpha.len() != self.order() {
            return Err(Error::DimensionMismatch(format!("{} coefficients for a group of order {}", alpha.len(), self.order())));
        }
        if let Some((index, a)) = alpha.iter().enumerate().find(|(_, a)| a.norm() > 1.0 + ALPHA_TOL) {
            return Err(Error::AlphaOutOfBall { index, modulus: a.norm() });
        }
        Ok(())
    }

    /// Invariant-projection certificate for `P = |Γ|⁻¹ Σ_g π(g) ⊗ conj(π(g))`.
    ///
    /// `trace P = |Γ|⁻¹ Σ |χ(g)|²` equals 1 exactly for irreducible `π`. For
    /// `n <= 8` the dense `P` is also formed to check `P² = P` and `‖P‖ = 1`.
    pub fn certificate(&self) -> Result<IrreducibilityCertificate> {
        let order = self.order() as f64;
        let trace = (0..self.order()).map(|g| self.character(g).norm_sqr()).sum::<f64>() / order;
        let (idempotence_error, norm) = if self.dim <= DENSE_CERTIFICATE_MAX_DIM {
            let n2 = self.dim * self.dim;
            let mut p = CMatrix::zeros(n2, n2);
            for g in 0..self.order() {
                let m = self.image(g);
                p += m.kronecker(&m.map(|z| z.conj()));
            }
            p /= c64(order, 0.0);
            let err = linalg::max_abs(&(&p * &p - &p));
            (Some(err), Some(linalg::opnorm(&p)?))
        } else {
            (None, None)
        };
        let passes = (trace - 1.0).abs() <= CERTIFICATE_TOL
            && idempotence_error.is_none_or(|e| e <= CERTIFICATE_TOL)
            && norm.is_none_or(|v| (v - 1.0).abs() <= CERTIFICATE_TOL);
        Ok(IrreducibilityCertificate { trace, idempotence_error, norm, passes })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IrreducibilityCertificate {
    pub trace: f64,
    pub idempotence_error: Option<f64>,
    pub norm: Option<f64>,
    pub passes: bool,
}

/// Orthonormal basis (columns) of the mean-zero subspace of `R^m`.
fn helmert_basis(m: usize) -> DMatrix<f64> {
    DMatrix::from_fn(m, m - 1, |i, k| {
        let k1 = k + 1;
        let scale = 1.0 / ((k1 * (k1 + 1)) as f64).sqrt();
        if i < k1 {
            scale
        } else if i == k1 {
            -(k1 as f64) * scale
        } else {
            0.0
        }
    })
}

/// Uniformly random unit-modulus coefficients, one per group element.
pub fn random_phases(order: usize, seed: u64) -> Vec<C64> {
    let mut r = rng::seeded(seed);
    (0..order).map(|_| C64::from_polar(1.0, 2.0 * PI * r.random::<f64>())).collect()
}
