//! Dense complex helpers shared by the operator modules.
//!
//! Operator norms are largest singular values computed by power iteration on
//! the smaller Gram matrix. Matrices with both sides at most 2 use the closed
//! form of the 2×2 Hermitian eigenproblem instead.

use nalgebra::{DMatrix, DVector};

pub use nalgebra::Complex;

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;

/// Relative change of the Rayleigh quotient at which power iteration stops.
pub const POWER_TOL: f64 = 1e-12;
pub const POWER_MAX_ITER: usize = 10_000;

/// Largest singular value with its right singular vector.
#[derive(Debug, Clone)]
pub struct TopSingular {
    pub value: f64,
    pub right: DVector<C64>,
}

pub fn c64(re: f64, im: f64) -> C64 {
    Complex::new(re, im)
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Deterministic, generic start vector for power iteration.
fn start_vector(dim: usize) -> DVector<C64> {
    let mut state: u64 = 0x2545_F491_4F6C_DD1D;
    let mut next = || {
        state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        ((z ^ (z >> 31)) >> 11) as f64 / (1u64 << 53) as f64
    };
    let v = DVector::from_fn(dim, |_, _| c64(0.5 + next(), next() - 0.5));
    let n = v.norm();
    v / c64(n, 0.0)
}

/// Top eigenpair of a Hermitian positive semidefinite operator given by its action.
pub fn hermitian_top<F>(dim: usize, mut apply: F) -> Result<(f64, DVector<C64>)>
where
    F: FnMut(&DVector<C64>) -> DVector<C64>,
{
    if dim == 0 {
        return Ok((0.0, DVector::zeros(0)));
    }
    let mut v = start_vector(dim);
    let mut lambda_prev = f64::NAN;
    for it in 1..=POWER_MAX_ITER {
        let w = apply(&v);
        let lambda = v.dotc(&w).re.max(0.0);
        let nw = w.norm();
        if nw == 0.0 {
            return Ok((0.0, v));
        }
        let converged = it > 2 && (lambda - lambda_prev).abs() <= POWER_TOL * lambda.max(f64::MIN_POSITIVE);
        v = w / c64(nw, 0.0);
        if converged {
            let w = apply(&v);
            let lambda = v.dotc(&w).re.max(0.0);
            return Ok((lambda, v));
        }
        lambda_prev = lambda;
    }
    let w = apply(&v);
    let lambda = v.dotc(&w).re;
    let residual = (w - &v * c64(lambda, 0.0)).norm();
    Err(Error::NoConvergence { residual, iterations: POWER_MAX_ITER })
}

fn top_eigen_2x2(g: &CMatrix) -> (f64, DVector<C64>) {
    if g.nrows() == 1 {
        return (g[(0, 0)].re.max(0.0), DVector::from_element(1, c64(1.0, 0.0)));
    }
    let a = g[(0, 0)].re;
    let d = g[(1, 1)].re;
    let b = g[(0, 1)];
    let half = 0.5 * (a - d);
    let lambda = 0.5 * (a + d) + (half * half + b.norm_sqr()).sqrt();
    let v = if b.norm() > 0.0 {
        DVector::from_vec(vec![b, c64(lambda - a, 0.0)])
    } else if a >= d {
        DVector::from_vec(vec![c64(1.0, 0.0), c64(0.0, 0.0)])
    } else {
        DVector::from_vec(vec![c64(0.0, 0.0), c64(1.0, 0.0)])
    };
    let n = v.norm();
    (lambda.max(0.0), v / c64(n, 0.0))
}

/// Gram dimension up to which the top eigenpair comes from a dense eigensolve.
pub const DENSE_EIGEN_MAX: usize = 64;
/// Gram dimension up to which a stalled power iteration falls back to a dense eigensolve.
pub const DENSE_FALLBACK_MAX: usize = 1024;

fn dense_top(g: &CMatrix) -> (f64, DVector<C64>) {
    let eig = g.clone().symmetric_eigen();
    let i = eig.eigenvalues.imax();
    (eig.eigenvalues[i].max(0.0), eig.eigenvectors.column(i).into_owned())
}

fn gram_top(g: &CMatrix) -> Result<(f64, DVector<C64>)> {
    if g.nrows() <= DENSE_EIGEN_MAX {
        return Ok(dense_top(g));
    }
    match hermitian_top(g.nrows(), |v| g * v) {
        Err(Error::NoConvergence { .. }) if g.nrows() <= DENSE_FALLBACK_MAX => Ok(dense_top(g)),
        other => other,
    }
}

/// Largest singular value and right singular vector of `m`.
pub fn top_singular(m: &CMatrix) -> Result<TopSingular> {
    let (rows, cols) = m.shape();
    if rows == 0 || cols == 0 || max_abs(m) == 0.0 {
        return Ok(TopSingular { value: 0.0, right: DVector::zeros(cols) });
    }
    let zero = C64::default();
    let live_rows: Vec<usize> = (0..rows).filter(|&i| m.row(i).iter().any(|z| *z != zero)).collect();
    let live_cols: Vec<usize> = (0..cols).filter(|&j| m.column(j).iter().any(|z| *z != zero)).collect();
    if live_rows.len() == rows && live_cols.len() == cols {
        return top_singular_full(m);
    }
    let t = top_singular_full(&submatrix(m, &live_rows, &live_cols))?;
    let mut right = DVector::zeros(cols);
    for (k, &j) in live_cols.iter().enumerate() {
        right[j] = t.right[k];
    }
    Ok(TopSingular { value: t.value, right })
}

/// Density below which power iteration runs on the nonzero entries.
const SPARSE_DENSITY: f64 = 0.125;

fn top_singular_full(m: &CMatrix) -> Result<TopSingular> {
    let (rows, cols) = m.shape();
    if rows <= 2 && cols <= 2 {
        let g = m.adjoint() * m;
        let (lambda, right) = top_eigen_2x2(&g);
        return Ok(TopSingular { value: lambda.sqrt(), right });
    }
    let zero = C64::default();
    let nnz = m.iter().filter(|z| **z != zero).count();
    if rows * cols > 4 * DENSE_EIGEN_MAX * DENSE_EIGEN_MAX && (nnz as f64) < SPARSE_DENSITY * (rows * cols) as f64 {
        let mut entries = Vec::with_capacity(nnz);
        for j in 0..cols {
            for i in 0..rows {
                if m[(i, j)] != zero {
                    entries.push((i, j, m[(i, j)]));
                }
            }
        }
        let apply = |v: &DVector<C64>| {
            let mut w = DVector::<C64>::zeros(rows);
            for &(i, j, a) in &entries {
                w[i] += a * v[j];
            }
            let mut out = DVector::<C64>::zeros(cols);
            for &(i, j, a) in &entries {
                out[j] += a.conj() * w[i];
            }
            out
        };
        return match hermitian_top(cols, apply) {
            Ok((lambda, right)) => Ok(TopSingular { value: lambda.sqrt(), right }),
            Err(Error::NoConvergence { .. }) if cols <= DENSE_FALLBACK_MAX => {
                let (lambda, right) = dense_top(&(m.adjoint() * m));
                Ok(TopSingular { value: lambda.sqrt(), right })
            }
            Err(e) => Err(e),
        };
    }
    if cols <= rows {
        let g = m.adjoint() * m;
        let (lambda, right) = gram_top(&g)?;
        Ok(TopSingular { value: lambda.sqrt(), right })
    } else {
        let g = m * m.adjoint();
        let (lambda, left) = gram_top(&g)?;
        let sigma = lambda.sqrt();
        let mut right = m.adjoint() * left;
        let n = right.norm();
        if n > 0.0 {
            right /= c64(n, 0.0);
        }
        Ok(TopSingular { value: sigma, right })
    }
}

/// Operator norm (largest singular value).
pub fn opnorm(m: &CMatrix) -> Result<f64> {
    top_singular(m).map(|t| t.value)
}

/// Operator norm through a dense Hermitian eigensolve of the smaller Gram
/// matrix. Used by the subset scans, where matrices are small and power
/// iteration can stall on clustered spectra.
pub fn small_opnorm(m: &CMatrix) -> f64 {
    let (rows, cols) = m.shape();
    if rows == 0 || cols == 0 {
        return 0.0;
    }
    let g = if cols <= rows { m.adjoint() * m } else { m * m.adjoint() };
    if g.nrows() == 1 {
        return g[(0, 0)].re.max(0.0).sqrt();
    }
    g.symmetric_eigenvalues().max().max(0.0).sqrt()
}

/// Operator norm of a real matrix.
pub fn opnorm_real(m: &DMatrix<f64>) -> Result<f64> {
    opnorm(&m.map(|x| c64(x, 0.0)))
}

/// Largest eigenvalue of a small real symmetric matrix.
pub fn sym_lambda_max(g: &DMatrix<f64>) -> f64 {
    match g.nrows() {
        0 => 0.0,
        1 => g[(0, 0)],
        2 => {
            let (a, b, d) = (g[(0, 0)], g[(0, 1)], g[(1, 1)]);
            let half = 0.5 * (a - d);
            0.5 * (a + d) + (half * half + b * b).sqrt()
        }
        _ => g.clone().symmetric_eigenvalues().max(),
    }
}

/// Submatrix with the given rows and columns, in the given order.
pub fn submatrix(m: &CMatrix, rows: &[usize], cols: &[usize]) -> CMatrix {
    CMatrix::from_fn(rows.len(), cols.len(), |i, j| m[(rows[i], cols[j])])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use rand::Rng;

    fn random_matrix(rows: usize, cols: usize, seed: u64) -> CMatrix {
        let mut r = rng::seeded(seed);
        CMatrix::from_fn(rows, cols, |_, _| c64(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0)))
    }

    fn svd_oracle(m: &CMatrix) -> f64 {
        m.clone().svd(false, false).singular_values.max()
    }

    #[test]
    fn sparse_and_padded_matrices_match_svd() {
        let mut band = CMatrix::zeros(200, 200);
        let dense = random_matrix(200, 200, 4);
        for i in 0..200usize {
            for j in i.saturating_sub(2)..(i + 3).min(200) {
                band[(i, j)] = dense[(i, j)];
            }
        }
        assert_relative_eq!(opnorm(&band).unwrap(), svd_oracle(&band), max_relative = 1e-9);
        let mut padded = CMatrix::zeros(40, 30);
        padded.view_mut((5, 3), (6, 7)).copy_from(&random_matrix(6, 7, 5));
        let t = top_singular(&padded).unwrap();
        assert_relative_eq!(t.value, svd_oracle(&padded), max_relative = 1e-9);
        assert_relative_eq!((&padded * &t.right).norm(), t.value, max_relative = 1e-9);
    }

    #[test]
    fn identity_and_diagonal() {
        assert_abs_diff_eq!(opnorm(&CMatrix::identity(5, 5)).unwrap(), 1.0, epsilon = 1e-12);
        let d = CMatrix::from_diagonal(&DVector::from_vec(vec![c64(1.0, 0.0), c64(2.0, 0.0), c64(3.0, 0.0)]));
        assert_abs_diff_eq!(opnorm(&d).unwrap(), 3.0, epsilon = 1e-10);
    }

    #[test]
    fn random_12x12_matches_svd() {
        let m = random_matrix(12, 12, 2);
        assert_abs_diff_eq!(opnorm(&m).unwrap(), svd_oracle(&m), epsilon = 1e-8);
    }

    #[test]
    fn rectangular_and_small_shapes_match_svd() {
        for (i, &(r, c)) in [(1, 1), (1, 2), (2, 1), (2, 2), (3, 7), (9, 2), (5, 5)].iter().enumerate() {
            let m = random_matrix(r, c, 40 + i as u64);
            let got = opnorm(&m).unwrap();
            assert_abs_diff_eq!(got, svd_oracle(&m), epsilon = 1e-9 * got.max(1.0));
        }
    }

    #[test]
    fn small_opnorm_matches_svd() {
        for (i, &(r, c)) in [(1, 1), (1, 4), (3, 7), (9, 2), (12, 12)].iter().enumerate() {
            let m = random_matrix(r, c, 70 + i as u64);
            assert_abs_diff_eq!(small_opnorm(&m), svd_oracle(&m), epsilon = 1e-10);
        }
    }

    #[test]
    fn zero_and_empty() {
        assert_eq!(opnorm(&CMatrix::zeros(4, 3)).unwrap(), 0.0);
        assert_eq!(opnorm(&CMatrix::zeros(0, 3)).unwrap(), 0.0);
    }

    #[test]
    fn sym_lambda_max_small() {
        let g = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]);
        assert_abs_diff_eq!(sym_lambda_max(&g), 3.0, epsilon = 1e-14);
        let g = DMatrix::from_row_slice(3, 3, &[1.0, 0.0, 0.0, 0.0, 5.0, 0.0, 0.0, 0.0, 2.0]);
        assert_abs_diff_eq!(sym_lambda_max(&g), 5.0, epsilon = 1e-12);
    }
}
