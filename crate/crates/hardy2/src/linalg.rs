//! Spectral helpers for small dense complex matrices.
//!
//! Hermitian eigen-operations and singular values are computed through the
//! real symmetric embedding `Z = X + iY  ↦  [[X, -Y], [Y, X]]`, which is a
//! *-homomorphism: eigenvalues and singular values come out doubled in
//! multiplicity but otherwise unchanged, and `f(embed(Z)) = embed(f(Z))`
//! for any spectral function `f`. This keeps every spectral computation on
//! nalgebra's real symmetric/SVD paths.

use nalgebra::DMatrix;

use crate::{Complex64, HardyError, Result};

pub(crate) fn embed(m: &DMatrix<Complex64>) -> DMatrix<f64> {
    let (r, c) = m.shape();
    let mut e = DMatrix::<f64>::zeros(2 * r, 2 * c);
    for i in 0..r {
        for j in 0..c {
            let z = m[(i, j)];
            e[(i, j)] = z.re;
            e[(i, j + c)] = -z.im;
            e[(i + r, j)] = z.im;
            e[(i + r, j + c)] = z.re;
        }
    }
    e
}

pub(crate) fn unembed(e: &DMatrix<f64>) -> DMatrix<Complex64> {
    let r = e.nrows() / 2;
    let c = e.ncols() / 2;
    DMatrix::from_fn(r, c, |i, j| Complex64::new(e[(i, j)], e[(i + r, j)]))
}

/// Eigenvalues of a Hermitian matrix, ascending. Duplicates from the
/// embedding are harmless for min/max queries.
pub(crate) fn hermitian_eigenvalues(m: &DMatrix<Complex64>) -> Vec<f64> {
    let eig = embed(m).symmetric_eigen();
    let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
    vals
}

pub(crate) fn hermitian_min_eig(m: &DMatrix<Complex64>) -> f64 {
    hermitian_eigenvalues(m).first().copied().unwrap_or(0.0)
}

pub(crate) fn hermitian_max_eig(m: &DMatrix<Complex64>) -> f64 {
    hermitian_eigenvalues(m).last().copied().unwrap_or(0.0)
}

/// Applies a spectral function to a Hermitian matrix.
pub(crate) fn hermitian_map(
    m: &DMatrix<Complex64>,
    f: impl Fn(f64) -> f64,
) -> DMatrix<Complex64> {
    let eig = embed(m).symmetric_eigen();
    let u = &eig.eigenvectors;
    let d = DMatrix::from_diagonal(&eig.eigenvalues.map(f));
    unembed(&(u * d * u.transpose()))
}

/// Hermitian positive-definite square root.
pub(crate) fn hermitian_sqrt(m: &DMatrix<Complex64>) -> Result<DMatrix<Complex64>> {
    guard_pd(m)?;
    Ok(hermitian_map(m, |t| t.max(0.0).sqrt()))
}

/// Hermitian positive-definite inverse square root. Fails loudly when the
/// matrix is numerically singular.
pub(crate) fn hermitian_inv_sqrt(m: &DMatrix<Complex64>) -> Result<DMatrix<Complex64>> {
    guard_pd(m)?;
    Ok(hermitian_map(m, |t| 1.0 / t.sqrt()))
}

fn guard_pd(m: &DMatrix<Complex64>) -> Result<()> {
    let vals = hermitian_eigenvalues(m);
    let max = vals.last().copied().unwrap_or(0.0);
    let min = vals.first().copied().unwrap_or(0.0);
    if min <= 1e-12 * max.max(1.0) {
        return Err(HardyError::SingularGramian { min_eig: min });
    }
    Ok(())
}

/// Largest singular value.
pub(crate) fn max_singular_value(m: &DMatrix<Complex64>) -> f64 {
    embed(m)
        .singular_values()
        .iter()
        .copied()
        .fold(0.0, f64::max)
}

/// Moore–Penrose pseudo-inverse with a relative rank cutoff.
pub(crate) fn pinv(m: &DMatrix<Complex64>, rel_tol: f64) -> DMatrix<Complex64> {
    let e = embed(m);
    let svd = e.svd(true, true);
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let cut = rel_tol * smax.max(1e-300);
    let u = svd.u.as_ref().unwrap();
    let vt = svd.v_t.as_ref().unwrap();
    let mut sinv = DMatrix::<f64>::zeros(vt.nrows(), u.ncols());
    for (i, s) in svd.singular_values.iter().enumerate() {
        if *s > cut {
            sinv[(i, i)] = 1.0 / s;
        }
    }
    unembed(&(vt.transpose() * sinv * u.transpose()))
}

/// Solves `a x = b` by LU; `None` when `a` is singular.
pub(crate) fn solve(
    a: &DMatrix<Complex64>,
    b: &DMatrix<Complex64>,
) -> Option<DMatrix<Complex64>> {
    a.clone().lu().solve(b)
}
