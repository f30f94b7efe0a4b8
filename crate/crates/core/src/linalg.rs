//! Small dense linear-algebra helpers shared across the crate.
//!
//! Everything here operates on Hermitian (or real symmetric) matrices and is
//! built on eigendecompositions rather than LU factorizations: the spectra are
//! what the surrounding code reasons about (ranks, trace inverses, PSD-ness),
//! and eigenvalue clamping gives well-defined behavior near singularity.

use crate::{CMat, CVec, Complex64, RMat, RVec};

/// `(A + A^H) / 2`.
pub fn hermitize(a: &CMat) -> CMat {
    let n = a.nrows();
    let mut h = CMat::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            h[(i, j)] = (a[(i, j)] + a[(j, i)].conj()) * 0.5;
        }
    }
    h
}

/// Frobenius norm.
pub fn frob(a: &CMat) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Relative Hermitian asymmetry `‖A − A^H‖_F / ‖A‖_F` (0 for the zero matrix).
pub fn asymmetry(a: &CMat) -> f64 {
    let norm = frob(a);
    if norm == 0.0 {
        return 0.0;
    }
    let diff = a - a.adjoint();
    frob(&diff) / norm
}

/// Real part of the trace. For Hermitian matrices the trace is real and the
/// imaginary part is pure rounding noise.
pub fn trace_re(a: &CMat) -> f64 {
    a.diagonal().iter().map(|z| z.re).sum()
}

/// Hilbert-Schmidt inner product `Re tr(A^H B)`; equals `tr(AB)` when both
/// arguments are Hermitian.
pub fn inner(a: &CMat, b: &CMat) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x.conj() * y).re).sum()
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues ascending.
/// The input is hermitized first so callers may pass matrices that are
/// Hermitian only up to rounding.
pub fn hermitian_eigen(a: &CMat) -> (RVec, CMat) {
    let eig = hermitize(a).symmetric_eigen();
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = RVec::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut vectors = CMat::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn min_eig(a: &CMat) -> f64 {
    let (values, _) = hermitian_eigen(a);
    values[0]
}

/// `tr(A^{-1})` for Hermitian `A` as the sum of reciprocal eigenvalues.
/// Any eigenvalue that is not strictly positive yields `+inf`: the inverse
/// trace of a singular or indefinite Gram matrix is treated as unbounded.
pub fn trace_inverse(a: &CMat) -> f64 {
    let (values, _) = hermitian_eigen(a);
    let mut sum = 0.0;
    for &v in values.iter() {
        if v <= 0.0 {
            return f64::INFINITY;
        }
        sum += 1.0 / v;
    }
    sum
}

/// Rank of an arbitrary complex matrix: the number of singular values above
/// `tol` times the largest singular value. Returns 0 for the zero matrix.
pub fn rank_relative(a: &CMat, tol: f64) -> usize {
    let sv = a.clone().singular_values();
    let max = sv.iter().cloned().fold(0.0_f64, f64::max);
    if max == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > tol * max).count()
}

/// Rank of a Hermitian PSD matrix via its eigenvalues, counted above
/// `tol` times the largest absolute eigenvalue.
pub fn psd_rank_relative(a: &CMat, tol: f64) -> usize {
    let (values, _) = hermitian_eigen(a);
    let max = values.iter().map(|v| v.abs()).fold(0.0_f64, f64::max);
    if max == 0.0 {
        return 0;
    }
    values.iter().filter(|&&v| v > tol * max).count()
}

/// Hermitian square root with negative eigenvalues clamped to zero.
pub fn psd_sqrt(a: &CMat) -> CMat {
    let (values, vectors) = hermitian_eigen(a);
    let n = values.len();
    let mut scaled = vectors.clone();
    for j in 0..n {
        let s = values[j].max(0.0).sqrt();
        scaled.column_mut(j).scale_mut(s);
    }
    scaled * vectors.adjoint()
}

/// Eigenpairs of a Hermitian PSD matrix with eigenvalues clamped to zero,
/// descending, as `(weight, vector)` pairs. Used to split covariances into
/// rank-one components.
pub fn psd_eigen_pairs(a: &CMat) -> Vec<(f64, CVec)> {
    let (values, vectors) = hermitian_eigen(a);
    let n = values.len();
    (0..n)
        .rev()
        .map(|j| (values[j].max(0.0), CVec::from_column_slice(vectors.column(j).as_slice())))
        .collect()
}

/// Embeds a real matrix into the complex types used by the rest of the crate.
pub fn complexify(a: &RMat) -> CMat {
    CMat::from_fn(a.nrows(), a.ncols(), |i, j| Complex64::new(a[(i, j)], 0.0))
}

/// Diagonal complex matrix from a vector.
pub fn diag(v: &CVec) -> CMat {
    let n = v.len();
    let mut m = CMat::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = v[i];
    }
    m
}

/// Identity matrix shorthand.
pub fn eye(n: usize) -> CMat {
    CMat::identity(n, n)
}
