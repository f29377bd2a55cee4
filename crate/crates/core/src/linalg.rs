//! Dense symmetric linear algebra shared by every solver.
//!
//! All embedding problems in this crate reduce to one dense symmetric
//! eigenproblem; [`sym_eig`] is that single entry point. Eigenpairs are
//! returned in descending order with a canonical sign so repeated calls on
//! the same input are bit-identical.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Relative tolerance below which eigenvalues are treated as zero by
/// [`pseudo_inverse`].
pub const DEFAULT_PINV_TOL: f64 = 1e-10;

/// Eigendecomposition `M = V diag(λ) Vᵀ` of a symmetric matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SymEig {
    /// Eigenvalues, nonincreasing.
    pub eigenvalues: DVector<f64>,
    /// Orthonormal eigenvectors; column `j` pairs with `eigenvalues[j]`.
    pub eigenvectors: DMatrix<f64>,
}

impl SymEig {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues.get(0).copied().unwrap_or(0.0)
    }

    /// `V diag(λ) Vᵀ`.
    pub fn reconstruct(&self) -> DMatrix<f64> {
        compose(&self.eigenvectors, self.eigenvalues.as_slice())
    }
}

/// Builds `V diag(values) Vᵀ` for an orthonormal `V` and one value per column.
pub fn compose(vectors: &DMatrix<f64>, values: &[f64]) -> DMatrix<f64> {
    assert_eq!(vectors.ncols(), values.len());
    let mut scaled = vectors.clone();
    for (j, &v) in values.iter().enumerate() {
        scaled.column_mut(j).scale_mut(v);
    }
    let mut out = scaled * vectors.transpose();
    symmetrize_in_place(&mut out);
    out
}

/// Replaces `m` by `(m + mᵀ)/2`.
pub fn symmetrize_in_place(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    for j in 0..n {
        for i in (j + 1)..n {
            let avg = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = avg;
            m[(j, i)] = avg;
        }
    }
}

fn check_square_finite(m: &DMatrix<f64>) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::InvalidMatrix(format!(
            "expected a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    if let Some(pos) = m.iter().position(|v| !v.is_finite()) {
        let n = m.nrows();
        return Err(Error::InvalidMatrix(format!(
            "non-finite entry at ({}, {})",
            pos % n,
            pos / n
        )));
    }
    Ok(())
}

/// Flips each column so that its largest-magnitude entry (lowest index on
/// ties) is nonnegative.
pub fn canonicalize_signs(vectors: &mut DMatrix<f64>) {
    for mut col in vectors.column_iter_mut() {
        let mut best = 0usize;
        let mut best_abs = -1.0;
        for (i, v) in col.iter().enumerate() {
            if v.abs() > best_abs {
                best_abs = v.abs();
                best = i;
            }
        }
        if !col.is_empty() && col[best] < 0.0 {
            col.neg_mut();
        }
    }
}

/// Eigendecomposition of a symmetric matrix, eigenvalues descending.
///
/// The input is symmetrized as `(M + Mᵀ)/2` before factoring. The backend is
/// a Householder tridiagonalization followed by a tridiagonal eigensolver,
/// run single-threaded so the result does not depend on scheduling.
pub fn sym_eig(m: &DMatrix<f64>) -> Result<SymEig> {
    check_square_finite(m)?;
    let n = m.nrows();
    if n == 0 {
        return Ok(SymEig {
            eigenvalues: DVector::zeros(0),
            eigenvectors: DMatrix::zeros(0, 0),
        });
    }
    let sym = faer::Mat::<f64>::from_fn(n, n, |i, j| 0.5 * (m[(i, j)] + m[(j, i)]));
    let evd = sym
        .self_adjoint_eigen(faer::Side::Lower)
        .map_err(|e| Error::InvalidMatrix(format!("eigensolver did not converge: {e:?}")))?;
    let s = evd.S().column_vector();
    let u = evd.U();

    // faer returns ascending order.
    let eigenvalues = DVector::from_fn(n, |j, _| s[n - 1 - j]);
    let mut eigenvectors = DMatrix::from_fn(n, n, |i, j| u[(i, n - 1 - j)]);
    canonicalize_signs(&mut eigenvectors);
    Ok(SymEig {
        eigenvalues,
        eigenvectors,
    })
}

/// Computes `U f(Λ) Uᵀ` for symmetric `M = U Λ Uᵀ`.
pub fn spectral_apply<F>(m: &DMatrix<f64>, f: F) -> Result<DMatrix<f64>>
where
    F: Fn(f64) -> f64,
{
    let eig = sym_eig(m)?;
    spectral_apply_eig(&eig, f)
}

/// [`spectral_apply`] on an existing decomposition.
pub fn spectral_apply_eig<F>(eig: &SymEig, f: F) -> Result<DMatrix<f64>>
where
    F: Fn(f64) -> f64,
{
    let mut values = Vec::with_capacity(eig.dim());
    for &lambda in eig.eigenvalues.iter() {
        let v = f(lambda);
        if !v.is_finite() {
            return Err(Error::SpectralFunction { eigenvalue: lambda });
        }
        values.push(v);
    }
    Ok(compose(&eig.eigenvectors, &values))
}

/// Moore–Penrose pseudo-inverse of a symmetric PSD matrix.
///
/// Eigenvalues at or below `tol · λ_max` are mapped to zero, the rest to
/// their reciprocal.
pub fn pseudo_inverse(m: &DMatrix<f64>, tol: f64) -> Result<DMatrix<f64>> {
    if !(tol > 0.0) {
        return Err(Error::param(format!("pseudo-inverse tolerance must be > 0, got {tol}")));
    }
    let eig = sym_eig(m)?;
    Ok(pseudo_inverse_eig(&eig, tol))
}

/// [`pseudo_inverse`] on an existing decomposition.
pub fn pseudo_inverse_eig(eig: &SymEig, tol: f64) -> DMatrix<f64> {
    let cutoff = tol * eig.max_eigenvalue().max(0.0);
    let values: Vec<f64> = eig
        .eigenvalues
        .iter()
        .map(|&l| if l > cutoff && l > 0.0 { 1.0 / l } else { 0.0 })
        .collect();
    compose(&eig.eigenvectors, &values)
}

/// Removes the sample mean from every column of a `D×N` data matrix.
pub fn center_columns(y: &DMatrix<f64>) -> DMatrix<f64> {
    let n = y.ncols();
    if n == 0 {
        return y.clone();
    }
    let mean = y.column_mean();
    let mut out = y.clone();
    for mut col in out.column_iter_mut() {
        col -= &mean;
    }
    out
}

pub fn frobenius(m: &DMatrix<f64>) -> f64 {
    m.norm()
}

/// Orthogonal projector onto the row space of a `d×N` matrix.
///
/// Rows need not be orthonormal; the projector is built from an orthonormal
/// basis of the row space, so any row scaling or sign flip gives the same
/// result.
pub fn row_projector(psi: &DMatrix<f64>) -> DMatrix<f64> {
    let basis = psi.transpose().qr().q();
    &basis * basis.transpose()
}

/// Frobenius distance between the row-space projectors of two embeddings.
pub fn projector_distance(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (row_projector(a) - row_projector(b)).norm()
}

/// `‖ΨΨᵀ − I‖_F` for a `d×N` matrix.
pub fn orthonormality_error(psi: &DMatrix<f64>) -> f64 {
    let gram = psi * psi.transpose();
    (gram - DMatrix::identity(psi.nrows(), psi.nrows())).norm()
}

/// `tr(Ψ M Ψᵀ)`.
pub fn trace_form(psi: &DMatrix<f64>, m: &DMatrix<f64>) -> f64 {
    let pm = psi * m;
    pm.component_mul(psi).sum()
}
