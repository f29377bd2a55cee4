//! Data-space kernels, Gram matrices and kernel mixtures.

use nalgebra::{DMatrix, DVectorView};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::par;

/// A data-space kernel `κ(y_i, y_j)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum KernelSpec {
    /// `y_iᵀ y_j`
    Linear,
    /// `exp(−‖y_i − y_j‖² / 2σ²)`, parameterized by the variance `σ²`.
    Gaussian { sigma2: f64 },
    /// `(y_iᵀ y_j + c)^p`
    Polynomial { degree: u32, offset: f64 },
}

impl KernelSpec {
    pub fn gaussian(sigma2: f64) -> Result<Self> {
        let spec = KernelSpec::Gaussian { sigma2 };
        spec.validate()?;
        Ok(spec)
    }

    pub fn polynomial(degree: u32, offset: f64) -> Result<Self> {
        let spec = KernelSpec::Polynomial { degree, offset };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            KernelSpec::Linear => Ok(()),
            KernelSpec::Gaussian { sigma2 } if sigma2 > 0.0 && sigma2.is_finite() => Ok(()),
            KernelSpec::Gaussian { sigma2 } => {
                Err(Error::param(format!("gaussian sigma2 must be > 0, got {sigma2}")))
            }
            KernelSpec::Polynomial { degree, offset } if degree >= 1 && offset.is_finite() => Ok(()),
            KernelSpec::Polynomial { degree, .. } => {
                Err(Error::param(format!("polynomial degree must be >= 1, got {degree}")))
            }
        }
    }

    /// `σ²` values equispaced over `[lo, hi]`, one Gaussian kernel each.
    pub fn gaussian_dictionary(lo: f64, hi: f64, count: usize) -> Result<Vec<Self>> {
        if count == 0 || !(lo > 0.0) || hi < lo {
            return Err(Error::param(format!(
                "invalid gaussian dictionary range [{lo}, {hi}] x {count}"
            )));
        }
        if count == 1 {
            return Ok(vec![KernelSpec::Gaussian { sigma2: lo }]);
        }
        let step = (hi - lo) / (count - 1) as f64;
        Ok((0..count)
            .map(|i| KernelSpec::Gaussian {
                sigma2: lo + step * i as f64,
            })
            .collect())
    }
}

fn eval_unchecked(spec: &KernelSpec, a: DVectorView<f64>, b: DVectorView<f64>) -> f64 {
    match *spec {
        KernelSpec::Linear => a.dot(&b),
        KernelSpec::Gaussian { sigma2 } => {
            let dist2: f64 = a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum();
            (-dist2 / (2.0 * sigma2)).exp()
        }
        KernelSpec::Polynomial { degree, offset } => (a.dot(&b) + offset).powi(degree as i32),
    }
}

/// Evaluates the kernel on two vectors of equal length.
pub fn eval_kernel(spec: &KernelSpec, a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::dim(format!(
            "kernel arguments have lengths {} and {}",
            a.len(),
            b.len()
        )));
    }
    spec.validate()?;
    Ok(eval_unchecked(
        spec,
        DVectorView::from_slice(a, a.len()),
        DVectorView::from_slice(b, b.len()),
    ))
}

/// Symmetric `N×N` Gram matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelMatrix(DMatrix<f64>);

impl KernelMatrix {
    /// Wraps a square, finite matrix, symmetrizing it.
    ///
    /// Asymmetry beyond `1e-10` relative to the largest entry is rejected.
    pub fn from_matrix(mut m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::InvalidMatrix(format!(
                "kernel matrix must be square, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        if m.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidMatrix("kernel matrix has non-finite entries".into()));
        }
        let scale = m.amax().max(1.0);
        let asym = (&m - m.transpose()).amax();
        if asym > 1e-10 * scale {
            return Err(Error::InvalidMatrix(format!(
                "kernel matrix is not symmetric (max asymmetry {asym:e})"
            )));
        }
        linalg::symmetrize_in_place(&mut m);
        Ok(KernelMatrix(m))
    }

    pub fn zeros(n: usize) -> Self {
        KernelMatrix(DMatrix::zeros(n, n))
    }

    pub fn identity(n: usize) -> Self {
        KernelMatrix(DMatrix::identity(n, n))
    }

    pub fn n(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.0
    }

    /// Smallest eigenvalue relative to the largest; PSD within roundoff when
    /// this is `≥ −1e-8`.
    pub fn min_relative_eigenvalue(&self) -> Result<f64> {
        let eig = linalg::sym_eig(&self.0)?;
        let max = eig.max_eigenvalue().abs().max(f64::MIN_POSITIVE);
        Ok(eig.eigenvalues[eig.dim() - 1] / max)
    }
}

impl AsRef<DMatrix<f64>> for KernelMatrix {
    fn as_ref(&self) -> &DMatrix<f64> {
        &self.0
    }
}

/// Gram matrix `[K]_ij = κ(y_i, y_j)` over the columns of a `D×N` matrix.
pub fn gram_matrix(spec: &KernelSpec, y: &DMatrix<f64>) -> Result<KernelMatrix> {
    spec.validate()?;
    let n = y.ncols();
    if n == 0 {
        return Err(Error::dim("gram matrix needs at least one sample"));
    }
    // Row j holds entries (i, j) for i <= j; mirrored below so the result is
    // exactly symmetric.
    let rows: Vec<Vec<f64>> = par::map_indices(n, |j| {
        let yj = y.column(j);
        (0..=j)
            .map(|i| eval_unchecked(spec, y.column(i), yj))
            .collect()
    });
    let mut k = DMatrix::zeros(n, n);
    for (j, row) in rows.iter().enumerate() {
        for (i, &v) in row.iter().enumerate() {
            k[(i, j)] = v;
            k[(j, i)] = v;
        }
    }
    Ok(KernelMatrix(k))
}

/// Double centering `HKH` with `H = I − 11ᵀ/N`.
pub fn center_kernel(k: &KernelMatrix) -> KernelMatrix {
    let m = &k.0;
    let n = m.nrows();
    if n == 0 {
        return k.clone();
    }
    let row_means = m.row_mean();
    let col_means = m.column_mean();
    let total = m.mean();
    let mut out = DMatrix::zeros(n, n);
    for j in 0..n {
        for i in 0..n {
            out[(i, j)] = m[(i, j)] - col_means[i] - row_means[j] + total;
        }
    }
    linalg::symmetrize_in_place(&mut out);
    KernelMatrix(out)
}

/// `Σ_q θ_q K^(q)` for nonnegative weights.
pub fn mix_kernels(kernels: &[KernelMatrix], theta: &[f64]) -> Result<KernelMatrix> {
    if kernels.is_empty() {
        return Err(Error::dim("at least one kernel is required"));
    }
    if kernels.len() != theta.len() {
        return Err(Error::dim(format!(
            "{} kernels but {} weights",
            kernels.len(),
            theta.len()
        )));
    }
    if let Some(w) = theta.iter().find(|w| !(**w >= 0.0) || !w.is_finite()) {
        return Err(Error::param(format!("kernel weights must be finite and >= 0, got {w}")));
    }
    let n = kernels[0].n();
    if kernels.iter().any(|k| k.n() != n) {
        return Err(Error::dim("kernels have different sizes"));
    }
    let mut out = DMatrix::<f64>::zeros(n, n);
    for (k, &w) in kernels.iter().zip(theta) {
        out.zip_apply(&k.0, |a, b| *a += w * b);
    }
    Ok(KernelMatrix(out))
}
