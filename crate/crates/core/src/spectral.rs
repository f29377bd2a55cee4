//! Trace-optimization embedding solvers.
//!
//! Every solver here maximizes `tr(Ψ M Ψᵀ)` over `d×N` matrices with
//! orthonormal rows for some symmetric "effective matrix" `M`; the optimum is
//! spanned by the `d` leading eigenvectors of `M`. Graph regularizers enter
//! `M` either as a penalty (`−γ L`) or as a reward (`+γ r†(L)`).

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graphs::{self, GraphKernelSpec, GraphSpec};
use crate::kernels::KernelMatrix;
use crate::linalg::{self, SymEig};

/// Row normalization of an [`Embedding`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scaling {
    /// `ΨΨᵀ = I_d`
    Orthonormal,
    /// `ΨΨᵀ = Λ_d` (dual PCA / PCA scores)
    Eigenvalue,
}

/// Low-dimensional representation `Ψ` (`d×N`, one column per sample).
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    pub psi: DMatrix<f64>,
    /// The `d` eigenvalues that produced `Ψ`: nonincreasing for top-mode
    /// solvers, ascending (bottom modes of `M`) for LLE-style embeddings.
    pub eigenvalues: DVector<f64>,
    /// Value of the maximized trace objective at `Ψ`.
    pub objective_trace: f64,
    pub scaling: Scaling,
}

impl Embedding {
    pub fn dim(&self) -> usize {
        self.psi.nrows()
    }

    pub fn n_samples(&self) -> usize {
        self.psi.ncols()
    }

    /// Rescales every row to unit norm. Rows of an eigenvalue-scaled
    /// embedding are orthogonal, so the result has `ΨΨᵀ = I_d`.
    pub fn normalized(&self) -> Embedding {
        let mut psi = self.psi.clone();
        for mut row in psi.row_iter_mut() {
            let norm = row.norm();
            if norm > 0.0 {
                row /= norm;
            }
        }
        Embedding {
            psi,
            eigenvalues: self.eigenvalues.clone(),
            objective_trace: self.eigenvalues.sum(),
            scaling: Scaling::Orthonormal,
        }
    }

    /// `Λ_d^{1/2} Ψ` applied to an orthonormal embedding.
    pub fn whitened(&self) -> Embedding {
        let mut out = self.normalized();
        for (mut row, &l) in out.psi.row_iter_mut().zip(self.eigenvalues.iter()) {
            row *= l.max(0.0).sqrt();
        }
        out.scaling = Scaling::Eigenvalue;
        out
    }
}

/// Nonnegative mixture weights with unit `ℓ2` norm (`θ` for kernels, `β`
/// for graphs).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureWeights(pub Vec<f64>);

impl MixtureWeights {
    /// `(1/√Q, …, 1/√Q)`.
    pub fn uniform(q: usize) -> Self {
        MixtureWeights(vec![1.0 / (q as f64).sqrt(); q])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|w| w * w).sum::<f64>().sqrt()
    }
}

/// How a graph term enters the effective matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegularizerMode {
    /// `K − γ L_G`: smoothness penalty on the raw Laplacian.
    Penalty,
    /// `K + γ r†(L_G)`: graph kernel as a reward.
    Reward,
}

fn check_dim(d: usize, n: usize) -> Result<()> {
    if d == 0 || d > n {
        return Err(Error::dim(format!("embedding dimension must satisfy 1 <= d <= {n}, got {d}")));
    }
    Ok(())
}

fn check_gamma(name: &str, gamma: f64) -> Result<()> {
    if !(gamma >= 0.0) || !gamma.is_finite() {
        return Err(Error::param(format!("{name} must be finite and >= 0, got {gamma}")));
    }
    Ok(())
}

fn check_square(name: &str, m: &DMatrix<f64>, n: usize) -> Result<()> {
    if m.nrows() != n || m.ncols() != n {
        return Err(Error::dim(format!(
            "{name} is {}x{}, expected {n}x{n}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(())
}

/// `base + Σ coefficient · matrix`.
pub fn effective_matrix(base: &DMatrix<f64>, terms: &[(f64, &DMatrix<f64>)]) -> Result<DMatrix<f64>> {
    let n = base.nrows();
    let mut out = base.clone();
    for (i, &(c, m)) in terms.iter().enumerate() {
        check_square(&format!("regularizer {i}"), m, n)?;
        if c != 0.0 {
            out.zip_apply(m, |a, b| *a += c * b);
        }
    }
    Ok(out)
}

fn leading_rows(eig: &SymEig, d: usize) -> DMatrix<f64> {
    eig.eigenvectors.columns(0, d).transpose()
}

/// `Ψ = V_dᵀ` for the `d` leading eigenvectors of a symmetric matrix.
pub fn top_eigen_embedding(m: &DMatrix<f64>, d: usize) -> Result<Embedding> {
    check_dim(d, m.nrows())?;
    let eig = linalg::sym_eig(m)?;
    let eigenvalues = eig.eigenvalues.rows(0, d).into_owned();
    Ok(Embedding {
        psi: leading_rows(&eig, d),
        objective_trace: eigenvalues.sum(),
        eigenvalues,
        scaling: Scaling::Orthonormal,
    })
}

fn check_psd_leading(eig: &SymEig, d: usize) -> Result<()> {
    let scale = eig
        .eigenvalues
        .iter()
        .fold(0.0f64, |acc, &l| acc.max(l.abs()));
    for &l in eig.eigenvalues.iter().take(d) {
        if l < -1e-8 * scale {
            return Err(Error::NotPsd {
                eigenvalue: l,
                max: eig.max_eigenvalue(),
            });
        }
    }
    Ok(())
}

/// Linear PCA on the columns of a `D×N` data matrix.
///
/// Returns the scores `Ψ = Uᵀ Y` (rows scaled so `ΨΨᵀ = Λ_d`) and the
/// orthonormal `D×d` basis `U`. The data are re-centered first.
pub fn pca(y: &DMatrix<f64>, d: usize) -> Result<(Embedding, DMatrix<f64>)> {
    check_dim(d, y.nrows().min(y.ncols()))?;
    let yc = linalg::center_columns(y);
    let scatter = &yc * yc.transpose();
    let eig = linalg::sym_eig(&scatter)?;
    let basis = eig.eigenvectors.columns(0, d).into_owned();
    let psi = basis.transpose() * &yc;
    let eigenvalues = eig.eigenvalues.rows(0, d).into_owned();
    Ok((
        Embedding {
            psi,
            objective_trace: eigenvalues.sum(),
            eigenvalues,
            scaling: Scaling::Eigenvalue,
        },
        basis,
    ))
}

/// Dual PCA: `Ψ = Λ_d^{1/2} V_dᵀ` from the `N×N` Gram matrix.
pub fn dual_pca(k: &KernelMatrix, d: usize) -> Result<Embedding> {
    check_dim(d, k.n())?;
    let eig = linalg::sym_eig(k.as_matrix())?;
    check_psd_leading(&eig, d)?;
    let mut psi = leading_rows(&eig, d);
    for (i, mut row) in psi.row_iter_mut().enumerate() {
        row *= eig.eigenvalues[i].max(0.0).sqrt();
    }
    let eigenvalues = eig.eigenvalues.rows(0, d).into_owned();
    Ok(Embedding {
        psi,
        objective_trace: eigenvalues.sum(),
        eigenvalues,
        scaling: Scaling::Eigenvalue,
    })
}

/// Kernel PCA: `Ψ = V_dᵀ` with `ΨΨᵀ = I_d`; `eigenvalues` carries `Λ_d`.
pub fn kernel_pca(k: &KernelMatrix, d: usize) -> Result<Embedding> {
    check_dim(d, k.n())?;
    let eig = linalg::sym_eig(k.as_matrix())?;
    check_psd_leading(&eig, d)?;
    let eigenvalues = eig.eigenvalues.rows(0, d).into_owned();
    Ok(Embedding {
        psi: leading_rows(&eig, d),
        objective_trace: eigenvalues.sum(),
        eigenvalues,
        scaling: Scaling::Orthonormal,
    })
}

/// Kernel PCA on a graph.
///
/// `Penalty` mode solves with `K − γ L_G` and requires the `Identity` graph
/// kernel; `Reward` mode solves with `K + γ r†(L_G)`.
pub fn gkpca(
    k: &KernelMatrix,
    g: &GraphSpec,
    gspec: &GraphKernelSpec,
    gamma: f64,
    d: usize,
    mode: RegularizerMode,
) -> Result<Embedding> {
    check_gamma("gamma", gamma)?;
    if g.n_nodes() != k.n() {
        return Err(Error::dim(format!(
            "graph has {} nodes but the kernel is {}x{}",
            g.n_nodes(),
            k.n(),
            k.n()
        )));
    }
    let m = match mode {
        RegularizerMode::Penalty => {
            if *gspec != GraphKernelSpec::Identity {
                return Err(Error::param("penalty mode takes the raw Laplacian (identity graph kernel)"));
            }
            effective_matrix(k.as_matrix(), &[(-gamma, &graphs::laplacian(g))])?
        }
        RegularizerMode::Reward => {
            let r = graphs::graph_kernel(g, gspec)?;
            effective_matrix(k.as_matrix(), &[(gamma, r.as_matrix())])?
        }
    };
    top_eigen_embedding(&m, d)
}

fn traces(psi: &DMatrix<f64>, mats: &[&DMatrix<f64>]) -> Result<Vec<f64>> {
    let n = psi.ncols();
    mats.iter()
        .enumerate()
        .map(|(i, m)| {
            check_square(&format!("matrix {i}"), m, n)?;
            let t = linalg::trace_form(psi, m);
            if !t.is_finite() {
                return Err(Error::InvalidMatrix(format!("trace {i} is not finite")));
            }
            Ok(t)
        })
        .collect()
}

fn closed_form_weights(traces: &[f64]) -> Result<MixtureWeights> {
    if traces.is_empty() {
        return Err(Error::dim("at least one matrix is required"));
    }
    // Traces of PSD forms are nonnegative; clip roundoff below zero.
    let t: Vec<f64> = traces.iter().map(|&v| v.max(0.0)).collect();
    let norm = t.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(Error::DegenerateMixture);
    }
    Ok(MixtureWeights(t.iter().map(|v| v / norm).collect()))
}

/// Closed-form kernel weights `θ_q ∝ tr(Ψ K^(q) Ψᵀ)`, `‖θ‖₂ = 1`.
pub fn update_theta(psi: &Embedding, kernels: &[KernelMatrix]) -> Result<MixtureWeights> {
    let mats: Vec<&DMatrix<f64>> = kernels.iter().map(|k| k.as_matrix()).collect();
    closed_form_weights(&traces(&psi.psi, &mats)?)
}

/// Closed-form graph weights `β_ℓ ∝ tr(Ψ r†(L^ℓ) Ψᵀ)`, `‖β‖₂ = 1`.
pub fn update_beta(psi: &Embedding, graph_kernels: &[KernelMatrix]) -> Result<MixtureWeights> {
    update_theta(psi, graph_kernels)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GmkpcaOptions {
    pub max_iter: usize,
    /// Stop once the absolute objective change drops below this.
    pub tol: f64,
}

impl Default for GmkpcaOptions {
    fn default() -> Self {
        GmkpcaOptions {
            max_iter: 100,
            tol: 1e-8,
        }
    }
}

#[derive(Debug, Clone)]
pub struct GmkpcaResult {
    pub embedding: Embedding,
    pub theta: MixtureWeights,
    /// `None` when no graph kernels were given.
    pub beta: Option<MixtureWeights>,
    /// Minimized objective `−tr(Ψ M(θ, β) Ψᵀ)` after each outer iteration;
    /// nonincreasing.
    pub objective_history: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// Multi-kernel PCA on one or more graphs by alternating optimization.
///
/// Each outer iteration takes `Ψ` as the top-`d` eigenvectors of
/// `Σ θ_q K^(q) + γ Σ β_ℓ r†(L^ℓ)`, then refreshes `θ` and (for two or more
/// graphs) `β` in closed form. Every block update is a global optimum of its
/// subproblem, so the objective never gets worse.
pub fn gmkpca(
    kernels: &[KernelMatrix],
    graph_kernels: &[KernelMatrix],
    gamma: f64,
    d: usize,
    opts: GmkpcaOptions,
) -> Result<GmkpcaResult> {
    if kernels.is_empty() {
        return Err(Error::dim("gmkpca needs at least one kernel"));
    }
    if opts.max_iter == 0 {
        return Err(Error::param("max_iter must be >= 1"));
    }
    check_gamma("gamma", gamma)?;
    let n = kernels[0].n();
    check_dim(d, n)?;
    for (i, k) in kernels.iter().chain(graph_kernels).enumerate() {
        check_square(&format!("kernel {i}"), k.as_matrix(), n)?;
    }

    let mut theta = MixtureWeights::uniform(kernels.len());
    let mut beta = (!graph_kernels.is_empty()).then(|| MixtureWeights::uniform(graph_kernels.len()));

    let assemble = |theta: &MixtureWeights, beta: &Option<MixtureWeights>| -> DMatrix<f64> {
        let mut m = DMatrix::<f64>::zeros(n, n);
        for (k, &w) in kernels.iter().zip(theta.as_slice()) {
            m.zip_apply(k.as_matrix(), |a, b| *a += w * b);
        }
        if let Some(beta) = beta {
            for (r, &w) in graph_kernels.iter().zip(beta.as_slice()) {
                m.zip_apply(r.as_matrix(), |a, b| *a += gamma * w * b);
            }
        }
        m
    };

    let mut history = Vec::new();
    let mut embedding = None;
    let mut converged = false;
    for _ in 0..opts.max_iter {
        let emb = top_eigen_embedding(&assemble(&theta, &beta), d)?;
        theta = update_theta(&emb, kernels)?;
        if graph_kernels.len() > 1 {
            beta = Some(update_beta(&emb, graph_kernels)?);
        }
        let objective = -linalg::trace_form(&emb.psi, &assemble(&theta, &beta));
        embedding = Some(emb);
        let done = history
            .last()
            .is_some_and(|&prev: &f64| (prev - objective).abs() < opts.tol);
        history.push(objective);
        if done {
            converged = true;
            break;
        }
    }
    let mut embedding = embedding.expect("max_iter >= 1");
    embedding.objective_trace = -history.last().copied().unwrap_or(0.0);
    Ok(GmkpcaResult {
        embedding,
        theta,
        beta,
        iterations: history.len(),
        objective_history: history,
        converged,
    })
}

/// Embedding of a multiplex graph: top-`d` eigenvectors of `Σ_m r†(L^m)`.
pub fn multimodal_embed(graph_kernels: &[KernelMatrix], d: usize) -> Result<Embedding> {
    let first = graph_kernels
        .first()
        .ok_or_else(|| Error::dim("at least one graph layer is required"))?;
    let n = first.n();
    let mut m = DMatrix::zeros(n, n);
    for (i, r) in graph_kernels.iter().enumerate() {
        check_square(&format!("layer {i}"), r.as_matrix(), n)?;
        m += r.as_matrix();
    }
    top_eigen_embedding(&m, d)
}

/// Semi-supervised embedding: top-`d` eigenvectors of
/// `K − γ₁ L^S + γ₂ L^D` for must-link (`S`) and cannot-link (`D`) Laplacians.
pub fn semisupervised_embed(
    k: &KernelMatrix,
    must_link_laplacian: &DMatrix<f64>,
    cannot_link_laplacian: &DMatrix<f64>,
    gamma1: f64,
    gamma2: f64,
    d: usize,
) -> Result<Embedding> {
    check_gamma("gamma1", gamma1)?;
    check_gamma("gamma2", gamma2)?;
    let m = effective_matrix(
        k.as_matrix(),
        &[(-gamma1, must_link_laplacian), (gamma2, cannot_link_laplacian)],
    )?;
    top_eigen_embedding(&m, d)
}
