//! Local linear embedding (LLE) and its polynomial generalization.
//!
//! Both methods reconstruct every sample from its Euclidean neighbors,
//! collect the reconstruction weights in an `N×N` matrix `W`, and embed with
//! the spectrum of `(I − W)(I − W)ᵀ`. The local nonlinear variant links
//! neighbors through order-`P` polynomials fitted coordinate-wise with an
//! `ℓ1` penalty, and may add a graph smoothness penalty to the induced kernel.

pub mod prox;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graphs::{self, GraphSpec};
use crate::kernels::KernelMatrix;
use crate::linalg::{self, DEFAULT_PINV_TOL};
use crate::par;
use crate::spectral::{self, Embedding, Scaling};

/// Ridge added to singular local Gram systems, relative to `tr(G)/k`.
pub const DEFAULT_LLE_RIDGE: f64 = 1e-9;

/// Reconstruction weights `W` (column `j` reconstructs sample `j`).
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborhoodWeights {
    pub w: DMatrix<f64>,
    pub neighbor_sets: Vec<Vec<usize>>,
}

impl NeighborhoodWeights {
    pub fn n(&self) -> usize {
        self.w.nrows()
    }
}

/// Indices of the `k` nearest columns of `y` to each column, nearest first.
/// Ties go to the lower index; a sample is never its own neighbor.
pub fn euclidean_knn(y: &DMatrix<f64>, k: usize) -> Result<Vec<Vec<usize>>> {
    let n = y.ncols();
    if k == 0 || k >= n {
        return Err(Error::param(format!("k must satisfy 1 <= k < N = {n}, got {k}")));
    }
    let sq_norms: Vec<f64> = y.column_iter().map(|c| c.norm_squared()).collect();
    let gram = y.transpose() * y;
    Ok(par::map_indices(n, |j| {
        let mut dist: Vec<(f64, usize)> = (0..n)
            .filter(|&i| i != j)
            .map(|i| {
                // Exact differences keep duplicate points at distance 0.
                let d = if sq_norms[i] + sq_norms[j] < 1e6 * f64::EPSILON {
                    (y.column(i) - y.column(j)).norm_squared()
                } else {
                    (sq_norms[i] + sq_norms[j] - 2.0 * gram[(i, j)]).max(0.0)
                };
                (d, i)
            })
            .collect();
        dist.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        dist.truncate(k);
        dist.into_iter().map(|(_, i)| i).collect()
    }))
}

/// LLE reconstruction weights with the default ridge.
pub fn lle_weights(y: &DMatrix<f64>, k: usize) -> Result<NeighborhoodWeights> {
    lle_weights_with_ridge(y, k, DEFAULT_LLE_RIDGE)
}

/// Per column `j`, minimizes `‖y_j − Σ_{i∈N_j} w_ij y_i‖²` subject to
/// `Σ_i w_ij = 1` through the local Gram system `(G + ρI) w = 1` followed by
/// normalization, where `ρ = ridge · tr(G)/k`.
pub fn lle_weights_with_ridge(y: &DMatrix<f64>, k: usize, ridge: f64) -> Result<NeighborhoodWeights> {
    if !(ridge > 0.0) {
        return Err(Error::param(format!("ridge must be > 0, got {ridge}")));
    }
    let n = y.ncols();
    let neighbor_sets = euclidean_knn(y, k)?;
    let columns: Vec<DVector<f64>> = par::map_indices(n, |j| {
        let nbrs = &neighbor_sets[j];
        let mut z = DMatrix::zeros(y.nrows(), k);
        for (a, &i) in nbrs.iter().enumerate() {
            z.set_column(a, &(y.column(i) - y.column(j)));
        }
        let mut g = z.transpose() * z;
        let trace = g.trace();
        let rho = if trace > 0.0 { ridge * trace / k as f64 } else { ridge };
        for a in 0..k {
            g[(a, a)] += rho;
        }
        let ones = DVector::from_element(k, 1.0);
        let w = match g.clone().cholesky() {
            Some(ch) => ch.solve(&ones),
            None => g.lu().solve(&ones).unwrap_or_else(|| ones.clone()),
        };
        let s = w.sum();
        if s != 0.0 && s.is_finite() {
            w / s
        } else {
            DVector::from_element(k, 1.0 / k as f64)
        }
    });
    let mut w = DMatrix::zeros(n, n);
    for (j, col) in columns.iter().enumerate() {
        for (a, &i) in neighbor_sets[j].iter().enumerate() {
            w[(i, j)] = col[a];
        }
    }
    Ok(NeighborhoodWeights { w, neighbor_sets })
}

/// `(I − W)(I − W)ᵀ`.
pub fn reconstruction_operator(w: &DMatrix<f64>) -> DMatrix<f64> {
    let n = w.nrows();
    let iw = DMatrix::identity(n, n) - w;
    let mut m = &iw * iw.transpose();
    linalg::symmetrize_in_place(&mut m);
    m
}

/// Kernel `[(I − W)(I − W)ᵀ]†` induced by reconstruction weights.
pub fn lle_kernel(w: &NeighborhoodWeights) -> Result<KernelMatrix> {
    let m = reconstruction_operator(&w.w);
    KernelMatrix::from_matrix(linalg::pseudo_inverse(&m, DEFAULT_PINV_TOL)?)
}

/// Embeds with the eigenvectors of the `d` smallest eigenvalues of
/// `(I − W)(I − W)ᵀ`. When the constant vector lies in its null space (as
/// for sum-to-one weights) it is excluded; every other mode, including
/// further zero modes, remains eligible. `Embedding::eigenvalues` holds the
/// selected eigenvalues in ascending order.
///
/// With a graph and `γ > 0`, embeds instead with the leading eigenvectors of
/// `[(I − W)(I − W)ᵀ]† − γ L_G`.
pub fn embed_from_weights(
    w: &DMatrix<f64>,
    d: usize,
    gamma: f64,
    graph: Option<&GraphSpec>,
) -> Result<Embedding> {
    let n = w.nrows();
    if w.ncols() != n {
        return Err(Error::dim("weight matrix must be square"));
    }
    if d == 0 || d >= n {
        return Err(Error::dim(format!("embedding dimension must satisfy 1 <= d < {n}, got {d}")));
    }
    if !(gamma >= 0.0) {
        return Err(Error::param(format!("gamma must be >= 0, got {gamma}")));
    }
    let m = reconstruction_operator(w);
    if let (Some(g), true) = (graph, gamma > 0.0) {
        if g.n_nodes() != n {
            return Err(Error::dim(format!("graph has {} nodes, expected {n}", g.n_nodes())));
        }
        let kernel = linalg::pseudo_inverse(&m, DEFAULT_PINV_TOL)?;
        let k_bar = spectral::effective_matrix(&kernel, &[(-gamma, &graphs::laplacian(g))])?;
        return spectral::top_eigen_embedding(&k_bar, d);
    }
    bottom_modes(&m, d)
}

/// Relative size of `‖M1‖/√N` below which the constant vector counts as a
/// null vector of `M`.
const CONSTANT_MODE_TOL: f64 = 1e-8;

fn bottom_modes(m: &DMatrix<f64>, d: usize) -> Result<Embedding> {
    let n = m.nrows();
    let scale = m.amax();
    if scale == 0.0 {
        return Err(Error::RankDeficientEmbedding {
            available: 0,
            requested: d,
        });
    }
    let ones = DVector::from_element(n, 1.0 / (n as f64).sqrt());
    let constant_null = (m * &ones).norm() <= CONSTANT_MODE_TOL * scale;
    let (target, available) = if constant_null {
        // Project onto 1⊥ and lift the constant direction above the spectrum.
        let p = DMatrix::identity(n, n) - &ones * ones.transpose();
        let mut deflated = &p * m * &p;
        let lift = 2.0 * m.norm() + 1.0;
        deflated += &ones * ones.transpose() * lift;
        (deflated, n - 1)
    } else {
        (m.clone(), n)
    };
    if d > available {
        return Err(Error::RankDeficientEmbedding { available, requested: d });
    }
    let eig = linalg::sym_eig(&target)?;
    let mut psi = DMatrix::zeros(d, n);
    let mut eigenvalues = DVector::zeros(d);
    for row in 0..d {
        let j = n - 1 - row;
        psi.set_row(row, &eig.eigenvectors.column(j).transpose());
        eigenvalues[row] = eig.eigenvalues[j].max(0.0);
    }
    Ok(Embedding {
        psi,
        objective_trace: eigenvalues.sum(),
        eigenvalues,
        scaling: Scaling::Orthonormal,
    })
}

/// Classic LLE embedding.
pub fn lle_embed(y: &DMatrix<f64>, k: usize, d: usize) -> Result<Embedding> {
    let w = lle_weights(y, k)?;
    embed_from_weights(&w.w, d, 0.0, None)
}

/// How per-pair polynomial coefficients become one scalar weight.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CollapseMode {
    /// `w_ij = Σ_p c_ij[p]`, the link function evaluated at 1.
    #[default]
    Sum,
    /// `w_ij = ‖c_ij‖₂`
    L2,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LnegOptions {
    /// Neighborhood size.
    pub k: usize,
    /// Polynomial order `P`.
    pub order: usize,
    pub l1_weight: f64,
    pub max_iter: usize,
    pub tol: f64,
    /// Scale every feature (row) to unit variance before taking powers.
    pub standardize: bool,
    pub collapse: CollapseMode,
    /// Rescale every collapsed column to sum to one.
    pub renormalize: bool,
}

impl Default for LnegOptions {
    fn default() -> Self {
        LnegOptions {
            k: 10,
            order: 2,
            l1_weight: 0.01,
            max_iter: 5000,
            tol: 1e-10,
            standardize: true,
            collapse: CollapseMode::Sum,
            renormalize: false,
        }
    }
}

/// Polynomial link coefficients `c_ij[p]`, stored per column over the
/// column's neighbor set.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyCoeffs {
    pub n: usize,
    pub order: usize,
    pub l1_weight: f64,
    pub neighbor_sets: Vec<Vec<usize>>,
    /// `coeffs[j][a * order + p]` is the order-`p+1` coefficient of neighbor
    /// `neighbor_sets[j][a]`.
    pub coeffs: Vec<Vec<f64>>,
    /// Per-feature scale applied before powering (1 where unscaled).
    pub feature_scale: Vec<f64>,
    /// Final per-column objective `‖ȳ_j − Φ_j w_j‖² + λ‖w_j‖₁`.
    pub objectives: Vec<f64>,
    pub iterations: Vec<usize>,
}

impl PolyCoeffs {
    /// Coefficient of order `p` (1-based) linking neighbor `i` to sample `j`;
    /// zero off the support.
    pub fn get(&self, i: usize, j: usize, p: usize) -> f64 {
        assert!(p >= 1 && p <= self.order);
        self.neighbor_sets[j]
            .iter()
            .position(|&x| x == i)
            .map(|a| self.coeffs[j][a * self.order + p - 1])
            .unwrap_or(0.0)
    }

    /// Number of nonzero coefficients.
    pub fn nnz(&self) -> usize {
        self.coeffs.iter().flatten().filter(|&&c| c != 0.0).count()
    }
}

fn feature_scales(y: &DMatrix<f64>) -> Vec<f64> {
    y.row_iter()
        .map(|row| {
            let mean = row.mean();
            let var = row.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / row.len() as f64;
            if var > 0.0 {
                1.0 / var.sqrt()
            } else {
                1.0
            }
        })
        .collect()
}

/// Fits the polynomial link coefficients column by column with iterative
/// shrinkage, restricted to each sample's Euclidean `k`-neighborhood.
pub fn lneg_coeffs(y: &DMatrix<f64>, opts: &LnegOptions) -> Result<PolyCoeffs> {
    let p_order = opts.order;
    if p_order == 0 {
        return Err(Error::param("polynomial order must be >= 1"));
    }
    if !(opts.l1_weight >= 0.0) || !opts.l1_weight.is_finite() {
        return Err(Error::param(format!("l1_weight must be >= 0, got {}", opts.l1_weight)));
    }
    let neighbor_sets = euclidean_knn(y, opts.k)?;
    let scale = if opts.standardize {
        feature_scales(y)
    } else {
        vec![1.0; y.nrows()]
    };
    let mut scaled = y.clone();
    for (mut row, &s) in scaled.row_iter_mut().zip(&scale) {
        row *= s;
    }
    // powers[p] holds the entrywise (p+1)-th power of the scaled data.
    let mut powers = vec![scaled.clone()];
    for p in 1..p_order {
        let next = powers[p - 1].component_mul(&scaled);
        if next.iter().any(|v| !v.is_finite()) {
            return Err(Error::Overflow { order: p_order });
        }
        powers.push(next);
    }

    let k = opts.k;
    let dim = y.nrows();
    let fits: Vec<Result<prox::IstaResult>> = par::map_indices(y.ncols(), |j| {
        let mut design = DMatrix::zeros(dim, k * p_order);
        for (a, &i) in neighbor_sets[j].iter().enumerate() {
            for (p, pw) in powers.iter().enumerate() {
                design.set_column(a * p_order + p, &pw.column(i));
            }
        }
        let target = scaled.column(j).into_owned();
        let gram = design.transpose() * &design;
        let cross = design.transpose() * &target;
        prox::ista_gram(&gram, &cross, target.norm_squared(), opts.l1_weight, opts.max_iter, opts.tol)
    });

    let mut coeffs = Vec::with_capacity(fits.len());
    let mut objectives = Vec::with_capacity(fits.len());
    let mut iterations = Vec::with_capacity(fits.len());
    for fit in fits {
        let fit = fit?;
        objectives.push(fit.objective());
        iterations.push(fit.iterations);
        coeffs.push(fit.coeffs.as_slice().to_vec());
    }
    Ok(PolyCoeffs {
        n: y.ncols(),
        order: p_order,
        l1_weight: opts.l1_weight,
        neighbor_sets,
        coeffs,
        feature_scale: scale,
        objectives,
        iterations,
    })
}

/// Collapses polynomial coefficients into an `N×N` weight matrix.
pub fn collapse_coeffs(c: &PolyCoeffs, mode: CollapseMode, renormalize: bool) -> NeighborhoodWeights {
    let n = c.n;
    let mut w = DMatrix::zeros(n, n);
    for (j, nbrs) in c.neighbor_sets.iter().enumerate() {
        for (a, &i) in nbrs.iter().enumerate() {
            let block = &c.coeffs[j][a * c.order..(a + 1) * c.order];
            w[(i, j)] = match mode {
                CollapseMode::Sum => block.iter().sum(),
                CollapseMode::L2 => block.iter().map(|v| v * v).sum::<f64>().sqrt(),
            };
        }
        if renormalize {
            let s: f64 = w.column(j).sum();
            if s != 0.0 {
                w.column_mut(j).scale_mut(1.0 / s);
            }
        }
    }
    NeighborhoodWeights {
        w,
        neighbor_sets: c.neighbor_sets.clone(),
    }
}

/// Local nonlinear embedding, optionally regularized over a graph.
///
/// `γ = 0` or no graph gives the ungraphed embedding.
pub fn lneg_embed(
    y: &DMatrix<f64>,
    opts: &LnegOptions,
    d: usize,
    gamma: f64,
    graph: Option<&GraphSpec>,
) -> Result<Embedding> {
    let coeffs = lneg_coeffs(y, opts)?;
    let w = collapse_coeffs(&coeffs, opts.collapse, opts.renormalize);
    embed_from_weights(&w.w, d, gamma, graph)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dmatrix;

    #[test]
    fn midpoint_weights() {
        let y = dmatrix![0.0, 1.0, 2.0; 0.0, 1.0, 2.0];
        let w = lle_weights(&y, 2).unwrap();
        assert!((w.w[(0, 1)] - 0.5).abs() < 1e-8);
        assert!((w.w[(2, 1)] - 0.5).abs() < 1e-8);
        assert_eq!(w.w[(1, 1)], 0.0);
    }

    #[test]
    fn exact_match_single_neighbor() {
        let y = dmatrix![0.0, 5.0, 0.0; 1.0, 2.0, 1.0];
        let w = lle_weights(&y, 1).unwrap();
        assert_eq!(w.neighbor_sets[0], vec![2]);
        assert!((w.w[(2, 0)] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn affine_combination_weights() {
        // y_2 = 0.3 y_0 + 0.7 y_1, with a far-away fourth point.
        let ya = [1.0, 0.0];
        let yb = [0.0, 2.0];
        let yj = [0.3 * ya[0] + 0.7 * yb[0], 0.3 * ya[1] + 0.7 * yb[1]];
        let y = dmatrix![ya[0], yb[0], yj[0], 40.0; ya[1], yb[1], yj[1], 40.0];
        let w = lle_weights(&y, 2).unwrap();
        assert!((w.w[(0, 2)] - 0.3).abs() < 1e-8);
        assert!((w.w[(1, 2)] - 0.7).abs() < 1e-8);
    }

    #[test]
    fn duplicates_are_allowed() {
        let y = dmatrix![1.0, 1.0, 1.0, 3.0; 2.0, 2.0, 2.0, 0.0];
        let w = lle_weights(&y, 2).unwrap();
        for j in 0..4 {
            assert!((w.w.column(j).sum() - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn lle_kernel_examples() {
        let nw = NeighborhoodWeights {
            w: dmatrix![0.0, 1.0; 1.0, 0.0],
            neighbor_sets: vec![vec![1], vec![0]],
        };
        let k = lle_kernel(&nw).unwrap();
        assert!((k.as_matrix() - dmatrix![1.0, -1.0; -1.0, 1.0] / 8.0).amax() < 1e-14);

        let id = NeighborhoodWeights {
            w: DMatrix::identity(3, 3),
            neighbor_sets: vec![vec![]; 3],
        };
        assert_eq!(lle_kernel(&id).unwrap().as_matrix(), &DMatrix::zeros(3, 3));
    }

    #[test]
    fn lle_kernel_drops_constant_mode() {
        let y = dmatrix![0.0, 1.0, 2.5, 3.0, 4.2, 6.0; 0.0, 0.3, -0.2, 1.0, 0.1, 0.5];
        let w = lle_weights(&y, 2).unwrap();
        let k = lle_kernel(&w).unwrap();
        let ones = DVector::from_element(6, 1.0);
        assert!((k.as_matrix() * ones).amax() < 1e-6 * k.as_matrix().amax());
    }

    #[test]
    fn collinear_three_points() {
        let y = dmatrix![0.0, 1.0, 2.0; 0.0, 0.0, 0.0];
        let emb = lle_embed(&y, 2, 1).unwrap();
        let s = 1.0 / 2f64.sqrt();
        let expected = dmatrix![-s, 0.0, s];
        assert!(linalg::projector_distance(&emb.psi, &expected) < 1e-8);
    }

    #[test]
    fn rank_deficient_embedding() {
        let y = dmatrix![0.0, 1.0, 2.0; 0.0, 0.0, 0.0];
        assert!(lle_embed(&y, 2, 2).is_ok());
        let id = DMatrix::identity(3, 3);
        let r = embed_from_weights(&id, 1, 0.0, None);
        assert!(matches!(r, Err(Error::RankDeficientEmbedding { available: 0, .. })));
    }

    #[test]
    fn affine_subspace_has_zero_residual() {
        // Points on a line in the plane; every point is an exact affine
        // combination of its two neighbors.
        let t = [0.0, 0.7, 1.1, 2.0, 2.4, 3.3, 4.0, 5.2];
        let y = DMatrix::from_fn(2, t.len(), |m, j| if m == 0 { t[j] } else { 1.0 - 0.5 * t[j] });
        let emb = lle_embed(&y, 2, 1).unwrap();
        let nw = lle_weights(&y, 2).unwrap();
        let residual = linalg::trace_form(&emb.psi, &reconstruction_operator(&nw.w));
        assert!(residual <= 1e-8, "{residual}");
    }

    #[test]
    fn exact_quadratic_relation() {
        // y_0 = y_1² entrywise; y_1 is y_0's nearest neighbor.
        let base = [0.5, 1.5, 2.5];
        let y = DMatrix::from_fn(3, 3, |m, j| match j {
            0 => base[m] * base[m],
            1 => base[m],
            _ => 10.0 + m as f64,
        });
        let opts = LnegOptions {
            k: 1,
            order: 2,
            l1_weight: 0.0,
            max_iter: 200_000,
            tol: 0.0,
            standardize: false,
            ..LnegOptions::default()
        };
        let c = lneg_coeffs(&y, &opts).unwrap();
        assert_eq!(c.neighbor_sets[0], vec![1]);
        assert!(c.get(1, 0, 1).abs() < 1e-6, "{}", c.get(1, 0, 1));
        assert!((c.get(1, 0, 2) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn overflow_detected() {
        let y = DMatrix::from_fn(2, 4, |m, j| 1e200 * (1.0 + m as f64 + j as f64));
        let opts = LnegOptions {
            k: 1,
            order: 3,
            standardize: false,
            ..LnegOptions::default()
        };
        assert!(matches!(lneg_coeffs(&y, &opts), Err(Error::Overflow { order: 3 })));
    }

    #[test]
    fn collapse_modes() {
        let c = PolyCoeffs {
            n: 2,
            order: 2,
            l1_weight: 0.0,
            neighbor_sets: vec![vec![1], vec![0]],
            coeffs: vec![vec![0.5, 0.5], vec![0.0, 0.0]],
            feature_scale: vec![1.0],
            objectives: vec![0.0, 0.0],
            iterations: vec![0, 0],
        };
        let sum = collapse_coeffs(&c, CollapseMode::Sum, false);
        assert_eq!(sum.w[(1, 0)], 1.0);
        assert_eq!(sum.w.column(1).sum(), 0.0);
        let l2 = collapse_coeffs(&c, CollapseMode::L2, false);
        assert!((l2.w[(1, 0)] - 0.5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn collapse_is_identity_at_order_one() {
        let c = PolyCoeffs {
            n: 3,
            order: 1,
            l1_weight: 0.0,
            neighbor_sets: vec![vec![1, 2], vec![0, 2], vec![1, 0]],
            coeffs: vec![vec![0.25, 0.75], vec![-1.0, 2.0], vec![0.5, 0.5]],
            feature_scale: vec![1.0],
            objectives: vec![0.0; 3],
            iterations: vec![0; 3],
        };
        let w = collapse_coeffs(&c, CollapseMode::Sum, false);
        for j in 0..3 {
            for (a, &i) in c.neighbor_sets[j].iter().enumerate() {
                assert_eq!(w.w[(i, j)], c.coeffs[j][a]);
            }
        }
    }

    #[test]
    fn graph_off_matches_no_graph() {
        let y = DMatrix::from_fn(3, 12, |m, j| ((j * (m + 2)) as f64 * 0.37).sin() + 0.1 * m as f64);
        let opts = LnegOptions {
            k: 4,
            order: 2,
            ..LnegOptions::default()
        };
        let g = graphs::correlation_knn_graph(&y, 3).unwrap();
        let a = lneg_embed(&y, &opts, 2, 0.0, Some(&g)).unwrap();
        let b = lneg_embed(&y, &opts, 2, 0.0, None).unwrap();
        assert_eq!(a, b);
    }
}
