//! Graph construction, Laplacians and graph-spectral kernels.

use std::collections::HashMap;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::KernelMatrix;
use crate::linalg;

/// Weighted undirected graph on `N` nodes, stored as a dense adjacency.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphSpec {
    adjacency: DMatrix<f64>,
}

impl GraphSpec {
    /// Validates symmetry (1e-12), zero diagonal and nonnegative weights.
    pub fn new(adjacency: DMatrix<f64>) -> Result<Self> {
        let n = adjacency.nrows();
        if adjacency.ncols() != n || n == 0 {
            return Err(Error::dim(format!(
                "adjacency must be square and nonempty, got {}x{}",
                n,
                adjacency.ncols()
            )));
        }
        for j in 0..n {
            if adjacency[(j, j)] != 0.0 {
                return Err(Error::InvalidMatrix(format!("self-loop at node {j}")));
            }
            for i in 0..n {
                let a = adjacency[(i, j)];
                if !(a >= 0.0) || !a.is_finite() {
                    return Err(Error::InvalidMatrix(format!("invalid edge weight {a} at ({i}, {j})")));
                }
                if (a - adjacency[(j, i)]).abs() > 1e-12 {
                    return Err(Error::InvalidMatrix(format!("adjacency not symmetric at ({i}, {j})")));
                }
            }
        }
        Ok(GraphSpec { adjacency })
    }

    pub fn edgeless(n: usize) -> Self {
        GraphSpec {
            adjacency: DMatrix::zeros(n, n),
        }
    }

    pub fn n_nodes(&self) -> usize {
        self.adjacency.nrows()
    }

    pub fn adjacency(&self) -> &DMatrix<f64> {
        &self.adjacency
    }

    pub fn degrees(&self) -> Vec<f64> {
        self.adjacency.column_iter().map(|c| c.sum()).collect()
    }

    pub fn edge_count(&self) -> usize {
        let n = self.n_nodes();
        (0..n)
            .flat_map(|j| (0..j).map(move |i| (i, j)))
            .filter(|&(i, j)| self.adjacency[(i, j)] != 0.0)
            .count()
    }
}

/// `L = D − A`.
pub fn laplacian(g: &GraphSpec) -> DMatrix<f64> {
    let mut l = -g.adjacency.clone();
    for (i, d) in g.degrees().into_iter().enumerate() {
        l[(i, i)] = d;
    }
    l
}

fn cosine_similarities(y: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let norms: Vec<f64> = y.column_iter().map(|c| c.norm()).collect();
    if let Some(index) = norms.iter().position(|&n| n == 0.0) {
        return Err(Error::DegenerateSample { index });
    }
    let mut c = y.transpose() * y;
    let n = y.ncols();
    for j in 0..n {
        for i in 0..n {
            c[(i, j)] /= norms[i] * norms[j];
        }
    }
    linalg::symmetrize_in_place(&mut c);
    Ok(c)
}

/// Cosine-similarity graph keeping each sample's `k` most correlated
/// neighbors, symmetrized by union. Negative correlations are clamped to 0.
pub fn correlation_knn_graph(y: &DMatrix<f64>, k: usize) -> Result<GraphSpec> {
    let n = y.ncols();
    if k == 0 || k >= n {
        return Err(Error::param(format!("k must satisfy 1 <= k < N = {n}, got {k}")));
    }
    let c = cosine_similarities(y)?;
    let mut a = DMatrix::zeros(n, n);
    let mut order: Vec<usize> = Vec::with_capacity(n);
    for i in 0..n {
        order.clear();
        order.extend((0..n).filter(|&j| j != i));
        order.sort_by(|&p, &q| c[(i, q)].total_cmp(&c[(i, p)]).then(p.cmp(&q)));
        for &j in &order[..k] {
            let w = c[(i, j)].clamp(0.0, 1.0);
            a[(i, j)] = w;
            a[(j, i)] = w;
        }
    }
    GraphSpec::new(a)
}

/// Dense cosine-similarity graph over all pairs, negatives clamped to 0.
pub fn correlation_graph_dense(y: &DMatrix<f64>) -> Result<GraphSpec> {
    let mut c = cosine_similarities(y)?;
    c.apply(|v| *v = v.clamp(0.0, 1.0));
    c.fill_diagonal(0.0);
    GraphSpec::new(c)
}

/// Must-link and cannot-link graphs from index pairs (0-based).
pub fn constraint_graphs(
    must_link: &[(usize, usize)],
    cannot_link: &[(usize, usize)],
    n: usize,
) -> Result<(GraphSpec, GraphSpec)> {
    let key = |(i, j): (usize, usize)| (i.min(j), i.max(j));
    let build = |pairs: &[(usize, usize)]| -> Result<DMatrix<f64>> {
        let mut a = DMatrix::zeros(n, n);
        for &(i, j) in pairs {
            if i >= n || j >= n || i == j {
                return Err(Error::param(format!(
                    "constraint pair ({i}, {j}) must hold distinct indices below {n}"
                )));
            }
            a[(i, j)] = 1.0;
            a[(j, i)] = 1.0;
        }
        Ok(a)
    };
    let must: std::collections::HashSet<_> = must_link.iter().copied().map(key).collect();
    if let Some(&(i, j)) = cannot_link.iter().find(|&&p| must.contains(&key(p))) {
        return Err(Error::InconsistentConstraints(i, j));
    }
    Ok((GraphSpec::new(build(must_link)?)?, GraphSpec::new(build(cannot_link)?)?))
}

/// Spectral weight function `r(λ)` of a graph kernel `r†(L) = U r†(Λ) Uᵀ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GraphKernelSpec {
    /// `r(λ) = exp(σ²λ/2)`
    Diffusion { sigma2: f64 },
    /// `r(λ) = (a − λ)^(−p)`
    PStepRandomWalk { a: f64, p: u32 },
    /// `r(λ) = 1 + σ²λ`
    RegularizedLaplacian { sigma2: f64 },
    /// `r = 1/β` on the `bandwidth` smallest eigenvalues, `β` elsewhere.
    Bandlimited { beta: f64, bandwidth: usize },
    /// The Laplacian itself stands in for `r†(L)`.
    Identity,
}

impl GraphKernelSpec {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            GraphKernelSpec::Diffusion { sigma2 } | GraphKernelSpec::RegularizedLaplacian { sigma2 } => {
                sigma2 >= 0.0 && sigma2.is_finite()
            }
            GraphKernelSpec::PStepRandomWalk { a, p } => a >= 2.0 && a.is_finite() && p >= 1,
            GraphKernelSpec::Bandlimited { beta, bandwidth } => beta > 0.0 && beta.is_finite() && bandwidth > 0,
            GraphKernelSpec::Identity => true,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::param(format!("invalid graph kernel parameters: {self:?}")))
        }
    }

    /// `r(λ)` for the eigenvalue of ascending rank `rank` (0-based).
    pub fn weight(&self, lambda: f64, rank: usize) -> f64 {
        match *self {
            GraphKernelSpec::Diffusion { sigma2 } => (sigma2 * lambda / 2.0).exp(),
            GraphKernelSpec::PStepRandomWalk { a, p } => (a - lambda).powi(-(p as i32)),
            GraphKernelSpec::RegularizedLaplacian { sigma2 } => 1.0 + sigma2 * lambda,
            GraphKernelSpec::Bandlimited { beta, bandwidth } => {
                if rank < bandwidth {
                    1.0 / beta
                } else {
                    beta
                }
            }
            GraphKernelSpec::Identity => lambda,
        }
    }
}

/// Graph kernel `r†(L_G)`.
///
/// Each Laplacian eigenvalue maps to `1/r(λ)`, or to 0 where `r` is not
/// finite. The `Identity` kind returns `L_G` unchanged.
pub fn graph_kernel(g: &GraphSpec, spec: &GraphKernelSpec) -> Result<KernelMatrix> {
    spec.validate()?;
    let l = laplacian(g);
    if let GraphKernelSpec::Identity = spec {
        return KernelMatrix::from_matrix(l);
    }
    let eig = linalg::sym_eig(&l)?;
    let n = eig.dim();
    let mut values = vec![0.0; n];
    // Descending storage: column j has ascending rank n-1-j.
    for (j, value) in values.iter_mut().enumerate() {
        let lambda = eig.eigenvalues[j].max(0.0);
        let r = spec.weight(lambda, n - 1 - j);
        if r == 0.0 {
            return Err(Error::SingularGraphKernel { eigenvalue: lambda });
        }
        *value = if r.is_finite() { 1.0 / r } else { 0.0 };
    }
    KernelMatrix::from_matrix(linalg::compose(&eig.eigenvectors, &values))
}

/// Reads an edge list: one `i j weight` triple per line, 0-based indices.
///
/// Every edge is inserted both ways; repeated listings of the same edge must
/// agree within 1e-12. Blank lines and `#` comments are skipped. `n_nodes`
/// defaults to one past the largest index.
pub fn load_edge_list(path: &Path, n_nodes: Option<usize>) -> Result<GraphSpec> {
    let reader = BufReader::new(std::fs::File::open(path)?);
    let mut edges: HashMap<(usize, usize), f64> = HashMap::new();
    let mut max_index = 0usize;
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let text = line.split('#').next().unwrap_or("").trim();
        if text.is_empty() {
            continue;
        }
        let fields: Vec<&str> = text.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(Error::Format(format!(
                "line {}: expected `i j weight`, got {} fields",
                lineno + 1,
                fields.len()
            )));
        }
        let parse_index = |col: usize| -> Result<usize> {
            fields[col].parse().map_err(|_| Error::Parse {
                row: lineno + 1,
                column: col + 1,
                message: format!("invalid node index `{}`", fields[col]),
            })
        };
        let i = parse_index(0)?;
        let j = parse_index(1)?;
        let w: f64 = fields[2].parse().map_err(|_| Error::Parse {
            row: lineno + 1,
            column: 3,
            message: format!("invalid weight `{}`", fields[2]),
        })?;
        if i == j {
            return Err(Error::Format(format!("line {}: self-loop at node {i}", lineno + 1)));
        }
        let key = (i.min(j), i.max(j));
        if let Some(&prev) = edges.get(&key) {
            if (prev - w).abs() > 1e-12 {
                return Err(Error::Format(format!(
                    "line {}: edge ({i}, {j}) listed with weights {prev} and {w}",
                    lineno + 1
                )));
            }
        }
        edges.insert(key, w);
        max_index = max_index.max(key.1);
    }
    let n = n_nodes.unwrap_or(if edges.is_empty() { 0 } else { max_index + 1 });
    if !edges.is_empty() && max_index >= n {
        return Err(Error::Format(format!("node index {max_index} out of range for {n} nodes")));
    }
    let mut a = DMatrix::zeros(n, n);
    for ((i, j), w) in edges {
        a[(i, j)] = w;
        a[(j, i)] = w;
    }
    GraphSpec::new(a)
}

/// Writes the upper triangle of the adjacency as an edge list.
pub fn save_edge_list(path: &Path, g: &GraphSpec) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    let a = g.adjacency();
    for j in 0..g.n_nodes() {
        for i in 0..j {
            if a[(i, j)] != 0.0 {
                writeln!(out, "{i} {j} {:.17e}", a[(i, j)])?;
            }
        }
    }
    out.flush()?;
    Ok(())
}
