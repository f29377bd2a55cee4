//! Iterative shrinkage for `ℓ1`-regularized least squares.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg;

/// `S_t(x) = sign(x) · max(|x| − t, 0)`.
pub fn soft_threshold(x: f64, t: f64) -> f64 {
    if x > t {
        x - t
    } else if x < -t {
        x + t
    } else {
        0.0
    }
}

#[derive(Debug, Clone)]
pub struct IstaResult {
    pub coeffs: DVector<f64>,
    /// `‖t − Φw‖² + λ‖w‖₁`, starting with the value at `w = 0`.
    pub objective_history: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

impl IstaResult {
    pub fn objective(&self) -> f64 {
        self.objective_history.last().copied().unwrap_or(0.0)
    }
}

/// Minimizes `‖target − design·w‖² + l1_weight·‖w‖₁` from `w = 0`.
pub fn ista(
    design: &DMatrix<f64>,
    target: &DVector<f64>,
    l1_weight: f64,
    max_iter: usize,
    tol: f64,
) -> Result<IstaResult> {
    if design.nrows() != target.len() {
        return Err(Error::dim(format!(
            "design has {} rows, target has {} entries",
            design.nrows(),
            target.len()
        )));
    }
    let gram = design.transpose() * design;
    let cross = design.transpose() * target;
    ista_gram(&gram, &cross, target.norm_squared(), l1_weight, max_iter, tol)
}

/// [`ista`] on the normal-equation quantities `G = ΦᵀΦ`, `b = Φᵀt`,
/// `c = tᵀt`.
///
/// The smooth part `‖t − Φw‖²` has gradient `2(Gw − b)` with Lipschitz
/// constant `2λ_max(G)`, so each step is
/// `w ← S_{λ/(2L̂)}(w − (Gw − b)/L̂)` with `L̂ = λ_max(G)`. Stops when the
/// objective change falls strictly below `tol` relative to the previous value (with a
/// floor of `1e-12·c` on the denominator), or after `max_iter` steps.
pub fn ista_gram(
    gram: &DMatrix<f64>,
    cross: &DVector<f64>,
    target_sq: f64,
    l1_weight: f64,
    max_iter: usize,
    tol: f64,
) -> Result<IstaResult> {
    if !(l1_weight >= 0.0) || !l1_weight.is_finite() {
        return Err(Error::param(format!("l1_weight must be >= 0, got {l1_weight}")));
    }
    let m = gram.nrows();
    let objective = |w: &DVector<f64>| -> f64 {
        let gw = gram * w;
        target_sq - 2.0 * cross.dot(w) + w.dot(&gw) + l1_weight * w.lp_norm(1)
    };
    let mut w = DVector::zeros(m);
    let mut history = vec![target_sq];
    let lipschitz = linalg::sym_eig(gram)?.max_eigenvalue();
    if !(lipschitz > 0.0) {
        return Ok(IstaResult {
            coeffs: w,
            objective_history: history,
            iterations: 0,
            converged: true,
        });
    }
    let step = 1.0 / lipschitz;
    let threshold = l1_weight * step / 2.0;
    let floor = 1e-12 * target_sq.max(f64::MIN_POSITIVE);
    let mut converged = false;
    let mut iterations = 0;
    for _ in 0..max_iter {
        let grad = gram * &w - cross;
        let next = (&w - grad * step).map(|v| soft_threshold(v, threshold));
        let value = objective(&next);
        let prev = *history.last().expect("seeded");
        w = next;
        history.push(value);
        iterations += 1;
        if (prev - value).abs() < tol * prev.abs().max(floor) {
            converged = true;
            break;
        }
    }
    Ok(IstaResult {
        coeffs: w,
        objective_history: history,
        iterations,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{dmatrix, dvector};

    #[test]
    fn shrinkage_examples() {
        assert!((soft_threshold(1.2, 0.5) - 0.7).abs() < 1e-15);
        assert_eq!(soft_threshold(-0.3, 0.5), 0.0);
        assert!((soft_threshold(-1.0, 0.25) + 0.75).abs() < 1e-15);
    }

    #[test]
    fn unregularized_recovers_least_squares() {
        let phi = dmatrix![1.0, 0.5; 0.0, 1.0; 1.0, -1.0];
        let t = dvector![1.0, 2.0, 0.5];
        let r = ista(&phi, &t, 0.0, 100_000, 1e-15).unwrap();
        let ls = (phi.transpose() * &phi).try_inverse().unwrap() * phi.transpose() * &t;
        assert!((r.coeffs - ls).amax() < 1e-8);
    }

    #[test]
    fn objective_is_monotone() {
        let phi = dmatrix![1.0, 0.9, 0.2; 0.3, 1.0, 0.1; 0.5, 0.4, 1.0; 0.2, 0.1, 0.3];
        let t = dvector![1.0, -0.5, 0.25, 2.0];
        let r = ista(&phi, &t, 0.3, 500, 0.0).unwrap();
        assert!(r.objective_history.windows(2).all(|w| w[1] <= w[0] + 1e-12));
    }

    #[test]
    fn large_weight_gives_zero() {
        let phi = dmatrix![1.0, 0.0; 0.0, 1.0];
        let t = dvector![0.1, -0.1];
        // Zero is optimal once λ ≥ 2‖Φᵀt‖_∞.
        let r = ista(&phi, &t, 1.0, 100, 1e-12).unwrap();
        assert_eq!(r.coeffs, dvector![0.0, 0.0]);
    }

    #[test]
    fn zero_design() {
        let r = ista(&DMatrix::zeros(3, 2), &dvector![1.0, 2.0, 3.0], 0.1, 10, 1e-9).unwrap();
        assert_eq!(r.coeffs, dvector![0.0, 0.0]);
        assert_eq!(r.iterations, 0);
    }
}
