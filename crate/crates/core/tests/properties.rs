//! Invariants checked over random inputs.

use grad_dr::datasets;
use grad_dr::evaluation::{clustering_error, kmeans, LinearClassifier};
use grad_dr::graphs::{self, GraphKernelSpec, GraphSpec};
use grad_dr::kernels::{self, KernelMatrix, KernelSpec};
use grad_dr::linalg;
use grad_dr::lneg::{self, prox, CollapseMode, LnegOptions};
use grad_dr::spectral::{self, GmkpcaOptions, RegularizerMode};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

fn matrix(rows: std::ops::RangeInclusive<usize>, cols: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = DMatrix<f64>> {
    (rows, cols).prop_flat_map(|(r, c)| {
        prop::collection::vec(-1.0..1.0f64, r * c).prop_map(move |v| DMatrix::from_vec(r, c, v))
    })
}

fn symmetric(n: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = DMatrix<f64>> {
    n.prop_flat_map(square).prop_map(|m| &m + m.transpose())
}

fn square(n: usize) -> impl Strategy<Value = DMatrix<f64>> {
    prop::collection::vec(-1.0..1.0f64, n * n).prop_map(move |v| DMatrix::from_vec(n, n, v))
}

fn psd(n: usize, rank: usize) -> impl Strategy<Value = DMatrix<f64>> {
    prop::collection::vec(-1.0..1.0f64, n * rank).prop_map(move |v| {
        let f = DMatrix::from_vec(n, rank, v);
        &f * f.transpose()
    })
}

fn random_graph(n: usize) -> impl Strategy<Value = GraphSpec> {
    prop::collection::vec(prop_oneof![Just(0.0), 0.1..2.0f64], n * n).prop_map(move |v| {
        let mut a = DMatrix::from_fn(n, n, |i, j| if i < j { v[i * n + j] } else { 0.0 });
        a = &a + a.transpose();
        GraphSpec::new(a).unwrap()
    })
}

fn graph_kernel_specs() -> Vec<GraphKernelSpec> {
    vec![
        GraphKernelSpec::Diffusion { sigma2: 0.7 },
        GraphKernelSpec::PStepRandomWalk { a: 2.0, p: 2 },
        GraphKernelSpec::RegularizedLaplacian { sigma2: 1.3 },
        GraphKernelSpec::Bandlimited { beta: 2.0, bandwidth: 3 },
        GraphKernelSpec::Identity,
    ]
}

fn rel_err(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).norm() / b.norm().max(1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn eig_reconstructs(m in symmetric(1..=40)) {
        let e = linalg::sym_eig(&m).unwrap();
        prop_assert!(rel_err(&e.reconstruct(), &m) <= 1e-8);
    }

    #[test]
    fn spectral_apply_identity(m in symmetric(1..=30)) {
        let out = linalg::spectral_apply(&m, |l| l).unwrap();
        prop_assert!((out - &m).norm() <= 1e-8 * m.norm().max(1.0));
    }

    #[test]
    fn pinv_matches_inverse_on_pd(m in psd(12, 12)) {
        let pd = m + DMatrix::identity(12, 12);
        let pinv = linalg::pseudo_inverse(&pd, 1e-10).unwrap();
        let inv = pd.clone().try_inverse().unwrap();
        prop_assert!((pinv - &inv).norm() <= 1e-6 * inv.norm());
    }

    #[test]
    fn eig_is_bit_stable(m in symmetric(2..=25)) {
        let a = linalg::sym_eig(&m).unwrap();
        let b = linalg::sym_eig(&m).unwrap();
        prop_assert_eq!(a.eigenvalues, b.eigenvalues);
        prop_assert_eq!(a.eigenvectors, b.eigenvectors);
    }

    #[test]
    fn gram_matrices_are_psd(y in matrix(1..=6, 2..=40), s2 in 0.05..5.0f64, deg in 1u32..4, c in 0.0..2.0f64) {
        for spec in [KernelSpec::Linear, KernelSpec::Gaussian { sigma2: s2 }, KernelSpec::Polynomial { degree: deg, offset: c }] {
            let k = kernels::gram_matrix(&spec, &y).unwrap();
            prop_assert!(k.min_relative_eigenvalue().unwrap() >= -1e-8, "{:?}", spec);
        }
    }

    #[test]
    fn gaussian_entries_in_unit_interval(y in matrix(1..=4, 2..=30), s2 in 0.05..5.0f64) {
        let k = kernels::gram_matrix(&KernelSpec::Gaussian { sigma2: s2 }, &y).unwrap();
        prop_assert!(k.as_matrix().iter().all(|&v| v > 0.0 && v <= 1.0));
    }

    #[test]
    fn mixing_is_linear(a in psd(8, 3), b in psd(8, 2), t in prop::collection::vec(0.0..2.0f64, 2), s in 0.0..5.0f64) {
        let ks = [KernelMatrix::from_matrix(a).unwrap(), KernelMatrix::from_matrix(b).unwrap()];
        let base = kernels::mix_kernels(&ks, &t).unwrap();
        let scaled = kernels::mix_kernels(&ks, &[s * t[0], s * t[1]]).unwrap();
        prop_assert!((scaled.as_matrix() - base.as_matrix() * s).amax() <= 1e-12 * (1.0 + base.as_matrix().amax() * s));
    }

    #[test]
    fn centering_is_idempotent(m in psd(10, 4)) {
        let once = kernels::center_kernel(&KernelMatrix::from_matrix(m).unwrap());
        let twice = kernels::center_kernel(&once);
        prop_assert!((twice.as_matrix() - once.as_matrix()).norm() <= 1e-10 * once.as_matrix().norm().max(1.0));
    }

    #[test]
    fn laplacian_is_psd_and_kills_ones(g in random_graph(12)) {
        let l = graphs::laplacian(&g);
        let ones = DVector::from_element(12, 1.0);
        prop_assert!((&l * ones).amax() <= 1e-10);
        let e = linalg::sym_eig(&l).unwrap();
        prop_assert!(e.eigenvalues[11] >= -1e-10);
    }

    #[test]
    fn graph_kernels_are_symmetric_psd(g in random_graph(10)) {
        for spec in graph_kernel_specs() {
            // The random walk needs a ≥ λ_max(L) to stay positive.
            let spec = match spec {
                GraphKernelSpec::PStepRandomWalk { p, .. } => {
                    let lmax = linalg::sym_eig(&graphs::laplacian(&g)).unwrap().max_eigenvalue();
                    GraphKernelSpec::PStepRandomWalk { a: (lmax + 1.0).max(2.0), p }
                }
                s => s,
            };
            let r = graphs::graph_kernel(&g, &spec).unwrap();
            let m = r.as_matrix();
            prop_assert!((m - m.transpose()).amax() <= 1e-12 * m.amax().max(1.0));
            prop_assert!(r.min_relative_eigenvalue().unwrap() >= -1e-8, "{:?}", spec);
        }
    }

    #[test]
    fn knn_graph_is_symmetric_and_sparse(y in matrix(2..=5, 6..=30), k in 1usize..5) {
        prop_assume!(y.column_iter().all(|c| c.norm() > 1e-6));
        let n = y.ncols();
        let g = graphs::correlation_knn_graph(&y, k.min(n - 1)).unwrap();
        let a = g.adjacency();
        prop_assert_eq!(a, &a.transpose());
        prop_assert!(a.iter().filter(|&&v| v != 0.0).count() <= 2 * k * n);
    }

    #[test]
    fn disconnected_graph_kernel_is_block_diagonal(g1 in random_graph(5), g2 in random_graph(6)) {
        let mut a = DMatrix::zeros(11, 11);
        a.view_mut((0, 0), (5, 5)).copy_from(g1.adjacency());
        a.view_mut((5, 5), (6, 6)).copy_from(g2.adjacency());
        let g = GraphSpec::new(a).unwrap();
        for spec in graph_kernel_specs() {
            let spec = match spec {
                GraphKernelSpec::PStepRandomWalk { p, .. } => GraphKernelSpec::PStepRandomWalk { a: 30.0, p },
                // Rank-based bands split the repeated zero eigenvalue
                // across components arbitrarily.
                GraphKernelSpec::Bandlimited { .. } => continue,
                s => s,
            };
            let r = graphs::graph_kernel(&g, &spec).unwrap();
            prop_assert!(r.as_matrix().view((0, 5), (5, 6)).amax() <= 1e-10 * r.as_matrix().amax().max(1.0), "{:?}", spec);
        }
    }

    #[test]
    fn embeddings_are_orthonormal(m in psd(15, 6), g in random_graph(15), gamma in 0.0..2.0f64, d in 1usize..4) {
        let k = KernelMatrix::from_matrix(m).unwrap();
        let e = spectral::kernel_pca(&k, d).unwrap();
        prop_assert!(linalg::orthonormality_error(&e.psi) <= 1e-8);
        let e = spectral::gkpca(&k, &g, &GraphKernelSpec::Identity, gamma, d, RegularizerMode::Penalty).unwrap();
        prop_assert!(linalg::orthonormality_error(&e.psi) <= 1e-8);
        let e = spectral::gkpca(&k, &g, &GraphKernelSpec::Diffusion { sigma2: 1.0 }, gamma, d, RegularizerMode::Reward).unwrap();
        prop_assert!(linalg::orthonormality_error(&e.psi) <= 1e-8);
    }

    #[test]
    fn gkpca_without_graph_weight_is_kpca(m in psd(14, 5), g in random_graph(14), d in 1usize..4) {
        let k = KernelMatrix::from_matrix(m).unwrap();
        let base = spectral::kernel_pca(&k, d).unwrap();
        let e = linalg::sym_eig(k.as_matrix()).unwrap();
        prop_assume!(e.eigenvalues[d - 1] - e.eigenvalues[d] > 1e-6);
        for (gk, mode) in [(GraphKernelSpec::Identity, RegularizerMode::Penalty), (GraphKernelSpec::Diffusion { sigma2: 1.0 }, RegularizerMode::Reward)] {
            let emb = spectral::gkpca(&k, &g, &gk, 0.0, d, mode).unwrap();
            prop_assert!(linalg::projector_distance(&emb.psi, &base.psi) <= 1e-8);
        }
    }

    #[test]
    fn dual_pca_matches_pca(y in matrix(2..=12, 4..=30), d in 1usize..4) {
        let d = d.min(y.nrows().min(y.ncols()) - 1).max(1);
        let yc = linalg::center_columns(&y);
        let k = KernelMatrix::from_matrix(yc.transpose() * &yc).unwrap();
        let e = linalg::sym_eig(k.as_matrix()).unwrap();
        prop_assume!(e.eigenvalues[d - 1] - e.eigenvalues[d] > 1e-6 * e.eigenvalues[0]);
        let (p, _) = spectral::pca(&y, d).unwrap();
        let q = spectral::dual_pca(&k, d).unwrap();
        prop_assert!(linalg::projector_distance(&p.psi, &q.psi) <= 1e-8);
    }

    #[test]
    fn theta_update_satisfies_kkt(ms in prop::collection::vec(psd(9, 3), 1..5), d in 1usize..3) {
        let ks: Vec<KernelMatrix> = ms.into_iter().map(|m| KernelMatrix::from_matrix(m).unwrap()).collect();
        let mix = kernels::mix_kernels(&ks, &vec![1.0; ks.len()]).unwrap();
        let psi = spectral::kernel_pca(&mix, d).unwrap();
        let theta = spectral::update_theta(&psi, &ks).unwrap();
        let t: Vec<f64> = ks.iter().map(|k| linalg::trace_form(&psi.psi, k.as_matrix())).collect();
        let lambda = t.iter().map(|v| v * v).sum::<f64>().sqrt();
        prop_assert!((theta.norm() - 1.0).abs() <= 1e-10);
        for (th, tr) in theta.as_slice().iter().zip(&t) {
            prop_assert!(*th >= 0.0);
            prop_assert!((lambda * th - tr).abs() <= 1e-10 * lambda.max(1.0));
        }
    }

    #[test]
    fn gmkpca_objective_is_monotone(ms in prop::collection::vec(psd(12, 4), 1..4), gs in prop::collection::vec(random_graph(12), 0..3), gamma in 0.0..1.0f64) {
        let ks: Vec<KernelMatrix> = ms.into_iter().map(|m| KernelMatrix::from_matrix(m).unwrap()).collect();
        let rs: Vec<KernelMatrix> = gs.iter().map(|g| graphs::graph_kernel(g, &GraphKernelSpec::RegularizedLaplacian { sigma2: 1.0 }).unwrap()).collect();
        let r = spectral::gmkpca(&ks, &rs, gamma, 2, GmkpcaOptions::default()).unwrap();
        for w in r.objective_history.windows(2) {
            prop_assert!(-w[1] >= -w[0] - 1e-9);
        }
    }

    #[test]
    fn kpca_subspace_is_scale_invariant(m in psd(12, 5), c in 0.01..100.0f64, d in 1usize..4) {
        let e = linalg::sym_eig(&m).unwrap();
        prop_assume!(e.eigenvalues[d - 1] - e.eigenvalues[d] > 1e-6 * e.eigenvalues[0]);
        let a = spectral::kernel_pca(&KernelMatrix::from_matrix(m.clone()).unwrap(), d).unwrap();
        let b = spectral::kernel_pca(&KernelMatrix::from_matrix(m * c).unwrap(), d).unwrap();
        prop_assert!(linalg::projector_distance(&a.psi, &b.psi) <= 1e-8);
    }

    #[test]
    fn lle_weights_sum_to_one_on_support(y in matrix(2..=4, 8..=30), k in 1usize..6) {
        let n = y.ncols();
        let w = lneg::lle_weights(&y, k.min(n - 1)).unwrap();
        for j in 0..n {
            let col = w.w.column(j);
            prop_assert!((col.sum() - 1.0).abs() <= 1e-8);
            for i in 0..n {
                if !w.neighbor_sets[j].contains(&i) {
                    prop_assert_eq!(col[i], 0.0);
                }
            }
        }
    }

    #[test]
    fn ista_is_monotone(phi in matrix(6..=15, 2..=8), t in prop::collection::vec(-1.0..1.0f64, 15), l1 in 0.0..0.5f64) {
        let target = DVector::from_iterator(phi.nrows(), t.into_iter().take(phi.nrows()));
        let r = prox::ista(&phi, &target, l1, 500, 0.0).unwrap();
        for w in r.objective_history.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-12 * w[0].abs().max(1.0));
        }
    }

    #[test]
    fn ista_without_penalty_is_least_squares(phi in matrix(12..=16, 2..=4), t in prop::collection::vec(-1.0..1.0f64, 16)) {
        let svd = phi.clone().svd(false, false);
        let smax = svd.singular_values.max();
        let smin = svd.singular_values.min();
        prop_assume!(smin > 0.3 * smax);
        let target = DVector::from_iterator(phi.nrows(), t.into_iter().take(phi.nrows()));
        let oracle = phi.clone().pseudo_inverse(1e-14).unwrap() * &target;
        let r = prox::ista(&phi, &target, 0.0, 20_000, 0.0).unwrap();
        prop_assert!((r.coeffs - oracle).amax() <= 1e-6);
    }

    #[test]
    fn first_order_collapse_is_identity(seed in 0u64..1000) {
        let y = datasets::gen_swiss_roll(25, seed).unwrap().points;
        let opts = LnegOptions { k: 4, order: 1, max_iter: 200, ..LnegOptions::default() };
        let c = lneg::lneg_coeffs(&y, &opts).unwrap();
        let w = lneg::collapse_coeffs(&c, CollapseMode::Sum, false);
        for j in 0..25 {
            for &i in &c.neighbor_sets[j] {
                prop_assert_eq!(w.w[(i, j)], c.get(i, j, 1));
            }
        }
    }

    #[test]
    fn lle_embed_is_kpca_of_lle_kernel(y in matrix(3..=4, 12..=40), k in 2usize..4, d in 1usize..3) {
        let w = lneg::lle_weights(&y, k).unwrap();
        let m = lneg::reconstruction_operator(&w.w);
        let e = linalg::sym_eig(&m).unwrap();
        let n = y.ncols();
        // Only the constant null mode; a clear gap past the d-th mode.
        prop_assume!(e.eigenvalues[n - 2] > 1e-6 * e.eigenvalues[0]);
        prop_assume!(e.eigenvalues[n - 2 - d] - e.eigenvalues[n - 1 - d] > 1e-6 * e.eigenvalues[0]);
        let a = lneg::lle_embed(&y, k, d).unwrap();
        let b = spectral::kernel_pca(&lneg::lle_kernel(&w).unwrap(), d).unwrap();
        prop_assert!(linalg::projector_distance(&a.psi, &b.psi) <= 1e-8);
    }

    #[test]
    fn generators_are_deterministic(n in 1usize..50, seed in any::<u64>()) {
        prop_assert_eq!(datasets::gen_swiss_roll(n, seed).unwrap(), datasets::gen_swiss_roll(n, seed).unwrap());
        prop_assert_eq!(datasets::gen_trefoil(n, 2.0, seed).unwrap(), datasets::gen_trefoil(n, 2.0, seed).unwrap());
        prop_assert_eq!(datasets::gen_sphere(n, 1.5, seed).unwrap(), datasets::gen_sphere(n, 1.5, seed).unwrap());
        prop_assert_eq!(datasets::gen_plane_with_hole(n, 1.0, 3.0, seed).unwrap(), datasets::gen_plane_with_hole(n, 1.0, 3.0, seed).unwrap());
    }

    #[test]
    fn noiseless_embedding_is_isometric(n1 in 1usize..20, n2 in 1usize..20, dim in 3usize..30, seed in any::<u64>()) {
        let a = datasets::gen_sphere(n1, 2.0, seed).unwrap();
        let b = datasets::gen_trefoil(n2, 1.0, seed ^ 1).unwrap();
        let e = datasets::embed_highdim(&[a, b], dim, 0.0, seed).unwrap();
        let n = n1 + n2;
        for i in 0..n {
            for j in 0..n {
                let dz = (e.z.column(i) - e.z.column(j)).norm();
                let dy = (e.y.column(i) - e.y.column(j)).norm();
                prop_assert!((dz - dy).abs() <= 1e-10 * dz.max(1.0));
            }
        }
        prop_assert_eq!(e.labels.iter().filter(|&&l| l == 0).count(), n1);
        prop_assert_eq!(e.labels.iter().filter(|&&l| l == 1).count(), n2);
        prop_assert!(e.labels.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn kmeans_descends_and_keeps_best_restart(x in matrix(2..=3, 10..=40), k in 1usize..5, seed in any::<u64>()) {
        let r = kmeans(&x, k, 4, seed).unwrap();
        for w in r.inertia_history.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-12 * w[0].max(1.0));
        }
        let best = r.restart_inertias.iter().copied().fold(f64::INFINITY, f64::min);
        prop_assert_eq!(r.inertia, best);
    }

    #[test]
    fn clustering_error_ignores_relabeling(a in prop::collection::vec(0usize..4, 1..40), l in prop::collection::vec(0usize..4, 40), perm in Just([0usize, 1, 2, 3]).prop_shuffle()) {
        let labels = &l[..a.len()];
        let relabeled: Vec<usize> = a.iter().map(|&c| perm[c]).collect();
        let e = clustering_error(&a, labels).unwrap();
        prop_assert_eq!(e, clustering_error(&relabeled, labels).unwrap());
        let identity = a.iter().zip(labels).filter(|(x, y)| x != y).count() as f64 / a.len() as f64;
        prop_assert!(e <= identity + 1e-15);
    }

    #[test]
    fn classifier_ignores_training_order(x in matrix(2..=2, 6..=20), labels in prop::collection::vec(0usize..3, 20), order in Just((0..20).collect::<Vec<usize>>()).prop_shuffle()) {
        let n = x.ncols();
        let labels = &labels[..n];
        let order: Vec<usize> = order.into_iter().filter(|&i| i < n).collect();
        let xp = DMatrix::from_fn(2, n, |r, c| x[(r, order[c])]);
        let lp: Vec<usize> = order.iter().map(|&i| labels[i]).collect();
        let a = LinearClassifier::fit(&x, labels, 1e-3).unwrap();
        let b = LinearClassifier::fit(&xp, &lp, 1e-3).unwrap();
        prop_assert!((a.weights - b.weights).amax() <= 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn sparsity_is_monotone_in_l1(seed in 0u64..1000) {
        let y = datasets::gen_swiss_roll(30, seed).unwrap().points;
        let mut prev = usize::MAX;
        for l1 in [0.0, 0.01, 0.1, 1.0, 10.0] {
            let opts = LnegOptions { k: 5, order: 2, l1_weight: l1, max_iter: 3000, ..LnegOptions::default() };
            let nnz = lneg::lneg_coeffs(&y, &opts).unwrap().nnz();
            prop_assert!(nnz <= prev, "l1={} nnz={} prev={}", l1, nnz, prev);
            prev = nnz;
        }
    }

    #[test]
    fn eig_reconstructs_at_full_size(m in square(200)) {
        let m = &m + m.transpose();
        let e = linalg::sym_eig(&m).unwrap();
        prop_assert!(rel_err(&e.reconstruct(), &m) <= 1e-8);
    }
}
