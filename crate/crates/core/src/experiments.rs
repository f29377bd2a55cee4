//! End-to-end experiment pipelines shared by the CLI and the acceptance
//! suite.

use std::time::Instant;

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::datasets::{self, EmbeddedDataset};
use crate::error::{Error, Result};
use crate::evaluation::{self, LinearClassifier, Metrics, MonteCarloSummary};
use crate::graphs;
use crate::kernels::{self, KernelSpec};
use crate::lneg::{self, CollapseMode, LnegOptions};
use crate::spectral;

/// Two-manifold clustering scenarios.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    PlaneHoleTrefoil,
    SphereTrefoil,
}

impl Scenario {
    pub const ALL: [Scenario; 2] = [Scenario::PlaneHoleTrefoil, Scenario::SphereTrefoil];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::PlaneHoleTrefoil => "plane-hole-trefoil",
            Scenario::SphereTrefoil => "sphere-trefoil",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Table3Method {
    Pca,
    Lle,
    Lne,
    Lneg,
}

impl Table3Method {
    pub const ALL: [Table3Method; 4] = [
        Table3Method::Pca,
        Table3Method::Lle,
        Table3Method::Lne,
        Table3Method::Lneg,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Table3Method::Pca => "pca",
            Table3Method::Lle => "lle",
            Table3Method::Lne => "lne",
            Table3Method::Lneg => "lneg",
        }
    }
}

/// Shapes and sizes of the two-manifold datasets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Geometry {
    pub plane_extent: f64,
    pub hole_radius: f64,
    pub sphere_radius: f64,
    /// Height of the sphere's center above the trefoil's plane.
    pub sphere_lift: f64,
    pub trefoil_scale: f64,
}

impl Default for Geometry {
    fn default() -> Self {
        Geometry {
            plane_extent: 18.0,
            hole_radius: 15.0,
            sphere_radius: 3.0,
            sphere_lift: 7.0,
            trefoil_scale: 3.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table3Config {
    pub trials: usize,
    pub seed: u64,
    pub ks: Vec<usize>,
    pub n1: usize,
    pub n2: usize,
    pub ambient_dim: usize,
    pub noise_sigma2: f64,
    pub d: usize,
    pub gamma: f64,
    pub l1_weight: f64,
    /// Rescale collapsed LNE/LNEG weight columns to sum to one.
    pub renormalize: bool,
    /// Iteration cap of the coefficient solver.
    pub max_iter: usize,
    pub plane_order: usize,
    pub sphere_order: usize,
    pub kmeans_restarts: usize,
    pub geometry: Geometry,
}

impl Default for Table3Config {
    fn default() -> Self {
        Table3Config {
            trials: 10,
            seed: 1,
            ks: vec![5, 10, 20, 30, 40],
            n1: 200,
            n2: 400,
            ambient_dim: 100,
            noise_sigma2: 0.01,
            d: 2,
            gamma: 0.1,
            l1_weight: 0.01,
            renormalize: true,
            max_iter: 2000,
            plane_order: 2,
            sphere_order: 3,
            kmeans_restarts: 50,
            geometry: Geometry::default(),
        }
    }
}

impl Table3Config {
    pub fn order(&self, scenario: Scenario) -> usize {
        match scenario {
            Scenario::PlaneHoleTrefoil => self.plane_order,
            Scenario::SphereTrefoil => self.sphere_order,
        }
    }
}

/// Generates a two-manifold dataset in `ℝ^D` (label 0 for the first manifold,
/// 1 for the trefoil).
pub fn scenario_dataset(scenario: Scenario, cfg: &Table3Config, seed: u64) -> Result<EmbeddedDataset> {
    let g = &cfg.geometry;
    let first = match scenario {
        Scenario::PlaneHoleTrefoil => {
            datasets::gen_plane_with_hole(cfg.n1, g.hole_radius, g.plane_extent, seed.wrapping_mul(3))?
        }
        Scenario::SphereTrefoil => {
            datasets::gen_sphere(cfg.n1, g.sphere_radius, seed.wrapping_mul(3))?.shifted([0.0, 0.0, g.sphere_lift])
        }
    };
    let trefoil = datasets::gen_trefoil(cfg.n2, g.trefoil_scale, seed.wrapping_mul(3).wrapping_add(1))?;
    datasets::embed_highdim(
        &[first, trefoil],
        cfg.ambient_dim,
        cfg.noise_sigma2,
        seed.wrapping_mul(3).wrapping_add(2),
    )
}

pub fn cell_key(method: Table3Method, k: Option<usize>) -> String {
    match k {
        Some(k) => format!("{}@k={k}", method.name()),
        None => method.name().to_string(),
    }
}

fn cluster_error(psi: &DMatrix<f64>, labels: &[usize], restarts: usize, seed: u64) -> Result<f64> {
    let c = evaluation::kmeans(psi, 2, restarts, seed)?;
    evaluation::clustering_error(&c.assignments, labels)
}

/// One trial of the clustering comparison: PCA once, then LLE, LNE and LNEG
/// for every neighborhood size. LNE and LNEG share the fitted coefficients.
pub fn table3_trial(scenario: Scenario, cfg: &Table3Config, seed: u64) -> Result<Metrics> {
    let data = scenario_dataset(scenario, cfg, seed)?;
    let y = &data.y;
    let km_seed = seed.wrapping_add(0x9e37_79b9);
    let mut out = Metrics::new();
    let (pca, _) = spectral::pca(y, cfg.d)?;
    out.insert(
        cell_key(Table3Method::Pca, None),
        cluster_error(&pca.psi, &data.labels, cfg.kmeans_restarts, km_seed)?,
    );
    let graph = graphs::correlation_graph_dense(y)?;
    for &k in &cfg.ks {
        let lle = lneg::lle_embed(y, k, cfg.d)?;
        out.insert(
            cell_key(Table3Method::Lle, Some(k)),
            cluster_error(&lle.psi, &data.labels, cfg.kmeans_restarts, km_seed)?,
        );
        let opts = LnegOptions {
            k,
            order: cfg.order(scenario),
            l1_weight: cfg.l1_weight,
            collapse: CollapseMode::Sum,
            renormalize: cfg.renormalize,
            max_iter: cfg.max_iter,
            ..LnegOptions::default()
        };
        let coeffs = lneg::lneg_coeffs(y, &opts)?;
        let w = lneg::collapse_coeffs(&coeffs, opts.collapse, opts.renormalize);
        let lne = lneg::embed_from_weights(&w.w, cfg.d, 0.0, None)?;
        out.insert(
            cell_key(Table3Method::Lne, Some(k)),
            cluster_error(&lne.psi, &data.labels, cfg.kmeans_restarts, km_seed)?,
        );
        let lneg_emb = lneg::embed_from_weights(&w.w, cfg.d, cfg.gamma, Some(&graph))?;
        out.insert(
            cell_key(Table3Method::Lneg, Some(k)),
            cluster_error(&lneg_emb.psi, &data.labels, cfg.kmeans_restarts, km_seed)?,
        );
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table3Cell {
    pub method: Table3Method,
    /// `None` for PCA, which has no neighborhood.
    pub k: Option<usize>,
    pub mean: f64,
    pub std: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table3Scenario {
    pub scenario: Scenario,
    pub cells: Vec<Table3Cell>,
    pub summary: MonteCarloSummary,
}

impl Table3Scenario {
    pub fn mean(&self, method: Table3Method, k: Option<usize>) -> f64 {
        self.summary.mean_of(&cell_key(method, k))
    }
}

pub fn table3_scenario(scenario: Scenario, cfg: &Table3Config) -> Result<Table3Scenario> {
    let summary = evaluation::monte_carlo(cfg.trials, cfg.seed, |seed| table3_trial(scenario, cfg, seed))?;
    let mut cells = vec![Table3Cell {
        method: Table3Method::Pca,
        k: None,
        mean: summary.mean_of(&cell_key(Table3Method::Pca, None)),
        std: summary.std_of(&cell_key(Table3Method::Pca, None)),
    }];
    for &k in &cfg.ks {
        for method in [Table3Method::Lle, Table3Method::Lne, Table3Method::Lneg] {
            let key = cell_key(method, Some(k));
            cells.push(Table3Cell {
                method,
                k: Some(k),
                mean: summary.mean_of(&key),
                std: summary.std_of(&key),
            });
        }
    }
    Ok(Table3Scenario {
        scenario,
        cells,
        summary,
    })
}

/// One ordinal check on the reproduced table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandCheck {
    pub scenario: Scenario,
    pub k: Option<usize>,
    pub condition: String,
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
}

fn band(scenario: Scenario, k: Option<usize>, condition: String, lhs: f64, rhs: f64) -> BandCheck {
    BandCheck {
        scenario,
        k,
        condition,
        lhs,
        rhs,
        pass: lhs <= rhs,
    }
}

/// Ordinal bands: on sphere-trefoil for `k ∈ {10, 20, 30, 40}`,
/// `LNEG ≤ LNE ≤ LLE + 0.05` and `LNEG ≤ PCA − 0.10`; on plane-hole-trefoil,
/// mean LNEG error `≤ PCA − 0.15`.
pub fn table3_bands(results: &[Table3Scenario]) -> Vec<BandCheck> {
    let mut checks = Vec::new();
    for r in results {
        let pca = r.mean(Table3Method::Pca, None);
        let ks: Vec<usize> = r
            .cells
            .iter()
            .filter_map(|c| c.k)
            .filter(|k| [10, 20, 30, 40].contains(k))
            .collect::<std::collections::BTreeSet<_>>()
            .into_iter()
            .collect();
        match r.scenario {
            Scenario::SphereTrefoil => {
                for k in ks {
                    let lneg = r.mean(Table3Method::Lneg, Some(k));
                    let lne = r.mean(Table3Method::Lne, Some(k));
                    let lle = r.mean(Table3Method::Lle, Some(k));
                    checks.push(band(r.scenario, Some(k), "lneg <= lne".into(), lneg, lne));
                    checks.push(band(r.scenario, Some(k), "lne <= lle + 0.05".into(), lne, lle + 0.05));
                    checks.push(band(r.scenario, Some(k), "lneg <= pca - 0.10".into(), lneg, pca - 0.10));
                }
            }
            Scenario::PlaneHoleTrefoil => {
                let lneg: Vec<f64> = r
                    .cells
                    .iter()
                    .filter(|c| c.method == Table3Method::Lneg)
                    .map(|c| c.mean)
                    .collect();
                let mean = lneg.iter().sum::<f64>() / lneg.len().max(1) as f64;
                checks.push(band(r.scenario, None, "mean lneg <= pca - 0.15".into(), mean, pca - 0.15));
            }
        }
    }
    checks
}

/// A named inequality between two reported numbers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub condition: String,
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
}

impl Comparison {
    fn at_most(condition: String, lhs: f64, rhs: f64) -> Self {
        Comparison {
            condition,
            pass: lhs <= rhs,
            lhs,
            rhs,
        }
    }

    fn greater(condition: String, lhs: f64, rhs: f64) -> Self {
        Comparison {
            condition,
            pass: lhs > rhs,
            lhs,
            rhs,
        }
    }
}

/// Label-fraction sweep on a two-class Gaussian mixture.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SemisupConfig {
    pub trials: usize,
    pub seed: u64,
    pub n_per_class: usize,
    pub dim: usize,
    pub separation: f64,
    pub noise_std: f64,
    pub sigma2: f64,
    pub fractions: Vec<f64>,
    pub gamma1: f64,
    pub gamma2: f64,
    pub d: usize,
    pub ridge: f64,
}

impl Default for SemisupConfig {
    fn default() -> Self {
        SemisupConfig {
            trials: 20,
            seed: 1,
            n_per_class: 200,
            dim: 50,
            separation: 0.25,
            noise_std: 0.1,
            sigma2: 1.0,
            fractions: vec![0.05, 0.2, 0.5],
            gamma1: 0.5,
            gamma2: 0.5,
            d: 2,
            ridge: 1e-3,
        }
    }
}

/// One trial: labels revealed on a random fraction `p` of the samples feed
/// must-link / cannot-link graphs; the classifier trains on the revealed
/// samples' embeddings and is scored on the rest.
pub fn semisup_trial(cfg: &SemisupConfig, seed: u64) -> Result<Metrics> {
    let (y, labels) = datasets::gen_gaussian_mixture(
        &[cfg.n_per_class, cfg.n_per_class],
        cfg.dim,
        cfg.separation,
        cfg.noise_std,
        seed,
    )?;
    let n = labels.len();
    let k = kernels::center_kernel(&kernels::gram_matrix(&KernelSpec::gaussian(cfg.sigma2)?, &y)?);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut datasets::rng(seed.wrapping_add(0x5eed)));
    let mut out = Metrics::new();
    for &p in &cfg.fractions {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::param(format!("label fraction must lie in (0, 1), got {p}")));
        }
        let m = ((p * n as f64).round() as usize).clamp(2, n - 1);
        let (train, test) = order.split_at(m);
        let mut must = Vec::new();
        let mut cannot = Vec::new();
        for (a, &i) in train.iter().enumerate() {
            for &j in &train[a + 1..] {
                if labels[i] == labels[j] {
                    must.push((i, j));
                } else {
                    cannot.push((i, j));
                }
            }
        }
        let (gs, gd) = graphs::constraint_graphs(&must, &cannot, n)?;
        let emb = spectral::semisupervised_embed(
            &k,
            &graphs::laplacian(&gs),
            &graphs::laplacian(&gd),
            cfg.gamma1,
            cfg.gamma2,
            cfg.d,
        )?;
        let pick = |idx: &[usize]| DMatrix::from_fn(cfg.d, idx.len(), |r, c| emb.psi[(r, idx[c])]);
        let pick_labels = |idx: &[usize]| idx.iter().map(|&i| labels[i]).collect::<Vec<_>>();
        let model = LinearClassifier::fit(&pick(train), &pick_labels(train), cfg.ridge)?;
        let predicted = model.predict(&pick(test))?;
        out.insert(format!("p={p}"), evaluation::error_rate(&predicted, &pick_labels(test)));
    }
    Ok(out)
}

pub fn semisup_trend(cfg: &SemisupConfig) -> Result<MonteCarloSummary> {
    evaluation::monte_carlo(cfg.trials, cfg.seed, |seed| semisup_trial(cfg, seed))
}

/// Consecutive label fractions must not raise the mean test error by more
/// than one standard error of the difference of the two means.
pub fn semisup_trend_checks(cfg: &SemisupConfig, summary: &MonteCarloSummary) -> Vec<Comparison> {
    let stats: Vec<(f64, f64, f64)> = cfg
        .fractions
        .iter()
        .map(|p| {
            let key = format!("p={p}");
            let n = summary
                .per_trial
                .iter()
                .filter(|r| r.metrics.as_ref().is_some_and(|m| m.contains_key(&key)))
                .count()
                .max(1) as f64;
            (*p, summary.mean_of(&key), summary.std_of(&key) / n.sqrt())
        })
        .collect();
    stats
        .windows(2)
        .map(|w| {
            let (p0, m0, se0) = w[0];
            let (p1, m1, se1) = w[1];
            let se = (se0 * se0 + se1 * se1).sqrt();
            Comparison::at_most(format!("err(p={p1}) <= err(p={p0}) + se"), m1, m0 + se)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwissRollConfig {
    pub trials: usize,
    pub seed: u64,
    pub n: usize,
    pub k: usize,
    pub score_k: usize,
    pub order: usize,
    pub gamma: f64,
    pub l1_weight: f64,
    pub d: usize,
}

impl Default for SwissRollConfig {
    fn default() -> Self {
        SwissRollConfig {
            trials: 10,
            seed: 1,
            n: 600,
            k: 20,
            score_k: 10,
            order: 2,
            gamma: 0.1,
            l1_weight: 0.01,
            d: 2,
        }
    }
}

/// Neighborhood preservation of PCA, LLE and LNEG on one swiss roll.
pub fn swiss_roll_trial(cfg: &SwissRollConfig, seed: u64) -> Result<Metrics> {
    let z = datasets::gen_swiss_roll(cfg.n, seed)?.points;
    let mut out = Metrics::new();
    let (pca, _) = spectral::pca(&z, cfg.d)?;
    out.insert("pca".into(), evaluation::knn_preservation(&z, &pca.psi, cfg.score_k)?);
    let lle = lneg::lle_embed(&z, cfg.k, cfg.d)?;
    out.insert("lle".into(), evaluation::knn_preservation(&z, &lle.psi, cfg.score_k)?);
    let opts = LnegOptions {
        k: cfg.k,
        order: cfg.order,
        l1_weight: cfg.l1_weight,
        ..LnegOptions::default()
    };
    let graph = graphs::correlation_graph_dense(&z)?;
    let emb = lneg::lneg_embed(&z, &opts, cfg.d, cfg.gamma, Some(&graph))?;
    out.insert("lneg".into(), evaluation::knn_preservation(&z, &emb.psi, cfg.score_k)?);
    Ok(out)
}

pub fn swiss_roll_preservation(cfg: &SwissRollConfig) -> Result<MonteCarloSummary> {
    evaluation::monte_carlo(cfg.trials, cfg.seed, |seed| swiss_roll_trial(cfg, seed))
}

/// LNEG and LLE must each preserve more neighbors than PCA on average.
pub fn swiss_roll_checks(summary: &MonteCarloSummary) -> Vec<Comparison> {
    let pca = summary.mean_of("pca");
    ["lneg", "lle"]
        .iter()
        .map(|m| Comparison::greater(format!("{m} > pca"), summary.mean_of(m), pca))
        .collect()
}

/// Wall times of the two PCA paths on the same data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualTiming {
    pub primal_ms: Vec<f64>,
    pub dual_ms: Vec<f64>,
    pub primal_median_ms: f64,
    pub dual_median_ms: f64,
    /// Row-projector distance between the two embeddings.
    pub projector_gap: f64,
}

fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    if n % 2 == 1 {
        s[n / 2]
    } else {
        0.5 * (s[n / 2 - 1] + s[n / 2])
    }
}

/// Times `D×D` PCA against `N×N` dual PCA on a random `D×N` matrix.
pub fn dual_path_timing(dim: usize, n: usize, d: usize, runs: usize, seed: u64) -> Result<DualTiming> {
    if runs == 0 {
        return Err(Error::param("runs must be >= 1"));
    }
    let mut r = datasets::rng(seed);
    let y = DMatrix::from_fn(dim, n, |_, _| rand_distr::Distribution::<f64>::sample(&rand_distr::StandardNormal, &mut r));
    let yc = crate::linalg::center_columns(&y);
    let mut primal_ms = Vec::with_capacity(runs);
    let mut dual_ms = Vec::with_capacity(runs);
    let mut gap = 0.0;
    for _ in 0..runs {
        let t = Instant::now();
        let (p, _) = spectral::pca(&yc, d)?;
        primal_ms.push(t.elapsed().as_secs_f64() * 1e3);
        let t = Instant::now();
        let gram = kernels::KernelMatrix::from_matrix(yc.transpose() * &yc)?;
        let q = spectral::dual_pca(&gram, d)?;
        dual_ms.push(t.elapsed().as_secs_f64() * 1e3);
        gap = crate::linalg::projector_distance(&p.psi, &q.psi);
    }
    Ok(DualTiming {
        primal_median_ms: median(&primal_ms),
        dual_median_ms: median(&dual_ms),
        primal_ms,
        dual_ms,
        projector_gap: gap,
    })
}
