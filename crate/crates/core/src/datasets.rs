//! Synthetic manifolds, linear high-dimensional embedding, and CSV plumbing.
//!
//! Every generator is a pure function of its parameters and seed. Randomness
//! comes from ChaCha8 (`rand_chacha::ChaCha8Rng::seed_from_u64`), which is
//! portable across platforms.

use std::f64::consts::PI;
use std::fs;
use std::io::Write;
use std::path::Path;

use nalgebra::{DMatrix, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Seeded generator used throughout the crate.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ManifoldKind {
    SwissRoll,
    Trefoil,
    Sphere,
    Plane,
    PlaneWithHole,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ManifoldSample {
    /// `3×n`, one point per column.
    pub points: DMatrix<f64>,
    pub labels: Vec<usize>,
    pub kind: ManifoldKind,
}

impl ManifoldSample {
    fn from_points(points: Vec<Vector3<f64>>, kind: ManifoldKind) -> Self {
        let n = points.len();
        ManifoldSample {
            points: DMatrix::from_fn(3, n, |r, c| points[c][r]),
            labels: vec![0; n],
            kind,
        }
    }

    pub fn n(&self) -> usize {
        self.points.ncols()
    }

    /// Translates every point by `offset`.
    pub fn shifted(mut self, offset: [f64; 3]) -> Self {
        for mut col in self.points.column_iter_mut() {
            for r in 0..3 {
                col[r] += offset[r];
            }
        }
        self
    }
}

fn require_n(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::param("sample count must be >= 1"));
    }
    Ok(())
}

/// Swiss roll `(t cos t, h, t sin t)` with `t ~ U[1.5π, 4.5π]`, `h ~ U[0, 21]`.
pub fn gen_swiss_roll(n: usize, seed: u64) -> Result<ManifoldSample> {
    require_n(n)?;
    let mut r = rng(seed);
    let pts = (0..n)
        .map(|_| {
            let t = r.random_range(1.5 * PI..=4.5 * PI);
            let h = r.random_range(0.0..=21.0);
            swiss_roll_point(t, h)
        })
        .collect();
    Ok(ManifoldSample::from_points(pts, ManifoldKind::SwissRoll))
}

pub fn swiss_roll_point(t: f64, h: f64) -> Vector3<f64> {
    Vector3::new(t * t.cos(), h, t * t.sin())
}

/// Unscaled trefoil knot point at parameter `t`.
pub fn trefoil_point(t: f64) -> Vector3<f64> {
    Vector3::new(
        t.sin() + 2.0 * (2.0 * t).sin(),
        t.cos() - 2.0 * (2.0 * t).cos(),
        -(3.0 * t).sin(),
    )
}

/// Trefoil knot with `t ~ U[0, 2π)`, scaled by `radius_scale`.
pub fn gen_trefoil(n: usize, radius_scale: f64, seed: u64) -> Result<ManifoldSample> {
    require_n(n)?;
    if !(radius_scale > 0.0) || !radius_scale.is_finite() {
        return Err(Error::param(format!("radius_scale must be > 0, got {radius_scale}")));
    }
    let mut r = rng(seed);
    let pts = (0..n)
        .map(|_| trefoil_point(r.random_range(0.0..2.0 * PI)) * radius_scale)
        .collect();
    Ok(ManifoldSample::from_points(pts, ManifoldKind::Trefoil))
}

/// Uniform points on `[−extent, extent]² × {0}`.
pub fn gen_plane(n: usize, extent: f64, seed: u64) -> Result<ManifoldSample> {
    let mut s = gen_plane_with_hole(n, 0.0, extent, seed)?;
    s.kind = ManifoldKind::Plane;
    Ok(s)
}

/// Uniform points on `[−extent, extent]² × {0}` with `‖(z₁, z₂)‖ > hole_radius`,
/// drawn by rejection.
pub fn gen_plane_with_hole(n: usize, hole_radius: f64, extent: f64, seed: u64) -> Result<ManifoldSample> {
    require_n(n)?;
    if !(extent > 0.0) || !extent.is_finite() {
        return Err(Error::param(format!("extent must be > 0, got {extent}")));
    }
    if !(hole_radius >= 0.0) || hole_radius >= extent {
        return Err(Error::param(format!(
            "hole_radius must satisfy 0 <= hole_radius < extent, got {hole_radius}"
        )));
    }
    let mut r = rng(seed);
    let mut pts = Vec::with_capacity(n);
    let budget = 1000usize.saturating_mul(n);
    let mut draws = 0usize;
    while pts.len() < n {
        if draws >= budget {
            return Err(Error::Generation(format!(
                "accepted {} of {n} points after {draws} draws",
                pts.len()
            )));
        }
        draws += 1;
        let x = r.random_range(-extent..=extent);
        let y = r.random_range(-extent..=extent);
        if hole_radius == 0.0 || x.hypot(y) > hole_radius {
            pts.push(Vector3::new(x, y, 0.0));
        }
    }
    let kind = if hole_radius > 0.0 {
        ManifoldKind::PlaneWithHole
    } else {
        ManifoldKind::Plane
    };
    Ok(ManifoldSample::from_points(pts, kind))
}

/// Uniform points on the sphere of the given radius (normalized Gaussian draws).
pub fn gen_sphere(n: usize, radius: f64, seed: u64) -> Result<ManifoldSample> {
    require_n(n)?;
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(Error::param(format!("radius must be > 0, got {radius}")));
    }
    let mut r = rng(seed);
    let mut pts = Vec::with_capacity(n);
    while pts.len() < n {
        let v: Vector3<f64> = Vector3::from_fn(|_, _| StandardNormal.sample(&mut r));
        let norm = v.norm();
        if norm > 1e-12 {
            pts.push(v * (radius / norm));
        }
    }
    Ok(ManifoldSample::from_points(pts, ManifoldKind::Sphere))
}

/// Isotropic Gaussian clusters in `dim` dimensions. Class `c` is centered at
/// `separation · e_{c mod dim}`; noise has standard deviation `std`.
pub fn gen_gaussian_mixture(
    counts: &[usize],
    dim: usize,
    separation: f64,
    std: f64,
    seed: u64,
) -> Result<(DMatrix<f64>, Vec<usize>)> {
    if counts.is_empty() || counts.contains(&0) {
        return Err(Error::param("every class needs at least one sample"));
    }
    if dim == 0 {
        return Err(Error::param("dim must be >= 1"));
    }
    if !(std >= 0.0) || !separation.is_finite() {
        return Err(Error::param("std must be >= 0 and separation finite"));
    }
    let n: usize = counts.iter().sum();
    let labels: Vec<usize> = counts
        .iter()
        .enumerate()
        .flat_map(|(c, &m)| std::iter::repeat_n(c, m))
        .collect();
    let mut r = rng(seed);
    let mut y = DMatrix::zeros(dim, n);
    for (j, &c) in labels.iter().enumerate() {
        for m in 0..dim {
            let z: f64 = StandardNormal.sample(&mut r);
            y[(m, j)] = std * z;
        }
        y[(c % dim, j)] += separation;
    }
    Ok((y, labels))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Projection {
    /// Orthonormal `D×3` factor from the QR of a seeded Gaussian matrix.
    #[default]
    Random,
    /// `P = I₃`; requires `D = 3`.
    Identity,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddedDataset {
    /// `D×N` observations `P Z + E`.
    pub y: DMatrix<f64>,
    /// `3×N` ground truth.
    pub z: DMatrix<f64>,
    /// Sample `i` of input manifold `s` gets label `s`.
    pub labels: Vec<usize>,
    pub projection: DMatrix<f64>,
    pub noise_sigma2: f64,
}

/// Concatenates the samples and maps them to `ℝ^D` with one shared
/// orthonormal projection plus entrywise Gaussian noise of variance
/// `noise_sigma2`.
pub fn embed_highdim(
    samples: &[ManifoldSample],
    dim: usize,
    noise_sigma2: f64,
    seed: u64,
) -> Result<EmbeddedDataset> {
    embed_highdim_with(samples, dim, noise_sigma2, seed, Projection::Random)
}

pub fn embed_highdim_with(
    samples: &[ManifoldSample],
    dim: usize,
    noise_sigma2: f64,
    seed: u64,
    projection: Projection,
) -> Result<EmbeddedDataset> {
    if dim < 3 {
        return Err(Error::param(format!("ambient dimension must be >= 3, got {dim}")));
    }
    if samples.is_empty() {
        return Err(Error::param("at least one manifold sample is required"));
    }
    if !(noise_sigma2 >= 0.0) || !noise_sigma2.is_finite() {
        return Err(Error::param(format!("noise variance must be >= 0, got {noise_sigma2}")));
    }
    let n: usize = samples.iter().map(ManifoldSample::n).sum();
    let mut z = DMatrix::zeros(3, n);
    let mut labels = Vec::with_capacity(n);
    let mut col = 0;
    for (s, sample) in samples.iter().enumerate() {
        z.columns_mut(col, sample.n()).copy_from(&sample.points);
        labels.extend(std::iter::repeat_n(s, sample.n()));
        col += sample.n();
    }

    let mut r = rng(seed);
    let p = match projection {
        Projection::Identity => {
            if dim != 3 {
                return Err(Error::param("identity projection requires D = 3"));
            }
            DMatrix::identity(3, 3)
        }
        Projection::Random => {
            let g = DMatrix::from_fn(dim, 3, |_, _| StandardNormal.sample(&mut r));
            g.qr().q()
        }
    };
    let mut y = &p * &z;
    if noise_sigma2 > 0.0 {
        let sd = noise_sigma2.sqrt();
        for v in y.iter_mut() {
            let e: f64 = StandardNormal.sample(&mut r);
            *v += sd * e;
        }
    }
    Ok(EmbeddedDataset {
        y,
        z,
        labels,
        projection: p,
        noise_sigma2,
    })
}

/// Reads a numeric CSV whose rows are samples and returns it as `D×N`.
/// With `header`, the first line is skipped unconditionally.
pub fn load_csv(path: &Path, header: bool) -> Result<DMatrix<f64>> {
    parse_csv(&fs::read_to_string(path)?, header)
}

pub fn parse_csv(text: &str, header: bool) -> Result<DMatrix<f64>> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut width = None;
    let lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .skip(usize::from(header));
    for (lineno, line) in lines {
        let mut row = Vec::new();
        for (c, cell) in line.split(',').enumerate() {
            let cell = cell.trim();
            let v: f64 = cell.parse().map_err(|_| Error::Parse {
                row: lineno + 1,
                column: c + 1,
                message: format!("not a number: {cell:?}"),
            })?;
            row.push(v);
        }
        match width {
            None => width = Some(row.len()),
            Some(w) if w != row.len() => {
                return Err(Error::Format(format!(
                    "row {} has {} fields, expected {w}",
                    lineno + 1,
                    row.len()
                )))
            }
            _ => {}
        }
        rows.push(row);
    }
    let Some(width) = width else {
        return Err(Error::Format("no data rows".into()));
    };
    Ok(DMatrix::from_fn(width, rows.len(), |m, j| rows[j][m]))
}

/// Writes a `D×N` matrix as `N` rows of `D` values. Values use the shortest
/// representation that parses back to the same `f64`.
pub fn save_csv(path: &Path, m: &DMatrix<f64>) -> Result<()> {
    let mut f = std::io::BufWriter::new(fs::File::create(path)?);
    f.write_all(format_csv(m).as_bytes())?;
    f.flush()?;
    Ok(())
}

pub fn format_csv(m: &DMatrix<f64>) -> String {
    let mut out = String::new();
    for col in m.column_iter() {
        let line: Vec<String> = col.iter().map(|v| format!("{v:?}")).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

/// One integer label per line.
pub fn load_labels(path: &Path) -> Result<Vec<usize>> {
    let text = fs::read_to_string(path)?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            l.trim().parse().map_err(|_| Error::Parse {
                row: i + 1,
                column: 1,
                message: format!("not a label: {:?}", l.trim()),
            })
        })
        .collect()
}

pub fn save_labels(path: &Path, labels: &[usize]) -> Result<()> {
    let mut out = String::with_capacity(labels.len() * 3);
    for l in labels {
        out.push_str(&l.to_string());
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}
