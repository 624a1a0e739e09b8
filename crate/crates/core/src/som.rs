//! Codebook learning for WDF space.
//!
//! [`SomGrid`] is a `rows × cols` codebook indexed row-major. It is usually
//! produced by [`train_som`], an online Kohonen map with a Gaussian
//! neighbourhood on a rectangular grid, but any [`Clusterer`] can fill it;
//! [`KMeans`] is provided as an alternative.

use rand::seq::index::sample;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SomError {
    #[error("no samples")]
    NoSamples,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("a codebook needs at least 2 units, grid is {rows}x{cols}")]
    GridTooSmall { rows: usize, cols: usize },
    #[error("invalid configuration: {key}: {message}")]
    InvalidParams { key: &'static str, message: String },
    #[error("invalid codebook: {0}")]
    InvalidCodebook(String),
}

/// A trained codebook of `rows * cols` centers in `dim`-dimensional space.
#[derive(Debug, Clone, PartialEq)]
pub struct SomGrid {
    rows: usize,
    cols: usize,
    dim: usize,
    codebook: Vec<f64>,
}

impl SomGrid {
    pub fn new(rows: usize, cols: usize, dim: usize, codebook: Vec<f64>) -> Result<Self, SomError> {
        if rows * cols < 2 {
            return Err(SomError::GridTooSmall { rows, cols });
        }
        if dim == 0 || codebook.len() != rows * cols * dim {
            return Err(SomError::InvalidCodebook(format!(
                "{} values for a {rows}x{cols} grid of dimension {dim}",
                codebook.len()
            )));
        }
        if codebook.iter().any(|v| !v.is_finite()) {
            return Err(SomError::InvalidCodebook("non-finite value".into()));
        }
        Ok(SomGrid {
            rows,
            cols,
            dim,
            codebook,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of centers, `rows * cols`.
    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn center(&self, l: usize) -> &[f64] {
        &self.codebook[l * self.dim..(l + 1) * self.dim]
    }

    pub fn centers(&self) -> std::slice::ChunksExact<'_, f64> {
        self.codebook.chunks_exact(self.dim)
    }

    pub fn codebook(&self) -> &[f64] {
        &self.codebook
    }

    pub fn bmu(&self, x: &[f64]) -> Result<usize, SomError> {
        if x.len() != self.dim {
            return Err(SomError::DimensionMismatch {
                expected: self.dim,
                found: x.len(),
            });
        }
        Ok(nearest(&self.codebook, self.dim, x).0)
    }
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Index and squared distance of the closest center; ties go to the lowest
/// index.
fn nearest(codebook: &[f64], dim: usize, x: &[f64]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (l, c) in codebook.chunks_exact(dim).enumerate() {
        let d = squared_distance(c, x);
        if d < best.1 {
            best = (l, d);
        }
    }
    best
}

/// Index of the codebook vector closest to `x` in euclidean distance.
pub fn bmu(grid: &SomGrid, x: &[f64]) -> Result<usize, SomError> {
    grid.bmu(x)
}

/// Mean euclidean distance from each sample (`dim`-sized chunks of
/// `samples`) to its closest center.
pub fn quantization_error(grid: &SomGrid, samples: &[f64]) -> Result<f64, SomError> {
    if samples.is_empty() {
        return Err(SomError::NoSamples);
    }
    if !samples.len().is_multiple_of(grid.dim) {
        return Err(SomError::DimensionMismatch {
            expected: grid.dim,
            found: samples.len() % grid.dim,
        });
    }
    let n = samples.len() / grid.dim;
    let total: f64 = samples
        .chunks_exact(grid.dim)
        .map(|x| nearest(&grid.codebook, grid.dim, x).1.sqrt())
        .sum();
    Ok(total / n as f64)
}

/// Online SOM hyperparameters. Learning rate and neighbourhood radius decay
/// exponentially from their initial to their final values over all updates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SomTrainParams {
    pub epochs: usize,
    pub initial_learning_rate: f64,
    pub final_learning_rate: f64,
    /// Defaults to `max(rows, cols) / 2` when unset.
    pub initial_radius: Option<f64>,
    pub final_radius: f64,
    pub seed: u64,
}

impl Default for SomTrainParams {
    fn default() -> Self {
        SomTrainParams {
            epochs: 20,
            initial_learning_rate: 0.5,
            final_learning_rate: 0.01,
            initial_radius: None,
            final_radius: 0.5,
            seed: 0,
        }
    }
}

impl SomTrainParams {
    pub fn initial_radius_for(&self, rows: usize, cols: usize) -> f64 {
        self.initial_radius
            .unwrap_or(rows.max(cols) as f64 / 2.0)
            .max(self.final_radius)
    }

    pub fn validate(&self) -> Result<(), SomError> {
        let invalid = |key, message: String| Err(SomError::InvalidParams { key, message });
        let rate_ok = |r: f64| r > 0.0 && r <= 1.0;
        if self.epochs < 1 {
            return invalid("codebook.epochs", "must be at least 1".into());
        }
        if !rate_ok(self.initial_learning_rate) {
            return invalid(
                "codebook.initial_learning_rate",
                format!("must be in (0, 1], got {}", self.initial_learning_rate),
            );
        }
        if !rate_ok(self.final_learning_rate) {
            return invalid(
                "codebook.final_learning_rate",
                format!("must be in (0, 1], got {}", self.final_learning_rate),
            );
        }
        if !(self.final_radius > 0.0 && self.final_radius.is_finite()) {
            return invalid(
                "codebook.final_radius",
                format!("must be positive, got {}", self.final_radius),
            );
        }
        if let Some(r) = self.initial_radius {
            if !(r.is_finite() && r >= self.final_radius) {
                return invalid(
                    "codebook.initial_radius",
                    format!(
                        "must be at least final_radius = {}, got {r}",
                        self.final_radius
                    ),
                );
            }
        }
        Ok(())
    }
}

fn check_samples(samples: &[f64], dim: usize) -> Result<usize, SomError> {
    if dim == 0 {
        return Err(SomError::DimensionMismatch {
            expected: 1,
            found: 0,
        });
    }
    if samples.is_empty() {
        return Err(SomError::NoSamples);
    }
    if !samples.len().is_multiple_of(dim) {
        return Err(SomError::DimensionMismatch {
            expected: dim,
            found: samples.len() % dim,
        });
    }
    Ok(samples.len() / dim)
}

/// Seeds the codebook with randomly chosen samples, without replacement
/// when there are enough of them.
fn initial_codebook(samples: &[f64], dim: usize, k: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let n = samples.len() / dim;
    let picks: Vec<usize> = if n >= k {
        sample(rng, n, k).into_vec()
    } else {
        log::warn!("training a {k}-unit codebook on only {n} samples");
        (0..k).map(|_| rng.gen_range(0..n)).collect()
    };
    picks
        .iter()
        .flat_map(|&i| &samples[i * dim..(i + 1) * dim])
        .copied()
        .collect()
}

fn decay(start: f64, end: f64, fraction: f64) -> f64 {
    start * (end / start).powf(fraction)
}

/// Trains a `rows × cols` map on `samples` (consecutive `dim`-sized
/// vectors). Deterministic for a given seed.
pub fn train_som(
    samples: &[f64],
    dim: usize,
    rows: usize,
    cols: usize,
    params: &SomTrainParams,
) -> Result<SomGrid, SomError> {
    train_som_observed(samples, dim, rows, cols, params, |_, _| {})
}

/// [`train_som`] that calls `observe(epoch, codebook)` after each epoch.
pub fn train_som_observed(
    samples: &[f64],
    dim: usize,
    rows: usize,
    cols: usize,
    params: &SomTrainParams,
    observe: impl FnMut(usize, &SomGrid),
) -> Result<SomGrid, SomError> {
    params.validate()?;
    let n = check_samples(samples, dim)?;
    if rows * cols < 2 {
        return Err(SomError::GridTooSmall { rows, cols });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let grid = SomGrid::new(
        rows,
        cols,
        dim,
        initial_codebook(samples, dim, rows * cols, &mut rng),
    )?;
    run_epochs(grid, samples, n, params, &mut rng, observe)
}

/// Continues training from an existing codebook.
pub fn train_som_from(
    grid: SomGrid,
    samples: &[f64],
    params: &SomTrainParams,
    observe: impl FnMut(usize, &SomGrid),
) -> Result<SomGrid, SomError> {
    params.validate()?;
    let n = check_samples(samples, grid.dim)?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    run_epochs(grid, samples, n, params, &mut rng, observe)
}

fn run_epochs(
    mut grid: SomGrid,
    samples: &[f64],
    n: usize,
    params: &SomTrainParams,
    rng: &mut ChaCha8Rng,
    mut observe: impl FnMut(usize, &SomGrid),
) -> Result<SomGrid, SomError> {
    let (rows, cols, dim) = (grid.rows, grid.cols, grid.dim);
    let radius0 = params.initial_radius_for(rows, cols);
    let total_steps = params.epochs * n;
    let mut order: Vec<usize> = (0..n).collect();
    let mut step = 0usize;
    for epoch in 0..params.epochs {
        order.shuffle(rng);
        for &i in &order {
            let x = &samples[i * dim..(i + 1) * dim];
            let fraction = if total_steps > 1 {
                step as f64 / (total_steps - 1) as f64
            } else {
                0.0
            };
            let rate = decay(
                params.initial_learning_rate,
                params.final_learning_rate,
                fraction,
            );
            let radius = decay(radius0, params.final_radius, fraction);
            let (winner, _) = nearest(&grid.codebook, dim, x);
            let (wr, wc) = ((winner / cols) as f64, (winner % cols) as f64);
            let denom = 2.0 * radius * radius;
            for (l, c) in grid.codebook.chunks_exact_mut(dim).enumerate() {
                let (r, q) = ((l / cols) as f64, (l % cols) as f64);
                let d2 = (r - wr) * (r - wr) + (q - wc) * (q - wc);
                let influence = rate * (-d2 / denom).exp();
                // far units receive no measurable update
                if influence < 1e-12 {
                    continue;
                }
                for (cv, xv) in c.iter_mut().zip(x) {
                    *cv += influence * (xv - *cv);
                }
            }
            step += 1;
        }
        observe(epoch, &grid);
    }
    Ok(grid)
}

/// Anything that can turn a set of samples into a codebook.
pub trait Clusterer: Sync {
    fn fit(&self, samples: &[f64], dim: usize) -> Result<SomGrid, SomError>;
}

/// A SOM of a fixed grid shape.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SomTrainer {
    pub rows: usize,
    pub cols: usize,
    pub params: SomTrainParams,
}

impl SomTrainer {
    pub fn new(rows: usize, cols: usize, params: SomTrainParams) -> Self {
        SomTrainer { rows, cols, params }
    }
}

impl Clusterer for SomTrainer {
    fn fit(&self, samples: &[f64], dim: usize) -> Result<SomGrid, SomError> {
        train_som(samples, dim, self.rows, self.cols, &self.params)
    }
}

/// Lloyd's k-means producing a `1 × k` codebook.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KMeans {
    pub k: usize,
    pub iterations: usize,
    pub seed: u64,
}

impl Clusterer for KMeans {
    fn fit(&self, samples: &[f64], dim: usize) -> Result<SomGrid, SomError> {
        let n = check_samples(samples, dim)?;
        if self.k < 2 {
            return Err(SomError::GridTooSmall {
                rows: 1,
                cols: self.k,
            });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut codebook = initial_codebook(samples, dim, self.k, &mut rng);
        let mut assignment = vec![usize::MAX; n];
        for _ in 0..self.iterations.max(1) {
            let mut changed = false;
            for (i, x) in samples.chunks_exact(dim).enumerate() {
                let (l, _) = nearest(&codebook, dim, x);
                changed |= assignment[i] != l;
                assignment[i] = l;
            }
            if !changed {
                break;
            }
            let mut sums = vec![0.0; self.k * dim];
            let mut counts = vec![0usize; self.k];
            for (x, &l) in samples.chunks_exact(dim).zip(&assignment) {
                counts[l] += 1;
                for (s, v) in sums[l * dim..(l + 1) * dim].iter_mut().zip(x) {
                    *s += v;
                }
            }
            // empty clusters keep their previous center
            for l in (0..self.k).filter(|&l| counts[l] > 0) {
                for d in 0..dim {
                    codebook[l * dim + d] = sums[l * dim + d] / counts[l] as f64;
                }
            }
        }
        SomGrid::new(1, self.k, dim, codebook)
    }
}
