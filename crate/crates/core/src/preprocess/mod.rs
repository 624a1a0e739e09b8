//! Turns an [`Action`] into its sequence of windowed direction frames.
//!
//! The stages run in a fixed order: Gaussian smoothing of every joint path,
//! arc-length resampling of every joint path to `frames` points, direction
//! frames (position differences), windowing of `window` consecutive
//! direction frames into one vector, and scaling of each vector to unit
//! length.

mod smooth;
mod spline;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::Action;
use crate::Point3;

pub use smooth::smooth_joint;
pub use spline::{arc_length_resample, NaturalCubicSpline};

#[derive(Debug, Error, PartialEq)]
pub enum PreprocessError {
    #[error("invalid configuration: {key}: {message}")]
    InvalidParams { key: &'static str, message: String },
    #[error("at least 2 frames are required, found {0}")]
    TooFewFrames(usize),
    #[error("window {window} out of range 1..={max}")]
    WindowOutOfRange { window: usize, max: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PreprocessParams {
    /// Frame count every joint path is resampled to.
    pub frames: usize,
    /// Direction frames per WDF.
    pub window: usize,
    /// Gaussian smoothing bandwidth, in frames.
    pub smoothing_sigma: f64,
    /// Smoothing kernel half-width, in frames.
    pub smoothing_radius: usize,
    /// WDFs shorter than this are left unnormalized.
    pub norm_epsilon: f64,
}

impl Default for PreprocessParams {
    fn default() -> Self {
        PreprocessParams {
            frames: 25,
            window: 3,
            smoothing_sigma: 1.0,
            smoothing_radius: 2,
            norm_epsilon: 1e-8,
        }
    }
}

impl PreprocessParams {
    pub fn new(frames: usize, window: usize) -> Self {
        PreprocessParams {
            frames,
            window,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), PreprocessError> {
        let invalid = |key, message: String| Err(PreprocessError::InvalidParams { key, message });
        if self.frames < 2 {
            return invalid(
                "preprocess.frames",
                format!("must be at least 2, got {}", self.frames),
            );
        }
        if self.window < 1 || self.window > self.frames - 1 {
            return invalid(
                "preprocess.window",
                format!(
                    "must satisfy 1 <= window <= frames - 1 = {}, got {}",
                    self.frames - 1,
                    self.window
                ),
            );
        }
        if !(self.smoothing_sigma.is_finite() && self.smoothing_sigma >= 0.0) {
            return invalid(
                "preprocess.smoothing_sigma",
                format!(
                    "must be finite and non-negative, got {}",
                    self.smoothing_sigma
                ),
            );
        }
        if !(self.norm_epsilon.is_finite() && self.norm_epsilon > 0.0) {
            return invalid(
                "preprocess.norm_epsilon",
                format!("must be positive, got {}", self.norm_epsilon),
            );
        }
        Ok(())
    }

    /// WDFs per action: `frames - window`.
    pub fn wdf_count(&self) -> usize {
        self.frames - self.window
    }

    /// WDF dimension for an action with `joints` joints.
    pub fn wdf_dim(&self, joints: usize) -> usize {
        joints * 3 * self.window
    }
}

/// Per-joint displacements between consecutive position frames, stored
/// frame-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionFrames {
    joints: usize,
    data: Vec<Point3>,
}

impl DirectionFrames {
    pub fn len(&self) -> usize {
        self.data.len() / self.joints
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn joint_count(&self) -> usize {
        self.joints
    }

    pub fn frame(&self, f: usize) -> &[Point3] {
        &self.data[f * self.joints..(f + 1) * self.joints]
    }

    /// Direction frame `f` as a flat `x y z` vector, joint-major.
    pub fn flat_frame(&self, f: usize) -> Vec<f64> {
        self.frame(f).iter().flatten().copied().collect()
    }
}

fn directions_of(positions: &[Point3], joints: usize) -> DirectionFrames {
    let data = positions
        .iter()
        .zip(&positions[joints..])
        .map(|(a, b)| [b[0] - a[0], b[1] - a[1], b[2] - a[2]])
        .collect();
    DirectionFrames { joints, data }
}

/// `D[f][j] = A[f+1][j] - A[f][j]` for every frame pair.
pub fn direction_frames(action: &Action) -> DirectionFrames {
    directions_of(action.positions(), action.joint_count())
}

/// Windowed direction frames: fixed-dimension vectors stored contiguously.
#[derive(Debug, Clone, PartialEq)]
pub struct WdfSequence {
    dim: usize,
    data: Vec<f64>,
}

impl WdfSequence {
    /// Builds a sequence from a flat buffer of `data.len() / dim` vectors.
    pub fn from_flat(dim: usize, data: Vec<f64>) -> Self {
        assert!(
            dim > 0 && data.len().is_multiple_of(dim),
            "buffer is not a whole number of vectors"
        );
        WdfSequence { dim, data }
    }

    pub fn from_vectors(vectors: &[Vec<f64>]) -> Self {
        let dim = vectors.first().map_or(1, Vec::len);
        assert!(
            vectors.iter().all(|v| v.len() == dim),
            "vectors differ in length"
        );
        WdfSequence::from_flat(dim, vectors.concat())
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, f: usize) -> &[f64] {
        &self.data[f * self.dim..(f + 1) * self.dim]
    }

    pub fn iter(&self) -> std::slice::ChunksExact<'_, f64> {
        self.data.chunks_exact(self.dim)
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.data
    }
}

/// Concatenates direction frames `f..f+window` into WDF `f`, for every
/// `f` in `0..=len-window`.
pub fn windowed_direction_frames(
    dirs: &DirectionFrames,
    window: usize,
) -> Result<WdfSequence, PreprocessError> {
    let n = dirs.len();
    if window < 1 || window > n {
        return Err(PreprocessError::WindowOutOfRange { window, max: n });
    }
    let j = dirs.joints;
    let dim = j * 3 * window;
    let mut data = Vec::with_capacity((n - window + 1) * dim);
    for f in 0..=n - window {
        data.extend(dirs.data[f * j..(f + window) * j].iter().flatten());
    }
    Ok(WdfSequence { dim, data })
}

/// Scales every WDF with norm at least `epsilon` to unit length.
pub fn normalize_wdfs(mut seq: WdfSequence, epsilon: f64) -> WdfSequence {
    for v in seq.data.chunks_exact_mut(seq.dim) {
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm >= epsilon {
            v.iter_mut().for_each(|x| *x /= norm);
        }
    }
    seq
}

/// Smooths and resamples every joint path, returning an action with exactly
/// `params.frames` frames.
pub fn smooth_and_resample(
    action: &Action,
    params: &PreprocessParams,
) -> Result<Action, PreprocessError> {
    params.validate()?;
    let joints = action.joint_count();
    let paths = (0..joints)
        .map(|j| {
            let smoothed = smooth_joint(
                &action.joint_path(j),
                params.smoothing_sigma,
                params.smoothing_radius,
            );
            arc_length_resample(&smoothed, params.frames, params.norm_epsilon)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let positions = (0..params.frames)
        .flat_map(|f| paths.iter().map(move |p| p[f]))
        .collect();
    Action::new(
        action.id.clone(),
        action.subject,
        action.class_label.clone(),
        joints,
        positions,
    )
    .map_err(|_| PreprocessError::TooFewFrames(params.frames))
}

/// The full chain: smooth, resample, differentiate, window, normalize.
pub fn preprocess_action(
    action: &Action,
    params: &PreprocessParams,
) -> Result<WdfSequence, PreprocessError> {
    let resampled = smooth_and_resample(action, params)?;
    let dirs = direction_frames(&resampled);
    let wdfs = windowed_direction_frames(&dirs, params.window)?;
    Ok(normalize_wdfs(wdfs, params.norm_epsilon))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line_action(xs: &[f64]) -> Action {
        Action::new("t", 1, "c", 1, xs.iter().map(|&x| [x, 0.0, 0.0]).collect()).unwrap()
    }

    /// Two joints moving on a smooth curve with uneven time sampling.
    fn wavy_action(frames: usize) -> Action {
        let positions = (0..frames)
            .flat_map(|f| {
                let t = (f as f64 / (frames - 1) as f64).powf(1.3) * 3.0;
                [
                    [t.cos(), t.sin(), 0.3 * t],
                    [0.5 + 0.2 * t, (2.0 * t).sin(), -t.cos()],
                ]
            })
            .collect();
        Action::new("w", 2, "c", 2, positions).unwrap()
    }

    #[test]
    fn params_validation_names_keys() {
        assert!(PreprocessParams::new(25, 3).validate().is_ok());
        let err = PreprocessParams::new(25, 30).validate().unwrap_err();
        assert!(err.to_string().contains("preprocess.window"), "{err}");
        assert!(PreprocessParams::new(25, 0).validate().is_err());
        assert!(PreprocessParams::new(25, 24).validate().is_ok());
        assert!(PreprocessParams::new(25, 25).validate().is_err());
        assert!(PreprocessParams::new(1, 1).validate().is_err());
        let p = PreprocessParams {
            norm_epsilon: 0.0,
            ..Default::default()
        };
        assert!(p.validate().is_err());
        let p = PreprocessParams {
            smoothing_sigma: -1.0,
            ..Default::default()
        };
        assert!(p.validate().is_err());
    }

    #[test]
    fn finite_differences() {
        let d = direction_frames(&line_action(&[0.0, 1.0, 3.0]));
        assert_eq!(d.len(), 2);
        assert_eq!(d.frame(0), [[1.0, 0.0, 0.0]]);
        assert_eq!(d.frame(1), [[2.0, 0.0, 0.0]]);
        let still = direction_frames(&line_action(&[2.0; 5]));
        assert!(still.data.iter().flatten().all(|&v| v == 0.0));
    }

    #[test]
    fn directions_ignore_translation_exactly() {
        // dyadic coordinates keep the shifted sums exact
        let a = wavy_action(12).scaled(1.0);
        let a = Action::new(
            "d",
            1,
            "c",
            2,
            a.positions()
                .iter()
                .map(|p| p.map(|v| (v * 64.0).round() / 64.0))
                .collect(),
        )
        .unwrap();
        let b = a.translated([5.0, 5.0, 5.0]);
        assert_eq!(direction_frames(&a), direction_frames(&b));
    }

    #[test]
    fn window_of_one_is_identity() {
        let d = direction_frames(&wavy_action(9));
        let w = windowed_direction_frames(&d, 1).unwrap();
        assert_eq!(w.len(), d.len());
        for f in 0..d.len() {
            assert_eq!(w.get(f), d.flat_frame(f));
        }
    }

    #[test]
    fn full_window_is_single_wdf() {
        let d = direction_frames(&wavy_action(9));
        let w = windowed_direction_frames(&d, 8).unwrap();
        assert_eq!(w.len(), 1);
        let all: Vec<f64> = (0..8).flat_map(|f| d.flat_frame(f)).collect();
        assert_eq!(w.get(0), all);
    }

    #[test]
    fn window_layout_is_frame_major() {
        let a = line_action(&[0.0, 1.0, 3.0, 6.0, 10.0]);
        let w = windowed_direction_frames(&direction_frames(&a), 3).unwrap();
        assert_eq!((w.len(), w.dim()), (2, 9));
        assert_eq!(w.get(1), [2.0, 0.0, 0.0, 3.0, 0.0, 0.0, 4.0, 0.0, 0.0]);
        assert!(windowed_direction_frames(&direction_frames(&a), 5).is_err());
        assert!(windowed_direction_frames(&direction_frames(&a), 0).is_err());
    }

    #[test]
    fn normalization() {
        let seq =
            WdfSequence::from_vectors(&[vec![3.0, 4.0, 0.0], vec![0.0; 3], vec![1e-9, 0.0, 0.0]]);
        let out = normalize_wdfs(seq, 1e-8);
        assert!((out.get(0)[0] - 0.6).abs() < 1e-15 && (out.get(0)[1] - 0.8).abs() < 1e-15);
        assert_eq!(out.get(1), [0.0; 3]);
        assert_eq!(out.get(2), [1e-9, 0.0, 0.0]);
    }

    #[test]
    fn normalization_is_scale_free() {
        let v = vec![vec![1.0, -2.0, 0.5], vec![0.3, 0.3, 0.1]];
        let scaled: Vec<Vec<f64>> = v
            .iter()
            .map(|x| x.iter().map(|y| y * 10.0).collect())
            .collect();
        let a = normalize_wdfs(WdfSequence::from_vectors(&v), 1e-8);
        let b = normalize_wdfs(WdfSequence::from_vectors(&scaled), 1e-8);
        for (x, y) in a.as_flat().iter().zip(b.as_flat()) {
            assert!((x - y).abs() < 1e-15);
        }
    }

    #[test]
    fn pipeline_sizes() {
        let a = wavy_action(40);
        let w = preprocess_action(&a, &PreprocessParams::new(25, 3)).unwrap();
        assert_eq!((w.len(), w.dim()), (22, 2 * 9));
        let w = preprocess_action(&a, &PreprocessParams::new(16, 5)).unwrap();
        assert_eq!(w.len(), 11);
        for v in w.iter() {
            let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            assert!((n - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn resampling_keeps_smoothed_endpoints() {
        let a = wavy_action(33);
        let p = PreprocessParams::new(16, 3);
        let r = smooth_and_resample(&a, &p).unwrap();
        assert_eq!(r.frame_count(), 16);
        for j in 0..2 {
            let s = smooth_joint(&a.joint_path(j), p.smoothing_sigma, p.smoothing_radius);
            assert_eq!(r.frame(0)[j], s[0]);
            assert_eq!(r.frame(15)[j], s[s.len() - 1]);
        }
    }

    #[test]
    fn translation_and_scale() {
        let a = wavy_action(30);
        let p = PreprocessParams::new(25, 3);
        let base = preprocess_action(&a, &p).unwrap();
        for other in [
            a.translated([5.0, -3.0, 100.0]),
            a.scaled(10.0),
            a.scaled(0.1),
        ] {
            let w = preprocess_action(&other, &p).unwrap();
            for (x, y) in base.as_flat().iter().zip(w.as_flat()) {
                assert!((x - y).abs() < 1e-9, "{x} vs {y}");
            }
        }
    }
}
