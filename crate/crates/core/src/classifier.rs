//! ProbSOM classification.
//!
//! Every training WDF votes for its action's class in the codebook cell it
//! falls into, giving `P(class | cell)`. An action's class score is the sum
//! over cells of `P(class | cell) * H[cell]`, where `H` is its DAM
//! histogram.

use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{Action, Dataset};
use crate::descriptor::{bmu_counts, compute_histogram, DescriptorError, Histogram};
use crate::preprocess::{preprocess_action, PreprocessError, PreprocessParams, WdfSequence};
use crate::som::{Clusterer, SomError, SomGrid};

pub const MODEL_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ClassifierError {
    #[error("no training WDFs")]
    NoTrainingData,
    #[error("class index {index} out of range for {classes} classes")]
    UnknownClass { index: usize, classes: usize },
    #[error("histogram has {found} bins, model has {expected} clusters")]
    BinMismatch { expected: usize, found: usize },
    #[error("action has {found} joints, model expects {expected}")]
    JointMismatch { expected: usize, found: usize },
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error(transparent)]
    Preprocess(#[from] PreprocessError),
    #[error(transparent)]
    Descriptor(#[from] DescriptorError),
    #[error(transparent)]
    Som(#[from] SomError),
    #[error("model file: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// A training sequence and the index of its class.
#[derive(Debug, Clone, Copy)]
pub struct LabeledSequence<'a> {
    pub wdfs: &'a WdfSequence,
    pub class: usize,
}

/// Everything needed to classify a raw action.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassModel {
    joints: usize,
    params: PreprocessParams,
    grid: SomGrid,
    classes: Vec<String>,
    /// `K × C`, row-major.
    probs: Vec<f64>,
}

impl ClassModel {
    pub fn joint_count(&self) -> usize {
        self.joints
    }

    pub fn params(&self) -> &PreprocessParams {
        &self.params
    }

    pub fn grid(&self) -> &SomGrid {
        &self.grid
    }

    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    /// `P(class | cell)` for every class; all zeros for cells no training
    /// WDF reached.
    pub fn cluster_row(&self, l: usize) -> &[f64] {
        let c = self.classes.len();
        &self.probs[l * c..(l + 1) * c]
    }

    pub fn cluster_class_probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn to_json(&self) -> String {
        let file = ModelFile {
            version: MODEL_VERSION,
            joints: self.joints,
            params: ParamsFile {
                frames: self.params.frames,
                window: self.params.window,
                sigma: self.params.smoothing_sigma,
                radius: self.params.smoothing_radius,
                epsilon: self.params.norm_epsilon,
            },
            grid: GridFile {
                rows: self.grid.rows(),
                cols: self.grid.cols(),
                dim: self.grid.dim(),
                codebook: self.grid.codebook().to_vec(),
            },
            classes: self.classes.clone(),
            cluster_class_probs: self.probs.clone(),
        };
        let mut text = serde_json::to_string_pretty(&file).expect("model serializes");
        text.push('\n');
        text
    }

    pub fn from_json(text: &str) -> Result<Self, ClassifierError> {
        let file: ModelFile = serde_json::from_str(text)?;
        if file.version != MODEL_VERSION {
            return Err(ClassifierError::InvalidModel(format!(
                "unsupported version {}",
                file.version
            )));
        }
        let params = PreprocessParams {
            frames: file.params.frames,
            window: file.params.window,
            smoothing_sigma: file.params.sigma,
            smoothing_radius: file.params.radius,
            norm_epsilon: file.params.epsilon,
        };
        params.validate()?;
        let grid = SomGrid::new(
            file.grid.rows,
            file.grid.cols,
            file.grid.dim,
            file.grid.codebook,
        )?;
        if grid.dim() != params.wdf_dim(file.joints) {
            return Err(ClassifierError::InvalidModel(format!(
                "codebook dimension {} does not match J={} and W={}",
                grid.dim(),
                file.joints,
                params.window
            )));
        }
        let c = file.classes.len();
        if c == 0 || file.cluster_class_probs.len() != grid.len() * c {
            return Err(ClassifierError::InvalidModel(format!(
                "cluster_class_probs has {} entries, expected {}",
                file.cluster_class_probs.len(),
                grid.len() * c
            )));
        }
        if file
            .cluster_class_probs
            .iter()
            .any(|p| !(0.0..=1.0).contains(p))
        {
            return Err(ClassifierError::InvalidModel(
                "probability outside [0, 1]".into(),
            ));
        }
        Ok(ClassModel {
            joints: file.joints,
            params,
            grid,
            classes: file.classes,
            probs: file.cluster_class_probs,
        })
    }

    pub fn save(&self, path: &Path) -> Result<(), ClassifierError> {
        fs::write(path, self.to_json()).map_err(|source| ClassifierError::Io {
            path: path.display().to_string(),
            source,
        })
    }

    pub fn load(path: &Path) -> Result<Self, ClassifierError> {
        let text = fs::read_to_string(path).map_err(|source| ClassifierError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    version: u32,
    #[serde(rename = "J")]
    joints: usize,
    params: ParamsFile,
    grid: GridFile,
    classes: Vec<String>,
    cluster_class_probs: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ParamsFile {
    #[serde(rename = "F")]
    frames: usize,
    #[serde(rename = "W")]
    window: usize,
    sigma: f64,
    radius: usize,
    epsilon: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridFile {
    rows: usize,
    cols: usize,
    dim: usize,
    codebook: Vec<f64>,
}

/// Tallies the class of every training WDF per codebook cell and turns
/// each cell's tally into a distribution over `classes`.
pub fn estimate_class_probabilities(
    grid: SomGrid,
    classes: Vec<String>,
    training: &[LabeledSequence<'_>],
    params: PreprocessParams,
    joints: usize,
) -> Result<ClassModel, ClassifierError> {
    let c = classes.len();
    let k = grid.len();
    let mut tally = vec![0usize; k * c];
    let mut seen = 0usize;
    for item in training {
        if item.class >= c {
            return Err(ClassifierError::UnknownClass {
                index: item.class,
                classes: c,
            });
        }
        if item.wdfs.is_empty() {
            continue;
        }
        for (l, n) in bmu_counts(&grid, item.wdfs)?.into_iter().enumerate() {
            tally[l * c + item.class] += n;
            seen += n;
        }
    }
    if seen == 0 {
        return Err(ClassifierError::NoTrainingData);
    }
    let mut probs = vec![0.0; k * c];
    for (row, counts) in probs.chunks_exact_mut(c).zip(tally.chunks_exact(c)) {
        let total: usize = counts.iter().sum();
        if total > 0 {
            for (p, &n) in row.iter_mut().zip(counts) {
                *p = n as f64 / total as f64;
            }
        }
    }
    Ok(ClassModel {
        joints,
        params,
        grid,
        classes,
        probs,
    })
}

/// Unnormalized class scores and the winning class index.
#[derive(Debug, Clone, PartialEq)]
pub struct Posterior {
    pub scores: Vec<f64>,
    pub predicted: usize,
}

impl Posterior {
    /// Scores divided by their sum, or all zeros when the sum is zero.
    pub fn normalized(&self) -> Vec<f64> {
        let total: f64 = self.scores.iter().sum();
        if total > 0.0 {
            self.scores.iter().map(|s| s / total).collect()
        } else {
            vec![0.0; self.scores.len()]
        }
    }
}

/// `score[c] = Σ_l P(c | l) · H[l]`; ties go to the lowest class index.
pub fn class_posterior(model: &ClassModel, h: &Histogram) -> Result<Posterior, ClassifierError> {
    if h.len() != model.grid.len() {
        return Err(ClassifierError::BinMismatch {
            expected: model.grid.len(),
            found: h.len(),
        });
    }
    let c = model.classes.len();
    let mut scores = vec![0.0; c];
    for (row, &weight) in model.probs.chunks_exact(c).zip(&h.bins) {
        if weight == 0.0 {
            continue;
        }
        for (s, p) in scores.iter_mut().zip(row) {
            *s += p * weight;
        }
    }
    let mut predicted = 0;
    for (i, &s) in scores.iter().enumerate() {
        if s > scores[predicted] {
            predicted = i;
        }
    }
    Ok(Posterior { scores, predicted })
}

/// Preprocesses `action` with the model's parameters and scores it.
pub fn classify_action(model: &ClassModel, action: &Action) -> Result<Posterior, ClassifierError> {
    if action.joint_count() != model.joints {
        return Err(ClassifierError::JointMismatch {
            expected: model.joints,
            found: action.joint_count(),
        });
    }
    let wdfs = preprocess_action(action, &model.params)?;
    let h = compute_histogram(&model.grid, &wdfs)?;
    class_posterior(model, &h)
}

/// Preprocesses every action of `ds` in parallel.
pub fn preprocess_all(
    ds: &Dataset,
    params: &PreprocessParams,
) -> Result<Vec<WdfSequence>, PreprocessError> {
    ds.actions()
        .par_iter()
        .map(|a| preprocess_action(a, params))
        .collect()
}

/// Fits the codebook on all WDFs of `train` and estimates the class
/// probabilities from the same WDFs.
pub fn train_model(
    train: &Dataset,
    params: PreprocessParams,
    clusterer: &dyn Clusterer,
) -> Result<ClassModel, ClassifierError> {
    params.validate()?;
    let sequences = preprocess_all(train, &params)?;
    let dim = params.wdf_dim(train.joint_count());
    let samples: Vec<f64> = sequences
        .iter()
        .flat_map(|s| s.as_flat())
        .copied()
        .collect();
    let grid = clusterer.fit(&samples, dim)?;
    let classes = train.class_set().to_vec();
    let labeled: Vec<LabeledSequence<'_>> = sequences
        .iter()
        .zip(train.actions())
        .map(|(wdfs, a)| LabeledSequence {
            wdfs,
            class: classes
                .iter()
                .position(|c| *c == a.class_label)
                .expect("class_set covers every action"),
        })
        .collect();
    estimate_class_probabilities(grid, classes, &labeled, params, train.joint_count())
}
