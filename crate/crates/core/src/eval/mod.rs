//! Experimental protocols: single train/test runs, repeated cross-subject
//! validation, leave-one-subject-out and parameter sweeps.
//!
//! Every random choice derives from the master seed through
//! [`derive_seed`], so a complete experiment is a pure function of the
//! dataset and the configuration. Runs execute in parallel and are reduced
//! in run order.

pub mod report;

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classifier::{classify_action, train_model, ClassifierError};
use crate::dataset::{
    filter_action_set, sorted_labels, split_cross_subject, splits_loso, Dataset, DatasetError,
    Protocol, SplitSpec,
};
use crate::preprocess::{PreprocessError, PreprocessParams};
use crate::som::{Clusterer, KMeans, SomError, SomTrainParams, SomTrainer};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("train and test share subjects {0:?}")]
    SubjectOverlap(Vec<u32>),
    #[error("test set is empty")]
    EmptyTest,
    #[error("training set covers {0} class(es), at least 2 are required")]
    TooFewClasses(usize),
    #[error("invalid configuration: {key}: {message}")]
    InvalidConfig { key: &'static str, message: String },
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Preprocess(#[from] PreprocessError),
    #[error(transparent)]
    Som(#[from] SomError),
    #[error(transparent)]
    Classifier(#[from] ClassifierError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClustererKind {
    Som,
    Kmeans,
}

/// Everything an experiment needs besides the data.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub preprocess: PreprocessParams,
    pub rows: usize,
    pub cols: usize,
    /// The seed field is replaced per run.
    pub som: SomTrainParams,
    pub clusterer: ClustererKind,
    pub kmeans_iterations: usize,
    /// `split.seed` is the master seed. For LOSO, `split.runs` repeats the
    /// folds with different codebook seeds.
    pub split: SplitSpec,
    pub action_set: Option<Vec<String>>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            preprocess: PreprocessParams::default(),
            rows: 25,
            cols: 25,
            som: SomTrainParams::default(),
            clusterer: ClustererKind::Som,
            kmeans_iterations: 50,
            split: SplitSpec {
                protocol: Protocol::CrossSubject,
                seed: 0,
                runs: 30,
            },
            action_set: None,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), EvalError> {
        self.preprocess.validate()?;
        self.som.validate()?;
        if self.rows == 0 || self.cols == 0 || self.rows * self.cols < 2 {
            return Err(EvalError::InvalidConfig {
                key: "codebook.rows",
                message: format!("grid {}x{} needs at least 2 units", self.rows, self.cols),
            });
        }
        if self.split.runs == 0 {
            return Err(EvalError::InvalidConfig {
                key: "evaluation.runs",
                message: "must be at least 1".into(),
            });
        }
        if matches!(&self.action_set, Some(s) if s.is_empty()) {
            return Err(EvalError::InvalidConfig {
                key: "data.action_set",
                message: "selects no classes".into(),
            });
        }
        Ok(())
    }

    /// Number of codebook units.
    pub fn k(&self) -> usize {
        self.rows * self.cols
    }

    pub fn clusterer(&self, seed: u64) -> Box<dyn Clusterer> {
        match self.clusterer {
            ClustererKind::Som => Box::new(SomTrainer::new(
                self.rows,
                self.cols,
                SomTrainParams { seed, ..self.som },
            )),
            ClustererKind::Kmeans => Box::new(KMeans {
                k: self.k(),
                iterations: self.kmeans_iterations,
                seed,
            }),
        }
    }
}

/// Mixes a master seed and an index into an independent 64-bit seed
/// (splitmix64 finalizer).
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Tally {
    pub correct: u64,
    pub total: u64,
}

impl Tally {
    pub fn accuracy(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.correct as f64 / self.total as f64
        }
    }

    fn add(&mut self, other: Tally) {
        self.correct += other.correct;
        self.total += other.total;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub id: String,
    pub subject: u32,
    pub truth: usize,
    pub predicted: usize,
    pub scores: Vec<f64>,
}

/// Outcome of one train/test evaluation (or several merged folds).
#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub classes: Vec<String>,
    /// `confusion[true][predicted]`.
    pub confusion: Vec<Vec<u64>>,
    /// Per true class, the sum of normalized posteriors of its test actions.
    pub prob_sums: Vec<Vec<f64>>,
    pub per_subject: BTreeMap<u32, Tally>,
    pub predictions: Vec<Prediction>,
}

impl RunResult {
    fn empty(classes: Vec<String>) -> Self {
        let c = classes.len();
        RunResult {
            classes,
            confusion: vec![vec![0; c]; c],
            prob_sums: vec![vec![0.0; c]; c],
            per_subject: BTreeMap::new(),
            predictions: Vec::new(),
        }
    }

    fn record(&mut self, p: Prediction) {
        self.confusion[p.truth][p.predicted] += 1;
        let total: f64 = p.scores.iter().sum();
        if total > 0.0 {
            for (acc, s) in self.prob_sums[p.truth].iter_mut().zip(&p.scores) {
                *acc += s / total;
            }
        }
        self.per_subject.entry(p.subject).or_default().add(Tally {
            correct: u64::from(p.truth == p.predicted),
            total: 1,
        });
        self.predictions.push(p);
    }

    fn merge(&mut self, other: RunResult) {
        assert_eq!(
            self.classes, other.classes,
            "merging runs over different classes"
        );
        for p in other.predictions {
            self.record(p);
        }
    }

    pub fn correct(&self) -> u64 {
        (0..self.classes.len()).map(|i| self.confusion[i][i]).sum()
    }

    pub fn total(&self) -> u64 {
        self.confusion.iter().flatten().sum()
    }

    /// `trace(confusion) / Σ confusion`.
    pub fn accuracy(&self) -> f64 {
        Tally {
            correct: self.correct(),
            total: self.total(),
        }
        .accuracy()
    }

    /// Mean normalized posterior per true class; rows without test actions
    /// are zero.
    pub fn prob_matrix(&self) -> Vec<Vec<f64>> {
        self.prob_sums
            .iter()
            .zip(&self.confusion)
            .map(|(sums, counts)| {
                let n: u64 = counts.iter().sum();
                sums.iter()
                    .map(|s| if n == 0 { 0.0 } else { s / n as f64 })
                    .collect()
            })
            .collect()
    }
}

/// Trains on `train` with codebook seed `seed` and classifies every action
/// of `test`. The classes tabulated are the union of both sets.
pub fn run_single(
    train: &Dataset,
    test: &Dataset,
    cfg: &ExperimentConfig,
    seed: u64,
) -> Result<RunResult, EvalError> {
    if test.is_empty() {
        return Err(EvalError::EmptyTest);
    }
    let overlap: Vec<u32> = train
        .subject_set()
        .iter()
        .filter(|s| test.subject_set().contains(s))
        .copied()
        .collect();
    if !overlap.is_empty() {
        return Err(EvalError::SubjectOverlap(overlap));
    }
    if train.class_set().len() < 2 {
        return Err(EvalError::TooFewClasses(train.class_set().len()));
    }
    let classes = sorted_labels(
        train
            .class_set()
            .iter()
            .chain(test.class_set())
            .map(String::as_str),
    );
    let model = train_model(train, cfg.preprocess, cfg.clusterer(seed).as_ref())?;
    let index_of = |label: &str| {
        classes
            .iter()
            .position(|c| c == label)
            .expect("class in union")
    };
    let model_to_union: Vec<usize> = model.classes().iter().map(|c| index_of(c)).collect();

    let predictions = test
        .actions()
        .par_iter()
        .map(|a| {
            let posterior = classify_action(&model, a)?;
            let mut scores = vec![0.0; classes.len()];
            for (i, s) in posterior.scores.iter().enumerate() {
                scores[model_to_union[i]] = *s;
            }
            Ok(Prediction {
                id: a.id.clone(),
                subject: a.subject,
                truth: index_of(&a.class_label),
                predicted: model_to_union[posterior.predicted],
                scores,
            })
        })
        .collect::<Result<Vec<_>, ClassifierError>>()?;

    let mut result = RunResult::empty(classes);
    for p in predictions {
        result.record(p);
    }
    Ok(result)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RunRecord {
    pub run: usize,
    pub seed: u64,
    pub accuracy: f64,
    pub correct: u64,
    pub total: u64,
}

/// Summary over repeated runs.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateResult {
    pub classes: Vec<String>,
    pub runs: Vec<RunRecord>,
    pub mean: f64,
    /// Sample standard deviation (n - 1); zero for a single run.
    pub std_dev: f64,
    pub mean_confusion: Vec<Vec<f64>>,
    pub mean_prob_matrix: Vec<Vec<f64>>,
    /// Subject tallies accumulated over every run in which the subject was
    /// tested.
    pub per_subject: BTreeMap<u32, Tally>,
}

pub fn mean_and_std(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (0.0, 0.0);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
    (mean, var.sqrt())
}

fn aggregate(results: Vec<(usize, u64, RunResult)>) -> AggregateResult {
    let classes = results[0].2.classes.clone();
    let c = classes.len();
    let n = results.len() as f64;
    let mut mean_confusion = vec![vec![0.0; c]; c];
    let mut mean_prob_matrix = vec![vec![0.0; c]; c];
    let mut per_subject: BTreeMap<u32, Tally> = BTreeMap::new();
    let mut runs = Vec::with_capacity(results.len());
    for (run, seed, r) in &results {
        for (acc, row) in mean_confusion.iter_mut().zip(&r.confusion) {
            for (a, v) in acc.iter_mut().zip(row) {
                *a += *v as f64 / n;
            }
        }
        for (acc, row) in mean_prob_matrix.iter_mut().zip(r.prob_matrix()) {
            for (a, v) in acc.iter_mut().zip(row) {
                *a += v / n;
            }
        }
        for (s, t) in &r.per_subject {
            per_subject.entry(*s).or_default().add(*t);
        }
        runs.push(RunRecord {
            run: *run,
            seed: *seed,
            accuracy: r.accuracy(),
            correct: r.correct(),
            total: r.total(),
        });
    }
    let accuracies: Vec<f64> = runs.iter().map(|r| r.accuracy).collect();
    let (mean, std_dev) = mean_and_std(&accuracies);
    AggregateResult {
        classes,
        runs,
        mean,
        std_dev,
        mean_confusion,
        mean_prob_matrix,
        per_subject,
    }
}

/// Repeats random 50/50 subject splits `runs` times. Run `r` uses seed
/// `derive_seed(master, r)` for the split and a seed derived from that for
/// the codebook.
pub fn cross_validate(
    ds: &Dataset,
    cfg: &ExperimentConfig,
    runs: usize,
) -> Result<AggregateResult, EvalError> {
    if runs == 0 {
        return Err(EvalError::InvalidConfig {
            key: "evaluation.runs",
            message: "must be at least 1".into(),
        });
    }
    cfg.validate()?;
    let results = (0..runs)
        .into_par_iter()
        .map(|run| {
            let seed = derive_seed(cfg.split.seed, run as u64);
            let (train, test) = split_cross_subject(ds, seed)?;
            let result = run_single(&train, &test, cfg, derive_seed(seed, 0))?;
            Ok((run, seed, result))
        })
        .collect::<Result<Vec<_>, EvalError>>()?;
    Ok(aggregate(results))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FoldRecord {
    pub repeat: usize,
    pub subject: u32,
    pub seed: u64,
    pub correct: u64,
    pub total: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LosoResult {
    /// One entry per repeat; each repeat's accuracy is total correct over
    /// total test actions across all folds.
    pub aggregate: AggregateResult,
    pub folds: Vec<FoldRecord>,
}

/// Leave-one-subject-out, repeated `cfg.split.runs` times with different
/// codebook seeds.
pub fn evaluate_loso(ds: &Dataset, cfg: &ExperimentConfig) -> Result<LosoResult, EvalError> {
    cfg.validate()?;
    let folds = splits_loso(ds)?;
    let jobs: Vec<(usize, usize)> = (0..cfg.split.runs)
        .flat_map(|r| (0..folds.len()).map(move |f| (r, f)))
        .collect();
    let outcomes = jobs
        .par_iter()
        .map(|&(repeat, f)| {
            let (subject, train, test) = &folds[f];
            let seed = derive_seed(
                derive_seed(cfg.split.seed, repeat as u64),
                u64::from(*subject),
            );
            let result = run_single(train, test, cfg, seed)?;
            Ok((repeat, *subject, seed, result))
        })
        .collect::<Result<Vec<_>, EvalError>>()?;

    let mut fold_records = Vec::with_capacity(outcomes.len());
    let mut per_repeat: Vec<Option<RunResult>> = vec![None; cfg.split.runs];
    for (repeat, subject, seed, result) in outcomes {
        fold_records.push(FoldRecord {
            repeat,
            subject,
            seed,
            correct: result.correct(),
            total: result.total(),
        });
        match &mut per_repeat[repeat] {
            Some(acc) => acc.merge(result),
            slot @ None => *slot = Some(result),
        }
    }
    let repeats = per_repeat
        .into_iter()
        .enumerate()
        .map(|(r, res)| {
            (
                r,
                derive_seed(cfg.split.seed, r as u64),
                res.expect("every repeat has folds"),
            )
        })
        .collect();
    Ok(LosoResult {
        aggregate: aggregate(repeats),
        folds: fold_records,
    })
}

/// Applies the configured action-set filter and runs the configured
/// protocol.
pub fn run_protocol(ds: &Dataset, cfg: &ExperimentConfig) -> Result<AggregateResult, EvalError> {
    let filtered;
    let ds = match &cfg.action_set {
        Some(classes) => {
            filtered = filter_action_set(ds, classes)?.dataset;
            &filtered
        }
        None => ds,
    };
    match cfg.split.protocol {
        Protocol::CrossSubject => cross_validate(ds, cfg, cfg.split.runs),
        Protocol::Loso => Ok(evaluate_loso(ds, cfg)?.aggregate),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub set: String,
    pub window: usize,
    pub rows: usize,
    pub cols: usize,
    pub k: usize,
    pub mean: f64,
    pub std_dev: f64,
}

/// Result of [`parameter_sweep`]. When several action sets are swept,
/// `set_means` holds the unweighted mean of the set means per
/// `(window, grid)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
    pub set_means: Vec<SweepRow>,
}

/// Runs the configured protocol for every combination of window size and
/// grid shape, once per action set (or once on the whole dataset when
/// `action_sets` is empty).
pub fn parameter_sweep(
    ds: &Dataset,
    base: &ExperimentConfig,
    windows: &[usize],
    grids: &[(usize, usize)],
    action_sets: &[(String, Vec<String>)],
) -> Result<SweepTable, EvalError> {
    if let Some(&w) = windows
        .iter()
        .find(|&&w| w == 0 || w >= base.preprocess.frames)
    {
        return Err(EvalError::InvalidConfig {
            key: "sweep.windows",
            message: format!(
                "window {w} must satisfy 1 <= W < F = {}",
                base.preprocess.frames
            ),
        });
    }
    let sets: Vec<(String, Option<Vec<String>>)> = if action_sets.is_empty() {
        vec![("all".to_string(), base.action_set.clone())]
    } else {
        action_sets
            .iter()
            .map(|(n, c)| (n.clone(), Some(c.clone())))
            .collect()
    };
    let mut rows = Vec::new();
    for (name, classes) in &sets {
        for &(r, c) in grids {
            for &w in windows {
                let cfg = ExperimentConfig {
                    preprocess: PreprocessParams {
                        window: w,
                        ..base.preprocess
                    },
                    rows: r,
                    cols: c,
                    action_set: classes.clone(),
                    ..base.clone()
                };
                let agg = run_protocol(ds, &cfg)?;
                rows.push(SweepRow {
                    set: name.clone(),
                    window: w,
                    rows: r,
                    cols: c,
                    k: r * c,
                    mean: agg.mean,
                    std_dev: agg.std_dev,
                });
            }
        }
    }
    let mut set_means = Vec::new();
    if sets.len() > 1 {
        for &(r, c) in grids {
            for &w in windows {
                let means: Vec<f64> = rows
                    .iter()
                    .filter(|row| row.window == w && row.rows == r && row.cols == c)
                    .map(|row| row.mean)
                    .collect();
                let (mean, std_dev) = mean_and_std(&means);
                set_means.push(SweepRow {
                    set: "mean".into(),
                    window: w,
                    rows: r,
                    cols: c,
                    k: r * c,
                    mean,
                    std_dev,
                });
            }
        }
    }
    Ok(SweepTable { rows, set_means })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthetic::{disjoint_vocabulary, CorpusShape};

    fn small_cfg() -> ExperimentConfig {
        ExperimentConfig {
            preprocess: PreprocessParams::new(16, 3),
            rows: 4,
            cols: 4,
            som: SomTrainParams {
                epochs: 5,
                ..Default::default()
            },
            split: SplitSpec {
                protocol: Protocol::CrossSubject,
                seed: 42,
                runs: 2,
            },
            ..Default::default()
        }
    }

    fn corpus(classes: usize, subjects: u32) -> Dataset {
        disjoint_vocabulary(&CorpusShape {
            classes,
            subjects,
            instances: 3,
            joints: 2,
            ..Default::default()
        })
    }

    #[test]
    fn seeds_are_mixed() {
        assert_ne!(derive_seed(1, 0), derive_seed(1, 1));
        assert_ne!(derive_seed(1, 0), derive_seed(2, 0));
        assert_eq!(derive_seed(7, 3), derive_seed(7, 3));
    }

    #[test]
    fn sample_std() {
        assert_eq!(mean_and_std(&[0.5]), (0.5, 0.0));
        let (m, s) = mean_and_std(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        assert!((s - (5.0f64 / 3.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn overlapping_subjects_rejected() {
        let ds = corpus(3, 4);
        let err = run_single(&ds, &ds, &small_cfg(), 0).unwrap_err();
        assert!(matches!(err, EvalError::SubjectOverlap(_)), "{err}");
    }

    #[test]
    fn single_class_training_rejected() {
        let ds = corpus(3, 4);
        let train = filter_action_set(&ds.select_subjects(|s| s <= 2).unwrap(), &["c0".into()])
            .unwrap()
            .dataset;
        let test = ds.select_subjects(|s| s > 2).unwrap();
        assert!(matches!(
            run_single(&train, &test, &small_cfg(), 0),
            Err(EvalError::TooFewClasses(1))
        ));
    }

    #[test]
    fn separable_data_is_perfect() {
        let ds = corpus(3, 4);
        let (train, test) = split_cross_subject(&ds, 1).unwrap();
        let r = run_single(&train, &test, &small_cfg(), 5).unwrap();
        assert_eq!(r.accuracy(), 1.0);
        for (i, row) in r.confusion.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                assert!(i == j || v == 0);
            }
        }
        for (i, row) in r.prob_matrix().iter().enumerate() {
            assert!(row.iter().sum::<f64>() <= 1.0 + 1e-9);
            assert!(row[i] > 0.9);
        }
        let counts: Vec<u64> = r.confusion.iter().map(|row| row.iter().sum()).collect();
        let expected: Vec<u64> = r
            .classes
            .iter()
            .map(|c| {
                test.actions()
                    .iter()
                    .filter(|a| &a.class_label == c)
                    .count() as u64
            })
            .collect();
        assert_eq!(counts, expected);
    }

    #[test]
    fn one_run_has_zero_spread_and_repeats_exactly() {
        let ds = corpus(2, 4);
        let cfg = small_cfg();
        let one = cross_validate(&ds, &cfg, 1).unwrap();
        assert_eq!(one.runs.len(), 1);
        assert_eq!(one.mean, one.runs[0].accuracy);
        assert_eq!(one.std_dev, 0.0);
        let a = cross_validate(&ds, &cfg, 3).unwrap();
        let b = cross_validate(&ds, &cfg, 3).unwrap();
        assert_eq!(a, b);
        let accs: Vec<f64> = a.runs.iter().map(|r| r.accuracy).collect();
        assert_eq!(mean_and_std(&accs), (a.mean, a.std_dev));
        assert!(matches!(
            cross_validate(&ds, &cfg, 0),
            Err(EvalError::InvalidConfig { .. })
        ));
    }

    #[test]
    fn loso_per_subject_weights() {
        let ds = corpus(3, 4);
        let cfg = ExperimentConfig {
            split: SplitSpec {
                protocol: Protocol::Loso,
                seed: 3,
                runs: 1,
            },
            ..small_cfg()
        };
        let out = evaluate_loso(&ds, &cfg).unwrap();
        assert_eq!(out.folds.len(), 4);
        assert_eq!(out.aggregate.per_subject.len(), 4);
        let (correct, total) = out
            .aggregate
            .per_subject
            .values()
            .fold((0, 0), |(c, t), s| (c + s.correct, t + s.total));
        assert_eq!(total as usize, ds.len());
        let weighted: f64 = out
            .aggregate
            .per_subject
            .values()
            .map(|s| s.accuracy() * s.total as f64)
            .sum::<f64>()
            / total as f64;
        assert!((weighted - out.aggregate.mean).abs() < 1e-12);
        assert_eq!(out.aggregate.mean, correct as f64 / total as f64);
        assert!(out
            .aggregate
            .per_subject
            .values()
            .all(|s| s.accuracy() == 1.0));
    }

    #[test]
    fn sweep_shapes() {
        let ds = corpus(2, 4);
        let cfg = ExperimentConfig {
            split: SplitSpec {
                runs: 1,
                ..small_cfg().split
            },
            ..small_cfg()
        };
        let table = parameter_sweep(&ds, &cfg, &[1, 3, 5, 7], &[(3, 3)], &[]).unwrap();
        assert_eq!(table.rows.len(), 4);
        assert!(table.set_means.is_empty());
        let direct = cross_validate(
            &ds,
            &ExperimentConfig {
                rows: 3,
                cols: 3,
                ..cfg.clone()
            },
            1,
        )
        .unwrap();
        let row = table.rows.iter().find(|r| r.window == 3).unwrap();
        assert_eq!(row.mean, direct.mean);

        let sets = vec![
            ("A".to_string(), vec!["c0".to_string(), "c1".to_string()]),
            ("B".to_string(), vec!["c0".to_string(), "c1".to_string()]),
        ];
        let table = parameter_sweep(&ds, &cfg, &[3], &[(3, 3)], &sets).unwrap();
        assert_eq!(table.rows.len(), 2);
        assert_eq!(table.set_means.len(), 1);
        assert!(parameter_sweep(&ds, &cfg, &[16], &[(3, 3)], &[]).is_err());
    }
}
