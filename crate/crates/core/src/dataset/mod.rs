//! Action recordings, datasets and the subject-disjoint splits used for
//! evaluation.
//!
//! Every loader produces the same [`Action`] shape: an ordered sequence of
//! position frames with a fixed number of joints. Public datasets are read
//! through adapters ([`action3d`], [`msrc12`]) and can be converted to the
//! plain-text canonical format in [`canonical`].

pub mod action3d;
pub mod canonical;
pub mod msrc12;

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashSet};
use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::Point3;

pub use canonical::{parse_action_file, serialize_action};

/// File extension of canonical action files inside a dataset directory.
pub const ACTION_EXTENSION: &str = "action";
/// Optional list of action ids to leave out, one per line.
pub const EXCLUDE_FILE: &str = "exclude.txt";

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("{path}: {source}")]
    InFile {
        path: PathBuf,
        #[source]
        source: Box<DatasetError>,
    },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid action: {0}")]
    InvalidAction(String),
    #[error("unparseable file name {0:?}")]
    FileName(String),
    #[error(
        "frame boundary mismatch: {records} joint records is not a multiple of {joints} joints"
    )]
    FrameBoundary { records: usize, joints: usize },
    #[error("annotation {position} is outside the sequence range {range}")]
    AnnotationOutOfRange { position: f64, range: String },
    #[error("layout mismatch on line {line}: {message}")]
    Layout { line: usize, message: String },
    #[error("actions disagree on joint count: {expected} vs {found} in {id:?}")]
    JointCountMismatch {
        expected: usize,
        found: usize,
        id: String,
    },
    #[error("dataset is empty")]
    Empty,
    #[error("no input files in {0}")]
    NoInputFiles(PathBuf),
    #[error("at least 2 subjects are required, found {0}")]
    TooFewSubjects(usize),
    #[error("action set filter is empty")]
    EmptyFilter,
    #[error("invalid adapter configuration: {0}")]
    Config(String),
}

impl DatasetError {
    pub(crate) fn in_file(self, path: &Path) -> Self {
        DatasetError::InFile {
            path: path.to_path_buf(),
            source: Box::new(self),
        }
    }

    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        DatasetError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

/// One recorded action: `frames × joints` positions stored frame-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Action {
    pub id: String,
    pub subject: u32,
    pub class_label: String,
    joints: usize,
    positions: Vec<Point3>,
}

impl Action {
    /// Builds an action from frame-major positions, checking that the data
    /// forms at least two complete finite frames.
    pub fn new(
        id: impl Into<String>,
        subject: u32,
        class_label: impl Into<String>,
        joints: usize,
        positions: Vec<Point3>,
    ) -> Result<Self, DatasetError> {
        let id = id.into();
        if joints == 0 {
            return Err(DatasetError::InvalidAction(format!("{id}: no joints")));
        }
        if !positions.len().is_multiple_of(joints) {
            return Err(DatasetError::InvalidAction(format!(
                "{id}: {} positions do not form whole frames of {joints} joints",
                positions.len()
            )));
        }
        let frames = positions.len() / joints;
        if frames < 2 {
            return Err(DatasetError::InvalidAction(format!(
                "{id}: at least 2 frames are required, found {frames}"
            )));
        }
        if positions.iter().flatten().any(|v| !v.is_finite()) {
            return Err(DatasetError::InvalidAction(format!(
                "{id}: non-finite coordinate"
            )));
        }
        Ok(Action {
            id,
            subject,
            class_label: class_label.into(),
            joints,
            positions,
        })
    }

    pub fn from_frames(
        id: impl Into<String>,
        subject: u32,
        class_label: impl Into<String>,
        frames: Vec<Vec<Point3>>,
    ) -> Result<Self, DatasetError> {
        let id = id.into();
        let joints = frames.first().map_or(0, Vec::len);
        if let Some(f) = frames.iter().position(|f| f.len() != joints) {
            return Err(DatasetError::InvalidAction(format!(
                "{id}: frame {f} has {} joints, expected {joints}",
                frames[f].len()
            )));
        }
        Action::new(id, subject, class_label, joints, frames.concat())
    }

    pub fn frame_count(&self) -> usize {
        self.positions.len() / self.joints
    }

    pub fn joint_count(&self) -> usize {
        self.joints
    }

    /// All positions, frame-major.
    pub fn positions(&self) -> &[Point3] {
        &self.positions
    }

    pub fn frame(&self, f: usize) -> &[Point3] {
        &self.positions[f * self.joints..(f + 1) * self.joints]
    }

    pub fn frames(&self) -> impl Iterator<Item = &[Point3]> {
        self.positions.chunks_exact(self.joints)
    }

    /// The path traced by joint `j` over all frames.
    pub fn joint_path(&self, j: usize) -> Vec<Point3> {
        self.frames().map(|frame| frame[j]).collect()
    }

    /// Copy with every position shifted by `offset`.
    pub fn translated(&self, offset: Point3) -> Action {
        self.map_positions(|p| [p[0] + offset[0], p[1] + offset[1], p[2] + offset[2]])
    }

    /// Copy with every coordinate multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Action {
        self.map_positions(|p| [p[0] * factor, p[1] * factor, p[2] * factor])
    }

    fn map_positions(&self, f: impl Fn(&Point3) -> Point3) -> Action {
        Action {
            positions: self.positions.iter().map(f).collect(),
            ..self.clone()
        }
    }
}

/// Orders labels numerically when both are integers, lexically otherwise, so
/// that class `"2"` sorts before `"10"`.
pub fn compare_labels(a: &str, b: &str) -> Ordering {
    match (a.parse::<u64>(), b.parse::<u64>()) {
        (Ok(x), Ok(y)) => x.cmp(&y).then_with(|| a.cmp(b)),
        (Ok(_), Err(_)) => Ordering::Less,
        (Err(_), Ok(_)) => Ordering::Greater,
        (Err(_), Err(_)) => a.cmp(b),
    }
}

pub(crate) fn sorted_labels<'a>(labels: impl IntoIterator<Item = &'a str>) -> Vec<String> {
    let mut out: Vec<String> = labels
        .into_iter()
        .collect::<HashSet<_>>()
        .into_iter()
        .map(str::to_string)
        .collect();
    out.sort_by(|a, b| compare_labels(a, b));
    out
}

/// A non-empty set of actions sharing one joint count.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    actions: Vec<Action>,
    joints: usize,
    classes: Vec<String>,
    subjects: Vec<u32>,
}

impl Dataset {
    pub fn new(actions: Vec<Action>) -> Result<Self, DatasetError> {
        let first = actions.first().ok_or(DatasetError::Empty)?;
        let joints = first.joint_count();
        if let Some(bad) = actions.iter().find(|a| a.joint_count() != joints) {
            return Err(DatasetError::JointCountMismatch {
                expected: joints,
                found: bad.joint_count(),
                id: bad.id.clone(),
            });
        }
        let classes = sorted_labels(actions.iter().map(|a| a.class_label.as_str()));
        let subjects = actions
            .iter()
            .map(|a| a.subject)
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        Ok(Dataset {
            actions,
            joints,
            classes,
            subjects,
        })
    }

    pub fn actions(&self) -> &[Action] {
        &self.actions
    }

    pub fn into_actions(self) -> Vec<Action> {
        self.actions
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn joint_count(&self) -> usize {
        self.joints
    }

    /// Distinct class labels in natural order.
    pub fn class_set(&self) -> &[String] {
        &self.classes
    }

    /// Distinct subject ids in ascending order.
    pub fn subject_set(&self) -> &[u32] {
        &self.subjects
    }

    /// The actions whose subject satisfies `keep`.
    pub fn select_subjects(&self, keep: impl Fn(u32) -> bool) -> Result<Dataset, DatasetError> {
        Dataset::new(
            self.actions
                .iter()
                .filter(|a| keep(a.subject))
                .cloned()
                .collect(),
        )
    }

    /// Drops the actions whose id is listed in `ids`.
    pub fn without_ids(&self, ids: &HashSet<String>) -> Result<Dataset, DatasetError> {
        Dataset::new(
            self.actions
                .iter()
                .filter(|a| !ids.contains(&a.id))
                .cloned()
                .collect(),
        )
    }
}

/// Result of [`filter_action_set`]: the filtered data plus the requested
/// labels that did not occur in the input.
#[derive(Debug, Clone)]
pub struct Filtered {
    pub dataset: Dataset,
    pub missing: Vec<String>,
}

/// Keeps exactly the actions whose class is listed in `classes`. Unknown
/// labels are reported in [`Filtered::missing`] and logged as warnings.
pub fn filter_action_set(ds: &Dataset, classes: &[String]) -> Result<Filtered, DatasetError> {
    if classes.is_empty() {
        return Err(DatasetError::EmptyFilter);
    }
    let wanted: HashSet<&str> = classes.iter().map(String::as_str).collect();
    let missing: Vec<String> = classes
        .iter()
        .filter(|c| !ds.class_set().contains(c))
        .cloned()
        .collect();
    for label in &missing {
        log::warn!("action set filter: class {label:?} does not occur in the dataset");
    }
    let dataset = Dataset::new(
        ds.actions
            .iter()
            .filter(|a| wanted.contains(a.class_label.as_str()))
            .cloned()
            .collect(),
    )?;
    Ok(Filtered { dataset, missing })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Protocol {
    /// Subjects split 50/50 at random, repeated over several runs.
    CrossSubject,
    /// One fold per subject.
    Loso,
}

/// How an evaluation partitions a dataset.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SplitSpec {
    pub protocol: Protocol,
    pub seed: u64,
    pub runs: usize,
}

/// Partitions the subjects into `ceil(S/2)` training and `floor(S/2)` test
/// subjects, uniformly at random for the given seed.
pub fn split_cross_subject(ds: &Dataset, seed: u64) -> Result<(Dataset, Dataset), DatasetError> {
    let subjects = ds.subject_set();
    if subjects.len() < 2 {
        return Err(DatasetError::TooFewSubjects(subjects.len()));
    }
    let mut order = subjects.to_vec();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let train: HashSet<u32> = order[..subjects.len().div_ceil(2)]
        .iter()
        .copied()
        .collect();
    Ok((
        ds.select_subjects(|s| train.contains(&s))?,
        ds.select_subjects(|s| !train.contains(&s))?,
    ))
}

/// One `(subject, train, test)` fold per subject, in ascending subject order.
pub fn splits_loso(ds: &Dataset) -> Result<Vec<(u32, Dataset, Dataset)>, DatasetError> {
    let subjects = ds.subject_set();
    if subjects.len() < 2 {
        return Err(DatasetError::TooFewSubjects(subjects.len()));
    }
    subjects
        .iter()
        .map(|&held_out| {
            Ok((
                held_out,
                ds.select_subjects(|s| s != held_out)?,
                ds.select_subjects(|s| s == held_out)?,
            ))
        })
        .collect()
}

/// Reads `exclude.txt` from `dir` if present. Blank lines and `#` comments
/// are ignored.
pub fn read_exclusions(dir: &Path) -> Result<Option<HashSet<String>>, DatasetError> {
    let path = dir.join(EXCLUDE_FILE);
    if !path.exists() {
        return Ok(None);
    }
    let text = fs::read_to_string(&path).map_err(|e| DatasetError::io(&path, e))?;
    Ok(Some(
        text.lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(str::to_string)
            .collect(),
    ))
}

pub(crate) fn list_files(dir: &Path, extension: &str) -> Result<Vec<PathBuf>, DatasetError> {
    let entries = fs::read_dir(dir).map_err(|e| DatasetError::io(dir, e))?;
    let mut files = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| DatasetError::io(dir, e))?.path();
        if path.is_file()
            && path
                .extension()
                .is_some_and(|e| e.eq_ignore_ascii_case(extension))
        {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

/// Loads every `*.action` file in `dir`, sorted by file name. When
/// `apply_exclusions` is set, ids listed in `exclude.txt` are dropped.
pub fn load_dir(dir: &Path, apply_exclusions: bool) -> Result<Dataset, DatasetError> {
    let files = list_files(dir, ACTION_EXTENSION)?;
    if files.is_empty() {
        return Err(DatasetError::NoInputFiles(dir.to_path_buf()));
    }
    let actions = files
        .par_iter()
        .map(|path| {
            let text = fs::read_to_string(path).map_err(|e| DatasetError::io(path, e))?;
            parse_action_file(&text).map_err(|e| e.in_file(path))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let ds = Dataset::new(actions)?;
    match read_exclusions(dir)? {
        Some(ids) if apply_exclusions => ds.without_ids(&ids),
        _ => Ok(ds),
    }
}

/// Writes one canonical file per action, named after its id.
pub fn write_dir(ds: &Dataset, dir: &Path) -> Result<(), DatasetError> {
    fs::create_dir_all(dir).map_err(|e| DatasetError::io(dir, e))?;
    ds.actions().par_iter().try_for_each(|action| {
        let path = dir.join(format!("{}.{ACTION_EXTENSION}", action.id));
        fs::write(&path, serialize_action(action)).map_err(|e| DatasetError::io(&path, e))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn action(id: &str, subject: u32, class: &str) -> Action {
        Action::new(id, subject, class, 1, vec![[0.0; 3], [1.0, 0.0, 0.0]]).unwrap()
    }

    fn grid_dataset(subjects: u32, classes: &[&str]) -> Dataset {
        let mut actions = Vec::new();
        for s in 1..=subjects {
            for c in classes {
                actions.push(action(&format!("s{s}_{c}"), s, c));
            }
        }
        Dataset::new(actions).unwrap()
    }

    #[test]
    fn action_validation() {
        assert!(Action::new("a", 1, "x", 2, vec![[0.0; 3]; 2]).is_err());
        assert!(Action::new("a", 1, "x", 2, vec![[0.0; 3]; 3]).is_err());
        assert!(Action::new("a", 1, "x", 1, vec![[0.0, f64::NAN, 0.0], [0.0; 3]]).is_err());
        let a = Action::new("a", 1, "x", 2, vec![[0.0; 3]; 4]).unwrap();
        assert_eq!((a.frame_count(), a.joint_count()), (2, 2));
    }

    #[test]
    fn labels_sort_naturally() {
        assert_eq!(
            sorted_labels(["10", "2", "b", "a", "2"]),
            ["2", "10", "a", "b"]
        );
    }

    #[test]
    fn dataset_rejects_mixed_joint_counts() {
        let a = action("a", 1, "x");
        let b = Action::new("b", 1, "x", 2, vec![[0.0; 3]; 4]).unwrap();
        assert!(matches!(
            Dataset::new(vec![a, b]),
            Err(DatasetError::JointCountMismatch { .. })
        ));
        assert!(matches!(Dataset::new(vec![]), Err(DatasetError::Empty)));
    }

    #[test]
    fn filter_subset_identity_and_unknown() {
        let labels: Vec<String> = (1..=20).map(|c| c.to_string()).collect();
        let label_refs: Vec<&str> = labels.iter().map(String::as_str).collect();
        let ds = grid_dataset(2, &label_refs);

        let eight: Vec<String> = labels[..8].to_vec();
        let f = filter_action_set(&ds, &eight).unwrap();
        assert!(f.dataset.len() <= ds.len());
        assert!(f.dataset.class_set().iter().all(|c| eight.contains(c)));

        let all = filter_action_set(&ds, ds.class_set()).unwrap();
        assert_eq!(all.dataset, ds);
        assert!(all.missing.is_empty());

        let mut with_unknown = eight.clone();
        with_unknown.push("nope".into());
        let g = filter_action_set(&ds, &with_unknown).unwrap();
        assert_eq!(g.dataset, f.dataset);
        assert_eq!(g.missing, ["nope"]);

        let again = filter_action_set(&f.dataset, &eight).unwrap();
        assert_eq!(again.dataset, f.dataset);
        assert!(matches!(
            filter_action_set(&ds, &[]),
            Err(DatasetError::EmptyFilter)
        ));
    }

    #[test]
    fn cross_subject_split_sizes() {
        for (subjects, train, test) in [(10, 5, 5), (3, 2, 1), (2, 1, 1)] {
            let ds = grid_dataset(subjects, &["a", "b"]);
            let (tr, te) = split_cross_subject(&ds, 7).unwrap();
            assert_eq!(tr.subject_set().len(), train);
            assert_eq!(te.subject_set().len(), test);
            assert!(tr
                .subject_set()
                .iter()
                .all(|s| !te.subject_set().contains(s)));
            let mut union: Vec<u32> = [tr.subject_set(), te.subject_set()].concat();
            union.sort();
            assert_eq!(union, ds.subject_set());
            assert_eq!(tr.len() + te.len(), ds.len());
        }
    }

    #[test]
    fn cross_subject_split_is_seeded() {
        let ds = grid_dataset(10, &["a"]);
        let first = split_cross_subject(&ds, 3).unwrap();
        assert_eq!(first, split_cross_subject(&ds, 3).unwrap());
        let distinct = (0..20)
            .map(|seed| {
                split_cross_subject(&ds, seed)
                    .unwrap()
                    .0
                    .subject_set()
                    .to_vec()
            })
            .collect::<HashSet<_>>();
        assert!(distinct.len() > 1);
    }

    #[test]
    fn single_subject_cannot_split() {
        let ds = grid_dataset(1, &["a", "b"]);
        assert!(matches!(
            split_cross_subject(&ds, 0),
            Err(DatasetError::TooFewSubjects(1))
        ));
        assert!(matches!(
            splits_loso(&ds),
            Err(DatasetError::TooFewSubjects(1))
        ));
    }

    #[test]
    fn loso_folds_partition_actions() {
        let ds = grid_dataset(30, &["a", "b", "c"]);
        let folds = splits_loso(&ds).unwrap();
        assert_eq!(folds.len(), 30);
        let mut tested = 0;
        for (subject, train, test) in &folds {
            assert_eq!(test.subject_set(), [*subject]);
            assert!(!train.subject_set().contains(subject));
            assert_eq!(train.subject_set().len() + 1, 30);
            tested += test.len();
        }
        assert_eq!(tested, ds.len());
    }

    #[test]
    fn load_dir_round_trip_with_exclusions() {
        let dir = tempfile::tempdir().unwrap();
        let ds = grid_dataset(2, &["a", "b"]);
        write_dir(&ds, dir.path()).unwrap();
        assert_eq!(load_dir(dir.path(), true).unwrap(), ds);

        fs::write(dir.path().join(EXCLUDE_FILE), "# corrupt\ns1_a\n\n").unwrap();
        assert_eq!(load_dir(dir.path(), true).unwrap().len(), 3);
        assert_eq!(load_dir(dir.path(), false).unwrap().len(), 4);
    }

    #[test]
    fn load_dir_reports_empty_directory() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(
            load_dir(dir.path(), true),
            Err(DatasetError::NoInputFiles(_))
        ));
    }
}
