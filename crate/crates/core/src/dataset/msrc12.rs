//! MSRC-12 gesture sequences.
//!
//! Each recording holds several performances of one gesture. A sequence file
//! (`<stem>.csv`) has one row per frame; an annotation file
//! (`<stem>.tagstream`) marks each performance with one position. The
//! adapter cuts one [`Action`] around every annotation. Column layout,
//! annotation units and the cut extent all come from [`Msrc12Layout`].

use std::fs;
use std::path::Path;

use rayon::prelude::*;
use regex::Regex;
use serde::{Deserialize, Serialize};

use super::{list_files, Action, Dataset, DatasetError};
use crate::Point3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AnnotationUnits {
    /// Annotations are 0-based frame indices.
    Frame,
    /// Annotations are times, mapped through `scale`/`offset` onto the
    /// timestamp column and snapped to the nearest frame.
    Timestamp,
}

/// Describes where the numbers live in a sequence row and how annotations
/// turn into instance boundaries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Msrc12Layout {
    pub joints: usize,
    pub timestamp_column: Option<usize>,
    pub first_joint_column: usize,
    pub joint_stride: usize,
    pub coordinate_offsets: [usize; 3],
    pub sequence_extension: String,
    pub annotation_extension: String,
    pub annotation_units: AnnotationUnits,
    pub annotation_scale: f64,
    pub annotation_offset: f64,
    /// Frames kept before the annotated frame.
    pub frames_before: usize,
    /// Frames kept after the annotated frame.
    pub frames_after: usize,
    /// Regex with one capture group extracting the subject id from the stem.
    pub subject_pattern: String,
    /// Regex with one capture group extracting the class from the stem.
    /// When unset the second annotation column is the class.
    pub class_pattern: Option<String>,
}

impl Default for Msrc12Layout {
    fn default() -> Self {
        Msrc12Layout {
            joints: 20,
            timestamp_column: Some(0),
            first_joint_column: 1,
            joint_stride: 4,
            coordinate_offsets: [0, 1, 2],
            sequence_extension: "csv".into(),
            annotation_extension: "tagstream".into(),
            annotation_units: AnnotationUnits::Timestamp,
            // tagstream ticks -> milliseconds
            annotation_scale: 1000.0 / 49875.0,
            annotation_offset: 0.5,
            frames_before: 40,
            frames_after: 10,
            subject_pattern: r"(?i)_p(\d+)$".into(),
            class_pattern: None,
        }
    }
}

impl Msrc12Layout {
    fn required_columns(&self) -> usize {
        let joints_end = self.first_joint_column
            + self.joint_stride * (self.joints - 1)
            + self.coordinate_offsets.iter().max().copied().unwrap_or(0)
            + 1;
        joints_end.max(self.timestamp_column.map_or(0, |c| c + 1))
    }

    fn validate(&self) -> Result<(), DatasetError> {
        if self.joints == 0 {
            return Err(DatasetError::Config("joints must be positive".into()));
        }
        if self.joint_stride == 0 {
            return Err(DatasetError::Config("joint_stride must be positive".into()));
        }
        if self.timestamp_column.is_none() && self.annotation_units == AnnotationUnits::Timestamp {
            return Err(DatasetError::Config(
                "annotation_units = \"timestamp\" requires timestamp_column".into(),
            ));
        }
        if !(self.annotation_scale.is_finite() && self.annotation_scale > 0.0) {
            return Err(DatasetError::Config(
                "annotation_scale must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Parsed sequence file.
#[derive(Debug, Clone, PartialEq)]
pub struct Sequence {
    pub joints: usize,
    pub timestamps: Option<Vec<f64>>,
    pub positions: Vec<Point3>,
}

impl Sequence {
    pub fn frame_count(&self) -> usize {
        self.positions.len() / self.joints
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Annotation {
    pub position: f64,
    pub tag: Option<String>,
}

fn fields(line: &str) -> impl Iterator<Item = &str> {
    line.split(|c: char| c == ',' || c == ';' || c.is_whitespace())
        .filter(|t| !t.is_empty())
}

pub fn parse_sequence(text: &str, layout: &Msrc12Layout) -> Result<Sequence, DatasetError> {
    let needed = layout.required_columns();
    let mut timestamps = layout.timestamp_column.map(|_| Vec::new());
    let mut positions = Vec::new();
    let mut rows = 0usize;
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let tokens: Vec<&str> = fields(line).collect();
        if tokens.is_empty() {
            continue;
        }
        let values: Result<Vec<f64>, _> = tokens.iter().map(|t| t.parse::<f64>()).collect();
        let values = match values {
            Ok(v) => v,
            // header row
            Err(_) if rows == 0 && tokens[0].parse::<f64>().is_err() => continue,
            Err(e) => {
                return Err(DatasetError::Layout {
                    line: line_no,
                    message: e.to_string(),
                })
            }
        };
        if values.len() < needed {
            return Err(DatasetError::Layout {
                line: line_no,
                message: format!("expected at least {needed} columns, found {}", values.len()),
            });
        }
        if let (Some(ts), Some(col)) = (timestamps.as_mut(), layout.timestamp_column) {
            ts.push(values[col]);
        }
        for j in 0..layout.joints {
            let base = layout.first_joint_column + j * layout.joint_stride;
            let [x, y, z] = layout.coordinate_offsets.map(|o| values[base + o]);
            positions.push([x, y, z]);
        }
        rows += 1;
    }
    Ok(Sequence {
        joints: layout.joints,
        timestamps,
        positions,
    })
}

/// Reads annotation lines `position[;tag]`, skipping a textual header.
pub fn parse_annotations(text: &str) -> Result<Vec<Annotation>, DatasetError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let mut tokens = fields(line);
        let Some(first) = tokens.next() else { continue };
        match first.parse::<f64>() {
            Ok(position) => out.push(Annotation {
                position,
                tag: tokens.next().map(str::to_string),
            }),
            Err(_) if out.is_empty() => continue,
            Err(e) => {
                return Err(DatasetError::Parse {
                    line: i + 1,
                    message: format!("bad annotation {first:?}: {e}"),
                })
            }
        }
    }
    Ok(out)
}

fn annotated_frame(
    seq: &Sequence,
    ann: &Annotation,
    layout: &Msrc12Layout,
) -> Result<usize, DatasetError> {
    let n = seq.frame_count();
    match (layout.annotation_units, &seq.timestamps) {
        (AnnotationUnits::Frame, _) => {
            let p = ann.position;
            if p < 0.0 || p.fract() != 0.0 || p >= n as f64 {
                return Err(DatasetError::AnnotationOutOfRange {
                    position: p,
                    range: format!("frames 0..{n}"),
                });
            }
            Ok(p as usize)
        }
        (AnnotationUnits::Timestamp, Some(ts)) if !ts.is_empty() => {
            let t = ann.position * layout.annotation_scale + layout.annotation_offset;
            let (first, last) = (ts[0], ts[ts.len() - 1]);
            let step = if ts.len() > 1 {
                (last - first) / (ts.len() - 1) as f64
            } else {
                0.0
            };
            if t < first - step || t > last + step {
                return Err(DatasetError::AnnotationOutOfRange {
                    position: t,
                    range: format!("timestamps {first}..={last}"),
                });
            }
            let mut best = 0;
            for (i, &v) in ts.iter().enumerate() {
                if (v - t).abs() < (ts[best] - t).abs() {
                    best = i;
                }
            }
            Ok(best)
        }
        _ => Err(DatasetError::AnnotationOutOfRange {
            position: ann.position,
            range: "empty sequence".into(),
        }),
    }
}

fn capture_pattern(pattern: &str, stem: &str, what: &str) -> Result<String, DatasetError> {
    let re = Regex::new(pattern).map_err(|e| DatasetError::Config(format!("{what}: {e}")))?;
    re.captures(stem)
        .and_then(|c| c.get(1))
        .map(|m| m.as_str().to_string())
        .ok_or_else(|| DatasetError::FileName(stem.to_string()))
}

/// Cuts one action per annotation out of `seq`. An empty annotation list
/// yields no actions and logs a warning.
pub fn segment_sequence(
    stem: &str,
    seq: &Sequence,
    annotations: &[Annotation],
    layout: &Msrc12Layout,
) -> Result<Vec<Action>, DatasetError> {
    if annotations.is_empty() {
        log::warn!("{stem}: no annotations, sequence skipped");
        return Ok(Vec::new());
    }
    let subject: u32 = capture_pattern(&layout.subject_pattern, stem, "subject_pattern")?
        .parse()
        .map_err(|_| DatasetError::FileName(stem.to_string()))?;
    let stem_class = layout
        .class_pattern
        .as_deref()
        .map(|p| capture_pattern(p, stem, "class_pattern"))
        .transpose()?;
    let n = seq.frame_count();
    let j = seq.joints;

    annotations
        .iter()
        .enumerate()
        .map(|(k, ann)| {
            let centre = annotated_frame(seq, ann, layout)?;
            let start = centre.saturating_sub(layout.frames_before);
            let end = (centre + layout.frames_after).min(n - 1);
            let class = match (&stem_class, &ann.tag) {
                (Some(c), _) => c.clone(),
                (None, Some(tag)) => tag.clone(),
                (None, None) => {
                    return Err(DatasetError::Config(format!(
                        "{stem}: annotation {k} has no class tag and class_pattern is unset"
                    )))
                }
            };
            Action::new(
                format!("{stem}_{k:03}"),
                subject,
                class,
                j,
                seq.positions[start * j..(end + 1) * j].to_vec(),
            )
        })
        .collect()
}

fn load_pair(path: &Path, layout: &Msrc12Layout) -> Result<Vec<Action>, DatasetError> {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .ok_or_else(|| DatasetError::FileName(path.display().to_string()))?;
    let ann_path = path.with_extension(&layout.annotation_extension);
    if !ann_path.exists() {
        log::warn!("{}: no annotation file, sequence skipped", path.display());
        return Ok(Vec::new());
    }
    let read = |p: &Path| fs::read_to_string(p).map_err(|e| DatasetError::io(p, e));
    let seq = parse_sequence(&read(path)?, layout).map_err(|e| e.in_file(path))?;
    let annotations = parse_annotations(&read(&ann_path)?).map_err(|e| e.in_file(&ann_path))?;
    segment_sequence(&stem, &seq, &annotations, layout).map_err(|e| e.in_file(path))
}

/// Loads and segments every sequence in `dir`.
pub fn load_msrc12(dir: &Path, layout: &Msrc12Layout) -> Result<Dataset, DatasetError> {
    layout.validate()?;
    let files = list_files(dir, &layout.sequence_extension)?;
    if files.is_empty() {
        return Err(DatasetError::NoInputFiles(dir.to_path_buf()));
    }
    let per_file = files
        .par_iter()
        .map(|p| load_pair(p, layout))
        .collect::<Result<Vec<_>, _>>()?;
    Dataset::new(per_file.concat())
}
