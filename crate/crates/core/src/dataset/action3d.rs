//! MSR Action3D skeleton files.
//!
//! Files are named `aAA_sSS_eEE_skeleton3D.txt` (action class, subject,
//! episode). Every line holds one joint record `x y z confidence`; each frame
//! contributes 20 consecutive records. The confidence column is dropped.

use std::fs;
use std::path::Path;
use std::sync::LazyLock;

use rayon::prelude::*;
use regex::Regex;

use super::{list_files, Action, Dataset, DatasetError};

pub const JOINTS: usize = 20;

static FILE_NAME: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^a(\d+)_s(\d+)_e(\d+)").expect("valid regex"));

/// `(id, class, subject)` parsed from a file name such as
/// `a02_s05_e01_skeleton3D.txt` → `("a02_s05_e01", "2", 5)`.
pub fn parse_file_name(name: &str) -> Result<(String, String, u32), DatasetError> {
    let caps = FILE_NAME
        .captures(name)
        .ok_or_else(|| DatasetError::FileName(name.to_string()))?;
    let number = |i: usize| {
        caps[i]
            .parse::<u32>()
            .map_err(|_| DatasetError::FileName(name.to_string()))
    };
    let class = number(1)?;
    let subject = number(2)?;
    Ok((caps[0].to_string(), class.to_string(), subject))
}

/// Parses the body of one skeleton file with `joints` records per frame.
pub fn parse_records(text: &str, joints: usize) -> Result<Vec<[f64; 3]>, DatasetError> {
    let mut positions = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let values = line
            .split_whitespace()
            .map(|t| t.parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| DatasetError::Parse {
                line: i + 1,
                message: e.to_string(),
            })?;
        match values.len() {
            4 => positions.push([values[0], values[1], values[2]]),
            // some distributions start with a "frames joints" count line
            2 if positions.is_empty() && i == 0 => {}
            n => {
                return Err(DatasetError::Parse {
                    line: i + 1,
                    message: format!("expected 4 values per joint record, found {n}"),
                })
            }
        }
    }
    if positions.len() % joints != 0 {
        return Err(DatasetError::FrameBoundary {
            records: positions.len(),
            joints,
        });
    }
    Ok(positions)
}

pub fn parse_file(name: &str, text: &str) -> Result<Action, DatasetError> {
    let (id, class, subject) = parse_file_name(name)?;
    let positions = parse_records(text, JOINTS)?;
    Action::new(id, subject, class, JOINTS, positions)
}

/// Loads every `*.txt` skeleton file in `dir`.
pub fn load_msr_action3d(dir: &Path) -> Result<Dataset, DatasetError> {
    let files = list_files(dir, "txt")?;
    let files: Vec<_> = files
        .into_iter()
        .filter(|p| p.file_name().is_some_and(|n| n != super::EXCLUDE_FILE))
        .collect();
    if files.is_empty() {
        return Err(DatasetError::NoInputFiles(dir.to_path_buf()));
    }
    let actions = files
        .par_iter()
        .map(|path| {
            let name = path.file_name().unwrap_or_default().to_string_lossy();
            let text = fs::read_to_string(path).map_err(|e| DatasetError::io(path, e))?;
            parse_file(&name, &text).map_err(|e| e.in_file(path))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Dataset::new(actions)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn records(n: usize) -> String {
        (0..n).map(|i| format!("{i} 0.5 2.25 1\n")).collect()
    }

    #[test]
    fn file_name_convention() {
        let (id, class, subject) = parse_file_name("a02_s05_e01_skeleton3D.txt").unwrap();
        assert_eq!(
            (id.as_str(), class.as_str(), subject),
            ("a02_s05_e01", "2", 5)
        );
        assert!(parse_file_name("skeleton.txt").is_err());
    }

    #[test]
    fn records_form_frames() {
        let a = parse_file("a02_s05_e01_skeleton3D.txt", &records(40)).unwrap();
        assert_eq!(a.frame_count(), 2);
        assert_eq!(a.joint_count(), 20);
        assert_eq!(a.frame(1)[0], [20.0, 0.5, 2.25]);
        assert_eq!(a.class_label, "2");
        assert_eq!(a.subject, 5);
    }

    #[test]
    fn partial_frame_is_rejected() {
        let err = parse_file("a02_s05_e01_skeleton3D.txt", &records(41)).unwrap_err();
        assert!(err.to_string().contains("frame boundary mismatch"), "{err}");
    }

    #[test]
    fn optional_count_line() {
        let text = format!("2 20\n{}", records(40));
        assert_eq!(parse_records(&text, 20).unwrap().len(), 40);
    }

    #[test]
    fn loads_directory() {
        let dir = tempfile::tempdir().unwrap();
        for (name, n) in [
            ("a01_s01_e01_skeleton3D.txt", 40),
            ("a03_s02_e02_skeleton3D.txt", 60),
        ] {
            fs::write(dir.path().join(name), records(n)).unwrap();
        }
        fs::write(dir.path().join("a01_s01_e01_sdepth.bin"), b"\0").unwrap();
        let ds = load_msr_action3d(dir.path()).unwrap();
        assert_eq!(ds.len(), 2);
        assert_eq!(ds.class_set(), ["1", "3"]);
        assert_eq!(ds.subject_set(), [1, 2]);
        assert_eq!(ds.actions()[1].frame_count(), 3);
    }

    #[test]
    fn bad_file_name_in_directory() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("notes.txt"), records(20)).unwrap();
        let err = load_msr_action3d(dir.path()).unwrap_err();
        assert!(err.to_string().contains("notes.txt"), "{err}");
    }
}
