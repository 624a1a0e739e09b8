//! Plain-text action format.
//!
//! ```text
//! # comment lines start with '#'
//! id,subject,class,num_frames,num_joints
//! x1 y1 z1 x2 y2 z2 ...      <- one line per frame, num_joints * 3 values
//! ```

use std::fmt::Write as _;

use super::{Action, DatasetError};

fn parse_err(line: usize, message: impl Into<String>) -> DatasetError {
    DatasetError::Parse {
        line,
        message: message.into(),
    }
}

struct Header<'a> {
    id: &'a str,
    subject: u32,
    class: &'a str,
    frames: usize,
    joints: usize,
}

fn parse_header(line_no: usize, line: &str) -> Result<Header<'_>, DatasetError> {
    let fields: Vec<&str> = line.split(',').map(str::trim).collect();
    let [id, subject, class, frames, joints] = fields[..] else {
        return Err(parse_err(
            line_no,
            format!(
                "malformed header: expected 5 comma-separated fields \
                 (id,subject,class,num_frames,num_joints), found {}",
                fields.len()
            ),
        ));
    };
    if id.is_empty() || class.is_empty() {
        return Err(parse_err(line_no, "malformed header: empty id or class"));
    }
    let number = |name: &str, v: &str| {
        v.parse::<usize>()
            .map_err(|_| parse_err(line_no, format!("malformed header: bad {name} {v:?}")))
    };
    let subject = subject.parse::<u32>().map_err(|_| {
        parse_err(
            line_no,
            format!("malformed header: bad subject {subject:?}"),
        )
    })?;
    let header = Header {
        id,
        subject,
        class,
        frames: number("num_frames", frames)?,
        joints: number("num_joints", joints)?,
    };
    if header.frames < 2 {
        return Err(parse_err(
            line_no,
            format!(
                "at least 2 frames are required, header declares {}",
                header.frames
            ),
        ));
    }
    if header.joints == 0 {
        return Err(parse_err(line_no, "header declares 0 joints"));
    }
    Ok(header)
}

/// Parses one canonical action file. Errors carry 1-based line numbers.
pub fn parse_action_file(text: &str) -> Result<Action, DatasetError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (header_line, header) = lines
        .next()
        .ok_or_else(|| parse_err(1, "missing header line"))?;
    let header = parse_header(header_line, header)?;
    let per_frame = header.joints * 3;

    let mut positions = Vec::with_capacity(header.frames * header.joints);
    let mut frames = 0;
    let mut last_line = header_line;
    for (line_no, line) in lines {
        last_line = line_no;
        if frames == header.frames {
            return Err(parse_err(
                line_no,
                format!(
                    "header declares {} frames but more frame lines follow",
                    header.frames
                ),
            ));
        }
        let values = line
            .split_whitespace()
            .map(|tok| {
                let v: f64 = tok
                    .parse()
                    .map_err(|_| parse_err(line_no, format!("invalid number {tok:?}")))?;
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(parse_err(line_no, format!("non-finite value {tok:?}")))
                }
            })
            .collect::<Result<Vec<f64>, _>>()?;
        if values.len() != per_frame {
            return Err(parse_err(
                line_no,
                format!("expected {per_frame} values, found {}", values.len()),
            ));
        }
        positions.extend(values.chunks_exact(3).map(|c| [c[0], c[1], c[2]]));
        frames += 1;
    }
    if frames != header.frames {
        return Err(parse_err(
            last_line,
            format!(
                "header declares {} frames but file has {frames}",
                header.frames
            ),
        ));
    }
    Action::new(
        header.id,
        header.subject,
        header.class,
        header.joints,
        positions,
    )
}

/// Writes `action` in the canonical format. Floats use the shortest
/// representation that parses back to the same value.
pub fn serialize_action(action: &Action) -> String {
    let mut out = format!(
        "{},{},{},{},{}\n",
        action.id,
        action.subject,
        action.class_label,
        action.frame_count(),
        action.joint_count()
    );
    for frame in action.frames() {
        let mut first = true;
        for v in frame.iter().flatten() {
            if !first {
                out.push(' ');
            }
            first = false;
            write!(out, "{v}").unwrap();
        }
        out.push('\n');
    }
    out
}
