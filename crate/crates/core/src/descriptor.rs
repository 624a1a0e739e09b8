//! The DAM descriptor: how an action's WDFs distribute over the codebook.

use std::io::Write;

use thiserror::Error;

use crate::dataset::Action;
use crate::preprocess::WdfSequence;
use crate::som::SomGrid;

#[derive(Debug, Error)]
pub enum DescriptorError {
    #[error("action has no WDFs")]
    EmptySequence,
    #[error("WDF dimension {found} does not match codebook dimension {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

/// Fraction of an action's WDFs falling into each codebook cell.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub bins: Vec<f64>,
    pub wdf_count: usize,
}

impl Histogram {
    pub fn len(&self) -> usize {
        self.bins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bins.is_empty()
    }
}

/// Per-cell WDF counts.
pub fn bmu_counts(grid: &SomGrid, wdfs: &WdfSequence) -> Result<Vec<usize>, DescriptorError> {
    if wdfs.is_empty() {
        return Err(DescriptorError::EmptySequence);
    }
    if wdfs.dim() != grid.dim() {
        return Err(DescriptorError::DimensionMismatch {
            expected: grid.dim(),
            found: wdfs.dim(),
        });
    }
    let mut counts = vec![0usize; grid.len()];
    for w in wdfs.iter() {
        // dimension already checked
        counts[grid.bmu(w).expect("dimension checked")] += 1;
    }
    Ok(counts)
}

/// `H[l] = |{w : bmu(w) = l}| / |wdfs|`.
pub fn compute_histogram(grid: &SomGrid, wdfs: &WdfSequence) -> Result<Histogram, DescriptorError> {
    let counts = bmu_counts(grid, wdfs)?;
    let n = wdfs.len();
    Ok(Histogram {
        bins: counts.iter().map(|&c| c as f64 / n as f64).collect(),
        wdf_count: n,
    })
}

/// Writes one row per action: `id,class,subject,h0,…,h{K-1}`.
pub fn write_descriptors_csv<'a, W: Write>(
    out: W,
    rows: impl IntoIterator<Item = (&'a Action, &'a Histogram)>,
) -> Result<(), DescriptorError> {
    let mut writer = csv::Writer::from_writer(out);
    let mut header_written = false;
    for (action, h) in rows {
        if !header_written {
            let mut header = vec!["id".to_string(), "class".into(), "subject".into()];
            header.extend((0..h.len()).map(|l| format!("h{l}")));
            writer.write_record(&header)?;
            header_written = true;
        }
        let mut record = vec![
            action.id.clone(),
            action.class_label.clone(),
            action.subject.to_string(),
        ];
        record.extend(h.bins.iter().map(|b| b.to_string()));
        writer.write_record(&record)?;
    }
    writer.flush().map_err(csv::Error::from)?;
    Ok(())
}
