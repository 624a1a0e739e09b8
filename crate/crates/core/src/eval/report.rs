//! CSV emission for evaluation results.

use std::io::Write;

use super::{AggregateResult, SweepTable, Tally};
use std::collections::BTreeMap;

/// Formats `x` with `digits` significant digits, like C's `%g`.
pub fn format_sig(x: f64, digits: usize) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { "0".into() } else { x.to_string() };
    }
    let digits = digits.max(1);
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= digits as i32 {
        let mantissa = trim_zeros(mantissa);
        return format!("{mantissa}e{exp}");
    }
    let decimals = (digits as i32 - 1 - exp).max(0) as usize;
    trim_zeros(&format!("{:.*}", decimals, x)).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn g(x: f64) -> String {
    format_sig(x, 6)
}

/// `run,W,K,seed,accuracy`, one row per run.
pub fn write_results<W: Write>(
    out: W,
    agg: &AggregateResult,
    window: usize,
    k: usize,
) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["run", "W", "K", "seed", "accuracy"])?;
    for r in &agg.runs {
        w.write_record([
            r.run.to_string(),
            window.to_string(),
            k.to_string(),
            r.seed.to_string(),
            g(r.accuracy),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Square class matrix with true classes as rows.
pub fn write_class_matrix<W: Write>(
    out: W,
    classes: &[String],
    matrix: &[Vec<f64>],
) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["true\\predicted".to_string()];
    header.extend(classes.iter().cloned());
    w.write_record(&header)?;
    for (class, row) in classes.iter().zip(matrix) {
        let mut record = vec![class.clone()];
        record.extend(row.iter().map(|&v| g(v)));
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_per_subject<W: Write>(out: W, per_subject: &BTreeMap<u32, Tally>) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["subject", "correct", "total", "accuracy"])?;
    for (s, t) in per_subject {
        w.write_record([
            s.to_string(),
            t.correct.to_string(),
            t.total.to_string(),
            g(t.accuracy()),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// `set,W,rows,cols,K,mean,std`; averages across sets are labelled `mean`.
pub fn write_sweep<W: Write>(out: W, table: &SweepTable) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["set", "W", "rows", "cols", "K", "mean", "std"])?;
    for r in table.rows.iter().chain(&table.set_means) {
        w.write_record([
            r.set.clone(),
            r.window.to_string(),
            r.rows.to_string(),
            r.cols.to_string(),
            r.k.to_string(),
            g(r.mean),
            g(r.std_dev),
        ])?;
    }
    w.flush()?;
    Ok(())
}
