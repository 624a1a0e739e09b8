//! Natural cubic splines and arc-length resampling of joint paths.

use super::PreprocessError;
use crate::Point3;

/// Interpolating cubic spline with zero second derivative at both ends.
#[derive(Debug, Clone)]
pub struct NaturalCubicSpline {
    knots: Vec<f64>,
    values: Vec<f64>,
    second: Vec<f64>,
}

impl NaturalCubicSpline {
    /// `knots` must be strictly increasing and at least two long.
    pub fn fit(knots: &[f64], values: &[f64]) -> Self {
        assert_eq!(knots.len(), values.len());
        assert!(knots.len() >= 2, "a spline needs at least two knots");
        let n = knots.len();
        let mut second = vec![0.0; n];
        if n > 2 {
            // Thomas algorithm on the interior equations
            let h: Vec<f64> = knots.windows(2).map(|w| w[1] - w[0]).collect();
            let m = n - 2;
            let mut diag = vec![0.0; m];
            let mut rhs = vec![0.0; m];
            for i in 0..m {
                diag[i] = 2.0 * (h[i] + h[i + 1]);
                rhs[i] = 6.0
                    * ((values[i + 2] - values[i + 1]) / h[i + 1]
                        - (values[i + 1] - values[i]) / h[i]);
            }
            for i in 1..m {
                let w = h[i] / diag[i - 1];
                diag[i] -= w * h[i];
                rhs[i] -= w * rhs[i - 1];
            }
            second[m] = rhs[m - 1] / diag[m - 1];
            for i in (0..m - 1).rev() {
                second[i + 1] = (rhs[i] - h[i + 1] * second[i + 2]) / diag[i];
            }
        }
        NaturalCubicSpline {
            knots: knots.to_vec(),
            values: values.to_vec(),
            second,
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let last = self.knots.len() - 2;
        let i = self
            .knots
            .partition_point(|&k| k <= x)
            .saturating_sub(1)
            .min(last);
        let (x0, x1) = (self.knots[i], self.knots[i + 1]);
        let h = x1 - x0;
        let (a, b) = (x1 - x, x - x0);
        let (m0, m1) = (self.second[i], self.second[i + 1]);
        m0 * a * a * a / (6.0 * h)
            + m1 * b * b * b / (6.0 * h)
            + (self.values[i] / h - m0 * h / 6.0) * a
            + (self.values[i + 1] / h - m1 * h / 6.0) * b
    }
}

fn distance(a: &Point3, b: &Point3) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

/// Resamples a path to `frames` points uniformly spaced along its
/// cumulative chord length, interpolating each coordinate with a natural
/// cubic spline. Paths shorter than `min_length` collapse to copies of the
/// first point. The endpoints are kept exactly.
pub fn arc_length_resample(
    series: &[Point3],
    frames: usize,
    min_length: f64,
) -> Result<Vec<Point3>, PreprocessError> {
    if series.len() < 2 {
        return Err(PreprocessError::TooFewFrames(series.len()));
    }
    if frames < 2 {
        return Err(PreprocessError::InvalidParams {
            key: "preprocess.frames",
            message: format!("must be at least 2, got {frames}"),
        });
    }
    let mut cumulative = Vec::with_capacity(series.len());
    let mut total = 0.0;
    cumulative.push(0.0);
    for w in series.windows(2) {
        total += distance(&w[0], &w[1]);
        cumulative.push(total);
    }
    if total.is_nan() || total < min_length {
        return Ok(vec![series[0]; frames]);
    }

    // Repeated samples would give zero-width spline intervals.
    let gap = total * 1e-12;
    let mut keep: Vec<usize> = vec![0];
    for i in 1..series.len() {
        if cumulative[i] - cumulative[*keep.last().unwrap()] > gap {
            keep.push(i);
        }
    }
    let last = series.len() - 1;
    if *keep.last().unwrap() != last {
        if keep.len() > 1 {
            keep.pop();
        }
        keep.push(last);
    }

    let knots: Vec<f64> = keep.iter().map(|&i| cumulative[i]).collect();
    let splines: Vec<NaturalCubicSpline> = (0..3)
        .map(|c| {
            let values: Vec<f64> = keep.iter().map(|&i| series[i][c]).collect();
            NaturalCubicSpline::fit(&knots, &values)
        })
        .collect();

    let mut out = Vec::with_capacity(frames);
    out.push(series[0]);
    for k in 1..frames - 1 {
        let s = total * k as f64 / (frames - 1) as f64;
        out.push([splines[0].eval(s), splines[1].eval(s), splines[2].eval(s)]);
    }
    out.push(series[last]);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn spline_interpolates_knots() {
        let x = [0.0, 0.5, 2.0, 3.0, 4.5];
        let y = [1.0, -2.0, 0.5, 4.0, 3.0];
        let s = NaturalCubicSpline::fit(&x, &y);
        for (xi, yi) in x.iter().zip(y) {
            assert!((s.eval(*xi) - yi).abs() < 1e-12);
        }
    }

    #[test]
    fn spline_reproduces_lines() {
        let x = [0.0, 1.0, 1.5, 4.0];
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v - 1.0).collect();
        let s = NaturalCubicSpline::fit(&x, &y);
        for t in [0.2, 1.2, 2.7, 3.9] {
            assert!((s.eval(t) - (2.0 * t - 1.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn natural_spline_matches_hand_solution() {
        // knots 0,1,2 values 0,1,0: M1 = 6*(-1-1)/(2*2) = -3
        let s = NaturalCubicSpline::fit(&[0.0, 1.0, 2.0], &[0.0, 1.0, 0.0]);
        let expected = -3.0 * 0.125 / 6.0 + (1.0 + 3.0 / 6.0) * 0.5;
        assert!((s.eval(0.5) - expected).abs() < 1e-15);
    }

    #[test]
    fn collinear_points_resample_to_line() {
        let series: Vec<Point3> = (0..10).map(|i| [i as f64, 0.0, 0.0]).collect();
        let out = arc_length_resample(&series, 4, 1e-8).unwrap();
        for (p, x) in out.iter().zip([0.0, 3.0, 6.0, 9.0]) {
            assert!(
                (p[0] - x).abs() < 1e-12 && p[1] == 0.0 && p[2] == 0.0,
                "{p:?}"
            );
        }
    }

    #[test]
    fn stationary_joint() {
        let out = arc_length_resample(&[[1.0, 2.0, 3.0]; 7], 5, 1e-8).unwrap();
        assert_eq!(out, vec![[1.0, 2.0, 3.0]; 5]);
    }

    #[test]
    fn too_short_input() {
        assert!(matches!(
            arc_length_resample(&[[0.0; 3]], 5, 1e-8),
            Err(PreprocessError::TooFewFrames(1))
        ));
    }

    #[test]
    fn repeated_samples_are_tolerated() {
        let series = [
            [0.0; 3],
            [0.0; 3],
            [1.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
            [2.0, 0.0, 0.0],
            [2.0, 0.0, 0.0],
        ];
        let out = arc_length_resample(&series, 5, 1e-8).unwrap();
        for (k, p) in out.iter().enumerate() {
            assert!((p[0] - 0.5 * k as f64).abs() < 1e-12, "{p:?}");
        }
    }

    #[test]
    fn quarter_circle_spacing() {
        // oracle: on the unit circle arc length equals the polar angle
        let series: Vec<Point3> = (0..100)
            .map(|i| {
                let t = FRAC_PI_2 * i as f64 / 99.0;
                [t.cos(), t.sin(), 0.0]
            })
            .collect();
        let out = arc_length_resample(&series, 10, 1e-8).unwrap();
        for (k, p) in out.iter().enumerate() {
            let angle = p[1].atan2(p[0]);
            assert!(
                (angle - FRAC_PI_2 * k as f64 / 9.0).abs() < 1e-4,
                "{k}: {angle}"
            );
        }
        let chords: Vec<f64> = out.windows(2).map(|w| distance(&w[0], &w[1])).collect();
        let mean = chords.iter().sum::<f64>() / chords.len() as f64;
        assert!(
            chords.iter().all(|c| (c - mean).abs() < 0.01 * mean),
            "{chords:?}"
        );
    }
}
