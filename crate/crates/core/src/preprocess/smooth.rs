use crate::Point3;

/// Gaussian-weighted moving average of a joint path.
///
/// Each output point is the average of the points within `radius` frames,
/// weighted by `exp(-k² / 2σ²)`. Near the ends the kernel is truncated and
/// renormalized. `sigma == 0` or `radius == 0` returns the input unchanged.
pub fn smooth_joint(series: &[Point3], sigma: f64, radius: usize) -> Vec<Point3> {
    if sigma <= 0.0 || radius == 0 || series.len() < 2 {
        return series.to_vec();
    }
    let r = radius as isize;
    let weights: Vec<f64> = (-r..=r)
        .map(|k| (-((k * k) as f64) / (2.0 * sigma * sigma)).exp())
        .collect();
    let n = series.len() as isize;
    (0..n)
        .map(|t| {
            let mut acc = [0.0; 3];
            let mut total = 0.0;
            for (k, w) in (-r..=r).zip(&weights) {
                let i = t + k;
                if (0..n).contains(&i) {
                    let p = &series[i as usize];
                    for c in 0..3 {
                        acc[c] += w * p[c];
                    }
                    total += w;
                }
            }
            acc.map(|v| v / total)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_series_is_fixed() {
        let series = vec![[1.5, -2.0, 0.25]; 9];
        for p in smooth_joint(&series, 1.0, 2) {
            for c in 0..3 {
                assert!((p[c] - series[0][c]).abs() <= 4.0 * f64::EPSILON * series[0][c].abs());
            }
        }
    }

    #[test]
    fn degenerate_parameters_are_identity() {
        let series = vec![[0.0; 3], [3.0, 1.0, 0.0], [0.0; 3]];
        assert_eq!(smooth_joint(&series, 0.0, 2), series);
        assert_eq!(smooth_joint(&series, 1.0, 0), series);
        assert_eq!(smooth_joint(&series[..1], 1.0, 2), &series[..1]);
    }

    #[test]
    fn three_point_spike() {
        let series = vec![[0.0; 3], [3.0, 0.0, 0.0], [0.0; 3]];
        let out = smooth_joint(&series, 1.0, 1);
        let g = (-0.5f64).exp();
        let middle = 3.0 / (1.0 + 2.0 * g);
        assert!((out[1][0] - middle).abs() < 1e-12);
        assert!((out[1][0] - 1.355_59).abs() < 1e-5);
        // truncated kernel at the ends: (0 + g*3) / (1 + g)
        assert!((out[0][0] - 3.0 * g / (1.0 + g)).abs() < 1e-12);
        assert_eq!(out[1][1], 0.0);
    }
}
