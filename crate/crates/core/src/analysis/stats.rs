//! Sample summaries with normal-approximation 95% intervals.

use serde::Serialize;

const Z95: f64 = 1.96;

/// Mean, 95% half-width and median of a sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Summary {
    pub mean: f64,
    pub half_width: f64,
    pub median: f64,
    pub count: usize,
}

impl Summary {
    /// NaN fields when `xs` is empty. A sample containing +∞ has an
    /// infinite mean and a NaN half-width.
    pub fn of(xs: &[f64]) -> Self {
        let count = xs.len();
        if count == 0 {
            return Summary {
                mean: f64::NAN,
                half_width: f64::NAN,
                median: f64::NAN,
                count,
            };
        }
        let mean = xs.iter().sum::<f64>() / count as f64;
        let half_width = if count > 1 {
            let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (count - 1) as f64;
            Z95 * (var / count as f64).sqrt()
        } else {
            0.0
        };
        Summary {
            mean,
            half_width,
            median: median(xs),
            count,
        }
    }

    pub fn lower(&self) -> f64 {
        self.mean - self.half_width
    }

    pub fn upper(&self) -> f64 {
        self.mean + self.half_width
    }
}

/// Median by total order; NaN for an empty slice.
pub fn median(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let k = v.len() / 2;
    if v.len() % 2 == 1 {
        v[k]
    } else {
        0.5 * (v[k - 1] + v[k])
    }
}

/// Root-mean-square of `errors` with a 95% half-width from the delta method:
/// se(rmse) = se(mean e²) / (2·rmse).
pub fn rmse_with_ci(errors: &[f64]) -> (f64, f64) {
    if errors.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let sq: Vec<f64> = errors.iter().map(|e| e * e).collect();
    let s = Summary::of(&sq);
    let rmse = s.mean.sqrt();
    let hw = if rmse > 0.0 {
        s.half_width / (2.0 * rmse)
    } else {
        0.0
    };
    (rmse, hw)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn summary_of_small_sample() {
        let s = Summary::of(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(s.mean, 2.5);
        assert_eq!(s.median, 2.5);
        // sample sd = sqrt(5/3)
        assert_relative_eq!(s.half_width, 1.96 * (5.0f64 / 3.0 / 4.0).sqrt(), epsilon = 1e-15);
        assert!(Summary::of(&[]).mean.is_nan());
        assert_eq!(Summary::of(&[7.0]).half_width, 0.0);
    }

    #[test]
    fn rmse_of_constant_errors() {
        let (r, hw) = rmse_with_ci(&[3.0, -3.0, 3.0]);
        assert_relative_eq!(r, 3.0, epsilon = 1e-15);
        assert_eq!(hw, 0.0);
        assert_eq!(rmse_with_ci(&[0.0, 0.0]), (0.0, 0.0));
    }

    #[test]
    fn median_odd_and_even() {
        assert_eq!(median(&[5.0, 1.0, 3.0]), 3.0);
        assert_eq!(median(&[4.0, 1.0]), 2.5);
    }
}
