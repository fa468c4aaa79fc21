use serde::Serialize;

use super::periodogram::Periodogram;
use crate::error::{IsacError, Result};

/// One detected spectral peak.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Peak {
    pub bin: usize,
    pub axis_value: f64,
    pub magnitude: f64,
    /// Axis value after three-point parabolic refinement on log-magnitude.
    pub refined_axis_value: f64,
}

/// Peaks in descending magnitude order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PeakList {
    pub peaks: Vec<Peak>,
    /// Set when fewer than the requested number of peaks were available.
    pub truncated: bool,
}

/// Vertex offset, in bins, of the parabola through log-magnitudes
/// `(left, centre, right)`, clamped to [-0.5, 0.5].
///
/// Returns 0 when a neighbour is zero or the three points are not concave.
pub fn parabolic_offset(left: f64, centre: f64, right: f64) -> f64 {
    if !(left > 0.0 && centre > 0.0 && right > 0.0) {
        return 0.0;
    }
    let (a, b, c) = (left.ln(), centre.ln(), right.ln());
    let denom = a - 2.0 * b + c;
    if !(denom < 0.0) {
        return 0.0;
    }
    (0.5 * (a - c) / denom).clamp(-0.5, 0.5)
}

/// Up to `k` greedy maxima at least `min_separation + 1` bins apart
/// (circular distance).
///
/// A bin is a local maximum when it is strictly above its left neighbour
/// and not below its right neighbour, so a plateau counts once at its
/// lowest index. Equal magnitudes are ranked by ascending bin.
pub fn detect_peaks(p: &Periodogram, k: usize, min_separation: usize) -> Result<PeakList> {
    if k == 0 {
        return Err(IsacError::InvalidArgument("peak count k must be >= 1".into()));
    }
    let v = p.values();
    let len = v.len() as isize;
    let mut candidates: Vec<usize> = if len == 1 {
        vec![0]
    } else {
        (0..v.len())
            .filter(|&i| {
                let c = v[i];
                c > p.value_wrapped(i as isize - 1) && c >= p.value_wrapped(i as isize + 1)
            })
            .collect()
    };
    candidates.sort_by(|&a, &b| v[b].total_cmp(&v[a]).then(a.cmp(&b)));

    let mut chosen: Vec<usize> = Vec::with_capacity(k);
    for c in candidates {
        if chosen.len() == k {
            break;
        }
        if chosen
            .iter()
            .all(|&s| p.circular_distance(s, c) > min_separation)
        {
            chosen.push(c);
        }
    }

    let peaks = chosen
        .iter()
        .map(|&bin| {
            let offset = if len > 2 {
                parabolic_offset(
                    p.value_wrapped(bin as isize - 1),
                    v[bin],
                    p.value_wrapped(bin as isize + 1),
                )
            } else {
                0.0
            };
            Peak {
                bin,
                axis_value: p.axis()[bin],
                magnitude: v[bin],
                refined_axis_value: p.axis()[bin] + offset * p.bin_width(),
            }
        })
        .collect::<Vec<_>>();
    Ok(PeakList {
        truncated: peaks.len() < k,
        peaks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::SpectrumKind;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn spectrum(values: Vec<f64>) -> Periodogram {
        let axis = (0..values.len()).map(|i| i as f64).collect();
        Periodogram::from_parts(SpectrumKind::ZeroFill, axis, values, 1, 1).unwrap()
    }

    #[test]
    fn delta_gives_one_peak() {
        let mut v = vec![0.0; 32];
        v[9] = 2.0;
        let pl = detect_peaks(&spectrum(v), 3, 1).unwrap();
        assert_eq!(pl.peaks.len(), 1);
        assert_eq!(pl.peaks[0].bin, 9);
        assert_eq!(pl.peaks[0].refined_axis_value, 9.0);
        assert!(pl.truncated);
    }

    #[test]
    fn two_separated_deltas() {
        let mut v = vec![0.0; 32];
        v[4] = 1.0;
        v[20] = 0.5;
        let pl = detect_peaks(&spectrum(v), 2, 5).unwrap();
        assert_eq!(
            pl.peaks.iter().map(|p| p.bin).collect::<Vec<_>>(),
            vec![4, 20]
        );
        assert!(!pl.truncated);
    }

    #[test]
    fn exclusion_zone_is_circular() {
        let mut v = vec![0.0; 32];
        v[0] = 1.0;
        v[30] = 0.9;
        let pl = detect_peaks(&spectrum(v), 2, 3).unwrap();
        assert_eq!(pl.peaks.len(), 1);
    }

    #[test]
    fn plateau_counts_once_at_lowest_index() {
        let v = vec![0.0, 1.0, 1.0, 0.0, 0.0, 0.0];
        let pl = detect_peaks(&spectrum(v), 5, 0).unwrap();
        assert_eq!(pl.peaks.len(), 1);
        assert_eq!(pl.peaks[0].bin, 1);
    }

    #[test]
    fn dirichlet_second_peak_is_13_26_db_down() {
        // |sin(πLx)/(L sin(πx))| for a 200-tap contiguous aperture, 64x grid
        let taps = 200.0;
        let q = 12_800;
        let v: Vec<f64> = (0..q)
            .map(|i| {
                let x = i as f64 / q as f64;
                if i == 0 {
                    1.0
                } else {
                    ((PI * taps * x).sin() / (taps * (PI * x).sin())).abs()
                }
            })
            .collect();
        let pl = detect_peaks(&spectrum(v), 2, 64).unwrap();
        let ratio = 20.0 * (pl.peaks[0].magnitude / pl.peaks[1].magnitude).log10();
        assert_relative_eq!(ratio, 13.26, epsilon = 0.02);
    }

    #[test]
    fn parabola_vertex() {
        // exp of a parabola with vertex at +0.25
        let f = |x: f64| (-(x - 0.25) * (x - 0.25)).exp();
        assert_relative_eq!(parabolic_offset(f(-1.0), f(0.0), f(1.0)), 0.25, epsilon = 1e-12);
        assert_eq!(parabolic_offset(0.0, 1.0, 0.5), 0.0);
        assert_eq!(parabolic_offset(1.0, 1.0, 1.0), 0.0);
    }

    #[test]
    fn zero_k_is_rejected() {
        assert!(detect_peaks(&spectrum(vec![1.0, 0.0]), 0, 0).is_err());
    }
}
