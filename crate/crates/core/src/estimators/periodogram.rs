use num_complex::Complex64;
use serde::Serialize;

use super::peaks::parabolic_offset;
use crate::error::{IsacError, Result};
use crate::fft;
use crate::synth::FreqGrid;
use crate::SPEED_OF_LIGHT;

/// Which transform produced a periodogram.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectrumKind {
    /// Direct zero-fill transform over subcarriers; axis in seconds of delay.
    ZeroFill,
    /// Transform of the lag-domain virtual signal; axis in seconds of delay.
    Virtual,
    /// Transform over symbols at a fixed delay; axis in Hz of Doppler.
    Doppler,
}

/// Magnitude spectrum on a uniform, circular axis.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Periodogram {
    kind: SpectrumKind,
    axis: Vec<f64>,
    values: Vec<f64>,
    bin_width: f64,
    oversample: usize,
    mainlobe_halfwidth: usize,
}

impl Periodogram {
    /// Assemble a periodogram from raw parts.
    ///
    /// The axis must be strictly increasing with spacing `bin_width` and the
    /// values finite and non-negative.
    pub fn from_parts(
        kind: SpectrumKind,
        axis: Vec<f64>,
        values: Vec<f64>,
        oversample: usize,
        mainlobe_halfwidth: usize,
    ) -> Result<Self> {
        if axis.is_empty() || axis.len() != values.len() {
            return Err(IsacError::InvalidArgument(format!(
                "axis has {} points but values have {}",
                axis.len(),
                values.len()
            )));
        }
        if !axis.windows(2).all(|w| w[0] < w[1]) {
            return Err(IsacError::InvalidArgument(
                "periodogram axis must be strictly increasing".into(),
            ));
        }
        if !values.iter().all(|v| v.is_finite() && *v >= 0.0) {
            return Err(IsacError::InvalidArgument(
                "periodogram values must be finite and non-negative".into(),
            ));
        }
        let bin_width = if axis.len() > 1 { axis[1] - axis[0] } else { 0.0 };
        Ok(Self {
            kind,
            axis,
            values,
            bin_width,
            oversample,
            mainlobe_halfwidth,
        })
    }

    pub fn kind(&self) -> SpectrumKind {
        self.kind
    }

    pub fn axis(&self) -> &[f64] {
        &self.axis
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Axis spacing (s for delay spectra, Hz for Doppler).
    pub fn bin_width(&self) -> f64 {
        self.bin_width
    }

    pub fn oversample(&self) -> usize {
        self.oversample
    }

    /// First-null halfwidth, in bins, of a contiguous aperture with the
    /// same extent as the one that produced this spectrum.
    pub fn mainlobe_halfwidth(&self) -> usize {
        self.mainlobe_halfwidth
    }

    /// Index of the largest value; the lowest index wins ties.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, &v) in self.values.iter().enumerate() {
            if v > self.values[best] {
                best = i;
            }
        }
        best
    }

    /// Wrap-around distance between two bins.
    pub fn circular_distance(&self, a: usize, b: usize) -> usize {
        let d = a.abs_diff(b);
        d.min(self.len() - d)
    }

    /// Value at a bin index taken modulo the length.
    pub fn value_wrapped(&self, i: isize) -> f64 {
        self.values[i.rem_euclid(self.len() as isize) as usize]
    }

    /// Axis value converted to range in metres (delay spectra only).
    pub fn range_m(&self, axis_value: f64) -> Option<f64> {
        match self.kind {
            SpectrumKind::Doppler => None,
            _ => Some(axis_value * SPEED_OF_LIGHT / 2.0),
        }
    }
}

/// ceil(q_len / extent), the first null of a contiguous aperture of `extent`
/// taps sampled on a `q_len`-point grid.
pub fn first_null_bins(q_len: usize, extent: usize) -> usize {
    if extent == 0 {
        return 0;
    }
    q_len.div_ceil(extent)
}

fn check_oversample(os: usize) -> Result<()> {
    if os == 0 {
        return Err(IsacError::InvalidArgument(
            "oversampling factor must be >= 1".into(),
        ));
    }
    Ok(())
}

/// |Σ_m Σ_n Y_m[n] e^{j2πqn/Q}| for q = 0..Q-1, unscaled.
fn delay_spectrum(grid: &FreqGrid, q_len: usize) -> Vec<f64> {
    let n_sc = grid.n_subcarriers();
    let mut buf = vec![Complex64::new(0.0, 0.0); q_len];
    for m in 0..grid.n_symbols() {
        for (b, y) in buf[..n_sc].iter_mut().zip(grid.row(m)) {
            *b += y;
        }
    }
    fft::inverse_in_place(&mut buf);
    buf.iter().map(|z| z.norm()).collect()
}

fn delay_axis(q_len: usize, spacing_hz: f64) -> Vec<f64> {
    (0..q_len)
        .map(|q| q as f64 / (q_len as f64 * spacing_hz))
        .collect()
}

/// Zero-fill delay periodogram on Q = oversample·N bins.
///
/// Bin q maps to delay q/(QΔf). Values are divided by the number of active
/// resource elements so that a unit noiseless target peaks at 1.
pub fn zero_fill_periodogram(grid: &FreqGrid, oversample: usize) -> Result<Periodogram> {
    check_oversample(oversample)?;
    let total = grid.allocation().total_active();
    if total == 0 {
        return Err(IsacError::EmptyAllocation);
    }
    let q_len = oversample * grid.n_subcarriers();
    let scale = 1.0 / total as f64;
    let values = delay_spectrum(grid, q_len)
        .into_iter()
        .map(|v| v * scale)
        .collect();
    Periodogram::from_parts(
        SpectrumKind::ZeroFill,
        delay_axis(q_len, grid.params().subcarrier_spacing_hz()),
        values,
        oversample,
        first_null_bins(q_len, grid.allocation().extent()),
    )
}

/// Single-target delay estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DelayEstimate {
    /// Argmax bin on the oversampled grid.
    pub bin: usize,
    /// Delay of `bin`.
    pub grid_delay_s: f64,
    /// Delay after optional refinement, wrapped into [0, T).
    pub delay_s: f64,
    pub range_m: f64,
    /// Objective value |Σ Y e^{j2πnΔfτ}| at `bin`, unscaled.
    pub objective: f64,
}

/// Maximum-likelihood delay of a single target.
///
/// Maximizes |Σ_m Σ_n Y_m[n] e^{j2πnΔfτ}| over the same grid as
/// [`zero_fill_periodogram`], then optionally refines with a three-point
/// parabola on log-magnitude.
pub fn ml_single_target(grid: &FreqGrid, oversample: usize, refine: bool) -> Result<DelayEstimate> {
    check_oversample(oversample)?;
    if grid.allocation().total_active() == 0 {
        return Err(IsacError::EmptyAllocation);
    }
    let q_len = oversample * grid.n_subcarriers();
    let spec = delay_spectrum(grid, q_len);
    let mut bin = 0;
    for (i, &v) in spec.iter().enumerate() {
        if v > spec[bin] {
            bin = i;
        }
    }
    let df = grid.params().subcarrier_spacing_hz();
    let cell = 1.0 / (q_len as f64 * df);
    let grid_delay_s = bin as f64 * cell;
    let offset = if refine {
        let at = |i: isize| spec[i.rem_euclid(q_len as isize) as usize];
        parabolic_offset(at(bin as isize - 1), spec[bin], at(bin as isize + 1))
    } else {
        0.0
    };
    let delay_s = (grid_delay_s + offset * cell).rem_euclid(1.0 / df);
    Ok(DelayEstimate {
        bin,
        grid_delay_s,
        delay_s,
        range_m: delay_s * SPEED_OF_LIGHT / 2.0,
        objective: spec[bin],
    })
}

/// Doppler periodogram on Q_D = oversample·M bins at a fixed delay.
///
/// Each symbol is first matched to `delay_s`; when `delay_s` is `None` the
/// delay is taken from [`ml_single_target`] at the same oversampling. The
/// axis is centred, running from -Q_D/2 to Q_D/2 - 1 bins of 1/(Q_D T_s).
pub fn doppler_periodogram(
    grid: &FreqGrid,
    oversample: usize,
    delay_s: Option<f64>,
) -> Result<Periodogram> {
    check_oversample(oversample)?;
    let total = grid.allocation().total_active();
    if total == 0 {
        return Err(IsacError::EmptyAllocation);
    }
    let tau = match delay_s {
        Some(t) => t,
        None => ml_single_target(grid, oversample, false)?.grid_delay_s,
    };
    let params = grid.params();
    let df = params.subcarrier_spacing_hz();
    let steer: Vec<Complex64> = (0..grid.n_subcarriers())
        .map(|n| {
            let cycles = (n as f64 * df * tau).rem_euclid(1.0);
            Complex64::from_polar(1.0, std::f64::consts::TAU * cycles)
        })
        .collect();

    let m_len = grid.n_symbols();
    let q_len = oversample * m_len;
    let mut buf = vec![Complex64::new(0.0, 0.0); q_len];
    for (m, b) in buf[..m_len].iter_mut().enumerate() {
        *b = grid
            .allocation()
            .symbol(m)
            .iter()
            .map(|&n| grid.get(m, n) * steer[n])
            .sum();
    }
    fft::forward_in_place(&mut buf);

    let half = q_len / 2;
    let ts = params.symbol_dur_s();
    let scale = 1.0 / total as f64;
    let (axis, values) = (0..q_len)
        .map(|i| {
            let k = i as isize - half as isize;
            let v = buf[k.rem_euclid(q_len as isize) as usize].norm() * scale;
            (k as f64 / (q_len as f64 * ts), v)
        })
        .unzip();
    let used_symbols = (0..m_len)
        .filter(|&m| !grid.allocation().symbol(m).is_empty())
        .collect::<Vec<_>>();
    let extent = match (used_symbols.first(), used_symbols.last()) {
        (Some(a), Some(b)) => b - a + 1,
        _ => 0,
    };
    Periodogram::from_parts(
        SpectrumKind::Doppler,
        axis,
        values,
        oversample,
        first_null_bins(q_len, extent),
    )
}

/// Build a delay-axis virtual periodogram from dense lag values.
pub(crate) fn lag_periodogram(
    dense: &[Complex64],
    max_lag: usize,
    lag_count: usize,
    extent_lag: usize,
    spacing_hz: f64,
    oversample: usize,
) -> Result<Periodogram> {
    check_oversample(oversample)?;
    if lag_count == 0 {
        return Err(IsacError::EmptyAllocation);
    }
    let q_len = oversample * (2 * max_lag + 1);
    let mut buf = vec![Complex64::new(0.0, 0.0); q_len];
    for (k, &r) in dense.iter().enumerate() {
        let lag = k as isize - max_lag as isize;
        buf[lag.rem_euclid(q_len as isize) as usize] = r;
    }
    fft::inverse_in_place(&mut buf);
    let scale = 1.0 / lag_count as f64;
    Periodogram::from_parts(
        SpectrumKind::Virtual,
        delay_axis(q_len, spacing_hz),
        buf.iter().map(|z| z.norm() * scale).collect(),
        oversample,
        first_null_bins(q_len, 2 * extent_lag + 1),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alloc::{OfdmParams, PatternLabel, ResourceAllocation};
    use crate::synth::{signal_grid, Path};
    use approx::assert_relative_eq;
    use std::f64::consts::TAU;

    fn grid_on(indices: Vec<usize>, n: usize, m: usize, paths: &[Path]) -> FreqGrid {
        let p = OfdmParams::new(n, m, 120e3, 24e9, 0.0).unwrap();
        let a = ResourceAllocation::uniform(n, m, indices, PatternLabel::Custom).unwrap();
        signal_grid(paths, &a, &p).unwrap()
    }

    fn on_grid_path(bin: usize, n: usize, os: usize) -> Path {
        Path {
            amplitude: 1.0,
            phase_rad: 0.3,
            delay_s: bin as f64 / (os as f64 * n as f64 * 120e3),
            doppler_hz: 0.0,
        }
    }

    #[test]
    fn full_allocation_on_grid_is_a_delta() {
        let n = 16;
        let g = grid_on((0..n).collect(), n, 3, &[on_grid_path(5, n, 1)]);
        let p = zero_fill_periodogram(&g, 1).unwrap();
        for (q, &v) in p.values().iter().enumerate() {
            if q == 5 {
                assert_relative_eq!(v, 1.0, epsilon = 1e-12);
            } else {
                assert!(v < 1e-12, "bin {q} = {v}");
            }
        }
        assert_eq!(p.argmax(), 5);
    }

    #[test]
    fn sparse_sidelobes_follow_four_term_sum() {
        let n = 7;
        let os = 8;
        let set = [0usize, 1, 4, 6];
        let q0 = 13;
        let g = grid_on(set.to_vec(), n, 1, &[on_grid_path(q0, n, os)]);
        let p = zero_fill_periodogram(&g, os).unwrap();
        let q_len = (os * n) as f64;
        for (q, &v) in p.values().iter().enumerate() {
            let d = q as f64 - q0 as f64;
            let want = set
                .iter()
                .map(|&i| Complex64::from_polar(1.0, TAU * i as f64 * d / q_len))
                .sum::<Complex64>()
                .norm()
                / 4.0;
            assert_relative_eq!(v, want, epsilon = 1e-12);
        }
        assert_eq!(p.argmax(), q0);
    }

    #[test]
    fn zero_grid_gives_zero_spectrum() {
        let g = grid_on(vec![0, 3, 7], 8, 2, &[]);
        let p = zero_fill_periodogram(&g, 4).unwrap();
        assert!(p.values().iter().all(|&v| v == 0.0));
        assert_eq!(p.argmax(), 0);
    }

    #[test]
    fn rejects_bad_inputs() {
        let g = grid_on(vec![0, 3], 8, 1, &[]);
        assert!(zero_fill_periodogram(&g, 0).is_err());
        let empty = grid_on(vec![], 8, 1, &[]);
        assert!(matches!(
            zero_fill_periodogram(&empty, 1),
            Err(IsacError::EmptyAllocation)
        ));
        assert!(ml_single_target(&empty, 1, true).is_err());
    }

    #[test]
    fn ml_recovers_on_grid_delay_exactly() {
        let n = 64;
        let os = 4;
        let path = on_grid_path(37, n, os);
        let g = grid_on((0..n).step_by(3).chain([n - 1]).collect(), n, 2, &[path]);
        let est = ml_single_target(&g, os, true).unwrap();
        assert_eq!(est.bin, 37);
        assert_relative_eq!(est.delay_s, path.delay_s, max_relative = 1e-9);
        assert_eq!(zero_fill_periodogram(&g, os).unwrap().argmax(), est.bin);
    }

    #[test]
    fn refinement_moves_toward_off_grid_truth() {
        let n = 128;
        let os = 4;
        let cell = 1.0 / (os as f64 * n as f64 * 120e3);
        let path = Path {
            amplitude: 1.0,
            phase_rad: 0.0,
            delay_s: 40.3 * cell,
            doppler_hz: 0.0,
        };
        let g = grid_on((0..n).collect(), n, 1, &[path]);
        let raw = ml_single_target(&g, os, false).unwrap();
        let fine = ml_single_target(&g, os, true).unwrap();
        assert_eq!(raw.bin, 40);
        assert!((fine.delay_s - path.delay_s).abs() < (raw.delay_s - path.delay_s).abs());
    }

    #[test]
    fn doppler_peak_lands_on_target_bin() {
        let n = 32;
        let m = 16;
        let os = 2;
        let p = OfdmParams::new(n, m, 120e3, 24e9, 0.0).unwrap();
        let k0 = 5.0;
        let path = Path {
            amplitude: 1.0,
            phase_rad: 0.0,
            delay_s: 3.0 / (n as f64 * 120e3),
            doppler_hz: k0 / (os as f64 * m as f64 * p.symbol_dur_s()),
        };
        let g = grid_on((0..n).collect(), n, m, &[path]);
        let spec = doppler_periodogram(&g, os, None).unwrap();
        let peak = spec.argmax();
        assert_relative_eq!(spec.axis()[peak], path.doppler_hz, max_relative = 1e-9);
        assert_relative_eq!(spec.values()[peak], 1.0, epsilon = 1e-9);

        let still = Path { doppler_hz: 0.0, ..path };
        let g0 = grid_on((0..n).collect(), n, m, &[still]);
        let spec0 = doppler_periodogram(&g0, os, Some(still.delay_s)).unwrap();
        assert_eq!(spec0.axis()[spec0.argmax()], 0.0);
    }

    #[test]
    fn first_null_matches_contiguous_aperture() {
        assert_eq!(first_null_bins(1024, 256), 4);
        assert_eq!(first_null_bins(1000, 256), 4);
        assert_eq!(first_null_bins(10, 0), 0);
    }
}
