use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use super::periodogram::{lag_periodogram, Periodogram};
use crate::alloc::{difference_set, VirtualAperture};
use crate::error::{IsacError, Result};
use crate::synth::FreqGrid;

/// Lag-domain signal R̃[s] on a virtual aperture.
///
/// Values are stored densely for s = -(N-1)..=N-1; holes hold zero and are
/// reported as `None` by [`VirtualSignal::get`].
#[derive(Debug, Clone, PartialEq)]
pub struct VirtualSignal {
    values: Vec<Complex64>,
    aperture: Arc<VirtualAperture>,
    accumulated: bool,
    symbols: usize,
    subcarrier_spacing_hz: f64,
}

impl VirtualSignal {
    pub fn aperture(&self) -> &Arc<VirtualAperture> {
        &self.aperture
    }

    /// R̃[lag], or `None` when the lag is a hole or out of range.
    pub fn get(&self, lag: i64) -> Option<Complex64> {
        (self.aperture.count(lag) > 0).then(|| self.values[self.aperture.slot(lag)])
    }

    /// Dense values indexed by `aperture().slot(lag)`.
    pub fn dense(&self) -> &[Complex64] {
        &self.values
    }

    /// (lag, R̃[lag]) for every lag in 𝒫, ascending.
    pub fn iter(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        self.aperture
            .lags()
            .into_iter()
            .map(move |s| (s, self.values[self.aperture.slot(s)]))
    }

    /// Whether this is a CPI average rather than a single symbol.
    pub fn is_accumulated(&self) -> bool {
        self.accumulated
    }

    /// Number of symbols that went into this signal.
    pub fn symbols(&self) -> usize {
        self.symbols
    }

    pub fn subcarrier_spacing_hz(&self) -> f64 {
        self.subcarrier_spacing_hz
    }
}

/// R̃_m[s] = (1/c[s]) Σ Y_m[n+s]·conj(Y_m[n]) over active pairs at lag s.
///
/// For a single noiseless target this equals A²e^{-j2πΔfsτ} at every lag.
/// Negative lags are the conjugates of positive ones and R̃_m[0] is the mean
/// power over active subcarriers. The symbol must use exactly the index set
/// the aperture was built from.
pub fn autocorrelate_symbol(
    grid: &FreqGrid,
    m: usize,
    aperture: &Arc<VirtualAperture>,
) -> Result<VirtualSignal> {
    if m >= grid.n_symbols() {
        return Err(IsacError::InvalidArgument(format!(
            "symbol {m} out of range for M = {}",
            grid.n_symbols()
        )));
    }
    let set = grid.allocation().symbol(m);
    if set != aperture.indices() || aperture.n_subcarriers() != grid.n_subcarriers() {
        return Err(IsacError::ApertureMismatch);
    }
    let row = grid.row(m);
    let max_lag = aperture.max_abs_lag();
    let mut values = vec![Complex64::new(0.0, 0.0); 2 * max_lag + 1];

    for (k, &hi) in set.iter().enumerate() {
        let y_hi = row[hi];
        for &lo in &set[..k] {
            values[max_lag + hi - lo] += y_hi * row[lo].conj();
        }
    }
    let power: f64 = set.iter().map(|&n| row[n].norm_sqr()).sum();
    values[max_lag] = Complex64::new(power / set.len() as f64, 0.0);
    for s in 1..=max_lag {
        let c = aperture.count(s as i64);
        if c > 0 {
            let r = values[max_lag + s] / c as f64;
            values[max_lag + s] = r;
            values[max_lag - s] = r.conj();
        }
    }

    Ok(VirtualSignal {
        values,
        aperture: Arc::clone(aperture),
        accumulated: false,
        symbols: 1,
        subcarrier_spacing_hz: grid.params().subcarrier_spacing_hz(),
    })
}

/// Lag-wise arithmetic mean of per-symbol signals, in slice order.
pub fn accumulate_cpi(per_symbol: &[VirtualSignal]) -> Result<VirtualSignal> {
    let first = per_symbol.first().ok_or_else(|| {
        IsacError::InvalidArgument("accumulation needs at least one symbol".into())
    })?;
    if per_symbol.iter().any(|v| {
        v.aperture != first.aperture || v.subcarrier_spacing_hz != first.subcarrier_spacing_hz
    }) {
        return Err(IsacError::ApertureMismatch);
    }
    let mut sum = vec![Complex64::new(0.0, 0.0); first.values.len()];
    for v in per_symbol {
        for (acc, x) in sum.iter_mut().zip(&v.values) {
            *acc += x;
        }
    }
    let scale = 1.0 / per_symbol.len() as f64;
    for x in &mut sum {
        *x *= scale;
    }
    // keep the zero lag exactly real after averaging
    let zero = first.aperture.max_abs_lag();
    sum[zero].im = 0.0;
    Ok(VirtualSignal {
        values: sum,
        aperture: Arc::clone(&first.aperture),
        accumulated: true,
        symbols: per_symbol.iter().map(|v| v.symbols).sum(),
        subcarrier_spacing_hz: first.subcarrier_spacing_hz,
    })
}

/// Delay periodogram of a virtual signal on Q_v = oversample·(2N-1) bins.
///
/// Holes stay zero. Bin q maps to delay q/(Q_vΔf); values are divided by
/// |𝒫|.
pub fn virtual_periodogram(vs: &VirtualSignal, oversample: usize) -> Result<Periodogram> {
    let ap = &vs.aperture;
    lag_periodogram(
        &vs.values,
        ap.max_abs_lag(),
        ap.len(),
        ap.extent_lag(),
        vs.subcarrier_spacing_hz,
        oversample,
    )
}

/// Difference set, per-symbol autocorrelation and CPI accumulation.
///
/// Symbols are processed in parallel and averaged in symbol order, so the
/// output does not depend on the thread count.
pub fn run_algorithm1(grid: &FreqGrid) -> Result<(VirtualSignal, Arc<VirtualAperture>)> {
    let aperture = Arc::new(difference_set(grid.allocation())?);
    let per_symbol = (0..grid.n_symbols())
        .into_par_iter()
        .map(|m| autocorrelate_symbol(grid, m, &aperture))
        .collect::<Result<Vec<_>>>()?;
    Ok((accumulate_cpi(&per_symbol)?, aperture))
}
