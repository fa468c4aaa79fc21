use std::f64::consts::TAU;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::alloc::{difference_set, OfdmParams, ResourceAllocation};
use crate::error::{IsacError, Result};

/// Which aperture weighting an ambiguity surface was computed for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AmbiguityKind {
    /// Unit taps on the active subcarriers.
    Direct,
    /// Pair counts c[s] as taps on the difference-set lags.
    Virtual,
}

/// Normalized |χ(τ, f_D)| sampled on a delay × Doppler grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AmbiguitySurface {
    pub kind: AmbiguityKind,
    pub delay_axis_s: Vec<f64>,
    pub doppler_axis_hz: Vec<f64>,
    /// Row-major: `values[j * delays + i]` is Doppler j, delay i.
    pub values: Vec<f64>,
}

impl AmbiguitySurface {
    pub fn get(&self, doppler_index: usize, delay_index: usize) -> f64 {
        self.values[doppler_index * self.delay_axis_s.len() + delay_index]
    }

    /// The delay cut at one Doppler row.
    pub fn delay_cut(&self, doppler_index: usize) -> &[f64] {
        let n = self.delay_axis_s.len();
        &self.values[doppler_index * n..(doppler_index + 1) * n]
    }
}

fn check_grid(axis: &[f64], what: &str) -> Result<()> {
    if axis.is_empty() || !axis.iter().all(|x| x.is_finite()) {
        return Err(IsacError::InvalidArgument(format!(
            "{what} grid must be non-empty and finite"
        )));
    }
    Ok(())
}

/// Evaluates |Σ_m Σ_k w_m[k] e^{j2π(f m T_s - k Δf τ)}| / Σ_m Σ_k w_m[k].
///
/// `taps` lists (symbol, index, weight) triples.
fn surface(
    taps_per_symbol: &[Vec<(i64, f64)>],
    params: &OfdmParams,
    delays: &[f64],
    dopplers: &[f64],
) -> Vec<f64> {
    let norm: f64 = taps_per_symbol
        .iter()
        .flat_map(|t| t.iter().map(|&(_, w)| w))
        .sum();
    let df = params.subcarrier_spacing_hz();
    let ts = params.symbol_dur_s();

    // per-delay tap phasors are shared across Doppler rows
    let mut idx: Vec<i64> = taps_per_symbol
        .iter()
        .flat_map(|t| t.iter().map(|&(k, _)| k))
        .collect();
    idx.sort_unstable();
    idx.dedup();

    dopplers
        .par_iter()
        .flat_map_iter(|&fd| {
            // weight per distinct index after summing the Doppler phasors
            let mut w = vec![Complex64::new(0.0, 0.0); idx.len()];
            for (m, taps) in taps_per_symbol.iter().enumerate() {
                let ph = Complex64::from_polar(1.0, TAU * (fd * ts * m as f64).rem_euclid(1.0));
                for &(k, weight) in taps {
                    let pos = idx.binary_search(&k).expect("index collected above");
                    w[pos] += ph * weight;
                }
            }
            let idx = &idx;
            delays.iter().map(move |&tau| {
                let sum: Complex64 = idx
                    .iter()
                    .zip(&w)
                    .map(|(&k, &wk)| {
                        wk * Complex64::from_polar(1.0, -TAU * (k as f64 * df * tau).rem_euclid(1.0))
                    })
                    .sum();
                sum.norm() / norm
            })
        })
        .collect()
}

/// Ambiguity surface of the allocation, direct or through its virtual
/// aperture, normalized to 1 at (0, 0).
///
/// The virtual surface needs a symbol-constant allocation.
pub fn ambiguity_function(
    alloc: &ResourceAllocation,
    params: &OfdmParams,
    kind: AmbiguityKind,
    delay_grid_s: &[f64],
    doppler_grid_hz: &[f64],
) -> Result<AmbiguitySurface> {
    check_grid(delay_grid_s, "delay")?;
    check_grid(doppler_grid_hz, "Doppler")?;
    if alloc.total_active() == 0 {
        return Err(IsacError::EmptyAllocation);
    }
    let taps: Vec<Vec<(i64, f64)>> = match kind {
        AmbiguityKind::Direct => alloc
            .symbols()
            .map(|s| s.iter().map(|&n| (n as i64, 1.0)).collect())
            .collect(),
        AmbiguityKind::Virtual => {
            let ap = difference_set(alloc)?;
            let lag_taps: Vec<(i64, f64)> = ap.rows().map(|(s, c)| (s, c as f64)).collect();
            vec![lag_taps; alloc.n_symbols()]
        }
    };
    Ok(AmbiguitySurface {
        kind,
        delay_axis_s: delay_grid_s.to_vec(),
        doppler_axis_hz: doppler_grid_hz.to_vec(),
        values: surface(&taps, params, delay_grid_s, doppler_grid_hz),
    })
}

/// Uniform grids covering one unambiguous period in each dimension:
/// delays q/(QΔf) for q in 0..Q and Dopplers k/(K T_s) for k in -K/2..K/2.
pub fn default_grids(params: &OfdmParams, delay_points: usize, doppler_points: usize) -> (Vec<f64>, Vec<f64>) {
    let df = params.subcarrier_spacing_hz();
    let ts = params.symbol_dur_s();
    let delays = (0..delay_points)
        .map(|q| q as f64 / (delay_points as f64 * df))
        .collect();
    let half = doppler_points as i64 / 2;
    let dopplers = (0..doppler_points as i64)
        .map(|k| (k - half) as f64 / (doppler_points as f64 * ts))
        .collect();
    (delays, dopplers)
}

/// Largest value of a circular delay cut beyond `halfwidth` bins from bin 0.
pub fn max_sidelobe(cut: &[f64], halfwidth: usize) -> f64 {
    let n = cut.len();
    cut.iter()
        .enumerate()
        .filter(|&(i, _)| i.min(n - i) > halfwidth)
        .map(|(_, &v)| v)
        .fold(0.0, f64::max)
}
