use std::f64::consts::TAU;

use nalgebra::Matrix2;
use serde::Serialize;

use crate::alloc::{OfdmParams, PatternLabel, ResourceAllocation};
use crate::error::{IsacError, Result};
use crate::SPEED_OF_LIGHT;

/// Integer power sums over every active RE: (Σ|𝒩_m|, ΣΣ i, ΣΣ i²).
fn power_sums(alloc: &ResourceAllocation) -> (u128, u128, u128) {
    let mut total = 0u128;
    let mut s1 = 0u128;
    let mut s2 = 0u128;
    for set in alloc.symbols() {
        total += set.len() as u128;
        for &i in set {
            let i = i as u128;
            s1 += i;
            s2 += i * i;
        }
    }
    (total, s1, s2)
}

fn check_inputs(alloc: &ResourceAllocation, params: &OfdmParams, amplitude: f64, n0: f64) -> Result<()> {
    if !(amplitude.is_finite() && amplitude > 0.0) {
        return Err(IsacError::InvalidArgument(format!(
            "amplitude must be > 0, got {amplitude}"
        )));
    }
    if !(n0.is_finite() && n0 > 0.0) {
        return Err(IsacError::InvalidArgument(format!("N0 must be > 0, got {n0}")));
    }
    if alloc.n_subcarriers() != params.n_subcarriers() || alloc.n_symbols() != params.n_symbols() {
        return Err(IsacError::InvalidArgument(
            "allocation does not match the OFDM parameters".into(),
        ));
    }
    if alloc.total_active() == 0 {
        return Err(IsacError::EmptyAllocation);
    }
    Ok(())
}

/// Fisher information of (τ, φ) for one target:
///
/// (2A²/N_0)·Σ_m [[Σ(2πΔf i)², Σ2πΔf i], [Σ2πΔf i, |𝒩_m|]].
///
/// The off-diagonal sign depends on the sign convention of φ and has no
/// effect on the delay bound.
pub fn fim_single_target(
    alloc: &ResourceAllocation,
    params: &OfdmParams,
    amplitude: f64,
    n0: f64,
) -> Result<[[f64; 2]; 2]> {
    check_inputs(alloc, params, amplitude, n0)?;
    let (total, s1, s2) = power_sums(alloc);
    let w = TAU * params.subcarrier_spacing_hz();
    let k = 2.0 * amplitude * amplitude / n0;
    let off = k * w * s1 as f64;
    Ok([[k * w * w * s2 as f64, off], [off, k * total as f64]])
}

/// Delay variance bound for one target, any allocation:
///
/// σ_τ² = (N_0/(2A²))·T / (ω²(T·g₁ - g₂)) with T = Σ|𝒩_m|, ω = 2πΔf,
/// g₁ = ΣΣi², g₂ = (ΣΣi)². The bracket is evaluated in exact integers.
pub fn crlb_delay(
    alloc: &ResourceAllocation,
    params: &OfdmParams,
    amplitude: f64,
    n0: f64,
) -> Result<f64> {
    check_inputs(alloc, params, amplitude, n0)?;
    let (total, s1, s2) = power_sums(alloc);
    let denom = total * s2 - s1 * s1;
    if denom == 0 {
        return Err(IsacError::SingularFim);
    }
    let w = TAU * params.subcarrier_spacing_hz();
    Ok(n0 / (2.0 * amplitude * amplitude) * total as f64 / (w * w * denom as f64))
}

/// Delay bound when every symbol uses the same set 𝒩₀ of size n:
///
/// σ_τ² = (N_0/(2MA²))·n / (ω²(n·Σi² - (Σi)²)).
pub fn crlb_delay_constant(
    alloc: &ResourceAllocation,
    params: &OfdmParams,
    amplitude: f64,
    n0: f64,
) -> Result<f64> {
    check_inputs(alloc, params, amplitude, n0)?;
    let set = alloc
        .common_indices()
        .ok_or(IsacError::NonConstantAllocation)?;
    let n = set.len() as u128;
    let s1: u128 = set.iter().map(|&i| i as u128).sum();
    let s2: u128 = set.iter().map(|&i| (i as u128).pow(2)).sum();
    let denom = n * s2 - s1 * s1;
    if denom == 0 {
        return Err(IsacError::SingularFim);
    }
    let w = TAU * params.subcarrier_spacing_hz();
    let m = alloc.n_symbols() as f64;
    Ok(n0 / (2.0 * m * amplitude * amplitude) * n as f64 / (w * w * denom as f64))
}

/// |closed form - [FIM⁻¹]₁₁| / closed form.
pub fn crlb_vs_inverse_fim_check(
    alloc: &ResourceAllocation,
    params: &OfdmParams,
    amplitude: f64,
    n0: f64,
) -> Result<f64> {
    let f = fim_single_target(alloc, params, amplitude, n0)?;
    let closed = crlb_delay(alloc, params, amplitude, n0)?;
    let inv = Matrix2::new(f[0][0], f[0][1], f[1][0], f[1][1])
        .try_inverse()
        .ok_or(IsacError::SingularFim)?;
    Ok((closed - inv[(0, 0)]).abs() / closed)
}

/// Bound and its inputs, ready for export.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrlbReport {
    pub pattern: PatternLabel,
    pub active_per_symbol: Option<usize>,
    pub total_active: usize,
    pub n_symbols: usize,
    pub amplitude: f64,
    pub n0: f64,
    pub subcarrier_spacing_hz: f64,
    pub fim: [[f64; 2]; 2],
    pub crlb_delay_s2: f64,
    pub crlb_range_m2: f64,
    pub rmse_bound_m: f64,
}

pub fn crlb_report(
    alloc: &ResourceAllocation,
    params: &OfdmParams,
    amplitude: f64,
    n0: f64,
) -> Result<CrlbReport> {
    let fim = fim_single_target(alloc, params, amplitude, n0)?;
    let crlb_delay_s2 = crlb_delay(alloc, params, amplitude, n0)?;
    let half_c = SPEED_OF_LIGHT / 2.0;
    let crlb_range_m2 = crlb_delay_s2 * half_c * half_c;
    Ok(CrlbReport {
        pattern: alloc.label(),
        active_per_symbol: alloc.common_indices().map(<[usize]>::len),
        total_active: alloc.total_active(),
        n_symbols: alloc.n_symbols(),
        amplitude,
        n0,
        subcarrier_spacing_hz: params.subcarrier_spacing_hz(),
        fim,
        crlb_delay_s2,
        crlb_range_m2,
        rmse_bound_m: crlb_range_m2.sqrt(),
    })
}
