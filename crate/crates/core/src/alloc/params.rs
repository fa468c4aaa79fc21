use serde::{Deserialize, Serialize};

use crate::error::{IsacError, Result};
use crate::SPEED_OF_LIGHT;

/// Static OFDM waveform constants.
///
/// The useful symbol duration is always `1 / subcarrier_spacing`; the
/// effective symbol duration adds the cyclic prefix on top.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct OfdmParams {
    n_subcarriers: usize,
    n_symbols: usize,
    subcarrier_spacing_hz: f64,
    carrier_freq_hz: f64,
    cp_len_s: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
struct RawParams {
    n_subcarriers: usize,
    n_symbols: usize,
    subcarrier_spacing_hz: f64,
    carrier_freq_hz: f64,
    cp_len_s: f64,
}

impl TryFrom<RawParams> for OfdmParams {
    type Error = IsacError;

    fn try_from(r: RawParams) -> Result<Self> {
        OfdmParams::new(
            r.n_subcarriers,
            r.n_symbols,
            r.subcarrier_spacing_hz,
            r.carrier_freq_hz,
            r.cp_len_s,
        )
    }
}

impl From<OfdmParams> for RawParams {
    fn from(p: OfdmParams) -> Self {
        RawParams {
            n_subcarriers: p.n_subcarriers,
            n_symbols: p.n_symbols,
            subcarrier_spacing_hz: p.subcarrier_spacing_hz,
            carrier_freq_hz: p.carrier_freq_hz,
            cp_len_s: p.cp_len_s,
        }
    }
}

impl OfdmParams {
    pub fn new(
        n_subcarriers: usize,
        n_symbols: usize,
        subcarrier_spacing_hz: f64,
        carrier_freq_hz: f64,
        cp_len_s: f64,
    ) -> Result<Self> {
        if n_subcarriers < 2 {
            return Err(IsacError::InvalidParams(format!(
                "n_subcarriers must be >= 2, got {n_subcarriers}"
            )));
        }
        if n_symbols < 1 {
            return Err(IsacError::InvalidParams("n_symbols must be >= 1".into()));
        }
        if !(subcarrier_spacing_hz.is_finite() && subcarrier_spacing_hz > 0.0) {
            return Err(IsacError::InvalidParams(format!(
                "subcarrier spacing must be positive, got {subcarrier_spacing_hz}"
            )));
        }
        if !(carrier_freq_hz.is_finite() && carrier_freq_hz > 0.0) {
            return Err(IsacError::InvalidParams(format!(
                "carrier frequency must be positive, got {carrier_freq_hz}"
            )));
        }
        if !(cp_len_s.is_finite() && cp_len_s >= 0.0) {
            return Err(IsacError::InvalidParams(format!(
                "cyclic prefix length must be >= 0, got {cp_len_s}"
            )));
        }
        Ok(Self {
            n_subcarriers,
            n_symbols,
            subcarrier_spacing_hz,
            carrier_freq_hz,
            cp_len_s,
        })
    }

    /// Desk-scale profile: N = 256, M = 32, 120 kHz spacing at 24 GHz, no CP.
    pub fn desk() -> Self {
        Self::new(256, 32, 120e3, 24e9, 0.0).expect("desk profile is valid")
    }

    /// Full-scale simulation profile: N = 1000, M = 720, 120 kHz at 24 GHz, no CP.
    pub fn paper() -> Self {
        Self::new(1000, 720, 120e3, 24e9, 0.0).expect("paper profile is valid")
    }

    /// Same waveform with a different number of symbols.
    pub fn with_symbols(self, n_symbols: usize) -> Result<Self> {
        Self::new(
            self.n_subcarriers,
            n_symbols,
            self.subcarrier_spacing_hz,
            self.carrier_freq_hz,
            self.cp_len_s,
        )
    }

    pub fn n_subcarriers(&self) -> usize {
        self.n_subcarriers
    }

    pub fn n_symbols(&self) -> usize {
        self.n_symbols
    }

    pub fn subcarrier_spacing_hz(&self) -> f64 {
        self.subcarrier_spacing_hz
    }

    pub fn carrier_freq_hz(&self) -> f64 {
        self.carrier_freq_hz
    }

    pub fn cp_len_s(&self) -> f64 {
        self.cp_len_s
    }

    /// Useful symbol duration T = 1/Δf.
    pub fn symbol_core_s(&self) -> f64 {
        1.0 / self.subcarrier_spacing_hz
    }

    /// Effective symbol duration T_s = T + T_cp.
    pub fn symbol_dur_s(&self) -> f64 {
        self.symbol_core_s() + self.cp_len_s
    }

    /// B = N·Δf.
    pub fn bandwidth_hz(&self) -> f64 {
        self.n_subcarriers as f64 * self.subcarrier_spacing_hz
    }

    /// Coherent processing interval M·T_s.
    pub fn cpi_s(&self) -> f64 {
        self.n_symbols as f64 * self.symbol_dur_s()
    }

    pub fn wavelength_m(&self) -> f64 {
        SPEED_OF_LIGHT / self.carrier_freq_hz
    }

    /// Range resolution of the full band, c / (2B).
    pub fn range_bin_m(&self) -> f64 {
        SPEED_OF_LIGHT / (2.0 * self.bandwidth_hz())
    }

    /// Largest unambiguous delay, T.
    pub fn max_delay_s(&self) -> f64 {
        self.symbol_core_s()
    }

    /// Largest unambiguous |Doppler|, 1/(2 T_s).
    pub fn max_doppler_hz(&self) -> f64 {
        0.5 / self.symbol_dur_s()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derived_durations() {
        let p = OfdmParams::new(1000, 720, 120e3, 24e9, 1e-6).unwrap();
        assert_eq!(p.symbol_core_s(), 1.0 / 120e3);
        assert_eq!(p.symbol_dur_s(), 1.0 / 120e3 + 1e-6);
        assert_eq!(p.bandwidth_hz(), 120e6);
    }

    #[test]
    fn rejects_bad_values() {
        assert!(OfdmParams::new(1, 1, 1.0, 1.0, 0.0).is_err());
        assert!(OfdmParams::new(8, 0, 1.0, 1.0, 0.0).is_err());
        assert!(OfdmParams::new(8, 1, 0.0, 1.0, 0.0).is_err());
        assert!(OfdmParams::new(8, 1, 1.0, 1.0, -1.0).is_err());
    }

    #[test]
    fn raw_conversion_validates() {
        let raw = RawParams {
            n_subcarriers: 1,
            n_symbols: 1,
            subcarrier_spacing_hz: 1.0,
            carrier_freq_hz: 1.0,
            cp_len_s: 0.0,
        };
        assert!(OfdmParams::try_from(raw).is_err());
        let ok = RawParams::from(OfdmParams::desk());
        assert_eq!(OfdmParams::try_from(ok).unwrap(), OfdmParams::desk());
    }
}
