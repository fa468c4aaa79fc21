//! Point targets, the radar link budget, and the mapping from kinematics to
//! per-path delay and Doppler.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::alloc::OfdmParams;
use crate::error::{IsacError, Result};
use crate::SPEED_OF_LIGHT;

/// How a target's echo strength is specified.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reflectivity {
    /// Radar cross section in m², converted through a [`LinkBudget`].
    Rcs(f64),
    /// Linear channel amplitude |α| directly.
    Amplitude(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Target {
    pub distance_m: f64,
    pub velocity_mps: f64,
    pub reflectivity: Reflectivity,
    /// Channel phase in [0, 2π); drawn uniformly at synthesis time when `None`.
    pub phase_rad: Option<f64>,
}

impl Target {
    pub fn with_amplitude(distance_m: f64, velocity_mps: f64, amplitude: f64) -> Self {
        Self {
            distance_m,
            velocity_mps,
            reflectivity: Reflectivity::Amplitude(amplitude),
            phase_rad: None,
        }
    }

    pub fn with_rcs(distance_m: f64, velocity_mps: f64, rcs_m2: f64) -> Self {
        Self {
            distance_m,
            velocity_mps,
            reflectivity: Reflectivity::Rcs(rcs_m2),
            phase_rad: None,
        }
    }

    pub fn phase(mut self, phase_rad: f64) -> Self {
        self.phase_rad = Some(phase_rad);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.distance_m.is_finite() && self.distance_m > 0.0) {
            return Err(IsacError::InvalidTarget(format!(
                "distance must be > 0, got {}",
                self.distance_m
            )));
        }
        if !self.velocity_mps.is_finite() {
            return Err(IsacError::InvalidTarget("velocity must be finite".into()));
        }
        match self.reflectivity {
            Reflectivity::Amplitude(a) if !(a.is_finite() && a > 0.0) => {
                return Err(IsacError::InvalidTarget(format!(
                    "amplitude must be > 0, got {a}"
                )))
            }
            Reflectivity::Rcs(k) if !(k.is_finite() && k >= 0.0) => {
                return Err(IsacError::InvalidTarget(format!("RCS must be >= 0, got {k}")))
            }
            _ => {}
        }
        if let Some(phi) = self.phase_rad {
            if !(0.0..2.0 * PI).contains(&phi) {
                return Err(IsacError::InvalidTarget(format!(
                    "phase must lie in [0, 2π), got {phi}"
                )));
            }
        }
        Ok(())
    }
}

/// Transmit power, antenna gains and wavelength of a mono-static radar.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkBudget {
    pub tx_power_w: f64,
    pub tx_gain: f64,
    pub rx_gain: f64,
    pub wavelength_m: f64,
}

impl LinkBudget {
    pub fn new(tx_power_w: f64, tx_gain: f64, rx_gain: f64, wavelength_m: f64) -> Result<Self> {
        for (name, v) in [
            ("tx power", tx_power_w),
            ("tx gain", tx_gain),
            ("rx gain", rx_gain),
            ("wavelength", wavelength_m),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(IsacError::InvalidArgument(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        Ok(Self {
            tx_power_w,
            tx_gain,
            rx_gain,
            wavelength_m,
        })
    }

    /// Gains given in dB, wavelength derived from the carrier frequency.
    pub fn from_db(tx_power_w: f64, tx_gain_db: f64, rx_gain_db: f64, carrier_freq_hz: f64) -> Result<Self> {
        Self::new(
            tx_power_w,
            db_to_linear(tx_gain_db),
            db_to_linear(rx_gain_db),
            SPEED_OF_LIGHT / carrier_freq_hz,
        )
    }

    /// 0.1 W with 20 dB transmit and receive gain.
    pub fn reference(carrier_freq_hz: f64) -> Self {
        Self::from_db(0.1, 20.0, 20.0, carrier_freq_hz).expect("reference budget is valid")
    }
}

/// 10^(db/10).
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Noise model for the observed resource elements.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseSpec {
    Noiseless,
    /// Complex noise variance per resource element, N_0 (N_0/2 per real dimension).
    N0(f64),
    /// Per-active-RE SNR in dB relative to the first target's amplitude.
    SnrDb(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scene {
    pub targets: Vec<Target>,
    pub noise: NoiseSpec,
    pub link_budget: Option<LinkBudget>,
}

impl Scene {
    pub fn new(targets: Vec<Target>, noise: NoiseSpec) -> Self {
        Self {
            targets,
            noise,
            link_budget: None,
        }
    }

    pub fn with_link_budget(mut self, lb: LinkBudget) -> Self {
        self.link_budget = Some(lb);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.targets.is_empty() {
            return Err(IsacError::InvalidArgument("scene has no targets".into()));
        }
        for t in &self.targets {
            t.validate()?;
            if matches!(t.reflectivity, Reflectivity::Rcs(_)) && self.link_budget.is_none() {
                return Err(IsacError::InvalidTarget(
                    "RCS-specified target needs a link budget".into(),
                ));
            }
        }
        match self.noise {
            NoiseSpec::N0(n0) if !(n0.is_finite() && n0 > 0.0) => Err(IsacError::InvalidArgument(
                format!("N0 must be positive, got {n0}"),
            )),
            NoiseSpec::SnrDb(s) if !s.is_finite() => {
                Err(IsacError::InvalidArgument("SNR must be finite".into()))
            }
            _ => Ok(()),
        }
    }

    /// |α| for a target, through the link budget when it is RCS-specified.
    pub fn amplitude(&self, t: &Target) -> Result<f64> {
        match t.reflectivity {
            Reflectivity::Amplitude(a) => Ok(a),
            Reflectivity::Rcs(_) => {
                let lb = self.link_budget.as_ref().ok_or_else(|| {
                    IsacError::InvalidTarget("RCS-specified target needs a link budget".into())
                })?;
                amplitude_from_radar_equation(t, lb)
            }
        }
    }

    /// Complex noise variance σ² per observed RE.
    pub fn noise_variance(&self) -> Result<f64> {
        match self.noise {
            NoiseSpec::Noiseless => Ok(0.0),
            NoiseSpec::N0(n0) => Ok(n0),
            NoiseSpec::SnrDb(snr) => {
                let first = self
                    .targets
                    .first()
                    .ok_or_else(|| IsacError::InvalidArgument("scene has no targets".into()))?;
                let a = self.amplitude(first)?;
                Ok(a * a / db_to_linear(snr))
            }
        }
    }
}

/// τ = 2d/c and f_D = 2 v f_c / c.
pub fn delay_doppler(t: &Target, params: &OfdmParams) -> (f64, f64) {
    let tau = 2.0 * t.distance_m / SPEED_OF_LIGHT;
    let fd = 2.0 * t.velocity_mps * params.carrier_freq_hz() / SPEED_OF_LIGHT;
    (tau, fd)
}

/// A = sqrt(κ λ² G_T G_R P_T / ((4π)³ d⁴)).
pub fn amplitude_from_radar_equation(t: &Target, lb: &LinkBudget) -> Result<f64> {
    let rcs = match t.reflectivity {
        Reflectivity::Rcs(k) => k,
        Reflectivity::Amplitude(_) => {
            return Err(IsacError::InvalidTarget(
                "target has an explicit amplitude, not an RCS".into(),
            ))
        }
    };
    if !(t.distance_m.is_finite() && t.distance_m > 0.0) {
        return Err(IsacError::InvalidTarget(format!(
            "distance must be > 0, got {}",
            t.distance_m
        )));
    }
    let d2 = t.distance_m * t.distance_m;
    let power = rcs * lb.wavelength_m * lb.wavelength_m * lb.tx_gain * lb.rx_gain * lb.tx_power_w
        / ((4.0 * PI).powi(3) * d2 * d2);
    Ok(power.sqrt())
}

/// A delay or Doppler outside the unambiguous interval of the waveform.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AliasWarning {
    Delay { target: usize, delay_s: f64, max_s: f64 },
    Doppler { target: usize, doppler_hz: f64, max_hz: f64 },
}

impl std::fmt::Display for AliasWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            AliasWarning::Delay { target, delay_s, max_s } => write!(
                f,
                "target {target}: delay {delay_s:e} s exceeds the unambiguous {max_s:e} s"
            ),
            AliasWarning::Doppler {
                target,
                doppler_hz,
                max_hz,
            } => write!(
                f,
                "target {target}: Doppler {doppler_hz} Hz exceeds the unambiguous ±{max_hz} Hz"
            ),
        }
    }
}

/// Flags targets whose delay exceeds T or whose |Doppler| exceeds 1/(2 T_s).
pub fn check_aliasing(scene: &Scene, params: &OfdmParams) -> Vec<AliasWarning> {
    let mut out = Vec::new();
    for (i, t) in scene.targets.iter().enumerate() {
        let (tau, fd) = delay_doppler(t, params);
        if tau > params.max_delay_s() {
            out.push(AliasWarning::Delay {
                target: i,
                delay_s: tau,
                max_s: params.max_delay_s(),
            });
        }
        if fd.abs() > params.max_doppler_hz() {
            out.push(AliasWarning::Doppler {
                target: i,
                doppler_hz: fd,
                max_hz: params.max_doppler_hz(),
            });
        }
    }
    out
}
