use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::sweep::match_to_truth;
use crate::alloc::{random_pinned_indices, OfdmParams, PatternLabel, ResourceAllocation};
use crate::error::{IsacError, Result};
use crate::estimators::{detect_peaks, run_algorithm1, virtual_periodogram, zero_fill_periodogram, Periodogram};
use crate::rng::{derive_seed, rng_from_seed};
use crate::scene::{NoiseSpec, Scene, Target};
use crate::synth::synthesize;
use crate::SPEED_OF_LIGHT;

/// Multi-target detection experiment: direct sparse against virtual
/// periodograms on the same random allocations and noise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionConfig {
    pub params: OfdmParams,
    pub active: usize,
    pub targets: Vec<Target>,
    pub snr_db: f64,
    pub runs: usize,
    pub oversample: usize,
    /// A peak counts for a target within this range distance.
    pub tolerance_m: f64,
    pub seed: u64,
}

impl DetectionConfig {
    /// Desk scale, M = 128, two unit targets 145 m apart with a Doppler
    /// difference of 4 m/s, -10 dB per-RE SNR, tolerance of one range bin.
    pub fn desk_two_target(seed: u64) -> Self {
        let params = OfdmParams::desk().with_symbols(128).expect("valid");
        DetectionConfig {
            params,
            active: 64,
            targets: vec![
                Target::with_amplitude(200.0, 0.0, 1.0),
                Target::with_amplitude(345.0, 4.0, 1.0),
            ],
            snr_db: -10.0,
            runs: 100,
            oversample: 4,
            tolerance_m: params.range_bin_m(),
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.params.n_subcarriers();
        if self.active < 2 || self.active > n {
            return Err(IsacError::Cardinality {
                got: self.active,
                min: 2,
                max: n,
            });
        }
        if self.runs == 0 || self.oversample == 0 {
            return Err(IsacError::InvalidArgument(
                "runs and oversampling factor must be >= 1".into(),
            ));
        }
        if !(self.tolerance_m.is_finite() && self.tolerance_m > 0.0) {
            return Err(IsacError::InvalidArgument("tolerance must be > 0".into()));
        }
        Scene::new(self.targets.clone(), NoiseSpec::SnrDb(self.snr_db)).validate()
    }
}

/// Whether the strongest `truths_m.len()` peaks (separated by the
/// mainlobe halfwidth) land within `tolerance_m` of distinct targets.
pub fn resolves_all(p: &Periodogram, truths_m: &[f64], tolerance_m: f64) -> Result<bool> {
    let peaks = detect_peaks(p, truths_m.len(), p.mainlobe_halfwidth())?;
    if peaks.truncated {
        return Ok(false);
    }
    let est: Vec<f64> = peaks
        .peaks
        .iter()
        .map(|pk| pk.refined_axis_value * SPEED_OF_LIGHT / 2.0)
        .collect();
    let period_m = p.len() as f64 * p.bin_width() * SPEED_OF_LIGHT / 2.0;
    let (_, misses) = match_to_truth(&est, truths_m, tolerance_m, period_m);
    Ok(misses == 0)
}

/// Everything produced by one detection run.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectionTrial {
    pub indices: Vec<usize>,
    pub direct: Periodogram,
    pub virtual_: Periodogram,
    pub direct_ok: bool,
    pub virtual_ok: bool,
}

/// Run number `run` of the experiment.
pub fn detection_trial(cfg: &DetectionConfig, run: usize) -> Result<DetectionTrial> {
    let n = cfg.params.n_subcarriers();
    let mut rng = rng_from_seed(derive_seed(derive_seed(cfg.seed, 0), run as u64));
    let indices = random_pinned_indices(n, cfg.active, &mut rng)?;
    let alloc = ResourceAllocation::uniform(
        n,
        cfg.params.n_symbols(),
        indices.clone(),
        PatternLabel::Random,
    )?;
    let scene = Scene::new(cfg.targets.clone(), NoiseSpec::SnrDb(cfg.snr_db));
    let grid = synthesize(&scene, &alloc, &cfg.params, derive_seed(derive_seed(cfg.seed, 1), run as u64))?;
    let direct = zero_fill_periodogram(&grid, cfg.oversample)?;
    let (vs, _) = run_algorithm1(&grid)?;
    let virtual_ = virtual_periodogram(&vs, cfg.oversample)?;
    let truths: Vec<f64> = cfg.targets.iter().map(|t| t.distance_m).collect();
    Ok(DetectionTrial {
        direct_ok: resolves_all(&direct, &truths, cfg.tolerance_m)?,
        virtual_ok: resolves_all(&virtual_, &truths, cfg.tolerance_m)?,
        indices,
        direct,
        virtual_,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DetectionSummary {
    pub runs: usize,
    pub direct_successes: usize,
    pub virtual_successes: usize,
}

impl DetectionSummary {
    pub fn direct_rate(&self) -> f64 {
        self.direct_successes as f64 / self.runs as f64
    }

    pub fn virtual_rate(&self) -> f64 {
        self.virtual_successes as f64 / self.runs as f64
    }
}

/// Success counts over all runs.
pub fn detection_rates(cfg: &DetectionConfig) -> Result<DetectionSummary> {
    cfg.validate()?;
    let flags: Vec<(bool, bool)> = (0..cfg.runs)
        .into_par_iter()
        .map(|r| detection_trial(cfg, r).map(|t| (t.direct_ok, t.virtual_ok)))
        .collect::<Result<_>>()?;
    Ok(DetectionSummary {
        runs: cfg.runs,
        direct_successes: flags.iter().filter(|f| f.0).count(),
        virtual_successes: flags.iter().filter(|f| f.1).count(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::SpectrumKind;

    #[test]
    fn noiseless_targets_are_resolved() {
        let mut cfg = DetectionConfig::desk_two_target(3);
        cfg.params = OfdmParams::desk();
        cfg.snr_db = 60.0;
        cfg.runs = 4;
        let s = detection_rates(&cfg).unwrap();
        assert_eq!(s.virtual_successes, 4);
        assert_eq!(s.direct_successes, 4);
    }

    #[test]
    fn resolves_requires_every_target() {
        let c = SPEED_OF_LIGHT / 2.0;
        let axis: Vec<f64> = (0..100).map(|i| i as f64 / c).collect();
        let mut v = vec![0.0; 100];
        v[10] = 1.0;
        v[50] = 0.8;
        let p = Periodogram::from_parts(SpectrumKind::ZeroFill, axis, v, 1, 2).unwrap();
        assert!(resolves_all(&p, &[10.0, 50.0], 0.5).unwrap());
        assert!(!resolves_all(&p, &[10.0, 70.0], 0.5).unwrap());
        assert!(!resolves_all(&p, &[10.0, 50.0, 80.0], 0.5).unwrap());
    }
}
