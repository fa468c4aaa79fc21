//! Post-FFT received samples Y_m[n] on the allocated resource elements.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::alloc::{OfdmParams, ResourceAllocation};
use crate::error::{IsacError, Result};
use crate::rng::{rng_from_seed, SimRng};
use crate::scene::{check_aliasing, delay_doppler, AliasWarning, Scene};

/// One propagation path with every parameter resolved.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Path {
    pub amplitude: f64,
    pub phase_rad: f64,
    pub delay_s: f64,
    pub doppler_hz: f64,
}

impl Path {
    /// α e^{j2π f_D m T_s} e^{-j2π n Δf τ}.
    pub fn response(&self, m: usize, n: usize, params: &OfdmParams) -> Complex64 {
        let doppler_cycles = (self.doppler_hz * params.symbol_dur_s() * m as f64).rem_euclid(1.0);
        let delay_cycles = (n as f64 * params.subcarrier_spacing_hz() * self.delay_s).rem_euclid(1.0);
        Complex64::from_polar(
            self.amplitude,
            self.phase_rad + TAU * (doppler_cycles - delay_cycles),
        )
    }
}

/// Frequency-domain samples, M rows (symbols) by N columns (subcarriers).
///
/// Entries off the allocation are exactly zero.
#[derive(Debug, Clone, PartialEq)]
pub struct FreqGrid {
    params: OfdmParams,
    alloc: ResourceAllocation,
    samples: Vec<Complex64>,
    noise_variance: f64,
    warnings: Vec<AliasWarning>,
}

impl FreqGrid {
    /// All-zero grid on `alloc`.
    pub fn zeros(params: &OfdmParams, alloc: &ResourceAllocation) -> Result<Self> {
        check_consistent(params, alloc)?;
        Ok(Self {
            params: *params,
            alloc: alloc.clone(),
            samples: vec![Complex64::new(0.0, 0.0); params.n_symbols() * params.n_subcarriers()],
            noise_variance: 0.0,
            warnings: Vec::new(),
        })
    }

    /// Wrap externally produced samples (row-major, M × N).
    pub fn from_samples(
        params: &OfdmParams,
        alloc: &ResourceAllocation,
        samples: Vec<Complex64>,
    ) -> Result<Self> {
        check_consistent(params, alloc)?;
        let n = params.n_subcarriers();
        if samples.len() != params.n_symbols() * n {
            return Err(IsacError::InvalidArgument(format!(
                "expected {} samples, got {}",
                params.n_symbols() * n,
                samples.len()
            )));
        }
        for (k, y) in samples.iter().enumerate() {
            if *y != Complex64::new(0.0, 0.0) && !alloc.is_active(k / n, k % n) {
                return Err(IsacError::InvalidArgument(format!(
                    "non-zero sample on inactive RE (m = {}, n = {})",
                    k / n,
                    k % n
                )));
            }
        }
        Ok(Self {
            params: *params,
            alloc: alloc.clone(),
            samples,
            noise_variance: 0.0,
            warnings: Vec::new(),
        })
    }

    pub fn params(&self) -> &OfdmParams {
        &self.params
    }

    pub fn allocation(&self) -> &ResourceAllocation {
        &self.alloc
    }

    pub fn n_symbols(&self) -> usize {
        self.params.n_symbols()
    }

    pub fn n_subcarriers(&self) -> usize {
        self.params.n_subcarriers()
    }

    /// Samples of symbol `m`, all N subcarriers.
    pub fn row(&self, m: usize) -> &[Complex64] {
        let n = self.n_subcarriers();
        &self.samples[m * n..(m + 1) * n]
    }

    pub fn get(&self, m: usize, n: usize) -> Complex64 {
        self.samples[m * self.n_subcarriers() + n]
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    /// Injected complex noise variance per active RE (0 when noiseless).
    pub fn noise_variance(&self) -> f64 {
        self.noise_variance
    }

    /// Aliasing warnings raised while synthesizing.
    pub fn warnings(&self) -> &[AliasWarning] {
        &self.warnings
    }

    /// (m, n, Y) for every active RE in symbol-major, ascending order.
    pub fn active_samples(&self) -> impl Iterator<Item = (usize, usize, Complex64)> + '_ {
        (0..self.n_symbols()).flat_map(move |m| {
            self.alloc
                .symbol(m)
                .iter()
                .map(move |&n| (m, n, self.get(m, n)))
        })
    }

    /// Copy of this grid observed only on `alloc`, which must be a subset of
    /// the current allocation. Samples outside `alloc` become zero.
    pub fn restrict(&self, alloc: &ResourceAllocation) -> Result<FreqGrid> {
        check_consistent(&self.params, alloc)?;
        let n_sc = self.n_subcarriers();
        let mut samples = vec![Complex64::new(0.0, 0.0); self.samples.len()];
        for m in 0..self.n_symbols() {
            for &n in alloc.symbol(m) {
                if !self.alloc.is_active(m, n) {
                    return Err(IsacError::InvalidArgument(format!(
                        "RE (m = {m}, n = {n}) is not observed in the source grid"
                    )));
                }
                samples[m * n_sc + n] = self.samples[m * n_sc + n];
            }
        }
        Ok(FreqGrid {
            params: self.params,
            alloc: alloc.clone(),
            samples,
            noise_variance: self.noise_variance,
            warnings: self.warnings.clone(),
        })
    }

    /// Add the noiseless contribution of `path` on every active RE.
    pub fn add_path(&mut self, path: &Path) {
        let n_sc = self.n_subcarriers();
        for m in 0..self.n_symbols() {
            for &n in self.alloc.symbol(m) {
                self.samples[m * n_sc + n] += path.response(m, n, &self.params);
            }
        }
    }

    /// Add circularly-symmetric complex Gaussian noise of total variance
    /// `variance` on active REs only.
    pub fn add_noise<R: Rng + ?Sized>(&mut self, variance: f64, rng: &mut R) {
        if variance <= 0.0 {
            return;
        }
        let sd = (variance / 2.0).sqrt();
        let n_sc = self.n_subcarriers();
        for m in 0..self.n_symbols() {
            for &n in self.alloc.symbol(m) {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                self.samples[m * n_sc + n] += Complex64::new(sd * re, sd * im);
            }
        }
        self.noise_variance += variance;
    }
}

fn check_consistent(params: &OfdmParams, alloc: &ResourceAllocation) -> Result<()> {
    if alloc.n_subcarriers() != params.n_subcarriers() || alloc.n_symbols() != params.n_symbols() {
        return Err(IsacError::InvalidArgument(format!(
            "allocation is {} symbols × {} subcarriers but parameters say {} × {}",
            alloc.n_symbols(),
            alloc.n_subcarriers(),
            params.n_symbols(),
            params.n_subcarriers()
        )));
    }
    Ok(())
}

/// Resolve amplitudes, phases, delays and Dopplers of every target.
///
/// One uniform phase is drawn per target in order, whether or not the target
/// fixes its own phase, so the noise stream that follows does not depend on
/// which phases were given.
pub fn resolve_paths(scene: &Scene, params: &OfdmParams, rng: &mut SimRng) -> Result<Vec<Path>> {
    scene
        .targets
        .iter()
        .map(|t| {
            let drawn: f64 = rng.random::<f64>() * TAU;
            let (delay_s, doppler_hz) = delay_doppler(t, params);
            Ok(Path {
                amplitude: scene.amplitude(t)?,
                phase_rad: t.phase_rad.unwrap_or(drawn),
                delay_s,
                doppler_hz,
            })
        })
        .collect()
}

/// Noiseless grid for explicit paths.
pub fn signal_grid(paths: &[Path], alloc: &ResourceAllocation, params: &OfdmParams) -> Result<FreqGrid> {
    let mut g = FreqGrid::zeros(params, alloc)?;
    for p in paths {
        g.add_path(p);
    }
    Ok(g)
}

/// Received grid for `scene` on `alloc`; deterministic for a given seed.
pub fn synthesize(
    scene: &Scene,
    alloc: &ResourceAllocation,
    params: &OfdmParams,
    seed: u64,
) -> Result<FreqGrid> {
    scene.validate()?;
    let mut rng = rng_from_seed(seed);
    let paths = resolve_paths(scene, params, &mut rng)?;
    let mut g = signal_grid(&paths, alloc, params)?;
    g.warnings = check_aliasing(scene, params);
    for w in &g.warnings {
        log::warn!("{w}");
    }
    g.add_noise(scene.noise_variance()?, &mut rng);
    Ok(g)
}

/// Empirical SNR in dB over active REs: mean |clean|² / mean |noisy - clean|².
///
/// Returns `f64::INFINITY` when the two grids are identical.
pub fn measure_snr(noisy: &FreqGrid, clean: &FreqGrid) -> Result<f64> {
    if noisy.alloc != clean.alloc || noisy.params != clean.params {
        return Err(IsacError::InvalidArgument(
            "grids do not share parameters and allocation".into(),
        ));
    }
    let (mut sig, mut noise) = (0.0, 0.0);
    for ((_, _, y), (_, _, s)) in noisy.active_samples().zip(clean.active_samples()) {
        sig += s.norm_sqr();
        noise += (y - s).norm_sqr();
    }
    if noise == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (sig / noise).log10())
}
