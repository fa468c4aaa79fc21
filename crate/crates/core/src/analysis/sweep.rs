use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::pslr::pslr_default;
use super::stats::{rmse_with_ci, Summary};
use crate::alloc::{make_allocation, random_pinned_indices, OfdmParams, PatternLabel, PatternSpec, ResourceAllocation};
use crate::error::{IsacError, Result};
use crate::estimators::{detect_peaks, run_algorithm1, virtual_periodogram, zero_fill_periodogram, Periodogram};
use crate::rng::{derive_seed, rng_from_seed, trial_stream};
use crate::scene::{LinkBudget, NoiseSpec, Scene, Target};
use crate::synth::{synthesize, FreqGrid};
use crate::SPEED_OF_LIGHT;

/// Estimation method compared in a sweep. Variants are declared in
/// name order so that sorting by value sorts by tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Random sparse set, virtual aperture periodogram.
    Autocorrelation,
    /// Random sparse set, zero-fill periodogram.
    DirectSparse,
    /// Contiguous block {0..N_a-1}, zero-fill periodogram.
    EquivalentBandwidth,
    /// Every subcarrier, zero-fill periodogram.
    FullBandwidth,
    /// Nested pattern sized for N, virtual aperture periodogram.
    Nested,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::Autocorrelation,
        Method::DirectSparse,
        Method::EquivalentBandwidth,
        Method::FullBandwidth,
        Method::Nested,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Autocorrelation => "autocorrelation",
            Method::DirectSparse => "direct_sparse",
            Method::EquivalentBandwidth => "equivalent_bandwidth",
            Method::FullBandwidth => "full_bandwidth",
            Method::Nested => "nested",
        }
    }

    /// Whether the method goes through the virtual aperture.
    pub fn is_virtual(&self) -> bool {
        matches!(self, Method::Autocorrelation | Method::Nested)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = IsacError;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| IsacError::UnknownMethod(s.to_string()))
    }
}

/// Delay periodogram of `grid` for a method: virtual for the
/// autocorrelation-based methods, zero-fill otherwise.
pub fn method_periodogram(method: Method, grid: &FreqGrid, oversample: usize) -> Result<Periodogram> {
    if method.is_virtual() {
        let (vs, _) = run_algorithm1(grid)?;
        virtual_periodogram(&vs, oversample)
    } else {
        zero_fill_periodogram(grid, oversample)
    }
}

/// Settings of an RMSE/PSLR-versus-SNR sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub params: OfdmParams,
    /// N_a for the random and contiguous patterns.
    pub active: usize,
    pub methods: Vec<Method>,
    pub snr_db: Vec<f64>,
    pub trials: usize,
    pub targets: Vec<Target>,
    pub link_budget: Option<LinkBudget>,
    /// Each trial moves every target by U(-j, j) metres.
    pub range_jitter_m: f64,
    pub oversample: usize,
    /// Estimates further than this many native range bins from every
    /// unmatched target count as misses.
    pub miss_threshold_bins: f64,
    pub seed: u64,
}

impl SweepConfig {
    /// Desk-scale defaults: one unit target near 150 m, N_a = 64, 4x
    /// oversampling, one range bin of jitter, 500 trials.
    pub fn desk(methods: Vec<Method>, snr_db: Vec<f64>, seed: u64) -> Self {
        let params = OfdmParams::desk();
        SweepConfig {
            params,
            active: 64,
            methods,
            snr_db,
            trials: 500,
            targets: vec![Target::with_amplitude(150.0, 0.0, 1.0)],
            link_budget: None,
            range_jitter_m: params.range_bin_m(),
            oversample: 4,
            miss_threshold_bins: 10.0,
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
        if self.methods.is_empty() {
            return Err(IsacError::InvalidArgument("no methods selected".into()));
        }
        if self.snr_db.is_empty() || !self.snr_db.iter().all(|s| s.is_finite()) {
            return Err(IsacError::InvalidArgument(
                "SNR axis must be non-empty and finite".into(),
            ));
        }
        if self.trials == 0 {
            return Err(IsacError::InvalidArgument("trial count must be >= 1".into()));
        }
        if self.oversample == 0 {
            return Err(IsacError::InvalidArgument("oversampling factor must be >= 1".into()));
        }
        if !(self.range_jitter_m.is_finite() && self.range_jitter_m >= 0.0) {
            return Err(IsacError::InvalidArgument("range jitter must be >= 0".into()));
        }
        if !(self.miss_threshold_bins.is_finite() && self.miss_threshold_bins > 0.0) {
            return Err(IsacError::InvalidArgument("miss threshold must be > 0".into()));
        }
        let mut scene = Scene::new(self.targets.clone(), NoiseSpec::SnrDb(0.0));
        scene.link_budget = self.link_budget;
        scene.validate()?;
        for t in &self.targets {
            if t.distance_m <= self.range_jitter_m {
                return Err(IsacError::InvalidTarget(format!(
                    "distance {} m does not leave room for {} m of jitter",
                    t.distance_m, self.range_jitter_m
                )));
            }
        }
        Ok(())
    }
}

/// One (SNR, method) cell of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub snr_db: f64,
    pub method: Method,
    pub rmse_m: f64,
    pub rmse_ci_m: f64,
    pub pslr_db: f64,
    pub pslr_ci_db: f64,
    pub pslr_median_db: f64,
    pub miss_rate: f64,
    pub trials: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub snr_axis_db: Vec<f64>,
    pub seed: u64,
    pub trials: usize,
    /// Sorted by SNR, then by method tag.
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    pub fn row(&self, snr_db: f64, method: Method) -> Option<&SweepRow> {
        self.rows
            .iter()
            .find(|r| r.snr_db == snr_db && r.method == method)
    }
}

/// Per-method outcome of one trial.
#[derive(Debug, Clone, Default)]
struct Outcome {
    errors_m: Vec<f64>,
    misses: usize,
    pslr_db: Option<f64>,
}

/// Signed difference folded into [-period/2, period/2).
fn wrapped(diff: f64, period: f64) -> f64 {
    (diff + 0.5 * period).rem_euclid(period) - 0.5 * period
}

/// Greedy nearest-truth assignment of range estimates.
///
/// Returns the errors of matched pairs (in truth order) and the number of
/// unmatched truths. Pairs further apart than `threshold_m` never match.
pub fn match_to_truth(
    estimates_m: &[f64],
    truths_m: &[f64],
    threshold_m: f64,
    period_m: f64,
) -> (Vec<f64>, usize) {
    let mut pairs: Vec<(f64, usize, usize, f64)> = Vec::new();
    for (ti, &t) in truths_m.iter().enumerate() {
        for (ei, &e) in estimates_m.iter().enumerate() {
            let err = wrapped(e - t, period_m);
            if err.abs() <= threshold_m {
                pairs.push((err.abs(), ti, ei, err));
            }
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut truth_err: Vec<Option<f64>> = vec![None; truths_m.len()];
    let mut used = vec![false; estimates_m.len()];
    for (_, ti, ei, err) in pairs {
        if truth_err[ti].is_none() && !used[ei] {
            truth_err[ti] = Some(err);
            used[ei] = true;
        }
    }
    let misses = truth_err.iter().filter(|e| e.is_none()).count();
    (truth_err.into_iter().flatten().collect(), misses)
}

struct Fixed {
    full: ResourceAllocation,
    equivalent: ResourceAllocation,
    nested: Option<ResourceAllocation>,
}

fn estimate(
    method: Method,
    grid: &FreqGrid,
    cfg: &SweepConfig,
    truths_m: &[f64],
) -> Result<Outcome> {
    let p = method_periodogram(method, grid, cfg.oversample)?;
    let peaks = detect_peaks(&p, truths_m.len(), p.mainlobe_halfwidth())?;
    let estimates: Vec<f64> = peaks
        .peaks
        .iter()
        .map(|pk| pk.refined_axis_value * SPEED_OF_LIGHT / 2.0)
        .collect();
    let period_m = cfg.params.max_delay_s() * SPEED_OF_LIGHT / 2.0;
    let threshold_m = cfg.miss_threshold_bins * cfg.params.range_bin_m();
    let (errors_m, misses) = match_to_truth(&estimates, truths_m, threshold_m, period_m);
    Ok(Outcome {
        errors_m,
        misses,
        pslr_db: pslr_default(&p).ok(),
    })
}

fn run_trial(cfg: &SweepConfig, fixed: &Fixed, point: usize, trial: usize) -> Result<Vec<Outcome>> {
    let n = cfg.params.n_subcarriers();
    let m = cfg.params.n_symbols();

    // allocation and jitter depend on the trial only, so every SNR point
    // sees the same geometry
    let mut geo = rng_from_seed(derive_seed(derive_seed(cfg.seed, 0), trial as u64));
    let random = ResourceAllocation::uniform(
        n,
        m,
        random_pinned_indices(n, cfg.active, &mut geo)?,
        PatternLabel::Random,
    )?;
    let targets: Vec<Target> = cfg
        .targets
        .iter()
        .map(|t| {
            let mut t = *t;
            if cfg.range_jitter_m > 0.0 {
                t.distance_m += geo.random_range(-cfg.range_jitter_m..cfg.range_jitter_m);
            }
            t
        })
        .collect();
    let truths_m: Vec<f64> = targets.iter().map(|t| t.distance_m).collect();

    let mut scene = Scene::new(targets, NoiseSpec::SnrDb(cfg.snr_db[point]));
    scene.link_budget = cfg.link_budget;
    let noise_seed = derive_seed(derive_seed(cfg.seed, 1), trial_stream(point, trial));
    let full = synthesize(&scene, &fixed.full, &cfg.params, noise_seed)?;

    cfg.methods
        .iter()
        .map(|&method| {
            let alloc = match method {
                Method::Autocorrelation | Method::DirectSparse => &random,
                Method::EquivalentBandwidth => &fixed.equivalent,
                Method::FullBandwidth => &fixed.full,
                Method::Nested => fixed.nested.as_ref().expect("built when requested"),
            };
            estimate(method, &full.restrict(alloc)?, cfg, &truths_m)
        })
        .collect()
}

/// RMSE and PSLR of every configured method at every SNR point.
///
/// Methods share the noise realization of each trial: one full-band grid is
/// synthesized and each method observes its own subset of it. Results do not
/// depend on the number of worker threads.
pub fn monte_carlo_sweep(cfg: &SweepConfig) -> Result<SweepResult> {
    cfg.validate()?;
    let methods: Vec<Method> = cfg.methods.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
    let cfg = &SweepConfig {
        methods,
        ..cfg.clone()
    };
    let fixed = Fixed {
        full: make_allocation(&cfg.params, &PatternSpec::Full, 0)?,
        equivalent: make_allocation(&cfg.params, &PatternSpec::Contiguous { active: cfg.active }, 0)?,
        nested: if cfg.methods.contains(&Method::Nested) {
            Some(make_allocation(
                &cfg.params,
                &PatternSpec::nested_for(cfg.params.n_subcarriers()),
                0,
            )?)
        } else {
            None
        },
    };

    let points = cfg.snr_db.len();
    let outcomes: Vec<Vec<Outcome>> = (0..points * cfg.trials)
        .into_par_iter()
        .map(|k| run_trial(cfg, &fixed, k / cfg.trials, k % cfg.trials))
        .collect::<Result<_>>()?;

    let n_targets = cfg.targets.len();
    let mut order: Vec<usize> = (0..points).collect();
    order.sort_by(|&a, &b| cfg.snr_db[a].total_cmp(&cfg.snr_db[b]));
    let mut rows = Vec::with_capacity(points * cfg.methods.len());
    for p in order {
        let trials = &outcomes[p * cfg.trials..(p + 1) * cfg.trials];
        for (mi, &method) in cfg.methods.iter().enumerate() {
            let errors: Vec<f64> = trials.iter().flat_map(|t| t[mi].errors_m.iter().copied()).collect();
            let misses: usize = trials.iter().map(|t| t[mi].misses).sum();
            let pslrs: Vec<f64> = trials.iter().filter_map(|t| t[mi].pslr_db).collect();
            let (rmse_m, rmse_ci_m) = rmse_with_ci(&errors);
            let ps = Summary::of(&pslrs);
            rows.push(SweepRow {
                snr_db: cfg.snr_db[p],
                method,
                rmse_m,
                rmse_ci_m,
                pslr_db: ps.mean,
                pslr_ci_db: ps.half_width,
                pslr_median_db: ps.median,
                miss_rate: misses as f64 / (cfg.trials * n_targets) as f64,
                trials: cfg.trials,
            });
        }
    }
    let mut snr_axis_db = cfg.snr_db.clone();
    snr_axis_db.sort_by(f64::total_cmp);
    Ok(SweepResult {
        snr_axis_db,
        seed: cfg.seed,
        trials: cfg.trials,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn method_tags_round_trip_and_sort_by_name() {
        for m in Method::ALL {
            assert_eq!(m.as_str().parse::<Method>().unwrap(), m);
        }
        let mut names: Vec<&str> = Method::ALL.iter().map(Method::as_str).collect();
        names.sort();
        assert_eq!(names, Method::ALL.iter().map(Method::as_str).collect::<Vec<_>>());
        assert!(matches!("music".parse::<Method>(), Err(IsacError::UnknownMethod(_))));
    }

    #[test]
    fn matching_is_nearest_and_exclusive() {
        let (errs, misses) = match_to_truth(&[101.0, 99.5], &[100.0, 300.0], 5.0, 1000.0);
        assert_eq!(errs, vec![-0.5]);
        assert_eq!(misses, 1);
        let (errs, misses) = match_to_truth(&[998.0], &[1.0], 5.0, 1000.0);
        assert_eq!(errs, vec![-3.0]);
        assert_eq!(misses, 0);
    }

    fn small(methods: Vec<Method>) -> SweepConfig {
        let mut cfg = SweepConfig::desk(methods, vec![0.0, 10.0], 7);
        cfg.params = OfdmParams::new(64, 4, 120e3, 24e9, 0.0).unwrap();
        cfg.active = 16;
        cfg.trials = 12;
        cfg.range_jitter_m = cfg.params.range_bin_m();
        cfg.targets = vec![Target::with_amplitude(200.0, 0.0, 1.0)];
        cfg
    }

    #[test]
    fn noiseless_on_grid_target_has_zero_error() {
        let mut cfg = small(Method::ALL.to_vec());
        cfg.range_jitter_m = 0.0;
        cfg.snr_db = vec![300.0];
        // exactly 8 native range bins out
        cfg.targets = vec![Target::with_amplitude(8.0 * cfg.params.range_bin_m(), 0.0, 1.0)];
        let r = monte_carlo_sweep(&cfg).unwrap();
        for row in &r.rows {
            assert!(row.rmse_m < 1e-6, "{} rmse {}", row.method, row.rmse_m);
            assert_eq!(row.miss_rate, 0.0);
        }
    }

    #[test]
    fn deterministic_and_sorted() {
        let cfg = small(vec![Method::FullBandwidth, Method::Autocorrelation, Method::DirectSparse]);
        let a = monte_carlo_sweep(&cfg).unwrap();
        let b = monte_carlo_sweep(&cfg).unwrap();
        assert_eq!(a, b);
        let keys: Vec<(f64, Method)> = a.rows.iter().map(|r| (r.snr_db, r.method)).collect();
        let mut sorted = keys.clone();
        sorted.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
        assert_eq!(keys, sorted);
        assert_eq!(a.rows.len(), 6);
    }

    #[test]
    fn validation_catches_bad_configs() {
        let mut cfg = small(vec![Method::Nested]);
        cfg.active = 65;
        assert!(monte_carlo_sweep(&cfg).is_err());
        let mut cfg = small(vec![]);
        cfg.active = 8;
        assert!(cfg.validate().is_err());
        let mut cfg = small(vec![Method::FullBandwidth]);
        cfg.targets[0].distance_m = 0.1;
        assert!(cfg.validate().is_err());
    }
}
