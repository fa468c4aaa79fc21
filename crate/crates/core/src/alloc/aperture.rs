use rayon::prelude::*;
use serde::Serialize;

use super::pattern::{random_pinned_indices, ResourceAllocation};
use crate::error::{IsacError, Result};
use crate::rng::{derive_seed, rng_from_seed};

/// Difference set 𝒫 of an active index set, with ordered-pair counts per lag.
///
/// Lags span `-(N-1)..=N-1` and are stored densely; a lag with count zero is
/// a hole.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VirtualAperture {
    n_subcarriers: usize,
    indices: Vec<usize>,
    counts: Vec<u32>,
}

impl VirtualAperture {
    /// Build from a single ascending, duplicate-free index set.
    pub fn from_indices(indices: &[usize], n_subcarriers: usize) -> Result<Self> {
        if !indices.windows(2).all(|w| w[0] < w[1]) {
            return Err(IsacError::InvalidArgument(
                "indices must be strictly ascending".into(),
            ));
        }
        if indices.len() < 2 {
            return Err(IsacError::TooFewActive);
        }
        if let Some(&bad) = indices.iter().find(|&&i| i >= n_subcarriers) {
            return Err(IsacError::IndexOutOfRange {
                index: bad,
                n: n_subcarriers,
            });
        }
        let offset = n_subcarriers - 1;
        let mut counts = vec![0u32; 2 * n_subcarriers - 1];
        counts[offset] = indices.len() as u32;
        for (k, &hi) in indices.iter().enumerate() {
            for &lo in &indices[..k] {
                let s = hi - lo;
                counts[offset + s] += 1;
                counts[offset - s] += 1;
            }
        }
        Ok(Self {
            n_subcarriers,
            indices: indices.to_vec(),
            counts,
        })
    }

    pub fn n_subcarriers(&self) -> usize {
        self.n_subcarriers
    }

    /// |Ñ|, the number of physical subcarriers the aperture was built from.
    pub fn active(&self) -> usize {
        self.indices.len()
    }

    /// The physical index set Ñ.
    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    /// Position of `lag` in the dense count/value arrays.
    pub fn slot(&self, lag: i64) -> usize {
        (lag + self.n_subcarriers as i64 - 1) as usize
    }

    pub fn max_abs_lag(&self) -> usize {
        self.n_subcarriers - 1
    }

    /// c[s]; zero for holes and lags outside the range.
    pub fn count(&self, lag: i64) -> u32 {
        if lag.unsigned_abs() as usize >= self.n_subcarriers {
            return 0;
        }
        self.counts[self.slot(lag)]
    }

    /// Dense counts indexed by `slot(lag)`.
    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    fn lag_range(&self) -> impl Iterator<Item = i64> {
        let m = self.n_subcarriers as i64 - 1;
        -m..=m
    }

    /// 𝒫 in ascending order.
    pub fn lags(&self) -> Vec<i64> {
        self.lag_range().filter(|&s| self.count(s) > 0).collect()
    }

    /// Lags in `-(N-1)..=N-1` not produced by any pair.
    pub fn holes(&self) -> Vec<i64> {
        self.lag_range().filter(|&s| self.count(s) == 0).collect()
    }

    /// |𝒫|.
    pub fn len(&self) -> usize {
        self.counts.iter().filter(|&&c| c > 0).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Largest |s| in 𝒫.
    pub fn extent_lag(&self) -> usize {
        self.lag_range()
            .filter(|&s| s >= 0 && self.count(s) > 0)
            .max()
            .unwrap_or(0) as usize
    }

    /// (lag, pair_count) rows for every lag in 𝒫.
    pub fn rows(&self) -> impl Iterator<Item = (i64, u32)> + '_ {
        self.lag_range()
            .map(move |s| (s, self.count(s)))
            .filter(|&(_, c)| c > 0)
    }
}

/// 𝒫 = {n_i - n_j} of a symbol-constant allocation.
pub fn difference_set(alloc: &ResourceAllocation) -> Result<VirtualAperture> {
    let indices = alloc
        .common_indices()
        .ok_or(IsacError::NonConstantAllocation)?;
    VirtualAperture::from_indices(indices, alloc.n_subcarriers())
}

/// |𝒫| / (2N - 1).
pub fn coverage_fraction(ap: &VirtualAperture) -> f64 {
    ap.len() as f64 / (2 * ap.n_subcarriers() - 1) as f64
}

/// A Monte-Carlo probability estimate with its binomial 95% half-width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Probability {
    pub estimate: f64,
    pub half_width: f64,
    pub trials: usize,
}

impl Probability {
    fn from_counts(hits: usize, trials: usize) -> Self {
        let p = hits as f64 / trials as f64;
        Probability {
            estimate: p,
            half_width: 1.96 * (p * (1.0 - p) / trials as f64).sqrt(),
            trials,
        }
    }
}

/// Per-lag fill probabilities for random pinned-endpoint subsets.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FillProfile {
    pub n_subcarriers: usize,
    pub active: usize,
    /// Entry `d - 1` holds the probability for lag `d`, `d = 1..=N-1`.
    pub per_lag: Vec<Probability>,
    /// Probability that every lag 1..=N-1 is filled at once.
    pub all_filled: Probability,
}

impl FillProfile {
    pub fn lag(&self, d: usize) -> Probability {
        self.per_lag[d - 1]
    }

    /// Smallest per-lag estimate.
    pub fn min_lag_estimate(&self) -> f64 {
        self.per_lag
            .iter()
            .map(|p| p.estimate)
            .fold(f64::INFINITY, f64::min)
    }
}

fn check_fill_args(n: usize, n_active: usize, trials: usize) -> Result<()> {
    if n < 2 {
        return Err(IsacError::InvalidArgument(format!("N must be >= 2, got {n}")));
    }
    if n_active < 2 || n_active > n {
        return Err(IsacError::Cardinality {
            got: n_active,
            min: 2,
            max: n,
        });
    }
    if trials == 0 {
        return Err(IsacError::InvalidArgument("trial count must be >= 1".into()));
    }
    Ok(())
}

/// Positive lags 1..=N-1 present in one random draw.
fn filled_lags(n: usize, n_active: usize, seed: u64) -> Vec<bool> {
    let mut rng = rng_from_seed(seed);
    let set = random_pinned_indices(n, n_active, &mut rng).expect("arguments checked");
    let mut present = vec![false; n];
    for (k, &hi) in set.iter().enumerate() {
        for &lo in &set[..k] {
            present[hi - lo] = true;
        }
    }
    present
}

/// Monte-Carlo estimate of every lag's fill probability.
///
/// Trial `t` uses the seed `derive_seed(seed, t)`, so the result does not
/// depend on how trials are distributed over threads.
pub fn lag_fill_profile(n: usize, n_active: usize, trials: usize, seed: u64) -> Result<FillProfile> {
    check_fill_args(n, n_active, trials)?;
    let (hits, all) = (0..trials)
        .into_par_iter()
        .map(|t| {
            let present = filled_lags(n, n_active, derive_seed(seed, t as u64));
            let counts: Vec<u32> = present[1..].iter().map(|&b| b as u32).collect();
            let all = present[1..].iter().all(|&b| b) as usize;
            (counts, all)
        })
        .reduce(
            || (vec![0u32; n - 1], 0usize),
            |(mut a, x), (b, y)| {
                a.iter_mut().zip(b).for_each(|(a, b)| *a += b);
                (a, x + y)
            },
        );
    Ok(FillProfile {
        n_subcarriers: n,
        active: n_active,
        per_lag: hits
            .into_iter()
            .map(|h| Probability::from_counts(h as usize, trials))
            .collect(),
        all_filled: Probability::from_counts(all, trials),
    })
}

/// Probability that lag `lag` is filled by a random pinned-endpoint subset of
/// `n_active` out of `n` subcarriers.
pub fn hole_fill_probability(
    n: usize,
    n_active: usize,
    lag: usize,
    trials: usize,
    seed: u64,
) -> Result<Probability> {
    check_fill_args(n, n_active, trials)?;
    if lag < 1 || lag > n - 1 {
        return Err(IsacError::InvalidArgument(format!(
            "lag must lie in 1..={}, got {lag}",
            n - 1
        )));
    }
    let hits: usize = (0..trials)
        .into_par_iter()
        .map(|t| filled_lags(n, n_active, derive_seed(seed, t as u64))[lag] as usize)
        .sum();
    Ok(Probability::from_counts(hits, trials))
}
