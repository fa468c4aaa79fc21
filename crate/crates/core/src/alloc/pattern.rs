use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::OfdmParams;
use crate::error::{IsacError, Result};
use crate::rng::rng_from_seed;

/// Family a [`ResourceAllocation`] was generated from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PatternLabel {
    Full,
    Contiguous,
    Comb,
    Random,
    Coprime,
    Nested,
    Custom,
}

impl PatternLabel {
    pub fn as_str(&self) -> &'static str {
        match self {
            PatternLabel::Full => "full",
            PatternLabel::Contiguous => "contiguous",
            PatternLabel::Comb => "comb",
            PatternLabel::Random => "random",
            PatternLabel::Coprime => "coprime",
            PatternLabel::Nested => "nested",
            PatternLabel::Custom => "custom",
        }
    }
}

impl std::fmt::Display for PatternLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Recipe for a sparse subcarrier pattern.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "pattern", rename_all = "snake_case", deny_unknown_fields)]
pub enum PatternSpec {
    /// Every subcarrier.
    Full,
    /// The first `active` subcarriers `{0..active-1}` (equivalent-bandwidth baseline).
    Contiguous { active: usize },
    /// `{0, step, 2·step, ...}`.
    Comb { step: usize },
    /// `active` subcarriers drawn uniformly, with 0 and N-1 always included.
    Random { active: usize },
    /// `{0, p, 2p, ...} ∪ {0, q, 2q, ...}` clipped to N-1, gcd(p, q) = 1.
    Coprime { p: usize, q: usize },
    /// Two-level nested set `{0..inner-1} ∪ {(inner+1)k - 1 : k = 1..outer}`.
    Nested { inner: usize, outer: usize },
    /// Explicit indices; sorted and deduplicated.
    Custom { indices: Vec<usize> },
}

impl PatternSpec {
    pub fn label(&self) -> PatternLabel {
        match self {
            PatternSpec::Full => PatternLabel::Full,
            PatternSpec::Contiguous { .. } => PatternLabel::Contiguous,
            PatternSpec::Comb { .. } => PatternLabel::Comb,
            PatternSpec::Random { .. } => PatternLabel::Random,
            PatternSpec::Coprime { .. } => PatternLabel::Coprime,
            PatternSpec::Nested { .. } => PatternLabel::Nested,
            PatternSpec::Custom { .. } => PatternLabel::Custom,
        }
    }

    /// Largest nested array that fits N subcarriers and spans 0..=N-1.
    ///
    /// Picks `outer` as the divisor of N closest to sqrt(N) so that the last
    /// outer element lands exactly on N-1.
    pub fn nested_for(n: usize) -> PatternSpec {
        let root = (n as f64).sqrt();
        let outer = (1..=n)
            .filter(|d| n % d == 0 && *d >= 2 && n / d >= 2)
            .min_by(|a, b| {
                let da = (*a as f64 - root).abs();
                let db = (*b as f64 - root).abs();
                da.partial_cmp(&db).unwrap().then(b.cmp(a))
            })
            .unwrap_or(1);
        let inner = (n / outer).saturating_sub(1).max(1);
        PatternSpec::Nested { inner, outer }
    }
}

/// Per-symbol active subcarrier sets 𝒩_m.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ResourceAllocation {
    n_subcarriers: usize,
    per_symbol: Vec<Vec<usize>>,
    label: PatternLabel,
}

impl ResourceAllocation {
    /// Same index set on every one of `n_symbols` symbols.
    pub fn uniform(
        n_subcarriers: usize,
        n_symbols: usize,
        indices: Vec<usize>,
        label: PatternLabel,
    ) -> Result<Self> {
        let set = normalize(indices, n_subcarriers)?;
        Ok(Self {
            n_subcarriers,
            per_symbol: vec![set; n_symbols],
            label,
        })
    }

    /// Arbitrary per-symbol sets; empty sets mark symbols not used for sensing.
    pub fn from_per_symbol(n_subcarriers: usize, per_symbol: Vec<Vec<usize>>) -> Result<Self> {
        if per_symbol.is_empty() {
            return Err(IsacError::InvalidArgument(
                "allocation needs at least one symbol".into(),
            ));
        }
        let per_symbol = per_symbol
            .into_iter()
            .map(|s| normalize(s, n_subcarriers))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            n_subcarriers,
            per_symbol,
            label: PatternLabel::Custom,
        })
    }

    pub fn n_subcarriers(&self) -> usize {
        self.n_subcarriers
    }

    pub fn n_symbols(&self) -> usize {
        self.per_symbol.len()
    }

    pub fn label(&self) -> PatternLabel {
        self.label
    }

    pub fn symbol(&self, m: usize) -> &[usize] {
        &self.per_symbol[m]
    }

    pub fn symbols(&self) -> impl Iterator<Item = &[usize]> {
        self.per_symbol.iter().map(|v| v.as_slice())
    }

    /// The shared index set when every symbol uses the same one.
    pub fn common_indices(&self) -> Option<&[usize]> {
        let first = &self.per_symbol[0];
        self.per_symbol
            .iter()
            .all(|s| s == first)
            .then_some(first.as_slice())
    }

    pub fn is_symbol_constant(&self) -> bool {
        self.common_indices().is_some()
    }

    /// Σ_m |𝒩_m|.
    pub fn total_active(&self) -> usize {
        self.per_symbol.iter().map(Vec::len).sum()
    }

    /// True when indices 0 and N-1 are active on every symbol.
    pub fn has_endpoints(&self) -> bool {
        let last = self.n_subcarriers - 1;
        self.per_symbol
            .iter()
            .all(|s| s.first() == Some(&0) && s.last() == Some(&last))
    }

    /// max - min + 1 over the union of all active indices, 0 when empty.
    pub fn extent(&self) -> usize {
        let lo = self.per_symbol.iter().filter_map(|s| s.first()).min();
        let hi = self.per_symbol.iter().filter_map(|s| s.last()).max();
        match (lo, hi) {
            (Some(lo), Some(hi)) => hi - lo + 1,
            _ => 0,
        }
    }

    /// Whether subcarrier `n` is active on symbol `m`.
    pub fn is_active(&self, m: usize, n: usize) -> bool {
        self.per_symbol[m].binary_search(&n).is_ok()
    }
}

fn normalize(mut indices: Vec<usize>, n: usize) -> Result<Vec<usize>> {
    if let Some(&bad) = indices.iter().find(|&&i| i >= n) {
        return Err(IsacError::IndexOutOfRange { index: bad, n });
    }
    indices.sort_unstable();
    indices.dedup();
    Ok(indices)
}

/// Draw `n_active` distinct indices from {0..n-1} with 0 and n-1 always present.
///
/// The remaining `n_active - 2` indices are sampled uniformly without
/// replacement from {1..n-2}. Output is ascending.
pub fn random_pinned_indices<R: Rng + ?Sized>(
    n: usize,
    n_active: usize,
    rng: &mut R,
) -> Result<Vec<usize>> {
    if n_active < 2 || n_active > n {
        return Err(IsacError::Cardinality {
            got: n_active,
            min: 2,
            max: n,
        });
    }
    let mut out = Vec::with_capacity(n_active);
    out.push(0);
    if n_active > 2 {
        out.extend(index::sample(rng, n - 2, n_active - 2).into_iter().map(|i| i + 1));
    }
    out.push(n - 1);
    out.sort_unstable();
    Ok(out)
}

fn gcd(mut a: usize, mut b: usize) -> usize {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Build the index set a pattern describes for `n` subcarriers.
pub fn pattern_indices(n: usize, pattern: &PatternSpec, seed: u64) -> Result<Vec<usize>> {
    let set = match pattern {
        PatternSpec::Full => (0..n).collect(),
        PatternSpec::Contiguous { active } => {
            check_cardinality(*active, n)?;
            (0..*active).collect()
        }
        PatternSpec::Comb { step } => {
            if *step == 0 {
                return Err(IsacError::InvalidPattern("comb step must be >= 1".into()));
            }
            (0..n).step_by(*step).collect()
        }
        PatternSpec::Random { active } => {
            let mut rng = rng_from_seed(seed);
            random_pinned_indices(n, *active, &mut rng)?
        }
        PatternSpec::Coprime { p, q } => {
            if *p == 0 || *q == 0 {
                return Err(IsacError::InvalidPattern(
                    "co-prime periods must be >= 1".into(),
                ));
            }
            if gcd(*p, *q) != 1 {
                return Err(IsacError::NotCoprime { p: *p, q: *q });
            }
            let mut v: Vec<usize> = (0..n).step_by(*p).chain((0..n).step_by(*q)).collect();
            v.sort_unstable();
            v.dedup();
            v
        }
        PatternSpec::Nested { inner, outer } => {
            if *inner == 0 || *outer == 0 {
                return Err(IsacError::InvalidPattern(
                    "nested inner and outer sizes must be >= 1".into(),
                ));
            }
            let max_index = (inner + 1) * outer - 1;
            if max_index > n - 1 {
                return Err(IsacError::PatternOverflow {
                    pattern: "nested",
                    max_index,
                    limit: n - 1,
                });
            }
            let mut v: Vec<usize> = (0..*inner)
                .chain((1..=*outer).map(|k| (inner + 1) * k - 1))
                .collect();
            v.sort_unstable();
            v.dedup();
            v
        }
        PatternSpec::Custom { indices } => normalize(indices.clone(), n)?,
    };
    check_cardinality(set.len(), n)?;
    Ok(set)
}

fn check_cardinality(k: usize, n: usize) -> Result<()> {
    if k < 2 || k > n {
        return Err(IsacError::Cardinality {
            got: k,
            min: 2,
            max: n,
        });
    }
    Ok(())
}

/// Generate an allocation that repeats one pattern on all M symbols.
pub fn make_allocation(
    params: &OfdmParams,
    pattern: &PatternSpec,
    seed: u64,
) -> Result<ResourceAllocation> {
    let n = params.n_subcarriers();
    let set = pattern_indices(n, pattern, seed)?;
    ResourceAllocation::uniform(n, params.n_symbols(), set, pattern.label())
}
