//! Sparse time-frequency resource allocations and their difference-set
//! (virtual) apertures.

mod aperture;
mod params;
mod pattern;

pub use aperture::{
    coverage_fraction, difference_set, hole_fill_probability, lag_fill_profile, FillProfile,
    Probability, VirtualAperture,
};
pub use params::OfdmParams;
pub use pattern::{
    make_allocation, pattern_indices, random_pinned_indices, PatternLabel, PatternSpec,
    ResourceAllocation,
};
