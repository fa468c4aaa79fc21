//! Bounds, sidelobe metrics, ambiguity surfaces and Monte-Carlo harnesses.

mod ambiguity;
mod crlb;
mod detection;
mod pslr;
pub mod stats;
mod sweep;

pub use ambiguity::{ambiguity_function, default_grids, max_sidelobe, AmbiguityKind, AmbiguitySurface};
pub use crlb::{
    crlb_delay, crlb_delay_constant, crlb_report, crlb_vs_inverse_fim_check, fim_single_target,
    CrlbReport,
};
pub use detection::{
    detection_rates, detection_trial, resolves_all, DetectionConfig, DetectionSummary,
    DetectionTrial,
};
pub use pslr::{pslr, pslr_default};
pub use sweep::{
    match_to_truth, method_periodogram, monte_carlo_sweep, Method, SweepConfig, SweepResult,
    SweepRow,
};
