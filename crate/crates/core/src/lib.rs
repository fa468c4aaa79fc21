//! Simulation and estimation toolkit for OFDM sensing with sparse
//! time-frequency resource allocation.
//!
//! The crate covers allocation patterns and their difference-set apertures
//! ([`alloc`]), targets and link budgets ([`scene`]), post-FFT received grids
//! ([`synth`]), delay/Doppler estimators ([`estimators`]) and bounds,
//! sidelobe metrics and Monte-Carlo sweeps ([`analysis`]).

pub mod alloc;
pub mod analysis;
pub mod error;
pub mod estimators;
pub mod export;
mod fft;
pub mod rng;
pub mod scene;
pub mod synth;

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

pub use alloc::{
    difference_set, make_allocation, OfdmParams, PatternLabel, PatternSpec, ResourceAllocation,
    VirtualAperture,
};
pub use error::{IsacError, Result};
pub use estimators::{
    detect_peaks, ml_single_target, run_algorithm1, virtual_periodogram, zero_fill_periodogram,
    Periodogram, PeakList, VirtualSignal,
};
pub use scene::{NoiseSpec, Scene, Target};
pub use synth::{synthesize, FreqGrid};
