//! Delay and Doppler estimation from a received grid.

mod peaks;
mod periodogram;
mod virtual_signal;

pub use peaks::{detect_peaks, parabolic_offset, Peak, PeakList};
pub use periodogram::{
    doppler_periodogram, ml_single_target, zero_fill_periodogram, DelayEstimate, Periodogram,
    SpectrumKind,
};
pub use virtual_signal::{
    accumulate_cpi, autocorrelate_symbol, run_algorithm1, virtual_periodogram, VirtualSignal,
};
