//! CSV writers for the result types.
//!
//! Each writer takes optional `# `-prefixed comment lines that are emitted
//! before the header row. Floats are written with Rust's shortest
//! round-trip formatting, so identical values always give identical bytes.

use std::io::Write;

use crate::alloc::{FillProfile, VirtualAperture};
use crate::analysis::{AmbiguitySurface, CrlbReport, DetectionSummary, SweepResult};
use crate::error::Result;
use crate::estimators::{PeakList, Periodogram};
use crate::synth::FreqGrid;
use crate::SPEED_OF_LIGHT;

fn comments<W: Write>(w: &mut W, lines: &[String]) -> Result<()> {
    for l in lines {
        writeln!(w, "# {l}")?;
    }
    Ok(())
}

/// Shortest round-trip text, switching to exponent form outside [1e-4, 1e15).
fn num(x: f64) -> String {
    let a = x.abs();
    if a != 0.0 && a.is_finite() && !(1e-4..1e15).contains(&a) {
        format!("{x:e}")
    } else {
        x.to_string()
    }
}

fn csv_writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().has_headers(false).from_writer(w)
}

/// `lag,pair_count` for every lag in 𝒫.
pub fn write_aperture<W: Write>(mut w: W, ap: &VirtualAperture, notes: &[String]) -> Result<()> {
    comments(&mut w, notes)?;
    let mut c = csv_writer(w);
    c.write_record(["lag", "pair_count"])?;
    for (s, n) in ap.rows() {
        c.write_record([s.to_string(), n.to_string()])?;
    }
    c.flush()?;
    Ok(())
}

/// `axis_value,magnitude`.
pub fn write_periodogram<W: Write>(mut w: W, p: &Periodogram, notes: &[String]) -> Result<()> {
    comments(&mut w, notes)?;
    let mut c = csv_writer(w);
    c.write_record(["axis_value", "magnitude"])?;
    for (a, v) in p.axis().iter().zip(p.values()) {
        c.write_record([num(*a), num(*v)])?;
    }
    c.flush()?;
    Ok(())
}

/// `rank,delay_s,range_m,magnitude`, using refined delays.
pub fn write_peaks<W: Write>(mut w: W, peaks: &PeakList, notes: &[String]) -> Result<()> {
    comments(&mut w, notes)?;
    let mut c = csv_writer(w);
    c.write_record(["rank", "delay_s", "range_m", "magnitude"])?;
    for (rank, pk) in peaks.peaks.iter().enumerate() {
        let tau = pk.refined_axis_value;
        c.write_record([
            (rank + 1).to_string(),
            num(tau),
            num(tau * SPEED_OF_LIGHT / 2.0),
            num(pk.magnitude),
        ])?;
    }
    c.flush()?;
    Ok(())
}

/// `m,n,re,im` for active resource elements only.
pub fn write_grid<W: Write>(mut w: W, g: &FreqGrid, notes: &[String]) -> Result<()> {
    comments(&mut w, notes)?;
    let mut c = csv_writer(w);
    c.write_record(["m", "n", "re", "im"])?;
    for (m, n, y) in g.active_samples() {
        c.write_record([m.to_string(), n.to_string(), num(y.re), num(y.im)])?;
    }
    c.flush()?;
    Ok(())
}

/// `snr_db,method,rmse_m,rmse_ci,pslr_db,pslr_ci,miss_rate,trials`.
pub fn write_sweep<W: Write>(mut w: W, r: &SweepResult, notes: &[String]) -> Result<()> {
    comments(&mut w, notes)?;
    let mut c = csv_writer(w);
    c.write_record([
        "snr_db", "method", "rmse_m", "rmse_ci", "pslr_db", "pslr_ci", "miss_rate", "trials",
    ])?;
    for row in &r.rows {
        c.write_record([
            num(row.snr_db),
            row.method.to_string(),
            num(row.rmse_m),
            num(row.rmse_ci_m),
            num(row.pslr_db),
            num(row.pslr_ci_db),
            num(row.miss_rate),
            row.trials.to_string(),
        ])?;
    }
    c.flush()?;
    Ok(())
}

/// One row per report, keyed by a caller-chosen name.
pub fn write_crlb<W: Write>(mut w: W, reports: &[(String, CrlbReport)], notes: &[String]) -> Result<()> {
    comments(&mut w, notes)?;
    let mut c = csv_writer(w);
    c.write_record([
        "name",
        "pattern",
        "active_per_symbol",
        "total_active",
        "n_symbols",
        "amplitude",
        "n0",
        "crlb_delay_s2",
        "crlb_range_m2",
        "rmse_bound_m",
    ])?;
    for (name, r) in reports {
        c.write_record([
            name.clone(),
            r.pattern.to_string(),
            r.active_per_symbol.map(|a| a.to_string()).unwrap_or_default(),
            r.total_active.to_string(),
            r.n_symbols.to_string(),
            num(r.amplitude),
            num(r.n0),
            num(r.crlb_delay_s2),
            num(r.crlb_range_m2),
            num(r.rmse_bound_m),
        ])?;
    }
    c.flush()?;
    Ok(())
}

/// `doppler_hz,delay_s,magnitude`, Doppler-major.
pub fn write_ambiguity<W: Write>(mut w: W, s: &AmbiguitySurface, notes: &[String]) -> Result<()> {
    comments(&mut w, notes)?;
    let mut c = csv_writer(w);
    c.write_record(["doppler_hz", "delay_s", "magnitude"])?;
    for (j, fd) in s.doppler_axis_hz.iter().enumerate() {
        for (i, tau) in s.delay_axis_s.iter().enumerate() {
            c.write_record([num(*fd), num(*tau), num(s.get(j, i))])?;
        }
    }
    c.flush()?;
    Ok(())
}

/// One row per profile:
/// `active,min_lag_probability,min_lag_half_width,all_lags_probability,all_lags_half_width,trials`.
///
/// The min-lag columns come from the lag with the smallest estimate.
pub fn write_fill_summary<W: Write>(mut w: W, profiles: &[FillProfile], notes: &[String]) -> Result<()> {
    comments(&mut w, notes)?;
    let mut c = csv_writer(w);
    c.write_record([
        "active",
        "min_lag_probability",
        "min_lag_half_width",
        "all_lags_probability",
        "all_lags_half_width",
        "trials",
    ])?;
    for p in profiles {
        let worst = p
            .per_lag
            .iter()
            .min_by(|a, b| a.estimate.total_cmp(&b.estimate))
            .copied()
            .unwrap_or(p.all_filled);
        c.write_record([
            p.active.to_string(),
            num(worst.estimate),
            num(worst.half_width),
            num(p.all_filled.estimate),
            num(p.all_filled.half_width),
            p.all_filled.trials.to_string(),
        ])?;
    }
    c.flush()?;
    Ok(())
}

/// `active,lag,probability,half_width` for every profile and lag.
pub fn write_fill_lags<W: Write>(mut w: W, profiles: &[FillProfile], notes: &[String]) -> Result<()> {
    comments(&mut w, notes)?;
    let mut c = csv_writer(w);
    c.write_record(["active", "lag", "probability", "half_width"])?;
    for p in profiles {
        for (i, q) in p.per_lag.iter().enumerate() {
            c.write_record([
                p.active.to_string(),
                (i + 1).to_string(),
                num(q.estimate),
                num(q.half_width),
            ])?;
        }
    }
    c.flush()?;
    Ok(())
}

/// `runs,direct_successes,virtual_successes,direct_rate,virtual_rate`.
pub fn write_detection<W: Write>(mut w: W, s: &DetectionSummary, notes: &[String]) -> Result<()> {
    comments(&mut w, notes)?;
    let mut c = csv_writer(w);
    c.write_record(["runs", "direct_successes", "virtual_successes", "direct_rate", "virtual_rate"])?;
    c.write_record([
        s.runs.to_string(),
        s.direct_successes.to_string(),
        s.virtual_successes.to_string(),
        num(s.direct_rate()),
        num(s.virtual_rate()),
    ])?;
    c.flush()?;
    Ok(())
}
