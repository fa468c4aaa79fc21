//! Executes a resolved plan and writes its artifacts.
//!
//! Every output is rendered into memory first; files are only written once
//! the whole experiment has succeeded.

use std::path::{Path, PathBuf};

use serde::Serialize;

use isac_core::alloc::{difference_set, lag_fill_profile, make_allocation, FillProfile};
use isac_core::analysis::{
    ambiguity_function, crlb_report, default_grids, detection_rates, detection_trial, monte_carlo_sweep,
    AmbiguityKind, CrlbReport,
};
use isac_core::estimators::detect_peaks;
use isac_core::export;
use isac_core::rng::derive_seed;
use isac_core::IsacError;

use crate::config::{ConfigFile, Plan, Resolved};

pub const TOOL: &str = "isac";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

const SNR_NOTE: &str =
    "snr convention: per active resource element, noise variance = A1^2 / snr_linear with A1 the first target amplitude";

/// A named file body.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Artifact {
    pub name: String,
    pub bytes: Vec<u8>,
}

#[derive(Debug, Serialize)]
struct Seeds {
    master: u64,
    derivation: &'static str,
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    config: &'a ConfigFile,
    seeds: Seeds,
    outputs: Vec<&'a str>,
}

#[derive(Debug, Serialize)]
struct NamedReport<'a> {
    name: &'a str,
    #[serde(flatten)]
    report: &'a CrlbReport,
}

fn csv<F>(name: &str, f: F) -> Result<Artifact, IsacError>
where
    F: FnOnce(&mut Vec<u8>) -> Result<(), IsacError>,
{
    let mut bytes = Vec::new();
    f(&mut bytes)?;
    Ok(Artifact {
        name: name.to_string(),
        bytes,
    })
}

fn json<T: Serialize>(name: &str, v: &T) -> Artifact {
    let mut bytes = serde_json::to_vec_pretty(v).expect("plain data serializes");
    bytes.push(b'\n');
    Artifact {
        name: name.to_string(),
        bytes,
    }
}

fn notes(r: &Resolved, extra: &[&str]) -> Vec<String> {
    let mut v = vec![
        format!("{TOOL} {VERSION}"),
        format!("experiment = {}", r.config.experiment),
        format!("seed = {}", r.seed),
    ];
    v.extend(extra.iter().map(|s| s.to_string()));
    v
}

/// Run the plan and render every artifact, manifest last.
pub fn execute(r: &Resolved) -> Result<Vec<Artifact>, IsacError> {
    let mut out = match &r.plan {
        Plan::Crlb {
            params,
            patterns,
            amplitude,
            n0,
        } => {
            let reports = patterns
                .iter()
                .map(|(name, spec)| {
                    let alloc = make_allocation(params, spec, r.seed)?;
                    Ok((name.clone(), crlb_report(&alloc, params, *amplitude, *n0)?))
                })
                .collect::<Result<Vec<_>, IsacError>>()?;
            let named: Vec<NamedReport> = reports
                .iter()
                .map(|(name, report)| NamedReport { name, report })
                .collect();
            let n = notes(r, &["bound on delay for one target, phase unknown"]);
            vec![
                csv("crlb.csv", |w| export::write_crlb(w, &reports, &n))?,
                json("crlb.json", &named),
            ]
        }
        Plan::Holes {
            n_subcarriers,
            active,
            trials,
        } => {
            let profiles = active
                .iter()
                .map(|&a| lag_fill_profile(*n_subcarriers, a, *trials, derive_seed(r.seed, a as u64)))
                .collect::<Result<Vec<FillProfile>, _>>()?;
            let n = notes(r, &["random subsets with both band edges pinned"]);
            vec![
                csv("hole_probability.csv", |w| export::write_fill_summary(w, &profiles, &n))?,
                csv("hole_probability_lags.csv", |w| export::write_fill_lags(w, &profiles, &n))?,
            ]
        }
        Plan::Ambiguity {
            params,
            allocation,
            delay_points,
            doppler_points,
        } => {
            let alloc = make_allocation(params, allocation, r.seed)?;
            let (delays, dopplers) = default_grids(params, *delay_points, *doppler_points);
            let direct = ambiguity_function(&alloc, params, AmbiguityKind::Direct, &delays, &dopplers)?;
            let virt = ambiguity_function(&alloc, params, AmbiguityKind::Virtual, &delays, &dopplers)?;
            let ap = difference_set(&alloc)?;
            let n = notes(r, &["normalized to 1 at zero delay and zero Doppler"]);
            vec![
                csv("ambiguity_direct.csv", |w| export::write_ambiguity(w, &direct, &n))?,
                csv("ambiguity_virtual.csv", |w| export::write_ambiguity(w, &virt, &n))?,
                csv("aperture.csv", |w| export::write_aperture(w, &ap, &n))?,
            ]
        }
        Plan::Demo(cfg) => {
            let summary = detection_rates(cfg)?;
            let first = detection_trial(cfg, 0)?;
            let k = cfg.targets.len();
            let dp = detect_peaks(&first.direct, k, first.direct.mainlobe_halfwidth())?;
            let vp = detect_peaks(&first.virtual_, k, first.virtual_.mainlobe_halfwidth())?;
            let snr = format!("snr_db = {}", cfg.snr_db);
            let n = notes(r, &[SNR_NOTE, &snr, "spectra and peaks from run 0"]);
            vec![
                csv("demo_direct.csv", |w| export::write_periodogram(w, &first.direct, &n))?,
                csv("demo_virtual.csv", |w| export::write_periodogram(w, &first.virtual_, &n))?,
                csv("demo_direct_peaks.csv", |w| export::write_peaks(w, &dp, &n))?,
                csv("demo_virtual_peaks.csv", |w| export::write_peaks(w, &vp, &n))?,
                csv("demo_summary.csv", |w| export::write_detection(w, &summary, &n))?,
            ]
        }
        Plan::Sweep(cfg) => {
            let result = monte_carlo_sweep(cfg)?;
            let n = notes(
                r,
                &[
                    SNR_NOTE,
                    "pslr measured on the delay cut, mainlobe excluded to the first null",
                    "ci columns are 95% half-widths",
                ],
            );
            vec![csv("sweep.csv", |w| export::write_sweep(w, &result, &n))?]
        }
    };
    let names: Vec<String> = out.iter().map(|a| a.name.clone()).collect();
    let manifest = Manifest {
        tool: TOOL,
        version: VERSION,
        config: &r.config,
        seeds: Seeds {
            master: r.seed,
            derivation: "per-stream seeds are derived from the master seed by stream and trial index",
        },
        outputs: names.iter().map(String::as_str).collect(),
    };
    out.push(json("manifest.json", &manifest));
    Ok(out)
}

/// Write artifacts into `dir`, creating it if needed.
pub fn write_all(dir: &Path, artifacts: &[Artifact]) -> std::io::Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    artifacts
        .iter()
        .map(|a| {
            let path = dir.join(&a.name);
            std::fs::write(&path, &a.bytes)?;
            Ok(path)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{resolve, ConfigFile, CrlbSection, ExperimentKind, Overrides};

    #[test]
    fn crlb_artifacts_and_manifest() {
        let r = resolve(&ConfigFile::bare(ExperimentKind::CrlbTable), &Overrides::default()).unwrap();
        let arts = execute(&r).unwrap();
        let names: Vec<_> = arts.iter().map(|a| a.name.as_str()).collect();
        assert_eq!(names, ["crlb.csv", "crlb.json", "manifest.json"]);
        let text = String::from_utf8(arts[0].bytes.clone()).unwrap();
        assert!(text.starts_with("# isac"));
        assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 5);
    }

    #[test]
    fn crlb_ordering_in_default_table() {
        let r = resolve(&ConfigFile::bare(ExperimentKind::CrlbTable), &Overrides::default()).unwrap();
        let Plan::Crlb { params, patterns, .. } = &r.plan else {
            unreachable!()
        };
        let b: Vec<f64> = patterns
            .iter()
            .map(|(_, s)| {
                let a = make_allocation(params, s, r.seed).unwrap();
                crlb_report(&a, params, 1.0, 1.0).unwrap().crlb_delay_s2
            })
            .collect();
        // full, random, nested, contiguous
        assert!(b[0] < b[2] && b[2] < b[3]);
    }

    #[test]
    fn manifest_reruns_identically() {
        let mut cfg = ConfigFile::bare(ExperimentKind::CrlbTable);
        cfg.crlb_table = Some(CrlbSection {
            amplitude: Some(0.5),
            ..Default::default()
        });
        let r = resolve(&cfg, &Overrides::default()).unwrap();
        let arts = execute(&r).unwrap();
        let manifest: serde_json::Value = serde_json::from_slice(&arts.last().unwrap().bytes).unwrap();
        let again: ConfigFile = serde_json::from_value(manifest["config"].clone()).unwrap();
        let r2 = resolve(&again, &Overrides::default()).unwrap();
        assert_eq!(execute(&r2).unwrap(), arts);
    }
}
