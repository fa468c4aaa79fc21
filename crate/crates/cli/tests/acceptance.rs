//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.
//!
//! Run alone with `cargo test -p isac-cli --test acceptance`.

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::seq::index::sample;
use rand::Rng;

use isac_core::alloc::{
    difference_set, lag_fill_profile, make_allocation, random_pinned_indices, OfdmParams, PatternLabel,
    PatternSpec, ResourceAllocation, VirtualAperture,
};
use isac_core::analysis::{
    crlb_delay, crlb_delay_constant, crlb_vs_inverse_fim_check, detection_rates, monte_carlo_sweep,
    DetectionConfig, Method, SweepConfig, SweepResult,
};
use isac_core::estimators::{ml_single_target, run_algorithm1, zero_fill_periodogram};
use isac_core::rng::{derive_seed, rng_from_seed};
use isac_core::scene::{NoiseSpec, Scene, Target};
use isac_core::synth::{signal_grid, synthesize, Path as SignalPath};
use isac_core::SPEED_OF_LIGHT;

const SEED: u64 = 20240901;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn random_alloc<R: Rng>(rng: &mut R, n: usize, m: usize, lo: usize) -> ResourceAllocation {
    let k = rng.random_range(lo..=n);
    let idx = random_pinned_indices(n, k, rng).unwrap();
    ResourceAllocation::uniform(n, m, idx, PatternLabel::Random).unwrap()
}

fn crlb_consistency() -> Outcome {
    let p = OfdmParams::desk();
    let mut rng = rng_from_seed(SEED);
    let (mut worst_inv, mut worst_forms) = (0.0f64, 0.0f64);
    for _ in 0..1000 {
        let a = random_alloc(&mut rng, 256, p.n_symbols(), 8);
        let amp = rng.random_range(0.1..3.0);
        let n0 = rng.random_range(0.01..10.0);
        let general = crlb_delay(&a, &p, amp, n0).unwrap();
        let constant = crlb_delay_constant(&a, &p, amp, n0).unwrap();
        worst_forms = worst_forms.max((general - constant).abs() / constant);
        worst_inv = worst_inv.max(crlb_vs_inverse_fim_check(&a, &p, amp, n0).unwrap());
    }
    outcome(
        worst_inv <= 1e-9 && worst_forms <= 1e-12,
        format!("max rel. error vs inverse FIM {worst_inv:.2e}, constant vs general {worst_forms:.2e}"),
    )
}

fn ml_efficiency() -> Outcome {
    let p = OfdmParams::desk();
    let a = make_allocation(&p, &PatternSpec::Full, 0).unwrap();
    let range = 70.0 * p.range_bin_m();
    let period_m = p.max_delay_s() * SPEED_OF_LIGHT / 2.0;
    let mut parts = Vec::new();
    let mut pass = true;
    for snr_db in [0.0, 5.0, 10.0] {
        let scene = Scene::new(vec![Target::with_amplitude(range, 0.0, 1.0)], NoiseSpec::SnrDb(snr_db));
        let stream = derive_seed(SEED, snr_db as u64);
        let sq: f64 = (0..1000u64)
            .map(|t| {
                let g = synthesize(&scene, &a, &p, derive_seed(stream, t)).unwrap();
                let est = ml_single_target(&g, 8, true).unwrap();
                let e = (est.range_m - range + period_m / 2.0).rem_euclid(period_m) - period_m / 2.0;
                e * e
            })
            .sum();
        let rmse = (sq / 1000.0).sqrt();
        let n0 = 10f64.powf(-snr_db / 10.0);
        let bound = crlb_delay(&a, &p, 1.0, n0).unwrap().sqrt() * SPEED_OF_LIGHT / 2.0;
        let gap = 20.0 * (rmse / bound).log10();
        pass &= gap.abs() <= 3.0;
        parts.push(format!("{snr_db} dB: {gap:+.2} dB"));
    }
    outcome(pass, format!("RMSE over bound, {}", parts.join(", ")))
}

fn argmax_equivalence() -> Outcome {
    let mut rng = rng_from_seed(derive_seed(SEED, 3));
    let mut same = 0;
    for t in 0..100u64 {
        let n = rng.random_range(16..=256);
        let m = rng.random_range(1..=16);
        let p = OfdmParams::new(n, m, 120e3, 24e9, 0.0).unwrap();
        let a = random_alloc(&mut rng, n, m, 2);
        let target = Target::with_amplitude(rng.random_range(1.0..p.max_delay_s() * SPEED_OF_LIGHT / 2.0), 0.0, 1.0);
        let g = synthesize(&Scene::new(vec![target], NoiseSpec::SnrDb(rng.random_range(-10.0..20.0))), &a, &p, t).unwrap();
        let os = rng.random_range(1..=8);
        if ml_single_target(&g, os, true).unwrap().bin == zero_fill_periodogram(&g, os).unwrap().argmax() {
            same += 1;
        }
    }
    outcome(same == 100, format!("{same}/100 identical argmax bins"))
}

fn noiseless_exactness() -> Outcome {
    let mut rng = rng_from_seed(derive_seed(SEED, 4));
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let n = rng.random_range(8..=256);
        let m = rng.random_range(1..=8);
        let p = OfdmParams::new(n, m, 120e3, 24e9, 0.0).unwrap();
        let a = random_alloc(&mut rng, n, m, 2);
        let amp: f64 = rng.random_range(0.1..5.0);
        let tau = rng.random_range(0.0..p.max_delay_s());
        let path = SignalPath {
            amplitude: amp,
            phase_rad: rng.random_range(0.0..TAU),
            delay_s: tau,
            doppler_hz: rng.random_range(-p.max_doppler_hz()..p.max_doppler_hz()),
        };
        let g = signal_grid(&[path], &a, &p).unwrap();
        let (vs, ap) = run_algorithm1(&g).unwrap();
        for s in ap.lags() {
            let ph = -TAU * p.subcarrier_spacing_hz() * s as f64 * tau;
            let (wr, wi) = (amp * amp * ph.cos(), amp * amp * ph.sin());
            let got = vs.get(s).unwrap();
            let err = ((got.re - wr).powi(2) + (got.im - wi).powi(2)).sqrt() / (amp * amp);
            worst = worst.max(err);
        }
    }
    outcome(worst <= 1e-10, format!("max rel. error {worst:.2e} over 200 allocations"))
}

fn two_target_demo() -> Outcome {
    let s = detection_rates(&DetectionConfig::desk_two_target(SEED)).unwrap();
    let (v, d) = (s.virtual_rate(), s.direct_rate());
    outcome(
        v >= 0.9 && 1.0 - d > 1.0 - v,
        format!("virtual resolves {:.0}%, direct {:.0}%", 100.0 * v, 100.0 * d),
    )
}

fn sweep(methods: Vec<Method>, snr: Vec<f64>, trials: usize) -> SweepResult {
    let mut cfg = SweepConfig::desk(methods, snr, SEED);
    cfg.trials = trials;
    monte_carlo_sweep(&cfg).unwrap()
}

fn pslr_ordering() -> Outcome {
    use Method::*;
    let r = sweep(vec![Autocorrelation, DirectSparse, EquivalentBandwidth], vec![0.0, 10.0], 100);
    let mut pass = true;
    let mut parts = Vec::new();
    for snr in [0.0, 10.0] {
        let v = r.row(snr, Autocorrelation).unwrap();
        let d = r.row(snr, DirectSparse).unwrap();
        let e = r.row(snr, EquivalentBandwidth).unwrap();
        pass &= v.pslr_median_db > d.pslr_median_db && v.pslr_median_db > e.pslr_median_db;
        if snr == 10.0 {
            let lo = v.pslr_db - v.pslr_ci_db;
            pass &= lo > d.pslr_db + d.pslr_ci_db && lo > e.pslr_db + e.pslr_ci_db;
        }
        parts.push(format!(
            "{snr} dB medians virtual {:.2} / direct {:.2} / equivalent {:.2}",
            v.pslr_median_db, d.pslr_median_db, e.pslr_median_db
        ));
    }
    outcome(pass, parts.join("; "))
}

fn rmse_ordering() -> Outcome {
    use Method::*;
    let r = sweep(vec![Autocorrelation, EquivalentBandwidth, FullBandwidth], vec![10.0, 15.0], 500);
    let mut pass = true;
    let mut parts = Vec::new();
    for snr in [10.0, 15.0] {
        let v = r.row(snr, Autocorrelation).unwrap().rmse_m;
        let f = r.row(snr, FullBandwidth).unwrap().rmse_m;
        let e = r.row(snr, EquivalentBandwidth).unwrap().rmse_m;
        pass &= f <= v && v <= 2.0 * f && e > v;
        parts.push(format!("{snr} dB full {f:.4} / autocorrelation {v:.4} / equivalent {e:.4} m"));
    }
    outcome(pass, parts.join("; "))
}

fn hole_probability() -> Outcome {
    let n = 256;
    let profiles: Vec<_> = (8..=n)
        .step_by(8)
        .map(|k| lag_fill_profile(n, k, 1000, derive_seed(SEED, k as u64)).unwrap())
        .collect();
    let mut monotone = true;
    for w in profiles.windows(2) {
        for (a, b) in w[0].per_lag.iter().zip(&w[1].per_lag) {
            monotone &= b.estimate + b.half_width + a.half_width >= a.estimate;
        }
        let (a, b) = (w[0].all_filled, w[1].all_filled);
        monotone &= b.estimate + b.half_width + a.half_width >= a.estimate;
    }
    let reach = profiles
        .iter()
        .find(|p| p.active < n && p.all_filled.estimate >= 0.95)
        .map(|p| p.active);
    outcome(
        monotone && reach.is_some(),
        format!(
            "monotone within CI: {monotone}; every lag filled with p >= 0.95 from N_a = {}",
            reach.map_or("never".to_string(), |k| k.to_string())
        ),
    )
}

fn difference_set_oracle() -> Outcome {
    let mut rng = rng_from_seed(derive_seed(SEED, 9));
    let mut mismatches = 0;
    for _ in 0..1000 {
        let n = rng.random_range(2..=300);
        let k = rng.random_range(1..=n.min(64));
        let mut set = sample(&mut rng, n, k).into_vec();
        set.sort_unstable();
        let mut brute = BTreeMap::new();
        for &a in &set {
            for &b in &set {
                *brute.entry(a as i64 - b as i64).or_insert(0u32) += 1;
            }
        }
        let got: BTreeMap<i64, u32> = if k >= 2 {
            let alloc = ResourceAllocation::uniform(n, 1, set.clone(), PatternLabel::Custom).unwrap();
            difference_set(&alloc).unwrap().rows().collect()
        } else {
            // a single index is rejected by the aperture; it has only lag 0
            assert!(VirtualAperture::from_indices(&set, n).is_err());
            BTreeMap::from([(0, 1)])
        };
        mismatches += (got != brute) as usize;
    }
    outcome(mismatches == 0, format!("{mismatches} mismatches over 1000 sets"))
}

fn csv_bytes(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "csv"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
        .collect()
}

fn determinism() -> Outcome {
    let tmp = tempfile::TempDir::new().unwrap();
    let kinds = ["crlb_table", "hole_probability", "ambiguity", "two_target_demo", "rmse_pslr_sweep"];
    let mut identical = 0;
    for kind in kinds {
        let cfg = tmp.path().join(format!("{kind}.toml"));
        std::fs::write(&cfg, format!("experiment = \"{kind}\"\nseed = {SEED}\n")).unwrap();
        let outs: Vec<_> = ["a", "b"]
            .iter()
            .map(|run| {
                let dir = tmp.path().join(kind).join(run);
                let ok = Command::new(env!("CARGO_BIN_EXE_isac"))
                    .arg("run")
                    .arg("--config")
                    .arg(&cfg)
                    .arg("--out")
                    .arg(&dir)
                    .output()
                    .unwrap()
                    .status
                    .success();
                assert!(ok, "{kind} failed");
                csv_bytes(&dir)
            })
            .collect();
        if !outs[0].is_empty() && outs[0] == outs[1] {
            identical += 1;
        }
    }
    outcome(identical == kinds.len(), format!("{identical}/{} experiments byte-identical", kinds.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome, Option<Duration>); 10] = [
        ("crlb consistency", crlb_consistency, Some(Duration::from_secs(10))),
        ("ml efficiency", ml_efficiency, Some(Duration::from_secs(120))),
        ("argmax equivalence", argmax_equivalence, Some(Duration::from_secs(10))),
        ("noiseless virtual signal", noiseless_exactness, None),
        ("two-target detection", two_target_demo, None),
        ("pslr ordering", pslr_ordering, None),
        ("rmse ordering", rmse_ordering, None),
        ("hole-fill probability", hole_probability, None),
        ("difference-set oracle", difference_set_oracle, None),
        ("determinism", determinism, None),
    ];
    let mut failed = 0;
    for (i, (name, f, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let mut o = f();
        let took = start.elapsed();
        if let Some(b) = budget {
            if took > *b {
                o.pass = false;
                o.detail.push_str(&format!("; over the {} s budget", b.as_secs()));
            }
        }
        failed += !o.pass as usize;
        println!(
            "criterion {:>2} {} {name}: {} ({:.2} s)",
            i + 1,
            if o.pass { "PASS" } else { "FAIL" },
            o.detail,
            took.as_secs_f64()
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
