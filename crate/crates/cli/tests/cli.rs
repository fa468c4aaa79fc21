use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn isac(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_isac"))
        .args(args)
        .env_remove("ISAC_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

fn csvs(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "csv"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    v.sort();
    v
}

const SMALL_SWEEP: &str = r#"
experiment = "rmse_pslr_sweep"
seed = 11

[sweep]
methods = ["direct_sparse", "autocorrelation"]
snr_db = [0.0, 10.0]
trials = 20
"#;

#[test]
fn malformed_config_exits_2_without_outputs() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(tmp.path(), "bad.toml", "experiment = \"crlb_table\"\n[ofdm]\nn_subcarriers = \"many\"\n");
    let out = tmp.path().join("out");
    let o = isac(&["run", "-c", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("bad.toml:3:"), "{err}");
    assert!(!out.exists());
}

#[test]
fn out_of_range_value_exits_2_with_line() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(
        tmp.path(),
        "c.toml",
        "experiment = \"two_target_demo\"\n\n[two_target_demo]\nruns = 2\nactive = 999\n",
    );
    let out = tmp.path().join("out");
    let o = isac(&["run", "-c", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("c.toml:5: two_target_demo.active"), "{err}");
    assert!(!out.exists());
}

#[test]
fn validate_reports() {
    let tmp = TempDir::new().unwrap();
    let ok = write(tmp.path(), "ok.toml", "experiment = \"ambiguity\"\n");
    let o = isac(&["validate", "-c", &ok]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());

    let many = write(
        tmp.path(),
        "many.toml",
        "experiment = \"ambiguity\"\n[allocation]\npattern = \"random\"\nactive = 400\n",
    );
    let o = isac(&["validate", "-c", &many]);
    assert_eq!(o.status.code(), Some(2));
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.lines().count(), 1);
    assert!(text.contains(":4: allocation.active"), "{text}");

    let nested = write(
        tmp.path(),
        "nested.toml",
        "experiment = \"ambiguity\"\n[allocation]\npattern = \"nested\"\ninner = 30\nouter = 30\n",
    );
    let o = isac(&["validate", "-c", &nested]);
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.lines().count(), 1);
    assert!(text.contains("allocation.outer"), "{text}");
}

#[test]
fn reruns_are_byte_identical() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(tmp.path(), "s.toml", SMALL_SWEEP);
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert!(isac(&["run", "-c", &cfg, "--out", a.to_str().unwrap()]).status.success());
    assert!(isac(&["run", "-c", &cfg, "--out", b.to_str().unwrap(), "--threads", "1"]).status.success());
    let (x, y) = (csvs(&a), csvs(&b));
    assert_eq!(x.len(), 1);
    assert_eq!(x, y);
}

#[test]
fn manifest_alone_reproduces_outputs() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(tmp.path(), "s.toml", SMALL_SWEEP);
    let a = tmp.path().join("a");
    assert!(isac(&["run", "-c", &cfg, "--out", a.to_str().unwrap()]).status.success());
    let manifest = a.join("manifest.json");
    let m: serde_json::Value = serde_json::from_slice(&fs::read(&manifest).unwrap()).unwrap();
    assert_eq!(m["seeds"]["master"], 11);
    assert_eq!(m["config"]["sweep"]["trials"], 20);

    let b = tmp.path().join("b");
    let o = isac(&["run", "-c", manifest.to_str().unwrap(), "--out", b.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(csvs(&a), csvs(&b));
}

#[test]
fn seed_flag_changes_results() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(tmp.path(), "s.toml", SMALL_SWEEP);
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert!(isac(&["run", "-c", &cfg, "--out", a.to_str().unwrap()]).status.success());
    assert!(isac(&["run", "-c", &cfg, "--out", b.to_str().unwrap(), "--seed", "12"]).status.success());
    assert_ne!(csvs(&a), csvs(&b));
}

#[test]
fn env_sets_output_dir() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("from_env");
    let o = Command::new(env!("CARGO_BIN_EXE_isac"))
        .args(["crlb"])
        .env("ISAC_OUT_DIR", &out)
        .output()
        .unwrap();
    assert!(o.status.success());
    let table = fs::read_to_string(out.join("crlb.csv")).unwrap();
    assert!(table.contains("\nfull,full,256,8192,32,"), "{table}");
}

#[test]
fn demo_writes_both_spectra() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(tmp.path(), "d.toml", "experiment = \"two_target_demo\"\n[two_target_demo]\nruns = 3\n");
    let out = tmp.path().join("out");
    assert!(isac(&["demo", "-c", &cfg, "--out", out.to_str().unwrap()]).status.success());
    let names: Vec<String> = csvs(&out).into_iter().map(|c| c.0).collect();
    assert_eq!(
        names,
        [
            "demo_direct.csv",
            "demo_direct_peaks.csv",
            "demo_summary.csv",
            "demo_virtual.csv",
            "demo_virtual_peaks.csv"
        ]
    );
    let summary = fs::read_to_string(out.join("demo_summary.csv")).unwrap();
    assert!(summary.contains("# snr_db = -10"));
}

#[test]
fn plot_script_is_printed() {
    let o = isac(&["plot-script", "hole_probability"]);
    assert!(o.status.success());
    assert!(String::from_utf8(o.stdout).unwrap().contains("hole_probability.csv"));
    assert_eq!(isac(&["plot-script", "nope"]).status.code(), Some(2));
}

#[test]
fn shipped_configs_validate() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    for entry in fs::read_dir(dir).unwrap() {
        let p = entry.unwrap().path();
        if p.extension().is_some_and(|e| e == "toml") {
            let o = isac(&["validate", "-c", p.to_str().unwrap()]);
            assert!(o.status.success(), "{}: {}", p.display(), String::from_utf8_lossy(&o.stdout));
            seen += 1;
        }
    }
    assert!(seen >= 5);
}
