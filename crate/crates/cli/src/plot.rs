//! Matplotlib scripts for the CSV outputs. Printed, never executed.

use crate::config::ExperimentKind;

const PRELUDE: &str = r##"import sys
from pathlib import Path

import matplotlib.pyplot as plt
import pandas as pd

out = Path(sys.argv[1] if len(sys.argv) > 1 else ".")


def load(name):
    return pd.read_csv(out / name, comment="#")

"##;

fn body(kind: ExperimentKind) -> &'static str {
    match kind {
        ExperimentKind::CrlbTable => {
            r#"df = load("crlb.csv")
fig, ax = plt.subplots()
ax.bar(df["name"], df["rmse_bound_m"])
ax.set_yscale("log")
ax.set_ylabel("range RMSE bound [m]")
fig.savefig(out / "crlb.png", dpi=150)
"#
        }
        ExperimentKind::HoleProbability => {
            r#"df = load("hole_probability.csv")
fig, ax = plt.subplots()
ax.errorbar(df["active"], df["min_lag_probability"], yerr=df["min_lag_half_width"], label="worst lag")
ax.errorbar(df["active"], df["all_lags_probability"], yerr=df["all_lags_half_width"], label="all lags")
ax.set_xlabel("active subcarriers")
ax.set_ylabel("fill probability")
ax.legend()
fig.savefig(out / "hole_probability.png", dpi=150)
"#
        }
        ExperimentKind::Ambiguity => {
            r#"fig, axes = plt.subplots(1, 2, figsize=(10, 4), sharey=True)
for ax, name in zip(axes, ["direct", "virtual"]):
    df = load(f"ambiguity_{name}.csv")
    grid = df.pivot(index="doppler_hz", columns="delay_s", values="magnitude")
    ax.imshow(
        grid.values,
        aspect="auto",
        origin="lower",
        extent=[grid.columns.min() * 1e6, grid.columns.max() * 1e6, grid.index.min(), grid.index.max()],
    )
    ax.set_title(name)
    ax.set_xlabel("delay [us]")
axes[0].set_ylabel("Doppler [Hz]")
fig.savefig(out / "ambiguity.png", dpi=150)
"#
        }
        ExperimentKind::TwoTargetDemo => {
            r#"fig, ax = plt.subplots()
for name in ["direct", "virtual"]:
    df = load(f"demo_{name}.csv")
    mag = df["magnitude"] / df["magnitude"].max()
    ax.plot(df["axis_value"] * 299792458.0 / 2, mag, label=name)
ax.set_xlabel("range [m]")
ax.set_ylabel("normalized magnitude")
ax.legend()
fig.savefig(out / "demo.png", dpi=150)
"#
        }
        ExperimentKind::RmsePslrSweep => {
            r#"df = load("sweep.csv")
fig, (a, b) = plt.subplots(1, 2, figsize=(10, 4))
for method, g in df.groupby("method"):
    a.errorbar(g["snr_db"], g["rmse_m"], yerr=g["rmse_ci"], label=method)
    b.errorbar(g["snr_db"], g["pslr_db"], yerr=g["pslr_ci"], label=method)
a.set_yscale("log")
a.set_xlabel("SNR per RE [dB]")
a.set_ylabel("range RMSE [m]")
b.set_xlabel("SNR per RE [dB]")
b.set_ylabel("PSLR [dB]")
b.legend()
fig.savefig(out / "sweep.png", dpi=150)
"#
        }
    }
}

/// A standalone script; its first argument is the output directory.
pub fn script(kind: ExperimentKind) -> String {
    format!("{PRELUDE}{}", body(kind))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_kind_reads_its_files() {
        assert!(script(ExperimentKind::RmsePslrSweep).contains("sweep.csv"));
        assert!(script(ExperimentKind::Ambiguity).contains("ambiguity_"));
        for k in ExperimentKind::ALL {
            assert!(script(k).starts_with("import sys"));
        }
    }
}
