//! Experiment configuration: the on-disk schema, its defaults and the
//! validated run plan.
//!
//! A config file is TOML. Every section is optional except the experiment
//! name; missing values are filled from the selected profile. The fully
//! filled config is what gets written to `manifest.json`, so a manifest can
//! be fed straight back to `run`.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use isac_core::alloc::{make_allocation, OfdmParams, PatternSpec};
use isac_core::analysis::{DetectionConfig, Method, SweepConfig};
use isac_core::scene::{LinkBudget, NoiseSpec, Scene, Target};
use isac_core::IsacError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    CrlbTable,
    HoleProbability,
    Ambiguity,
    TwoTargetDemo,
    RmsePslrSweep,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 5] = [
        ExperimentKind::CrlbTable,
        ExperimentKind::HoleProbability,
        ExperimentKind::Ambiguity,
        ExperimentKind::TwoTargetDemo,
        ExperimentKind::RmsePslrSweep,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ExperimentKind::CrlbTable => "crlb_table",
            ExperimentKind::HoleProbability => "hole_probability",
            ExperimentKind::Ambiguity => "ambiguity",
            ExperimentKind::TwoTargetDemo => "two_target_demo",
            ExperimentKind::RmsePslrSweep => "rmse_pslr_sweep",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for ExperimentKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| format!("unknown experiment '{s}'"))
    }
}

/// Parameter set used to fill anything the file leaves out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Profile {
    /// N = 256, M = 32, N_a = 64.
    #[default]
    Desk,
    /// N = 1000, M = 720, N_a = 200.
    Paper,
}

impl Profile {
    pub fn params(&self) -> OfdmParams {
        match self {
            Profile::Desk => OfdmParams::desk(),
            Profile::Paper => OfdmParams::paper(),
        }
    }

    pub fn active(&self) -> usize {
        match self {
            Profile::Desk => 64,
            Profile::Paper => 200,
        }
    }

    /// Symbols used by the two-target demo.
    pub fn demo_symbols(&self) -> usize {
        match self {
            Profile::Desk => 128,
            Profile::Paper => 720,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OfdmSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_subcarriers: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_symbols: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub subcarrier_spacing_hz: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub carrier_freq_hz: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cp_len_s: Option<f64>,
}

/// A target given either by amplitude or by RCS.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetSection {
    pub distance_m: f64,
    #[serde(default)]
    pub velocity_mps: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub amplitude: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rcs_m2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phase_rad: Option<f64>,
}

impl TargetSection {
    fn from_target(t: &Target) -> Self {
        use isac_core::scene::Reflectivity;
        let (amplitude, rcs_m2) = match t.reflectivity {
            Reflectivity::Amplitude(a) => (Some(a), None),
            Reflectivity::Rcs(r) => (None, Some(r)),
        };
        TargetSection {
            distance_m: t.distance_m,
            velocity_mps: t.velocity_mps,
            amplitude,
            rcs_m2,
            phase_rad: t.phase_rad,
        }
    }

    fn to_target(&self) -> Result<Target, String> {
        let t = match (self.amplitude, self.rcs_m2) {
            (Some(a), None) => Target::with_amplitude(self.distance_m, self.velocity_mps, a),
            (None, Some(r)) => Target::with_rcs(self.distance_m, self.velocity_mps, r),
            _ => return Err("give exactly one of amplitude or rcs_m2".into()),
        };
        let t = match self.phase_rad {
            Some(p) => t.phase(p),
            None => t,
        };
        t.validate().map_err(|e| e.to_string())?;
        Ok(t)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSection {
    /// Per active resource element, relative to the first target.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub snr_db: Option<f64>,
    /// Complex noise variance per resource element.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n0: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkBudgetSection {
    pub tx_power_w: f64,
    pub tx_gain_db: f64,
    pub rx_gain_db: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub methods: Option<Vec<Method>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub snr_db: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub active: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oversample: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub range_jitter_m: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub miss_threshold_bins: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrlbSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub patterns: Option<Vec<PatternSpec>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub amplitude: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n0: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HoleSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub active: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AmbiguitySection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delay_points: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub doppler_points: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DemoSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub runs: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub active: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oversample: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance_m: Option<f64>,
}

/// The config file as written by the user.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub experiment: ExperimentKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub profile: Option<Profile>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ofdm: Option<OfdmSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub allocation: Option<PatternSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub targets: Option<Vec<TargetSection>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub noise: Option<NoiseSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub link_budget: Option<LinkBudgetSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub crlb_table: Option<CrlbSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hole_probability: Option<HoleSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ambiguity: Option<AmbiguitySection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub two_target_demo: Option<DemoSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
}

impl ConfigFile {
    /// An empty config for `experiment`; everything comes from the profile.
    pub fn bare(experiment: ExperimentKind) -> Self {
        ConfigFile {
            experiment,
            profile: None,
            seed: None,
            output_dir: None,
            ofdm: None,
            allocation: None,
            targets: None,
            noise: None,
            link_budget: None,
            crlb_table: None,
            hole_probability: None,
            ambiguity: None,
            two_target_demo: None,
            sweep: None,
        }
    }
}

/// One validation problem, anchored to a source line when possible.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Issue {
    pub field: String,
    pub line: Option<usize>,
    pub message: String,
}

impl Issue {
    fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        Issue {
            field: field.into(),
            line: None,
            message: message.into(),
        }
    }
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}: {}", self.field, self.message),
            None => write!(f, "{}: {}", self.field, self.message),
        }
    }
}

/// Source text plus where it came from, kept for line anchoring.
#[derive(Debug, Clone)]
pub struct Source {
    pub path: PathBuf,
    pub text: String,
}

impl Source {
    pub fn read(path: &Path) -> std::io::Result<Self> {
        Ok(Source {
            path: path.to_path_buf(),
            text: std::fs::read_to_string(path)?,
        })
    }

    fn is_json(&self) -> bool {
        self.path.extension().is_some_and(|e| e == "json")
    }

    /// Parse the text as TOML, or as JSON for `.json` files. A JSON manifest
    /// is accepted by taking its `config` member.
    pub fn parse(&self) -> Result<ConfigFile, Issue> {
        if self.is_json() {
            let v: serde_json::Value = serde_json::from_str(&self.text).map_err(|e| Issue {
                field: "config".into(),
                line: Some(e.line()),
                message: e.to_string(),
            })?;
            let v = match v {
                serde_json::Value::Object(mut m) if m.contains_key("config") => m.remove("config").unwrap(),
                other => other,
            };
            return serde_json::from_value(v).map_err(|e| Issue::new("config", e.to_string()));
        }
        toml::from_str(&self.text).map_err(|e| {
            let line = e.span().map(|s| line_of_offset(&self.text, s.start));
            Issue {
                field: "config".into(),
                line,
                message: e.message().trim().to_string(),
            }
        })
    }

    /// Best-effort line of `field` (`section.key`, `section[i].key` or
    /// `section`) in TOML text.
    pub fn locate(&self, field: &str) -> Option<usize> {
        if self.is_json() {
            return None;
        }
        let (section, key) = match field.split_once('.') {
            Some((s, k)) => (s, Some(k)),
            None => (field, None),
        };
        let (name, index) = match section.split_once('[') {
            Some((n, rest)) => (n, rest.trim_end_matches(']').parse::<usize>().ok()),
            None => (section, None),
        };
        let lines: Vec<&str> = self.text.lines().collect();
        let header = |l: &str| {
            let t = l.trim();
            t == format!("[{name}]") || t == format!("[[{name}]]")
        };
        let starts: Vec<usize> = (0..lines.len()).filter(|&i| header(lines[i])).collect();
        let start = match index {
            Some(i) => starts.get(i).copied(),
            None => starts.first().copied(),
        };
        let Some(start) = start else {
            // top-level key
            return find_key(&lines, 0, section).map(|i| i + 1);
        };
        match key {
            None => Some(start + 1),
            Some(k) => find_key(&lines, start + 1, k)
                .map(|i| i + 1)
                .or(Some(start + 1)),
        }
    }
}

fn line_of_offset(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// First line at or after `from` assigning `key`, stopping at the next header.
fn find_key(lines: &[&str], from: usize, key: &str) -> Option<usize> {
    for (i, l) in lines.iter().enumerate().skip(from) {
        let t = l.trim_start();
        if from > 0 && t.starts_with('[') {
            return None;
        }
        if let Some(rest) = t.strip_prefix(key) {
            if rest.trim_start().starts_with('=') {
                return Some(i);
            }
        }
    }
    None
}

/// A fully validated experiment, ready to execute.
#[derive(Debug, Clone, PartialEq)]
pub enum Plan {
    Crlb {
        params: OfdmParams,
        patterns: Vec<(String, PatternSpec)>,
        amplitude: f64,
        n0: f64,
    },
    Holes {
        n_subcarriers: usize,
        active: Vec<usize>,
        trials: usize,
    },
    Ambiguity {
        params: OfdmParams,
        allocation: PatternSpec,
        delay_points: usize,
        doppler_points: usize,
    },
    Demo(DetectionConfig),
    Sweep(SweepConfig),
}

/// A config with every default written out, and what it runs.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub config: ConfigFile,
    pub plan: Plan,
    pub seed: u64,
    pub output_dir: PathBuf,
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub output_dir: Option<PathBuf>,
    pub profile: Option<Profile>,
}

const DEFAULT_SEED: u64 = 2024;

fn resolve_params(sec: &OfdmSection, base: OfdmParams) -> Result<OfdmParams, IsacError> {
    OfdmParams::new(
        sec.n_subcarriers.unwrap_or(base.n_subcarriers()),
        sec.n_symbols.unwrap_or(base.n_symbols()),
        sec.subcarrier_spacing_hz.unwrap_or(base.subcarrier_spacing_hz()),
        sec.carrier_freq_hz.unwrap_or(base.carrier_freq_hz()),
        sec.cp_len_s.unwrap_or(base.cp_len_s()),
    )
}

fn params_section(p: &OfdmParams) -> OfdmSection {
    OfdmSection {
        n_subcarriers: Some(p.n_subcarriers()),
        n_symbols: Some(p.n_symbols()),
        subcarrier_spacing_hz: Some(p.subcarrier_spacing_hz()),
        carrier_freq_hz: Some(p.carrier_freq_hz()),
        cp_len_s: Some(p.cp_len_s()),
    }
}

/// Key inside a pattern table that an allocation error refers to.
fn pattern_key(spec: &PatternSpec, err: &IsacError) -> &'static str {
    match (spec, err) {
        (_, IsacError::Cardinality { .. }) => match spec {
            PatternSpec::Random { .. } | PatternSpec::Contiguous { .. } => "active",
            PatternSpec::Comb { .. } => "step",
            PatternSpec::Coprime { .. } => "p",
            PatternSpec::Nested { .. } => "inner",
            PatternSpec::Custom { .. } => "indices",
            PatternSpec::Full => "pattern",
        },
        (PatternSpec::Nested { .. }, _) => "outer",
        (PatternSpec::Coprime { .. }, _) => "q",
        (PatternSpec::Comb { .. }, _) => "step",
        (PatternSpec::Custom { .. }, _) => "indices",
        _ => "pattern",
    }
}

fn check_active(active: usize, n: usize, field: &str, issues: &mut Vec<Issue>) {
    if active < 2 || active > n {
        issues.push(Issue::new(
            field,
            format!("active subcarrier count must lie in 2..={n}, got {active}"),
        ));
    }
}

fn check_positive(v: Option<f64>, field: &str, issues: &mut Vec<Issue>) {
    if let Some(x) = v {
        if !(x.is_finite() && x > 0.0) {
            issues.push(Issue::new(field, format!("must be positive and finite, got {x}")));
        }
    }
}

fn check_count(v: Option<usize>, field: &str, issues: &mut Vec<Issue>) {
    if v == Some(0) {
        issues.push(Issue::new(field, "must be >= 1"));
    }
}

/// Fill defaults, check every precondition and build the plan.
///
/// Nothing is computed here beyond cheap allocation checks, so this doubles
/// as the `validate` dry run.
pub fn resolve(cfg: &ConfigFile, ov: &Overrides) -> Result<Resolved, Vec<Issue>> {
    let mut issues = Vec::new();
    let profile = ov.profile.or(cfg.profile).unwrap_or_default();
    let seed = ov.seed.or(cfg.seed).unwrap_or(DEFAULT_SEED);
    let output_dir = ov
        .output_dir
        .clone()
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("results").join(cfg.experiment.as_str()));

    let mut base = profile.params();
    if cfg.experiment == ExperimentKind::TwoTargetDemo {
        base = base.with_symbols(profile.demo_symbols()).expect("profile symbols are valid");
    }
    let ofdm = cfg.ofdm.clone().unwrap_or_default();
    let params = match resolve_params(&ofdm, base) {
        Ok(p) => p,
        Err(e) => {
            issues.push(Issue::new(ofdm_field(&ofdm, &e), e.to_string()));
            return Err(issues);
        }
    };
    let n = params.n_subcarriers();

    let mut link_budget = None;
    if let Some(lb) = &cfg.link_budget {
        match LinkBudget::from_db(lb.tx_power_w, lb.tx_gain_db, lb.rx_gain_db, params.carrier_freq_hz()) {
            Ok(b) => link_budget = Some(b),
            Err(e) => issues.push(Issue::new("link_budget", e.to_string())),
        }
    }

    let default_targets = match cfg.experiment {
        ExperimentKind::TwoTargetDemo => DetectionConfig::desk_two_target(seed).targets,
        _ => SweepConfig::desk(vec![], vec![], seed).targets,
    };
    let target_sections: Vec<TargetSection> = cfg
        .targets
        .clone()
        .unwrap_or_else(|| default_targets.iter().map(TargetSection::from_target).collect());
    let mut targets = Vec::new();
    for (i, t) in target_sections.iter().enumerate() {
        match t.to_target() {
            Ok(t) => targets.push(t),
            Err(m) => issues.push(Issue::new(format!("targets[{i}]"), m)),
        }
    }
    if cfg.targets.as_ref().is_some_and(|t| t.is_empty()) {
        issues.push(Issue::new("targets", "at least one target is required"));
    }
    let uses_rcs = target_sections.iter().any(|t| t.rcs_m2.is_some());
    let mut lb_section = cfg.link_budget.clone();
    if uses_rcs && link_budget.is_none() && cfg.link_budget.is_none() {
        link_budget = Some(LinkBudget::reference(params.carrier_freq_hz()));
        lb_section = Some(LinkBudgetSection {
            tx_power_w: 0.1,
            tx_gain_db: 20.0,
            rx_gain_db: 20.0,
        });
    }

    let mut filled = ConfigFile::bare(cfg.experiment);
    filled.profile = Some(profile);
    filled.seed = Some(seed);
    filled.output_dir = Some(output_dir.clone());
    filled.ofdm = Some(params_section(&params));

    let plan = match cfg.experiment {
        ExperimentKind::CrlbTable => {
            let sec = cfg.crlb_table.clone().unwrap_or_default();
            check_positive(sec.amplitude, "crlb_table.amplitude", &mut issues);
            check_positive(sec.n0, "crlb_table.n0", &mut issues);
            let patterns = sec.patterns.clone().unwrap_or_else(|| default_crlb_patterns(profile, n));
            if patterns.is_empty() {
                issues.push(Issue::new("crlb_table.patterns", "at least one pattern is required"));
            }
            for (i, p) in patterns.iter().enumerate() {
                if let Err(e) = make_allocation(&params, p, seed) {
                    issues.push(Issue::new(
                        format!("crlb_table.patterns[{i}].{}", pattern_key(p, &e)),
                        e.to_string(),
                    ));
                }
            }
            let amplitude = sec.amplitude.unwrap_or(1.0);
            let n0 = sec.n0.unwrap_or(1.0);
            filled.crlb_table = Some(CrlbSection {
                patterns: Some(patterns.clone()),
                amplitude: Some(amplitude),
                n0: Some(n0),
            });
            Plan::Crlb {
                params,
                patterns: name_patterns(&patterns),
                amplitude,
                n0,
            }
        }
        ExperimentKind::HoleProbability => {
            let sec = cfg.hole_probability.clone().unwrap_or_default();
            let active = sec.active.clone().unwrap_or_else(|| default_hole_axis(n));
            if active.is_empty() {
                issues.push(Issue::new("hole_probability.active", "at least one value is required"));
            }
            for &a in &active {
                check_active(a, n, "hole_probability.active", &mut issues);
            }
            check_count(sec.trials, "hole_probability.trials", &mut issues);
            let trials = sec.trials.unwrap_or(1000);
            filled.hole_probability = Some(HoleSection {
                active: Some(active.clone()),
                trials: Some(trials),
            });
            Plan::Holes {
                n_subcarriers: n,
                active,
                trials,
            }
        }
        ExperimentKind::Ambiguity => {
            let allocation = cfg.allocation.clone().unwrap_or(PatternSpec::Random {
                active: profile.active().min(n),
            });
            if let Err(e) = make_allocation(&params, &allocation, seed) {
                issues.push(Issue::new(
                    format!("allocation.{}", pattern_key(&allocation, &e)),
                    e.to_string(),
                ));
            }
            let sec = cfg.ambiguity.clone().unwrap_or_default();
            check_count(sec.delay_points, "ambiguity.delay_points", &mut issues);
            check_count(sec.doppler_points, "ambiguity.doppler_points", &mut issues);
            let delay_points = sec.delay_points.unwrap_or(4 * n);
            let doppler_points = sec.doppler_points.unwrap_or(64);
            filled.allocation = Some(allocation.clone());
            filled.ambiguity = Some(AmbiguitySection {
                delay_points: Some(delay_points),
                doppler_points: Some(doppler_points),
            });
            Plan::Ambiguity {
                params,
                allocation,
                delay_points,
                doppler_points,
            }
        }
        ExperimentKind::TwoTargetDemo => {
            let sec = cfg.two_target_demo.clone().unwrap_or_default();
            let active = sec.active.unwrap_or(profile.active().min(n));
            check_active(active, n, "two_target_demo.active", &mut issues);
            check_count(sec.runs, "two_target_demo.runs", &mut issues);
            check_count(sec.oversample, "two_target_demo.oversample", &mut issues);
            check_positive(sec.tolerance_m, "two_target_demo.tolerance_m", &mut issues);
            let noise = cfg.noise.clone().unwrap_or(NoiseSection {
                snr_db: Some(-10.0),
                n0: None,
            });
            let snr_db = match (noise.snr_db, noise.n0) {
                (Some(s), None) => Some(s),
                (None, Some(n0)) if n0 > 0.0 && n0.is_finite() => {
                    // express N_0 as per-RE SNR against the first target
                    let mut scene = Scene::new(targets.clone(), NoiseSpec::N0(n0));
                    scene.link_budget = link_budget;
                    targets
                        .first()
                        .and_then(|t| scene.amplitude(t).ok())
                        .map(|a| 10.0 * (a * a / n0).log10())
                }
                _ => None,
            };
            if snr_db.is_none() {
                issues.push(Issue::new("noise", "give exactly one of snr_db or a positive n0"));
            }
            let dc = DetectionConfig {
                params,
                active,
                targets: targets.clone(),
                snr_db: snr_db.unwrap_or(0.0),
                runs: sec.runs.unwrap_or(100),
                oversample: sec.oversample.unwrap_or(4),
                tolerance_m: sec.tolerance_m.unwrap_or(params.range_bin_m()),
                seed,
            };
            if issues.is_empty() && link_budget.is_none() {
                if let Err(e) = dc.validate() {
                    issues.push(Issue::new("two_target_demo", e.to_string()));
                }
            }
            if link_budget.is_some() {
                issues.push(Issue::new(
                    "link_budget",
                    "two_target_demo takes target amplitudes; drop rcs_m2 and link_budget",
                ));
            }
            filled.targets = Some(target_sections.clone());
            filled.noise = Some(noise);
            filled.two_target_demo = Some(DemoSection {
                runs: Some(dc.runs),
                active: Some(dc.active),
                oversample: Some(dc.oversample),
                tolerance_m: Some(dc.tolerance_m),
            });
            Plan::Demo(dc)
        }
        ExperimentKind::RmsePslrSweep => {
            let sec = cfg.sweep.clone().unwrap_or_default();
            let defaults = SweepConfig::desk(Method::ALL.to_vec(), default_snr_axis(), seed);
            let active = sec.active.unwrap_or(profile.active().min(n));
            check_active(active, n, "sweep.active", &mut issues);
            check_count(sec.trials, "sweep.trials", &mut issues);
            check_count(sec.oversample, "sweep.oversample", &mut issues);
            let mut methods = sec.methods.clone().unwrap_or(defaults.methods.clone());
            methods.sort();
            methods.dedup();
            let sc = SweepConfig {
                params,
                active,
                methods,
                snr_db: sec.snr_db.clone().unwrap_or(defaults.snr_db.clone()),
                trials: sec.trials.unwrap_or(defaults.trials),
                targets: targets.clone(),
                link_budget,
                range_jitter_m: sec.range_jitter_m.unwrap_or(params.range_bin_m()),
                oversample: sec.oversample.unwrap_or(defaults.oversample),
                miss_threshold_bins: sec.miss_threshold_bins.unwrap_or(defaults.miss_threshold_bins),
                seed,
            };
            if issues.is_empty() {
                if let Err(e) = sc.validate() {
                    issues.push(Issue::new(sweep_field(&e), e.to_string()));
                }
            }
            filled.targets = Some(target_sections.clone());
            filled.link_budget = lb_section;
            filled.sweep = Some(SweepSection {
                methods: Some(sc.methods.clone()),
                snr_db: Some(sc.snr_db.clone()),
                trials: Some(sc.trials),
                active: Some(sc.active),
                oversample: Some(sc.oversample),
                range_jitter_m: Some(sc.range_jitter_m),
                miss_threshold_bins: Some(sc.miss_threshold_bins),
            });
            Plan::Sweep(sc)
        }
    };

    if !issues.is_empty() {
        return Err(issues);
    }
    Ok(Resolved {
        config: filled,
        plan,
        seed,
        output_dir,
    })
}

fn ofdm_field(sec: &OfdmSection, e: &IsacError) -> String {
    let text = e.to_string();
    let key = [
        "n_subcarriers",
        "n_symbols",
        "subcarrier_spacing_hz",
        "carrier_freq_hz",
        "cp_len_s",
    ]
    .into_iter()
    .find(|k| text.contains(k))
    .or_else(|| {
        // fall back to the only key the user set, if there is one
        let set: Vec<&str> = [
            ("n_subcarriers", sec.n_subcarriers.is_some()),
            ("n_symbols", sec.n_symbols.is_some()),
            ("subcarrier_spacing_hz", sec.subcarrier_spacing_hz.is_some()),
            ("carrier_freq_hz", sec.carrier_freq_hz.is_some()),
            ("cp_len_s", sec.cp_len_s.is_some()),
        ]
        .into_iter()
        .filter(|(_, s)| *s)
        .map(|(k, _)| k)
        .collect();
        (set.len() == 1).then(|| set[0])
    });
    match key {
        Some(k) => format!("ofdm.{k}"),
        None => "ofdm".into(),
    }
}

fn sweep_field(e: &IsacError) -> String {
    match e {
        IsacError::InvalidTarget(m) if m.contains("jitter") => "sweep.range_jitter_m".into(),
        IsacError::InvalidTarget(_) => "targets".into(),
        IsacError::InvalidArgument(m) if m.contains("SNR") => "sweep.snr_db".into(),
        IsacError::InvalidArgument(m) if m.contains("method") => "sweep.methods".into(),
        IsacError::InvalidArgument(m) if m.contains("jitter") => "sweep.range_jitter_m".into(),
        IsacError::InvalidArgument(m) if m.contains("miss") => "sweep.miss_threshold_bins".into(),
        _ => "sweep".into(),
    }
}

/// Full band, a random set, the largest nested array and a contiguous
/// block holding as many subcarriers as the nested array.
fn default_crlb_patterns(profile: Profile, n: usize) -> Vec<PatternSpec> {
    let mut v = vec![PatternSpec::Full, PatternSpec::Random {
        active: profile.active().min(n),
    }];
    if let PatternSpec::Nested { inner, outer } = PatternSpec::nested_for(n) {
        if (inner + 1) * outer <= n {
            v.push(PatternSpec::Nested { inner, outer });
            v.push(PatternSpec::Contiguous {
                active: (inner + outer).clamp(2, n),
            });
        }
    }
    v
}

/// Label each pattern, numbering repeats.
fn name_patterns(patterns: &[PatternSpec]) -> Vec<(String, PatternSpec)> {
    patterns
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let label = p.label().as_str();
            let repeats = patterns.iter().filter(|q| q.label() == p.label()).count() > 1;
            let name = if repeats {
                let k = patterns[..i].iter().filter(|q| q.label() == p.label()).count();
                format!("{label}_{}", k + 1)
            } else {
                label.to_string()
            };
            (name, p.clone())
        })
        .collect()
}

/// Sixteen evenly spaced N_a values ending at N.
fn default_hole_axis(n: usize) -> Vec<usize> {
    let step = (n / 16).max(1);
    let mut v: Vec<usize> = (1..=16).map(|k| k * step).filter(|&a| a >= 2).collect();
    if v.last() != Some(&n) {
        v.push(n);
    }
    v.retain(|&a| a >= 2 && a <= n);
    v.dedup();
    v
}

fn default_snr_axis() -> Vec<f64> {
    vec![-10.0, -5.0, 0.0, 5.0, 10.0, 15.0, 20.0]
}
