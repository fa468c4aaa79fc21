//! Config-driven experiment runner built on `isac_core`.

pub mod config;
pub mod plot;
pub mod runner;

use std::path::{Path, PathBuf};

use thiserror::Error;

use config::{resolve, ConfigFile, ExperimentKind, Issue, Overrides, Resolved, Source};
use isac_core::IsacError;

#[derive(Debug, Error)]
pub enum CliError {
    /// Unreadable, malformed or out-of-range configuration.
    #[error("{}", render_issues(.path, .issues))]
    Config { path: PathBuf, issues: Vec<Issue> },
    /// A computation failed after validation passed.
    #[error("experiment {experiment} failed: {source}")]
    Numeric {
        experiment: ExperimentKind,
        #[source]
        source: IsacError,
    },
    #[error("writing {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } => 2,
            CliError::Numeric { .. } => 3,
            CliError::Io { .. } => 1,
        }
    }
}

fn render_issues(path: &Path, issues: &[Issue]) -> String {
    issues
        .iter()
        .map(|i| match i.line {
            Some(l) => format!("{}:{l}: {}: {}", path.display(), i.field, i.message),
            None => format!("{}: {}: {}", path.display(), i.field, i.message),
        })
        .collect::<Vec<_>>()
        .join("\n")
}

/// Read and parse a config file. Unreadable files count as config errors.
pub fn load(path: &Path) -> Result<(Source, ConfigFile), CliError> {
    let src = Source::read(path).map_err(|e| CliError::Config {
        path: path.to_path_buf(),
        issues: vec![Issue {
            field: "config".into(),
            line: None,
            message: e.to_string(),
        }],
    })?;
    let cfg = src.parse().map_err(|i| CliError::Config {
        path: path.to_path_buf(),
        issues: vec![i],
    })?;
    Ok((src, cfg))
}

/// Resolve with line numbers attached from `src` where available.
pub fn resolve_anchored(src: Option<&Source>, cfg: &ConfigFile, ov: &Overrides) -> Result<Resolved, CliError> {
    resolve(cfg, ov).map_err(|mut issues| {
        if let Some(s) = src {
            for i in &mut issues {
                i.line = i.line.or_else(|| s.locate(&i.field));
            }
        }
        CliError::Config {
            path: src.map(|s| s.path.clone()).unwrap_or_else(|| PathBuf::from("<defaults>")),
            issues,
        }
    })
}

/// Dry run: every problem found, or an empty list.
pub fn validate(path: &Path, ov: &Overrides) -> Result<Vec<String>, CliError> {
    let (src, cfg) = match load(path) {
        Ok(v) => v,
        Err(CliError::Config { path, issues }) => return Ok(vec![render_issues(&path, &issues)]),
        Err(e) => return Err(e),
    };
    match resolve_anchored(Some(&src), &cfg, ov) {
        Ok(_) => Ok(Vec::new()),
        Err(CliError::Config { path, issues }) => Ok(issues
            .iter()
            .map(|i| render_issues(&path, std::slice::from_ref(i)))
            .collect()),
        Err(e) => Err(e),
    }
}

/// Execute a resolved config and write its outputs. Returns the written paths.
pub fn run_resolved(r: &Resolved) -> Result<Vec<PathBuf>, CliError> {
    log::info!("running {} with seed {} into {}", r.config.experiment, r.seed, r.output_dir.display());
    let artifacts = runner::execute(r).map_err(|e| match e {
        IsacError::Io(source) => CliError::Io {
            path: r.output_dir.clone(),
            source,
        },
        source => CliError::Numeric {
            experiment: r.config.experiment,
            source,
        },
    })?;
    runner::write_all(&r.output_dir, &artifacts).map_err(|source| CliError::Io {
        path: r.output_dir.clone(),
        source,
    })
}

/// Load, resolve and run a config file.
pub fn run_file(path: &Path, ov: &Overrides) -> Result<Vec<PathBuf>, CliError> {
    let (src, cfg) = load(path)?;
    let r = resolve_anchored(Some(&src), &cfg, ov)?;
    run_resolved(&r)
}

/// Run `kind`, optionally taking settings from a config file whose
/// experiment name is replaced.
pub fn run_kind(kind: ExperimentKind, path: Option<&Path>, ov: &Overrides) -> Result<Vec<PathBuf>, CliError> {
    let (src, cfg) = match path {
        Some(p) => {
            let (s, mut c) = load(p)?;
            c.experiment = kind;
            (Some(s), c)
        }
        None => (None, ConfigFile::bare(kind)),
    };
    let r = resolve_anchored(src.as_ref(), &cfg, ov)?;
    run_resolved(&r)
}
