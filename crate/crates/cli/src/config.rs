//! Run configuration files.
//!
//! A config is a TOML document. Physics and grid keys are required; the
//! rest fall back to the defaults below, and the resolved document (with
//! every default written out) is what gets echoed and hashed.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use nlsv::report::ToleranceModel;
use nlsv::{Complex, Grid64, Integrator, RunConfig64, ScenarioKind, ScenarioSpec};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;
use crate::fieldfile;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub dimension: usize,
    pub points: usize,
    pub half_width: f64,
    pub lambda: f64,
    pub p: f64,
    pub dt: f64,
    pub t_end: f64,
    #[serde(default = "default_sample_every")]
    pub sample_every: usize,
    #[serde(default)]
    pub integrator: IntegratorName,
    #[serde(default)]
    pub store_snapshots: bool,
    pub initial: InitialSection,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub monitor: Monitor,
}

fn default_sample_every() -> usize {
    10
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IntegratorName {
    #[default]
    Strang,
    Rk4,
}

impl From<IntegratorName> for Integrator {
    fn from(name: IntegratorName) -> Self {
        match name {
            IntegratorName::Strang => Integrator::Strang,
            IntegratorName::Rk4 => Integrator::Rk4,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitialKind {
    Gaussian,
    Sech,
    Boosted,
    CustomFile,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSection {
    pub kind: InitialKind,
    #[serde(default = "one")]
    pub amplitude: f64,
    #[serde(default = "one")]
    pub width: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub velocity: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<Vec<f64>>,
    /// Field file for `custom-file`, relative to the config file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub file: Option<PathBuf>,
}

fn one() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub c_dt: f64,
    pub c_sample: f64,
    pub floor: f64,
    pub factorization: f64,
    pub free: f64,
    pub algebraic: f64,
    pub summation: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        let m = ToleranceModel::default();
        Self {
            c_dt: m.c_dt,
            c_sample: m.c_sample,
            floor: m.floor,
            factorization: m.factorization,
            free: m.free,
            algebraic: m.algebraic,
            summation: m.summation,
        }
    }
}

impl From<&Tolerances> for ToleranceModel {
    fn from(t: &Tolerances) -> Self {
        Self {
            c_dt: t.c_dt,
            c_sample: t.c_sample,
            floor: t.floor,
            factorization: t.factorization,
            free: t.free,
            algebraic: t.algebraic,
            summation: t.summation,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Monitor {
    /// Warn when this fraction of the charge sits in the outer shell.
    pub boundary_mass_warn: f64,
    /// Abort when `‖∇u‖` exceeds its initial value by this factor.
    pub blowup_gradient_factor: f64,
    pub max_snapshots: usize,
}

impl Default for Monitor {
    fn default() -> Self {
        Self { boundary_mass_warn: 1e-8, blowup_gradient_factor: 10.0, max_snapshots: 10_000 }
    }
}

/// Command-line overrides applied on top of the file.
#[derive(Clone, Copy, Debug, Default)]
pub struct Overrides {
    pub dt: Option<f64>,
    pub t_end: Option<f64>,
}

/// A parsed, defaulted and validated configuration.
#[derive(Clone, Debug)]
pub struct Loaded {
    pub run: RunConfig64,
    pub tolerances: ToleranceModel,
    /// The resolved config as TOML, without the hash line.
    pub resolved: String,
    /// Hex SHA-256 of `resolved` followed by the custom field file, if any.
    pub hash: String,
}

impl Loaded {
    /// The resolved config with its hash on the first line.
    pub fn echo(&self) -> String {
        format!("# config_hash = {}\n{}", self.hash, self.resolved)
    }
}

pub fn load(path: &Path, overrides: Overrides) -> Result<Loaded, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
    let base = path.parent().unwrap_or(Path::new("."));
    parse(&text, base, overrides).map_err(|e| match e {
        CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
        other => other,
    })
}

/// Parses config text; relative field-file paths resolve against `base`.
pub fn parse(text: &str, base: &Path, overrides: Overrides) -> Result<Loaded, CliError> {
    let mut file: FileConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string().trim_end().into()))?;
    if let Some(dt) = overrides.dt {
        file.dt = dt;
    }
    if let Some(t_end) = overrides.t_end {
        file.t_end = t_end;
    }
    check_keys(&file)?;
    let dim = file.dimension;
    file.initial.velocity.get_or_insert_with(|| vec![0.0; dim]);
    file.initial.center.get_or_insert_with(|| vec![0.0; dim]);

    let grid = Grid64::new(dim, file.points, file.half_width).map_err(core_config)?;
    let mut field_bytes = Vec::new();
    let kind = match file.initial.kind {
        InitialKind::Gaussian => ScenarioKind::Gaussian,
        InitialKind::Sech => ScenarioKind::Sech,
        InitialKind::Boosted => ScenarioKind::Boosted,
        InitialKind::CustomFile => {
            let rel = file.initial.file.as_ref().ok_or_else(|| {
                CliError::Config("key `initial.file` is required when initial.kind = \"custom-file\"".into())
            })?;
            let full = base.join(rel);
            field_bytes = fs::read(&full)
                .map_err(|e| CliError::Config(format!("key `initial.file`: cannot read {}: {e}", full.display())))?;
            let values: Vec<Complex<f64>> = fieldfile::parse(&field_bytes, &grid)
                .map_err(|e| CliError::Config(format!("key `initial.file` ({}): {e}", full.display())))?;
            ScenarioKind::Custom(values)
        }
    };
    let initial = ScenarioSpec {
        kind,
        amplitude: file.initial.amplitude,
        width: file.initial.width,
        velocity: file.initial.velocity.clone().unwrap_or_default(),
        center: file.initial.center.clone().unwrap_or_default(),
    };

    let mut run = RunConfig64::new(dim, file.points, file.half_width, file.lambda, file.p, initial);
    run.dt = file.dt;
    run.t_end = file.t_end;
    run.sample_every = file.sample_every;
    run.integrator = file.integrator.into();
    run.store_snapshots = file.store_snapshots;
    run.boundary_mass_warn = file.monitor.boundary_mass_warn;
    run.blowup_gradient_factor = file.monitor.blowup_gradient_factor;
    run.max_snapshots = file.monitor.max_snapshots;
    run.validate().map_err(core_config)?;

    let resolved = toml::to_string(&file).map_err(|e| CliError::Config(format!("cannot serialize config: {e}")))?;
    let mut hasher = Sha256::new();
    hasher.update(resolved.as_bytes());
    hasher.update(&field_bytes);
    let hash = hasher.finalize().iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    });
    let tolerances = ToleranceModel::from(&file.tolerances);
    Ok(Loaded { run, tolerances, resolved, hash })
}

fn core_config(e: nlsv::Error) -> CliError {
    CliError::Config(e.to_string())
}

fn key_error(key: &str, why: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("key `{key}`: {why}"))
}

/// Checks that can name the offending key; the core re-validates the rest.
fn check_keys(f: &FileConfig) -> Result<(), CliError> {
    if !(1..=3).contains(&f.dimension) {
        return Err(key_error("dimension", format!("must be 1, 2 or 3, got {}", f.dimension)));
    }
    if f.points < 8 || !f.points.is_power_of_two() {
        return Err(key_error("points", format!("must be a power of two >= 8, got {}", f.points)));
    }
    let positive = [("half_width", f.half_width), ("dt", f.dt), ("t_end", f.t_end), ("initial.width", f.initial.width)];
    for (key, v) in positive {
        if !(v.is_finite() && v > 0.0) {
            return Err(key_error(key, format!("must be positive and finite, got {v}")));
        }
    }
    for (key, v) in [("lambda", f.lambda), ("p", f.p), ("initial.amplitude", f.initial.amplitude)] {
        if !v.is_finite() {
            return Err(key_error(key, format!("must be finite, got {v}")));
        }
    }
    if f.p <= 1.0 {
        return Err(key_error("p", format!("must exceed 1, got {}", f.p)));
    }
    if f.sample_every == 0 {
        return Err(key_error("sample_every", "must be at least 1"));
    }
    for (key, v) in [("initial.velocity", &f.initial.velocity), ("initial.center", &f.initial.center)] {
        if let Some(v) = v {
            if v.len() != f.dimension {
                return Err(key_error(key, format!("needs {} components, got {}", f.dimension, v.len())));
            }
        }
    }
    if f.initial.file.is_some() && f.initial.kind != InitialKind::CustomFile {
        return Err(key_error("initial.file", "only allowed with initial.kind = \"custom-file\""));
    }
    Ok(())
}
