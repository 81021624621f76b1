//! Files written by a run: diagnostics and residual CSVs, the report and
//! the config echo. Every file goes through [`write_atomic`].

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use nlsv::{BlowupVerdict, ResidualReport, TimeSeries64};

use crate::error::CliError;

/// Seventeen significant digits, enough to round-trip any `f64`.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes `contents` to a temporary sibling of `path`, syncs it and renames
/// it into place, so readers never see a half-written file.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path.file_name().ok_or_else(|| CliError::Config(format!("not a file path: {}", path.display())))?;
    let tmp = dir.join(format!(".{}.{}.tmp", name.to_string_lossy(), std::process::id()));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    result.map_err(|e| {
        let _ = fs::remove_file(&tmp);
        CliError::io(format!("writing {}", path.display()), e)
    })
}

pub fn diagnostics_header(dim: usize) -> Vec<String> {
    let mut cols: Vec<String> = ["t", "charge", "kinetic", "potential_int", "energy"].map(String::from).to_vec();
    cols.extend((1..=dim).map(|a| format!("momentum_{a}")));
    cols.extend(["variance", "cross", "grad_norm2", "W_int", "J_norm2", "boundary_mass"].map(String::from));
    cols
}

pub fn diagnostics_csv(series: &TimeSeries64, dim: usize) -> String {
    let mut out = diagnostics_header(dim).join(",");
    out.push('\n');
    for s in &series.samples {
        let mut row = vec![s.t, s.charge, s.kinetic, s.potential_int, s.energy];
        row.extend(&s.momentum);
        row.extend([s.variance, s.cross, s.grad_norm2, s.w_int, s.j_norm2, s.boundary_mass]);
        let cells: Vec<String> = row.into_iter().map(fmt_f64).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// `t` plus one column per identity, on the sample times.
///
/// Rate identities skip the first and last sample, and single-value checks
/// (factorization, structural assumptions) are reported on the last row;
/// cells without a value are left empty.
pub fn residual_csv(report: &ResidualReport, times: &[f64]) -> String {
    let mut out = String::from("t");
    for r in &report.identities {
        out.push(',');
        out.push_str(&r.name);
    }
    out.push('\n');
    let last = times.len().saturating_sub(1);
    for (i, &t) in times.iter().enumerate() {
        out.push_str(&fmt_f64(t));
        for r in &report.identities {
            out.push(',');
            let value = if r.times.is_empty() {
                (i == last).then(|| r.series.first().copied()).flatten()
            } else {
                r.times.iter().position(|&s| s.to_bits() == t.to_bits()).map(|k| r.series[k])
            };
            if let Some(v) = value {
                out.push_str(&fmt_f64(v));
            }
        }
        out.push('\n');
    }
    out
}

/// Key-value block describing a blow-up verdict.
pub fn verdict_text(v: &BlowupVerdict<f64>) -> String {
    let opt = |x: Option<f64>| x.map_or_else(|| "none".to_string(), |t| format!("{t:.6}"));
    let mut s = String::from("[blowup]\n");
    let _ = writeln!(s, "criterion_met          {}", v.criterion_met);
    let _ = writeln!(s, "energy0                {:.10e}", v.energy0);
    let _ = writeln!(s, "variance0              {:.10e}", v.variance0);
    let _ = writeln!(s, "cross0                 {:.10e}", v.cross0);
    let _ = writeln!(s, "predicted_time_bound   {}", opt(v.predicted_time_bound));
    let _ = writeln!(s, "observed_abort_time    {}", opt(v.observed_abort_time));
    let _ = writeln!(s, "variance_curvature_fit {:.10e}", v.variance_curvature_fit);
    let _ = writeln!(s, "expected_curvature     {:.10e}", 2.0 * v.energy0);
    let _ = writeln!(s, "fit_samples            {}", v.fit_samples);
    let _ = writeln!(s, "message                {}", v.message);
    s
}

/// Paths of a written output bundle.
#[derive(Clone, Debug)]
pub struct OutputBundle {
    pub diagnostics: PathBuf,
    pub residuals: PathBuf,
    pub report: PathBuf,
    pub config: PathBuf,
    pub final_field: PathBuf,
    pub plot: Option<PathBuf>,
}

impl OutputBundle {
    pub fn in_dir(dir: &Path) -> Self {
        Self {
            diagnostics: dir.join("diagnostics.csv"),
            residuals: dir.join("residuals.csv"),
            report: dir.join("report.txt"),
            config: dir.join("config.resolved.toml"),
            final_field: dir.join("final_field.csv"),
            plot: None,
        }
    }
}
