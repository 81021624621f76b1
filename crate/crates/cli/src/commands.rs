use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use nlsv::report::verify;
use nlsv::scenarios::{blowup_verdict, glassey_experiment};
use nlsv::solver::{convergence_order, evolve, Reference};
use nlsv::{BlowupVerdict, Integrator, ResidualReport, TimeSeries64};

use crate::config::{self, Loaded, Overrides};
use crate::error::{CliError, Status};
use crate::output::{self, write_atomic, OutputBundle};
use crate::{fieldfile, plot};

struct Evaluated {
    series: TimeSeries64,
    report: ResidualReport,
    verdict: Option<BlowupVerdict<f64>>,
}

fn evaluate(cfg: &Loaded) -> Result<Evaluated, CliError> {
    let series = evolve(&cfg.run)?;
    let mut report = verify(&cfg.run, &series, &cfg.tolerances)?;
    report.config_hash = cfg.hash.clone();
    let verdict = if series.outcome.is_abort() { Some(blowup_verdict(&cfg.run, &series)?) } else { None };
    Ok(Evaluated { series, report, verdict })
}

fn report_text(cfg: &Loaded, ev: &Evaluated) -> String {
    let mut s = ev.report.to_string();
    s.push('\n');
    let _ = writeln!(s, "[run]");
    let _ = writeln!(s, "samples                {}", ev.series.samples.len());
    let _ = writeln!(s, "t_end                  {}", cfg.run.t_end);
    if cfg.run.initial.velocity.iter().any(|&v| v != 0.0) {
        let _ = writeln!(s, "snapped_velocity       {:?}", ev.series.snapped_velocity);
    }
    let warnings = &ev.series.boundary_warnings;
    match warnings.first() {
        None => {
            let _ = writeln!(s, "boundary_warnings      0");
        }
        Some(first) => {
            let worst = warnings.iter().map(|w| w.fraction).fold(0.0, f64::max);
            let _ = writeln!(
                s,
                "boundary_warnings      {} (first at t = {}, largest edge fraction {worst:.3e})",
                warnings.len(),
                first.t
            );
        }
    }
    if let Some(v) = &ev.verdict {
        s.push('\n');
        s.push_str(&output::verdict_text(v));
    }
    s
}

fn write_bundle(cfg: &Loaded, ev: &Evaluated, dir: &Path, with_plot: bool) -> Result<OutputBundle, CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(format!("creating {}", dir.display()), e))?;
    let mut bundle = OutputBundle::in_dir(dir);
    write_atomic(&bundle.config, cfg.echo().as_bytes())?;
    write_atomic(&bundle.diagnostics, output::diagnostics_csv(&ev.series, cfg.run.dim).as_bytes())?;
    write_atomic(&bundle.residuals, output::residual_csv(&ev.report, &ev.series.times).as_bytes())?;
    write_atomic(&bundle.final_field, fieldfile::write(&ev.series.final_field).as_bytes())?;
    write_atomic(&bundle.report, report_text(cfg, ev).as_bytes())?;
    if with_plot {
        let path = dir.join("plot.gp");
        let text = plot::script(&bundle.diagnostics, Some(&bundle.residuals), &dir.join("plot.png"))?;
        write_atomic(&path, text.as_bytes())?;
        bundle.plot = Some(path);
    }
    Ok(bundle)
}

fn abort_status(ev: &Evaluated) -> Option<Status> {
    ev.series.outcome.is_abort().then_some(Status::NumericalAbort)
}

pub fn run(config: &Path, out: &Path, overrides: Overrides, with_plot: bool) -> Result<Status, CliError> {
    let cfg = config::load(config, overrides)?;
    let ev = evaluate(&cfg)?;
    let bundle = write_bundle(&cfg, &ev, out, with_plot)?;
    let failed = ev.report.failures().count();
    println!("outcome      {}", ev.report.outcome);
    println!("identities   {} checked, {failed} failed", ev.report.identities.len());
    println!("report       {}", bundle.report.display());
    println!("diagnostics  {}", bundle.diagnostics.display());
    println!("residuals    {}", bundle.residuals.display());
    if let Some(p) = &bundle.plot {
        println!("plot script  {}", p.display());
    }
    Ok(abort_status(&ev).unwrap_or(Status::Success))
}

pub fn verify_cmd(config: &Path, out: Option<&Path>, overrides: Overrides) -> Result<Status, CliError> {
    let cfg = config::load(config, overrides)?;
    let ev = evaluate(&cfg)?;
    print!("{}", report_text(&cfg, &ev));
    if let Some(dir) = out {
        write_bundle(&cfg, &ev, dir, false)?;
    }
    Ok(abort_status(&ev).unwrap_or(if ev.report.passed() { Status::Success } else { Status::VerificationFailed }))
}

pub fn convergence(
    config: &Path,
    dts: &[f64],
    integrator: Option<Integrator>,
    overrides: Overrides,
) -> Result<Status, CliError> {
    let mut cfg = config::load(config, overrides)?;
    if let Some(i) = integrator {
        cfg.run.integrator = i;
    }
    for &dt in dts {
        let mut probe = cfg.run.clone();
        probe.dt = dt;
        probe.sample_every = 1;
        probe.validate().map_err(|e| CliError::Config(format!("ladder step dt = {dt}: {e}")))?;
    }
    let fit = convergence_order(&cfg.run, dts)?;
    let reference = match fit.reference {
        Reference::ExactSoliton => "exact soliton".to_string(),
        Reference::ExactFreeGaussian => "exact free Gaussian".to_string(),
        Reference::FineStep(dt) => format!("same integrator at dt = {dt:e}"),
    };
    println!("integrator   {}", cfg.run.integrator.name());
    println!("reference    {reference}");
    println!("{:>12} {:>14} {:>14}", "dt", "L2 error", "model");
    for (&dt, &e) in fit.dts.iter().zip(&fit.errors) {
        println!("{dt:>12.4e} {e:>14.6e} {:>14.6e}", fit.model_error(dt));
    }
    println!("order        {:.4}", fit.order);
    println!("reliable     {}", fit.reliable);
    if !fit.reliable {
        println!("note         errors are non-monotone or at roundoff; the fitted order is not meaningful");
    }
    Ok(Status::Success)
}

pub fn blowup(config: &Path, out: Option<&Path>, overrides: Overrides) -> Result<Status, CliError> {
    let cfg = config::load(config, overrides)?;
    let verdict = glassey_experiment(&cfg.run)?;
    let text = format!("config_hash            {}\n{}", cfg.hash, output::verdict_text(&verdict));
    print!("{text}");
    if let Some(dir) = out {
        fs::create_dir_all(dir).map_err(|e| CliError::io(format!("creating {}", dir.display()), e))?;
        write_atomic(&dir.join("blowup.txt"), text.as_bytes())?;
    }
    Ok(Status::Success)
}

pub fn plot(diagnostics: &Path, residuals: Option<&Path>, output: Option<&Path>) -> Result<Status, CliError> {
    let dir = diagnostics.parent().unwrap_or(Path::new(""));
    let sibling = dir.join("residuals.csv");
    let residuals: Option<PathBuf> = match residuals {
        Some(p) => Some(p.to_path_buf()),
        None => sibling.exists().then_some(sibling),
    };
    let script_path = output.map_or_else(|| dir.join("plot.gp"), Path::to_path_buf);
    let image = script_path.with_extension("png");
    let text = plot::script(diagnostics, residuals.as_deref(), &image)?;
    write_atomic(&script_path, text.as_bytes())?;
    println!("{}", script_path.display());
    Ok(Status::Success)
}
