//! Assembles every identity residual of a run into a pass/fail report.

use std::fmt;

use num_complex::Complex;

use crate::diagnostics::{
    identity_chain_defect, cumulative_integral, nested_double_integral, residual_conservation,
    residual_expansion, residual_ode, residual_cross_term, residual_pseudoconformal, residual_virial,
    weighted_integral, InitialData,
};
use crate::error::Result;
use crate::nonlinearity::check_assumptions;
use crate::propagator::{check_factorization, duhamel_residual_series};
use crate::scalar::Real;
use crate::solver::{RunConfig, RunOutcome, TimeSeries};

/// Engineering tolerance model for the residual series.
///
/// Time-series residuals (normalized, see [`IdentityResidual`]) must stay
/// below `max(c_dt·dt², c_sample·Δt_sample², floor)·max(T, 1)`. Free runs
/// (`λ = 0`) are exact in time and use `free` instead.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ToleranceModel {
    pub c_dt: f64,
    pub c_sample: f64,
    pub floor: f64,
    pub factorization: f64,
    pub free: f64,
    pub algebraic: f64,
    pub summation: f64,
}

impl Default for ToleranceModel {
    fn default() -> Self {
        Self {
            c_dt: 10.0,
            c_sample: 10.0,
            floor: 1e-12,
            factorization: 1e-6,
            free: 1e-8,
            algebraic: 1e-10,
            summation: 1e-12,
        }
    }
}

impl ToleranceModel {
    pub fn series_tolerance(&self, dt: f64, sample_spacing: f64, t_end: f64, free: bool) -> f64 {
        if free {
            return self.free;
        }
        let base = (self.c_dt * dt * dt).max(self.c_sample * sample_spacing * sample_spacing).max(self.floor);
        base * t_end.max(1.0)
    }
}

/// One row of the report.
///
/// The stored series is the raw residual divided by `scale` when
/// `relative` is set, i.e. when the dominant term exceeds one in magnitude.
#[derive(Clone, Debug, PartialEq)]
pub struct IdentityResidual {
    pub name: String,
    pub times: Vec<f64>,
    pub series: Vec<f64>,
    pub max_abs: f64,
    pub final_abs: f64,
    pub tolerance: f64,
    pub relative: bool,
    pub scale: f64,
}

impl IdentityResidual {
    pub fn new(name: impl Into<String>, times: Vec<f64>, raw: Vec<f64>, scale: f64, tolerance: f64) -> Self {
        let relative = scale > 1.0;
        let divisor = if relative { scale } else { 1.0 };
        let series: Vec<f64> = raw.iter().map(|r| r / divisor).collect();
        let max_abs = series.iter().fold(0.0_f64, |m, r| if r.is_nan() { f64::NAN } else { m.max(r.abs()) });
        let final_abs = series.last().map_or(0.0, |r| r.abs());
        Self { name: name.into(), times, series, max_abs, final_abs, tolerance, relative, scale }
    }

    /// Single-value row (no time series).
    pub fn scalar(name: impl Into<String>, value: f64, scale: f64, tolerance: f64) -> Self {
        Self::new(name, vec![], vec![value], scale, tolerance)
    }

    pub fn passed(&self) -> bool {
        self.max_abs <= self.tolerance
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResidualReport {
    pub identities: Vec<IdentityResidual>,
    pub config_hash: String,
    pub grid: String,
    pub dt: f64,
    pub sample_spacing: f64,
    pub integrator: String,
    pub outcome: String,
}

impl ResidualReport {
    pub fn passed(&self) -> bool {
        self.identities.iter().all(IdentityResidual::passed)
    }

    pub fn get(&self, name: &str) -> Option<&IdentityResidual> {
        self.identities.iter().find(|r| r.name == name)
    }

    pub fn failures(&self) -> impl Iterator<Item = &IdentityResidual> {
        self.identities.iter().filter(|r| !r.passed())
    }
}

impl fmt::Display for ResidualReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "config_hash  {}", self.config_hash)?;
        writeln!(f, "grid         {}", self.grid)?;
        writeln!(f, "integrator   {}  dt = {:e}  sample_spacing = {:e}", self.integrator, self.dt, self.sample_spacing)?;
        writeln!(f, "outcome      {}", self.outcome)?;
        writeln!(f)?;
        writeln!(f, "{:<28} {:>12} {:>12} {:>12} {:>5}  verdict", "identity", "max", "final", "tolerance", "mode")?;
        for r in &self.identities {
            writeln!(
                f,
                "{:<28} {:>12.4e} {:>12.4e} {:>12.4e} {:>5}  {}",
                r.name,
                r.max_abs,
                r.final_abs,
                r.tolerance,
                if r.relative { "rel" } else { "abs" },
                if r.passed() { "PASS" } else { "FAIL" }
            )?;
        }
        let failed = self.failures().count();
        write!(f, "\n{} identities, {} failed", self.identities.len(), failed)
    }
}

fn to_f64<T: Real>(v: &[T]) -> Vec<f64> {
    v.iter().map(|x| x.to_f64_lossy()).collect()
}

fn max_abs<T: Real>(v: impl IntoIterator<Item = T>) -> f64 {
    v.into_iter().fold(0.0_f64, |m, x| m.max(x.to_f64_lossy().abs()))
}

/// Row names in report order (the Duhamel row is present only when
/// snapshots were stored).
pub const IDENTITY_NAMES: [&str; 19] = [
    "charge_conservation",
    "energy_conservation",
    "momentum_conservation",
    "virial",
    "pseudo_conformal",
    "cross_term_evolution",
    "j_expansion_energy",
    "variance_rate_ode",
    "cross_rate_ode",
    "duhamel",
    "galilean_factorization",
    "j_expansion_algebraic",
    "summation_by_parts",
    "identity_chain",
    "gauge_reality",
    "gauge_covariance",
    "f_conj_v_prime",
    "wirtinger_potential",
    "chain_rule",
];

/// Runs every identity check on a completed (or aborted) series.
pub fn verify<T: Real>(cfg: &RunConfig<T>, series: &TimeSeries<T>, model: &ToleranceModel) -> Result<ResidualReport> {
    let samples = &series.samples;
    let h = series.sample_spacing;
    let nl = cfg.nonlinearity()?;
    let free = nl.lambda() == T::zero();
    let t_last = series.times.last().copied().unwrap_or(T::zero()).to_f64_lossy();
    let tol = model.series_tolerance(
        cfg.dt.to_f64_lossy(),
        h.to_f64_lossy(),
        cfg.t_end.to_f64_lossy(),
        free,
    );
    let times = to_f64(&series.times);
    let init = InitialData::from_sample(&samples[0]);
    let mut rows = Vec::new();

    let cons = residual_conservation(samples);
    // Conservation series are already normalized by their base.
    rows.push(IdentityResidual { relative: cons.charge_relative, ..IdentityResidual::new("charge_conservation", times.clone(), to_f64(&cons.charge), 1.0, tol) });
    rows.push(IdentityResidual { relative: cons.energy_relative, ..IdentityResidual::new("energy_conservation", times.clone(), to_f64(&cons.energy), 1.0, tol) });
    rows.push(IdentityResidual { relative: cons.momentum_relative, ..IdentityResidual::new("momentum_conservation", times.clone(), to_f64(&cons.momentum), 1.0, tol) });

    let variance_scale = max_abs(samples.iter().map(|s| s.variance));
    rows.push(IdentityResidual::new("virial", times.clone(), to_f64(&residual_virial(samples, h, &init)), variance_scale, tol));

    let two = T::lit(2.0);
    let pc_scale = max_abs(samples.iter().map(|s| s.j_norm2 + two * s.t * s.t * s.potential_int))
        .max(variance_scale);
    rows.push(IdentityResidual::new(
        "pseudo_conformal",
        times.clone(),
        to_f64(&residual_pseudoconformal(samples, h, &init)),
        pc_scale,
        tol,
    ));
    let cross_scale = max_abs(samples.iter().map(|s| s.cross))
        .max(max_abs(samples.iter().map(|s| two * s.t * init.energy)));
    rows.push(IdentityResidual::new("cross_term_evolution", times.clone(), to_f64(&residual_cross_term(samples, h, &init)), cross_scale, tol));
    rows.push(IdentityResidual::new("j_expansion_energy", times.clone(), to_f64(&residual_expansion(samples, &init)), pc_scale, tol));

    let ode = residual_ode(samples, h);
    let ode_times = to_f64(&ode.times);
    let eq15_scale = max_abs(samples.iter().map(|s| two * s.cross));
    let eq16_scale = max_abs(samples.iter().map(|s| s.grad_norm2))
        .max(max_abs(samples.iter().map(|s| s.w_int - two * s.potential_int)));
    rows.push(IdentityResidual::new("variance_rate_ode", ode_times.clone(), to_f64(&ode.eq15), eq15_scale, tol));
    rows.push(IdentityResidual::new("cross_rate_ode", ode_times, to_f64(&ode.eq16), eq16_scale, tol));

    if series.snapshots.len() >= 2 {
        let duhamel = duhamel_residual_series(&series.snapshots, h, &nl)?;
        let norm = samples[0].charge.sqrt().to_f64_lossy();
        rows.push(IdentityResidual::new("duhamel", times.clone(), to_f64(&duhamel), norm, tol));
    }

    let phi = series.snapshots.first().cloned().map_or_else(
        || crate::scenarios::make_initial(&cfg.initial, &cfg.grid()?),
        Ok,
    )?;
    let t_fact = if t_last > 0.0 { T::lit(t_last) } else { cfg.t_end };
    let fact = check_factorization(&phi, t_fact)?.to_f64_lossy();
    let fact_scale = phi.max_abs().to_f64_lossy() * (1.0 + cfg.half_width.to_f64_lossy());
    let fact_tol = if free { model.free.min(model.factorization) } else { model.factorization };
    rows.push(IdentityResidual::scalar("galilean_factorization", fact, fact_scale, fact_tol));

    let defects: Vec<f64> = samples.iter().map(|s| s.j_expansion_defect().to_f64_lossy()).collect();
    rows.push(IdentityResidual::new("j_expansion_algebraic", times.clone(), defects, 1.0, model.algebraic));

    let w: Vec<T> = samples.iter().map(|s| s.w_int).collect();
    let cum = cumulative_integral(&w, h);
    let wt = weighted_integral(&w, h);
    let nest = nested_double_integral(&w, h);
    let sbp: Vec<f64> = (0..w.len())
        .map(|n| {
            let t = series.times[n];
            let lhs = wt[n];
            let rhs = t * cum[n] - nest[n];
            let scale = lhs.abs().max((t * cum[n]).abs()).max(nest[n].abs()).max(T::one());
            ((lhs - rhs) / scale).to_f64_lossy()
        })
        .collect();
    rows.push(IdentityResidual::new("summation_by_parts", times.clone(), sbp, 1.0, model.summation));

    let chain = identity_chain_defect(samples, h, &init);
    let chain_scale = pc_scale.max(max_abs(samples.iter().map(|s| two * s.t * s.cross)));
    rows.push(IdentityResidual::new("identity_chain", times.clone(), to_f64(&chain), chain_scale, model.algebraic));

    let mut points: Vec<Complex<T>> = phi.values().iter().step_by((phi.values().len() / 64).max(1)).copied().collect();
    points.extend([
        Complex::new(T::one(), T::zero()),
        Complex::new(T::lit(-0.3), T::lit(0.8)),
        Complex::new(T::lit(2.5), T::lit(-1.5)),
        Complex::new(T::zero(), T::zero()),
    ]);
    for check in check_assumptions(&nl, &points)?.checks {
        rows.push(IdentityResidual::scalar(check.name, check.max_violation, 1.0, check.tolerance));
    }

    Ok(ResidualReport {
        identities: rows,
        config_hash: String::new(),
        grid: format!(
            "dim = {}, points = {}, half_width = {}",
            cfg.dim, cfg.points, cfg.half_width
        ),
        dt: cfg.dt.to_f64_lossy(),
        sample_spacing: h.to_f64_lossy(),
        integrator: cfg.integrator.name().into(),
        outcome: describe_outcome(&series.outcome),
    })
}

pub fn describe_outcome<T: Real>(outcome: &RunOutcome<T>) -> String {
    match outcome {
        RunOutcome::Completed => "completed".into(),
        RunOutcome::BlowUp { t, gradient_ratio } => {
            format!("blow-up abort at t = {t} (gradient ratio {gradient_ratio:.3})")
        }
        RunOutcome::NonFinite { t } => format!("non-finite values at t = {t}"),
    }
}
