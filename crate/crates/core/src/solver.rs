//! Time integration of `i∂ₜu + ½Δu = λ|u|^{p-1}u` on the periodic grid.
//!
//! The primary integrator is Strang splitting (half nonlinear phase, full
//! free step, half nonlinear phase). Classical RK4 on the spectral
//! semi-discretization `u' = (i/2)Δu - i f(u)` is kept as an independent
//! oracle; it is stable for `dt·k_max²/2 ≤ 2√2`.

use num_complex::Complex;
use rayon::prelude::*;

use crate::diagnostics::{boundary_mass, sample, DiagnosticSample};
use crate::error::{Error, Result};
use crate::grid::{laplacian, Field, Grid};
use crate::nonlinearity::Nonlinearity;
use crate::propagator::free_evolve;
use crate::scalar::Real;
use crate::scenarios::{free_gaussian_exact, make_initial, soliton_exact, ScenarioKind, ScenarioSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Integrator {
    Strang,
    Rk4,
}

impl Integrator {
    pub fn name(self) -> &'static str {
        match self {
            Self::Strang => "strang",
            Self::Rk4 => "rk4-oracle",
        }
    }
}

/// Everything needed to reproduce one run.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig<T: Real> {
    pub dim: usize,
    pub points: usize,
    pub half_width: T,
    pub lambda: T,
    pub p: T,
    pub dt: T,
    pub t_end: T,
    pub sample_every: usize,
    pub initial: ScenarioSpec<T>,
    pub integrator: Integrator,
    /// Warn when boundary-shell mass exceeds this fraction of the charge.
    pub boundary_mass_warn: T,
    /// Abort once `‖∇u‖` exceeds this multiple of its initial value.
    pub blowup_gradient_factor: T,
    pub store_snapshots: bool,
    pub max_snapshots: usize,
}

impl<T: Real> RunConfig<T> {
    /// Defaults for everything but the physics and the initial datum.
    pub fn new(dim: usize, points: usize, half_width: T, lambda: T, p: T, initial: ScenarioSpec<T>) -> Self {
        Self {
            dim,
            points,
            half_width,
            lambda,
            p,
            dt: T::lit(1e-3),
            t_end: T::one(),
            sample_every: 10,
            initial,
            integrator: Integrator::Strang,
            boundary_mass_warn: T::lit(1e-8),
            blowup_gradient_factor: T::lit(10.0),
            store_snapshots: false,
            max_snapshots: 10_000,
        }
    }

    /// Focusing cubic soliton `sech(x)` on `[-20, 20)` with 512 points.
    pub fn soliton() -> Self {
        Self::new(1, 512, T::lit(20.0), -T::one(), T::lit(3.0), ScenarioSpec::sech(1, T::one(), T::one()))
    }

    /// Free evolution of `e^{-x²/2}` on `[-20, 20)` with 512 points.
    pub fn free_gaussian() -> Self {
        Self::new(1, 512, T::lit(20.0), T::zero(), T::lit(3.0), ScenarioSpec::gaussian(1, T::one(), T::one()))
    }

    pub fn grid(&self) -> Result<Grid<T>> {
        Grid::new(self.dim, self.points, self.half_width)
    }

    pub fn nonlinearity(&self) -> Result<Nonlinearity<T>> {
        let nl = Nonlinearity::new(self.lambda, self.p)?;
        nl.validate_for_dim(self.dim)?;
        Ok(nl)
    }

    /// Number of steps, `t_end/dt` rounded to the nearest integer.
    pub fn steps(&self) -> usize {
        (self.t_end / self.dt).round().to_usize().unwrap_or(0)
    }

    pub fn sample_spacing(&self) -> T {
        self.dt * T::from_usize_lossy(self.sample_every)
    }

    pub fn validate(&self) -> Result<()> {
        let grid = self.grid()?;
        self.nonlinearity()?;
        if !(self.dt > T::zero()) || !self.dt.is_finite() {
            return Err(Error::Config(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_end > T::zero()) || !self.t_end.is_finite() {
            return Err(Error::Config(format!("t_end must be positive, got {}", self.t_end)));
        }
        if self.sample_every == 0 {
            return Err(Error::Config("sample_every must be at least 1".into()));
        }
        let steps = self.steps();
        if steps == 0 {
            return Err(Error::Config("t_end is shorter than one step".into()));
        }
        let drift = (T::from_usize_lossy(steps) * self.dt - self.t_end).abs();
        if drift > T::lit(1e-9) * self.t_end {
            return Err(Error::Config(format!(
                "t_end = {} is not an integer multiple of dt = {}",
                self.t_end, self.dt
            )));
        }
        if !steps.is_multiple_of(self.sample_every) {
            return Err(Error::Config(format!(
                "step count {steps} is not a multiple of sample_every = {}",
                self.sample_every
            )));
        }
        if !(self.boundary_mass_warn > T::zero()) || !(self.blowup_gradient_factor > T::zero()) {
            return Err(Error::Config("monitoring thresholds must be positive".into()));
        }
        if self.store_snapshots && steps / self.sample_every + 1 > self.max_snapshots {
            return Err(Error::Config(format!(
                "{} snapshots requested, max_snapshots is {}",
                steps / self.sample_every + 1,
                self.max_snapshots
            )));
        }
        self.initial.validate(&grid)
    }
}

/// Exact nonlinear substep `u ← u·e^{-iλ|u|^{p-1}τ}`; the modulus is
/// unchanged.
pub fn nonlinear_phase<T: Real>(u: &Field<T>, nl: &Nonlinearity<T>, tau: T) -> Field<T> {
    u.map(|_, z| z * Complex::from_polar(T::one(), -nl.phase_rate(z) * tau))
}

/// One Strang step. Negative `dt` steps backward.
pub fn strang_step<T: Real>(u: &Field<T>, nl: &Nonlinearity<T>, dt: T) -> Field<T> {
    let half = dt / T::lit(2.0);
    let a = nonlinear_phase(u, nl, half);
    let b = free_evolve(&a, dt);
    nonlinear_phase(&b, nl, half)
}

fn rk4_rhs<T: Real>(u: &Field<T>, nl: &Nonlinearity<T>) -> Field<T> {
    let lap = laplacian(u);
    let half_i = Complex::new(T::zero(), T::lit(0.5));
    let i = Complex::new(T::zero(), T::one());
    lap.zip_map(u, |d, z| half_i * d - i * nl.apply(z)).expect("same grid")
}

/// One classical RK4 step on the spectral semi-discretization.
pub fn rk4_step<T: Real>(u: &Field<T>, nl: &Nonlinearity<T>, dt: T) -> Field<T> {
    let half = dt / T::lit(2.0);
    let axpy = |base: &Field<T>, k: &Field<T>, h: T| base.zip_map(k, |a, b| a + b * h).expect("same grid");
    let k1 = rk4_rhs(u, nl);
    let k2 = rk4_rhs(&axpy(u, &k1, half), nl);
    let k3 = rk4_rhs(&axpy(u, &k2, half), nl);
    let k4 = rk4_rhs(&axpy(u, &k3, dt), nl);
    let sixth = dt / T::lit(6.0);
    let values = u
        .values()
        .iter()
        .zip(k1.values())
        .zip(k2.values())
        .zip(k3.values())
        .zip(k4.values())
        .map(|((((&z, &a), &b), &c), &d)| z + (a + (b + c) * T::lit(2.0) + d) * sixth)
        .collect();
    Field::from_raw(u.grid(), values)
}

pub fn step<T: Real>(integrator: Integrator, u: &Field<T>, nl: &Nonlinearity<T>, dt: T) -> Field<T> {
    match integrator {
        Integrator::Strang => strang_step(u, nl, dt),
        Integrator::Rk4 => rk4_step(u, nl, dt),
    }
}

/// `‖∇u‖²` by Parseval (Nyquist mode excluded, matching the gradient).
fn grad_norm_sq<T: Real>(u: &Field<T>) -> T {
    let spectrum = crate::grid::transform(u);
    let grid = u.grid();
    let nyq = grid.points() / 2;
    let sum: T = spectrum
        .values()
        .iter()
        .enumerate()
        .map(|(flat, z)| {
            let k2: T = (0..grid.dim())
                .filter(|&a| grid.axis_index(flat, a) != nyq)
                .map(|a| {
                    let k = grid.wavenumber(flat, a);
                    k * k
                })
                .sum();
            k2 * z.norm_sqr()
        })
        .sum();
    sum * grid.cell_volume() / T::from_usize_lossy(grid.len())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RunOutcome<T: Real> {
    Completed,
    /// `‖∇u‖` crossed the configured multiple of its initial value.
    BlowUp { t: T, gradient_ratio: T },
    /// A NaN or infinity appeared in the field.
    NonFinite { t: T },
}

impl<T: Real> RunOutcome<T> {
    pub fn is_abort(&self) -> bool {
        !matches!(self, Self::Completed)
    }
}

/// Boundary-shell mass crossed the warning threshold.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundaryWarning<T: Real> {
    pub t: T,
    /// Shell mass divided by the charge.
    pub fraction: T,
}

/// Sampled trajectory.
#[derive(Clone, Debug)]
pub struct TimeSeries<T: Real> {
    pub times: Vec<T>,
    pub samples: Vec<DiagnosticSample<T>>,
    /// Fields at the sample times when snapshots were requested.
    pub snapshots: Vec<Field<T>>,
    pub outcome: RunOutcome<T>,
    pub boundary_warnings: Vec<BoundaryWarning<T>>,
    pub dt: T,
    pub sample_spacing: T,
    /// Boost wavenumbers actually used for the initial datum.
    pub snapped_velocity: Vec<T>,
    /// Field at the last completed step.
    pub final_field: Field<T>,
}

/// Steps `cfg` from 0 to `t_end`, sampling every `sample_every` steps.
///
/// Blow-up and non-finite values end the run early and are reported in
/// [`TimeSeries::outcome`]; only invalid configurations are errors.
pub fn evolve<T: Real>(cfg: &RunConfig<T>) -> Result<TimeSeries<T>> {
    cfg.validate()?;
    let grid = cfg.grid()?;
    let nl = cfg.nonlinearity()?;
    let phi = make_initial(&cfg.initial, &grid)?;
    evolve_from(cfg, &nl, phi)
}

fn evolve_from<T: Real>(cfg: &RunConfig<T>, nl: &Nonlinearity<T>, phi: Field<T>) -> Result<TimeSeries<T>> {
    let grid = phi.grid().clone();
    let steps = cfg.steps();
    let first = sample(&phi, nl, T::zero());
    let grad0 = first.grad_norm2.sqrt();
    let threshold = cfg.blowup_gradient_factor * grad0;
    let mut series = TimeSeries {
        times: vec![T::zero()],
        samples: vec![],
        snapshots: vec![],
        outcome: RunOutcome::Completed,
        boundary_warnings: vec![],
        dt: cfg.dt,
        sample_spacing: cfg.sample_spacing(),
        snapped_velocity: match cfg.initial.kind {
            ScenarioKind::Custom(_) => vec![T::zero(); grid.dim()],
            _ => cfg.initial.snapped_velocity(&grid),
        },
        final_field: phi.clone(),
    };
    record_boundary(&mut series, &first, cfg);
    series.samples.push(first);
    if cfg.store_snapshots {
        series.snapshots.push(phi.clone());
    }

    let mut u = phi;
    for n in 1..=steps {
        let next = step(cfg.integrator, &u, nl, cfg.dt);
        let t = cfg.dt * T::from_usize_lossy(n);
        if !next.is_finite() {
            series.outcome = RunOutcome::NonFinite { t };
            break;
        }
        let grad = grad_norm_sq(&next).sqrt();
        if grad0 > T::zero() && grad > threshold {
            series.outcome = RunOutcome::BlowUp { t, gradient_ratio: grad / grad0 };
            u = next;
            break;
        }
        u = next;
        if n % cfg.sample_every == 0 {
            let s = sample(&u, nl, t);
            record_boundary(&mut series, &s, cfg);
            series.times.push(t);
            series.samples.push(s);
            if cfg.store_snapshots {
                series.snapshots.push(u.clone());
            }
        }
    }
    series.final_field = u;
    Ok(series)
}

fn record_boundary<T: Real>(series: &mut TimeSeries<T>, s: &DiagnosticSample<T>, cfg: &RunConfig<T>) {
    if s.charge > T::zero() {
        let fraction = s.boundary_mass / s.charge;
        if fraction > cfg.boundary_mass_warn {
            series.boundary_warnings.push(BoundaryWarning { t: s.t, fraction });
        }
    }
}

/// Fraction of the charge in the boundary shell.
pub fn boundary_fraction<T: Real>(u: &Field<T>) -> T {
    let charge = u.norm_sq();
    if charge > T::zero() {
        boundary_mass(u) / charge
    } else {
        T::zero()
    }
}

/// What the ladder errors were measured against.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Reference<T: Real> {
    ExactSoliton,
    ExactFreeGaussian,
    /// Same integrator at this finer step.
    FineStep(T),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceFit<T: Real> {
    pub dts: Vec<T>,
    pub errors: Vec<T>,
    /// Least-squares slope of `log error` against `log dt`.
    pub order: T,
    /// `log C` in the model `error ≈ C·dt^order`.
    pub log_constant: T,
    pub reliable: bool,
    pub reference: Reference<T>,
    /// Final states, one per ladder entry.
    pub finals: Vec<Field<T>>,
}

impl<T: Real> ConvergenceFit<T> {
    /// `C·dt^order` from the fitted model.
    pub fn model_error(&self, dt: T) -> T {
        (self.log_constant + self.order * dt.ln()).exp()
    }
}

fn is_canonical_soliton<T: Real>(cfg: &RunConfig<T>) -> bool {
    let s = &cfg.initial;
    cfg.dim == 1
        && cfg.lambda == -T::one()
        && cfg.p == T::lit(3.0)
        && s.kind == ScenarioKind::Sech
        && s.amplitude == T::one()
        && s.width == T::one()
        && s.center[0] == T::zero()
        && s.velocity[0] == T::zero()
}

fn is_canonical_free_gaussian<T: Real>(cfg: &RunConfig<T>) -> bool {
    let s = &cfg.initial;
    cfg.dim == 1
        && cfg.lambda == T::zero()
        && s.kind == ScenarioKind::Gaussian
        && s.amplitude == T::one()
        && s.width == T::one()
        && s.center[0] == T::zero()
        && s.velocity[0] == T::zero()
}

/// Runs `cfg` at each step size (concurrently), measures the `L²` error at
/// `t_end` against the exact solution when one is known, otherwise against
/// the same integrator at `min(dts)/8`, and fits the order.
///
/// The fit is flagged unreliable when the errors do not decrease strictly
/// with `dt`, or when any error sits at the roundoff floor.
pub fn convergence_order<T: Real>(cfg: &RunConfig<T>, dts: &[T]) -> Result<ConvergenceFit<T>> {
    if dts.len() < 3 {
        return Err(Error::InsufficientSamples { needed: 3, got: dts.len() });
    }
    let grid = cfg.grid()?;
    let run = |dt: T| -> Result<Field<T>> {
        let mut c = cfg.clone();
        c.dt = dt;
        c.sample_every = c.steps_for(dt);
        c.store_snapshots = false;
        let series = evolve(&c)?;
        if series.outcome.is_abort() {
            return Err(Error::Domain(format!("run with dt = {dt} aborted: {:?}", series.outcome)));
        }
        Ok(series.final_field)
    };

    let (reference, exact) = if is_canonical_soliton(cfg) {
        (Reference::ExactSoliton, soliton_exact(cfg.t_end, &grid)?)
    } else if is_canonical_free_gaussian(cfg) {
        (Reference::ExactFreeGaussian, free_gaussian_exact(cfg.t_end, &grid)?)
    } else {
        let finest = dts.iter().copied().fold(T::infinity(), T::min) / T::lit(8.0);
        (Reference::FineStep(finest), run(finest)?)
    };

    let finals: Vec<Field<T>> = dts.par_iter().map(|&dt| run(dt)).collect::<Result<_>>()?;
    let errors: Vec<T> = finals
        .iter()
        .map(|u| u.sub(&exact).map(|d| d.norm()))
        .collect::<Result<_>>()?;

    let xs: Vec<T> = dts.iter().map(|d| d.ln()).collect();
    let ys: Vec<T> = errors.iter().map(|e| e.max(T::min_positive_value()).ln()).collect();
    let count = T::from_usize_lossy(xs.len());
    let mx = xs.iter().copied().sum::<T>() / count;
    let my = ys.iter().copied().sum::<T>() / count;
    let sxy: T = xs.iter().zip(&ys).map(|(&x, &y)| (x - mx) * (y - my)).sum();
    let sxx: T = xs.iter().map(|&x| (x - mx) * (x - mx)).sum();
    let order = sxy / sxx;
    let log_constant = my - order * mx;

    let mut pairs: Vec<(T, T)> = dts.iter().copied().zip(errors.iter().copied()).collect();
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
    let monotone = pairs.windows(2).all(|w| w[0].1 < w[1].1);
    // Ten ulps of the state norm: below this the error is representation noise.
    let floor = T::lit(10.0) * T::epsilon() * exact.norm().max(T::one());
    let above_floor = errors.iter().all(|&e| e > floor);

    Ok(ConvergenceFit {
        dts: dts.to_vec(),
        errors,
        order,
        log_constant,
        reliable: monotone && above_floor,
        reference,
        finals,
    })
}

impl<T: Real> RunConfig<T> {
    /// Sampling stride that samples only the initial and final states.
    fn steps_for(&self, dt: T) -> usize {
        (self.t_end / dt).round().to_usize().unwrap_or(1).max(1)
    }
}
