//! Canonical initial data, closed-form reference solutions and the
//! negative-energy blow-up experiment.

use num_complex::Complex;

use crate::diagnostics::{sample, DiagnosticSample};
use crate::error::{Error, Result};
use crate::grid::{Field, Grid};
use crate::nonlinearity::Nonlinearity;
use crate::scalar::Real;
use crate::solver::{evolve, RunConfig, RunOutcome, TimeSeries};

/// Minimum number of grid spacings across the profile (`2w`).
pub const MIN_POINTS_PER_WIDTH: f64 = 8.0;

#[derive(Clone, Debug, PartialEq)]
pub enum ScenarioKind<T: Real> {
    /// `A·exp(-|x-c|²/(2w²))`.
    Gaussian,
    /// `A·sech(|x-c|/w)`.
    Sech,
    /// Sech profile with a non-zero boost.
    Boosted,
    /// Sample values loaded from a field file, row-major over axes.
    Custom(Vec<Complex<T>>),
}

impl<T: Real> ScenarioKind<T> {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Gaussian => "gaussian",
            Self::Sech => "sech",
            Self::Boosted => "boosted",
            Self::Custom(_) => "custom-file",
        }
    }
}

/// Initial datum `φ`.
///
/// The boost multiplies the profile by `e^{-iκ·x}` with `κ` the on-grid
/// wavenumber nearest to `velocity`, so that the momentum functional
/// `P = Im ∫ u ∇ū` of the boosted datum equals `κ·I` for a real profile.
#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioSpec<T: Real> {
    pub kind: ScenarioKind<T>,
    pub amplitude: T,
    pub width: T,
    pub velocity: Vec<T>,
    pub center: Vec<T>,
}

impl<T: Real> ScenarioSpec<T> {
    pub fn gaussian(dim: usize, amplitude: T, width: T) -> Self {
        Self {
            kind: ScenarioKind::Gaussian,
            amplitude,
            width,
            velocity: vec![T::zero(); dim],
            center: vec![T::zero(); dim],
        }
    }

    pub fn sech(dim: usize, amplitude: T, width: T) -> Self {
        Self { kind: ScenarioKind::Sech, ..Self::gaussian(dim, amplitude, width) }
    }

    pub fn boosted(velocity: Vec<T>) -> Self {
        let dim = velocity.len();
        Self { kind: ScenarioKind::Boosted, velocity, ..Self::gaussian(dim, T::one(), T::one()) }
    }

    /// Boost wavenumbers snapped to multiples of `π/L`.
    pub fn snapped_velocity(&self, grid: &Grid<T>) -> Vec<T> {
        let dk = T::PI() / grid.half_width();
        self.velocity.iter().map(|&v| (v / dk).round() * dk).collect()
    }

    pub fn validate(&self, grid: &Grid<T>) -> Result<()> {
        let dim = grid.dim();
        if self.velocity.len() != dim || self.center.len() != dim {
            return Err(Error::Config(format!(
                "initial velocity and center need {dim} components"
            )));
        }
        if let ScenarioKind::Custom(values) = &self.kind {
            if values.len() != grid.len() {
                return Err(Error::Config(format!(
                    "custom field has {} values, grid expects {}",
                    values.len(),
                    grid.len()
                )));
            }
            return Ok(());
        }
        if !(self.width > T::zero()) || !self.width.is_finite() {
            return Err(Error::Config(format!("initial width must be positive, got {}", self.width)));
        }
        if self.width + self.width < T::lit(MIN_POINTS_PER_WIDTH) * grid.dx() {
            return Err(Error::Config(format!(
                "initial width {} is unresolved: fewer than {MIN_POINTS_PER_WIDTH} points across it (dx = {})",
                self.width,
                grid.dx()
            )));
        }
        if !self.amplitude.is_finite() {
            return Err(Error::Config("initial amplitude must be finite".into()));
        }
        let l = grid.half_width();
        if self.center.iter().any(|&c| !(c > -l && c < l)) {
            return Err(Error::Config("initial center must lie inside the box".into()));
        }
        if self.velocity.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("initial velocity must be finite".into()));
        }
        if self.kind == ScenarioKind::Boosted && self.snapped_velocity(grid).iter().all(|&v| v == T::zero()) {
            return Err(Error::Config(
                "boosted scenario needs a velocity of at least one grid wavenumber".into(),
            ));
        }
        Ok(())
    }
}

/// Builds `φ` on `grid`.
pub fn make_initial<T: Real>(spec: &ScenarioSpec<T>, grid: &Grid<T>) -> Result<Field<T>> {
    spec.validate(grid)?;
    if let ScenarioKind::Custom(values) = &spec.kind {
        return Field::new(grid, values.clone());
    }
    let kappa = spec.snapped_velocity(grid);
    let two = T::lit(2.0);
    let w = spec.width;
    Field::from_fn(grid, |x| {
        let r2: T = x.iter().zip(&spec.center).map(|(&xi, &c)| (xi - c) * (xi - c)).sum();
        let profile = match spec.kind {
            ScenarioKind::Gaussian => (-r2 / (two * w * w)).exp(),
            _ => T::one() / (r2.sqrt() / w).cosh(),
        };
        let phase: T = x.iter().zip(&kappa).map(|(&xi, &k)| -k * xi).sum();
        Complex::from_polar(spec.amplitude * profile, phase)
    })
}

fn require_1d<T: Real>(grid: &Grid<T>) -> Result<()> {
    if grid.dim() != 1 {
        return Err(Error::Config(format!(
            "closed-form solution is one-dimensional, grid has dimension {}",
            grid.dim()
        )));
    }
    Ok(())
}

/// `e^{it/2} sech(x)`, the standing soliton of `λ = -1, p = 3, n = 1`.
pub fn soliton_exact<T: Real>(t: T, grid: &Grid<T>) -> Result<Field<T>> {
    require_1d(grid)?;
    let phase = Complex::from_polar(T::one(), t / T::lit(2.0));
    Field::from_fn(grid, |x| phase * (T::one() / x[0].cosh()))
}

/// `(1+it)^{-1/2} exp(-x²/(2(1+it)))`, the free evolution of `e^{-x²/2}`,
/// with the principal square root.
pub fn free_gaussian_exact<T: Real>(t: T, grid: &Grid<T>) -> Result<Field<T>> {
    require_1d(grid)?;
    let one_it = Complex::new(T::one(), t);
    let prefactor = one_it.sqrt().inv();
    let two = T::lit(2.0);
    Field::from_fn(grid, |x| prefactor * (Complex::new(-x[0] * x[0], T::zero()) / (one_it * two)).exp())
}

/// Result of the negative-energy blow-up experiment.
#[derive(Clone, Debug, PartialEq)]
pub struct BlowupVerdict<T: Real> {
    /// `λ < 0`, `p ≥ 1 + 4/n` and `E(φ) < 0`.
    pub criterion_met: bool,
    pub energy0: T,
    pub variance0: T,
    pub cross0: T,
    /// Positive root of `‖xφ‖² - 2t·M₀ + 2t²E(φ)`.
    pub predicted_time_bound: Option<T>,
    pub observed_abort_time: Option<T>,
    /// Coefficient of `t²` in a least-squares quadratic fit of the variance
    /// over the first third of the run; `2E(φ)` at mass-criticality.
    pub variance_curvature_fit: T,
    pub fit_samples: usize,
    pub message: String,
}

/// Least-squares fit `a + b·t + c·t²`; returns `(a, b, c)`.
pub fn fit_quadratic<T: Real>(t: &[T], y: &[T]) -> Option<(T, T, T)> {
    if t.len() < 3 || t.len() != y.len() {
        return None;
    }
    // Work in f64 on a centered, scaled abscissa for conditioning.
    let tf: Vec<f64> = t.iter().map(|v| v.to_f64_lossy()).collect();
    let yf: Vec<f64> = y.iter().map(|v| v.to_f64_lossy()).collect();
    let mean = tf.iter().sum::<f64>() / tf.len() as f64;
    let span = tf.iter().fold(0.0_f64, |m, v| m.max((v - mean).abs())).max(f64::MIN_POSITIVE);
    let mut m = [[0.0_f64; 4]; 3];
    for (&ti, &yi) in tf.iter().zip(&yf) {
        let s = (ti - mean) / span;
        let basis = [1.0, s, s * s];
        for r in 0..3 {
            for c in 0..3 {
                m[r][c] += basis[r] * basis[c];
            }
            m[r][3] += basis[r] * yi;
        }
    }
    for col in 0..3 {
        let pivot = (col..3).max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))?;
        m.swap(col, pivot);
        if m[col][col].abs() < 1e-300 {
            return None;
        }
        for row in 0..3 {
            if row != col {
                let factor = m[row][col] / m[col][col];
                let pivot_row = m[col];
                for (x, p) in m[row].iter_mut().zip(pivot_row).skip(col) {
                    *x -= factor * p;
                }
            }
        }
    }
    let (a, b, c) = (m[0][3] / m[0][0], m[1][3] / m[1][1], m[2][3] / m[2][2]);
    // Undo the substitution s = (t - mean)/span.
    let c_t = c / (span * span);
    let b_t = b / span - 2.0 * c * mean / (span * span);
    let a_t = a - b * mean / span + c * mean * mean / (span * span);
    Some((T::lit(a_t), T::lit(b_t), T::lit(c_t)))
}

/// Positive root of `v0 - 2t·m0 + 2t²e0` when `e0 < 0` and `v0 > 0`.
pub fn variance_root<T: Real>(v0: T, m0: T, e0: T) -> Option<T> {
    if !(e0 < T::zero()) || !(v0 > T::zero()) {
        return None;
    }
    let two = T::lit(2.0);
    let a = two * e0;
    let b = -two * m0;
    let disc = b * b - T::lit(4.0) * a * v0;
    Some((-b - disc.sqrt()) / (a + a))
}

/// Evaluates the blow-up criterion on `φ`, then runs the configuration and
/// reports the abort time and the early-time variance curvature.
///
/// Defocusing or free configurations return immediately with
/// `criterion_met = false`.
pub fn glassey_experiment<T: Real>(cfg: &RunConfig<T>) -> Result<BlowupVerdict<T>> {
    cfg.validate()?;
    let nl = cfg.nonlinearity()?;
    if !nl.is_focusing() {
        let phi = make_initial(&cfg.initial, &cfg.grid()?)?;
        let mut verdict = criterion(cfg, &sample(&phi, &nl, T::zero()))?;
        verdict.message = "criterion not met: nonlinearity is not focusing (lambda >= 0)".into();
        return Ok(verdict);
    }
    blowup_verdict(cfg, &evolve(cfg)?)
}

/// The blow-up verdict for a run that has already been carried out.
pub fn blowup_verdict<T: Real>(cfg: &RunConfig<T>, series: &TimeSeries<T>) -> Result<BlowupVerdict<T>> {
    let s0 = series
        .samples
        .first()
        .ok_or(Error::InsufficientSamples { needed: 1, got: 0 })?;
    let mut verdict = criterion(cfg, s0)?;
    let end = match series.outcome {
        RunOutcome::BlowUp { t, .. } | RunOutcome::NonFinite { t } => {
            verdict.observed_abort_time = Some(t);
            t
        }
        RunOutcome::Completed => series.times.last().copied().unwrap_or(T::zero()),
    };
    let cutoff = end / T::lit(3.0);
    let (ts, vs): (Vec<T>, Vec<T>) = series
        .samples
        .iter()
        .filter(|s| s.t <= cutoff)
        .map(|s| (s.t, s.variance))
        .unzip();
    verdict.fit_samples = ts.len();
    if let Some((_, _, c)) = fit_quadratic(&ts, &vs) {
        verdict.variance_curvature_fit = c;
    }
    let met = verdict.criterion_met;
    verdict.message = match (met, verdict.observed_abort_time) {
        (true, Some(_)) => "blow-up criterion met; gradient-threshold abort observed".into(),
        (true, None) => "blow-up criterion met; no blow-up observed within horizon".into(),
        (false, Some(_)) => "criterion not met (E(phi) >= 0, p subcritical or lambda >= 0); abort observed anyway".into(),
        (false, None) => "criterion not met (E(phi) >= 0, p subcritical or lambda >= 0); no blow-up observed".into(),
    };
    Ok(verdict)
}

fn criterion<T: Real>(cfg: &RunConfig<T>, s0: &DiagnosticSample<T>) -> Result<BlowupVerdict<T>> {
    let nl = cfg.nonlinearity()?;
    let critical = Nonlinearity::<T>::mass_critical_exponent(cfg.dim);
    let p_ok = nl.p() >= critical - T::lit(1e-12);
    let criterion_met = nl.is_focusing() && p_ok && s0.energy < T::zero();
    Ok(BlowupVerdict {
        criterion_met,
        energy0: s0.energy,
        variance0: s0.variance,
        cross0: s0.cross,
        predicted_time_bound: if criterion_met { variance_root(s0.variance, s0.cross, s0.energy) } else { None },
        observed_abort_time: None,
        variance_curvature_fit: T::nan(),
        fit_samples: 0,
        message: String::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagnostics::sample;
    use crate::nonlinearity::Nonlinearity;

    fn grid() -> Grid<f64> {
        Grid::new(1, 512, 20.0).unwrap()
    }

    #[test]
    fn sech_and_gaussian_profiles() {
        let g = grid();
        let nl = Nonlinearity::new(-1.0, 3.0).unwrap();
        let u = make_initial(&ScenarioSpec::sech(1, 1.0, 1.0), &g).unwrap();
        assert!((u.norm_sq() - 2.0).abs() <= 1e-10);
        let v = make_initial(&ScenarioSpec::gaussian(1, 1.0, 1.0), &g).unwrap();
        let s = sample(&v, &nl, 0.0);
        assert!((s.variance - std::f64::consts::PI.sqrt() / 2.0).abs() <= 1e-10);
        assert!(s.momentum[0].abs() <= 1e-15);
    }

    #[test]
    fn unresolved_width_is_rejected() {
        let g = grid();
        let spec = ScenarioSpec::gaussian(1, 1.0, 0.3);
        assert!(matches!(make_initial(&spec, &g), Err(Error::Config(_))));
        let mut off = ScenarioSpec::gaussian(1, 1.0, 1.0);
        off.center = vec![25.0];
        assert!(make_initial(&off, &g).is_err());
        let wrong_dim = ScenarioSpec::gaussian(2, 1.0, 1.0);
        assert!(make_initial(&wrong_dim, &g).is_err());
    }

    #[test]
    fn boost_is_snapped_and_sets_momentum() {
        let g = grid();
        let spec = ScenarioSpec::boosted(vec![0.5]);
        let snapped = spec.snapped_velocity(&g)[0];
        let dk = std::f64::consts::PI / 20.0;
        assert!((snapped / dk - (snapped / dk).round()).abs() < 1e-12);
        assert!((snapped - 0.5).abs() <= dk / 2.0);
        let u = make_initial(&spec, &g).unwrap();
        let s = sample(&u, &Nonlinearity::new(-1.0, 3.0).unwrap(), 0.0);
        assert!((s.momentum[0] - snapped * s.charge).abs() <= 1e-10);
        assert!(make_initial(&ScenarioSpec::boosted(vec![0.0]), &g).is_err());
    }

    #[test]
    fn custom_field_length_checked() {
        let g = Grid::new(1, 8, 1.0).unwrap();
        let mut spec = ScenarioSpec::gaussian(1, 1.0, 1.0);
        spec.kind = ScenarioKind::Custom(vec![Complex::new(1.0, 0.0); 8]);
        assert!(make_initial(&spec, &g).is_ok());
        spec.kind = ScenarioKind::Custom(vec![Complex::new(1.0, 0.0); 7]);
        assert!(make_initial(&spec, &g).is_err());
    }

    #[test]
    fn soliton_exact_properties() {
        let g = grid();
        let nl = Nonlinearity::new(-1.0, 3.0).unwrap();
        let s0 = soliton_exact(0.0, &g).unwrap();
        for (z, &x) in s0.values().iter().zip(g.coords()) {
            assert!((z.re - 1.0 / x.cosh()).abs() < 1e-15 && z.im == 0.0);
        }
        for t in [0.3, 1.0, 7.5] {
            let u = soliton_exact(t, &g).unwrap();
            for (z, &x) in u.values().iter().zip(g.coords()) {
                assert!((z.norm() - 1.0 / x.cosh()).abs() < 1e-15);
            }
            let s = sample(&u, &nl, t);
            assert!((s.charge - 2.0).abs() <= 1e-10);
            assert!((s.energy + 1.0 / 3.0).abs() <= 1e-8);
            assert!((s.variance - std::f64::consts::PI.powi(2) / 6.0).abs() <= 1e-6);
        }
        assert!(soliton_exact(0.0, &Grid::new(2, 16, 5.0).unwrap()).is_err());
    }

    #[test]
    fn soliton_solves_the_equation() {
        // i u_t + ½ u_xx + |u|² u evaluated with spectral u_xx and exact u_t.
        let g = Grid::<f64>::new(1, 1024, 40.0).unwrap();
        let t = 0.8;
        let u = soliton_exact(t, &g).unwrap();
        let uxx = crate::grid::laplacian(&u);
        let i = Complex::new(0.0, 1.0);
        let worst = u
            .values()
            .iter()
            .zip(uxx.values())
            .map(|(&z, &d)| (i * (i * 0.5 * z) + 0.5 * d + z.norm_sqr() * z).norm())
            .fold(0.0_f64, f64::max);
        assert!(worst < 1e-10, "{worst}");
    }

    #[test]
    fn free_gaussian_exact_properties() {
        let g = grid();
        let phi = free_gaussian_exact(0.0, &g).unwrap();
        for (z, &x) in phi.values().iter().zip(g.coords()) {
            assert!((z.re - (-x * x / 2.0).exp()).abs() < 1e-15 && z.im.abs() < 1e-15);
        }
        let nl = Nonlinearity::free();
        for t in [0.5, 2.0] {
            let s = sample(&free_gaussian_exact(t, &g).unwrap(), &nl, t);
            let sp = std::f64::consts::PI.sqrt();
            assert!((s.charge - sp).abs() <= 1e-10);
            assert!((s.variance - sp / 2.0 * (1.0 + t * t)).abs() <= 1e-10);
        }
    }

    #[test]
    fn quadratic_fit_recovers_coefficients() {
        let t: Vec<f64> = (0..30).map(|k| 0.01 * k as f64).collect();
        let y: Vec<f64> = t.iter().map(|s| 1.5 - 0.3 * s - 12.0 * s * s).collect();
        let (a, b, c) = fit_quadratic(&t, &y).unwrap();
        assert!((a - 1.5).abs() < 1e-10 && (b + 0.3).abs() < 1e-9 && (c + 12.0).abs() < 1e-8);
        assert!(fit_quadratic(&t[..2], &y[..2]).is_none());
    }

    #[test]
    fn variance_root_cases() {
        let r = variance_root(2.0, 0.0, -0.5).unwrap();
        assert!((r - 2.0_f64.sqrt()).abs() < 1e-14);
        assert!(variance_root(2.0, 0.0, 0.5).is_none());
        let r: f64 = variance_root(1.0, 0.7, -1.0).unwrap();
        assert!((1.0 - 2.0 * r * 0.7 - 2.0 * r * r).abs() < 1e-14 && r > 0.0);
    }
}
