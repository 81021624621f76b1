//! Scalar functionals of a wavefunction, time quadratures on the diagnostic
//! sampling grid, and the residual evaluators of the conservation laws and
//! the virial family of identities.
//!
//! Scalar product convention: `(f, g) = ∫ f ḡ dx`. With it,
//! `cross = Im(xu, ∇u)`, `P = Im ∫ u ∇ū dx`, and the algebraic expansion
//! `‖J(t)u‖² = ‖xu‖² + 2t·Im(xu, ∇u) + t²‖∇u‖²` holds for any field.

use num_complex::Complex;

use crate::grid::{gradient, integrate, multiply_by_x, vector_norm_sq, Field};
use crate::nonlinearity::Nonlinearity;
use crate::scalar::Real;

/// Fraction of the box width, per side, treated as the boundary shell.
pub const BOUNDARY_SHELL_FRACTION: f64 = 0.05;

/// Every scalar functional at one time instant.
#[derive(Clone, Debug, PartialEq)]
pub struct DiagnosticSample<T: Real> {
    pub t: T,
    /// `I(u) = ‖u‖²`.
    pub charge: T,
    /// `½‖∇u‖²`.
    pub kinetic: T,
    /// `∫V(u)`.
    pub potential_int: T,
    /// `E(u) = ½‖∇u‖² + ∫V(u)`.
    pub energy: T,
    /// `P(u) = Im ∫ u ∇ū`, one entry per axis.
    pub momentum: Vec<T>,
    /// `‖xu‖²`.
    pub variance: T,
    /// `Im(xu, ∇u)`.
    pub cross: T,
    pub grad_norm2: T,
    /// `∫W(u)`.
    pub w_int: T,
    /// `‖J(t)u‖²`, computed directly from `x_j u + i t ∂_j u`.
    pub j_norm2: T,
    /// `∫|u|²` over the outer shell of the box.
    pub boundary_mass: T,
}

impl<T: Real> DiagnosticSample<T> {
    /// Relative defect of `‖J(t)u‖² = ‖xu‖² + 2t·cross + t²‖∇u‖²`.
    pub fn j_expansion_defect(&self) -> T {
        let t = self.t;
        let expanded = self.variance + (t + t) * self.cross + t * t * self.grad_norm2;
        (self.j_norm2 - expanded).abs() / self.j_norm2.abs().max(T::min_positive_value())
    }
}

/// Evaluates every functional of `u` at time `t`.
pub fn sample<T: Real>(u: &Field<T>, nl: &Nonlinearity<T>, t: T) -> DiagnosticSample<T> {
    let grid = u.grid();
    let dim = grid.dim();
    let du = gradient(u);
    let xu = multiply_by_x(u);

    let charge = u.norm_sq();
    let grad_norm2 = vector_norm_sq(&du);
    let kinetic = grad_norm2 / T::lit(2.0);
    let potential: Vec<T> = u.values().iter().map(|&z| nl.potential(z)).collect();
    let potential_int = integrate(grid, &potential);
    let w: Vec<T> = u.values().iter().map(|&z| nl.w_density(dim, z)).collect();
    let w_int = integrate(grid, &w);

    let momentum = du.iter().map(|d| u.inner(d).expect("same grid").im).collect();
    let cross = xu
        .iter()
        .zip(&du)
        .map(|(x, d)| x.inner(d).expect("same grid").im)
        .sum();
    let variance = vector_norm_sq(&xu);

    let it = Complex::new(T::zero(), t);
    let j_norm2 = xu
        .iter()
        .zip(&du)
        .map(|(x, d)| {
            x.values()
                .iter()
                .zip(d.values())
                .map(|(&a, &b)| (a + it * b).norm_sqr())
                .sum::<T>()
        })
        .sum::<T>()
        * grid.cell_volume();

    DiagnosticSample {
        t,
        charge,
        kinetic,
        potential_int,
        energy: kinetic + potential_int,
        momentum,
        variance,
        cross,
        grad_norm2,
        w_int,
        j_norm2,
        boundary_mass: boundary_mass(u),
    }
}

/// `∫|u|²` over points whose coordinate along some axis lies within the
/// outer 5% of the box on either side.
pub fn boundary_mass<T: Real>(u: &Field<T>) -> T {
    let grid = u.grid();
    let l = grid.half_width();
    let shell = T::lit(2.0 * BOUNDARY_SHELL_FRACTION) * l;
    let lower = -l + shell;
    let upper = l - shell;
    let sum: T = u
        .values()
        .iter()
        .enumerate()
        .filter(|(flat, _)| {
            (0..grid.dim()).any(|a| {
                let x = grid.coord(*flat, a);
                x < lower || x >= upper
            })
        })
        .map(|(_, z)| z.norm_sqr())
        .sum();
    sum * grid.cell_volume()
}

/// `C_n = ∫₀^{t_n} g` by the composite trapezoid rule, for every `n`.
pub fn cumulative_integral<T: Real>(g: &[T], h: T) -> Vec<T> {
    let half = h / T::lit(2.0);
    let mut out = Vec::with_capacity(g.len());
    let mut acc = T::zero();
    for (n, &value) in g.iter().enumerate() {
        if n > 0 {
            acc = acc + half * (g[n - 1] + value);
        }
        out.push(acc);
    }
    out
}

/// `∫₀^{t_n} s·g(s) ds` with the per-interval rule
/// `h · (t_n + t_{n+1})/2 · (g_n + g_{n+1})/2`.
///
/// This is the product-trapezoid rule: second order like the plain
/// trapezoid of `s·g`, and it satisfies the discrete summation by parts
/// `weighted = t·cumulative - nested` exactly.
pub fn weighted_integral<T: Real>(g: &[T], h: T) -> Vec<T> {
    let two = T::lit(2.0);
    let mut out = Vec::with_capacity(g.len());
    let mut acc = T::zero();
    for (n, &value) in g.iter().enumerate() {
        if n > 0 {
            let mid = h * (T::from_usize_lossy(n - 1) + T::from_usize_lossy(n)) / two;
            acc = acc + h * mid * (g[n - 1] + value) / two;
        }
        out.push(acc);
    }
    out
}

/// `∫₀^{t_n}∫₀^s g(τ) dτ ds`: trapezoid of the cumulative-trapezoid series.
pub fn nested_double_integral<T: Real>(g: &[T], h: T) -> Vec<T> {
    cumulative_integral(&cumulative_integral(g, h), h)
}

fn times<T: Real>(samples: &[DiagnosticSample<T>]) -> impl Iterator<Item = T> + '_ {
    samples.iter().map(|s| s.t)
}

fn w_series<T: Real>(samples: &[DiagnosticSample<T>]) -> Vec<T> {
    samples.iter().map(|s| s.w_int).collect()
}

/// Reference values taken from the `t = 0` sample.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InitialData<T: Real> {
    pub energy: T,
    pub variance: T,
    pub cross: T,
}

impl<T: Real> InitialData<T> {
    pub fn from_sample(s: &DiagnosticSample<T>) -> Self {
        Self { energy: s.energy, variance: s.variance, cross: s.cross }
    }
}

/// Virial residual
/// `‖xu‖² - [‖xφ‖² - 2t·M₀ + 2t²E(φ) - 2∫₀ᵗ∫₀ˢ∫W]`.
pub fn residual_virial<T: Real>(samples: &[DiagnosticSample<T>], h: T, init: &InitialData<T>) -> Vec<T> {
    let two = T::lit(2.0);
    let nested = nested_double_integral(&w_series(samples), h);
    samples
        .iter()
        .zip(nested)
        .map(|(s, n)| {
            let t = s.t;
            let rhs = init.variance - two * t * init.cross + two * t * t * init.energy - two * n;
            s.variance - rhs
        })
        .collect()
}

/// Pseudo-conformal residual
/// `‖J(t)u‖² + 2t²∫V - ‖xφ‖² - 2∫₀ᵗ s∫W ds`.
pub fn residual_pseudoconformal<T: Real>(samples: &[DiagnosticSample<T>], h: T, init: &InitialData<T>) -> Vec<T> {
    let two = T::lit(2.0);
    let weighted = weighted_integral(&w_series(samples), h);
    samples
        .iter()
        .zip(weighted)
        .map(|(s, w)| s.j_norm2 + two * s.t * s.t * s.potential_int - init.variance - two * w)
        .collect()
}

/// Residual of `Im(xu, ∇u) = Im(xφ, ∇φ) - 2tE(φ) + ∫₀ᵗ∫W ds`.
pub fn residual_cross_term<T: Real>(samples: &[DiagnosticSample<T>], h: T, init: &InitialData<T>) -> Vec<T> {
    let two = T::lit(2.0);
    let cumulative = cumulative_integral(&w_series(samples), h);
    samples
        .iter()
        .zip(cumulative)
        .map(|(s, c)| s.cross - init.cross + two * s.t * init.energy - c)
        .collect()
}

/// Residual of `‖J(t)u‖² + 2t²∫V = ‖xu‖² + 2t·Im(xu, ∇u) + 2t²E(φ)`; it
/// combines the exact algebraic expansion with energy conservation.
pub fn residual_expansion<T: Real>(samples: &[DiagnosticSample<T>], init: &InitialData<T>) -> Vec<T> {
    let two = T::lit(2.0);
    samples
        .iter()
        .map(|s| {
            let t = s.t;
            s.j_norm2 + two * t * t * s.potential_int - s.variance - two * t * s.cross - two * t * t * init.energy
        })
        .collect()
}

/// Deviations of charge, energy and momentum from their `t = 0` values.
#[derive(Clone, Debug, PartialEq)]
pub struct ConservationResiduals<T: Real> {
    pub charge: Vec<T>,
    pub energy: Vec<T>,
    /// Largest component deviation at each sample.
    pub momentum: Vec<T>,
    pub charge_relative: bool,
    pub energy_relative: bool,
    pub momentum_relative: bool,
}

/// Deviation from the initial value, divided by it when its magnitude
/// exceeds one.
pub fn residual_conservation<T: Real>(samples: &[DiagnosticSample<T>]) -> ConservationResiduals<T> {
    let Some(first) = samples.first() else {
        return ConservationResiduals {
            charge: vec![],
            energy: vec![],
            momentum: vec![],
            charge_relative: false,
            energy_relative: false,
            momentum_relative: false,
        };
    };
    let scale = |base: T| if base.abs() > T::one() { base.abs() } else { T::one() };
    let i_scale = scale(first.charge);
    let e_scale = scale(first.energy);
    let p_base = first.momentum.iter().fold(T::zero(), |m, &p| m.max(p.abs()));
    let p_scale = scale(p_base);
    ConservationResiduals {
        charge: samples.iter().map(|s| (s.charge - first.charge) / i_scale).collect(),
        energy: samples.iter().map(|s| (s.energy - first.energy) / e_scale).collect(),
        momentum: samples
            .iter()
            .map(|s| {
                s.momentum
                    .iter()
                    .zip(&first.momentum)
                    .fold(T::zero(), |m, (&a, &b)| m.max((a - b).abs()))
                    / p_scale
            })
            .collect(),
        charge_relative: i_scale > T::one(),
        energy_relative: e_scale > T::one(),
        momentum_relative: p_scale > T::one(),
    }
}

/// Residuals of the two differential identities on interior samples.
#[derive(Clone, Debug, PartialEq)]
pub struct OdeResiduals<T: Real> {
    pub times: Vec<T>,
    /// `d/dt‖xu‖² + 2 Im(xu, ∇u)`.
    pub eq15: Vec<T>,
    /// `d/dt Im(xu, ∇u) + ‖∇u‖² - ∫(W - 2V)`.
    pub eq16: Vec<T>,
}

/// Centered differences of the sampled series; endpoints are skipped.
///
/// The cross-term rate carries the potential:
/// `d/dt Im(xu, ∇u) = -‖∇u‖² + ∫(nV - nV'|u|/2) = -‖∇u‖² - 2∫V + ∫W`,
/// which is the time derivative of the integrated cross-term identity
/// under energy conservation.
pub fn residual_ode<T: Real>(samples: &[DiagnosticSample<T>], h: T) -> OdeResiduals<T> {
    let two_h = h + h;
    let mut out = OdeResiduals { times: vec![], eq15: vec![], eq16: vec![] };
    for w in samples.windows(3) {
        let (prev, mid, next) = (&w[0], &w[1], &w[2]);
        let d_var = (next.variance - prev.variance) / two_h;
        let d_cross = (next.cross - prev.cross) / two_h;
        out.times.push(mid.t);
        out.eq15.push(d_var + mid.cross + mid.cross);
        out.eq16.push(d_cross + mid.grad_norm2 - (mid.w_int - mid.potential_int - mid.potential_int));
    }
    out
}

/// Reconstructs the virial residual from the others:
/// `r_virial = r_pseudoconformal - r_expansion - 2t·r_cross`, exact given
/// the discrete summation by parts. Returns the discrepancy at each sample.
pub fn identity_chain_defect<T: Real>(samples: &[DiagnosticSample<T>], h: T, init: &InitialData<T>) -> Vec<T> {
    let two = T::lit(2.0);
    let virial = residual_virial(samples, h, init);
    let pc = residual_pseudoconformal(samples, h, init);
    let exp = residual_expansion(samples, init);
    let cross = residual_cross_term(samples, h, init);
    times(samples)
        .enumerate()
        .map(|(n, t)| virial[n] - (pc[n] - exp[n] - two * t * cross[n]))
        .collect()
}
