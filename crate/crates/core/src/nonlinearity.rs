//! Gauge-invariant power nonlinearity `f(u) = λ|u|^{p-1}u` and its
//! potential densities.
//!
//! With `V(z) = 2λ|z|^{p+1}/(p+1)` we have `V(0) = 0` and `f = ∂V/∂z̄`,
//! `V'(z) = 2λ|z|^p` (derivative in the modulus) and
//! `W(z) = (n+2)V(z) - nV'(z)|z|/2 = λ|z|^{p+1}(2(n+2) - n(p+1))/(p+1)`.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Nonlinearity<T: Real> {
    lambda: T,
    p: T,
}

impl<T: Real> Nonlinearity<T> {
    /// Requires `p > 1`; `lambda = 0` gives the free equation.
    pub fn new(lambda: T, p: T) -> Result<Self> {
        if !lambda.is_finite() {
            return Err(Error::Config(format!("lambda must be finite, got {lambda}")));
        }
        if !(p > T::one()) || !p.is_finite() {
            return Err(Error::Config(format!("exponent p must be finite and > 1, got {p}")));
        }
        Ok(Self { lambda, p })
    }

    /// Free equation, `λ = 0`.
    pub fn free() -> Self {
        Self { lambda: T::zero(), p: T::lit(3.0) }
    }

    pub fn lambda(&self) -> T {
        self.lambda
    }

    pub fn p(&self) -> T {
        self.p
    }

    /// Checks the energy-subcritical range `1 < p < 1 + 4/(n-2)_+`.
    pub fn validate_for_dim(&self, dim: usize) -> Result<()> {
        if dim >= 3 {
            let upper = T::one() + T::lit(4.0) / T::from_usize_lossy(dim - 2);
            if !(self.p < upper) {
                return Err(Error::Config(format!(
                    "exponent p = {} must be below {upper} in dimension {dim}",
                    self.p
                )));
            }
        }
        Ok(())
    }

    /// Mass-critical exponent `1 + 4/n`.
    pub fn mass_critical_exponent(dim: usize) -> T {
        T::one() + T::lit(4.0) / T::from_usize_lossy(dim)
    }

    pub fn is_focusing(&self) -> bool {
        self.lambda < T::zero()
    }

    /// `f(z) = λ|z|^{p-1}z`, with `f(0) = 0`.
    pub fn apply(&self, z: Complex<T>) -> Complex<T> {
        let r = z.norm();
        if r == T::zero() {
            return Complex::new(T::zero(), T::zero());
        }
        z * (self.lambda * r.powf(self.p - T::one()))
    }

    /// Real phase rate `λ|z|^{p-1}` such that `f(z) = rate·z`.
    pub fn phase_rate(&self, z: Complex<T>) -> T {
        let r = z.norm();
        if r == T::zero() {
            T::zero()
        } else {
            self.lambda * r.powf(self.p - T::one())
        }
    }

    /// `V(z) = 2λ|z|^{p+1}/(p+1)`.
    pub fn potential(&self, z: Complex<T>) -> T {
        let two = T::lit(2.0);
        two * self.lambda * z.norm().powf(self.p + T::one()) / (self.p + T::one())
    }

    /// `V'(z) = 2λ|z|^p`.
    pub fn potential_prime(&self, z: Complex<T>) -> T {
        T::lit(2.0) * self.lambda * z.norm().powf(self.p)
    }

    /// Closed form of `(n+2)V(z) - nV'(z)|z|/2`.
    pub fn w_density(&self, dim: usize, z: Complex<T>) -> T {
        let n = T::from_usize_lossy(dim);
        let two = T::lit(2.0);
        let coefficient = two * (n + two) - n * (self.p + T::one());
        self.lambda * z.norm().powf(self.p + T::one()) * coefficient / (self.p + T::one())
    }
}

/// Maximum violation of one pointwise identity over the sample set.
#[derive(Clone, Debug, PartialEq)]
pub struct IdentityCheck {
    pub name: &'static str,
    pub max_violation: f64,
    pub tolerance: f64,
}

impl IdentityCheck {
    pub fn passed(&self) -> bool {
        self.max_violation <= self.tolerance
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AssumptionReport {
    pub checks: Vec<IdentityCheck>,
}

impl AssumptionReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(IdentityCheck::passed)
    }
}

const GAUGE_ANGLES: [f64; 5] = [0.3, 1.1, 2.0, -2.7, std::f64::consts::PI];

/// Runs the structural checks on the concrete nonlinearity at the given
/// sample points:
///
/// * `Im(z̄ f(z)) = 0`;
/// * gauge covariance `f(e^{iθ}z) = e^{iθ}f(z)`;
/// * `f(z)z̄ = V'(z)|z|/2`;
/// * Wirtinger consistency `∂V/∂z̄ = f` by central differences;
/// * chain rule `d/ds V(z + s·w) = 2 Re(f(z) w̄)` along several directions.
///
/// Violations are relative to `1 + |f(z)||z|`. The finite-difference checks
/// use tolerance `1e-6`; the exact identities use `64ε`.
pub fn check_assumptions<T: Real>(
    nl: &Nonlinearity<T>,
    samples: &[Complex<T>],
) -> Result<AssumptionReport> {
    if samples.is_empty() {
        return Err(Error::InsufficientSamples { needed: 1, got: 0 });
    }
    let eps = T::epsilon().to_f64_lossy();
    let exact_tol = 64.0 * eps;
    let fd_tol = if eps < 1e-10 { 1e-6 } else { 1e-2 };

    let mut im_part = 0.0_f64;
    let mut gauge = 0.0_f64;
    let mut f_conj = 0.0_f64;
    let mut wirtinger = 0.0_f64;
    let mut chain = 0.0_f64;

    for &z in samples {
        let f = nl.apply(z);
        let scale = 1.0 + (f.norm() * z.norm()).to_f64_lossy();
        let fscale = 1.0 + f.norm().to_f64_lossy();

        im_part = im_part.max((z.conj() * f).im.abs().to_f64_lossy() / scale);

        for &theta in &GAUGE_ANGLES {
            let rot = Complex::from_polar(T::one(), T::lit(theta));
            let d = (nl.apply(rot * z) - rot * f).norm().to_f64_lossy();
            gauge = gauge.max(d / fscale);
        }

        let lhs = f * z.conj();
        let rhs = nl.potential_prime(z) * z.norm() / T::lit(2.0);
        f_conj = f_conj.max((lhs - Complex::new(rhs, T::zero())).norm().to_f64_lossy() / scale);

        let h = T::lit(1e-5) * T::one().max(z.norm());
        let two_h = h + h;
        let dv_dx = (nl.potential(z + Complex::new(h, T::zero()))
            - nl.potential(z - Complex::new(h, T::zero())))
            / two_h;
        let dv_dy = (nl.potential(z + Complex::new(T::zero(), h))
            - nl.potential(z - Complex::new(T::zero(), h)))
            / two_h;
        let dbar = Complex::new(dv_dx, dv_dy) / T::lit(2.0);
        wirtinger = wirtinger.max((dbar - f).norm().to_f64_lossy() / fscale);

        let directions = [
            Complex::new(T::one(), T::zero()),
            Complex::new(T::zero(), T::one()),
            Complex::new(T::lit(0.6), T::lit(-0.8)),
        ];
        for w in directions {
            let dvds = (nl.potential(z + w * h) - nl.potential(z - w * h)) / two_h;
            let expect = T::lit(2.0) * (f * w.conj()).re;
            chain = chain.max((dvds - expect).abs().to_f64_lossy() / fscale);
        }
    }

    let check = |name, max_violation, tolerance| IdentityCheck { name, max_violation, tolerance };
    Ok(AssumptionReport {
        checks: vec![
            check("gauge_reality", im_part, exact_tol),
            check("gauge_covariance", gauge, exact_tol),
            check("f_conj_v_prime", f_conj, exact_tol),
            check("wirtinger_potential", wirtinger, fd_tol),
            check("chain_rule", chain, fd_tol),
        ],
    })
}
