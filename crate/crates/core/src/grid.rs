//! Periodic box discretization, discrete Fourier transforms, spectral
//! differentiation, position weighting and rectangle-rule quadrature.
//!
//! Transform normalization: the forward transform is the unnormalized DFT
//! `û_m = Σ_j u_j e^{-i k_m x'_j}` and the inverse carries the full `1/N^dim`
//! factor, so that `inverse_transform(transform(u)) = u`. Discrete Parseval
//! then reads `dx^n Σ|u_j|² = (dx^n / N^n) Σ|û_m|²`.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Periodic box `[-L, L)^dim` sampled with `N` points per axis.
#[derive(Clone)]
pub struct Grid<T: Real> {
    inner: Arc<GridInner<T>>,
}

struct GridInner<T: Real> {
    dim: usize,
    points: usize,
    half_width: T,
    dx: T,
    coords: Vec<T>,
    freqs: Vec<T>,
    forward: Arc<dyn Fft<T>>,
    inverse: Arc<dyn Fft<T>>,
}

impl<T: Real> fmt::Debug for Grid<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("dim", &self.inner.dim)
            .field("points", &self.inner.points)
            .field("half_width", &self.inner.half_width)
            .finish()
    }
}

impl<T: Real> PartialEq for Grid<T> {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner)
            || (self.inner.dim == other.inner.dim
                && self.inner.points == other.inner.points
                && self.inner.half_width == other.inner.half_width)
    }
}

impl<T: Real> Grid<T> {
    /// Builds a grid. `dim` must be 1, 2 or 3, `points` a power of two no
    /// smaller than 8, and `half_width` positive and finite.
    pub fn new(dim: usize, points: usize, half_width: T) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::Config(format!("dimension must be 1, 2 or 3, got {dim}")));
        }
        if points < 8 || !points.is_power_of_two() {
            return Err(Error::Config(format!(
                "points per axis must be a power of two >= 8, got {points}"
            )));
        }
        if !(half_width > T::zero()) || !half_width.is_finite() {
            return Err(Error::Config(format!(
                "half_width must be positive and finite, got {half_width}"
            )));
        }
        let n = T::from_usize_lossy(points);
        let dx = (half_width + half_width) / n;
        let coords = (0..points)
            .map(|j| -half_width + T::from_usize_lossy(j) * dx)
            .collect();
        let dk = T::PI() / half_width;
        let freqs = (0..points)
            .map(|m| {
                if m < points / 2 {
                    T::from_usize_lossy(m) * dk
                } else {
                    -(T::from_usize_lossy(points - m)) * dk
                }
            })
            .collect();
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(points);
        let inverse = planner.plan_fft_inverse(points);
        Ok(Self {
            inner: Arc::new(GridInner {
                dim,
                points,
                half_width,
                dx,
                coords,
                freqs,
                forward,
                inverse,
            }),
        })
    }

    pub fn dim(&self) -> usize {
        self.inner.dim
    }

    pub fn points(&self) -> usize {
        self.inner.points
    }

    pub fn half_width(&self) -> T {
        self.inner.half_width
    }

    pub fn dx(&self) -> T {
        self.inner.dx
    }

    /// Volume element `dx^dim` of the rectangle rule.
    pub fn cell_volume(&self) -> T {
        self.inner.dx.powi(self.inner.dim as i32)
    }

    /// Axis coordinates `x_j = -L + j·dx`.
    pub fn coords(&self) -> &[T] {
        &self.inner.coords
    }

    /// Angular frequencies in standard FFT ordering (non-negative first).
    pub fn freqs(&self) -> &[T] {
        &self.inner.freqs
    }

    /// Largest representable angular frequency `πN/(2L)`.
    pub fn k_max(&self) -> T {
        T::PI() * T::from_usize_lossy(self.inner.points) / (self.inner.half_width + self.inner.half_width)
    }

    /// Total number of samples, `N^dim`.
    pub fn len(&self) -> usize {
        self.inner.points.pow(self.inner.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    fn stride(&self, axis: usize) -> usize {
        self.inner.points.pow((self.inner.dim - 1 - axis) as u32)
    }

    /// Index along `axis` of the flat (row-major) sample index.
    pub fn axis_index(&self, flat: usize, axis: usize) -> usize {
        (flat / self.stride(axis)) % self.inner.points
    }

    /// Coordinate along `axis` of the flat sample index.
    pub fn coord(&self, flat: usize, axis: usize) -> T {
        self.inner.coords[self.axis_index(flat, axis)]
    }

    /// `|x|²` at the flat sample index.
    pub fn radius_sq(&self, flat: usize) -> T {
        (0..self.inner.dim)
            .map(|a| {
                let x = self.coord(flat, a);
                x * x
            })
            .sum()
    }

    /// Angular frequency along `axis` at the flat spectral index.
    pub fn wavenumber(&self, flat: usize, axis: usize) -> T {
        self.inner.freqs[self.axis_index(flat, axis)]
    }

    /// `|k|²` at the flat spectral index.
    pub fn wavenumber_sq(&self, flat: usize) -> T {
        (0..self.inner.dim)
            .map(|a| {
                let k = self.wavenumber(flat, a);
                k * k
            })
            .sum()
    }

    /// First-derivative multiplier `i·k` along `axis`; zero on the Nyquist
    /// mode so derivatives of real fields stay real.
    fn derivative_multiplier(&self, flat: usize, axis: usize) -> Complex<T> {
        let m = self.axis_index(flat, axis);
        if m == self.inner.points / 2 {
            Complex::new(T::zero(), T::zero())
        } else {
            Complex::new(T::zero(), self.inner.freqs[m])
        }
    }

    fn fft_in_place(&self, data: &mut [Complex<T>], inverse: bool) {
        let n = self.inner.points;
        let plan = if inverse { &self.inner.inverse } else { &self.inner.forward };
        let mut scratch = vec![Complex::new(T::zero(), T::zero()); plan.get_inplace_scratch_len()];
        for axis in 0..self.inner.dim {
            let stride = self.stride(axis);
            if stride == 1 {
                plan.process_with_scratch(data, &mut scratch);
                continue;
            }
            let block = n * stride;
            let mut line = vec![Complex::new(T::zero(), T::zero()); n];
            for outer in 0..data.len() / block {
                for inner in 0..stride {
                    let base = outer * block + inner;
                    for (j, slot) in line.iter_mut().enumerate() {
                        *slot = data[base + j * stride];
                    }
                    plan.process_with_scratch(&mut line, &mut scratch);
                    for (j, value) in line.iter().enumerate() {
                        data[base + j * stride] = *value;
                    }
                }
            }
        }
        if inverse {
            let scale = T::one() / T::from_usize_lossy(self.len());
            for z in data.iter_mut() {
                *z = *z * scale;
            }
        }
    }

    /// Applies the Fourier multiplier `m(flat)` to `values` and returns the
    /// result in physical space.
    pub(crate) fn apply_multiplier<F>(&self, values: &[Complex<T>], multiplier: F) -> Vec<Complex<T>>
    where
        F: Fn(usize) -> Complex<T>,
    {
        let mut data = values.to_vec();
        self.fft_in_place(&mut data, false);
        for (flat, z) in data.iter_mut().enumerate() {
            *z = *z * multiplier(flat);
        }
        self.fft_in_place(&mut data, true);
        data
    }
}

/// Complex wavefunction sampled on a [`Grid`], stored row-major over axes.
#[derive(Clone, Debug, PartialEq)]
pub struct Field<T: Real> {
    grid: Grid<T>,
    values: Vec<Complex<T>>,
}

/// Spectral coefficients of a [`Field`] in FFT ordering.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum<T: Real> {
    grid: Grid<T>,
    values: Vec<Complex<T>>,
}

impl<T: Real> Field<T> {
    /// Wraps sample values, rejecting wrong lengths and non-finite entries.
    pub fn new(grid: &Grid<T>, values: Vec<Complex<T>>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Config(format!(
                "field has {} values, grid expects {}",
                values.len(),
                grid.len()
            )));
        }
        if let Some(j) = values.iter().position(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::NonFinite(format!("field value at index {j}")));
        }
        Ok(Self { grid: grid.clone(), values })
    }

    /// Internal constructor for values produced by finite-preserving maps.
    pub(crate) fn from_raw(grid: &Grid<T>, values: Vec<Complex<T>>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid: grid.clone(), values }
    }

    pub fn zeros(grid: &Grid<T>) -> Self {
        Self::from_raw(grid, vec![Complex::new(T::zero(), T::zero()); grid.len()])
    }

    /// Samples `f(x)` at every grid point; `x` has one entry per axis.
    pub fn from_fn<F>(grid: &Grid<T>, f: F) -> Result<Self>
    where
        F: Fn(&[T]) -> Complex<T>,
    {
        let mut x = vec![T::zero(); grid.dim()];
        let values = (0..grid.len())
            .map(|flat| {
                for (axis, xa) in x.iter_mut().enumerate() {
                    *xa = grid.coord(flat, axis);
                }
                f(&x)
            })
            .collect();
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    pub fn values(&self) -> &[Complex<T>] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex<T>> {
        self.values
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Pointwise map; the closure receives the flat index and the value.
    pub fn map<F>(&self, f: F) -> Self
    where
        F: Fn(usize, Complex<T>) -> Complex<T>,
    {
        let values = self.values.iter().enumerate().map(|(j, &z)| f(j, z)).collect();
        Self::from_raw(&self.grid, values)
    }

    /// Pointwise combination of two fields on the same grid.
    pub fn zip_map<F>(&self, other: &Self, f: F) -> Result<Self>
    where
        F: Fn(Complex<T>, Complex<T>) -> Complex<T>,
    {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Ok(Self::from_raw(&self.grid, values))
    }

    pub fn scale(&self, factor: Complex<T>) -> Self {
        self.map(|_, z| z * factor)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_map(other, |a, b| a - b)
    }

    /// `|u|²` at every sample.
    pub fn modulus_sq(&self) -> Vec<T> {
        self.values.iter().map(|z| z.norm_sqr()).collect()
    }

    /// Discrete `‖u‖²_{L²}` by the rectangle rule.
    pub fn norm_sq(&self) -> T {
        self.grid.cell_volume() * self.values.iter().map(|z| z.norm_sqr()).sum::<T>()
    }

    pub fn norm(&self) -> T {
        self.norm_sq().sqrt()
    }

    /// Largest pointwise modulus.
    pub fn max_abs(&self) -> T {
        self.values.iter().fold(T::zero(), |m, z| m.max(z.norm()))
    }

    /// Discrete scalar product `(u, v) = ∫ u v̄ dx`.
    pub fn inner(&self, other: &Self) -> Result<Complex<T>> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        let sum = self
            .values
            .iter()
            .zip(&other.values)
            .fold(Complex::new(T::zero(), T::zero()), |acc, (a, b)| acc + a * b.conj());
        Ok(sum * self.grid.cell_volume())
    }
}

impl<T: Real> Spectrum<T> {
    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    pub fn values(&self) -> &[Complex<T>] {
        &self.values
    }

    /// Spectral Parseval sum `(dx^n / N^n) Σ|û|²`, equal to the field's
    /// discrete `L²` norm squared.
    pub fn norm_sq(&self) -> T {
        let total = T::from_usize_lossy(self.grid.len());
        self.grid.cell_volume() / total * self.values.iter().map(|z| z.norm_sqr()).sum::<T>()
    }
}

/// Forward (unnormalized) discrete Fourier transform.
pub fn transform<T: Real>(field: &Field<T>) -> Spectrum<T> {
    let mut values = field.values.clone();
    field.grid.fft_in_place(&mut values, false);
    Spectrum { grid: field.grid.clone(), values }
}

/// Inverse transform carrying the `1/N^dim` normalization.
pub fn inverse_transform<T: Real>(spectrum: &Spectrum<T>) -> Field<T> {
    let mut values = spectrum.values.clone();
    spectrum.grid.fft_in_place(&mut values, true);
    Field::from_raw(&spectrum.grid, values)
}

/// Spectral gradient, one field per axis.
pub fn gradient<T: Real>(field: &Field<T>) -> Vec<Field<T>> {
    let grid = field.grid();
    let mut spectrum = field.values.clone();
    grid.fft_in_place(&mut spectrum, false);
    (0..grid.dim())
        .map(|axis| {
            let mut data: Vec<Complex<T>> = spectrum
                .iter()
                .enumerate()
                .map(|(flat, &z)| z * grid.derivative_multiplier(flat, axis))
                .collect();
            grid.fft_in_place(&mut data, true);
            Field::from_raw(grid, data)
        })
        .collect()
}

/// Spectral Laplacian `-|k|² û`.
pub fn laplacian<T: Real>(field: &Field<T>) -> Field<T> {
    let grid = field.grid();
    let values = grid.apply_multiplier(field.values(), |flat| {
        Complex::new(-grid.wavenumber_sq(flat), T::zero())
    });
    Field::from_raw(grid, values)
}

/// Position weighting: component `j` is `x_j·u`.
pub fn multiply_by_x<T: Real>(field: &Field<T>) -> Vec<Field<T>> {
    let grid = field.grid();
    (0..grid.dim())
        .map(|axis| field.map(|flat, z| z * grid.coord(flat, axis)))
        .collect()
}

/// Rectangle-rule integral `dx^n Σ density_j`.
pub fn integrate<T: Real>(grid: &Grid<T>, density: &[T]) -> T {
    debug_assert_eq!(density.len(), grid.len());
    grid.cell_volume() * density.iter().copied().sum::<T>()
}

/// `Σ_j ‖F_j‖²` over the components of a vector field.
pub fn vector_norm_sq<T: Real>(components: &[Field<T>]) -> T {
    components.iter().map(Field::norm_sq).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid1(n: usize, l: f64) -> Grid<f64> {
        Grid::new(1, n, l).unwrap()
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(Grid::<f64>::new(0, 8, 1.0).is_err());
        assert!(Grid::<f64>::new(4, 8, 1.0).is_err());
        assert!(Grid::<f64>::new(1, 4, 1.0).is_err());
        assert!(Grid::<f64>::new(1, 12, 1.0).is_err());
        assert!(Grid::<f64>::new(1, 8, 0.0).is_err());
        assert!(Grid::<f64>::new(1, 8, -2.0).is_err());
        assert!(Grid::<f64>::new(1, 8, f64::NAN).is_err());
    }

    #[test]
    fn coordinates_of_small_grid() {
        let g = grid1(8, 4.0);
        assert_eq!(g.dx(), 1.0);
        assert_eq!(g.coords(), &[-4.0, -3.0, -2.0, -1.0, 0.0, 1.0, 2.0, 3.0]);
    }

    #[test]
    fn frequency_spacing_is_pi_over_l() {
        let g = grid1(8, std::f64::consts::PI);
        let freqs = g.freqs();
        assert_eq!(freqs.iter().filter(|&&k| k == 0.0).count(), 1);
        for &k in freqs {
            assert!((k - k.round()).abs() < 1e-14, "{k}");
        }
        assert!(freqs.contains(&1.0) && freqs.contains(&-1.0));
        assert!((g.k_max() - 4.0).abs() < 1e-14);
    }

    #[test]
    fn two_dimensional_length() {
        let g = Grid::<f64>::new(2, 16, 10.0).unwrap();
        assert_eq!(g.len(), 256);
        assert_eq!(Field::zeros(&g).values().len(), 256);
    }

    #[test]
    fn field_rejects_non_finite() {
        let g = grid1(8, 1.0);
        let mut v = vec![Complex::new(0.0, 0.0); 8];
        v[3] = Complex::new(f64::NAN, 0.0);
        assert!(matches!(Field::new(&g, v), Err(Error::NonFinite(_))));
        assert!(Field::new(&g, vec![Complex::new(0.0, 0.0); 7]).is_err());
    }

    #[test]
    fn constant_has_only_dc() {
        let g = Grid::<f64>::new(2, 8, 3.0).unwrap();
        let u = Field::from_fn(&g, |_| Complex::new(2.5, -1.0)).unwrap();
        let s = transform(&u);
        assert!((s.values()[0] - Complex::new(2.5 * 64.0, -64.0)).norm() < 1e-12);
        assert!(s.values()[1..].iter().all(|z| z.norm() < 1e-12));
    }

    #[test]
    fn gradient_of_constant_vanishes() {
        let g = Grid::<f64>::new(3, 8, 2.0).unwrap();
        let u = Field::from_fn(&g, |_| Complex::new(1.0, 1.0)).unwrap();
        for c in gradient(&u) {
            assert!(c.max_abs() < 1e-14);
        }
    }

    #[test]
    fn gradient_of_sine_mode() {
        let l = 5.0;
        let g = grid1(64, l);
        let k0 = std::f64::consts::PI / l;
        let u = Field::from_fn(&g, |x| Complex::new((k0 * x[0]).sin(), 0.0)).unwrap();
        let du = &gradient(&u)[0];
        for (j, z) in du.values().iter().enumerate() {
            let expect = k0 * (k0 * g.coords()[j]).cos();
            assert!((z.re - expect).abs() < 1e-10 && z.im.abs() < 1e-12);
        }
    }

    #[test]
    fn gradient_of_gaussian() {
        let g = grid1(512, 20.0);
        let u = Field::from_fn(&g, |x| Complex::new((-x[0] * x[0] / 2.0).exp(), 0.0)).unwrap();
        let du = &gradient(&u)[0];
        for (j, z) in du.values().iter().enumerate() {
            let x = g.coords()[j];
            assert!((z.re + x * (-x * x / 2.0).exp()).abs() < 1e-10);
        }
    }

    #[test]
    fn gradient_per_axis_in_3d() {
        let g = Grid::<f64>::new(3, 16, std::f64::consts::PI).unwrap();
        let u = Field::from_fn(&g, |x| Complex::new(x[0].sin() * (2.0 * x[1]).cos(), x[2].sin())).unwrap();
        let du = gradient(&u);
        for flat in 0..g.len() {
            let (x, y, z) = (g.coord(flat, 0), g.coord(flat, 1), g.coord(flat, 2));
            let d0 = Complex::new(x.cos() * (2.0 * y).cos(), 0.0);
            let d1 = Complex::new(-2.0 * x.sin() * (2.0 * y).sin(), 0.0);
            let d2 = Complex::new(0.0, z.cos());
            assert!((du[0].values()[flat] - d0).norm() < 1e-12);
            assert!((du[1].values()[flat] - d1).norm() < 1e-12);
            assert!((du[2].values()[flat] - d2).norm() < 1e-12);
        }
    }

    #[test]
    fn multiply_by_x_of_one_is_coordinates() {
        let g = grid1(16, 3.0);
        let u = Field::from_fn(&g, |_| Complex::new(1.0, 0.0)).unwrap();
        let xu = &multiply_by_x(&u)[0];
        for (z, &x) in xu.values().iter().zip(g.coords()) {
            assert_eq!(z.re, x);
        }
    }

    #[test]
    fn even_field_gives_odd_moment() {
        let g = grid1(256, 10.0);
        let u = Field::from_fn(&g, |x| Complex::new((-x[0] * x[0]).exp(), 0.0)).unwrap();
        let xu = &multiply_by_x(&u)[0];
        let first: Vec<f64> = xu.values().iter().map(|z| z.re).collect();
        assert!(integrate(&g, &first).abs() < 1e-14);
    }

    #[test]
    fn weighted_gaussian_norm() {
        let g = grid1(512, 20.0);
        let u = Field::from_fn(&g, |x| Complex::new((-x[0] * x[0]).exp(), 0.0)).unwrap();
        let expect = (std::f64::consts::PI / 2.0).sqrt() / 4.0;
        assert!((vector_norm_sq(&multiply_by_x(&u)) - expect).abs() < 1e-12);
    }

    #[test]
    fn integrate_constant_and_sech_powers() {
        let g = Grid::<f64>::new(2, 8, 1.5).unwrap();
        assert!((integrate(&g, &vec![1.0; g.len()]) - 9.0).abs() < 1e-12);

        let g = grid1(512, 20.0);
        let sech2: Vec<f64> = g.coords().iter().map(|x| x.cosh().powi(-2)).collect();
        let sech4: Vec<f64> = sech2.iter().map(|s| s * s).collect();
        assert!((integrate(&g, &sech2) - 2.0).abs() < 1e-10);
        assert!((integrate(&g, &sech4) - 4.0 / 3.0).abs() < 1e-10);
    }

    #[test]
    fn works_in_single_precision() {
        let g = Grid::<f32>::new(1, 64, 10.0).unwrap();
        let u = Field::from_fn(&g, |x| Complex::new((-x[0] * x[0]).exp(), 0.0)).unwrap();
        let back = inverse_transform(&transform(&u));
        let err = back.sub(&u).unwrap().max_abs();
        assert!(err < 1e-5, "{err}");
    }
}
