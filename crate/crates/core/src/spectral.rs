//! Real profiles on a truncated symmetric domain `[-L, L)` and their discrete
//! Fourier coefficients.
//!
//! Coefficient convention: for grid index `j` (FFT ordering) with wavenumber
//! `k_j = j' pi / L`, `j' = j` for `j < N/2` and `j - N` otherwise,
//!
//! ```text
//! coeffs[j] = (1/N) sum_n f(x_n) exp(-i k_j x_n),   x_n = -L + n h,
//! ```
//!
//! so that `coeffs[j] ~ (pi / L) * fhat(k_j)` where
//! `fhat(k) = (1/2pi) * integral f(x) exp(-ikx) dx`. The sampled values are
//! recovered exactly by `f(x_n) = sum_j coeffs[j] exp(i k_j x_n)`.

use std::fmt;
use std::ops::{Add, Mul, Sub};
use std::sync::Arc;

use num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Relative size of `|f(+-L)|` beyond which quadrature on the truncated
/// domain no longer represents the whole-line integral.
pub const BOUNDARY_DECAY_TOL: f64 = 1e-9;

/// Uniform grid on `[-L, L)` with `N` points and cached FFT plans.
#[derive(Clone)]
pub struct Grid<T: Scalar> {
    half_length: T,
    n: usize,
    forward: Arc<dyn Fft<T>>,
    inverse: Arc<dyn Fft<T>>,
}

impl<T: Scalar> fmt::Debug for Grid<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("half_length", &self.half_length)
            .field("n", &self.n)
            .finish()
    }
}

impl<T: Scalar> PartialEq for Grid<T> {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.half_length == other.half_length
    }
}

impl<T: Scalar> Grid<T> {
    /// `n` must be a power of two, at least 8.
    pub fn new(half_length: T, n: usize) -> Result<Self> {
        if !(half_length > T::zero()) || !half_length.is_finite() {
            return Err(Error::InvalidGrid {
                reason: format!("half length must be positive, got {half_length}"),
            });
        }
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::InvalidGrid {
                reason: format!("N must be a power of two >= 8, got {n}"),
            });
        }
        let mut planner = FftPlanner::new();
        Ok(Self {
            half_length,
            n,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        })
    }

    pub fn half_length(&self) -> T {
        self.half_length
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn spacing(&self) -> T {
        T::lit(2.0) * self.half_length / T::from_usize_exact(self.n)
    }

    /// Spacing between neighbouring wavenumbers, `pi / L`.
    pub fn dk(&self) -> T {
        T::PI() / self.half_length
    }

    pub fn x(&self, j: usize) -> T {
        -self.half_length + T::from_usize_exact(j) * self.spacing()
    }

    pub fn points(&self) -> Vec<T> {
        (0..self.n).map(|j| self.x(j)).collect()
    }

    /// Signed mode number of FFT index `j`.
    pub fn mode(&self, j: usize) -> i64 {
        if j < self.n / 2 {
            j as i64
        } else {
            j as i64 - self.n as i64
        }
    }

    pub fn wavenumber(&self, j: usize) -> T {
        T::from_i64(self.mode(j)).expect("mode fits") * self.dk()
    }

    pub fn wavenumbers(&self) -> Vec<T> {
        (0..self.n).map(|j| self.wavenumber(j)).collect()
    }

    pub fn nyquist(&self) -> usize {
        self.n / 2
    }

    /// FFT index of mode `m` (negative modes wrap).
    pub fn index_of_mode(&self, m: i64) -> Option<usize> {
        let half = (self.n / 2) as i64;
        if m >= half || m < -half {
            None
        } else if m >= 0 {
            Some(m as usize)
        } else {
            Some((m + self.n as i64) as usize)
        }
    }

    /// Index of `k` when `k L / pi` is within `tol` of an integer.
    pub fn index_of_frequency(&self, k: T, tol: T) -> Option<usize> {
        let m = k / self.dk();
        let r = m.round();
        if (m - r).abs() <= tol {
            self.index_of_mode(r.to_i64()?)
        } else {
            None
        }
    }

    /// Forward transform under the module's coefficient convention.
    pub fn transform(&self, values: &[T]) -> Result<Vec<Complex<T>>> {
        if values.len() != self.n {
            return Err(Error::SizeMismatch {
                expected: self.n,
                got: values.len(),
            });
        }
        let mut buf: Vec<Complex<T>> = values.iter().map(|&v| Complex::new(v, T::zero())).collect();
        self.forward.process(&mut buf);
        let scale = T::one() / T::from_usize_exact(self.n);
        for (j, c) in buf.iter_mut().enumerate() {
            // exp(i k_j L) = (-1)^j because k_j L = j' pi and N is even.
            let s = if j % 2 == 0 { scale } else { -scale };
            *c *= s;
        }
        Ok(buf)
    }

    /// Inverse of [`Grid::transform`]; the imaginary part is discarded.
    pub fn inverse_transform(&self, coeffs: &[Complex<T>]) -> Result<Vec<T>> {
        if coeffs.len() != self.n {
            return Err(Error::SizeMismatch {
                expected: self.n,
                got: coeffs.len(),
            });
        }
        let mut buf: Vec<Complex<T>> = coeffs
            .iter()
            .enumerate()
            .map(|(j, &c)| if j % 2 == 0 { c } else { -c })
            .collect();
        self.inverse.process(&mut buf);
        Ok(buf.into_iter().map(|c| c.re).collect())
    }
}

/// A real profile on a [`Grid`] with its cached Fourier coefficients.
///
/// Values and coefficients are kept consistent at all times; every operation
/// returns a new field.
#[derive(Clone)]
pub struct SpectralField<T: Scalar> {
    grid: Grid<T>,
    values: Vec<T>,
    coeffs: Vec<Complex<T>>,
}

impl<T: Scalar> fmt::Debug for SpectralField<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpectralField")
            .field("grid", &self.grid)
            .field("max_abs", &self.max_abs())
            .finish()
    }
}

impl<T: Scalar> SpectralField<T> {
    pub fn from_values(grid: &Grid<T>, values: Vec<T>) -> Result<Self> {
        let coeffs = grid.transform(&values)?;
        Ok(Self {
            grid: grid.clone(),
            values,
            coeffs,
        })
    }

    /// Builds a field from coefficients; the Nyquist mode and any imaginary
    /// residue of the inverse transform are dropped.
    pub fn from_coeffs(grid: &Grid<T>, mut coeffs: Vec<Complex<T>>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(Error::SizeMismatch {
                expected: grid.len(),
                got: coeffs.len(),
            });
        }
        coeffs[grid.nyquist()] = Complex::new(T::zero(), T::zero());
        let values = grid.inverse_transform(&coeffs)?;
        Ok(Self {
            grid: grid.clone(),
            values,
            coeffs,
        })
    }

    /// Pairs samples with independently known coefficients. The caller is
    /// responsible for their agreement; only the Nyquist mode is zeroed.
    pub(crate) fn from_parts(grid: &Grid<T>, values: Vec<T>, mut coeffs: Vec<Complex<T>>) -> Result<Self> {
        for len in [values.len(), coeffs.len()] {
            if len != grid.len() {
                return Err(Error::SizeMismatch {
                    expected: grid.len(),
                    got: len,
                });
            }
        }
        coeffs[grid.nyquist()] = Complex::new(T::zero(), T::zero());
        Ok(Self {
            grid: grid.clone(),
            values,
            coeffs,
        })
    }

    pub fn from_fn(grid: &Grid<T>, f: impl Fn(T) -> T) -> Self {
        let values = grid.points().into_iter().map(f).collect();
        Self::from_values(grid, values).expect("sizes agree by construction")
    }

    pub fn zeros(grid: &Grid<T>) -> Self {
        Self {
            grid: grid.clone(),
            values: vec![T::zero(); grid.len()],
            coeffs: vec![Complex::new(T::zero(), T::zero()); grid.len()],
        }
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn coeffs(&self) -> &[Complex<T>] {
        &self.coeffs
    }

    pub fn value_at_index(&self, j: usize) -> T {
        self.values[j]
    }

    /// Sample nearest the origin (index `N/2`).
    pub fn center_value(&self) -> T {
        self.values[self.grid.len() / 2]
    }

    pub fn max_abs(&self) -> T {
        self.values.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    /// `a * self + b * other`, applied to values and coefficients alike.
    pub fn lincomb(&self, a: T, other: &Self, b: T) -> Self {
        assert_eq!(self.grid, other.grid, "fields live on different grids");
        Self {
            grid: self.grid.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&x, &y)| a * x + b * y)
                .collect(),
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(&x, &y)| x * a + y * b)
                .collect(),
        }
    }

    pub fn scale(&self, s: T) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.iter().map(|&v| v * s).collect(),
            coeffs: self.coeffs.iter().map(|&c| c * s).collect(),
        }
    }

    /// Pointwise map; coefficients are recomputed.
    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self::from_values(&self.grid, self.values.iter().map(|&v| f(v)).collect())
            .expect("sizes agree by construction")
    }

    /// Pointwise product.
    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.grid, other.grid, "fields live on different grids");
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&x, &y)| x * y)
            .collect();
        Self::from_values(&self.grid, values).expect("sizes agree by construction")
    }

    pub fn square(&self) -> Self {
        self.mul(self)
    }

    /// Multiplies coefficient `j` by `symbol(k_j)` and zeroes the Nyquist mode.
    pub fn apply_multiplier(&self, symbol: impl Fn(T) -> T) -> Result<Self> {
        let mut coeffs = self.coeffs.clone();
        for (j, c) in coeffs.iter_mut().enumerate() {
            let k = self.grid.wavenumber(j);
            let s = symbol(k);
            if !s.is_finite() {
                return Err(Error::NonFiniteSymbol { k: k.to_f64_lossy() });
            }
            *c *= s;
        }
        Self::from_coeffs(&self.grid, coeffs)
    }

    /// Multiplier given by precomputed symbol values in FFT order.
    pub fn apply_symbol_table(&self, table: &[T]) -> Result<Self> {
        if table.len() != self.grid.len() {
            return Err(Error::SizeMismatch {
                expected: self.grid.len(),
                got: table.len(),
            });
        }
        let coeffs = self.coeffs.iter().zip(table).map(|(&c, &s)| c * s).collect();
        Self::from_coeffs(&self.grid, coeffs)
    }

    /// Spectral derivative of the given order.
    pub fn derivative(&self, order: u32) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(j, &c)| {
                let ik = Complex::new(T::zero(), self.grid.wavenumber(j));
                c * ik.powu(order)
            })
            .collect();
        Self::from_coeffs(&self.grid, coeffs).expect("sizes agree by construction")
    }

    /// `max_j |f_j - f_{N-j}| / max |f|` (zero for the zero field).
    pub fn asymmetry(&self) -> T {
        let n = self.grid.len();
        let scale = self.max_abs();
        if scale == T::zero() {
            return T::zero();
        }
        let mut worst = T::zero();
        for j in 1..n {
            worst = worst.max((self.values[j] - self.values[n - j]).abs());
        }
        worst / scale
    }

    pub fn is_even(&self, tol: T) -> bool {
        self.asymmetry() <= tol
    }

    /// Even part `(f(x) + f(-x)) / 2`.
    pub fn symmetrized(&self) -> Self {
        let n = self.grid.len();
        let half = T::lit(0.5);
        let mut values = self.values.clone();
        for j in 1..n {
            values[j] = half * (self.values[j] + self.values[n - j]);
        }
        Self::from_values(&self.grid, values).expect("sizes agree by construction")
    }

    /// `|f(+-L)| / max|f|`.
    pub fn boundary_ratio(&self) -> T {
        let scale = self.max_abs();
        if scale == T::zero() {
            return T::zero();
        }
        let n = self.grid.len();
        // x_0 = -L; the periodic image of +L is the same sample, and x_{N-1}
        // is the last sample before it.
        self.values[0].abs().max(self.values[n - 1].abs()) / scale
    }

    pub fn check_boundary_decay(&self) -> Result<()> {
        let ratio = self.boundary_ratio();
        if ratio > T::lit(BOUNDARY_DECAY_TOL) {
            Err(Error::BoundaryNotDecayed {
                ratio: ratio.to_f64_lossy(),
            })
        } else {
            Ok(())
        }
    }

    /// Trapezoidal approximation of `(1/2pi) integral f(x) exp(-iKx) dx` at an
    /// arbitrary frequency `K`.
    pub fn coeff_at(&self, big_k: T) -> Result<Complex<T>> {
        self.check_boundary_decay()?;
        Ok(self.coeff_at_unchecked(big_k))
    }

    pub(crate) fn coeff_at_unchecked(&self, big_k: T) -> Complex<T> {
        let h = self.grid.spacing();
        let mut re = T::zero();
        let mut im = T::zero();
        for (j, &v) in self.values.iter().enumerate() {
            let phase = big_k * self.grid.x(j);
            re += v * phase.cos();
            im -= v * phase.sin();
        }
        let s = h / (T::lit(2.0) * T::PI());
        Complex::new(re * s, im * s)
    }

    /// Real transform of an even field at `K`; fails if the imaginary part is
    /// above `1e-12` of the integral's absolute bound.
    pub fn even_coeff_at(&self, big_k: T) -> Result<T> {
        let c = self.coeff_at(big_k)?;
        let bound = self.grid.spacing() / (T::lit(2.0) * T::PI())
            * self.values.iter().fold(T::zero(), |s, v| s + v.abs());
        if c.im.abs() > T::lit(1e-12) * bound.max(T::min_positive_value()) {
            return Err(Error::NotEven {
                asymmetry: self.asymmetry().to_f64_lossy(),
            });
        }
        Ok(c.re)
    }

    /// `fhat(k_j)` read from the cached coefficients, `(L/pi) * coeffs[j]`.
    pub fn grid_transform(&self, j: usize) -> Complex<T> {
        self.coeffs[j] * (self.grid.half_length() / T::PI())
    }

    /// `||cosh^q(x) f||_{H^r}` in the discrete norm
    /// `sqrt(2L * sum_j (1 + k_j^2)^r |c_j|^2)`, which for `r = q = 0` equals
    /// `sqrt(h * sum_n f_n^2)`.
    pub fn weighted_norm(&self, norm: WeightedNorm<T>) -> Result<T> {
        let big_l = self.grid.half_length();
        if norm.q * big_l > T::lit(600.0) {
            return Err(Error::WeightOverflow {
                product: (norm.q * big_l).to_f64_lossy(),
            });
        }
        let coeffs = if norm.q == T::zero() {
            self.coeffs.clone()
        } else {
            let weighted: Vec<T> = self
                .grid
                .points()
                .into_iter()
                .zip(&self.values)
                .map(|(x, &v)| x.cosh().powf(norm.q) * v)
                .collect();
            self.grid.transform(&weighted)?
        };
        let mut sum = T::zero();
        for (j, c) in coeffs.iter().enumerate() {
            let k = self.grid.wavenumber(j);
            let w = if norm.r == T::zero() {
                T::one()
            } else {
                (T::one() + k * k).powf(norm.r)
            };
            sum += w * c.norm_sqr();
        }
        Ok((T::lit(2.0) * big_l * sum).sqrt())
    }

    /// Unweighted `L^2` norm, `||f||_{0,0}`.
    pub fn l2_norm(&self) -> T {
        self.weighted_norm(WeightedNorm::l2()).expect("q = 0 never overflows")
    }
}

impl<T: Scalar> Add for &SpectralField<T> {
    type Output = SpectralField<T>;
    fn add(self, rhs: Self) -> SpectralField<T> {
        self.lincomb(T::one(), rhs, T::one())
    }
}

impl<T: Scalar> Sub for &SpectralField<T> {
    type Output = SpectralField<T>;
    fn sub(self, rhs: Self) -> SpectralField<T> {
        self.lincomb(T::one(), rhs, -T::one())
    }
}

impl<T: Scalar> Mul for &SpectralField<T> {
    type Output = SpectralField<T>;
    fn mul(self, rhs: Self) -> SpectralField<T> {
        SpectralField::mul(self, rhs)
    }
}

/// Exponentially weighted Sobolev norm `||cosh^q(.) f||_{H^r}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightedNorm<T> {
    pub r: T,
    pub q: T,
}

impl<T: Scalar> WeightedNorm<T> {
    pub fn new(r: T, q: T) -> Result<Self> {
        if !(r >= T::zero()) || !(q >= T::zero()) {
            return Err(Error::InvalidArgument(format!(
                "weighted norm needs r >= 0 and q >= 0, got r = {r}, q = {q}"
            )));
        }
        Ok(Self { r, q })
    }

    pub fn l2() -> Self {
        Self {
            r: T::zero(),
            q: T::zero(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn grid(l: f64, n: usize) -> Grid<f64> {
        Grid::new(l, n).unwrap()
    }

    fn sech2(x: f64) -> f64 {
        let c = x.cosh();
        1.0 / (c * c)
    }

    #[test]
    fn grid_validation() {
        assert!(Grid::<f64>::new(10.0, 6).is_err());
        assert!(Grid::<f64>::new(10.0, 12).is_err());
        assert!(Grid::<f64>::new(-1.0, 16).is_err());
        let g = grid(10.0, 16);
        assert_eq!(g.mode(8), -8);
        assert_eq!(g.index_of_mode(-3), Some(13));
        assert_eq!(g.index_of_mode(8), None);
        assert_eq!(g.x(8), 0.0);
    }

    #[test]
    fn cosine_has_two_modes() {
        let g = grid(20.0, 64);
        let k0 = g.wavenumber(5);
        let f = SpectralField::from_fn(&g, |x| (k0 * x).cos());
        for (j, c) in f.coeffs().iter().enumerate() {
            if j == 5 || j == 64 - 5 {
                assert!((c.re - 0.5).abs() < 1e-14 && c.im.abs() < 1e-14);
            } else {
                assert!(c.norm() < 1e-14, "mode {j}: {c}");
            }
        }
        assert!(SpectralField::zeros(&g).coeffs().iter().all(|c| c.norm() == 0.0));
    }

    #[test]
    fn transform_size_mismatch() {
        let g = grid(1.0, 16);
        assert!(matches!(g.transform(&[0.0; 8]), Err(Error::SizeMismatch { .. })));
        assert!(matches!(
            g.inverse_transform(&[Complex::new(0.0, 0.0); 32]),
            Err(Error::SizeMismatch { .. })
        ));
    }

    #[test]
    fn sech2_coefficients_match_closed_form() {
        // (1/2pi) int sech^2(x/2) e^{-ikx} dx = 2k / sinh(pi k)
        let g = grid(80.0, 1024);
        let f = SpectralField::from_fn(&g, |x| sech2(x / 2.0));
        for j in [0usize, 1, 7, 30, 100] {
            let k = g.wavenumber(j);
            let exact = if k == 0.0 {
                2.0 / std::f64::consts::PI
            } else {
                2.0 * k / (std::f64::consts::PI * k).sinh()
            };
            let got = f.grid_transform(j);
            assert!((got.re - exact).abs() < 1e-10 && got.im.abs() < 1e-12, "k = {k}");
        }
    }

    #[test]
    fn multiplier_rules() {
        let g = grid(10.0, 128);
        let k0 = g.wavenumber(3);
        let f = SpectralField::from_fn(&g, |x| (k0 * x).cos());
        let id = f.apply_multiplier(|_| 1.0).unwrap();
        assert!(id.values().iter().zip(f.values()).all(|(a, b)| (a - b).abs() < 1e-14));
        let d2 = f.apply_multiplier(|k| -k * k).unwrap();
        for (x, v) in g.points().into_iter().zip(d2.values()) {
            let err = (v + k0 * k0 * (k0 * x).cos()).abs();
            assert!(err < 1e-12, "{err}");
        }
        assert!(matches!(
            f.apply_multiplier(|k| 1.0 / k),
            Err(Error::NonFiniteSymbol { .. })
        ));
    }

    #[test]
    fn off_grid_coefficients() {
        let g = grid(40.0, 512);
        let f = SpectralField::from_fn(&g, |x| (-x * x).exp() * (3.0 * x).cos());
        for j in [0usize, 3, 19] {
            let k = g.wavenumber(j);
            let a = f.coeff_at(k).unwrap();
            let b = f.grid_transform(j);
            assert!((a - b).norm() < 1e-12);
        }
        assert!(f.coeff_at(1.2345).unwrap().im.abs() < 1e-12);
        for big_k in [16.0, 17.5, 19.0] {
            let c = f.coeff_at(big_k).unwrap().norm();
            assert!(c < 1e-12, "K = {big_k}: {c}");
        }
        let wide = SpectralField::from_fn(&g, |x| (-x * x / 1e4).exp());
        assert!(matches!(wide.coeff_at(0.0), Err(Error::BoundaryNotDecayed { .. })));
    }

    #[test]
    fn weighted_norm_examples() {
        let g = grid(60.0, 1024);
        assert_eq!(SpectralField::zeros(&g).l2_norm(), 0.0);
        let f = SpectralField::from_fn(&g, |x| sech2(x / 2.0));
        let direct = (g.spacing() * f.values().iter().map(|v| v * v).sum::<f64>()).sqrt();
        assert!((f.l2_norm() - direct).abs() < 1e-12 * direct);
        // cosh(x) = 2 cosh^2(x/2) - 1, so int cosh(x) sech^4(x/2) dx = 8 - 8/3.
        let w = f.weighted_norm(WeightedNorm::new(0.0, 0.5).unwrap()).unwrap();
        assert!((w * w - 16.0 / 3.0).abs() < 1e-8);
        assert!(matches!(
            f.weighted_norm(WeightedNorm::new(0.0, 20.0).unwrap()),
            Err(Error::WeightOverflow { .. })
        ));
        assert!(WeightedNorm::new(-1.0, 0.0).is_err());
    }

    #[test]
    fn symmetry_tools() {
        let g = grid(10.0, 64);
        let f = SpectralField::from_fn(&g, |x| (-(x - 0.5) * (x - 0.5)).exp());
        assert!(!f.is_even(1e-12));
        let s = f.symmetrized();
        assert!(s.is_even(1e-15));
        let e = SpectralField::from_fn(&g, |x| (-x * x).exp());
        assert!(e.asymmetry() < 1e-15);
        assert!(e.apply_multiplier(|k| k * k + 1.0).unwrap().is_even(1e-12));
        assert!(e.mul(&e).is_even(1e-15));
    }

    fn smooth_field(g: &Grid<f64>, amps: &[f64]) -> SpectralField<f64> {
        SpectralField::from_fn(g, |x| {
            amps.iter()
                .enumerate()
                .map(|(i, a)| a * (-(x - i as f64 + 2.0).powi(2) / (1.0 + i as f64)).exp())
                .sum()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(50))]

        #[test]
        fn parseval_and_round_trip(amps in prop::collection::vec(-1.0f64..1.0, 1..5)) {
            let g = grid(30.0, 256);
            let f = smooth_field(&g, &amps);
            let direct: f64 = g.spacing() * f.values().iter().map(|v| v * v).sum::<f64>();
            let spectral = 2.0 * g.half_length() * f.coeffs().iter().map(|c| c.norm_sqr()).sum::<f64>();
            prop_assert!((direct - spectral).abs() <= 1e-12 * direct.max(1e-300));
            let back = g.inverse_transform(f.coeffs()).unwrap();
            let scale = f.max_abs().max(1e-300);
            for (a, b) in back.iter().zip(f.values()) {
                prop_assert!((a - b).abs() <= 1e-13 * scale);
            }
            // conjugate symmetry of a real field
            let n = g.len();
            for j in 1..n / 2 {
                let d = (f.coeffs()[j] - f.coeffs()[n - j].conj()).norm();
                prop_assert!(d <= 1e-12 * f.coeffs().iter().fold(0.0f64, |m, c| m.max(c.norm())));
            }
        }

        #[test]
        fn multiplier_composition(amps in prop::collection::vec(-1.0f64..1.0, 1..5), p in 0.1f64..2.0) {
            let g = grid(30.0, 256);
            let f = smooth_field(&g, &amps);
            let s1 = |k: f64| 1.0 / (1.0 + p * k * k);
            let s2 = |k: f64| (k * p).cos();
            let both = f.apply_multiplier(|k| s1(k) * s2(k)).unwrap();
            let seq = f.apply_multiplier(s1).unwrap().apply_multiplier(s2).unwrap();
            let scale = f.max_abs().max(1e-300);
            for (a, b) in both.values().iter().zip(seq.values()) {
                prop_assert!((a - b).abs() <= 1e-14 * scale * 10.0);
            }
        }
    }
}
