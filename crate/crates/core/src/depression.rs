//! Subcritical solitary waves of depression for `beta > 1/3`.
//!
//! When `beta > 1/3` and `c < 1` the symbol `m_beta(k) - c` is bounded away
//! from zero, so Newton's method on `(M - c) w + w^2 = 0` in the physical
//! variable converges from the KdV leading term
//! `-((3 beta - 1) / 4) eps^2 sech^2(eps x / 2)`.

use crate::dispersion::{m_beta, BondParams, Regime, ScalingParams};
use crate::error::{Error, Result};
use crate::fit::loglog_slope;
use crate::kdv::sigma_value;
use crate::linalg::{gmres, GmresOptions};
use crate::nanopteron::{full_residual, Variables};
use crate::scalar::Scalar;
use crate::spectral::{Grid, SpectralField};

/// Smallest admissible `eps * L`.
pub const MIN_SCALED_HALF_LENGTH: f64 = 40.0;

/// Required relative residual of a converged wave.
pub const RESIDUAL_TOL: f64 = 1e-11;

/// A converged depression wave on the `x` grid.
#[derive(Debug, Clone)]
pub struct DepressionWave<T: Scalar> {
    pub params: BondParams<T>,
    pub scaling: ScalingParams<T>,
    pub w: SpectralField<T>,
    /// `R_eps(X) = w(x) - leading term`, on the grid `X = eps x`.
    pub r: SpectralField<T>,
    pub residual: T,
    pub newton_steps: usize,
}

impl<T: Scalar> DepressionWave<T> {
    /// Number of sign changes of `w'` on the grid, ignoring values below
    /// `tol * max|w'|`.
    pub fn critical_points(&self, tol: T) -> usize {
        let d = self.w.derivative(1);
        let floor = tol * d.max_abs();
        let mut last = T::zero();
        let mut changes = 0;
        for &v in d.values() {
            if v.abs() <= floor {
                continue;
            }
            if last != T::zero() && v.signum() != last.signum() {
                changes += 1;
            }
            last = v;
        }
        changes
    }
}

/// `-((3 beta - 1) / 4) eps^2 sech^2(eps x / 2)` on the grid.
pub fn leading_term<T: Scalar>(params: &BondParams<T>, scaling: &ScalingParams<T>, grid: &Grid<T>) -> SpectralField<T> {
    let eps = scaling.epsilon();
    let e2 = eps * eps;
    SpectralField::from_fn(grid, |x| e2 * sigma_value(params, eps * x))
}

/// `min_k (m_beta(k) - c)` over the grid wavenumbers and `k = 0`.
pub fn symbol_margin<T: Scalar>(params: &BondParams<T>, scaling: &ScalingParams<T>, grid: &Grid<T>) -> T {
    let c = scaling.c();
    grid.wavenumbers()
        .into_iter()
        .map(|k| m_beta(params, k) - c)
        .fold(T::one() - c, |m, v| m.min(v))
}

/// Newton iteration from the leading term.
pub fn solve_depression<T: Scalar>(
    params: &BondParams<T>,
    scaling: &ScalingParams<T>,
    grid: &Grid<T>,
) -> Result<DepressionWave<T>> {
    let guess = leading_term(params, scaling, grid);
    solve_depression_from(params, scaling, guess)
}

/// Newton iteration from a given even guess on the `x` grid.
pub fn solve_depression_from<T: Scalar>(
    params: &BondParams<T>,
    scaling: &ScalingParams<T>,
    guess: SpectralField<T>,
) -> Result<DepressionWave<T>> {
    params.require(Regime::Strong)?;
    let grid = guess.grid().clone();
    let eps = scaling.epsilon();
    let scaled = eps * grid.half_length();
    if scaled < T::lit(MIN_SCALED_HALF_LENGTH) {
        return Err(Error::DomainTooShort {
            scaled: scaled.to_f64_lossy(),
            required: MIN_SCALED_HALF_LENGTH,
        });
    }
    let margin = symbol_margin(params, scaling, &grid);
    if !(margin > T::zero()) {
        return Err(Error::SymbolNotCoercive {
            minimum: margin.to_f64_lossy(),
        });
    }
    let c = scaling.c();
    let symbol: Vec<T> = grid.wavenumbers().into_iter().map(|k| m_beta(params, k) - c).collect();
    let precond: Vec<T> = symbol.iter().map(|&s| T::one() / s).collect();

    let max_steps = 30;
    let mut w = guess;
    let mut steps = 0;
    let mut res = full_residual(params, scaling, &w, Variables::Physical);
    while res > T::lit(1e-14) {
        if steps == max_steps || !res.is_finite() {
            return Err(Error::NewtonDivergence {
                iterations: steps,
                residual: res.to_f64_lossy(),
            });
        }
        let f = &w.apply_symbol_table(&symbol)? + &w.square();
        let two_w = w.scale(T::lit(2.0));
        let apply = |v: &[T]| -> Result<Vec<T>> {
            let dv = SpectralField::from_values(&grid, v.to_vec())?;
            Ok((&dv.apply_symbol_table(&symbol)? + &two_w.mul(&dv)).values().to_vec())
        };
        let pre = |v: &[T]| -> Result<Vec<T>> {
            let dv = SpectralField::from_values(&grid, v.to_vec())?;
            Ok(dv.apply_symbol_table(&precond)?.values().to_vec())
        };
        let rhs: Vec<T> = f.values().iter().map(|&v| -v).collect();
        let opts = GmresOptions {
            tol: T::lit(1e-12),
            max_iter: 300,
            restart: 60,
        };
        let out = gmres(apply, pre, &rhs, None, opts)?;
        let d = SpectralField::from_values(&grid, out.x)?;
        w = (&w + &d).symmetrized();
        steps += 1;
        let next = full_residual(params, scaling, &w, Variables::Physical);
        let stalled = d.max_abs() <= T::lit(1e-15) * w.max_abs();
        res = next;
        if stalled {
            break;
        }
    }
    if !(res <= T::lit(RESIDUAL_TOL)) {
        return Err(Error::NewtonDivergence {
            iterations: steps,
            residual: res.to_f64_lossy(),
        });
    }
    let lead = leading_term(params, scaling, &grid);
    let scaled_grid = Grid::new(scaled, grid.len())?;
    let r = SpectralField::from_values(&scaled_grid, (&w - &lead).values().to_vec())?;
    Ok(DepressionWave {
        params: *params,
        scaling: *scaling,
        w,
        r,
        residual: res,
        newton_steps: steps,
    })
}

/// Grid used by [`remainder_scaling`]: `L_x = scaled_half_length / eps`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DepressionGrid<T> {
    pub scaled_half_length: T,
    pub n: usize,
}

impl<T: Scalar> Default for DepressionGrid<T> {
    fn default() -> Self {
        Self {
            scaled_half_length: T::lit(MIN_SCALED_HALF_LENGTH),
            n: 1024,
        }
    }
}

impl<T: Scalar> DepressionGrid<T> {
    pub fn grid(&self, eps: T) -> Result<Grid<T>> {
        Grid::new(self.scaled_half_length / eps, self.n)
    }
}

/// Remainder norms and their fitted exponent.
#[derive(Debug, Clone)]
pub struct RemainderFit<T: Scalar> {
    pub eps: Vec<T>,
    /// `||d^r R_eps||_{L^2}` in the scaled variable.
    pub norms: Vec<T>,
    pub residuals: Vec<T>,
    pub slope: T,
}

/// Solves at each `eps` (at least four, strictly decreasing) and fits
/// `log ||d^order R_eps||_{L^2(X)}` against `log eps`.
pub fn remainder_scaling<T: Scalar>(
    params: &BondParams<T>,
    eps_list: &[T],
    policy: DepressionGrid<T>,
    order: u32,
) -> Result<RemainderFit<T>> {
    if eps_list.len() < 4 || eps_list.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::InvalidArgument(
            "remainder_scaling needs at least four strictly decreasing eps values".into(),
        ));
    }
    let mut norms = Vec::with_capacity(eps_list.len());
    let mut residuals = Vec::with_capacity(eps_list.len());
    for &eps in eps_list {
        let scaling = ScalingParams::new(params, eps)?;
        let wave = solve_depression(params, &scaling, &policy.grid(eps)?)?;
        norms.push(wave.r.derivative(order).l2_norm());
        residuals.push(wave.residual);
    }
    let slope = loglog_slope(eps_list, &norms)?;
    Ok(RemainderFit {
        eps: eps_list.to_vec(),
        norms,
        residuals,
        slope,
    })
}
