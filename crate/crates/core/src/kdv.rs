//! The KdV solitary profile `sigma_beta`, the forcing `J0` it leaves in the
//! rescaled equation, and the leading-order linearization `S0`.

use crate::dispersion::{m_beta, BondParams, ScalingParams};
use crate::error::{Error, Result};
use crate::linalg::{gmres, DenseMatrix, GmresOptions};
use crate::scalar::Scalar;
use crate::spectral::{Grid, SpectralField};

/// Largest grid solved by dense LU; larger grids use GMRES.
pub const DENSE_LIMIT: usize = 1024;

/// Relative residual accepted from the `S0` solve.
pub const S0_RESIDUAL_TOL: f64 = 1e-11;

/// `sigma_beta` sampled on a grid in the scaled variable `X`.
#[derive(Debug, Clone)]
pub struct KdvProfile<T: Scalar> {
    params: BondParams<T>,
    field: SpectralField<T>,
}

impl<T: Scalar> KdvProfile<T> {
    pub fn params(&self) -> &BondParams<T> {
        &self.params
    }

    pub fn field(&self) -> &SpectralField<T> {
        &self.field
    }

    pub fn grid(&self) -> &Grid<T> {
        self.field.grid()
    }

    /// Peak value `(1 - 3 beta) / 4`.
    pub fn amplitude(&self) -> T {
        amplitude(&self.params)
    }
}

fn amplitude<T: Scalar>(params: &BondParams<T>) -> T {
    (T::one() - T::lit(3.0) * params.beta()) / T::lit(4.0)
}

/// `sigma_beta(X) = ((1 - 3 beta)/4) sech^2(X/2)`.
pub fn sigma_value<T: Scalar>(params: &BondParams<T>, x: T) -> T {
    let a = amplitude(params);
    // sech^2(y) = 4 e^{-2|y|} / (1 + e^{-2|y|})^2 stays finite for large |y|
    let e = (-x.abs()).exp();
    let d = T::one() + e;
    a * T::lit(4.0) * e / (d * d)
}

/// Closed-form transform `(1/2pi) int sigma e^{-ikX} dX = (1 - 3 beta) k / (2 sinh(pi k))`.
pub fn sigma_hat<T: Scalar>(params: &BondParams<T>, k: T) -> T {
    let scale = T::one() - T::lit(3.0) * params.beta();
    let ak = k.abs();
    if ak < T::lit(1e-8) {
        let pk = T::PI() * ak;
        return scale / (T::lit(2.0) * T::PI()) * (T::one() - pk * pk / T::lit(6.0));
    }
    let e = (-T::PI() * ak).exp();
    scale * ak * e / (T::one() - e * e)
}

/// `sigma_beta` on `grid`, failing if the domain is too short for it to decay.
///
/// Values are the exact samples. Coefficients are taken from the closed-form
/// transform rather than from an FFT of the samples; the two differ only by
/// aliasing and truncation terms of order `exp(-pi^2/h)` and `exp(-L)`, but
/// the closed form is exactly real and even, so operators with large
/// high-frequency symbols (such as `J0`) do not amplify transform roundoff.
pub fn sigma_beta<T: Scalar>(params: &BondParams<T>, grid: &Grid<T>) -> Result<KdvProfile<T>> {
    let sampled = SpectralField::from_fn(grid, |x| sigma_value(params, x));
    sampled.check_boundary_decay()?;
    let dk = grid.dk();
    let coeffs = (0..grid.len())
        .map(|j| crate::Complex::new(dk * sigma_hat(params, grid.wavenumber(j)), T::zero()))
        .collect();
    let field = SpectralField::from_parts(grid, sampled.values().to_vec(), coeffs)?;
    Ok(KdvProfile {
        params: *params,
        field,
    })
}

/// `max |sigma'' - sigma + sigma^2 / gamma|` with spectral derivatives.
pub fn kdv_residual<T: Scalar>(profile: &KdvProfile<T>) -> T {
    let s = profile.field();
    let inv_gamma = T::one() / profile.params.gamma();
    let d2 = s.derivative(2);
    d2.values()
        .iter()
        .zip(s.values())
        .fold(T::zero(), |m, (&a, &b)| m.max((a - b + inv_gamma * b * b).abs()))
}

/// Symbol of `-eps^-2 (M^eps - 1 - gamma eps^2 d^2)`: `-eps^-2 (m(eps K) - 1 + gamma eps^2 K^2)`.
pub fn j0_symbol<T: Scalar>(params: &BondParams<T>, scaling: &ScalingParams<T>, big_k: T) -> T {
    let eps = scaling.epsilon();
    let e2 = eps * eps;
    -(m_beta(params, eps * big_k) - T::one() + params.gamma() * e2 * big_k * big_k) / e2
}

/// The forcing `J0 = -eps^-2 (M^eps - 1 - gamma eps^2 d^2) sigma_beta`.
pub fn j0<T: Scalar>(profile: &KdvProfile<T>, scaling: &ScalingParams<T>) -> Result<SpectralField<T>> {
    let p = profile.params;
    profile.field.apply_multiplier(|k| j0_symbol(&p, scaling, k))
}

/// `S0 f = f - gamma^-1 (1 - d^2)^-1 (2 sigma f)`.
pub fn s0_apply<T: Scalar>(profile: &KdvProfile<T>, f: &SpectralField<T>) -> Result<SpectralField<T>> {
    let inv_gamma = T::one() / profile.params.gamma();
    let two_sigma_f = profile.field.mul(f).scale(T::lit(2.0));
    let smooth = two_sigma_f.apply_multiplier(|k| inv_gamma / (T::one() + k * k))?;
    Ok(f - &smooth)
}

/// Solves `S0 R = rhs` on even fields.
///
/// Dense LU up to [`DENSE_LIMIT`] points, GMRES (tolerance `1e-12`, at most
/// 500 iterations) above it; the solution is symmetrized and its residual
/// checked against [`S0_RESIDUAL_TOL`].
pub fn s0_solve<T: Scalar>(profile: &KdvProfile<T>, rhs: &SpectralField<T>) -> Result<SpectralField<T>> {
    let grid = profile.grid().clone();
    let apply = |v: &[T]| -> Result<Vec<T>> {
        let f = SpectralField::from_values(&grid, v.to_vec())?;
        Ok(s0_apply(profile, &f)?.values().to_vec())
    };
    let solve_dense = grid.len() <= DENSE_LIMIT;
    let (x, iterations) = if solve_dense {
        let lu = DenseMatrix::from_operator(grid.len(), apply)?.lu()?;
        (lu.solve(rhs.values())?, 1)
    } else {
        let out = gmres(apply, |v| Ok(v.to_vec()), rhs.values(), None, GmresOptions::default())?;
        (out.x, out.iterations)
    };
    let sol = SpectralField::from_values(&grid, x)?.symmetrized();
    let res = &s0_apply(profile, &sol)? - rhs;
    let scale = rhs.max_abs();
    let rel = if scale == T::zero() {
        res.max_abs()
    } else {
        res.max_abs() / scale
    };
    if rel > T::lit(S0_RESIDUAL_TOL) {
        return Err(Error::SolverDivergence {
            iterations,
            residual: rel.to_f64_lossy(),
        });
    }
    Ok(sol)
}
