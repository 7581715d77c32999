//! Generalized solitary waves for `0 < beta < 1/3` by Beale's method.
//!
//! In the scaled variable `X` the profile is sought as
//! `W = sigma_beta + a Phi^a + R`, where `Phi^a` is the periodic wave of
//! amplitude `a` and `R` is localized. `R` and `a` solve
//!
//! ```text
//! L_eps R + 2 sigma R + 2 a sigma Phi^0 = G = J0 - R^2 - 2a sigma (Phi^a - Phi^0) - 2a Phi^a R
//! ```
//!
//! whose solvability at the kernel frequency `K_eps` of `L_eps` fixes `a`.
//! The grid half-length is adjusted so that `K_eps` is a grid frequency; the
//! projection and the inverse of `L_eps` are then exact in coefficient space.

use crate::dispersion::{k_eps, l_eps, m_beta, BondParams, Regime, ScalingParams};
use crate::error::{Error, Result};
use crate::kdv::{self, sigma_hat, KdvProfile, DENSE_LIMIT};
use crate::linalg::{gmres, DenseMatrix, GmresOptions};
use crate::periodic::{sample_on_grid, solve_periodic, PeriodicOptions, PeriodicWave};
use crate::scalar::Scalar;
use crate::spectral::{Grid, SpectralField, WeightedNorm};
use crate::Complex;

/// Default half-length of the `X` domain.
pub const DEFAULT_TARGET_L: f64 = 100.0;

/// Decay rate used when reporting weighted norms of `R`.
pub const REPORT_Q: f64 = 0.1;

/// Size of `F_hat(K_eps)` relative to `||F||` tolerated by [`BealeWorkspace::l_inv`].
pub const KERNEL_RESIDUE_TOL: f64 = 1e-9;

/// Everything that depends only on `(beta, eps)` and the grid.
#[derive(Debug, Clone)]
pub struct BealeWorkspace<T: Scalar> {
    params: BondParams<T>,
    scaling: ScalingParams<T>,
    grid: Grid<T>,
    j0: usize,
    k_eps: T,
    sigma: KdvProfile<T>,
    chi: T,
    phi0: SpectralField<T>,
    sigma_phi0: SpectralField<T>,
    l_symbol: Vec<T>,
    l_inverse: Vec<T>,
    forcing: SpectralField<T>,
}

/// Builds the workspace: snaps `L` so that `K_eps = j0 pi / L`, picks
/// `N >= 8 j0` (a power of two) unless `n` is given, and precomputes
/// `sigma_beta`, `Phi^0 = cos(K_eps X)`, `chi_eps` and `J0`.
pub fn make_workspace<T: Scalar>(
    params: &BondParams<T>,
    scaling: &ScalingParams<T>,
    target_l: T,
    n: Option<usize>,
) -> Result<BealeWorkspace<T>> {
    params.require(Regime::Weak)?;
    if !(target_l > T::zero()) {
        return Err(Error::NonPositiveInput {
            name: "target_L",
            value: target_l.to_f64_lossy(),
        });
    }
    let big_k = k_eps(params, scaling)?;
    let j0 = (big_k * target_l / T::PI())
        .round()
        .to_usize()
        .unwrap_or(0)
        .max(1);
    let half_length = T::from_usize_exact(j0) * T::PI() / big_k;
    let n = n.unwrap_or_else(|| (8 * j0).next_power_of_two().max(8));
    if j0 >= n / 4 {
        return Err(Error::GridTooCoarse { j0, limit: n / 4 });
    }
    let grid = Grid::new(half_length, n)?;
    let l_symbol: Vec<T> = grid.wavenumbers().into_iter().map(|k| l_eps(params, scaling, k)).collect();
    if !(l_symbol[j0].abs() <= T::lit(1e-10)) {
        return Err(Error::OffGridFrequency {
            k: big_k.to_f64_lossy(),
            offset: l_symbol[j0].to_f64_lossy(),
        });
    }
    let neg = n - j0;
    let l_inverse = l_symbol
        .iter()
        .enumerate()
        .map(|(j, &l)| {
            if j == j0 || j == neg || j == grid.nyquist() {
                T::zero()
            } else {
                T::one() / l
            }
        })
        .collect();

    let sigma = kdv::sigma_beta(params, &grid)?;
    let chi = sigma_hat(params, T::zero()) + sigma_hat(params, T::lit(2.0) * big_k);
    if !(chi >= T::lit(0.9) * sigma_hat(params, T::zero())) {
        return Err(Error::InvalidArgument(format!(
            "chi_eps = {chi} is not bounded below by 0.9 sigma_hat(0); eps too large"
        )));
    }
    let mut c = vec![Complex::new(T::zero(), T::zero()); n];
    c[j0] = Complex::new(T::lit(0.5), T::zero());
    c[neg] = Complex::new(T::lit(0.5), T::zero());
    let phi0 = SpectralField::from_coeffs(&grid, c)?;
    let sigma_phi0 = sigma.field().mul(&phi0);
    let forcing = kdv::j0(&sigma, scaling)?;
    Ok(BealeWorkspace {
        params: *params,
        scaling: *scaling,
        grid,
        j0,
        k_eps: big_k,
        sigma,
        chi,
        phi0,
        sigma_phi0,
        l_symbol,
        l_inverse,
        forcing,
    })
}

impl<T: Scalar> BealeWorkspace<T> {
    pub fn params(&self) -> &BondParams<T> {
        &self.params
    }

    pub fn scaling(&self) -> &ScalingParams<T> {
        &self.scaling
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    /// Grid index of `K_eps`.
    pub fn j0(&self) -> usize {
        self.j0
    }

    pub fn k_eps(&self) -> T {
        self.k_eps
    }

    pub fn sigma(&self) -> &KdvProfile<T> {
        &self.sigma
    }

    /// `chi_eps = sigma_hat(0) + sigma_hat(2 K_eps)`.
    pub fn chi(&self) -> T {
        self.chi
    }

    pub fn phi0(&self) -> &SpectralField<T> {
        &self.phi0
    }

    /// `J0` on the workspace grid.
    pub fn forcing(&self) -> &SpectralField<T> {
        &self.forcing
    }

    /// `l_eps(k_j)` in FFT order.
    pub fn l_symbol(&self) -> &[T] {
        &self.l_symbol
    }

    /// `F_hat(K_eps)` for an even field (real part of the grid coefficient).
    pub fn kernel_coeff(&self, f: &SpectralField<T>) -> T {
        f.grid_transform(self.j0).re
    }

    /// `P F = F - 2 F_hat(K_eps) chi^-1 sigma Phi^0`.
    pub fn project(&self, f: &SpectralField<T>) -> SpectralField<T> {
        let s = T::lit(2.0) * self.kernel_coeff(f) / self.chi;
        f.lincomb(T::one(), &self.sigma_phi0, -s)
    }

    /// Diagonal inverse of `L_eps` off the modes `+-j0`, which are set to zero.
    /// Requires `|F_hat(K_eps)| <= 1e-9 ||F||`.
    pub fn l_inv(&self, f: &SpectralField<T>) -> Result<SpectralField<T>> {
        let scale = f.l2_norm();
        let residue = f.grid_transform(self.j0).norm();
        if residue > T::lit(KERNEL_RESIDUE_TOL) * scale {
            return Err(Error::KernelResidue {
                coefficient: residue.to_f64_lossy(),
                scale: scale.to_f64_lossy(),
            });
        }
        f.apply_symbol_table(&self.l_inverse)
    }

    /// `L_eps f` by the diagonal symbol.
    pub fn l_apply(&self, f: &SpectralField<T>) -> SpectralField<T> {
        f.apply_symbol_table(&self.l_symbol).expect("table has grid length")
    }

    /// `S_eps R = R + L_eps^-1 P (2 sigma R)`.
    pub fn s_eps_apply(&self, r: &SpectralField<T>) -> Result<SpectralField<T>> {
        let t = self.sigma.field().mul(r).scale(T::lit(2.0));
        Ok(r + &self.l_inv(&self.project(&t))?)
    }

    /// Solves `S_eps R = rhs`: dense LU up to [`DENSE_LIMIT`] points, GMRES
    /// above, followed by symmetrization and a `1e-11` relative residual check.
    pub fn s_eps_solve(&self, rhs: &SpectralField<T>) -> Result<SpectralField<T>> {
        if rhs.max_abs() == T::zero() {
            return Ok(SpectralField::zeros(&self.grid));
        }
        let grid = &self.grid;
        // S_eps on the even part, identity on the odd part
        let apply = |v: &[T]| -> Result<Vec<T>> {
            let f = SpectralField::from_values(grid, v.to_vec())?;
            let even = f.symmetrized();
            let odd = &f - &even;
            Ok((&self.s_eps_apply(&even)? + &odd).values().to_vec())
        };
        let (x, iterations) = if grid.len() <= DENSE_LIMIT {
            let lu = DenseMatrix::from_operator(grid.len(), apply)?.lu()?;
            (lu.solve(rhs.values())?, 1)
        } else {
            let opts = GmresOptions {
                tol: T::lit(1e-13),
                max_iter: 500,
                restart: 80,
            };
            let out = gmres(apply, |v| Ok(v.to_vec()), rhs.values(), None, opts)?;
            (out.x, out.iterations)
        };
        let sol = SpectralField::from_values(grid, x)?.symmetrized();
        let res = (&self.s_eps_apply(&sol)? - rhs).l2_norm() / rhs.l2_norm();
        if res > T::lit(1e-11) {
            return Err(Error::SolverDivergence {
                iterations,
                residual: res.to_f64_lossy(),
            });
        }
        Ok(sol)
    }

    /// `Phi^a` on the grid (unit amplitude); exact in coefficient space when
    /// `K^a` is a grid frequency.
    pub fn sample_ripple(&self, wave: &PeriodicWave<T>) -> Result<SpectralField<T>> {
        match sample_on_grid(wave, &self.grid, false, true) {
            Err(Error::OffGridFrequency { .. }) => sample_on_grid(wave, &self.grid, false, false),
            other => other,
        }
    }

    /// The right-hand side `G` and its parts.
    pub fn assemble_rhs(&self, r: &SpectralField<T>, a: T, phi_a: &SpectralField<T>) -> RhsParts<T> {
        let two_a = T::lit(2.0) * a;
        let j1 = r.square().scale(-T::one());
        let j2 = self.sigma.field().mul(&(phi_a - &self.phi0)).scale(-two_a);
        let j3 = phi_a.mul(r).scale(-two_a);
        let total = &(&(&self.forcing + &j1) + &j2) + &j3;
        RhsParts {
            j0: self.forcing.clone(),
            j1,
            j2,
            j3,
            total,
        }
    }

    /// One application of the maps `(R, a) -> (N1, N2)`.
    pub fn beale_step(&self, r: &SpectralField<T>, a: T, phi_a: &SpectralField<T>) -> Result<(SpectralField<T>, T)> {
        let g = self.assemble_rhs(r, a, phi_a).total;
        let r_next = self.s_eps_solve(&self.l_inv(&self.project(&g))?)?;
        let a_next = (self.kernel_coeff(&g) - T::lit(2.0) * self.kernel_coeff(&self.sigma.field().mul(&r_next))) / self.chi;
        Ok((r_next, a_next))
    }
}

/// `G = J0 + J1 + J2 + J3`.
#[derive(Debug, Clone)]
pub struct RhsParts<T: Scalar> {
    pub j0: SpectralField<T>,
    /// `-R^2`
    pub j1: SpectralField<T>,
    /// `-2a sigma (Phi^a - Phi^0)`
    pub j2: SpectralField<T>,
    /// `-2a Phi^a R`
    pub j3: SpectralField<T>,
    pub total: SpectralField<T>,
}

/// Settings for [`beale_iterate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BealeOptions<T> {
    /// Target for `||R_{n+1} - R_n||_{0,0} + |a_{n+1} - a_n|`.
    pub tol: T,
    pub max_iter: usize,
    /// Consecutive non-decreasing steps tolerated before giving up.
    pub patience: usize,
    pub periodic: PeriodicOptions<T>,
}

impl<T: Scalar> Default for BealeOptions<T> {
    fn default() -> Self {
        Self {
            tol: T::lit(1e-12),
            max_iter: 100,
            patience: 5,
            periodic: PeriodicOptions::default(),
        }
    }
}

/// Converged `(R, a)` with the data needed to rebuild the profile.
#[derive(Debug, Clone)]
pub struct NanopteronSolution<T: Scalar> {
    pub params: BondParams<T>,
    pub scaling: ScalingParams<T>,
    pub k_eps: T,
    pub sigma: SpectralField<T>,
    /// Localized remainder in the `X` variable.
    pub r: SpectralField<T>,
    /// Ripple amplitude.
    pub a: T,
    pub wave: PeriodicWave<T>,
    /// `Phi^a` sampled on the grid, unit amplitude.
    pub phi_a: SpectralField<T>,
    pub iterations: usize,
    /// `(||R_n - R_{n-1}||_{0,0}, |a_n - a_{n-1}|)` per iteration.
    pub history: Vec<(T, T)>,
    /// Relative residual of the full equation, see [`full_residual`].
    pub residual: T,
}

impl<T: Scalar> NanopteronSolution<T> {
    pub fn grid(&self) -> &Grid<T> {
        self.r.grid()
    }

    /// `W = sigma + a Phi^a + R` in the scaled variable.
    pub fn profile(&self) -> SpectralField<T> {
        &self.sigma.lincomb(T::one(), &self.phi_a, self.a) + &self.r
    }

    pub fn step_norms(&self) -> Vec<T> {
        self.history.iter().map(|&(dr, da)| dr + da).collect()
    }

    /// Successive step ratios `d_{n+1} / d_n`.
    pub fn contraction_ratios(&self) -> Vec<T> {
        self.step_norms().windows(2).map(|w| w[1] / w[0]).collect()
    }

    /// Geometric mean of the step ratios taken before the steps reach the
    /// roundoff floor (`d_{n+1} > floor`), skipping the first step.
    pub fn contraction_factor(&self, floor: T) -> Option<T> {
        let d = self.step_norms();
        let logs: Vec<T> = d
            .windows(2)
            .skip(1)
            .filter(|w| w[1] > floor)
            .map(|w| (w[1] / w[0]).ln())
            .collect();
        if logs.is_empty() {
            return None;
        }
        let mean = logs.iter().fold(T::zero(), |s, &v| s + v) / T::from_usize_exact(logs.len());
        Some(mean.exp())
    }

    pub fn r_norm(&self, norm: WeightedNorm<T>) -> Result<T> {
        self.r.weighted_norm(norm)
    }

    /// `|eps K^a - k_crit(beta, c_eps)|`.
    pub fn frequency_offset(&self) -> T {
        let eps = self.scaling.epsilon();
        (eps * self.wave.k - eps * self.k_eps).abs()
    }
}

/// Beale's fixed-point iteration from `(R, a) = (0, 0)`.
pub fn beale_iterate<T: Scalar>(ws: &BealeWorkspace<T>, opts: BealeOptions<T>) -> Result<NanopteronSolution<T>> {
    beale_iterate_from(ws, SpectralField::zeros(ws.grid()), T::zero(), opts)
}

/// Beale's fixed-point iteration from a given seed.
///
/// The periodic wave is re-solved only when `a` has moved by more than 10% of
/// its size since the last solve.
pub fn beale_iterate_from<T: Scalar>(
    ws: &BealeWorkspace<T>,
    r0: SpectralField<T>,
    a0: T,
    opts: BealeOptions<T>,
) -> Result<NanopteronSolution<T>> {
    if r0.grid() != ws.grid() {
        return Err(Error::SizeMismatch {
            expected: ws.grid().len(),
            got: r0.grid().len(),
        });
    }
    let solve_wave = |a: T| solve_periodic(&ws.params, &ws.scaling, a, opts.periodic);
    let mut r = r0;
    let mut a = a0;
    let mut wave = solve_wave(a)?;
    let mut a_last = a;
    let mut phi_a = ws.sample_ripple(&wave)?;
    let mut history = Vec::new();
    let mut prev_step = T::infinity();
    let mut worse = 0usize;
    let mut converged = false;

    for n in 0..opts.max_iter {
        if (a - a_last).abs() > T::lit(0.1) * a.abs() {
            wave = solve_wave(a)?;
            a_last = a;
            phi_a = ws.sample_ripple(&wave)?;
        }
        let (r_next, a_next) = ws.beale_step(&r, a, &phi_a)?;
        let dr = (&r_next - &r).l2_norm();
        let da = (a_next - a).abs();
        history.push((dr, da));
        r = r_next;
        a = a_next;
        let step = dr + da;
        if !step.is_finite() {
            return Err(Error::NoContraction { iteration: n + 1 });
        }
        if step <= opts.tol {
            converged = true;
            break;
        }
        if step >= prev_step {
            worse += 1;
            if worse >= opts.patience {
                return Err(Error::NoContraction { iteration: n + 1 });
            }
        } else {
            worse = 0;
        }
        prev_step = step;
    }
    if !converged {
        return Err(Error::MaxIterations {
            iterations: opts.max_iter,
            step: prev_step.to_f64_lossy(),
        });
    }
    if a != wave.a {
        wave = solve_wave(a)?;
        phi_a = ws.sample_ripple(&wave)?;
    }
    let mut sol = NanopteronSolution {
        params: ws.params,
        scaling: ws.scaling,
        k_eps: ws.k_eps,
        sigma: ws.sigma.field().clone(),
        r,
        a,
        wave,
        phi_a,
        iterations: history.len(),
        history,
        residual: T::zero(),
    };
    sol.residual = full_residual(&ws.params, &ws.scaling, &sol.profile(), Variables::Scaled);
    Ok(sol)
}

/// Which variable a profile is sampled in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variables {
    /// `w(x)`, equation `(M - c) w + w^2 = 0`.
    Physical,
    /// `W(X)`, equation `(M^eps - 1 - gamma eps^2) W + eps^2 W^2 = 0`.
    Scaled,
}

/// `||F(w)||_inf / ||w||_inf` for the profile equation in the given variables
/// (zero for the zero field). For `w(x) = eps^2 W(eps x)` both choices agree.
pub fn full_residual<T: Scalar>(
    params: &BondParams<T>,
    scaling: &ScalingParams<T>,
    w: &SpectralField<T>,
    vars: Variables,
) -> T {
    let scale = w.max_abs();
    if scale == T::zero() {
        return T::zero();
    }
    let (kscale, nl) = match vars {
        Variables::Physical => (T::one(), T::one()),
        Variables::Scaled => {
            let e = scaling.epsilon();
            (e, e * e)
        }
    };
    let c = scaling.c();
    let lin = w
        .apply_multiplier(|k| m_beta(params, kscale * k) - c)
        .expect("symbol finite on real grid");
    let res = lin.lincomb(T::one(), &w.square(), nl);
    res.max_abs() / scale
}

/// The solution in the physical variable `x = X / eps`.
#[derive(Debug, Clone)]
pub struct UnscaledProfile<T: Scalar> {
    /// Wave speed `c_eps = 1 + (1 - 3 beta) eps^2 / 6`.
    pub c: T,
    pub grid: Grid<T>,
    pub w: SpectralField<T>,
    /// `eps^2 (sigma + R)(eps x)`.
    pub core: SpectralField<T>,
    /// `eps^2 a Phi^a(eps x)`.
    pub ripple: SpectralField<T>,
}

pub fn unscale<T: Scalar>(sol: &NanopteronSolution<T>) -> Result<UnscaledProfile<T>> {
    let eps = sol.scaling.epsilon();
    let e2 = eps * eps;
    let g = sol.grid();
    let grid = Grid::new(g.half_length() / eps, g.len())?;
    let rescale = |f: &SpectralField<T>| SpectralField::from_values(&grid, f.values().iter().map(|&v| e2 * v).collect());
    let core = rescale(&(&sol.sigma + &sol.r))?;
    let ripple = rescale(&sol.phi_a.scale(sol.a))?;
    let w = &core + &ripple;
    Ok(UnscaledProfile {
        c: sol.scaling.c(),
        grid,
        w,
        core,
        ripple,
    })
}

/// Outcome of [`newton_oracle`].
#[derive(Debug, Clone)]
pub struct OracleReport<T: Scalar> {
    /// `max |W_newton - W_beale|`.
    pub moved_sup: T,
    /// Ripple amplitude read from the Newton profile under `c_1 = 1` and
    /// `R_hat(K_eps) = 0`.
    pub a_oracle: T,
    pub residual_before: T,
    pub residual_after: T,
    pub steps: usize,
    pub profile: SpectralField<T>,
}

/// Newton's method on the discretized scaled equation `L_eps W + W^2 = 0` with
/// all grid values as unknowns, started from the Beale profile. Uses only the
/// symbol; no projection or kernel-aware inverse is involved.
pub fn newton_oracle<T: Scalar>(sol: &NanopteronSolution<T>, max_steps: usize) -> Result<OracleReport<T>> {
    newton_oracle_from(sol, sol.profile(), max_steps)
}

/// As [`newton_oracle`], started from `start` instead of the Beale profile;
/// `moved_sup` is still measured against the Beale profile.
pub fn newton_oracle_from<T: Scalar>(
    sol: &NanopteronSolution<T>,
    start: SpectralField<T>,
    max_steps: usize,
) -> Result<OracleReport<T>> {
    if start.grid() != sol.grid() {
        return Err(Error::SizeMismatch {
            expected: sol.grid().len(),
            got: start.grid().len(),
        });
    }
    let params = sol.params;
    let scaling = sol.scaling;
    let grid = sol.grid().clone();
    let symbol: Vec<T> = grid.wavenumbers().into_iter().map(|k| l_eps(&params, &scaling, k)).collect();
    let floor = T::lit(0.5);
    let precond: Vec<T> = symbol
        .iter()
        .map(|&l| {
            let l = if l.abs() < floor { floor.copysign(l) } else { l };
            T::one() / l
        })
        .collect();
    let beale = sol.profile();
    let f_of = |w: &SpectralField<T>| -> Result<SpectralField<T>> { Ok(&w.apply_symbol_table(&symbol)? + &w.square()) };
    let mut w = start.clone();
    let residual_before = full_residual(&params, &scaling, &w, Variables::Scaled);
    let mut steps = 0;
    for _ in 0..max_steps {
        let f = f_of(&w)?;
        if f.max_abs() <= T::epsilon() * w.max_abs() {
            break;
        }
        let two_w = w.scale(T::lit(2.0));
        let apply = |v: &[T]| -> Result<Vec<T>> {
            let dv = SpectralField::from_values(&grid, v.to_vec())?;
            let out = &dv.apply_symbol_table(&symbol)? + &two_w.mul(&dv);
            Ok(out.values().to_vec())
        };
        let pre = |v: &[T]| -> Result<Vec<T>> {
            let dv = SpectralField::from_values(&grid, v.to_vec())?;
            Ok(dv.apply_symbol_table(&precond)?.values().to_vec())
        };
        let rhs: Vec<T> = f.values().iter().map(|&v| -v).collect();
        // relative 1e-10, but never below the roundoff level of the profile
        let noise = T::lit(1e-14) * w.l2_norm() / f.l2_norm();
        let opts = GmresOptions {
            tol: T::lit(1e-10).max(noise),
            max_iter: 400,
            restart: 200,
        };
        let out = gmres(apply, pre, &rhs, None, opts)?;
        let d = SpectralField::from_values(&grid, out.x)?;
        w = (&w + &d).symmetrized();
        steps += 1;
        if d.max_abs() <= T::lit(1e-15) * w.max_abs() {
            break;
        }
    }
    let residual_after = full_residual(&params, &scaling, &w, Variables::Scaled);
    let j0 = grid
        .index_of_frequency(sol.k_eps, T::lit(1e-6))
        .ok_or(Error::OffGridFrequency {
            k: sol.k_eps.to_f64_lossy(),
            offset: f64::NAN,
        })?;
    let a_oracle = T::lit(2.0) * (w.coeffs()[j0].re - sol.sigma.coeffs()[j0].re);
    Ok(OracleReport {
        moved_sup: (&w - &beale).max_abs(),
        a_oracle,
        residual_before,
        residual_after,
        steps,
        profile: w,
    })
}
