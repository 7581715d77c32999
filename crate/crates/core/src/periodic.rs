//! Small-amplitude periodic solutions `W(X) = a phi(K X)` of the rescaled
//! profile equation `(M^eps - 1 - gamma eps^2) W + eps^2 W^2 = 0`.
//!
//! `phi(y) = sum_{n=0}^{M} c_n cos(n y)` is normalized by `c_1 = 1`. Dividing
//! mode `n` of the equation by `a eps^2` gives the reduced system
//!
//! ```text
//! E_n = l_eps(n K) c_n + a (phi^2)_n = 0,   n = 0..M,
//! ```
//!
//! which stays nondegenerate at `a = 0` and is what the Newton solver works
//! with; [`periodic_residual`] reports the undivided equations.

use serde::{Deserialize, Serialize};

use crate::dispersion::{k_eps, l_eps, m_beta, m_beta_jet, BondParams, Regime, ScalingParams};
use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::scalar::Scalar;
use crate::spectral::{Grid, SpectralField};
use crate::Complex;

/// One member of the periodic family.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicWave<T> {
    pub params: BondParams<T>,
    pub scaling: ScalingParams<T>,
    /// Amplitude parameter `a`.
    pub a: T,
    /// Frequency `K_eps^a` in the scaled variable.
    pub k: T,
    /// Cosine coefficients `c_0..c_M` of `phi`.
    pub cos_coeffs: Vec<T>,
}

/// JSON form `{beta, epsilon, a, K, cos_coeffs}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodicWaveRecord {
    pub beta: f64,
    pub epsilon: f64,
    pub a: f64,
    #[serde(rename = "K")]
    pub k: f64,
    pub cos_coeffs: Vec<f64>,
}

impl<T: Scalar> PeriodicWave<T> {
    /// The `a = 0` member: `phi = cos`, `K = K_eps`.
    pub fn seed(params: &BondParams<T>, scaling: &ScalingParams<T>, harmonics: usize) -> Result<Self> {
        if harmonics < 8 {
            return Err(Error::InvalidArgument(format!("need at least 8 harmonics, got {harmonics}")));
        }
        let mut c = vec![T::zero(); harmonics + 1];
        c[1] = T::one();
        Ok(Self {
            params: *params,
            scaling: *scaling,
            a: T::zero(),
            k: k_eps(params, scaling)?,
            cos_coeffs: c,
        })
    }

    pub fn harmonics(&self) -> usize {
        self.cos_coeffs.len() - 1
    }

    /// `phi(y)`.
    pub fn phi(&self, y: T) -> T {
        self.cos_coeffs
            .iter()
            .enumerate()
            .fold(T::zero(), |s, (n, &c)| s + c * (T::from_usize_exact(n) * y).cos())
    }

    pub fn to_record(&self) -> PeriodicWaveRecord {
        PeriodicWaveRecord {
            beta: self.params.beta().to_f64_lossy(),
            epsilon: self.scaling.epsilon().to_f64_lossy(),
            a: self.a.to_f64_lossy(),
            k: self.k.to_f64_lossy(),
            cos_coeffs: self.cos_coeffs.iter().map(|c| c.to_f64_lossy()).collect(),
        }
    }

    pub fn from_record(rec: &PeriodicWaveRecord) -> Result<Self> {
        let lit = |v: f64| {
            T::from_f64(v).ok_or_else(|| Error::InvalidArgument(format!("{v} not representable")))
        };
        let params = BondParams::new(lit(rec.beta)?)?;
        let scaling = ScalingParams::new(&params, lit(rec.epsilon)?)?;
        Ok(Self {
            params,
            scaling,
            a: lit(rec.a)?,
            k: lit(rec.k)?,
            cos_coeffs: rec.cos_coeffs.iter().map(|&c| lit(c)).collect::<Result<_>>()?,
        })
    }
}

/// Cosine coefficients of the product of two cosine series, truncated to `len`
/// terms: `cos(iy) cos(jy) = (cos((i+j)y) + cos((i-j)y)) / 2`.
pub fn cos_product<T: Scalar>(a: &[T], b: &[T], len: usize) -> Vec<T> {
    let mut out = vec![T::zero(); len];
    let half = T::lit(0.5);
    for (i, &ai) in a.iter().enumerate() {
        if ai == T::zero() {
            continue;
        }
        for (j, &bj) in b.iter().enumerate() {
            let p = half * ai * bj;
            if i + j < len {
                out[i + j] += p;
            }
            out[i.abs_diff(j)] += p;
        }
    }
    out
}

/// Reduced equations `E_0..E_M` followed by `c_1 - 1`.
fn reduced_residual<T: Scalar>(wave: &PeriodicWave<T>) -> Vec<T> {
    let c = &wave.cos_coeffs;
    let len = c.len();
    let sq = cos_product(c, c, len);
    let mut r: Vec<T> = (0..len)
        .map(|n| l_eps(&wave.params, &wave.scaling, T::from_usize_exact(n) * wave.k) * c[n] + wave.a * sq[n])
        .collect();
    r.push(c[1] - T::one());
    r
}

/// Mode equations `[m(eps n K) - 1 - gamma eps^2] a c_n + eps^2 a^2 (phi^2)_n`
/// for `n = 0..M`, followed by the normalization residual `c_1 - 1`.
pub fn periodic_residual<T: Scalar>(wave: &PeriodicWave<T>) -> Vec<T> {
    let eps = wave.scaling.epsilon();
    let s = wave.a * eps * eps;
    let mut r = reduced_residual(wave);
    let last = r.len() - 1;
    for v in &mut r[..last] {
        *v *= s;
    }
    r
}

/// Upper bound for `sup_y |E(y)|` of the reduced equation over one period,
/// including the modes `M+1..2M` that the truncated system drops.
pub fn reduced_residual_sup<T: Scalar>(wave: &PeriodicWave<T>) -> T {
    let c = &wave.cos_coeffs;
    let full = 2 * c.len() - 1;
    let sq = cos_product(c, c, full);
    (0..full).fold(T::zero(), |s, n| {
        let lin = if n < c.len() {
            l_eps(&wave.params, &wave.scaling, T::from_usize_exact(n) * wave.k) * c[n]
        } else {
            T::zero()
        };
        s + (lin + wave.a * sq[n]).abs()
    })
}

/// Settings for [`solve_periodic`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeriodicOptions<T> {
    pub harmonics: usize,
    /// Largest admissible `|a|`.
    pub alpha0: T,
    pub continuation_steps: usize,
    pub max_newton: usize,
    /// Sup-norm target for the reduced residual.
    pub tol: T,
    /// Harmonic count beyond which aliasing failures are not retried.
    pub max_harmonics: usize,
}

impl<T: Scalar> Default for PeriodicOptions<T> {
    fn default() -> Self {
        Self {
            harmonics: 32,
            alpha0: T::lit(0.05),
            continuation_steps: 10,
            max_newton: 50,
            tol: T::lit(1e-12),
            max_harmonics: 1024,
        }
    }
}

fn jacobian<T: Scalar>(wave: &PeriodicWave<T>) -> DenseMatrix<T> {
    let c = &wave.cos_coeffs;
    let len = c.len();
    let dim = len + 1;
    let eps = wave.scaling.epsilon();
    let mut j = DenseMatrix::zeros(dim);
    let mut e = vec![T::zero(); len];
    for m in 0..len {
        e[m] = T::one();
        // d(phi^2)/dc_m = 2 phi * cos(m y)
        let col = cos_product(c, &e, len);
        for n in 0..len {
            j[(n, m)] = T::lit(2.0) * wave.a * col[n];
        }
        e[m] = T::zero();
    }
    for n in 0..len {
        let nf = T::from_usize_exact(n);
        j[(n, n)] += l_eps(&wave.params, &wave.scaling, nf * wave.k);
        let (_, dm, _) = m_beta_jet(&wave.params, eps * nf * wave.k);
        j[(n, len)] = nf * dm * c[n] / eps;
    }
    j[(len, 1)] = T::one();
    j
}

fn sup<T: Scalar>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |m, x| m.max(x.abs()))
}

fn newton<T: Scalar>(wave: &mut PeriodicWave<T>, opts: &PeriodicOptions<T>) -> Result<()> {
    let mut r = reduced_residual(wave);
    let mut rn = sup(&r);
    for it in 0..opts.max_newton {
        if rn <= opts.tol {
            return Ok(());
        }
        let neg: Vec<T> = r.iter().map(|&v| -v).collect();
        let step = jacobian(wave).lu()?.solve(&neg)?;
        let len = wave.cos_coeffs.len();
        let mut damping = T::one();
        let mut accepted = false;
        for _ in 0..30 {
            let mut trial = wave.clone();
            for n in 0..len {
                trial.cos_coeffs[n] += damping * step[n];
            }
            trial.k += damping * step[len];
            let tr = reduced_residual(&trial);
            let tn = sup(&tr);
            if tn.is_finite() && (tn < rn || tn <= opts.tol) {
                *wave = trial;
                r = tr;
                rn = tn;
                accepted = true;
                break;
            }
            damping *= T::lit(0.5);
        }
        if !accepted {
            return Err(Error::NewtonDivergence {
                iterations: it + 1,
                residual: rn.to_f64_lossy(),
            });
        }
    }
    if rn <= opts.tol {
        Ok(())
    } else {
        Err(Error::NewtonDivergence {
            iterations: opts.max_newton,
            residual: rn.to_f64_lossy(),
        })
    }
}

fn continue_to<T: Scalar>(
    params: &BondParams<T>,
    scaling: &ScalingParams<T>,
    a: T,
    harmonics: usize,
    opts: &PeriodicOptions<T>,
) -> Result<PeriodicWave<T>> {
    let mut wave = PeriodicWave::seed(params, scaling, harmonics)?;
    if a == T::zero() {
        return Ok(wave);
    }
    let steps = opts.continuation_steps.max(1);
    for s in 1..=steps {
        wave.a = a * T::from_usize_exact(s) / T::from_usize_exact(steps);
        newton(&mut wave, opts)?;
    }
    Ok(wave)
}

/// Member of the periodic family at amplitude `a`.
///
/// Continuation from the `a = 0` seed in equal steps, a damped Newton solve at
/// each, and a final aliasing check `|c_M| <= 1e-10 max|c_n|`; the harmonic
/// count is doubled while the check fails.
pub fn solve_periodic<T: Scalar>(
    params: &BondParams<T>,
    scaling: &ScalingParams<T>,
    a: T,
    opts: PeriodicOptions<T>,
) -> Result<PeriodicWave<T>> {
    params.require(Regime::Weak)?;
    if !(a.abs() <= opts.alpha0) {
        return Err(Error::AmplitudeOutOfRange {
            amplitude: a.to_f64_lossy(),
            bound: opts.alpha0.to_f64_lossy(),
        });
    }
    let mut harmonics = opts.harmonics;
    loop {
        let wave = continue_to(params, scaling, a, harmonics, &opts)?;
        let c = &wave.cos_coeffs;
        let tail = c[harmonics].abs();
        if tail <= T::lit(1e-10) * sup(c) {
            return Ok(wave);
        }
        if harmonics * 2 > opts.max_harmonics {
            return Err(Error::AliasingTail {
                tail: tail.to_f64_lossy(),
                harmonics,
            });
        }
        harmonics *= 2;
    }
}

/// Samples `a phi(K X)` (or `phi(K X)` when `with_amplitude` is false) on a grid.
///
/// With `exact` set, `K` must be a grid frequency (to `1e-9` in mode units);
/// the field is then built directly from its coefficients, dropping harmonics
/// at or above the Nyquist mode.
pub fn sample_on_grid<T: Scalar>(
    wave: &PeriodicWave<T>,
    grid: &Grid<T>,
    with_amplitude: bool,
    exact: bool,
) -> Result<SpectralField<T>> {
    let amp = if with_amplitude { wave.a } else { T::one() };
    if exact {
        let modes = wave.k / grid.dk();
        let j0 = modes.round();
        if (modes - j0).abs() > T::lit(1e-9) {
            return Err(Error::OffGridFrequency {
                k: wave.k.to_f64_lossy(),
                offset: (modes - j0).to_f64_lossy(),
            });
        }
        let j0 = j0.to_i64().unwrap_or(i64::MAX);
        let mut coeffs = vec![Complex::new(T::zero(), T::zero()); grid.len()];
        let half = T::lit(0.5);
        for (n, &c) in wave.cos_coeffs.iter().enumerate() {
            if n == 0 {
                coeffs[0] += Complex::new(amp * c, T::zero());
                continue;
            }
            let m = j0.saturating_mul(n as i64);
            if let (Some(p), Some(q)) = (grid.index_of_mode(m), grid.index_of_mode(-m)) {
                if m < (grid.len() / 2) as i64 {
                    coeffs[p] += Complex::new(half * amp * c, T::zero());
                    coeffs[q] += Complex::new(half * amp * c, T::zero());
                }
            }
        }
        SpectralField::from_coeffs(grid, coeffs)
    } else {
        Ok(SpectralField::from_fn(grid, |x| amp * wave.phi(wave.k * x)))
    }
}

/// `m_beta(eps n K)` for the harmonics of a wave, for callers that need the
/// dispersion at the wave's own frequencies.
pub fn harmonic_speeds<T: Scalar>(wave: &PeriodicWave<T>) -> Vec<T> {
    let eps = wave.scaling.epsilon();
    (0..wave.cos_coeffs.len())
        .map(|n| m_beta(&wave.params, eps * T::from_usize_exact(n) * wave.k))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fit::loglog_slope;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn setup(beta: f64, eps: f64) -> (BondParams<f64>, ScalingParams<f64>) {
        let p = BondParams::new(beta).unwrap();
        let s = ScalingParams::new(&p, eps).unwrap();
        (p, s)
    }

    fn solve(beta: f64, eps: f64, a: f64) -> PeriodicWave<f64> {
        let (p, s) = setup(beta, eps);
        solve_periodic(&p, &s, a, PeriodicOptions::default()).unwrap()
    }

    #[test]
    fn cos_product_identities() {
        // cos^2 = (1 + cos 2y) / 2
        let c = [0.0, 1.0, 0.0];
        assert_eq!(cos_product(&c, &c, 3), vec![0.5, 0.0, 0.5]);
        // (1 + cos y) cos y = cos y + (1 + cos 2y)/2
        assert_eq!(cos_product(&[1.0, 1.0], &[0.0, 1.0], 3), vec![0.5, 1.0, 0.5]);
    }

    #[test]
    fn zero_amplitude_is_the_seed() {
        let (p, s) = setup(0.1, 0.1);
        let w = solve(0.1, 0.1, 0.0);
        assert_eq!(w.k, k_eps(&p, &s).unwrap());
        assert_eq!(w.cos_coeffs[1], 1.0);
        assert!(w.cos_coeffs.iter().enumerate().all(|(n, &c)| n == 1 || c == 0.0));
        assert!(periodic_residual(&w).iter().all(|&r| r.abs() <= 1e-13));
        assert!(reduced_residual_sup(&w) <= 1e-10);
    }

    #[test]
    fn degenerate_limit_only_normalization_survives() {
        let (p, s) = setup(0.1, 0.1);
        let mut w = PeriodicWave::seed(&p, &s, 8).unwrap();
        w.k *= 1.1;
        w.cos_coeffs[1] = 1.5;
        let r = periodic_residual(&w);
        assert!(r[..r.len() - 1].iter().all(|&v| v == 0.0));
        assert_eq!(r[r.len() - 1], 0.5);
    }

    #[test]
    fn converged_wave_solves_equation() {
        let w = solve(0.2, 0.2, 0.03);
        assert!(reduced_residual_sup(&w) <= 1e-11, "{}", reduced_residual_sup(&w));
        assert!(sup(&periodic_residual(&w)) <= 1e-12);
        assert_eq!(w.cos_coeffs[1], 1.0);
        let small = solve(0.2, 0.2, 0.005);
        let lead = 0.005 / (2.0 * small.params.gamma());
        assert!((small.cos_coeffs[0] - lead).abs() < 0.01 * lead);
    }

    #[test]
    fn residual_is_linear_in_perturbations() {
        let w = solve(0.1, 0.2, 0.02);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let dir: Vec<f64> = (0..w.cos_coeffs.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let hs = [1e-3, 5e-4, 2.5e-4, 1.25e-4];
        let norms: Vec<f64> = hs
            .iter()
            .map(|&h| {
                let mut p = w.clone();
                for (c, d) in p.cos_coeffs.iter_mut().zip(&dir) {
                    *c += h * d;
                }
                sup(&reduced_residual(&p))
            })
            .collect();
        let slope = loglog_slope(&hs, &norms).unwrap();
        assert!((slope - 1.0).abs() < 0.05, "{slope}");
    }

    #[test]
    fn amplitude_scalings() {
        let amps = [0.04, 0.02, 0.01, 0.005];
        let waves: Vec<_> = amps.iter().map(|&a| solve(0.1, 0.2, a)).collect();
        let k0 = solve(0.1, 0.2, 0.0).k;
        let c0: Vec<f64> = waves.iter().map(|w| w.cos_coeffs[0].abs()).collect();
        let c2: Vec<f64> = waves.iter().map(|w| w.cos_coeffs[2].abs()).collect();
        let dk: Vec<f64> = waves.iter().map(|w| (w.k - k0).abs()).collect();
        assert!((loglog_slope(&amps, &c0).unwrap() - 1.0).abs() <= 0.1);
        assert!((loglog_slope(&amps, &c2).unwrap() - 1.0).abs() <= 0.1);
        assert!(loglog_slope(&amps, &dk).unwrap() >= 1.0);
        // continuity along the branch
        for pair in waves.windows(2) {
            let jump = pair[0]
                .cos_coeffs
                .iter()
                .zip(&pair[1].cos_coeffs)
                .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
            assert!(jump <= 10.0 * 0.02);
        }
    }

    #[test]
    fn errors() {
        let (p, s) = setup(0.1, 0.2);
        assert!(matches!(
            solve_periodic(&p, &s, 0.1, PeriodicOptions::default()),
            Err(Error::AmplitudeOutOfRange { .. })
        ));
        let (q, t) = setup(0.5, 0.2);
        assert!(matches!(
            solve_periodic(&q, &t, 0.01, PeriodicOptions::default()),
            Err(Error::WrongRegime { .. })
        ));
        assert!(PeriodicWave::seed(&p, &s, 4).is_err());
    }

    #[test]
    fn sampling() {
        let w = solve(0.1, 0.2, 0.02);
        let modes = 12.0;
        let grid = Grid::new(modes * std::f64::consts::PI / w.k, 512).unwrap();
        let exact = sample_on_grid(&w, &grid, true, true).unwrap();
        let direct = sample_on_grid(&w, &grid, true, false).unwrap();
        assert!((&exact - &direct).max_abs() < 1e-14);
        let mean = exact.values().iter().sum::<f64>() / 512.0;
        assert!((mean - 0.02 * w.cos_coeffs[0]).abs() < 1e-15);
        let off = Grid::new(10.0, 512).unwrap();
        assert!(matches!(
            sample_on_grid(&w, &off, true, true),
            Err(Error::OffGridFrequency { .. })
        ));
        let seed = solve(0.1, 0.2, 0.0);
        let grid = Grid::new(12.0 * std::f64::consts::PI / seed.k, 512).unwrap();
        let f = sample_on_grid(&seed, &grid, false, true).unwrap();
        let nonzero = f.coeffs().iter().filter(|c| c.norm() > 1e-15).count();
        assert_eq!(nonzero, 2);
    }

    #[test]
    fn sampled_wave_solves_full_equation_on_grid() {
        let w = solve(0.2, 0.25, 0.02);
        let grid = Grid::new(20.0 * std::f64::consts::PI / w.k, 1024).unwrap();
        let f = sample_on_grid(&w, &grid, true, true).unwrap();
        let eps = 0.25;
        let lin = f.apply_multiplier(|k| m_beta(&w.params, eps * k) - w.scaling.c()).unwrap();
        let res = &lin + &f.square().scale(eps * eps);
        assert!(res.max_abs() <= 1e-10 * f.max_abs(), "{}", res.max_abs() / f.max_abs());
    }

    #[test]
    fn record_round_trip() {
        let w = solve(0.1, 0.2, 0.01);
        let json = serde_json::to_string(&w.to_record()).unwrap();
        assert!(json.contains("\"K\""));
        let back: PeriodicWave<f64> =
            PeriodicWave::from_record(&serde_json::from_str(&json).unwrap()).unwrap();
        assert_eq!(back, w);
    }
}
