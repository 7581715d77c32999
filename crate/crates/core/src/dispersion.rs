//! Phase-speed symbol of the capillary-gravity Whitham equation and the
//! quantities derived from it.
//!
//! The nondimensional symbol is
//!
//! ```text
//! m_beta(k) = sqrt((1 + beta k^2) tanh(k) / k)
//! ```
//!
//! with `m_beta(0) = 1`. The long-wave expansion `m_beta(k) = 1 - gamma k^2 + O(k^4)`
//! with `gamma = (1 - 3 beta) / 6` fixes the near-critical speed `c = 1 + gamma eps^2`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Surface-tension regime selected by the Bond number.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    /// `0 < beta < 1/3`: supercritical generalized solitary waves.
    Weak,
    /// `beta > 1/3`: subcritical solitary waves of depression.
    Strong,
}

impl Regime {
    pub fn name(self) -> &'static str {
        match self {
            Regime::Weak => "weak (beta < 1/3)",
            Regime::Strong => "strong (beta > 1/3)",
        }
    }
}

/// The Bond number and its derived long-wave coefficient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BondParams<T> {
    beta: T,
    gamma: T,
}

impl<T: Scalar> BondParams<T> {
    /// Builds the parameter set. `beta` must be positive and different from 1/3;
    /// values within a few ulps of 1/3 count as the critical value.
    pub fn new(beta: T) -> Result<Self> {
        if !(beta > T::zero()) || !beta.is_finite() {
            return Err(Error::NonPositiveInput {
                name: "beta",
                value: beta.to_f64_lossy(),
            });
        }
        let three = T::lit(3.0);
        if (three * beta - T::one()).abs() <= T::lit(8.0) * T::epsilon() {
            return Err(Error::CriticalBond {
                beta: beta.to_f64_lossy(),
            });
        }
        let gamma = (T::one() - three * beta) / T::lit(6.0);
        Ok(Self { beta, gamma })
    }

    pub fn beta(&self) -> T {
        self.beta
    }

    /// `gamma_beta = (1 - 3 beta) / 6 = -m_beta''(0) / 2`.
    pub fn gamma(&self) -> T {
        self.gamma
    }

    pub fn regime(&self) -> Regime {
        if self.beta < T::lit(1.0 / 3.0) {
            Regime::Weak
        } else {
            Regime::Strong
        }
    }

    pub(crate) fn require(&self, regime: Regime) -> Result<()> {
        if self.regime() == regime {
            Ok(())
        } else {
            Err(Error::WrongRegime {
                expected: regime.name(),
                beta: self.beta.to_f64_lossy(),
            })
        }
    }
}

/// Long-wave scaling: small parameter `epsilon` and speed `c = 1 + gamma eps^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingParams<T> {
    epsilon: T,
    c: T,
}

impl<T: Scalar> ScalingParams<T> {
    pub fn new(params: &BondParams<T>, epsilon: T) -> Result<Self> {
        if !(epsilon > T::zero()) || !epsilon.is_finite() {
            return Err(Error::NonPositiveInput {
                name: "epsilon",
                value: epsilon.to_f64_lossy(),
            });
        }
        Ok(Self {
            epsilon,
            c: T::one() + params.gamma() * epsilon * epsilon,
        })
    }

    pub fn epsilon(&self) -> T {
        self.epsilon
    }

    pub fn c(&self) -> T {
        self.c
    }
}

/// `beta = tau / (g d^2)`.
pub fn nondimensionalize<T: Scalar>(g: T, d: T, tau: T) -> Result<BondParams<T>> {
    for (name, value) in [("g", g), ("d", d), ("tau", tau)] {
        if !(value > T::zero()) {
            return Err(Error::NonPositiveInput {
                name,
                value: value.to_f64_lossy(),
            });
        }
    }
    BondParams::new(tau / (g * d * d))
}

// Taylor coefficients of tanh(k)/k in powers of k^2.
const TANHC_SERIES: [f64; 8] = [
    1.0,
    -1.0 / 3.0,
    2.0 / 15.0,
    -17.0 / 315.0,
    62.0 / 2835.0,
    -1382.0 / 155925.0,
    21844.0 / 6081075.0,
    -929569.0 / 638512875.0,
];

const SYMBOL_SERIES_CUTOFF: f64 = 1e-4;
const DERIV_SERIES_CUTOFF: f64 = 0.05;

/// `tanh(k)/k`, with the sixth-order expansion below `|k| < 1e-4`.
fn tanhc<T: Scalar>(k: T) -> T {
    let ak = k.abs();
    if ak < T::lit(SYMBOL_SERIES_CUTOFF) {
        let k2 = k * k;
        T::one() + k2 * (T::lit(TANHC_SERIES[1]) + k2 * (T::lit(TANHC_SERIES[2]) + k2 * T::lit(TANHC_SERIES[3])))
    } else {
        ak.tanh() / ak
    }
}

/// `t, t', t''` for `t(k) = tanh(k)/k` at `k >= 0`.
fn tanhc_jet<T: Scalar>(k: T) -> (T, T, T) {
    if k < T::lit(DERIV_SERIES_CUTOFF) {
        let k2 = k * k;
        let mut t = T::zero();
        let mut dt = T::zero();
        let mut d2t = T::zero();
        let mut pow = T::one(); // k^(2n)
        for (n, &a) in TANHC_SERIES.iter().enumerate() {
            let a = T::lit(a);
            let two_n = T::from_usize_exact(2 * n);
            t += a * pow;
            if n >= 1 {
                // d/dk k^(2n) = 2n k^(2n-1); d2/dk2 = 2n(2n-1) k^(2n-2)
                dt += a * two_n * pow / k.max(T::min_positive_value());
                d2t += a * two_n * (two_n - T::one()) * pow / k2.max(T::min_positive_value());
            }
            pow *= k2;
        }
        if k == T::zero() {
            dt = T::zero();
            d2t = T::lit(2.0) * T::lit(TANHC_SERIES[1]);
        }
        (t, dt, d2t)
    } else {
        let th = k.tanh();
        let ch = k.cosh();
        let sech2 = if ch.is_finite() { T::one() / (ch * ch) } else { T::zero() };
        let t = th / k;
        let dth = sech2;
        let d2th = T::lit(-2.0) * th * sech2;
        let dt = dth / k - th / (k * k);
        let d2t = d2th / k - T::lit(2.0) * dth / (k * k) + T::lit(2.0) * th / (k * k * k);
        (t, dt, d2t)
    }
}

/// Phase speed `m_beta(k)`. Even in `k`, equal to one at the origin.
pub fn m_beta<T: Scalar>(params: &BondParams<T>, k: T) -> T {
    ((T::one() + params.beta() * k * k) * tanhc(k)).sqrt()
}

/// Order of an analytic symbol derivative.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DerivOrder {
    First,
    Second,
}

/// Closed-form first or second derivative of `m_beta` at `k`.
pub fn m_beta_derivs<T: Scalar>(params: &BondParams<T>, k: T, order: DerivOrder) -> T {
    let (_, d1, d2) = m_beta_jet(params, k);
    match order {
        DerivOrder::First => d1,
        DerivOrder::Second => d2,
    }
}

/// `(m, m', m'')` at `k`, from `m = sqrt(f)` with `f = (1 + beta k^2) tanh(k)/k`.
pub fn m_beta_jet<T: Scalar>(params: &BondParams<T>, k: T) -> (T, T, T) {
    let sign = if k < T::zero() { -T::one() } else { T::one() };
    let ak = k.abs();
    let beta = params.beta();
    let two = T::lit(2.0);
    let (t, dt, d2t) = tanhc_jet(ak);
    let p = T::one() + beta * ak * ak;
    let f = p * t;
    let df = two * beta * ak * t + p * dt;
    let d2f = two * beta * t + T::lit(4.0) * beta * ak * dt + p * d2t;
    let m = f.sqrt();
    let dm = df / (two * m);
    let d2m = d2f / (two * m) - df * df / (T::lit(4.0) * m * m * m);
    (m, sign * dm, d2m)
}

/// Remainder of the long-wave expansion, `m_beta(k) - 1 + gamma k^2 = O(k^4)`.
pub fn quartic_remainder<T: Scalar>(params: &BondParams<T>, k: T) -> T {
    m_beta(params, k) - T::one() + params.gamma() * k * k
}

/// Symbol of `L_eps`: `eps^-2 (m_beta(eps K) - 1 - gamma eps^2)`.
pub fn l_eps<T: Scalar>(params: &BondParams<T>, scaling: &ScalingParams<T>, big_k: T) -> T {
    let eps = scaling.epsilon();
    (m_beta(params, eps * big_k) - scaling.c()) / (eps * eps)
}

/// Settings for the critical-frequency root finder.
#[derive(Debug, Clone, Copy)]
pub struct RootOptions<T> {
    /// Absolute tolerance on `|m_beta(k) - c|`.
    pub tol: T,
    pub max_iter: usize,
}

impl<T: Scalar> Default for RootOptions<T> {
    fn default() -> Self {
        Self {
            tol: T::lit(1e-13),
            max_iter: 400,
        }
    }
}

/// Global minimizer of `m_beta` on `(0, 10)` by golden-section search.
///
/// For `beta >= 1/3` the symbol is increasing and the search collapses to the
/// left end of the interval.
pub fn k_min<T: Scalar>(params: &BondParams<T>) -> T {
    let inv_phi = T::lit(0.618_033_988_749_894_8);
    let mut a = T::zero();
    let mut b = T::lit(10.0);
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let mut f1 = m_beta(params, x1);
    let mut f2 = m_beta(params, x2);
    for _ in 0..200 {
        if (b - a) <= T::lit(1e-12) * (T::one() + a.abs()) {
            break;
        }
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = m_beta(params, x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = m_beta(params, x2);
        }
    }
    (a + b) / T::lit(2.0)
}

/// The unique `k > k_min` with `m_beta(k) = c` (weak regime only).
pub fn k_crit<T: Scalar>(params: &BondParams<T>, c: T) -> Result<T> {
    k_crit_with(params, c, RootOptions::default())
}

pub fn k_crit_with<T: Scalar>(params: &BondParams<T>, c: T, opts: RootOptions<T>) -> Result<T> {
    params.require(Regime::Weak)?;
    let kmin = k_min(params);
    let mmin = m_beta(params, kmin);
    if c < mmin {
        return Err(Error::NoRoot {
            target: c.to_f64_lossy(),
            minimum: mmin.to_f64_lossy(),
        });
    }
    let mut lo = kmin;
    let mut hi = T::lit(2.0) * kmin.max(T::one());
    let mut doublings = 0;
    while m_beta(params, hi) < c {
        lo = hi;
        hi *= T::lit(2.0);
        doublings += 1;
        if doublings > 200 || !hi.is_finite() {
            return Err(Error::NoRoot {
                target: c.to_f64_lossy(),
                minimum: mmin.to_f64_lossy(),
            });
        }
    }
    // m_beta is increasing on (k_min, inf): plain bisection is safe.
    let mut best = hi;
    let mut best_res = (m_beta(params, hi) - c).abs();
    for _ in 0..opts.max_iter {
        let mid = lo + (hi - lo) / T::lit(2.0);
        let val = m_beta(params, mid) - c;
        if val.abs() < best_res {
            best = mid;
            best_res = val.abs();
        }
        if val < T::zero() {
            lo = mid;
        } else {
            hi = mid;
        }
        if (hi - lo) <= T::lit(2.0) * T::epsilon() * hi {
            break;
        }
    }
    for cand in [lo, hi] {
        let r = (m_beta(params, cand) - c).abs();
        if r < best_res {
            best = cand;
            best_res = r;
        }
    }
    Ok(best)
}

/// Scaled critical frequency `K_eps = k_crit(beta, 1 + gamma eps^2) / eps`.
pub fn k_eps<T: Scalar>(params: &BondParams<T>, scaling: &ScalingParams<T>) -> Result<T> {
    Ok(k_crit(params, scaling.c())? / scaling.epsilon())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn bond(beta: f64) -> BondParams<f64> {
        BondParams::new(beta).unwrap()
    }

    fn richardson(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
        let d = |h: f64| (f(x + h) - f(x - h)) / (2.0 * h);
        (4.0 * d(h / 2.0) - d(h)) / 3.0
    }

    #[test]
    fn nondimensionalize_examples() {
        let p = nondimensionalize(1.0, 1.0, 0.1).unwrap();
        assert_eq!(p.beta(), 0.1);
        let p = nondimensionalize(9.81, 0.01, 7.3e-5).unwrap();
        assert_relative_eq!(p.beta(), 0.074_413_863_404_689_09, max_relative = 1e-14);
        assert!(matches!(
            nondimensionalize(9.81, 1.0, 9.81 / 3.0),
            Err(Error::CriticalBond { .. })
        ));
        assert!(matches!(
            nondimensionalize(9.81, 0.0, 1.0),
            Err(Error::NonPositiveInput { name: "d", .. })
        ));
        assert!(matches!(
            nondimensionalize(-1.0, 1.0, 1.0),
            Err(Error::NonPositiveInput { name: "g", .. })
        ));
    }

    #[test]
    fn params_invariants() {
        let p = bond(0.1);
        assert_eq!(p.gamma(), (1.0 - 3.0 * 0.1) / 6.0);
        assert_eq!(p.regime(), Regime::Weak);
        assert_eq!(bond(0.5).regime(), Regime::Strong);
        assert!(BondParams::new(1.0 / 3.0).is_err());
        assert!(BondParams::<f64>::new(0.0).is_err());
        let s = ScalingParams::new(&p, 0.1).unwrap();
        assert_eq!(s.c(), 1.0 + p.gamma() * 0.01);
        assert!(ScalingParams::new(&p, 0.0).is_err());
    }

    #[test]
    fn symbol_values() {
        assert_eq!(m_beta(&bond(0.2), 0.0), 1.0);
        assert_relative_eq!(
            m_beta(&bond(0.1), 2.0),
            0.821_473_862_063_225_8,
            max_relative = 1e-15
        );
        for k in [0.3, 1.7, 25.0] {
            assert_eq!(m_beta(&bond(0.27), k), m_beta(&bond(0.27), -k));
        }
    }

    #[test]
    fn taylor_branch_matches_closed_form_at_cutoff() {
        let p = bond(0.15);
        let k = SYMBOL_SERIES_CUTOFF;
        let closed = ((1.0 + p.beta() * k * k) * (k.tanh() / k)).sqrt();
        assert!((m_beta(&p, k * (1.0 - 1e-9)) - closed).abs() < 1e-14);
        let (t, dt, d2t) = tanhc_jet(DERIV_SERIES_CUTOFF);
        let (t2, dt2, d2t2) = tanhc_jet(DERIV_SERIES_CUTOFF * (1.0 - 1e-12));
        assert!((t - t2).abs() < 1e-14);
        assert!((dt - dt2).abs() < 1e-12);
        assert!((d2t - d2t2).abs() < 1e-11);
    }

    #[test]
    fn derivatives_at_origin() {
        assert_eq!(m_beta_derivs(&bond(0.2), 0.0, DerivOrder::First), 0.0);
        // beta = 1/3 itself is rejected, so check the limit of -2 gamma.
        let d = m_beta_derivs(&bond(1.0 / 3.0 + 1e-9), 0.0, DerivOrder::Second);
        assert!(d.abs() < 1e-8);
        assert_relative_eq!(
            m_beta_derivs(&bond(0.1), 0.0, DerivOrder::Second),
            -7.0 / 30.0,
            max_relative = 1e-13
        );
    }

    #[test]
    fn first_derivative_matches_central_difference() {
        let p = bond(0.2);
        let h = 1e-5;
        let fd = (m_beta(&p, 1.5 + h) - m_beta(&p, 1.5 - h)) / (2.0 * h);
        assert_relative_eq!(m_beta_derivs(&p, 1.5, DerivOrder::First), fd, max_relative = 1e-8);
    }

    #[test]
    fn derivatives_match_richardson_on_samples() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let beta: f64 = rng.gen_range(0.02..1.5);
            let k: f64 = rng.gen_range(0.05..12.0);
            if (3.0 * beta - 1.0).abs() < 1e-3 {
                continue;
            }
            let p = bond(beta);
            let f = |x: f64| m_beta(&p, x);
            let d1 = richardson(f, k, 1e-3);
            let fp = |x: f64| m_beta_derivs(&p, x, DerivOrder::First);
            let d2 = richardson(fp, k, 1e-3);
            let (_, a1, a2) = m_beta_jet(&p, k);
            assert!((a1 - d1).abs() <= 1e-8 * a1.abs().max(1e-2), "k={k} beta={beta}");
            assert!((a2 - d2).abs() <= 1e-8 * a2.abs().max(1e-2), "k={k} beta={beta}");
        }
    }

    #[test]
    fn single_interior_minimum_in_weak_regime() {
        for beta in [0.05, 0.1, 0.2, 0.3] {
            let p = bond(beta);
            let n = 10_000;
            let mut changes = 0;
            let mut prev = m_beta_derivs(&p, 1e-3, DerivOrder::First).signum();
            for i in 1..n {
                let k = 1e-3 * (1e6f64).powf(i as f64 / (n - 1) as f64) * 1e-0;
                let s = m_beta_derivs(&p, k.min(1e3), DerivOrder::First).signum();
                if s != prev {
                    changes += 1;
                    prev = s;
                }
            }
            assert_eq!(changes, 1, "beta = {beta}");
        }
    }

    #[test]
    fn high_frequency_growth() {
        let p = bond(0.2);
        let k = 1e6;
        assert!((m_beta(&p, k) / (p.beta() * k).sqrt() - 1.0).abs() < 1e-3);
    }

    #[test]
    fn quartic_remainder_exponent() {
        let n = 40;
        let ks: Vec<f64> = (0..n)
            .map(|i| 10f64.powf(-3.0 + i as f64 / (n - 1) as f64 * (0.3f64.log10() + 3.0)))
            .collect();
        for beta in [0.1, 0.2, 0.5, 2.0] {
            let p = bond(beta);
            let r: Vec<f64> = ks.iter().map(|&k| quartic_remainder(&p, k).abs()).collect();
            let slope = crate::fit::loglog_slope(&ks, &r).unwrap();
            assert!((slope - 4.0).abs() <= 0.1, "beta = {beta}: {slope}");
        }
    }

    #[test]
    fn l_eps_small_eps_limit_and_evenness() {
        let p = bond(0.1);
        let s = ScalingParams::new(&p, 1e-3).unwrap();
        for big_k in [0.5, 1.0, 3.0] {
            let l = l_eps(&p, &s, big_k);
            assert!((l + p.gamma() * (1.0 + big_k * big_k)).abs() < 1e-4, "K = {big_k}: {l}");
            assert_eq!(l, l_eps(&p, &s, -big_k));
        }
    }

    #[test]
    fn k_crit_examples() {
        let p = bond(0.1);
        let k = k_crit(&p, 1.0).unwrap();
        assert!(k > 0.0 && k > k_min(&p));
        assert!((m_beta(&p, k) - 1.0).abs() <= 1e-12);

        let p = bond(0.25);
        let k = k_crit(&p, 1.001).unwrap();
        assert!((m_beta(&p, k) - 1.001).abs() <= 1e-12);

        // Bisection oracle on a scanned sign-change bracket.
        let p = bond(0.1);
        let g = |k: f64| m_beta(&p, k) - 1.0;
        let (mut lo, mut hi) = (5.0, 12.0);
        assert!(g(lo) < 0.0 && g(hi) > 0.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if g(mid) < 0.0 {
                lo = mid
            } else {
                hi = mid
            }
        }
        assert_relative_eq!(k_crit(&p, 1.0).unwrap(), lo, max_relative = 1e-13);
    }

    #[test]
    fn k_crit_errors() {
        let p = bond(0.1);
        let mut mmin = f64::INFINITY;
        for i in 1..20_000 {
            mmin = mmin.min(m_beta(&p, i as f64 * 1e-3));
        }
        assert!(mmin < 1.0);
        assert!(matches!(k_crit(&p, mmin - 1e-3), Err(Error::NoRoot { .. })));
        assert!(matches!(k_crit(&bond(0.5), 1.0), Err(Error::WrongRegime { .. })));
    }

    #[test]
    fn scaled_critical_frequency() {
        let p = bond(0.1);
        let k1 = k_crit(&p, 1.0).unwrap();
        let mut prev_gap = f64::INFINITY;
        for eps in [0.2, 0.1, 0.05] {
            let s = ScalingParams::new(&p, eps).unwrap();
            let big_k = k_eps(&p, &s).unwrap();
            assert!(l_eps(&p, &s, big_k).abs() <= 1e-10);
            let gap = (big_k * eps - k1).abs();
            assert!(gap < prev_gap);
            prev_gap = gap;
        }
        for eps in [0.1, 0.05, 0.02] {
            let s1 = ScalingParams::new(&p, eps).unwrap();
            let s2 = ScalingParams::new(&p, eps / 2.0).unwrap();
            let ratio = k_eps(&p, &s2).unwrap() / k_eps(&p, &s1).unwrap();
            assert!((1.8..=2.2).contains(&ratio), "ratio {ratio}");
        }
    }

    #[test]
    fn single_precision_path() {
        let p = BondParams::<f32>::new(0.1).unwrap();
        assert_eq!(m_beta(&p, 0.0f32), 1.0);
        let k = k_crit(&p, 1.0f32).unwrap();
        assert!((m_beta(&p, k) - 1.0).abs() < 1e-5);
    }
}
