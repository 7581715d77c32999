//! Modulational stability index of the small-amplitude periodic waves.
//!
//! With `g(z) = z m_beta(z)`,
//!
//! ```text
//! Delta_BF(z) = 2 (m(z) - m(2z)) + (g'(z) - m(0))
//! Delta_MI(z) = g''(z) (g'(z) - m(0)) / (m(z) - m(2z)) * Delta_BF(z)
//! ```
//!
//! and the wave of frequency `z` is modulationally unstable when
//! `Delta_MI(z) < 0`.

use serde::{Deserialize, Serialize};

use crate::dispersion::{k_crit, m_beta, m_beta_jet, BondParams};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Half-width of the band in which a verdict is not issued.
pub const VERDICT_TOL: f64 = 1e-9;

/// `|m(k) - m(2k)|` below which the index is undefined.
pub const RESONANCE_TOL: f64 = 1e-12;

/// `(g', g'')` for `g(z) = z m_beta(z)`.
pub fn group_velocity_jet<T: Scalar>(params: &BondParams<T>, k: T) -> (T, T) {
    let (m, dm, d2m) = m_beta_jet(params, k);
    (m + k * dm, T::lit(2.0) * dm + k * d2m)
}

pub fn delta_bf<T: Scalar>(params: &BondParams<T>, k: T) -> T {
    let (g1, _) = group_velocity_jet(params, k);
    T::lit(2.0) * (m_beta(params, k) - m_beta(params, T::lit(2.0) * k)) + (g1 - T::one())
}

/// `g''(g' - m(0)) / (m(k) - m(2k))`, the factor multiplying `Delta_BF`.
pub fn mi_prefactor<T: Scalar>(params: &BondParams<T>, k: T) -> Result<T> {
    let denom = m_beta(params, k) - m_beta(params, T::lit(2.0) * k);
    if denom.abs() <= T::lit(RESONANCE_TOL) {
        return Err(Error::ResonantDenominator { k: k.to_f64_lossy() });
    }
    let (g1, g2) = group_velocity_jet(params, k);
    Ok(g2 * (g1 - T::one()) / denom)
}

pub fn delta_mi<T: Scalar>(params: &BondParams<T>, k: T) -> Result<T> {
    if !(k > T::zero()) {
        return Err(Error::NonPositiveInput {
            name: "k",
            value: k.to_f64_lossy(),
        });
    }
    Ok(mi_prefactor(params, k)? * delta_bf(params, k))
}

/// `Delta_MI` from `m_beta` values only, with `g'` and `g''` taken by
/// Richardson-extrapolated central differences.
pub fn delta_mi_richardson<T: Scalar>(params: &BondParams<T>, k: T) -> Result<T> {
    let g = |z: T| z * m_beta(params, z);
    let h = T::lit(1e-2) * k.min(T::one());
    let d1 = |h: T| (g(k + h) - g(k - h)) / (T::lit(2.0) * h);
    let d2 = |h: T| (g(k + h) - T::lit(2.0) * g(k) + g(k - h)) / (h * h);
    let rich = |d: &dyn Fn(T) -> T| {
        let a = d(h);
        let b = d(h / T::lit(2.0));
        let c = d(h / T::lit(4.0));
        let ab = (T::lit(4.0) * b - a) / T::lit(3.0);
        let bc = (T::lit(4.0) * c - b) / T::lit(3.0);
        (T::lit(16.0) * bc - ab) / T::lit(15.0)
    };
    let g1 = rich(&d1);
    let g2 = rich(&d2);
    let m1 = m_beta(params, k);
    let m2 = m_beta(params, T::lit(2.0) * k);
    let denom = m1 - m2;
    if denom.abs() <= T::lit(RESONANCE_TOL) {
        return Err(Error::ResonantDenominator { k: k.to_f64_lossy() });
    }
    let bf = T::lit(2.0) * denom + (g1 - T::one());
    Ok(g2 * (g1 - T::one()) / denom * bf)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Stable,
    Unstable,
    Indeterminate,
}

impl Verdict {
    pub fn classify(delta_mi: f64) -> Self {
        if delta_mi > VERDICT_TOL {
            Verdict::Stable
        } else if delta_mi < -VERDICT_TOL {
            Verdict::Unstable
        } else {
            Verdict::Indeterminate
        }
    }

    pub fn letter(self) -> &'static str {
        match self {
            Verdict::Stable => "S",
            Verdict::Unstable => "U",
            Verdict::Indeterminate => "I",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilitySample {
    pub beta: f64,
    pub k: f64,
    pub delta_bf: f64,
    /// NaN at a resonant denominator.
    pub delta_mi: f64,
    pub verdict: Verdict,
}

pub fn sample<T: Scalar>(params: &BondParams<T>, k: T) -> StabilitySample {
    let bf = delta_bf(params, k).to_f64_lossy();
    let (mi, verdict) = match delta_mi(params, k) {
        Ok(v) => {
            let v = v.to_f64_lossy();
            (v, Verdict::classify(v))
        }
        Err(_) => (f64::NAN, Verdict::Indeterminate),
    };
    StabilitySample {
        beta: params.beta().to_f64_lossy(),
        k: k.to_f64_lossy(),
        delta_bf: bf,
        delta_mi: mi,
        verdict,
    }
}

/// The four ways `Delta_MI` can change sign.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mechanism {
    /// `g''(k) = 0`: the group velocity has an extremum.
    GroupVelocityExtremum,
    /// `g'(k) = m(0)`: long-wave/short-wave resonance.
    LongShortResonance,
    /// `m(k) = m(2k)`: second-harmonic resonance.
    SecondHarmonic,
    /// `Delta_BF(k) = 0`.
    BenjaminFeir,
}

impl Mechanism {
    pub const ALL: [Mechanism; 4] = [
        Mechanism::GroupVelocityExtremum,
        Mechanism::LongShortResonance,
        Mechanism::SecondHarmonic,
        Mechanism::BenjaminFeir,
    ];

    pub fn id(self) -> u8 {
        match self {
            Mechanism::GroupVelocityExtremum => 1,
            Mechanism::LongShortResonance => 2,
            Mechanism::SecondHarmonic => 3,
            Mechanism::BenjaminFeir => 4,
        }
    }

    /// The function whose zeros the mechanism describes.
    pub fn value<T: Scalar>(self, params: &BondParams<T>, k: T) -> T {
        match self {
            Mechanism::GroupVelocityExtremum => group_velocity_jet(params, k).1,
            Mechanism::LongShortResonance => group_velocity_jet(params, k).0 - T::one(),
            Mechanism::SecondHarmonic => m_beta(params, k) - m_beta(params, T::lit(2.0) * k),
            Mechanism::BenjaminFeir => delta_bf(params, k),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MechanismRoot {
    pub k: f64,
    pub mechanism: Mechanism,
    /// Mechanism function at `k`.
    pub value: f64,
}

/// Sign changes of the four mechanism functions on `n_samples` equally spaced
/// points of `[k_lo, k_hi]`, refined by bisection. Sorted by `k`.
pub fn mechanisms<T: Scalar>(params: &BondParams<T>, k_lo: T, k_hi: T, n_samples: usize) -> Result<Vec<MechanismRoot>> {
    if !(k_lo > T::zero() && k_hi > k_lo) {
        return Err(Error::InvalidArgument(format!("bad k range [{k_lo}, {k_hi}]")));
    }
    if n_samples < 100 {
        return Err(Error::InvalidArgument(format!("n_samples = {n_samples} < 100")));
    }
    let step = (k_hi - k_lo) / T::from_usize_exact(n_samples - 1);
    let ks: Vec<T> = (0..n_samples).map(|i| k_lo + step * T::from_usize_exact(i)).collect();
    let mut roots = Vec::new();
    for mech in Mechanism::ALL {
        let f = |k: T| mech.value(params, k);
        let vals: Vec<T> = ks.iter().map(|&k| f(k)).collect();
        for i in 0..n_samples - 1 {
            let (fa, fb) = (vals[i], vals[i + 1]);
            if fa == T::zero() {
                roots.push(MechanismRoot {
                    k: ks[i].to_f64_lossy(),
                    mechanism: mech,
                    value: 0.0,
                });
                continue;
            }
            if fa.signum() == fb.signum() || fb == T::zero() {
                continue;
            }
            let k = bisect(&f, ks[i], ks[i + 1], fa);
            roots.push(MechanismRoot {
                k: k.to_f64_lossy(),
                mechanism: mech,
                value: f(k).to_f64_lossy(),
            });
        }
    }
    roots.sort_by(|a, b| a.k.total_cmp(&b.k).then(a.mechanism.id().cmp(&b.mechanism.id())));
    Ok(roots)
}

fn bisect<T: Scalar>(f: &impl Fn(T) -> T, mut a: T, mut b: T, mut fa: T) -> T {
    for _ in 0..200 {
        let mid = (a + b) / T::lit(2.0);
        if mid <= a || mid >= b {
            break;
        }
        let fm = f(mid);
        if fm == T::zero() {
            return mid;
        }
        if fm.signum() == fa.signum() {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    if f(a).abs() <= f(b).abs() {
        a
    } else {
        b
    }
}

/// `Delta_MI` on a `(beta, k)` lattice plus the curve `beta -> k_crit(beta, 1)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StabilityMap {
    pub n_beta: usize,
    pub n_k: usize,
    /// Row-major in `beta`.
    pub samples: Vec<StabilitySample>,
    /// `(beta, k_crit(beta, 1))` at each lattice `beta`.
    pub curve: Vec<(f64, f64)>,
}

impl StabilityMap {
    pub fn at(&self, i_beta: usize, i_k: usize) -> &StabilitySample {
        &self.samples[i_beta * self.n_k + i_k]
    }

    pub fn count(&self, verdict: Verdict) -> usize {
        self.samples.iter().filter(|s| s.verdict == verdict).count()
    }
}

/// Interior lattice nodes `lo + (i + 1) (hi - lo) / (n + 1)`, so that the
/// `2n + 1` lattice contains every node of the `n` lattice.
pub fn interior_nodes(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let h = (hi - lo) / (n + 1) as f64;
    (0..n).map(|i| lo + (i + 1) as f64 * h).collect()
}

/// Evaluates the index on an `n_beta x n_k` lattice of interior nodes
/// (at least 32 x 32).
pub fn stability_map(beta_range: (f64, f64), k_range: (f64, f64), resolution: (usize, usize)) -> Result<StabilityMap> {
    let (n_beta, n_k) = resolution;
    if n_beta < 32 || n_k < 32 {
        return Err(Error::InvalidArgument(format!("resolution {n_beta}x{n_k} below 32x32")));
    }
    if !(beta_range.0 >= 0.0 && beta_range.1 > beta_range.0 && k_range.0 >= 0.0 && k_range.1 > k_range.0) {
        return Err(Error::InvalidArgument(format!("bad ranges {beta_range:?} {k_range:?}")));
    }
    let betas = interior_nodes(beta_range.0, beta_range.1, n_beta);
    let ks = interior_nodes(k_range.0, k_range.1, n_k);
    let mut samples = Vec::with_capacity(n_beta * n_k);
    let mut curve = Vec::new();
    for &b in &betas {
        let params = BondParams::new(b)?;
        samples.extend(ks.iter().map(|&k| sample(&params, k)));
        if let Ok(kc) = k_crit(&params, 1.0) {
            curve.push((b, kc));
        }
    }
    Ok(StabilityMap {
        n_beta,
        n_k,
        samples,
        curve,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn p(beta: f64) -> BondParams<f64> {
        BondParams::new(beta).unwrap()
    }

    #[test]
    fn benjamin_feir_vanishes_at_origin() {
        assert!(delta_bf(&p(0.1), 1e-6).abs() <= 1e-4);
    }

    #[test]
    fn bf_matches_finite_differences() {
        let params = p(0.1);
        let k = k_crit(&params, 1.0).unwrap();
        let h = 1e-4;
        let g = |z: f64| z * m_beta(&params, z);
        let g1 = (g(k - 2.0 * h) - 8.0 * g(k - h) + 8.0 * g(k + h) - g(k + 2.0 * h)) / (12.0 * h);
        let fd = 2.0 * (m_beta(&params, k) - m_beta(&params, 2.0 * k)) + g1 - 1.0;
        assert!((delta_bf(&params, k) - fd).abs() <= 1e-7);
    }

    #[test]
    fn bf_has_no_jumps() {
        let params = p(0.2);
        let ks: Vec<f64> = (0..=2000).map(|i| 0.1 + 9.9 * i as f64 / 2000.0).collect();
        let v: Vec<f64> = ks.iter().map(|&k| delta_bf(&params, k)).collect();
        let d: Vec<f64> = v.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
        for w in d.windows(2) {
            assert!(w[1] <= 10.0 * w[0] + 1e-6, "{w:?}");
        }
    }

    #[test]
    fn positive_on_critical_curve() {
        for i in 1..=6 {
            let params = p(0.05 * i as f64);
            let k = k_crit(&params, 1.0).unwrap();
            assert!(delta_mi(&params, k).unwrap() > 0.0);
        }
    }

    #[test]
    fn explicit_zero_factor() {
        let params = p(0.1);
        let roots = mechanisms(&params, 0.05, 20.0, 400).unwrap();
        let r = roots
            .iter()
            .find(|r| r.mechanism == Mechanism::LongShortResonance)
            .expect("long/short resonance on (0, 20)");
        assert!(r.value.abs() <= 1e-10);
        let mi = delta_mi(&params, r.k).unwrap();
        let scale = mi_prefactor(&params, r.k + 1e-3).unwrap().abs() * delta_bf(&params, r.k).abs();
        assert!(mi.abs() <= 1e-9 * scale.max(1.0));
    }

    #[test]
    fn matches_richardson_oracle() {
        let params = p(0.2);
        let a = delta_mi(&params, 1.0).unwrap();
        let b = delta_mi_richardson(&params, 1.0).unwrap();
        assert!((a - b).abs() <= 1e-6 * a.abs());
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let params = p(rng.gen_range(0.01..0.6));
            let k = rng.gen_range(0.2..12.0);
            let a = delta_mi(&params, k).unwrap();
            let b = delta_mi_richardson(&params, k).unwrap();
            assert!((a - b).abs() <= 1e-6 * a.abs(), "{} {k} {a} {b}", params.beta());
        }
    }

    #[test]
    fn factorization_is_exact() {
        let params = p(0.15);
        for k in [0.3, 1.0, 2.5, 7.0] {
            let prod = mi_prefactor(&params, k).unwrap() * delta_bf(&params, k);
            let mi = delta_mi(&params, k).unwrap();
            assert!((prod - mi).abs() <= 1e-12 * mi.abs());
        }
    }

    #[test]
    fn second_harmonic_roots_stay_subcritical() {
        for beta in [0.05, 0.1, 0.2, 0.3] {
            let params = p(beta);
            let kmin = crate::dispersion::k_min(&params);
            let roots = mechanisms(&params, 0.05, 20.0, 400).unwrap();
            for r in roots.iter().filter(|r| r.mechanism == Mechanism::SecondHarmonic) {
                assert!(r.k < kmin, "beta {beta}: {r:?} vs k_min {kmin}");
            }
            for r in &roots {
                assert!(r.value.abs() <= 1e-10, "{r:?}");
            }
        }
    }

    #[test]
    fn sign_changes_are_explained() {
        let params = p(0.1);
        let n = 400;
        let (lo, hi) = (0.05, 20.0);
        let roots = mechanisms(&params, lo, hi, n).unwrap();
        let step = (hi - lo) / (n - 1) as f64;
        let ks: Vec<f64> = (0..n).map(|i| lo + step * i as f64).collect();
        let v: Vec<f64> = ks.iter().map(|&k| delta_mi(&params, k).unwrap()).collect();
        for i in 0..n - 1 {
            if v[i].signum() != v[i + 1].signum() {
                assert!(
                    roots.iter().any(|r| r.k >= ks[i] && r.k <= ks[i + 1]),
                    "unexplained sign change near {}",
                    ks[i]
                );
            }
        }
    }

    #[test]
    fn map_regions_and_refinement() {
        let coarse = stability_map((0.0, 1.0 / 3.0), (0.0, 12.0), (32, 32)).unwrap();
        assert!(coarse.count(Verdict::Stable) > 0);
        assert!(coarse.count(Verdict::Unstable) > 0);
        assert_eq!(coarse.curve.len(), 32);
        let fine = stability_map((0.0, 1.0 / 3.0), (0.0, 12.0), (65, 65)).unwrap();
        for i in 0..32 {
            for j in 0..32 {
                let c = coarse.at(i, j);
                let f = fine.at(2 * i + 1, 2 * j + 1);
                assert!((c.beta - f.beta).abs() < 1e-14 && (c.k - f.k).abs() < 1e-12);
                if c.delta_mi.abs() > 1e-6 {
                    assert_eq!(c.verdict, f.verdict);
                }
            }
        }
        assert!(stability_map((0.0, 0.3), (0.0, 12.0), (16, 16)).is_err());
    }
}
