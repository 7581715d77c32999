//! The generic core run in `f32`, compared against closed forms and `f64`.

use capwhitham::dispersion::{k_crit, m_beta, BondParams, ScalingParams};
use capwhitham::kdv::{kdv_residual, sigma_beta, sigma_hat};
use capwhitham::spectral::Grid;

#[test]
fn symbol_matches_f64() {
    let p32 = BondParams::new(0.2f32).unwrap();
    let p64 = BondParams::new(0.2f64).unwrap();
    for i in 0..200 {
        let k = 0.05 * i as f64;
        let a = m_beta(&p32, k as f32) as f64;
        let b = m_beta(&p64, k);
        assert!((a - b).abs() <= 2e-6 * b, "k={k}: {a} vs {b}");
    }
}

#[test]
fn critical_wavenumber_in_f32() {
    let p = BondParams::new(0.1f32).unwrap();
    let s = ScalingParams::new(&p, 0.2f32).unwrap();
    let k = k_crit(&p, s.c()).unwrap();
    assert!((m_beta(&p, k) - s.c()).abs() < 1e-5);
    let k64 = k_crit(&BondParams::new(0.1f64).unwrap(), 1.0 + (1.0 - 0.3) / 6.0 * 0.04).unwrap();
    assert!((k as f64 - k64).abs() < 1e-3 * k64);
}

#[test]
fn soliton_transform_in_f32() {
    let p = BondParams::new(0.1f32).unwrap();
    let grid = Grid::new(40.0f32, 256).unwrap();
    let s = sigma_beta(&p, &grid).unwrap();
    assert!(kdv_residual(&s) < 1e-4, "{}", kdv_residual(&s));
    for j in 0..20 {
        let k = grid.wavenumber(j);
        let got = s.field().grid_transform(j).re;
        let want = sigma_hat(&p, k);
        assert!((got - want).abs() < 1e-5, "j={j}: {got} vs {want}");
    }
}
