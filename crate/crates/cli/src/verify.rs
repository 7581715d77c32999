//! The acceptance suite behind `capwhitham verify`.

use std::sync::OnceLock;
use std::time::{Duration, Instant};

use capwhitham::depression::{remainder_scaling, DepressionGrid};
use capwhitham::dispersion::{k_crit, quartic_remainder, BondParams, ScalingParams};
use capwhitham::fit::{linear_fit, loglog_slope};
use capwhitham::kdv::{j0, kdv_residual, sigma_beta};
use capwhitham::modstab::{delta_mi, delta_mi_richardson, stability_map, Verdict};
use capwhitham::nanopteron::{
    beale_iterate, beale_iterate_from, make_workspace, newton_oracle, newton_oracle_from, BealeOptions, BealeWorkspace,
    NanopteronSolution, DEFAULT_TARGET_L, REPORT_Q,
};
use capwhitham::periodic::{periodic_residual, solve_periodic, PeriodicOptions};
use capwhitham::spectral::{Grid, SpectralField, WeightedNorm};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::CliError;

/// Settings shared by all criteria.
#[derive(Debug, Clone)]
pub struct VerifySettings {
    pub seed: u64,
    pub beale_tol: f64,
    pub max_iter: usize,
}

impl Default for VerifySettings {
    fn default() -> Self {
        Self {
            seed: 7,
            beale_tol: 1e-12,
            max_iter: 100,
        }
    }
}

/// Outcome of the checks inside one criterion.
#[derive(Debug, Clone)]
pub struct Check {
    pub passed: bool,
    pub summary: String,
    pub metrics: Value,
}

#[derive(Debug, Clone, Serialize)]
pub struct CriterionReport {
    pub id: u8,
    pub name: &'static str,
    pub anchor: &'static str,
    pub passed: bool,
    pub summary: String,
    pub budget_seconds: f64,
    pub within_budget: bool,
    pub metrics: Value,
    #[serde(skip)]
    pub elapsed: Duration,
}

impl CriterionReport {
    /// One line of the human-readable table.
    pub fn line(&self) -> String {
        format!(
            "{} {:>2} {:<22} {:>8.2}s  {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.elapsed.as_secs_f64(),
            self.summary
        )
    }
}

pub struct Criterion {
    pub id: u8,
    pub name: &'static str,
    /// The statement the criterion checks.
    pub anchor: &'static str,
    pub budget_seconds: f64,
    run: fn(&Context) -> Check,
}

pub const CRITERIA: [Criterion; 11] = [
    Criterion {
        id: 1,
        name: "sigma-exactness",
        anchor: "KdV soliton solves the traveling-wave KdV equation",
        budget_seconds: 1.0,
        run: sigma_exactness,
    },
    Criterion {
        id: 2,
        name: "j0-scaling",
        anchor: "forcing J0 is O(eps^2)",
        budget_seconds: 5.0,
        run: j0_scaling,
    },
    Criterion {
        id: 3,
        name: "quartic-remainder",
        anchor: "long-wave expansion of the symbol, remainder O(k^4)",
        budget_seconds: 1.0,
        run: quartic,
    },
    Criterion {
        id: 4,
        name: "depression-remainder",
        anchor: "subcritical depression waves, remainder O(eps^4)",
        budget_seconds: 60.0,
        run: depression,
    },
    Criterion {
        id: 5,
        name: "periodic-family",
        anchor: "periodic family: cos seed at a = 0 and Lipschitz in a",
        budget_seconds: 30.0,
        run: periodic_family,
    },
    Criterion {
        id: 6,
        name: "beale-convergence",
        anchor: "Beale fixed-point scheme contracts",
        budget_seconds: 600.0,
        run: beale_convergence,
    },
    Criterion {
        id: 7,
        name: "remainder-and-ripple",
        anchor: "generalized solitary wave: remainder, ripple amplitude and frequency",
        budget_seconds: 600.0,
        run: remainder_and_ripple,
    },
    Criterion {
        id: 8,
        name: "newton-oracle",
        anchor: "direct Newton solve agrees with the Beale solution",
        budget_seconds: 120.0,
        run: newton_oracle_check,
    },
    Criterion {
        id: 9,
        name: "uniqueness",
        anchor: "uniqueness of the pair (R, a)",
        budget_seconds: 120.0,
        run: uniqueness,
    },
    Criterion {
        id: 10,
        name: "stability-diagram",
        anchor: "modulational stability diagram and positivity along k_crit",
        budget_seconds: 60.0,
        run: stability_diagram,
    },
    Criterion {
        id: 11,
        name: "mi-cross-validation",
        anchor: "modulational index from analytic vs finite-difference derivatives",
        budget_seconds: 5.0,
        run: mi_cross_validation,
    },
];

pub fn criterion_names() -> Vec<&'static str> {
    CRITERIA.iter().map(|c| c.name).collect()
}

const SWEEP_BETAS: [f64; 2] = [0.1, 0.2];
const SWEEP_EPS: [f64; 4] = [0.25, 0.2, 0.15, 0.1];
const UNIQUENESS_EPS: f64 = 0.2;

struct SweepRun {
    beta: f64,
    eps: f64,
    ws: BealeWorkspace<f64>,
    sol: Result<NanopteronSolution<f64>, String>,
}

/// State shared between criteria within one run.
pub struct Context {
    settings: VerifySettings,
    sweep: OnceLock<Vec<SweepRun>>,
}

impl Context {
    pub fn new(settings: VerifySettings) -> Self {
        Self {
            settings,
            sweep: OnceLock::new(),
        }
    }

    fn options(&self) -> BealeOptions<f64> {
        BealeOptions {
            tol: self.settings.beale_tol,
            max_iter: self.settings.max_iter,
            ..BealeOptions::default()
        }
    }

    /// The `(beta, eps)` sweep, solved once.
    fn sweep(&self) -> &[SweepRun] {
        self.sweep.get_or_init(|| {
            let pairs: Vec<(f64, f64)> = SWEEP_BETAS
                .iter()
                .flat_map(|&b| SWEEP_EPS.iter().map(move |&e| (b, e)))
                .collect();
            pairs
                .par_iter()
                .map(|&(beta, eps)| {
                    let params = BondParams::new(beta).expect("valid beta");
                    let scaling = ScalingParams::new(&params, eps).expect("valid eps");
                    let ws = make_workspace(&params, &scaling, DEFAULT_TARGET_L, None).expect("workspace");
                    let sol = beale_iterate(&ws, self.options()).map_err(|e| e.to_string());
                    SweepRun { beta, eps, ws, sol }
                })
                .collect()
        })
    }
}

/// Runs the named criteria (all when `only` is `None`) in order.
pub fn run(only: Option<&str>, settings: VerifySettings) -> Result<Vec<CriterionReport>, CliError> {
    let selected: Vec<&Criterion> = match only {
        None => CRITERIA.iter().collect(),
        Some(names) => names
            .split(',')
            .map(|n| {
                CRITERIA.iter().find(|c| c.name == n.trim()).ok_or_else(|| {
                    CliError::Usage(format!(
                        "unknown criterion {n:?}; known: {}",
                        criterion_names().join(", ")
                    ))
                })
            })
            .collect::<Result<_, _>>()?,
    };
    let ctx = Context::new(settings);
    Ok(selected.into_iter().map(|c| run_one(c, &ctx)).collect())
}

fn run_one(c: &Criterion, ctx: &Context) -> CriterionReport {
    let t = Instant::now();
    let check = (c.run)(ctx);
    let elapsed = t.elapsed();
    let within_budget = elapsed.as_secs_f64() <= c.budget_seconds;
    let mut summary = check.summary;
    if !within_budget {
        summary.push_str(&format!("; over the {} s budget", c.budget_seconds));
    }
    CriterionReport {
        id: c.id,
        name: c.name,
        anchor: c.anchor,
        passed: check.passed && within_budget,
        summary,
        budget_seconds: c.budget_seconds,
        within_budget,
        metrics: check.metrics,
        elapsed,
    }
}

fn fail(summary: impl Into<String>) -> Check {
    Check {
        passed: false,
        summary: summary.into(),
        metrics: Value::Null,
    }
}

fn sigma_exactness(_: &Context) -> Check {
    let grid = Grid::new(60.0, 512).expect("grid");
    let mut worst = 0.0f64;
    let mut per_beta = Vec::new();
    for beta in [0.1f64, 0.2, 0.5, 2.0] {
        let params = BondParams::new(beta).expect("beta");
        let res = match sigma_beta(&params, &grid) {
            Ok(p) => kdv_residual(&p),
            Err(e) => return fail(format!("sigma_beta failed at beta = {beta}: {e}")),
        };
        worst = worst.max(res);
        per_beta.push(json!({"beta": beta, "residual": res}));
    }
    Check {
        passed: worst <= 1e-10,
        summary: format!("max KdV residual {worst:.2e} (limit 1e-10)"),
        metrics: json!({"runs": per_beta, "max_residual": worst}),
    }
}

fn j0_scaling(_: &Context) -> Check {
    let eps = [0.4, 0.3, 0.2, 0.1, 0.05];
    let grid = Grid::new(100.0, 2048).expect("grid");
    let mut slopes = Vec::new();
    for beta in [0.1f64, 0.2] {
        let params = BondParams::new(beta).expect("beta");
        let profile = sigma_beta(&params, &grid).expect("sigma");
        let norms: Result<Vec<f64>, _> = eps
            .iter()
            .map(|&e| ScalingParams::new(&params, e).and_then(|s| j0(&profile, &s)).map(|f| f.l2_norm()))
            .collect();
        let norms = match norms {
            Ok(n) => n,
            Err(e) => return fail(format!("J0 failed: {e}")),
        };
        slopes.push((beta, loglog_slope(&eps, &norms).unwrap_or(f64::NAN), norms));
    }
    let passed = slopes.iter().all(|(_, s, _)| (s - 2.0).abs() <= 0.2);
    let text: Vec<String> = slopes.iter().map(|(b, s, _)| format!("beta {b}: {s:.3}")).collect();
    Check {
        passed,
        summary: format!("||J0|| slopes {} (want 2.0 +- 0.2)", text.join(", ")),
        metrics: json!(slopes
            .iter()
            .map(|(b, s, n)| json!({"beta": b, "slope": s, "norms": n, "eps": eps}))
            .collect::<Vec<_>>()),
    }
}

fn quartic(_: &Context) -> Check {
    let n = 40;
    let ks: Vec<f64> = (0..n)
        .map(|i| 10f64.powf(-3.0 + i as f64 / (n - 1) as f64 * (0.3f64.log10() + 3.0)))
        .collect();
    let mut slopes = Vec::new();
    for beta in [0.1f64, 0.2, 0.5, 2.0] {
        let params = BondParams::new(beta).expect("beta");
        let r: Vec<f64> = ks.iter().map(|&k| quartic_remainder(&params, k).abs()).collect();
        slopes.push((beta, loglog_slope(&ks, &r).unwrap_or(f64::NAN)));
    }
    let passed = slopes.iter().all(|(_, s)| (s - 4.0).abs() <= 0.1);
    let text: Vec<String> = slopes.iter().map(|(b, s)| format!("beta {b}: {s:.3}")).collect();
    Check {
        passed,
        summary: format!("exponents {} (want 4.0 +- 0.1)", text.join(", ")),
        metrics: json!(slopes.iter().map(|(b, s)| json!({"beta": b, "slope": s})).collect::<Vec<_>>()),
    }
}

fn depression(_: &Context) -> Check {
    let eps = [0.3, 0.2, 0.15, 0.1];
    let mut metrics = Vec::new();
    let mut passed = true;
    let mut text = Vec::new();
    for beta in [0.5f64, 2.0] {
        let params = BondParams::new(beta).expect("beta");
        let fit = match remainder_scaling(&params, &eps, DepressionGrid::default(), 0) {
            Ok(f) => f,
            Err(e) => return fail(format!("depression solve failed at beta = {beta}: {e}")),
        };
        let worst = fit.residuals.iter().fold(0.0f64, |m, &r| m.max(r));
        passed &= fit.slope >= 3.5 && worst <= 1e-11;
        text.push(format!("beta {beta}: slope {:.3}, residual {worst:.1e}", fit.slope));
        metrics.push(json!({"beta": beta, "eps": fit.eps, "R_l2": fit.norms, "slope": fit.slope, "residuals": fit.residuals}));
    }
    Check {
        passed,
        summary: format!("{} (want slope >= 3.5, residual <= 1e-11)", text.join("; ")),
        metrics: json!(metrics),
    }
}

/// Largest difference quotient of `f` over consecutive amplitudes `0, h, .., n h`.
fn max_quotient(amps: &[f64], vals: &[Vec<f64>]) -> f64 {
    let mut best = 0.0f64;
    for i in 0..amps.len() - 1 {
        let d = vals[i]
            .iter()
            .zip(&vals[i + 1])
            .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
        best = best.max(d / (amps[i + 1] - amps[i]));
    }
    best
}

fn periodic_family(_: &Context) -> Check {
    let alpha = 0.04;
    let opts = PeriodicOptions::default();
    let mut passed = true;
    let mut metrics = Vec::new();
    let mut text = Vec::new();
    for beta in [0.1f64, 0.2] {
        let params = BondParams::new(beta).expect("beta");
        let scaling = ScalingParams::new(&params, 0.2).expect("eps");
        let seed = match solve_periodic(&params, &scaling, 0.0, opts) {
            Ok(w) => w,
            Err(e) => return fail(format!("a = 0 solve failed: {e}")),
        };
        let k_eps = capwhitham::dispersion::k_eps(&params, &scaling).expect("K_eps");
        let is_cos = seed.cos_coeffs.iter().enumerate().all(|(n, &c)| c == if n == 1 { 1.0 } else { 0.0 });
        let residual = periodic_residual(&seed).iter().fold(0.0f64, |m, r| m.max(r.abs()));
        let exact = is_cos && seed.k == k_eps && residual <= 1e-13;

        let mut quotients = Vec::new();
        for n in [8usize, 16] {
            let amps: Vec<f64> = (0..=n).map(|i| alpha * i as f64 / n as f64).collect();
            let waves = match amps
                .iter()
                .map(|&a| solve_periodic(&params, &scaling, a, opts))
                .collect::<Result<Vec<_>, _>>()
            {
                Ok(w) => w,
                Err(e) => return fail(format!("periodic continuation failed: {e}")),
            };
            let ks: Vec<Vec<f64>> = waves.iter().map(|w| vec![w.k]).collect();
            let len = waves.iter().map(|w| w.cos_coeffs.len()).max().unwrap_or(0);
            let cs: Vec<Vec<f64>> = waves
                .iter()
                .map(|w| {
                    let mut c = w.cos_coeffs.clone();
                    c.resize(len, 0.0);
                    c
                })
                .collect();
            quotients.push((max_quotient(&amps, &ks), max_quotient(&amps, &cs)));
        }
        let (k8, c8) = quotients[0];
        let (k16, c16) = quotients[1];
        let stable = k16 <= LIPSCHITZ_GROWTH * k8 + 1e-12 && c16 <= LIPSCHITZ_GROWTH * c8 + 1e-12;
        passed &= exact && stable;
        text.push(format!(
            "beta {beta}: seed exact {exact} (residual {residual:.1e}), K ratio {k8:.3e} -> {k16:.3e}"
        ));
        metrics.push(json!({
            "beta": beta,
            "seed_is_cos": is_cos,
            "seed_K_matches": seed.k == k_eps,
            "seed_residual": residual,
            "K_lipschitz": [k8, k16],
            "coeff_lipschitz": [c8, c16],
        }));
    }
    Check {
        passed,
        summary: text.join("; "),
        metrics: json!(metrics),
    }
}

/// Allowed growth of a Lipschitz quotient when the amplitude spacing is halved.
pub const LIPSCHITZ_GROWTH: f64 = 1.25;

fn solved(run: &SweepRun) -> Result<&NanopteronSolution<f64>, String> {
    run.sol
        .as_ref()
        .map_err(|e| format!("beta {} eps {}: {e}", run.beta, run.eps))
}

fn beale_convergence(ctx: &Context) -> Check {
    let sweep = ctx.sweep();
    let mut passed = true;
    let mut metrics = Vec::new();
    let mut text = Vec::new();
    for beta in SWEEP_BETAS {
        let runs: Vec<&SweepRun> = sweep.iter().filter(|r| r.beta == beta).collect();
        let mut factors = Vec::new();
        for run in &runs {
            let sol = match solved(run) {
                Ok(s) => s,
                Err(e) => return fail(format!("iteration failed: {e}")),
            };
            let factor = sol.contraction_factor(1e-11).unwrap_or(f64::NAN);
            let last = sol.contraction_ratios().last().copied().unwrap_or(0.0);
            passed &= sol.residual <= 1e-10 && factor < 1.0 && last < 1.0;
            factors.push(factor);
            metrics.push(json!({
                "beta": beta,
                "eps": run.eps,
                "N": run.ws.grid().len(),
                "L": run.ws.grid().half_length(),
                "iterations": sol.iterations,
                "residual": sol.residual,
                "contraction_factor": factor,
                "contraction_ratios": sol.contraction_ratios(),
            }));
        }
        let decreasing = factors.windows(2).all(|w| w[1] < w[0]);
        passed &= decreasing;
        let f: Vec<String> = factors.iter().map(|v| format!("{v:.4}")).collect();
        text.push(format!("beta {beta}: factors [{}]", f.join(", ")));
    }
    let worst = sweep
        .iter()
        .filter_map(|r| r.sol.as_ref().ok())
        .fold(0.0f64, |m, s| m.max(s.residual));
    text.push(format!("max residual {worst:.1e}"));
    Check {
        passed,
        summary: text.join("; "),
        metrics: json!(metrics),
    }
}

fn remainder_and_ripple(ctx: &Context) -> Check {
    let sweep = ctx.sweep();
    let mut metrics = Vec::new();
    let mut text = Vec::new();
    let (mut slope_ok, mut ripple_ok, mut freq_ok) = (true, true, true);
    for beta in SWEEP_BETAS {
        let runs: Vec<&SweepRun> = sweep.iter().filter(|r| r.beta == beta).collect();
        let mut eps = Vec::new();
        let mut r_norm = Vec::new();
        let mut a_ratio = Vec::new();
        let mut offsets = Vec::new();
        for run in &runs {
            let sol = match solved(run) {
                Ok(s) => s,
                Err(e) => return fail(format!("iteration failed: {e}")),
            };
            let e = run.eps;
            let params = BondParams::new(beta).expect("beta");
            let kc = k_crit(&params, sol.scaling.c()).expect("k_crit");
            let offset = (e * sol.wave.k - kc).abs();
            freq_ok &= offset <= e * e;
            eps.push(e);
            r_norm.push(sol.r_norm(WeightedNorm::new(0.0, REPORT_Q).expect("norm")).expect("weighted norm"));
            a_ratio.push(sol.a.abs() / e.powi(4));
            offsets.push(offset);
        }
        let slope = loglog_slope(&eps, &r_norm).unwrap_or(f64::NAN);
        // least-squares constant for ||R|| ~ C eps^4
        let logs: Vec<f64> = eps.iter().zip(&r_norm).map(|(e, r)| r.ln() - 4.0 * e.ln()).collect();
        let c4 = (logs.iter().sum::<f64>() / logs.len() as f64).exp();
        let (fit_slope, _) = linear_fit(
            &eps.iter().map(|e| e.ln()).collect::<Vec<_>>(),
            &r_norm.iter().map(|r| r.ln()).collect::<Vec<_>>(),
        )
        .unwrap_or((f64::NAN, f64::NAN));
        let monotone = a_ratio.windows(2).all(|w| w[1] < w[0]);
        slope_ok &= slope >= 1.8;
        ripple_ok &= monotone;
        text.push(format!(
            "beta {beta}: R slope {slope:.3}, |a|/eps^4 [{}] monotone {monotone}",
            a_ratio.iter().map(|v| format!("{v:.1e}")).collect::<Vec<_>>().join(", ")
        ));
        metrics.push(json!({
            "beta": beta,
            "eps": eps,
            "R_weighted": r_norm,
            "weight_q": REPORT_Q,
            "R_slope": slope,
            "R_fit_slope": fit_slope,
            "R_eps4_constant": c4,
            "a_over_eps4": a_ratio,
            "a_over_eps4_decreasing": monotone,
            "frequency_offset": offsets,
        }));
    }
    text.push(format!("frequency within eps^2: {freq_ok}"));
    Check {
        passed: slope_ok && ripple_ok && freq_ok,
        summary: text.join("; "),
        metrics: json!({
            "runs": metrics,
            "R_slope_ok": slope_ok,
            "ripple_monotone_ok": ripple_ok,
            "frequency_ok": freq_ok,
        }),
    }
}

fn newton_oracle_check(ctx: &Context) -> Check {
    let sweep = ctx.sweep();
    let results: Vec<Result<Value, String>> = sweep
        .par_iter()
        .map(|run| {
            let sol = solved(run)?;
            let o = newton_oracle(sol, 4).map_err(|e| e.to_string())?;
            // independent restart from a perturbed profile
            let bump = SpectralField::from_fn(sol.grid(), |x| 1e-4 * (-x * x / 4.0).exp());
            let back = newton_oracle_from(sol, &sol.profile() + &bump, 8).map_err(|e| e.to_string())?;
            Ok(json!({
                "recovered_sup": back.moved_sup,
                "recovered_steps": back.steps,
                "beta": run.beta,
                "eps": run.eps,
                "moved_sup": o.moved_sup,
                "a_beale": sol.a,
                "a_newton": o.a_oracle,
                "residual_before": o.residual_before,
                "residual_after": o.residual_after,
                "steps": o.steps,
            }))
        })
        .collect();
    let mut metrics = Vec::new();
    let mut worst = 0.0f64;
    let mut recovered = 0.0f64;
    for r in results {
        match r {
            Ok(v) => {
                worst = worst.max(v["moved_sup"].as_f64().unwrap_or(f64::INFINITY));
                recovered = recovered.max(v["recovered_sup"].as_f64().unwrap_or(f64::INFINITY));
                metrics.push(v);
            }
            Err(e) => return fail(format!("oracle failed: {e}")),
        }
    }
    Check {
        passed: worst <= 1e-8 && recovered <= 1e-8,
        summary: format!(
            "max sup-norm move {worst:.2e} over {} solutions (limit 1e-8); restart from a 1e-4 bump lands within {recovered:.2e}",
            metrics.len()
        ),
        metrics: json!(metrics),
    }
}

/// Smooth even field with sup norm one built from random Gaussian pairs.
pub fn random_even_field(grid: &Grid<f64>, rng: &mut ChaCha8Rng) -> SpectralField<f64> {
    let bumps: Vec<(f64, f64, f64)> = (0..6)
        .map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(0.0..20.0), rng.gen_range(1.0..4.0)))
        .collect();
    let f = SpectralField::from_fn(grid, |x| {
        bumps
            .iter()
            .map(|&(amp, c, w)| amp * ((-(x - c) * (x - c) / (w * w)).exp() + (-(x + c) * (x + c) / (w * w)).exp()))
            .sum()
    });
    let m = f.max_abs();
    f.scale(1.0 / m)
}

fn uniqueness(ctx: &Context) -> Check {
    let sweep = ctx.sweep();
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.settings.seed);
    let mut metrics = Vec::new();
    let mut worst = 0.0f64;
    for beta in SWEEP_BETAS {
        let run = sweep
            .iter()
            .find(|r| r.beta == beta && r.eps == UNIQUENESS_EPS)
            .expect("sweep point");
        let sol = match solved(run) {
            Ok(s) => s,
            Err(e) => return fail(format!("iteration failed: {e}")),
        };
        let r0 = random_even_field(run.ws.grid(), &mut rng).scale(1e-3);
        let other = match beale_iterate_from(&run.ws, r0, 1e-3, ctx.options()) {
            Ok(s) => s,
            Err(e) => return fail(format!("perturbed iteration failed at beta = {beta}: {e}")),
        };
        let dr = (&other.r - &sol.r).max_abs();
        let da = (other.a - sol.a).abs();
        worst = worst.max(dr + da);
        metrics.push(json!({"beta": beta, "eps": run.eps, "dR_sup": dr, "da": da, "iterations": other.iterations}));
    }
    Check {
        passed: worst <= 1e-8,
        summary: format!("perturbed seeds reconverge within {worst:.2e} (limit 1e-8)"),
        metrics: json!(metrics),
    }
}

fn stability_diagram(_: &Context) -> Check {
    let mut curve = Vec::new();
    let mut curve_ok = true;
    for i in 1..=6 {
        let beta = 0.05 * i as f64;
        let params = BondParams::new(beta).expect("beta");
        let k = k_crit(&params, 1.0).expect("k_crit");
        let v = delta_mi(&params, k).unwrap_or(f64::NAN);
        curve_ok &= v > 0.0;
        curve.push(json!({"beta": beta, "k_crit": k, "delta_mi": v}));
    }
    let br = (0.0, 1.0 / 3.0);
    let kr = (0.0, 12.0);
    let (coarse, fine) = match (stability_map(br, kr, (64, 64)), stability_map(br, kr, (129, 129))) {
        (Ok(c), Ok(f)) => (c, f),
        (Err(e), _) | (_, Err(e)) => return fail(format!("stability map failed: {e}")),
    };
    let both = coarse.count(Verdict::Stable) > 0 && coarse.count(Verdict::Unstable) > 0;
    let mut changed = 0usize;
    let mut compared = 0usize;
    for i in 0..coarse.n_beta {
        for j in 0..coarse.n_k {
            let c = coarse.at(i, j);
            let f = fine.at(2 * i + 1, 2 * j + 1);
            if c.delta_mi.abs() > 1e-6 {
                compared += 1;
                if c.verdict != f.verdict {
                    changed += 1;
                }
            }
        }
    }
    Check {
        passed: curve_ok && both && changed == 0,
        summary: format!(
            "Delta_MI > 0 on k_crit curve: {curve_ok}; S cells {}, U cells {}; {changed} of {compared} verdicts change under refinement",
            coarse.count(Verdict::Stable),
            coarse.count(Verdict::Unstable)
        ),
        metrics: json!({
            "curve": curve,
            "stable": coarse.count(Verdict::Stable),
            "unstable": coarse.count(Verdict::Unstable),
            "indeterminate": coarse.count(Verdict::Indeterminate),
            "refinement_changes": changed,
            "compared": compared,
        }),
    }
}

fn mi_cross_validation(ctx: &Context) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.settings.seed);
    let mut worst = 0.0f64;
    let mut worst_at = (0.0, 0.0);
    for _ in 0..100 {
        let beta: f64 = rng.gen_range(0.01..0.6);
        let k: f64 = rng.gen_range(0.2..12.0);
        let params = BondParams::new(beta).expect("beta");
        let rel = match (delta_mi(&params, k), delta_mi_richardson(&params, k)) {
            (Ok(a), Ok(b)) => (a - b).abs() / a.abs(),
            _ => f64::INFINITY,
        };
        if !(rel <= worst) {
            worst = rel;
            worst_at = (beta, k);
        }
    }
    Check {
        passed: worst <= 1e-6,
        summary: format!("max relative difference {worst:.2e} (limit 1e-6)"),
        metrics: json!({"max_relative": worst, "at": {"beta": worst_at.0, "k": worst_at.1}, "samples": 100}),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_are_unique_and_ids_sequential() {
        let names = criterion_names();
        let mut sorted = names.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), names.len());
        for (i, c) in CRITERIA.iter().enumerate() {
            assert_eq!(c.id as usize, i + 1);
        }
        assert!(run(Some("no-such-check"), VerifySettings::default()).is_err());
    }

    #[test]
    fn random_field_is_even_and_decayed() {
        let grid = Grid::new(100.0, 1024).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let f = random_even_field(&grid, &mut rng);
        assert!(f.asymmetry() < 1e-14);
        assert!((f.max_abs() - 1.0).abs() < 1e-15);
        assert!(f.boundary_ratio() < 1e-9);
    }
}
