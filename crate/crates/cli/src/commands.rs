//! Drivers behind each subcommand. Every driver is a pure function of the
//! configuration and writes into `cfg.out`.

use capwhitham::depression::{leading_term, remainder_scaling, solve_depression, DepressionGrid};
use capwhitham::dispersion::{k_crit, k_eps, k_min, m_beta, m_beta_jet, quartic_remainder, BondParams, Regime, ScalingParams};
use capwhitham::fit::loglog_slope;
use capwhitham::io::FieldSidecar;
use capwhitham::modstab::{mechanisms, stability_map, Verdict};
use capwhitham::nanopteron::{beale_iterate, make_workspace, unscale, BealeOptions, NanopteronSolution, REPORT_Q};
use capwhitham::periodic::{periodic_residual, solve_periodic, PeriodicOptions};
use capwhitham::spectral::{Grid, SpectralField, WeightedNorm};
use serde_json::{json, Value};

use crate::config::{Range, RunConfig};
use crate::error::CliError;
use crate::output::{Cell, Writer};

/// Result of a command: the summary JSON and the files written.
#[derive(Debug)]
pub struct Outcome {
    pub summary: Value,
    pub files: Vec<std::path::PathBuf>,
}

fn sidecar(grid: &Grid<f64>, beta: f64, eps: f64, kind: &str) -> FieldSidecar {
    FieldSidecar {
        half_length: grid.half_length(),
        n_points: grid.len(),
        beta,
        epsilon: eps,
        kind: kind.to_string(),
    }
}

pub fn dispersion(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let params = BondParams::new(cfg.beta)?;
    let ks = match (cfg.k, cfg.k_range) {
        (Some(k), None) => vec![k],
        (None, Some(r)) => r.points()?,
        (None, None) => Range {
            start: 0.0,
            end: 10.0,
            step: Some(0.01),
        }
        .points()?,
        (Some(_), Some(_)) => return Err(CliError::Usage("give either --k or --k-range, not both".into())),
    };
    if ks.iter().any(|k| !(*k >= 0.0)) {
        return Err(CliError::Usage("wavenumbers must be non-negative".into()));
    }
    let mut w = Writer::new(cfg)?;
    let rows: Vec<Vec<Cell>> = ks
        .iter()
        .map(|&k| {
            let (m, dm, d2m) = m_beta_jet(&params, k);
            vec![k.into(), m.into(), dm.into(), d2m.into(), quartic_remainder(&params, k).into()]
        })
        .collect();
    w.table("dispersion.csv", "dispersion", &["k", "m", "dm", "d2m", "quartic_remainder"], &rows)?;

    let mut summary = json!({
        "command": "dispersion",
        "beta": cfg.beta,
        "gamma": params.gamma(),
        "regime": params.regime().name(),
        "rows": rows.len(),
        "k_min": k_min(&params),
    });
    if params.regime() == Regime::Weak {
        let mut crit = Vec::new();
        for &eps in &cfg.eps_list {
            let s = ScalingParams::new(&params, eps)?;
            let kc = k_crit(&params, s.c())?;
            let residual = m_beta(&params, kc) - s.c();
            crit.push(vec![eps.into(), s.c().into(), kc.into(), k_eps(&params, &s)?.into(), residual.into()]);
        }
        w.table("critical.csv", "critical", &["epsilon", "c", "k_crit", "K_eps", "residual"], &crit)?;
        summary["k_crit_c1"] = json!(k_crit(&params, 1.0)?);
    }
    let summary = w.summary("dispersion.json", summary)?;
    Ok(Outcome { summary, files: w.files })
}

fn solve_nanopteron(cfg: &RunConfig, params: &BondParams<f64>, eps: f64) -> Result<NanopteronSolution<f64>, CliError> {
    let scaling = ScalingParams::new(params, eps)?;
    let ws = make_workspace(params, &scaling, cfg.target_l, cfg.n)?;
    let opts = BealeOptions {
        tol: cfg.tol,
        max_iter: cfg.max_iter,
        ..BealeOptions::default()
    };
    Ok(beale_iterate(&ws, opts)?)
}

fn nanopteron_record(sol: &NanopteronSolution<f64>) -> Result<Value, CliError> {
    let eps = sol.scaling.epsilon();
    Ok(json!({
        "beta": sol.params.beta(),
        "epsilon": eps,
        "c": sol.scaling.c(),
        "a": sol.a,
        "K": sol.wave.k,
        "K_eps": sol.k_eps,
        "L": sol.grid().half_length(),
        "N": sol.grid().len(),
        "iterations": sol.iterations,
        "residual": sol.residual,
        "norms": {
            "R_l2": sol.r.l2_norm(),
            "R_weighted": sol.r_norm(WeightedNorm::new(0.0, REPORT_Q)?)?,
            "weight_q": REPORT_Q,
            "a_over_eps4": sol.a.abs() / eps.powi(4),
        },
        "history": sol.history.iter().map(|&(dr, da)| json!([dr, da])).collect::<Vec<_>>(),
        "contraction_ratios": sol.contraction_ratios(),
        "contraction_factor": sol.contraction_factor(1e-11),
    }))
}

pub fn nanopteron(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let params = BondParams::new(cfg.beta)?;
    params_regime(&params, Regime::Weak, "nanopteron")?;
    let sol = solve_nanopteron(cfg, &params, cfg.epsilon)?;
    let un = unscale(&sol)?;
    let mut w = Writer::new(cfg)?;
    let eps = cfg.epsilon;
    w.profile("nanopteron_w.csv", &un.w, 1.0, sidecar(&un.grid, cfg.beta, eps, "w"))?;
    w.profile("nanopteron_core.csv", &un.core, 1.0, sidecar(&un.grid, cfg.beta, eps, "core"))?;
    w.profile("nanopteron_ripple.csv", &un.ripple, 1.0, sidecar(&un.grid, cfg.beta, eps, "ripple"))?;
    let mut summary = nanopteron_record(&sol)?;
    summary["command"] = json!("nanopteron");
    if cfg.sweep {
        let runs = cfg
            .eps_list
            .iter()
            .map(|&e| solve_nanopteron(cfg, &params, e))
            .collect::<Result<Vec<_>, _>>()?;
        let r: Vec<f64> = runs
            .iter()
            .map(|s| s.r_norm(WeightedNorm::new(0.0, REPORT_Q)?))
            .collect::<Result<_, _>>()?;
        let records = runs.iter().map(nanopteron_record).collect::<Result<Vec<_>, _>>()?;
        summary["sweep"] = json!({
            "eps": cfg.eps_list,
            "runs": records,
            "R_weighted_slope": fit_or_null(&cfg.eps_list, &r),
        });
    }
    let summary = w.summary("nanopteron.json", summary)?;
    Ok(Outcome { summary, files: w.files })
}

fn fit_or_null(x: &[f64], y: &[f64]) -> Value {
    loglog_slope(x, y).map(|s| json!(s)).unwrap_or(Value::Null)
}

fn params_regime(params: &BondParams<f64>, want: Regime, command: &str) -> Result<(), CliError> {
    if params.regime() != want {
        return Err(CliError::Usage(format!(
            "{command} needs the {} regime but beta = {} is {}",
            want.name(),
            params.beta(),
            params.regime().name()
        )));
    }
    Ok(())
}

pub fn depression(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let params = BondParams::new(cfg.beta)?;
    params_regime(&params, Regime::Strong, "depression")?;
    let policy = DepressionGrid {
        n: cfg.n.unwrap_or(1024),
        ..DepressionGrid::default()
    };
    let eps = cfg.epsilon;
    let scaling = ScalingParams::new(&params, eps)?;
    let grid = policy.grid(eps)?;
    let wave = solve_depression(&params, &scaling, &grid)?;
    let mut w = Writer::new(cfg)?;
    w.profile("depression_w.csv", &wave.w, 1.0, sidecar(&grid, cfg.beta, eps, "w"))?;
    w.profile(
        "depression_remainder.csv",
        &wave.r,
        1.0,
        sidecar(wave.r.grid(), cfg.beta, eps, "remainder_scaled"),
    )?;
    let mut summary = json!({
        "command": "depression",
        "beta": cfg.beta,
        "epsilon": eps,
        "c": scaling.c(),
        "L": grid.half_length(),
        "N": grid.len(),
        "w0": wave.w.center_value(),
        "leading_w0": leading_term(&params, &scaling, &grid).center_value(),
        "residual": wave.residual,
        "newton_steps": wave.newton_steps,
        "R_l2": wave.r.l2_norm(),
    });
    if cfg.eps_list.len() >= 4 {
        let fit0 = remainder_scaling(&params, &cfg.eps_list, policy, 0)?;
        let fit1 = remainder_scaling(&params, &cfg.eps_list, policy, 1)?;
        summary["fit"] = json!({
            "eps": fit0.eps,
            "R_l2": fit0.norms,
            "dR_l2": fit1.norms,
            "residuals": fit0.residuals,
            "slope": fit0.slope,
            "slope_derivative": fit1.slope,
        });
    }
    let summary = w.summary("depression.json", summary)?;
    Ok(Outcome { summary, files: w.files })
}

pub fn periodic(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let params = BondParams::new(cfg.beta)?;
    let scaling = ScalingParams::new(&params, cfg.epsilon)?;
    let opts = PeriodicOptions::default();
    let wave = solve_periodic(&params, &scaling, cfg.amplitude, opts)?;
    let residual = periodic_residual(&wave).iter().fold(0.0f64, |m, r| m.max(r.abs()));
    let period = 2.0 * std::f64::consts::PI / wave.k;
    let grid = Grid::new(period / 2.0, 256)?;
    let profile = SpectralField::from_fn(&grid, |x| wave.a * wave.phi(wave.k * x));
    let mut w = Writer::new(cfg)?;
    w.profile(
        "periodic_profile.csv",
        &profile,
        1.0,
        sidecar(&grid, cfg.beta, cfg.epsilon, "periodic_scaled"),
    )?;
    let summary = json!({
        "command": "periodic",
        "wave": wave.to_record(),
        "K_eps": k_eps(&params, &scaling)?,
        "harmonics": wave.harmonics(),
        "residual": residual,
        "amplitude_cap": opts.alpha0,
        "max_harmonics": opts.max_harmonics,
    });
    let summary = w.summary("periodic.json", summary)?;
    Ok(Outcome { summary, files: w.files })
}

pub fn stability(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let kr = cfg.k_range.map(|r| (r.start, r.end)).unwrap_or((0.0, 12.0));
    let br = (cfg.beta_range.start, cfg.beta_range.end);
    let map = stability_map(br, kr, cfg.resolution)?;
    let rows: Vec<Vec<Cell>> = map
        .samples
        .iter()
        .map(|s| {
            vec![
                s.beta.into(),
                s.k.into(),
                (s.k * s.beta.sqrt()).into(),
                s.delta_bf.into(),
                s.delta_mi.into(),
                s.verdict.letter().into(),
            ]
        })
        .collect();
    let mut w = Writer::new(cfg)?;
    w.table(
        "stability_map.csv",
        "stability_map",
        &["beta", "k", "k_sqrt_beta", "delta_bf", "delta_mi", "verdict"],
        &rows,
    )?;
    let curve: Vec<Value> = map
        .curve
        .iter()
        .map(|&(b, k)| json!({"beta": b, "k_crit": k, "k_sqrt_beta": k * b.sqrt()}))
        .collect();
    let roots = if cfg.beta > 0.0 && cfg.beta < 1.0 / 3.0 {
        let params = BondParams::new(cfg.beta)?;
        let lo = kr.0.max(1e-3);
        json!(mechanisms(&params, lo, kr.1, 1000)?)
    } else {
        Value::Null
    };
    let summary = json!({
        "command": "stability-map",
        "beta_range": [br.0, br.1],
        "k_range": [kr.0, kr.1],
        "resolution": [map.n_beta, map.n_k],
        "counts": {
            "stable": map.count(Verdict::Stable),
            "unstable": map.count(Verdict::Unstable),
            "indeterminate": map.count(Verdict::Indeterminate),
        },
        "k_crit_curve": curve,
        "mechanisms_at_beta": {"beta": cfg.beta, "roots": roots},
    });
    let summary = w.summary("stability_map.json", summary)?;
    Ok(Outcome { summary, files: w.files })
}
