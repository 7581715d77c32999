use std::path::PathBuf;
use std::process::ExitCode;

use capwhitham_cli::config::{parse_eps_list, parse_resolution, Range, RunConfig};
use capwhitham_cli::output::write_diagnostic;
use capwhitham_cli::verify::{self, VerifySettings};
use capwhitham_cli::{commands, CliError};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

#[derive(Parser)]
#[command(name = "capwhitham", version, about = "Solitary, generalized solitary and periodic waves of the capillary-gravity Whitham equation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate the phase speed, its derivatives and the critical wavenumbers.
    Dispersion(Overrides),
    /// Generalized solitary wave for 0 < beta < 1/3.
    Nanopteron(Overrides),
    /// Solitary wave of depression for beta > 1/3.
    Depression(Overrides),
    /// Small-amplitude periodic wave.
    Periodic(Overrides),
    /// Modulational stability index on a (beta, k) lattice.
    StabilityMap(Overrides),
    /// Run the acceptance suite.
    Verify(Overrides),
}

#[derive(Args, Default)]
struct Overrides {
    /// Flat `key = value` configuration file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
    /// Comma-separated, strictly decreasing.
    #[arg(long)]
    eps_list: Option<String>,
    /// Half-length of the scaled domain.
    #[arg(long = "L")]
    l: Option<f64>,
    /// Grid size (power of two).
    #[arg(long = "N")]
    n: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Single wavenumber.
    #[arg(long)]
    k: Option<f64>,
    /// A:B:STEP (A:B for the stability map).
    #[arg(long)]
    k_range: Option<String>,
    /// A:B.
    #[arg(long)]
    beta_range: Option<String>,
    /// RxC.
    #[arg(long)]
    resolution: Option<String>,
    /// Periodic wave amplitude.
    #[arg(long)]
    amplitude: Option<f64>,
    /// Also run the eps-list sweep.
    #[arg(long)]
    sweep: bool,
    /// Comma-separated criterion names.
    #[arg(long)]
    only: Option<String>,
}

impl Overrides {
    fn config(&self) -> Result<RunConfig, CliError> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        if let Some(v) = self.beta {
            cfg.beta = v;
        }
        if let Some(v) = self.epsilon {
            cfg.epsilon = v;
        }
        if let Some(v) = &self.eps_list {
            cfg.eps_list = parse_eps_list(v)?;
        }
        if let Some(v) = self.l {
            cfg.target_l = v;
        }
        if let Some(v) = self.n {
            cfg.n = Some(v);
        }
        if let Some(v) = self.tol {
            cfg.tol = v;
        }
        if let Some(v) = self.max_iter {
            cfg.max_iter = v;
        }
        if let Some(v) = &self.out {
            cfg.out = v.clone();
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = self.k {
            cfg.k = Some(v);
        }
        if let Some(v) = &self.k_range {
            cfg.k_range = Some(v.parse::<Range>()?);
        }
        if let Some(v) = &self.beta_range {
            cfg.beta_range = v.parse()?;
        }
        if let Some(v) = &self.resolution {
            cfg.resolution = parse_resolution(v)?;
        }
        if let Some(v) = self.amplitude {
            cfg.amplitude = v;
        }
        if self.sweep {
            cfg.sweep = true;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn configure_threads() -> Result<(), CliError> {
    if let Ok(v) = std::env::var("CAPWHITHAM_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|&n| n >= 1)
            .ok_or_else(|| CliError::Usage(format!("CAPWHITHAM_THREADS must be a positive integer, got {v:?}")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(e.to_string()))?;
    }
    Ok(())
}

fn run_verify(cfg: &RunConfig, only: Option<&str>) -> Result<(), CliError> {
    let settings = VerifySettings {
        seed: cfg.seed,
        beale_tol: cfg.tol,
        max_iter: cfg.max_iter,
    };
    let reports = verify::run(only, settings)?;
    for r in &reports {
        println!("{}", r.line());
    }
    let failed = reports.iter().filter(|r| !r.passed).count();
    std::fs::create_dir_all(&cfg.out)?;
    let body = json!({
        "criteria": reports,
        "passed": failed == 0,
        "config_hash": cfg.hash(),
        "versions": capwhitham_cli::output::versions(),
    });
    let text = serde_json::to_string_pretty(&body).map_err(std::io::Error::other)?;
    std::fs::write(cfg.out.join("verify.json"), text + "\n")?;
    println!("{} of {} criteria passed", reports.len() - failed, reports.len());
    if failed > 0 {
        return Err(CliError::VerifyFailed {
            failed,
            total: reports.len(),
        });
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, ov) = match &cli.command {
        Command::Dispersion(o) => ("dispersion", o),
        Command::Nanopteron(o) => ("nanopteron", o),
        Command::Depression(o) => ("depression", o),
        Command::Periodic(o) => ("periodic", o),
        Command::StabilityMap(o) => ("stability-map", o),
        Command::Verify(o) => ("verify", o),
    };
    let cfg = match ov.config() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let result = configure_threads().and_then(|_| match &cli.command {
        Command::Dispersion(_) => commands::dispersion(&cfg).map(Some),
        Command::Nanopteron(_) => commands::nanopteron(&cfg).map(Some),
        Command::Depression(_) => commands::depression(&cfg).map(Some),
        Command::Periodic(_) => commands::periodic(&cfg).map(Some),
        Command::StabilityMap(_) => commands::stability(&cfg).map(Some),
        Command::Verify(o) => run_verify(&cfg, o.only.as_deref()).map(|_| None),
    });
    match result {
        Ok(Some(outcome)) => {
            for f in &outcome.files {
                println!("wrote {}", f.display());
            }
            ExitCode::SUCCESS
        }
        Ok(None) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.exit_code() == 3 {
                write_diagnostic(&cfg, name, &e);
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
