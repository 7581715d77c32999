//! Run configuration: a flat `key = value` file with command-line overrides.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use sha2::{Digest, Sha256};

use crate::error::CliError;

/// `A:B[:STEP]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Range {
    pub start: f64,
    pub end: f64,
    pub step: Option<f64>,
}

impl Range {
    /// Evenly spaced points from `start` to `end` inclusive; requires a step.
    pub fn points(&self) -> Result<Vec<f64>, CliError> {
        let step = self
            .step
            .ok_or_else(|| CliError::Usage(format!("range {self} has no step")))?;
        let n = ((self.end - self.start) / step).round();
        if !(n >= 1.0) || ((self.start + n * step) - self.end).abs() > 1e-9 * step.max(self.end.abs()) {
            return Err(CliError::Usage(format!("range {self} is not a whole number of steps")));
        }
        let n = n as usize;
        Ok((0..=n)
            .map(|i| self.start + (self.end - self.start) * i as f64 / n as f64)
            .collect())
    }
}

impl std::fmt::Display for Range {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:?}:{:?}", self.start, self.end)?;
        if let Some(s) = self.step {
            write!(f, ":{s:?}")?;
        }
        Ok(())
    }
}

impl FromStr for Range {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        let parts: Vec<&str> = s.split(':').collect();
        if !(2..=3).contains(&parts.len()) {
            return Err(CliError::Usage(format!("expected A:B or A:B:STEP, got {s:?}")));
        }
        let start = parse_f64("range start", parts[0])?;
        let end = parse_f64("range end", parts[1])?;
        let step = parts.get(2).map(|p| parse_f64("range step", p)).transpose()?;
        if !(end > start) {
            return Err(CliError::Usage(format!("empty range {s:?}")));
        }
        if let Some(st) = step {
            if !(st > 0.0) {
                return Err(CliError::Usage(format!("range step must be positive in {s:?}")));
            }
        }
        Ok(Range { start, end, step })
    }
}

/// Every parameter any command reads.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub beta: f64,
    pub epsilon: f64,
    /// Strictly decreasing.
    pub eps_list: Vec<f64>,
    /// Half-length of the scaled domain for generalized solitary waves.
    pub target_l: f64,
    /// Grid size; chosen automatically when absent.
    pub n: Option<usize>,
    pub tol: f64,
    pub max_iter: usize,
    pub out: PathBuf,
    pub seed: u64,
    pub amplitude: f64,
    pub k: Option<f64>,
    pub k_range: Option<Range>,
    pub beta_range: Range,
    /// `(beta rows, k columns)`.
    pub resolution: (usize, usize),
    /// Also run the `eps_list` sweep for the nanopteron command.
    pub sweep: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            beta: 0.1,
            epsilon: 0.15,
            eps_list: vec![0.25, 0.2, 0.15, 0.1],
            target_l: 100.0,
            n: None,
            tol: 1e-12,
            max_iter: 100,
            out: PathBuf::from("out"),
            seed: 7,
            amplitude: 0.01,
            k: None,
            k_range: None,
            beta_range: Range {
                start: 0.0,
                end: 1.0 / 3.0,
                step: None,
            },
            resolution: (64, 64),
            sweep: false,
        }
    }
}

fn parse_f64(key: &str, v: &str) -> Result<f64, CliError> {
    v.trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("{key}: not a number: {v:?}")))
}

fn parse_usize(key: &str, v: &str) -> Result<usize, CliError> {
    v.trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("{key}: not a non-negative integer: {v:?}")))
}

pub fn parse_eps_list(v: &str) -> Result<Vec<f64>, CliError> {
    v.split(',').map(|p| parse_f64("eps_list", p)).collect()
}

pub fn parse_resolution(v: &str) -> Result<(usize, usize), CliError> {
    let (a, b) = v
        .split_once(['x', 'X'])
        .ok_or_else(|| CliError::Usage(format!("resolution must be RxC, got {v:?}")))?;
    Ok((parse_usize("resolution", a)?, parse_usize("resolution", b)?))
}

impl RunConfig {
    /// Sets one key from its text form.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        let v = value.trim();
        let key = key.trim();
        match key {
            "beta" => self.beta = parse_f64(key, v)?,
            "epsilon" => self.epsilon = parse_f64(key, v)?,
            "eps_list" => self.eps_list = parse_eps_list(v)?,
            "L" => self.target_l = parse_f64(key, v)?,
            "N" => self.n = if v == "auto" { None } else { Some(parse_usize(key, v)?) },
            "tol" => self.tol = parse_f64(key, v)?,
            "max_iter" => self.max_iter = parse_usize(key, v)?,
            "out" => self.out = PathBuf::from(v),
            "seed" => {
                self.seed = v
                    .parse()
                    .map_err(|_| CliError::Usage(format!("seed: not an integer: {v:?}")))?
            }
            "amplitude" => self.amplitude = parse_f64(key, v)?,
            "k" => self.k = if v == "none" { None } else { Some(parse_f64(key, v)?) },
            "k_range" => self.k_range = if v == "none" { None } else { Some(v.parse()?) },
            "beta_range" => self.beta_range = v.parse()?,
            "resolution" => self.resolution = parse_resolution(v)?,
            "sweep" => {
                self.sweep = match v {
                    "true" => true,
                    "false" => false,
                    _ => return Err(CliError::Usage(format!("sweep: expected true or false, got {v:?}"))),
                }
            }
            other => return Err(CliError::Usage(format!("unknown config key {other:?}"))),
        }
        Ok(())
    }

    /// Parses `key = value` lines; blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut cfg = Self::default();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("config line {}: expected key = value", i + 1)))?;
            cfg.set(k, v)?;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Canonical text form; [`RunConfig::parse`] inverts it exactly.
    pub fn to_text(&self) -> String {
        let mut s = self.parameter_text();
        let _ = writeln!(s, "out = {}", self.out.display());
        s
    }

    /// Everything except the output directory.
    fn parameter_text(&self) -> String {
        let mut s = String::new();
        let list: Vec<String> = self.eps_list.iter().map(|e| format!("{e:?}")).collect();
        let _ = writeln!(s, "beta = {:?}", self.beta);
        let _ = writeln!(s, "epsilon = {:?}", self.epsilon);
        let _ = writeln!(s, "eps_list = {}", list.join(","));
        let _ = writeln!(s, "L = {:?}", self.target_l);
        match self.n {
            Some(n) => writeln!(s, "N = {n}"),
            None => writeln!(s, "N = auto"),
        }
        .ok();
        let _ = writeln!(s, "tol = {:?}", self.tol);
        let _ = writeln!(s, "max_iter = {}", self.max_iter);
        let _ = writeln!(s, "seed = {}", self.seed);
        let _ = writeln!(s, "amplitude = {:?}", self.amplitude);
        match self.k {
            Some(k) => writeln!(s, "k = {k:?}"),
            None => writeln!(s, "k = none"),
        }
        .ok();
        match self.k_range {
            Some(r) => writeln!(s, "k_range = {r}"),
            None => writeln!(s, "k_range = none"),
        }
        .ok();
        let _ = writeln!(s, "beta_range = {}", self.beta_range);
        let _ = writeln!(s, "resolution = {}x{}", self.resolution.0, self.resolution.1);
        let _ = writeln!(s, "sweep = {}", self.sweep);
        s
    }

    /// SHA-256 of the parameters (the output directory is not part of it).
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.parameter_text().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Usage(m));
        if !(self.tol > 0.0) {
            return bad(format!("tol must be positive, got {}", self.tol));
        }
        if !(self.epsilon > 0.0) {
            return bad(format!("epsilon must be positive, got {}", self.epsilon));
        }
        if !(self.target_l > 0.0) {
            return bad(format!("L must be positive, got {}", self.target_l));
        }
        if self.eps_list.is_empty() {
            return bad("eps_list is empty".into());
        }
        if self.eps_list.iter().any(|e| !(*e > 0.0)) || self.eps_list.windows(2).any(|w| !(w[1] < w[0])) {
            return bad("eps_list must be positive and strictly decreasing".into());
        }
        if self.max_iter == 0 {
            return bad("max_iter must be at least 1".into());
        }
        if let Some(n) = self.n {
            if n < 8 || !n.is_power_of_two() {
                return bad(format!("N must be a power of two >= 8, got {n}"));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_round_trip() {
        let cfg = RunConfig {
            beta: 0.1 + 0.2,
            eps_list: vec![0.3, 1.0 / 7.0, 1e-3],
            n: Some(4096),
            k_range: Some("0:10:0.01".parse().unwrap()),
            k: Some(std::f64::consts::PI),
            sweep: true,
            ..RunConfig::default()
        };
        let back = RunConfig::parse(&cfg.to_text()).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(back.hash(), cfg.hash());
        assert_eq!(RunConfig::parse(&RunConfig::default().to_text()).unwrap(), RunConfig::default());
    }

    #[test]
    fn hash_ignores_output_directory() {
        let a = RunConfig::default();
        let mut b = a.clone();
        b.out = PathBuf::from("elsewhere");
        assert_eq!(a.hash(), b.hash());
        b.beta = 0.2;
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
    }

    #[test]
    fn parse_and_validate() {
        let cfg = RunConfig::parse("# comment\nbeta = 0.2\n\neps_list = 0.3, 0.2 ,0.1\nresolution = 40x50\n").unwrap();
        assert_eq!(cfg.beta, 0.2);
        assert_eq!(cfg.eps_list, vec![0.3, 0.2, 0.1]);
        assert_eq!(cfg.resolution, (40, 50));
        assert!(RunConfig::parse("colour = red").is_err());
        assert!(RunConfig::parse("beta 0.2").is_err());
        let mut c = RunConfig {
            eps_list: vec![0.1, 0.2],
            ..RunConfig::default()
        };
        assert!(c.validate().is_err());
        c.eps_list = vec![0.2, 0.2];
        assert!(c.validate().is_err());
        c = RunConfig::default();
        c.tol = 0.0;
        assert!(c.validate().is_err());
        assert!(RunConfig::default().validate().is_ok());
    }

    #[test]
    fn ranges() {
        let r: Range = "0:10:0.01".parse().unwrap();
        let p = r.points().unwrap();
        assert_eq!(p.len(), 1001);
        assert_eq!(p[0], 0.0);
        assert_eq!(p[1000], 10.0);
        assert!("0:10:0.03".parse::<Range>().unwrap().points().is_err());
        assert!("1:0:0.1".parse::<Range>().is_err());
        assert!("0:1:-1".parse::<Range>().is_err());
        assert!("0:1".parse::<Range>().unwrap().points().is_err());
    }
}
