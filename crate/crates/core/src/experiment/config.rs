//! Line-oriented `key = value` experiment configuration.
//!
//! ```text
//! # comments start with '#'
//! final_time = 1
//! a_scale = 0.05
//! b_scale = 0.65
//! noise = white            # or gaussian:<length>
//! r_kind = zero
//! g_kind = identity
//! h_ladder = 2^-1, 2^-2, 2^-3
//! tau_factor = 1           # tau = tau_factor * h^2
//! reference_h = 2^-10
//! mc_samples = 0
//! seed = 20190101
//! output = rows.csv
//! ```

use std::fmt;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::fem::FunctionalKind;
use crate::noise::{CovKernel, NoiseModel};

/// Environment variable that overrides the configured seed.
pub const SEED_ENV: &str = "LYAPFUN_SEED";

#[derive(Clone, Debug, PartialEq)]
pub enum NoiseSpec {
    White,
    Gaussian { length: f64 },
}

impl NoiseSpec {
    pub fn model(&self, b_scale: f64) -> Result<NoiseModel> {
        match self {
            Self::White => NoiseModel::white(b_scale),
            Self::Gaussian { length } => NoiseModel::kernel(CovKernel::gaussian(*length), b_scale),
        }
    }
}

impl fmt::Display for NoiseSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::White => f.write_str("white"),
            Self::Gaussian { length } => write!(f, "gaussian:{length}"),
        }
    }
}

impl std::str::FromStr for NoiseSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("white") {
            return Ok(Self::White);
        }
        if let Some(len) = s.strip_prefix("gaussian:") {
            let length = parse_real(len)?;
            if length > 0.0 {
                return Ok(Self::Gaussian { length });
            }
        }
        Err(Error::Config(format!("unknown noise '{s}' (expected white or gaussian:<length>)")))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub final_time: f64,
    pub a_scale: f64,
    pub b_scale: f64,
    pub noise: NoiseSpec,
    pub r_kind: FunctionalKind,
    pub g_kind: FunctionalKind,
    pub h_ladder: Vec<f64>,
    pub tau_factor: f64,
    pub reference_h: f64,
    pub mc_samples: usize,
    pub seed: u64,
    pub output: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            final_time: 1.0,
            a_scale: 0.05,
            b_scale: 0.65,
            noise: NoiseSpec::White,
            r_kind: FunctionalKind::Zero,
            g_kind: FunctionalKind::Identity,
            h_ladder: (1..=8).map(|k| 2f64.powi(-k)).collect(),
            tau_factor: 1.0,
            reference_h: 2f64.powi(-10),
            mc_samples: 0,
            seed: 20_190_101,
            output: None,
        }
    }
}

/// Accepts plain reals and `2^-k` style powers.
pub fn parse_real(s: &str) -> Result<f64> {
    let s = s.trim();
    let value = if let Some((base, exp)) = s.split_once('^') {
        let base: f64 = base.trim().parse().map_err(|_| Error::Config(format!("bad number '{s}'")))?;
        let exp: i32 = exp.trim().parse().map_err(|_| Error::Config(format!("bad exponent in '{s}'")))?;
        base.powi(exp)
    } else {
        s.parse().map_err(|_| Error::Config(format!("bad number '{s}'")))?
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::Config(format!("non-finite number '{s}'")))
    }
}

fn parse_int<T: std::str::FromStr>(key: &str, s: &str) -> Result<T> {
    s.trim()
        .parse()
        .map_err(|_| Error::Config(format!("{key}: expected an integer, got '{s}'")))
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut config = Self::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected 'key = value'", lineno + 1)))?;
            config
                .set(key.trim(), value.trim())
                .map_err(|e| Error::Config(format!("line {}: {e}", lineno + 1)))?;
        }
        config.validate()?;
        Ok(config)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Sets one field from its textual value; unknown keys are errors.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "final_time" => self.final_time = parse_real(value)?,
            "a_scale" => self.a_scale = parse_real(value)?,
            "b_scale" => self.b_scale = parse_real(value)?,
            "noise" => self.noise = value.parse()?,
            "r_kind" => self.r_kind = value.parse()?,
            "g_kind" => self.g_kind = value.parse()?,
            "h_ladder" => {
                self.h_ladder = value
                    .split(',')
                    .filter(|s| !s.trim().is_empty())
                    .map(parse_real)
                    .collect::<Result<_>>()?
            }
            "tau_factor" => self.tau_factor = parse_real(value)?,
            "reference_h" => self.reference_h = parse_real(value)?,
            "mc_samples" => self.mc_samples = parse_int(key, value)?,
            "seed" => self.seed = parse_int(key, value)?,
            "output" => self.output = Some(PathBuf::from(value)),
            other => return Err(Error::Config(format!("unknown key '{other}'"))),
        }
        Ok(())
    }

    /// Applies `LYAPFUN_SEED` when it is set.
    pub fn apply_env(&mut self) -> Result<()> {
        if let Ok(seed) = std::env::var(SEED_ENV) {
            self.seed = parse_int(SEED_ENV, &seed)?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 {
                Ok(())
            } else {
                Err(Error::Config(format!("{name} must be positive, got {v}")))
            }
        };
        positive("final_time", self.final_time)?;
        positive("a_scale", self.a_scale)?;
        positive("tau_factor", self.tau_factor)?;
        if self.b_scale < 0.0 {
            return Err(Error::Config(format!("b_scale must be nonnegative, got {}", self.b_scale)));
        }
        if self.h_ladder.is_empty() {
            return Err(Error::Config("h_ladder is empty".into()));
        }
        for &h in self.h_ladder.iter().chain([&self.reference_h]) {
            if !(h > 0.0 && h < 1.0) {
                return Err(Error::Config(format!("mesh width {h} not in (0, 1)")));
            }
        }
        Ok(())
    }

    pub fn tau(&self, h: f64) -> f64 {
        self.tau_factor * h * h
    }

    /// Text form accepted by [`ExperimentConfig::parse`].
    pub fn to_text(&self) -> String {
        let ladder: Vec<String> = self.h_ladder.iter().map(|h| format!("{h:?}")).collect();
        let mut out = format!(
            "final_time = {:?}\na_scale = {:?}\nb_scale = {:?}\nnoise = {}\nr_kind = {}\ng_kind = {}\n\
             h_ladder = {}\ntau_factor = {:?}\nreference_h = {:?}\nmc_samples = {}\nseed = {}\n",
            self.final_time,
            self.a_scale,
            self.b_scale,
            self.noise,
            self.r_kind,
            self.g_kind,
            ladder.join(", "),
            self.tau_factor,
            self.reference_h,
            self.mc_samples,
            self.seed,
        );
        if let Some(out_path) = &self.output {
            out.push_str(&format!("output = {}\n", out_path.display()));
        }
        out
    }
}
