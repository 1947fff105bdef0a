//! Convergence and cost studies over a ladder of mesh widths.

mod config;
mod report;

use std::fmt;
use std::time::Instant;

pub use config::{parse_real, ExperimentConfig, NoiseSpec, SEED_ENV};
pub use report::{write_bound_csv, write_convergence_csv, write_mc_csv, write_phi_csv, write_timing_csv, CONVERGENCE_HEADER};

use crate::covariance::{phi_cov, phi_cov_matrix};
use crate::error::{Error, Result};
use crate::fem::{assemble, hat_initial, interpolate, quartic_overlaps, FemMatrices, Functionals, Mesh1D};
use crate::fit::log_log_slope;
use crate::lyapunov::{phi_lyap, run_lyapunov, LyapRunConfig};
use crate::montecarlo::{phi_mc, McEstimate};
use crate::noise::{build_dw_covariance, DWCovariance};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Method {
    Lyap,
    Cov,
    Mc,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Lyap => "lyap",
            Self::Cov => "cov",
            Self::Mc => "mc",
        })
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lyap" => Ok(Self::Lyap),
            "cov" => Ok(Self::Cov),
            "mc" => Ok(Self::Mc),
            other => Err(Error::InvalidArgument(format!("unknown method '{other}'"))),
        }
    }
}

/// Everything needed to evaluate the functional at one mesh width.
pub struct Problem {
    pub mesh: Mesh1D,
    pub fem: FemMatrices,
    pub cov: DWCovariance,
    pub x0: Vec<f64>,
    pub run: LyapRunConfig,
}

impl Problem {
    /// Hat initial datum, `τ = tau_factor · h²`.
    pub fn build(config: &ExperimentConfig, h: f64) -> Result<Self> {
        let mesh = Mesh1D::from_width(h)?;
        let functionals = Functionals {
            r: config.r_kind,
            g: config.g_kind,
        };
        let fem = assemble(&mesh, config.a_scale, functionals)?;
        let model = config.noise.model(config.b_scale)?;
        let cov = build_dw_covariance(&mesh, &quartic_overlaps(&mesh), &model)?;
        let x0 = interpolate(&mesh, hat_initial)?;
        let run = LyapRunConfig::new(config.final_time, config.tau(h))?;
        Ok(Self { mesh, fem, cov, x0, run })
    }

    pub fn phi_lyap(&self) -> Result<f64> {
        phi_lyap(&run_lyapunov(&self.fem, &self.cov, &self.run)?, &self.fem, &self.x0)
    }

    pub fn phi_cov(&self) -> Result<f64> {
        phi_cov(&self.x0, &self.run, &self.fem, &self.cov)
    }

    pub fn phi_mc(&self, samples: usize, seed: u64) -> Result<McEstimate> {
        phi_mc(&self.x0, &self.run, &self.fem, &self.cov, samples, seed)
    }

    pub fn h(&self) -> f64 {
        self.mesh.h()
    }

    pub fn n_h(&self) -> usize {
        self.mesh.n_interior()
    }

    pub fn n_tau(&self) -> usize {
        self.run.n_steps()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceRow {
    pub h: f64,
    pub tau: f64,
    pub n_h: usize,
    pub n_tau: usize,
    pub method: Method,
    pub phi: f64,
    pub error: f64,
    pub seconds: f64,
}

#[derive(Clone, Debug)]
pub struct ConvergenceReport {
    pub reference_h: f64,
    pub reference_phi: f64,
    pub rows: Vec<ConvergenceRow>,
    /// Least-squares slope of `ln error` against `ln h`, per method.
    pub slopes: Vec<(Method, Option<f64>)>,
}

impl ConvergenceReport {
    pub fn slope(&self, method: Method) -> Option<f64> {
        self.slopes.iter().find(|(m, _)| *m == method).and_then(|(_, s)| *s)
    }

    pub fn rows_for(&self, method: Method) -> impl Iterator<Item = &ConvergenceRow> {
        self.rows.iter().filter(move |r| r.method == method)
    }
}

fn timed<T>(f: impl FnOnce() -> Result<T>) -> Result<(T, f64)> {
    let start = Instant::now();
    let value = f()?;
    Ok((value, start.elapsed().as_secs_f64().max(f64::MIN_POSITIVE)))
}

/// Reference value: covariance propagation at `reference_h`.
pub fn reference_phi(config: &ExperimentConfig) -> Result<f64> {
    let h = config.reference_h;
    Problem::build(config, h)
        .and_then(|p| p.phi_cov())
        .map_err(|e| Error::Reference { h, source: Box::new(e) })
}

pub fn run_convergence(config: &ExperimentConfig) -> Result<ConvergenceReport> {
    config.validate()?;
    if let Some(h) = config.h_ladder.iter().find(|&&h| h <= config.reference_h) {
        return Err(Error::InvalidArgument(format!(
            "reference width {} must be finer than every ladder width (found {h})",
            config.reference_h
        )));
    }
    if config.mc_samples == 1 {
        return Err(Error::InvalidArgument("mc_samples must be 0 or at least 2".into()));
    }
    let reference = reference_phi(config)?;
    log::info!("reference value {reference:e} at h = {}", config.reference_h);

    let mut methods = vec![Method::Lyap, Method::Cov];
    if config.mc_samples > 0 {
        methods.push(Method::Mc);
    }
    let mut rows = Vec::new();
    for &h in &config.h_ladder {
        let problem = Problem::build(config, h)?;
        for &method in &methods {
            let (phi, seconds) = timed(|| match method {
                Method::Lyap => problem.phi_lyap(),
                Method::Cov => problem.phi_cov(),
                Method::Mc => problem.phi_mc(config.mc_samples, config.seed).map(|e| e.mean),
            })?;
            rows.push(ConvergenceRow {
                h,
                tau: problem.run.tau(),
                n_h: problem.n_h(),
                n_tau: problem.n_tau(),
                method,
                phi,
                error: (phi - reference).abs(),
                seconds,
            });
        }
    }
    let slopes = methods
        .iter()
        .map(|&m| {
            let (hs, errs): (Vec<f64>, Vec<f64>) = rows.iter().filter(|r| r.method == m).map(|r| (r.h, r.error)).unzip();
            (m, log_log_slope(&hs, &errs))
        })
        .collect();
    Ok(ConvergenceReport {
        reference_h: config.reference_h,
        reference_phi: reference,
        rows,
        slopes,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct TimingRow {
    pub method: Method,
    pub h: f64,
    pub n_h: usize,
    pub n_tau: usize,
    pub median_seconds: f64,
    pub repeats: usize,
}

#[derive(Clone, Debug)]
pub struct ComplexityReport {
    pub rows: Vec<TimingRow>,
    /// Slope of `ln seconds` against `ln h` over the finest half of the
    /// ladder, per method.
    pub exponents: Vec<(Method, Option<f64>)>,
}

impl ComplexityReport {
    pub fn exponent(&self, method: Method) -> Option<f64> {
        self.exponents.iter().find(|(m, _)| *m == method).and_then(|(_, s)| *s)
    }
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Times the cost of obtaining the functional on the whole space with each
/// method: the final Lyapunov iterate, the full quadratic form from moment
/// propagation, and (for `mc`) a single Monte Carlo estimate with
/// `mc_samples` paths. Runs on the calling thread only.
pub fn run_complexity(config: &ExperimentConfig, methods: &[Method], repeat: usize) -> Result<ComplexityReport> {
    config.validate()?;
    if repeat < 3 {
        return Err(Error::InvalidArgument(format!("repeat must be at least 3, got {repeat}")));
    }
    if methods.contains(&Method::Mc) && config.mc_samples < 2 {
        return Err(Error::InvalidArgument("mc timing needs mc_samples >= 2".into()));
    }
    let mut ladder = config.h_ladder.clone();
    ladder.sort_by(|a, b| b.total_cmp(a));
    let mut rows = Vec::new();
    for &method in methods {
        for &h in &ladder {
            let problem = Problem::build(config, h)?;
            let mut samples = Vec::with_capacity(repeat);
            for _ in 0..repeat {
                let (_, seconds) = timed(|| match method {
                    Method::Lyap => run_lyapunov(&problem.fem, &problem.cov, &problem.run).map(|s| s.l.max_abs()),
                    Method::Cov => phi_cov_matrix(&problem.run, &problem.fem, &problem.cov).map(|q| q.max_abs()),
                    Method::Mc => problem.phi_mc(config.mc_samples, config.seed).map(|e| e.mean),
                })?;
                samples.push(seconds);
            }
            rows.push(TimingRow {
                method,
                h,
                n_h: problem.n_h(),
                n_tau: problem.n_tau(),
                median_seconds: median(&mut samples),
                repeats: repeat,
            });
        }
    }
    let exponents = methods
        .iter()
        .map(|&m| {
            let timings: Vec<&TimingRow> = rows.iter().filter(|r| r.method == m).collect();
            let keep = timings.len().div_ceil(2).max(2).min(timings.len());
            let finest = &timings[timings.len() - keep..];
            let hs: Vec<f64> = finest.iter().map(|r| r.h).collect();
            let secs: Vec<f64> = finest.iter().map(|r| r.median_seconds).collect();
            (m, log_log_slope(&hs, &secs))
        })
        .collect();
    Ok(ComplexityReport { rows, exponents })
}
