//! Semi-implicit Euler–Maruyama paths and the Monte Carlo estimator of the
//! quadratic functional.
//!
//! A step solves `(M + τA) x^n = (M + ΔW^{n-1}) x^{n-1}`. Sample `j` of an
//! estimate with master seed `s` draws from the ChaCha8 stream `j` keyed by
//! `s`, so samples are independent and reproducible in any order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::fem::FemMatrices;
use crate::linalg::{factor_spd_tridiag, TriDiagFactor};
use crate::lyapunov::LyapRunConfig;
use crate::noise::DWCovariance;

#[derive(Clone, Debug, PartialEq)]
pub struct PathState {
    pub step: usize,
    pub x: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n_samples: usize,
    pub seed: u64,
}

/// Random stream for sample `index` under master seed `seed`.
pub fn sample_stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Euler–Maruyama stepper holding the factorization of `M + τA`.
pub struct PathStepper<'a> {
    fem: &'a FemMatrices,
    cov: &'a DWCovariance,
    tau: f64,
    factor: TriDiagFactor,
    rhs: Vec<f64>,
}

impl<'a> PathStepper<'a> {
    pub fn new(fem: &'a FemMatrices, cov: &'a DWCovariance, tau: f64) -> Result<Self> {
        if cov.n() != fem.n() {
            return Err(Error::DimensionMismatch {
                expected: fem.n(),
                found: cov.n(),
            });
        }
        Ok(Self {
            fem,
            cov,
            tau,
            factor: factor_spd_tridiag(&fem.implicit_operator(tau))?,
            rhs: vec![0.0; fem.n()],
        })
    }

    pub fn step<R: Rng + ?Sized>(&mut self, state: &mut PathState, rng: &mut R) -> Result<()> {
        if state.x.len() != self.fem.n() {
            return Err(Error::DimensionMismatch {
                expected: self.fem.n(),
                found: state.x.len(),
            });
        }
        let dw = self.cov.sample_dw(self.tau, rng);
        self.fem.mass.mul_vec_into(&state.x, &mut self.rhs);
        dw.mul_vec_add(&state.x, &mut self.rhs);
        self.factor.solve_in_place(&mut self.rhs);
        state.step += 1;
        if self.rhs.iter().any(|v| !v.is_finite()) {
            return Err(Error::BlowUp {
                path: None,
                step: state.step,
            });
        }
        state.x.copy_from_slice(&self.rhs);
        Ok(())
    }
}

/// One Euler–Maruyama step with a freshly sampled increment.
pub fn em_step<R: Rng + ?Sized>(
    state: &PathState,
    fem: &FemMatrices,
    cov: &DWCovariance,
    tau: f64,
    rng: &mut R,
) -> Result<PathState> {
    let mut next = state.clone();
    PathStepper::new(fem, cov, tau)?.step(&mut next, rng)?;
    Ok(next)
}

/// Runs one path over the whole grid. Returns the final coefficients and,
/// if requested, `τ Σ_{n<N} (x^n)ᵀ R x^n`.
pub fn run_path<R: Rng + ?Sized>(
    x0: &[f64],
    config: &LyapRunConfig,
    fem: &FemMatrices,
    cov: &DWCovariance,
    rng: &mut R,
    accumulate_r: bool,
) -> Result<(Vec<f64>, f64)> {
    let mut stepper = PathStepper::new(fem, cov, config.tau())?;
    path_with(&mut stepper, x0, config, rng, accumulate_r)
}

fn path_with<R: Rng + ?Sized>(
    stepper: &mut PathStepper<'_>,
    x0: &[f64],
    config: &LyapRunConfig,
    rng: &mut R,
    accumulate_r: bool,
) -> Result<(Vec<f64>, f64)> {
    let mut state = PathState {
        step: 0,
        x: x0.to_vec(),
    };
    let mut running = 0.0;
    let r = &stepper.fem.r_mat;
    let accumulate = accumulate_r && !r.is_zero();
    for _ in 0..config.n_steps() {
        if accumulate {
            running += config.tau() * r.quad_form(&state.x)?;
        }
        stepper.step(&mut state, rng)?;
    }
    Ok((state.x, running))
}

/// Sum in a fixed binary tree over the sample order.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    match values.len() {
        0 => 0.0,
        1 => values[0],
        n if n <= 8 => values.iter().sum(),
        n => {
            let (a, b) = values.split_at(n / 2);
            pairwise_sum(a) + pairwise_sum(b)
        }
    }
}

/// Monte Carlo estimate of the functional from `samples` independent paths.
pub fn phi_mc(
    x0: &[f64],
    config: &LyapRunConfig,
    fem: &FemMatrices,
    cov: &DWCovariance,
    samples: usize,
    seed: u64,
) -> Result<McEstimate> {
    if samples < 2 {
        return Err(Error::InvalidArgument(format!(
            "Monte Carlo needs at least 2 samples, got {samples}"
        )));
    }
    if x0.len() != fem.n() {
        return Err(Error::DimensionMismatch {
            expected: fem.n(),
            found: x0.len(),
        });
    }
    config.check_coupling(fem.h);
    let mut stepper = PathStepper::new(fem, cov, config.tau())?;
    let mut values = Vec::with_capacity(samples);
    for j in 0..samples {
        let mut rng = sample_stream(seed, j as u64);
        let (x, running) = path_with(&mut stepper, x0, config, &mut rng, true).map_err(|e| match e {
            Error::BlowUp { step, .. } => Error::BlowUp { path: Some(j), step },
            other => other,
        })?;
        values.push(running + fem.g_mat.quad_form(&x)?);
    }
    let mean = pairwise_sum(&values) / samples as f64;
    let deviations: Vec<f64> = values.iter().map(|v| (v - mean).powi(2)).collect();
    let variance = pairwise_sum(&deviations) / (samples - 1) as f64;
    Ok(McEstimate {
        mean,
        std_error: (variance / samples as f64).sqrt(),
        n_samples: samples,
        seed,
    })
}
