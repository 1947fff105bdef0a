//! Fully discrete Lyapunov recursion.
//!
//! The coefficient matrix `L^n` of the operator iterate satisfies
//!
//! ```text
//! (M + τA) L^n (M + τA) = M L^{n-1} M + τ R + τ B_h(L^{n-1}),   L^0 = M⁻¹ G M⁻¹,
//! ```
//!
//! and the functional is recovered for any initial coefficient vector `x`
//! as `xᵀ M L^N M x`.

use crate::error::{Error, Result};
use crate::fem::FemMatrices;
use crate::linalg::{factor_spd_tridiag, DenseMatrix};
use crate::noise::DWCovariance;
use crate::propagate::TwoSided;

/// Uniform time grid `t_n = n τ`, `n = 0..=N_τ`, with `N_τ τ = T`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LyapRunConfig {
    final_time: f64,
    tau: f64,
    n_steps: usize,
    coupling: f64,
}

impl LyapRunConfig {
    pub fn new(final_time: f64, tau: f64) -> Result<Self> {
        if !(final_time >= 0.0 && final_time.is_finite()) {
            return Err(Error::InvalidArgument(format!("final time {final_time} must be nonnegative")));
        }
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(Error::InvalidArgument(format!("step size {tau} must be positive")));
        }
        let n_steps = (final_time / tau).round();
        if (n_steps * tau - final_time).abs() > 1e-12 * final_time.max(tau) {
            return Err(Error::InvalidArgument(format!(
                "step size {tau} does not divide final time {final_time}"
            )));
        }
        Ok(Self {
            final_time,
            tau,
            n_steps: n_steps as usize,
            coupling: 1.0,
        })
    }

    /// Grid with `tau = factor · h²`.
    pub fn parabolic(final_time: f64, h: f64, factor: f64) -> Result<Self> {
        Self::new(final_time, factor * h * h)
    }

    pub fn with_coupling(mut self, c: f64) -> Self {
        self.coupling = c;
        self
    }

    pub fn final_time(&self) -> f64 {
        self.final_time
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn coupling(&self) -> f64 {
        self.coupling
    }

    /// Whether `τ <= c h²`; logs a warning when it does not hold.
    pub fn check_coupling(&self, h: f64) -> bool {
        let ok = self.tau <= self.coupling * h * h * (1.0 + 1e-12);
        if !ok {
            log::warn!(
                "step size {} exceeds {} * h^2 = {} (h = {h})",
                self.tau,
                self.coupling,
                self.coupling * h * h
            );
        }
        ok
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LyapState {
    pub step: usize,
    pub l: DenseMatrix,
}

/// `L^0 = M⁻¹ G M⁻¹`.
pub fn lyap_init(fem: &FemMatrices) -> Result<LyapState> {
    let factor = factor_spd_tridiag(&fem.mass)?;
    let mut l = fem.g_mat.to_dense();
    factor.solve_columns(&mut l)?;
    let mut t = l.transpose();
    factor.solve_columns(&mut t)?;
    t.symmetrize();
    Ok(LyapState { step: 0, l: t })
}

/// Steps the recursion with a fixed `τ`; the factorization of `M + τA` is
/// computed once.
pub struct LyapunovStepper<'a> {
    fem: &'a FemMatrices,
    cov: &'a DWCovariance,
    tau: f64,
    two_sided: TwoSided,
}

impl<'a> LyapunovStepper<'a> {
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
            two_sided: TwoSided::new(fem, tau)?,
        })
    }

    pub fn step(&mut self, state: &mut LyapState) -> Result<()> {
        if state.l.n() != self.fem.n() {
            return Err(Error::DimensionMismatch {
                expected: self.fem.n(),
                found: state.l.n(),
            });
        }
        let (tau, cov, r) = (self.tau, self.cov, &self.fem.r_mat);
        self.two_sided.apply(&mut state.l, true, |prev, z| {
            r.add_to_dense(tau, z);
            cov.accumulate_bh(prev, tau, z)
        })?;
        state.step += 1;
        Ok(())
    }
}

/// One step of the recursion.
pub fn lyap_step(state: &LyapState, fem: &FemMatrices, cov: &DWCovariance, tau: f64) -> Result<LyapState> {
    let mut next = state.clone();
    LyapunovStepper::new(fem, cov, tau)?.step(&mut next)?;
    Ok(next)
}

/// Runs `L^0 → L^{N_τ}`, calling `observe` on every iterate including the
/// first.
pub fn run_lyapunov_with(
    fem: &FemMatrices,
    cov: &DWCovariance,
    config: &LyapRunConfig,
    mut observe: impl FnMut(&LyapState),
) -> Result<LyapState> {
    config.check_coupling(fem.h);
    let mut state = lyap_init(fem)?;
    observe(&state);
    let mut stepper = LyapunovStepper::new(fem, cov, config.tau())?;
    for _ in 0..config.n_steps() {
        stepper.step(&mut state)?;
        observe(&state);
    }
    Ok(state)
}

pub fn run_lyapunov(fem: &FemMatrices, cov: &DWCovariance, config: &LyapRunConfig) -> Result<LyapState> {
    run_lyapunov_with(fem, cov, config, |_| {})
}

/// `xᵀ M L M x`.
pub fn phi_lyap(state: &LyapState, fem: &FemMatrices, x: &[f64]) -> Result<f64> {
    let mx = fem.mass.mul_vec(x)?;
    state.l.quad_form(&mx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::{assemble, build_mesh, quartic_overlaps, FunctionalKind, Functionals};
    use crate::noise::{build_dw_covariance, NoiseModel};
    use approx::assert_relative_eq;

    fn setup(n: usize, a: f64, b: f64, functionals: Functionals) -> (FemMatrices, DWCovariance) {
        let mesh = build_mesh(n).unwrap();
        let fem = assemble(&mesh, a, functionals).unwrap();
        let cov = build_dw_covariance(&mesh, &quartic_overlaps(&mesh), &NoiseModel::white(b).unwrap()).unwrap();
        (fem, cov)
    }

    #[test]
    fn init_examples() {
        let (fem, _) = setup(4, 1.0, 0.0, Functionals::default());
        let l0 = lyap_init(&fem).unwrap().l;
        let prod = fem.mass.to_dense().matmul(&l0);
        for i in 0..4 {
            for j in 0..4 {
                assert!((prod.get(i, j) - if i == j { 1.0 } else { 0.0 }).abs() < 1e-12);
            }
        }
        let zero_g = Functionals {
            r: FunctionalKind::Zero,
            g: FunctionalKind::Zero,
        };
        let (fem, _) = setup(4, 1.0, 0.0, zero_g);
        assert_eq!(lyap_init(&fem).unwrap().l.max_abs(), 0.0);
        let (fem, _) = setup(1, 1.0, 0.0, Functionals::default());
        assert_relative_eq!(lyap_init(&fem).unwrap().l.get(0, 0), 3.0, max_relative = 1e-14);
    }

    #[test]
    fn scalar_step_and_functional() {
        let (fem, cov) = setup(1, 1.0, 0.0, Functionals::default());
        let l1 = lyap_step(&lyap_init(&fem).unwrap(), &fem, &cov, 1.0).unwrap();
        assert_eq!(l1.step, 1);
        assert_relative_eq!(l1.l.get(0, 0), 3.0 / 169.0, max_relative = 1e-14);
        assert_relative_eq!(phi_lyap(&l1, &fem, &[1.0]).unwrap(), 1.0 / 507.0, max_relative = 1e-14);
        assert_eq!(phi_lyap(&l1, &fem, &[0.0]).unwrap(), 0.0);
        assert!(phi_lyap(&l1, &fem, &[0.0, 1.0]).is_err());
    }

    #[test]
    fn zero_data_stays_zero() {
        let zero = Functionals {
            r: FunctionalKind::Zero,
            g: FunctionalKind::Zero,
        };
        let (fem, cov) = setup(6, 0.05, 0.65, zero);
        let config = LyapRunConfig::new(0.1, 0.01).unwrap();
        assert_eq!(run_lyapunov(&fem, &cov, &config).unwrap().l.max_abs(), 0.0);
    }

    #[test]
    fn run_config_validation() {
        let c = LyapRunConfig::new(1.0, 1.0 / 64.0).unwrap();
        assert_eq!(c.n_steps(), 64);
        assert!(LyapRunConfig::new(1.0, 0.3).is_err());
        assert!(LyapRunConfig::new(1.0, 0.0).is_err());
        assert_eq!(LyapRunConfig::new(0.0, 0.1).unwrap().n_steps(), 0);
        assert!(c.check_coupling(0.125));
        assert!(!c.check_coupling(0.0625));
        assert!(c.with_coupling(4.0).check_coupling(0.0625));
    }

    #[test]
    fn noise_does_not_decrease_the_functional() {
        let (fem, quiet) = setup(7, 0.05, 0.0, Functionals::default());
        let (_, noisy) = setup(7, 0.05, 0.65, Functionals::default());
        let config = LyapRunConfig::parabolic(1.0, 0.125, 1.0).unwrap();
        let x: Vec<f64> = (1..=7).map(|i| crate::fem::hat_initial(i as f64 / 8.0)).collect();
        let a = phi_lyap(&run_lyapunov(&fem, &quiet, &config).unwrap(), &fem, &x).unwrap();
        let b = phi_lyap(&run_lyapunov(&fem, &noisy, &config).unwrap(), &fem, &x).unwrap();
        assert!(b >= a, "{b} < {a}");
    }
}
