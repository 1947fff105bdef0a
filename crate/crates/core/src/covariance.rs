//! Exact second-moment propagation for the semi-implicit Euler–Maruyama
//! scheme.
//!
//! With `C^n = E[x^n (x^n)ᵀ]` the coefficient second moment, one step of
//! the tensorized scheme is
//!
//! ```text
//! C^n = S (M C^{n-1} M + τ B_h(C^{n-1})ᵀ) S,     S = (M + τA)⁻¹,
//! ```
//!
//! which is `F^⊗ vec(C^{n-1})` evaluated through the identity
//! `B^{⊗2} vec(C) = τ vec(B_h(C)ᵀ)`. The functional follows as
//! `⟨vec G, vec C^N⟩ + τ Σ_{n<N} ⟨vec R, vec C^n⟩`.

use crate::error::{Error, Result};
use crate::fem::FemMatrices;
use crate::linalg::DenseMatrix;
use crate::lyapunov::LyapRunConfig;
use crate::noise::DWCovariance;
use crate::propagate::TwoSided;

#[derive(Clone, Debug, PartialEq)]
pub struct MomentState {
    pub step: usize,
    pub moment: DenseMatrix,
}

impl MomentState {
    /// Deterministic start `x₀ x₀ᵀ`.
    pub fn from_initial(x0: &[f64]) -> Self {
        Self {
            step: 0,
            moment: DenseMatrix::outer(x0),
        }
    }

    /// Column-stacked second moment.
    pub fn vec(&self) -> Vec<f64> {
        self.moment.vec()
    }
}

pub struct CovariancePropagator<'a> {
    fem: &'a FemMatrices,
    cov: &'a DWCovariance,
    tau: f64,
    two_sided: TwoSided,
}

impl<'a> CovariancePropagator<'a> {
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

    fn check(&self, m: &DenseMatrix) -> Result<()> {
        if m.n() == self.fem.n() {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: self.fem.n(),
                found: m.n(),
            })
        }
    }

    /// Advances a symmetric moment by one step and re-symmetrizes.
    pub fn step(&mut self, state: &mut MomentState) -> Result<()> {
        self.check(&state.moment)?;
        let (tau, cov) = (self.tau, self.cov);
        // symmetric C makes B_h(C) symmetric, so the transpose drops out
        self.two_sided
            .apply(&mut state.moment, true, |prev, z| cov.accumulate_bh(prev, tau, z))?;
        state.step += 1;
        Ok(())
    }

    /// `F^⊗ v` for an arbitrary (not necessarily symmetric) `unvec(v)`.
    pub fn apply_f_tensor(&mut self, v: &[f64]) -> Result<Vec<f64>> {
        let mut c = DenseMatrix::from_vec(v)?;
        self.check(&c)?;
        let (tau, cov) = (self.tau, self.cov);
        self.two_sided.apply(&mut c, false, |prev, z| {
            let mut b = cov.apply_bh(prev)?;
            b.scale(tau);
            z.add_scaled(1.0, &b.transpose());
            Ok(())
        })?;
        Ok(c.vec())
    }
}

/// One step of the second-moment recursion.
pub fn cov_step(state: &MomentState, fem: &FemMatrices, cov: &DWCovariance, tau: f64) -> Result<MomentState> {
    let mut next = state.clone();
    CovariancePropagator::new(fem, cov, tau)?.step(&mut next)?;
    Ok(next)
}

/// Runs the moment recursion from `x₀ x₀ᵀ` and accumulates the functional.
/// `observe` sees every moment `C^0..=C^N`.
pub fn phi_cov_with(
    x0: &[f64],
    config: &LyapRunConfig,
    fem: &FemMatrices,
    cov: &DWCovariance,
    observe: impl FnMut(&MomentState),
) -> Result<f64> {
    if x0.len() != fem.n() {
        return Err(Error::DimensionMismatch {
            expected: fem.n(),
            found: x0.len(),
        });
    }
    phi_from_moment(MomentState::from_initial(x0), config, fem, cov, observe)
}

pub fn phi_cov(x0: &[f64], config: &LyapRunConfig, fem: &FemMatrices, cov: &DWCovariance) -> Result<f64> {
    phi_cov_with(x0, config, fem, cov, |_| {})
}

fn phi_from_moment(
    mut state: MomentState,
    config: &LyapRunConfig,
    fem: &FemMatrices,
    cov: &DWCovariance,
    mut observe: impl FnMut(&MomentState),
) -> Result<f64> {
    config.check_coupling(fem.h);
    let tau = config.tau();
    let running = !fem.r_mat.is_zero();
    let mut propagator = CovariancePropagator::new(fem, cov, tau)?;
    let mut sum = 0.0;
    observe(&state);
    for _ in 0..config.n_steps() {
        if running {
            sum += tau * fem.r_mat.frobenius_inner(&state.moment);
        }
        propagator.step(&mut state)?;
        observe(&state);
    }
    Ok(sum + fem.g_mat.frobenius_inner(&state.moment))
}

/// The whole quadratic form `x ↦ Φ_{h,τ}(x)` as a symmetric matrix `Q` with
/// `Φ(x) = xᵀ Q x`, by propagating every symmetrized unit tensor
/// `(e_i e_jᵀ + e_j e_iᵀ)/2`. Costs `N(N+1)/2` moment runs.
pub fn phi_cov_matrix(config: &LyapRunConfig, fem: &FemMatrices, cov: &DWCovariance) -> Result<DenseMatrix> {
    let n = fem.n();
    let mut q = DenseMatrix::zeros(n);
    for i in 0..n {
        for j in i..n {
            let mut start = DenseMatrix::zeros(n);
            start.add_at(i, j, 0.5);
            start.add_at(j, i, 0.5);
            let state = MomentState { step: 0, moment: start };
            let value = phi_from_moment(state, config, fem, cov, |_| {})?;
            q.set(i, j, value);
            q.set(j, i, value);
        }
    }
    Ok(q)
}
