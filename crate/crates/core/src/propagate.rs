//! The two-sided update `X ↦ (M + τA)⁻¹ (M X M + F(X)) (M + τA)⁻¹` shared by
//! the Lyapunov recursion and second-moment propagation.

use crate::error::Result;
use crate::fem::FemMatrices;
use crate::linalg::{factor_spd_tridiag, DenseMatrix, TriDiag, TriDiagFactor};

pub(crate) struct TwoSided {
    mass: TriDiag,
    factor: TriDiagFactor,
    work: DenseMatrix,
    spare: DenseMatrix,
}

impl TwoSided {
    pub(crate) fn new(fem: &FemMatrices, tau: f64) -> Result<Self> {
        let n = fem.n();
        Ok(Self {
            mass: fem.mass.clone(),
            factor: factor_spd_tridiag(&fem.implicit_operator(tau))?,
            work: DenseMatrix::zeros(n),
            spare: DenseMatrix::zeros(n),
        })
    }

    /// Replaces `x` by `S (M x M + F) S` where `forcing(x, z)` adds `F` to
    /// `z = M x M`. With `symmetric` the result is averaged with its
    /// transpose; without it the product is formed literally.
    pub(crate) fn apply(
        &mut self,
        x: &mut DenseMatrix,
        symmetric: bool,
        forcing: impl FnOnce(&DenseMatrix, &mut DenseMatrix) -> Result<()>,
    ) -> Result<()> {
        self.mass.right_mul_into(x, &mut self.spare);
        self.mass.left_mul_into(&self.spare, &mut self.work);
        forcing(x, &mut self.work)?;
        // work <- S Z, x <- (S Z)ᵀ = Zᵀ S, x <- S Zᵀ S
        self.factor.solve_columns(&mut self.work)?;
        self.work.transpose_into(x);
        self.factor.solve_columns(x)?;
        if symmetric {
            x.symmetrize();
        } else {
            // S Zᵀ S = (S Z S)ᵀ
            x.transpose_into(&mut self.spare);
            std::mem::swap(x, &mut self.spare);
        }
        Ok(())
    }
}
