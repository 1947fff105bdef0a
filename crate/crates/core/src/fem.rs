//! Piecewise linear finite elements on a uniform mesh of `(0, 1)` with zero
//! Dirichlet boundary values.
//!
//! Only interior nodes carry degrees of freedom. Interior node `i`
//! (0-based) sits at `x = (i + 1) h`.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::linalg::TriDiag;

#[derive(Clone, Debug, PartialEq)]
pub struct Mesh1D {
    n_interior: usize,
    h: f64,
}

pub fn build_mesh(n_interior: usize) -> Result<Mesh1D> {
    if n_interior == 0 {
        return Err(Error::InvalidArgument(
            "mesh needs at least one interior node".into(),
        ));
    }
    Ok(Mesh1D {
        n_interior,
        h: 1.0 / (n_interior + 1) as f64,
    })
}

impl Mesh1D {
    /// Mesh with width `h`; `1/h` must be an integer of at least 2.
    pub fn from_width(h: f64) -> Result<Mesh1D> {
        if !(h > 0.0 && h < 1.0) {
            return Err(Error::InvalidArgument(format!("mesh width {h} not in (0,1)")));
        }
        let cells = (1.0 / h).round();
        if ((cells * h) - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!(
                "mesh width {h} does not divide the unit interval"
            )));
        }
        build_mesh(cells as usize - 1)
    }

    #[inline]
    pub fn n_interior(&self) -> usize {
        self.n_interior
    }

    #[inline]
    pub fn h(&self) -> f64 {
        self.h
    }

    #[inline]
    pub fn node(&self, i: usize) -> f64 {
        (i + 1) as f64 * self.h
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n_interior).map(|i| self.node(i)).collect()
    }
}

/// Which of `0` or the identity a functional operator (`G` or `R`) is.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FunctionalKind {
    Zero,
    Identity,
}

impl std::str::FromStr for FunctionalKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "zero" | "0" => Ok(Self::Zero),
            "identity" | "id" => Ok(Self::Identity),
            other => Err(Error::Config(format!("unknown functional kind '{other}'"))),
        }
    }
}

impl std::fmt::Display for FunctionalKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Zero => "zero",
            Self::Identity => "identity",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Functionals {
    pub r: FunctionalKind,
    pub g: FunctionalKind,
}

impl Default for Functionals {
    fn default() -> Self {
        Self {
            r: FunctionalKind::Zero,
            g: FunctionalKind::Identity,
        }
    }
}

/// Galerkin matrices of the P1 space.
///
/// With `G, R ∈ {0, id}` the functional matrices are either zero or the
/// mass matrix, so every operator here is tridiagonal.
#[derive(Clone, Debug)]
pub struct FemMatrices {
    pub h: f64,
    pub mass: TriDiag,
    pub stiffness: TriDiag,
    pub g_mat: TriDiag,
    pub r_mat: TriDiag,
}

impl FemMatrices {
    pub fn n(&self) -> usize {
        self.mass.n()
    }

    /// `M + τ A`.
    pub fn implicit_operator(&self, tau: f64) -> TriDiag {
        self.mass
            .add_scaled(tau, &self.stiffness)
            .expect("mass and stiffness share a dimension")
    }
}

pub fn assemble(mesh: &Mesh1D, a_scale: f64, functionals: Functionals) -> Result<FemMatrices> {
    if a_scale <= 0.0 || !a_scale.is_finite() {
        return Err(Error::InvalidArgument(format!("a_scale must be positive, got {a_scale}")));
    }
    let n = mesh.n_interior();
    let h = mesh.h();
    let mass = TriDiag::toeplitz(n, 2.0 * h / 3.0, h / 6.0)?;
    let stiffness = TriDiag::toeplitz(n, a_scale * 2.0 / h, -a_scale / h)?;
    let pick = |kind| match kind {
        FunctionalKind::Zero => TriDiag::zeros(n),
        FunctionalKind::Identity => mass.clone(),
    };
    Ok(FemMatrices {
        h,
        g_mat: pick(functionals.g),
        r_mat: pick(functionals.r),
        mass,
        stiffness,
    })
}

/// `∫_0^h (1 - s/h)^a (s/h)^b ds = h a! b! / (a + b + 1)!`.
fn element_monomial(h: f64, a: u32, b: u32) -> f64 {
    let fact = |k: u32| (1..=k).map(f64::from).product::<f64>();
    h * fact(a) * fact(b) / fact(a + b + 1)
}

/// Nonzero integrals `∫ φ_i φ_j φ_k φ_l dx`, keyed by the sorted index
/// quadruple.
#[derive(Clone, Debug)]
pub struct QuarticTable {
    n: usize,
    values: BTreeMap<[usize; 4], f64>,
}

impl QuarticTable {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn contains(&self, i: usize, j: usize, k: usize, l: usize) -> bool {
        self.values.contains_key(&sorted([i, j, k, l]))
    }

    /// Integral for any index order; zero when the supports are disjoint.
    pub fn get(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        self.values.get(&sorted([i, j, k, l])).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[usize; 4], &f64)> {
        self.values.iter()
    }
}

fn sorted(mut key: [usize; 4]) -> [usize; 4] {
    key.sort_unstable();
    key
}

pub fn quartic_overlaps(mesh: &Mesh1D) -> QuarticTable {
    let n = mesh.n_interior();
    let h = mesh.h();
    let mut values = BTreeMap::new();
    // element e spans nodes e-1 (left) and e (right) in interior numbering
    for e in 0..=n {
        let left = e.checked_sub(1);
        let right = (e < n).then_some(e);
        for right_power in 0..=4u32 {
            let left_power = 4 - right_power;
            if (left_power > 0 && left.is_none()) || (right_power > 0 && right.is_none()) {
                continue;
            }
            let mut key = [0usize; 4];
            for (slot, k) in key.iter_mut().enumerate() {
                *k = if (slot as u32) < left_power {
                    left.unwrap_or_default()
                } else {
                    right.unwrap_or_default()
                };
            }
            *values.entry(sorted(key)).or_insert(0.0) += element_monomial(h, left_power, right_power);
        }
    }
    QuarticTable { n, values }
}

/// Nodal interpolation onto the interior nodes.
pub fn interpolate(mesh: &Mesh1D, f: impl Fn(f64) -> f64) -> Result<Vec<f64>> {
    mesh.nodes()
        .into_iter()
        .map(|x| {
            let v = f(x);
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::InvalidInput(format!("non-finite value {v} at node {x}")))
            }
        })
        .collect()
}

/// Hat-shaped initial datum `x` on `(0, 1/2)` and `1 - x` on `[1/2, 1)`.
pub fn hat_initial(x: f64) -> f64 {
    if x < 0.5 {
        x
    } else {
        1.0 - x
    }
}
