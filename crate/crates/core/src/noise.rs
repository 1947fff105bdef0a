//! Discrete multiplicative noise for a pointwise multiplication operator
//! `(B(u)v)(x) = b · u(x) v(x)`.
//!
//! The random matrix `ΔW` has entries `⟨ΔW, φ_i φ_j⟩`, which vanish unless
//! `|i - j| <= 1`, so it is symmetric tridiagonal. Its entries are indexed
//! by unordered node pairs: pair `(i, i)` has index `2i`, pair `(i, i+1)`
//! has index `2i + 1`. [`DWCovariance`] stores the covariance of those
//! `2N_h - 1` entries per unit time and the factor used to sample them.

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::fem::{Mesh1D, QuarticTable};
use crate::linalg::{spd_factor_dense, DenseMatrix, PsdFactor, TriDiag};

type KernelFn = dyn Fn(f64, f64) -> f64 + Send + Sync;

/// Continuous symmetric positive semidefinite covariance kernel `q(x, y)`.
#[derive(Clone)]
pub struct CovKernel {
    label: String,
    f: Arc<KernelFn>,
}

impl CovKernel {
    pub fn new(label: impl Into<String>, f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            label: label.into(),
            f: Arc::new(f),
        }
    }

    /// `exp(-|x - y|² / (2 ℓ²))`.
    pub fn gaussian(length: f64) -> Self {
        let two_l2 = 2.0 * length * length;
        Self::new(format!("gaussian:{length}"), move |x, y| (-(x - y).powi(2) / two_l2).exp())
    }

    #[inline]
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        (self.f)(x, y)
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

impl fmt::Debug for CovKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("CovKernel").field(&self.label).finish()
    }
}

#[derive(Clone, Debug)]
pub enum NoiseVariant {
    /// Space-time white noise (`U = H`).
    White,
    /// Q-Wiener noise with covariance kernel `q`.
    Kernel(CovKernel),
}

#[derive(Clone, Debug)]
pub struct NoiseModel {
    variant: NoiseVariant,
    b_scale: f64,
}

impl NoiseModel {
    pub fn white(b_scale: f64) -> Result<Self> {
        check_scale(b_scale)?;
        Ok(Self {
            variant: NoiseVariant::White,
            b_scale,
        })
    }

    pub fn kernel(kernel: CovKernel, b_scale: f64) -> Result<Self> {
        check_scale(b_scale)?;
        let grid: Vec<f64> = (0..=16).map(|i| i as f64 / 16.0).collect();
        for &x in &grid {
            for &y in &grid {
                let (a, b) = (kernel.eval(x, y), kernel.eval(y, x));
                if !a.is_finite() || (a - b).abs() > 1e-12 * a.abs().max(1.0) {
                    return Err(Error::InvalidArgument(format!(
                        "kernel '{}' is not symmetric at ({x}, {y})",
                        kernel.label()
                    )));
                }
            }
        }
        Ok(Self {
            variant: NoiseVariant::Kernel(kernel),
            b_scale,
        })
    }

    pub fn variant(&self) -> &NoiseVariant {
        &self.variant
    }

    pub fn b_scale(&self) -> f64 {
        self.b_scale
    }
}

fn check_scale(b_scale: f64) -> Result<()> {
    if b_scale >= 0.0 && b_scale.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("b_scale must be nonnegative, got {b_scale}")))
    }
}

/// Index of the unordered pair `{i, j}`, if the two nodes are equal or
/// adjacent.
#[inline]
pub fn pair_index(i: usize, j: usize) -> Option<usize> {
    match i.abs_diff(j) {
        0 => Some(2 * i),
        1 => Some(2 * i.min(j) + 1),
        _ => None,
    }
}

/// Nodes of the pair with the given index.
#[inline]
pub fn pair_nodes(p: usize) -> (usize, usize) {
    (p / 2, p / 2 + p % 2)
}

#[inline]
fn neighbours(i: usize, n: usize) -> std::ops::RangeInclusive<usize> {
    i.saturating_sub(1)..=(i + 1).min(n - 1)
}

/// Covariance per unit time of the stored entries of `ΔW`.
#[derive(Clone, Debug)]
pub struct DWCovariance {
    n: usize,
    banded: bool,
    cov: DenseMatrix,
    factor: PsdFactor,
}

pub fn build_dw_covariance(mesh: &Mesh1D, quartic: &QuarticTable, model: &NoiseModel) -> Result<DWCovariance> {
    let n = mesh.n_interior();
    if quartic.n() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: quartic.n(),
        });
    }
    let pairs = 2 * n - 1;
    let b2 = model.b_scale * model.b_scale;
    let (cov, banded) = match &model.variant {
        NoiseVariant::White => {
            let mut cov = DenseMatrix::zeros(pairs);
            for p in 0..pairs {
                let (i, j) = pair_nodes(p);
                for q in p.saturating_sub(2)..(p + 3).min(pairs) {
                    let (k, l) = pair_nodes(q);
                    cov.set(p, q, b2 * quartic.get(i, j, k, l));
                }
            }
            (cov, true)
        }
        NoiseVariant::Kernel(kernel) => {
            let mut cov = kernel_covariance(mesh, kernel)?;
            cov.scale(b2);
            (cov, false)
        }
    };
    let factor = spd_factor_dense(&cov)?;
    Ok(DWCovariance { n, banded, cov, factor })
}

/// 4-point Gauss–Legendre rule on `[-1, 1]`.
const GAUSS4: [(f64, f64); 4] = [
    (-0.861_136_311_594_052_6, 0.347_854_845_137_453_9),
    (-0.339_981_043_584_856_3, 0.652_145_154_862_546_1),
    (0.339_981_043_584_856_3, 0.652_145_154_862_546_1),
    (0.861_136_311_594_052_6, 0.347_854_845_137_453_9),
];

const KERNEL_QUAD_TOL: f64 = 1e-10;
const KERNEL_QUAD_MAX_SPLITS: usize = 64;

/// Composite tensor Gauss rule: every element split into `splits` pieces,
/// 4 points per piece. Each pair gets its sparse list of
/// `(point, weight · φ_a φ_b)`.
struct PairQuadrature {
    points: Vec<f64>,
    pair_weights: Vec<Vec<(usize, f64)>>,
}

fn pair_quadrature(mesh: &Mesh1D, splits: usize) -> PairQuadrature {
    let n = mesh.n_interior();
    let h = mesh.h();
    let per_element = 4 * splits;
    let mut points = Vec::with_capacity((n + 1) * per_element);
    let mut local = Vec::with_capacity(per_element); // (t in (0,1), weight)
    for s in 0..splits {
        for &(xi, w) in &GAUSS4 {
            let t = (s as f64 + 0.5 * (xi + 1.0)) / splits as f64;
            local.push((t, 0.5 * w * h / splits as f64));
        }
    }
    for e in 0..=n {
        for &(t, _) in &local {
            points.push((e as f64 + t) * h);
        }
    }
    // value of φ_a on element e at local coordinate t
    let hat = |a: usize, e: usize, t: f64| if a + 1 == e { 1.0 - t } else { t };
    let pair_weights = (0..2 * n - 1)
        .map(|p| {
            let (a, b) = pair_nodes(p);
            let elements: Vec<usize> = if a == b { vec![a, a + 1] } else { vec![b] };
            let mut out = Vec::with_capacity(elements.len() * per_element);
            for e in elements {
                for (s, &(t, w)) in local.iter().enumerate() {
                    out.push((e * per_element + s, w * hat(a, e, t) * hat(b, e, t)));
                }
            }
            out
        })
        .collect();
    PairQuadrature { points, pair_weights }
}

fn kernel_entry(quad: &PairQuadrature, kernel_values: &[f64], n_points: usize, p: usize, q: usize) -> f64 {
    let mut acc = 0.0;
    for &(a, wa) in &quad.pair_weights[p] {
        let row = &kernel_values[a * n_points..(a + 1) * n_points];
        for &(b, wb) in &quad.pair_weights[q] {
            acc += wa * wb * row[b];
        }
    }
    acc
}

fn kernel_table(quad: &PairQuadrature, kernel: &CovKernel) -> Vec<f64> {
    let pts = &quad.points;
    let mut values = Vec::with_capacity(pts.len() * pts.len());
    for &x in pts {
        for &y in pts {
            values.push(kernel.eval(x, y));
        }
    }
    values
}

/// `∬ q(x, y) φ_a φ_b(y) φ_c φ_d(x) dx dy` for all stored pairs, refining
/// the composite rule until the diagonal settles.
fn kernel_covariance(mesh: &Mesh1D, kernel: &CovKernel) -> Result<DenseMatrix> {
    let pairs = 2 * mesh.n_interior() - 1;
    let diagonal = |splits: usize| -> (PairQuadrature, Vec<f64>, Vec<f64>) {
        let quad = pair_quadrature(mesh, splits);
        let table = kernel_table(&quad, kernel);
        let np = quad.points.len();
        let diag = (0..pairs).map(|p| kernel_entry(&quad, &table, np, p, p)).collect();
        (quad, table, diag)
    };
    let mut splits = 1;
    let (_, _, mut coarse) = diagonal(splits);
    loop {
        let (quad, table, fine) = diagonal(2 * splits);
        let scale = fine.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let estimate = coarse
            .iter()
            .zip(&fine)
            .fold(0.0_f64, |m, (c, f)| m.max((c - f).abs()))
            / scale.max(f64::MIN_POSITIVE);
        if estimate <= KERNEL_QUAD_TOL {
            let np = quad.points.len();
            let mut cov = DenseMatrix::zeros(pairs);
            for p in 0..pairs {
                for q in p..pairs {
                    let v = kernel_entry(&quad, &table, np, p, q);
                    cov.set(p, q, v);
                    cov.set(q, p, v);
                }
            }
            return Ok(cov);
        }
        splits *= 2;
        if splits >= KERNEL_QUAD_MAX_SPLITS {
            return Err(Error::Accuracy { estimate });
        }
        coarse = fine;
    }
}

impl DWCovariance {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn n_pairs(&self) -> usize {
        self.cov.n()
    }

    /// Covariance matrix over pair indices.
    pub fn matrix(&self) -> &DenseMatrix {
        &self.cov
    }

    pub fn factor(&self) -> &PsdFactor {
        &self.factor
    }

    /// `E[ΔW_ij ΔW_kl] / τ`; zero unless both pairs are adjacent or equal.
    pub fn entry(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        match (pair_index(i, j), pair_index(k, l)) {
            (Some(p), Some(q)) => self.cov.get(p, q),
            _ => 0.0,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.cov.max_abs() == 0.0
    }

    /// Draws one increment `ΔW` over a step of length `tau`.
    pub fn sample_dw<R: Rng + ?Sized>(&self, tau: f64, rng: &mut R) -> TriDiag {
        let pairs = self.n_pairs();
        let xi: Vec<f64> = (0..pairs).map(|_| rng.sample(StandardNormal)).collect();
        let mut entries = vec![0.0; pairs];
        self.factor.mul_into(&xi, tau.max(0.0).sqrt(), &mut entries);
        let diag = entries.iter().step_by(2).copied().collect();
        let off = entries.iter().skip(1).step_by(2).copied().collect();
        TriDiag::new(diag, off).expect("pair layout yields a valid tridiagonal matrix")
    }

    /// `B_h(L)` with `(B_h(L))_ij = Σ_kl L_kl E[ΔW_il ΔW_jk] / τ`.
    pub fn apply_bh(&self, l: &DenseMatrix) -> Result<DenseMatrix> {
        let mut out = DenseMatrix::zeros(self.n);
        self.accumulate_bh(l, 1.0, &mut out)?;
        Ok(out)
    }

    /// `out += scale · B_h(L)`. `L` need not be symmetric.
    pub fn accumulate_bh(&self, l: &DenseMatrix, scale: f64, out: &mut DenseMatrix) -> Result<()> {
        let n = self.n;
        for m in [l, &*out] {
            if m.n() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: m.n(),
                });
            }
        }
        if scale == 0.0 {
            return Ok(());
        }
        for i in 0..n {
            let columns = if self.banded { neighbours(i, n) } else { 0..=n - 1 };
            for li in neighbours(i, n) {
                let cov_row = self.cov.row(pair_index(i, li).expect("adjacent"));
                for j in columns.clone() {
                    let mut acc = 0.0;
                    for k in neighbours(j, n) {
                        acc += l.get(k, li) * cov_row[pair_index(j, k).expect("adjacent")];
                    }
                    out.add_at(i, j, scale * acc);
                }
            }
        }
        Ok(())
    }

    /// `B^{⊗2} v = τ vec(B_h(unvec v)ᵀ)`, without forming the `N² × N²`
    /// operator.
    pub fn apply_b_tensor(&self, v: &[f64], tau: f64) -> Result<Vec<f64>> {
        let a = DenseMatrix::from_vec(v)?;
        let mut b = self.apply_bh(&a)?;
        b.scale(tau);
        Ok(b.transpose().vec())
    }
}
