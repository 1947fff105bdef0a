//! Dense reference implementations used by the integration tests. Nothing
//! here calls into the library's assembly or solvers.
#![allow(dead_code)]

use nalgebra::DMatrix;
use rand::Rng;

const GL5_NODES: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683,
    0.0,
    0.538_469_310_105_683,
    0.906_179_845_938_664,
];
const GL5_WEIGHTS: [f64; 5] = [
    0.236_926_885_056_189,
    0.478_628_670_499_366,
    0.568_888_888_888_889,
    0.478_628_670_499_366,
    0.236_926_885_056_189,
];

pub fn hat(i: usize, h: f64, x: f64) -> f64 {
    let node = (i + 1) as f64 * h;
    (1.0 - (x - node).abs() / h).max(0.0)
}

pub fn hat_slope(i: usize, h: f64, x: f64) -> f64 {
    let node = (i + 1) as f64 * h;
    if x > node - h && x < node {
        1.0 / h
    } else if x > node && x < node + h {
        -1.0 / h
    } else {
        0.0
    }
}

/// Element-wise 5-point Gauss–Legendre over `(0, 1)` with `n + 1` elements.
pub fn integrate(n: usize, f: impl Fn(f64) -> f64) -> f64 {
    let h = 1.0 / (n + 1) as f64;
    let mut total = 0.0;
    for e in 0..=n {
        let mid = (e as f64 + 0.5) * h;
        for (t, w) in GL5_NODES.iter().zip(GL5_WEIGHTS) {
            total += 0.5 * h * w * f(mid + 0.5 * h * t);
        }
    }
    total
}

pub fn quartic(n: usize, i: usize, j: usize, k: usize, l: usize) -> f64 {
    let h = 1.0 / (n + 1) as f64;
    integrate(n, |x| hat(i, h, x) * hat(j, h, x) * hat(k, h, x) * hat(l, h, x))
}

pub fn mass(n: usize) -> DMatrix<f64> {
    let h = 1.0 / (n + 1) as f64;
    DMatrix::from_fn(n, n, |i, j| integrate(n, |x| hat(i, h, x) * hat(j, h, x)))
}

pub fn stiffness(n: usize, a_scale: f64) -> DMatrix<f64> {
    let h = 1.0 / (n + 1) as f64;
    DMatrix::from_fn(n, n, |i, j| a_scale * integrate(n, |x| hat_slope(i, h, x) * hat_slope(j, h, x)))
}

/// White-noise `E[ΔW_ab ΔW_cd] / τ` for every index quadruple.
pub struct WhiteCov {
    pub n: usize,
    values: Vec<f64>,
}

impl WhiteCov {
    pub fn new(n: usize, b_scale: f64) -> Self {
        let mut values = vec![0.0; n * n * n * n];
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for d in 0..n {
                        values[((a * n + b) * n + c) * n + d] = b_scale * b_scale * quartic(n, a, b, c, d);
                    }
                }
            }
        }
        Self { n, values }
    }

    pub fn get(&self, a: usize, b: usize, c: usize, d: usize) -> f64 {
        let n = self.n;
        self.values[((a * n + b) * n + c) * n + d]
    }

    /// `E[ΔW X ΔW] / τ`.
    pub fn sandwich(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        let n = self.n;
        DMatrix::from_fn(n, n, |i, j| {
            let mut acc = 0.0;
            for k in 0..n {
                for l in 0..n {
                    acc += self.get(i, k, l, j) * x[(k, l)];
                }
            }
            acc
        })
    }

    /// `E[ΔW ⊗ ΔW] / τ` on column-stacked vectors.
    pub fn kron(&self) -> DMatrix<f64> {
        let n = self.n;
        DMatrix::from_fn(n * n, n * n, |row, col| {
            let (i, j) = (row % n, row / n);
            let (k, l) = (col % n, col / n);
            self.get(j, l, i, k)
        })
    }
}

pub fn to_dmatrix(m: &lyapfun::linalg::DenseMatrix) -> DMatrix<f64> {
    DMatrix::from_fn(m.n(), m.n(), |i, j| m.get(i, j))
}

pub fn tri_to_dmatrix(m: &lyapfun::linalg::TriDiag) -> DMatrix<f64> {
    DMatrix::from_fn(m.n(), m.n(), |i, j| m.get(i, j))
}

pub fn from_dmatrix(m: &DMatrix<f64>) -> lyapfun::linalg::DenseMatrix {
    lyapfun::linalg::DenseMatrix::from_fn(m.nrows(), |i, j| m[(i, j)])
}

pub fn random_symmetric<R: Rng>(n: usize, rng: &mut R) -> DMatrix<f64> {
    let a = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    (&a + a.transpose()) * 0.5
}

pub fn random_psd<R: Rng>(n: usize, rank: usize, rng: &mut R) -> DMatrix<f64> {
    let a = DMatrix::from_fn(n, rank, |_, _| rng.random_range(-1.0..1.0));
    &a * a.transpose()
}

pub fn min_eig(m: &DMatrix<f64>) -> f64 {
    let sym = (m + m.transpose()) * 0.5;
    sym.symmetric_eigenvalues().min()
}

pub fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    let sym = (m + m.transpose()) * 0.5;
    sym.symmetric_eigenvalues().amax()
}

pub fn max_rel_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    let scale = a.amax().max(b.amax()).max(f64::MIN_POSITIVE);
    (a - b).amax() / scale
}
