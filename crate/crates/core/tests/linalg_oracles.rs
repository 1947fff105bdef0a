mod common;

use lyapfun::linalg::{dense_solve, factor_spd_tridiag, spd_factor_dense, DenseMatrix, TriDiag};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_spd_tridiag(n: usize, rng: &mut ChaCha8Rng) -> TriDiag {
    let off: Vec<f64> = (0..n.saturating_sub(1)).map(|_| rng.random_range(-1.0..1.0)).collect();
    let diag: Vec<f64> = (0..n).map(|_| 2.0 + rng.random_range(0.0..3.0)).collect();
    TriDiag::new(diag, off).unwrap()
}

#[test]
fn tridiagonal_solve_residual() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..50 {
        let n = rng.random_range(1..=200);
        let m = random_spd_tridiag(n, &mut rng);
        let rhs: Vec<f64> = (0..n).map(|_| rng.random_range(-10.0..10.0)).collect();
        let x = factor_spd_tridiag(&m).unwrap().solve(&rhs).unwrap();
        let r = m.mul_vec(&x).unwrap();
        let rhs_norm = rhs.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let res = r.iter().zip(&rhs).fold(0.0f64, |a, (p, q)| a.max((p - q).abs()));
        assert!(res <= 1e-10 * rhs_norm);
    }
}

#[test]
fn tridiagonal_solve_matches_nalgebra_lu() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for n in 1..=64 {
        let m = random_spd_tridiag(n, &mut rng);
        let rhs: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let x = factor_spd_tridiag(&m).unwrap().solve(&rhs).unwrap();
        let oracle = common::tri_to_dmatrix(&m).lu().solve(&DVector::from_vec(rhs)).unwrap();
        let scale = oracle.amax();
        for i in 0..n {
            assert!((x[i] - oracle[i]).abs() <= 1e-10 * scale);
        }
    }
}

#[test]
fn dense_solve_agrees_with_tridiagonal_solve() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let m = random_spd_tridiag(9, &mut rng);
    let rhs: Vec<f64> = (0..9).map(|i| i as f64 - 4.0).collect();
    let a = dense_solve(&m.to_dense(), &rhs).unwrap();
    let b = factor_spd_tridiag(&m).unwrap().solve(&rhs).unwrap();
    for (p, q) in a.iter().zip(&b) {
        assert!((p - q).abs() <= 1e-12);
    }
}

#[test]
fn psd_factor_reconstructs_low_rank_input() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for _ in 0..20 {
        let n = rng.random_range(2..=12);
        let rank = rng.random_range(1..=n);
        let c = common::random_psd(n, rank, &mut rng);
        let factor = spd_factor_dense(&common::from_dmatrix(&c)).unwrap();
        let l = common::to_dmatrix(&factor.to_dense());
        let back: DMatrix<f64> = &l * l.transpose();
        assert!(common::max_rel_diff(&back, &c) <= 1e-9);
    }
}

#[test]
fn symmetrize_bounds_asymmetry() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    let mut m = DenseMatrix::from_fn(10, |_, _| rng.random_range(-1.0..1.0));
    m.symmetrize();
    assert!(m.asymmetry() <= 1e-12 * m.max_abs());
}
