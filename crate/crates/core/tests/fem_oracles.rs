mod common;

use lyapfun::fem::{assemble, build_mesh, quartic_overlaps, FunctionalKind, Functionals};

#[test]
fn mass_row_sums() {
    for n in [1, 2, 3, 7, 20] {
        let mesh = build_mesh(n).unwrap();
        let h = mesh.h();
        let fem = assemble(&mesh, 1.0, Functionals::default()).unwrap();
        let ones = vec![1.0; n];
        let sums = fem.mass.mul_vec(&ones).unwrap();
        for (i, s) in sums.iter().enumerate() {
            let expected = if n == 1 {
                2.0 * h / 3.0
            } else if i == 0 || i == n - 1 {
                2.0 * h / 3.0 + h / 6.0
            } else {
                h
            };
            assert!((s - expected).abs() <= 1e-15, "n={n} row {i}: {s} vs {expected}");
            let quadrature = common::integrate(n, |x| common::hat(i, h, x) * (0..n).map(|j| common::hat(j, h, x)).sum::<f64>());
            assert!((s - quadrature).abs() <= 1e-14);
        }
    }
}

#[test]
fn galerkin_matrices_match_quadrature() {
    for n in 1..=8 {
        let mesh = build_mesh(n).unwrap();
        let fem = assemble(&mesh, 0.3, Functionals::default()).unwrap();
        let (m, a) = (common::mass(n), common::stiffness(n, 0.3));
        for i in 0..n {
            for j in 0..n {
                assert!((fem.mass.get(i, j) - m[(i, j)]).abs() <= 1e-12 * m.amax());
                assert!((fem.stiffness.get(i, j) - a[(i, j)]).abs() <= 1e-12 * a.amax());
            }
        }
        assert!(common::min_eig(&m) > 0.0);
        assert!(common::min_eig(&a) > 0.0);
    }
}

#[test]
fn functional_matrices() {
    let mesh = build_mesh(4).unwrap();
    let both = Functionals {
        r: FunctionalKind::Identity,
        g: FunctionalKind::Zero,
    };
    let fem = assemble(&mesh, 1.0, both).unwrap();
    assert_eq!(fem.r_mat, fem.mass);
    assert!(fem.g_mat.is_zero());
}

#[test]
fn quartic_table_matches_quadrature() {
    for n in 1..=8 {
        let mesh = build_mesh(n).unwrap();
        let table = quartic_overlaps(&mesh);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let expected = common::quartic(n, i, j, k, l);
                        let got = table.get(i, j, k, l);
                        assert!((got - expected).abs() <= 1e-14, "({i},{j},{k},{l}) n={n}: {got} vs {expected}");
                    }
                }
            }
        }
    }
}

fn permutations(idx: [usize; 4]) -> Vec<[usize; 4]> {
    let mut out = Vec::with_capacity(24);
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                for d in 0..4 {
                    let p = [a, b, c, d];
                    let mut seen = [false; 4];
                    p.iter().for_each(|&x| seen[x] = true);
                    if seen.iter().all(|&s| s) {
                        out.push([idx[a], idx[b], idx[c], idx[d]]);
                    }
                }
            }
        }
    }
    out
}

#[test]
fn quartic_table_permutation_symmetry() {
    for n in 1..=8 {
        let table = quartic_overlaps(&build_mesh(n).unwrap());
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let perms = permutations([i, j, k, l]);
                        assert_eq!(perms.len(), 24);
                        let base = table.get(i, j, k, l);
                        for [a, b, c, d] in perms {
                            assert_eq!(table.get(a, b, c, d), base);
                        }
                    }
                }
            }
        }
    }
}
