use lyapfun::covariance::phi_cov;
use lyapfun::fem::{assemble, build_mesh, hat_initial, interpolate, quartic_overlaps, FunctionalKind, Functionals};
use lyapfun::lyapunov::{phi_lyap, run_lyapunov, LyapRunConfig};
use lyapfun::montecarlo::{phi_mc, run_path, sample_stream};
use lyapfun::noise::{build_dw_covariance, NoiseModel};

#[test]
fn estimator_is_unbiased_against_the_moment_recursion() {
    let mesh = build_mesh(7).unwrap();
    let functionals = Functionals {
        r: FunctionalKind::Identity,
        g: FunctionalKind::Identity,
    };
    let fem = assemble(&mesh, 0.05, functionals).unwrap();
    let cov = build_dw_covariance(&mesh, &quartic_overlaps(&mesh), &NoiseModel::white(0.65).unwrap()).unwrap();
    let config = LyapRunConfig::parabolic(1.0, mesh.h(), 1.0).unwrap();
    let x0 = interpolate(&mesh, hat_initial).unwrap();
    let exact = phi_cov(&x0, &config, &fem, &cov).unwrap();
    for seed in 0..5 {
        let est = phi_mc(&x0, &config, &fem, &cov, 4000, seed).unwrap();
        let z = (est.mean - exact).abs() / est.std_error;
        assert!(z <= 4.0, "seed {seed}: z = {z}");
        assert!(est.mean >= 0.0 && est.std_error > 0.0);
    }
}

#[test]
fn seeds_are_deterministic() {
    let mesh = build_mesh(5).unwrap();
    let fem = assemble(&mesh, 0.05, Functionals::default()).unwrap();
    let cov = build_dw_covariance(&mesh, &quartic_overlaps(&mesh), &NoiseModel::white(0.65).unwrap()).unwrap();
    let config = LyapRunConfig::parabolic(0.5, mesh.h(), 1.0).unwrap();
    let x0 = interpolate(&mesh, hat_initial).unwrap();
    let a = phi_mc(&x0, &config, &fem, &cov, 200, 77).unwrap();
    let b = phi_mc(&x0, &config, &fem, &cov, 200, 77).unwrap();
    assert_eq!(a, b);
    let c = phi_mc(&x0, &config, &fem, &cov, 200, 78).unwrap();
    assert_ne!(a.mean, c.mean);
}

#[test]
fn noiseless_paths_share_the_deterministic_value() {
    let mesh = build_mesh(9).unwrap();
    let fem = assemble(&mesh, 0.05, Functionals::default()).unwrap();
    let cov = build_dw_covariance(&mesh, &quartic_overlaps(&mesh), &NoiseModel::white(0.0).unwrap()).unwrap();
    let config = LyapRunConfig::parabolic(1.0, mesh.h(), 1.0).unwrap();
    let x0 = interpolate(&mesh, hat_initial).unwrap();
    let (x, _) = run_path(&x0, &config, &fem, &cov, &mut sample_stream(5, 0), false).unwrap();
    let path_value = fem.mass.quad_form(&x).unwrap();
    let lyap = phi_lyap(&run_lyapunov(&fem, &cov, &config).unwrap(), &fem, &x0).unwrap();
    assert!((path_value - lyap).abs() <= 1e-12 * lyap);
    assert!((phi_cov(&x0, &config, &fem, &cov).unwrap() - lyap).abs() <= 1e-12 * lyap);
}

#[test]
fn too_few_samples_is_an_error() {
    let mesh = build_mesh(3).unwrap();
    let fem = assemble(&mesh, 0.05, Functionals::default()).unwrap();
    let cov = build_dw_covariance(&mesh, &quartic_overlaps(&mesh), &NoiseModel::white(0.65).unwrap()).unwrap();
    let config = LyapRunConfig::new(0.1, 0.01).unwrap();
    assert!(phi_mc(&[0.1; 3], &config, &fem, &cov, 0, 1).is_err());
    assert!(phi_mc(&[0.1; 3], &config, &fem, &cov, 1, 1).is_err());
}
