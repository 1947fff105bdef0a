use lyapfun::semigroup::{f_n, log_spaced_steps, verify_bound, LambdaGrid};

#[test]
fn f_n_matches_extended_precision() {
    let mut reader = csv::Reader::from_path(concat!(env!("CARGO_MANIFEST_DIR"), "/tests/data/fn_oracle.csv")).unwrap();
    let mut checked = 0;
    for record in reader.records() {
        let record = record.unwrap();
        let lambda: f64 = record[0].parse().unwrap();
        let n: u32 = record[1].parse().unwrap();
        let expected: f64 = record[2].parse().unwrap();
        if expected.abs() <= 1e-300 {
            continue;
        }
        let got = f_n(lambda, n);
        let rel = ((got - expected) / expected).abs();
        assert!(rel <= 1e-12, "lambda={lambda:e} n={n}: {got:e} vs {expected:e} (rel {rel:e})");
        checked += 1;
    }
    assert_eq!(checked, 1000);
}

#[test]
fn normalized_sup_has_no_late_growth() {
    let steps = log_spaced_steps(10_000, 40);
    for (r, rho) in [(0.0, 0.0), (0.5, 1.0), (1.0, 2.0), (1.0, 0.0), (0.0, 2.0)] {
        let report = verify_bound(r, rho, &steps, &LambdaGrid::default()).unwrap();
        assert!(report.sup_values.iter().all(|v| v.is_finite() && *v >= 0.0));
        let early = report.max_up_to(100);
        let all = report.max_up_to(10_000);
        assert!(all <= 1.1 * early, "(r, rho) = ({r}, {rho}): {all} vs {early}");
    }
}

#[test]
fn sup_value_for_one_step_matches_direct_maximization() {
    // n = 1, r = ρ = 0: maximize 1/(1+λ) - e^{-λ} by bisection on the derivative
    let derivative = |l: f64| -1.0 / (1.0 + l).powi(2) + (-l).exp();
    let (mut lo, mut hi) = (0.1, 10.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if derivative(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let expected = 1.0 / (1.0 + lo) - (-lo).exp();
    let report = verify_bound(0.0, 0.0, &[1], &LambdaGrid::default()).unwrap();
    assert!((report.sup_values[0] - expected).abs() <= 1e-12);
}
