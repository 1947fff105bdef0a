use lyapfun::experiment::{reference_phi, run_convergence, write_convergence_csv, ExperimentConfig, Method};

fn small_config() -> ExperimentConfig {
    ExperimentConfig {
        h_ladder: (1..=4).map(|k| 2f64.powi(-k)).collect(),
        reference_h: 2f64.powi(-6),
        ..ExperimentConfig::default()
    }
}

fn without_seconds(csv: &str) -> String {
    csv.lines()
        .map(|line| line.rsplit_once(',').map_or(line, |(head, _)| head))
        .collect::<Vec<_>>()
        .join("\n")
}

#[test]
fn convergence_csv_is_deterministic() {
    let config = ExperimentConfig {
        mc_samples: 50,
        ..small_config()
    };
    let mut texts = Vec::new();
    for _ in 0..2 {
        let mut buf = Vec::new();
        write_convergence_csv(&run_convergence(&config).unwrap().rows, &mut buf).unwrap();
        texts.push(without_seconds(&String::from_utf8(buf).unwrap()));
    }
    assert_eq!(texts[0], texts[1]);
    assert!(texts[0].starts_with("h,tau,n_h,n_tau,method,phi,error"));
}

#[test]
fn convergence_rows_are_consistent() {
    let report = run_convergence(&small_config()).unwrap();
    assert_eq!(report.reference_phi.to_bits(), reference_phi(&small_config()).unwrap().to_bits());
    assert_eq!(report.rows.len(), 8);
    for row in &report.rows {
        assert!(row.error >= 0.0 && row.seconds > 0.0);
        assert_eq!(row.tau, row.h * row.h);
        assert_eq!(row.n_h + 1, (1.0 / row.h).round() as usize);
    }
    for method in [Method::Lyap, Method::Cov] {
        let slope = report.slope(method).unwrap();
        assert!(slope > 0.5, "{method}: {slope}");
    }
    let lyap: Vec<_> = report.rows_for(Method::Lyap).collect();
    let cov: Vec<_> = report.rows_for(Method::Cov).collect();
    for (l, c) in lyap.iter().zip(&cov) {
        let ratio = l.error / c.error;
        assert!((0.25..=4.0).contains(&ratio), "h={}: ratio {ratio}", l.h);
    }
}

#[test]
fn reference_must_be_finer_than_the_ladder() {
    let config = ExperimentConfig {
        reference_h: 0.25,
        ..small_config()
    };
    assert!(run_convergence(&config).is_err());
}
