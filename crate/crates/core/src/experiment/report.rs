//! CSV output. Reals are written with 17 significant digits.

use std::io::Write;

use crate::error::Result;
use crate::experiment::{ConvergenceRow, TimingRow};
use crate::montecarlo::McEstimate;
use crate::semigroup::RationalBoundReport;

pub const CONVERGENCE_HEADER: [&str; 8] = ["h", "tau", "n_h", "n_tau", "method", "phi", "error", "seconds"];

fn real(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_convergence_csv<W: Write>(rows: &[ConvergenceRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CONVERGENCE_HEADER)?;
    for r in rows {
        w.write_record([
            real(r.h),
            real(r.tau),
            r.n_h.to_string(),
            r.n_tau.to_string(),
            r.method.to_string(),
            real(r.phi),
            real(r.error),
            real(r.seconds),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_timing_csv<W: Write>(rows: &[TimingRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["method", "h", "n_h", "n_tau", "median_seconds", "repeats"])?;
    for r in rows {
        w.write_record([
            r.method.to_string(),
            real(r.h),
            r.n_h.to_string(),
            r.n_tau.to_string(),
            real(r.median_seconds),
            r.repeats.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// One row per `(h, tau, n_h, n_tau, method, phi, seconds)` tuple.
pub fn write_phi_csv<W: Write>(rows: &[(f64, f64, usize, usize, &str, f64, f64)], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["h", "tau", "n_h", "n_tau", "method", "phi", "seconds"])?;
    for (h, tau, n_h, n_tau, method, phi, seconds) in rows {
        w.write_record([
            real(*h),
            real(*tau),
            n_h.to_string(),
            n_tau.to_string(),
            method.to_string(),
            real(*phi),
            real(*seconds),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// One row per `(h, tau, n_h, n_tau, estimate, seconds)`.
pub fn write_mc_csv<W: Write>(rows: &[(f64, f64, usize, usize, McEstimate, f64)], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["h", "tau", "n_h", "n_tau", "method", "phi", "std_error", "samples", "seed", "seconds"])?;
    for (h, tau, n_h, n_tau, est, seconds) in rows {
        w.write_record([
            real(*h),
            real(*tau),
            n_h.to_string(),
            n_tau.to_string(),
            "mc".to_string(),
            real(est.mean),
            real(est.std_error),
            est.n_samples.to_string(),
            est.seed.to_string(),
            real(*seconds),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_bound_csv<W: Write>(reports: &[RationalBoundReport], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["r", "rho", "n", "sup_value"])?;
    for rep in reports {
        for (n, s) in rep.n_values.iter().zip(&rep.sup_values) {
            w.write_record([real(rep.r), real(rep.rho), n.to_string(), real(*s)])?;
        }
    }
    w.flush()?;
    Ok(())
}
