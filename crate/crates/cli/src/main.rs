use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use lyapfun::experiment::{
    run_complexity, run_convergence, write_bound_csv, write_convergence_csv, write_mc_csv, write_phi_csv,
    write_timing_csv, ExperimentConfig, Method, Problem,
};
use lyapfun::semigroup::{verify_bound, LambdaGrid};

#[derive(Parser)]
#[command(name = "lyapfun", version, about = "Quadratic functionals of a stochastic heat equation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Error of each method against a fine reference over the mesh ladder
    Convergence(Common),
    /// Median run time per mesh width and fitted cost exponents
    Complexity {
        #[command(flatten)]
        common: Common,
        /// Comma-separated methods to time
        #[arg(long, default_value = "lyap,cov")]
        methods: String,
        #[arg(long, default_value_t = 3)]
        repeat: usize,
    },
    /// Functional from the Lyapunov recursion for every ladder width
    Lyap(Common),
    /// Functional from second-moment propagation for every ladder width
    Cov(Common),
    /// Monte Carlo estimate for every ladder width
    Mc(Common),
    /// Normalized sup of the backward Euler error (1+λ)^-n - e^-nλ
    AppendixCheck {
        #[arg(long)]
        r: Option<f64>,
        #[arg(long)]
        rho: Option<f64>,
        #[arg(long, default_value_t = 10_000)]
        n_max: u32,
        /// λ grid points per decade over [1e-6, 1e6]
        #[arg(long, default_value_t = 400)]
        per_decade: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Common {
    /// `key = value` config file; flags below override it
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Monte Carlo sample count
    #[arg(long)]
    samples: Option<usize>,
    /// Comma-separated mesh widths, e.g. 2^-2,2^-3
    #[arg(long)]
    ladder: Option<String>,
    #[arg(long)]
    reference_h: Option<String>,
    #[arg(long)]
    a_scale: Option<f64>,
    #[arg(long)]
    b_scale: Option<f64>,
    #[arg(long)]
    final_time: Option<f64>,
    #[arg(long)]
    tau_factor: Option<f64>,
    /// white or gaussian:<length>
    #[arg(long)]
    noise: Option<String>,
    /// zero or identity
    #[arg(long)]
    r_kind: Option<String>,
    /// zero or identity
    #[arg(long)]
    g_kind: Option<String>,
}

type AnyResult<T> = Result<T, Box<dyn std::error::Error>>;

/// `(h, tau, n_h, n_tau, phi, seconds)`
type PhiRow = (f64, f64, usize, usize, f64, f64);

impl Common {
    /// File, then `LYAPFUN_SEED`, then explicit flags.
    fn load(&self) -> AnyResult<ExperimentConfig> {
        let mut config = match &self.config {
            Some(path) => ExperimentConfig::from_file(path).map_err(|e| format!("{}: {e}", path.display()))?,
            None => ExperimentConfig::default(),
        };
        config.apply_env()?;
        let text = |v: &Option<f64>| v.map(|x| format!("{x:?}"));
        let overrides = [
            ("h_ladder", self.ladder.clone()),
            ("reference_h", self.reference_h.clone()),
            ("a_scale", text(&self.a_scale)),
            ("b_scale", text(&self.b_scale)),
            ("final_time", text(&self.final_time)),
            ("tau_factor", text(&self.tau_factor)),
            ("noise", self.noise.clone()),
            ("r_kind", self.r_kind.clone()),
            ("g_kind", self.g_kind.clone()),
            ("seed", self.seed.map(|s| s.to_string())),
            ("mc_samples", self.samples.map(|s| s.to_string())),
        ];
        for (key, value) in overrides {
            if let Some(value) = value {
                config.set(key, &value)?;
            }
        }
        if let Some(out) = &self.out {
            config.output = Some(out.clone());
        }
        config.validate()?;
        Ok(config)
    }
}

fn sink(path: Option<&PathBuf>) -> AnyResult<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| format!("{}: {e}", p.display()))?)),
        None => Box::new(io::stdout().lock()),
    })
}

/// The summary goes to stdout unless stdout already carries the CSV.
fn summary(to_file: bool, line: String) {
    if to_file {
        println!("{line}");
    } else {
        eprintln!("{line}");
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".to_string(), |s| format!("{s:.3}"))
}

fn ladder_values(config: &ExperimentConfig, method: Method) -> AnyResult<(Vec<PhiRow>, f64)> {
    let mut rows = Vec::new();
    let mut last = f64::NAN;
    for &h in &config.h_ladder {
        let problem = Problem::build(config, h)?;
        let start = Instant::now();
        let phi = match method {
            Method::Lyap => problem.phi_lyap()?,
            _ => problem.phi_cov()?,
        };
        let seconds = start.elapsed().as_secs_f64();
        rows.push((h, problem.run.tau(), problem.n_h(), problem.n_tau(), phi, seconds));
        last = phi;
    }
    Ok((rows, last))
}

fn run(cli: Cli) -> AnyResult<()> {
    match cli.command {
        Command::Convergence(common) => {
            let config = common.load()?;
            let report = run_convergence(&config)?;
            write_convergence_csv(&report.rows, sink(config.output.as_ref())?)?;
            summary(
                config.output.is_some(),
                format!(
                    "convergence: {} rows, reference phi {:.10e} at h = {}, slope lyap {}, cov {}, mc {}",
                    report.rows.len(),
                    report.reference_phi,
                    config.reference_h,
                    fmt_opt(report.slope(Method::Lyap)),
                    fmt_opt(report.slope(Method::Cov)),
                    fmt_opt(report.slope(Method::Mc)),
                ),
            );
        }
        Command::Complexity { common, methods, repeat } => {
            let config = common.load()?;
            let methods: Vec<Method> = methods.split(',').map(|m| m.trim().parse()).collect::<Result<_, _>>()?;
            let report = run_complexity(&config, &methods, repeat)?;
            write_timing_csv(&report.rows, sink(config.output.as_ref())?)?;
            let parts: Vec<String> = methods
                .iter()
                .map(|&m| format!("{m} {}", fmt_opt(report.exponent(m))))
                .collect();
            summary(
                config.output.is_some(),
                format!("complexity: {} timings, exponents {}", report.rows.len(), parts.join(", ")),
            );
        }
        Command::Lyap(common) => single(common, Method::Lyap)?,
        Command::Cov(common) => single(common, Method::Cov)?,
        Command::Mc(common) => {
            let config = common.load()?;
            if config.mc_samples < 2 {
                return Err(format!("mc needs --samples >= 2, got {}", config.mc_samples).into());
            }
            let mut rows = Vec::new();
            for &h in &config.h_ladder {
                let problem = Problem::build(&config, h)?;
                let start = Instant::now();
                let est = problem.phi_mc(config.mc_samples, config.seed)?;
                rows.push((h, problem.run.tau(), problem.n_h(), problem.n_tau(), est, start.elapsed().as_secs_f64()));
            }
            write_mc_csv(&rows, sink(config.output.as_ref())?)?;
            let last = &rows.last().expect("ladder is nonempty").4;
            summary(
                config.output.is_some(),
                format!(
                    "mc: {} widths, {} samples, seed {}, finest phi {:.10e} +- {:.3e}",
                    rows.len(),
                    config.mc_samples,
                    config.seed,
                    last.mean,
                    last.std_error
                ),
            );
        }
        Command::AppendixCheck {
            r,
            rho,
            n_max,
            per_decade,
            out,
        } => {
            let pairs = match (r, rho) {
                (Some(r), Some(rho)) => vec![(r, rho)],
                (None, None) => vec![(0.0, 0.0), (0.5, 1.0), (1.0, 2.0)],
                _ => return Err("give both --r and --rho, or neither".into()),
            };
            if n_max == 0 {
                return Err("--n-max must be positive".into());
            }
            let grid = LambdaGrid {
                per_decade,
                ..LambdaGrid::default()
            };
            let steps: Vec<u32> = (1..=n_max).collect();
            let reports = pairs
                .iter()
                .map(|&(r, rho)| verify_bound(r, rho, &steps, &grid))
                .collect::<Result<Vec<_>, _>>()?;
            write_bound_csv(&reports, sink(out.as_ref())?)?;
            let parts: Vec<String> = reports
                .iter()
                .map(|rep| {
                    format!(
                        "(r={}, rho={}) constant {:.4} slope {}",
                        rep.r,
                        rep.rho,
                        rep.observed_constant,
                        fmt_opt(rep.trend_slope())
                    )
                })
                .collect();
            summary(out.is_some(), format!("appendix-check: n <= {n_max}: {}", parts.join("; ")));
        }
    }
    Ok(())
}

fn single(common: Common, method: Method) -> AnyResult<()> {
    let config = common.load()?;
    let (rows, last) = ladder_values(&config, method)?;
    let tag = method.to_string();
    let csv_rows: Vec<_> = rows
        .iter()
        .map(|&(h, tau, n_h, n_tau, phi, s)| (h, tau, n_h, n_tau, tag.as_str(), phi, s))
        .collect();
    write_phi_csv(&csv_rows, sink(config.output.as_ref())?)?;
    summary(
        config.output.is_some(),
        format!("{tag}: {} widths, finest h = {} phi {last:.10e}", rows.len(), rows.last().map_or(f64::NAN, |r| r.0)),
    );
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn ladder_flag_accepts_powers() {
        assert_eq!(lyapfun::experiment::parse_real("2^-3").unwrap(), 0.125);
    }
}
