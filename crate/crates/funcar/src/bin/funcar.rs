//! Command-line front end: simulate paths, estimate covariances and the
//! autocorrelation operator, run rate experiments, check source conditions.
//!
//! Exit codes: 0 success, 1 invalid config or input, 2 numerical failure.
//! The environment variable `FUNCAR_SEED` overrides the config's
//! `experiment.base_seed` (an explicit `--seed` flag wins over both).

use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use funcar::{
    complete_cov_pair, default_ridge, estimate_rho, run_rate_experiment, source_condition_check,
    sparse_cov_estimate, CovPair, Error, ExperimentConfig, HilbertOperator, PNorm, Result,
    SamplePath, SparseDesign, TikhonovEstimate,
};

#[derive(Parser)]
#[command(name = "funcar", version, about = "Functional autoregression toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArg {
    /// Experiment config file (flat `key = value` format); defaults apply
    /// when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a sample path and emit it as CSV (columns t,coord_1,…).
    Simulate {
        #[command(flatten)]
        config: ConfigArg,
        /// Number of states to simulate.
        #[arg(short, long)]
        n: usize,
        /// Simulation seed; overrides FUNCAR_SEED and the config seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Extra steps to advance and discard before recording.
        #[arg(long)]
        burn_in: Option<usize>,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Estimate (R̂₀, R̂₁) and ρ̂ from a path CSV or a sparse t,u,y CSV.
    Estimate {
        #[command(flatten)]
        config: ConfigArg,
        /// Fully observed sample path CSV.
        #[arg(long, conflicts_with = "sparse")]
        path: Option<PathBuf>,
        /// Sparse design CSV with header t,u,y.
        #[arg(long)]
        sparse: Option<PathBuf>,
        /// Regularization weight α.
        #[arg(long)]
        alpha: f64,
        /// Schatten norms to report (1, 2, inf); repeatable.
        #[arg(long = "p", default_values = ["2"])]
        p_norms: Vec<PNorm>,
        /// Measurement-error standard deviation of the sparse data.
        #[arg(long, default_value_t = 0.0)]
        noise_sd: f64,
        /// Stage-1 ridge weight override for sparse estimation.
        #[arg(long)]
        ridge: Option<f64>,
        /// Output file for the JSON result; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the configured Monte-Carlo rate experiment and write reports.
    Rates {
        #[command(flatten)]
        config: ConfigArg,
        /// Report stem; `.csv` and `.json` are appended. Overrides
        /// output.path from the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check the source condition for the configured model.
    CheckSource {
        #[command(flatten)]
        config: ConfigArg,
        /// Schatten index of the source norm (1, 2, inf).
        #[arg(long = "p", default_value = "2")]
        p: PNorm,
        /// Residual tolerance; defaults to 1e-8·‖ρ*‖₂.
        #[arg(long)]
        tol: Option<f64>,
    },
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    if let Err(e) = run(cli.command) {
        eprintln!("error: {e}");
        let mut source = std::error::Error::source(&e);
        while let Some(s) = source {
            eprintln!("  caused by: {s}");
            source = s.source();
        }
        std::process::exit(e.exit_code());
    }
}

fn load_config(arg: &ConfigArg) -> Result<ExperimentConfig> {
    let mut cfg = match &arg.config {
        Some(path) => ExperimentConfig::from_file(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = env_seed()? {
        cfg.base_seed = seed;
    }
    Ok(cfg)
}

fn env_seed() -> Result<Option<u64>> {
    match std::env::var("FUNCAR_SEED") {
        Ok(raw) => raw
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| Error::Config(format!("FUNCAR_SEED must be an unsigned integer, got {raw:?}"))),
        Err(_) => Ok(None),
    }
}

fn write_or_print(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => {
            if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
            }
            std::fs::write(path, text).map_err(|e| Error::io(path, e))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Simulate {
            config,
            n,
            seed,
            burn_in,
            out,
        } => {
            let cfg = load_config(&config)?;
            let model = cfg.build_model()?;
            let seed = seed.unwrap_or(cfg.base_seed);
            let path = model.simulate(n, burn_in.unwrap_or(cfg.burn_in), seed)?;
            write_or_print(out.as_deref(), &path.to_csv_string())
        }
        Command::Estimate {
            config,
            path,
            sparse,
            alpha,
            p_norms,
            noise_sd,
            ridge,
            out,
        } => {
            let cfg = load_config(&config)?;
            let (pair, n) = match (&path, &sparse) {
                (Some(file), None) => {
                    let sample = SamplePath::read_csv(file, cfg.sobolev_order)?;
                    (complete_cov_pair(&sample)?, sample.len())
                }
                (None, Some(file)) => {
                    let design = SparseDesign::read_csv(file, noise_sd)?;
                    let basis = cfg.basis()?;
                    let ridge = ridge.unwrap_or_else(|| default_ridge(&design, &basis));
                    (sparse_cov_estimate(&design, &basis, ridge)?, design.n())
                }
                _ => {
                    return Err(Error::InvalidInput(
                        "estimate needs exactly one of --path or --sparse".into(),
                    ))
                }
            };
            let est = estimate_rho(&pair, alpha)?;
            let text = estimate_json(&pair, &est, n, &p_norms)?;
            write_or_print(out.as_deref(), &text)
        }
        Command::Rates { config, out } => {
            let cfg = load_config(&config)?;
            let stem = out
                .or_else(|| cfg.output_path.clone())
                .ok_or_else(|| Error::Config("no output path: set output.path or pass --out".into()))?;
            let report = run_rate_experiment(&cfg)?;
            if let Some(parent) = stem.parent().filter(|p| !p.as_os_str().is_empty()) {
                std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
            }
            let csv_path = stem.with_extension("csv");
            let json_path = stem.with_extension("json");
            report.write_csv(&csv_path)?;
            report.write_json(&json_path)?;
            println!("wrote {} and {}", csv_path.display(), json_path.display());
            for fit in &report.slopes {
                println!(
                    "slope p={} {} {}: {:.4} (stderr {:.4})",
                    fit.p, fit.statistic, fit.quantity, fit.slope, fit.stderr
                );
            }
            Ok(())
        }
        Command::CheckSource { config, p, tol } => {
            let cfg = load_config(&config)?;
            let model = cfg.build_model()?;
            let check = source_condition_check(model.stationary_cov(), model.rho(), p.value(), tol)?;
            let value = serde_json::json!({
                "p": p.label(),
                "source_norm": check.source_norm,
                "residual": check.residual,
                "tolerance": check.tolerance,
                "satisfied": check.satisfied,
            });
            println!("{}", serde_json::to_string_pretty(&value).expect("serializable"));
            Ok(())
        }
    }
}

fn matrix_json(op: &HilbertOperator) -> serde_json::Value {
    let m = op.matrix();
    let rows: Vec<Vec<f64>> = (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect();
    serde_json::json!(rows)
}

fn estimate_json(
    pair: &CovPair,
    est: &TikhonovEstimate,
    n: usize,
    p_norms: &[PNorm],
) -> Result<String> {
    let mut norms = serde_json::Map::new();
    for &p in p_norms {
        norms.insert(
            p.label().to_string(),
            serde_json::json!({
                "r0_hat": pair.r0_hat().schatten_norm(p.value())?,
                "r1_hat": pair.r1_hat().schatten_norm(p.value())?,
                "rho_hat": est.rho_hat().schatten_norm(p.value())?,
            }),
        );
    }
    let value = serde_json::json!({
        "regime": pair.meta().regime,
        "n": n,
        "alpha": est.alpha(),
        "warnings": pair.meta().warnings,
        "norms": norms,
        "r0_hat": matrix_json(pair.r0_hat()),
        "r1_hat": matrix_json(pair.r1_hat()),
        "rho_hat": matrix_json(est.rho_hat()),
    });
    let mut text = serde_json::to_string_pretty(&value)
        .map_err(|e| Error::Numerical(format!("result serialization failed: {e}")))?;
    text.push('\n');
    Ok(text)
}
