//! Functional autoregression on a truncated Hilbert space: simulation,
//! covariance estimation, and Tikhonov-regularized estimation of the
//! autocorrelation operator of an ARH(1) process, plus a Monte-Carlo
//! harness that measures convergence rates.
//!
//! The state space is the periodic Sobolev space H_r([0, 2π]) truncated to
//! J Fourier coordinates ([`BasisSpec`]), where operators are J×J matrices
//! and Schatten norms are singular-value norms ([`HilbertOperator`]). An
//! [`ArhModel`] pairs an autoregression operator ρ with a Gaussian noise
//! covariance; its exact stationary covariances come from a Stein-equation
//! solve and sample paths from seeded simulation. Covariances are
//! estimated from fully observed paths or from sparse noisy point
//! observations ([`estimate`]), and ρ is recovered by inverting
//! R₋₁ = R₀Φ with a ridge penalty ([`tikhonov`]). The [`experiment`]
//! module sweeps sample sizes, tunes α, and emits CSV/JSON rate reports;
//! the `funcar` binary wraps it all in a small CLI.
//!
//! Each major capability has a runnable example:
//!
//! ```text
//! examples/
//! ├── simulate_path.rs          # build a model, simulate, export CSV
//! ├── stationary_covariance.rs  # exact lag covariances via the Stein solve
//! ├── complete_estimation.rs    # sample covariances + ρ̂ from full paths
//! ├── sparse_estimation.rs      # ridge projection from noisy point data
//! ├── exact_recovery.rs         # pseudo-inverse solution and the α → 0 limit
//! ├── operator_bounds.rs        # the 1/α, 1/√α and √α·M bounds numerically
//! ├── source_condition.rs       # source-condition diagnostics
//! └── rate_experiment.rs        # full Monte-Carlo rate study
//! ```
//!
//! Run one with `cargo run --release --example simulate_path`.

pub mod arh;
pub mod basis;
pub mod error;
pub mod estimate;
pub mod experiment;
pub mod operator;
pub mod tikhonov;

pub use arh::{check_stationarity, random_orthogonal, ArhModel, SamplePath, StationarityCheck};
pub use basis::{BasisKind, BasisSpec};
pub use error::{Error, Result};
pub use estimate::{
    complete_cov_pair, default_ridge, empirical_cov, empirical_lag1, sparse_cov_estimate,
    sparse_observe, CovMeta, CovPair, Regime, SparseDesign, SparseRecord,
};
pub use experiment::{
    fit_loglog_slope, gamma_formula, run_rate_experiment, AlphaRule, ExperimentConfig,
    ObservationRegime, PNorm, RateReport, RateRow,
};
pub use operator::{tensor_product, HilbertOperator, HilbertVector, DEFAULT_PINV_TOL};
pub use tikhonov::{
    choose_alpha, estimate_rho, k_alpha, oracle_rho_star, resolvent, source_condition_check,
    ExactSolution, SourceCheck, TikhonovEstimate,
};
