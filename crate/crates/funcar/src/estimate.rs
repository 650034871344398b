//! Covariance estimators for the two observation regimes.
//!
//! Complete observation uses the plain sample covariances
//!
//! ```text
//! R̂₀ = (1/n) Σ_t  X_t ⊗ X_t,      R̂₁ = 1/(n−1) Σ_t  X_{t+1} ⊗ X_t,
//! ```
//!
//! while the sparse/noisy regime observes each curve at m random locations
//! with additive measurement error and goes through a two-stage
//! ridge-projection estimator: per-curve ridge regression onto the basis,
//! then sample covariances of the reconstructed coefficients with a
//! noise-bias correction on the diagonal term.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arh::SamplePath;
use crate::basis::BasisSpec;
use crate::error::{Error, Result};
use crate::operator::{ensure_same_basis, HilbertOperator};

/// Ridge weight used for noiseless designs by [`default_ridge`].
pub const NOISELESS_RIDGE: f64 = 1e-8;

/// Observation regime tag carried in estimator metadata.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Complete,
    Sparse,
}

/// Provenance attached to a covariance estimate.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CovMeta {
    pub regime: Regime,
    /// Number of curves entering the estimate.
    pub n: usize,
    /// Measurements per curve (sparse regime only).
    pub m: Option<usize>,
    /// Ridge weight of the stage-1 regressions (sparse regime only).
    pub ridge: Option<f64>,
    /// Estimated measurement-noise variance (sparse regime only).
    pub noise_var: Option<f64>,
    pub warnings: Vec<String>,
}

/// The pair (R̂₀, R̂₁). R̂₀ is symmetrized at construction but deliberately
/// not clipped to be nonnegative: the downstream Tikhonov formula
/// (R̂₀R̂₀ + αI)⁻¹ is well defined for any self-adjoint R̂₀.
#[derive(Clone, Debug)]
pub struct CovPair {
    r0_hat: HilbertOperator,
    r1_hat: HilbertOperator,
    meta: CovMeta,
}

impl CovPair {
    pub fn new(r0_hat: HilbertOperator, r1_hat: HilbertOperator, meta: CovMeta) -> Result<Self> {
        ensure_same_basis(r0_hat.basis(), r1_hat.basis())?;
        let sym = (r0_hat.matrix() + r0_hat.matrix().transpose()) * 0.5;
        let r0_hat = HilbertOperator::self_adjoint_from_matrix(r0_hat.basis().clone(), sym)?;
        Ok(CovPair {
            r0_hat,
            r1_hat,
            meta,
        })
    }

    pub fn r0_hat(&self) -> &HilbertOperator {
        &self.r0_hat
    }

    pub fn r1_hat(&self) -> &HilbertOperator {
        &self.r1_hat
    }

    /// R̂₋₁ = R̂₁*.
    pub fn r_minus1_hat(&self) -> HilbertOperator {
        self.r1_hat.adjoint()
    }

    pub fn meta(&self) -> &CovMeta {
        &self.meta
    }
}

/// Sample covariance (1/n) Σ X_t ⊗ X_t; self-adjoint PSD by construction.
pub fn empirical_cov(path: &SamplePath) -> Result<HilbertOperator> {
    let n = path.len();
    if n == 0 {
        return Err(Error::InvalidInput("empty sample path".into()));
    }
    let x = path.coords();
    let gram = x.transpose() * x / n as f64;
    HilbertOperator::self_adjoint_from_matrix(path.basis().clone(), gram)
}

/// Sample lag-1 cross-covariance 1/(n−1) Σ_{t=1}^{n−1} X_{t+1} ⊗ X_t.
pub fn empirical_lag1(path: &SamplePath) -> Result<HilbertOperator> {
    let n = path.len();
    if n < 2 {
        return Err(Error::InvalidInput(
            "lag-1 covariance needs at least 2 states".into(),
        ));
    }
    let x = path.coords();
    let lead = x.rows(1, n - 1);
    let lag = x.rows(0, n - 1);
    let m = lead.transpose() * lag / (n - 1) as f64;
    HilbertOperator::from_matrix(path.basis().clone(), m)
}

/// Bundle the complete-observation estimators into a [`CovPair`].
pub fn complete_cov_pair(path: &SamplePath) -> Result<CovPair> {
    CovPair::new(
        empirical_cov(path)?,
        empirical_lag1(path)?,
        CovMeta {
            regime: Regime::Complete,
            n: path.len(),
            m: None,
            ridge: None,
            noise_var: None,
            warnings: Vec::new(),
        },
    )
}

/// One pointwise observation: curve index (1-based), location, measured value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SparseRecord {
    pub curve: usize,
    pub location: f64,
    pub value: f64,
}

/// Sparse/noisy observations Y_{t,j} = X_t(U_{t,j}) + ε_{t,j} of n curves
/// at m locations each.
#[derive(Clone, Debug)]
pub struct SparseDesign {
    records: Vec<SparseRecord>,
    n: usize,
    m: usize,
    noise_sd: f64,
}

impl SparseDesign {
    pub fn new(records: Vec<SparseRecord>, n: usize, m: usize, noise_sd: f64) -> Result<Self> {
        if n == 0 || m == 0 {
            return Err(Error::InvalidInput(
                "sparse design needs n >= 1 curves and m >= 1 measurements".into(),
            ));
        }
        if noise_sd.is_nan() || noise_sd < 0.0 {
            return Err(Error::InvalidInput(format!(
                "noise standard deviation must be nonnegative, got {noise_sd}"
            )));
        }
        let mut counts = vec![0usize; n];
        for r in &records {
            if r.curve == 0 || r.curve > n {
                return Err(Error::InvalidInput(format!(
                    "curve index {} out of range 1..={n}",
                    r.curve
                )));
            }
            if !(0.0..=2.0 * std::f64::consts::PI).contains(&r.location) {
                return Err(Error::InvalidInput(format!(
                    "location {} outside [0, 2π]",
                    r.location
                )));
            }
            if !r.value.is_finite() {
                return Err(Error::InvalidInput("non-finite measurement".into()));
            }
            counts[r.curve - 1] += 1;
        }
        if let Some(t) = counts.iter().position(|&c| c != m) {
            return Err(Error::InvalidInput(format!(
                "curve {} has {} measurements, expected {m}",
                t + 1,
                counts[t]
            )));
        }
        Ok(SparseDesign {
            records,
            n,
            m,
            noise_sd,
        })
    }

    pub fn records(&self) -> &[SparseRecord] {
        &self.records
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn noise_sd(&self) -> f64 {
        self.noise_sd
    }

    /// CSV with header `t,u,y`, one record per line.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("t,u,y\n");
        for r in &self.records {
            let _ = writeln!(out, "{},{},{}", r.curve, r.location, r.value);
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv_string()).map_err(|e| Error::io(path, e))
    }

    /// Read the `t,u,y` interchange format. The per-curve count m is
    /// inferred and must be the same for every curve; `noise_sd` is the
    /// caller's knowledge of the measurement-error level (0 if unknown).
    pub fn read_csv(path: &Path, noise_sd: f64) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_csv_str(&text, noise_sd)
    }

    pub fn from_csv_str(text: &str, noise_sd: f64) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::InvalidInput("empty sparse design CSV".into()))?;
        if header.trim() != "t,u,y" {
            return Err(Error::InvalidInput(format!(
                "sparse design CSV must start with header t,u,y, got {header:?}"
            )));
        }
        let mut records = Vec::new();
        let mut max_curve = 0usize;
        for (lineno, line) in lines.enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 3 {
                return Err(Error::InvalidInput(format!(
                    "line {}: expected 3 fields, got {}",
                    lineno + 2,
                    fields.len()
                )));
            }
            let parse = |s: &str| -> Result<f64> {
                s.trim()
                    .parse()
                    .map_err(|_| Error::InvalidInput(format!("line {}: bad number {s:?}", lineno + 2)))
            };
            let curve: usize = fields[0].trim().parse().map_err(|_| {
                Error::InvalidInput(format!("line {}: bad curve index {:?}", lineno + 2, fields[0]))
            })?;
            max_curve = max_curve.max(curve);
            records.push(SparseRecord {
                curve,
                location: parse(fields[1])?,
                value: parse(fields[2])?,
            });
        }
        if records.is_empty() {
            return Err(Error::InvalidInput("sparse design CSV has no records".into()));
        }
        let m = records.len() / max_curve;
        SparseDesign::new(records, max_curve, m, noise_sd)
    }
}

/// Observe a simulated path at m i.i.d. uniform locations per curve with
/// additive N(0, noise_sd²) measurement error. Deterministic in the seed;
/// draws are ordered curve by curve as (location, noise) pairs.
pub fn sparse_observe(
    path: &SamplePath,
    m: usize,
    noise_sd: f64,
    seed: u64,
) -> Result<SparseDesign> {
    if m == 0 {
        return Err(Error::InvalidInput("need m >= 1 measurements per curve".into()));
    }
    if noise_sd.is_nan() || noise_sd < 0.0 {
        return Err(Error::InvalidInput(format!(
            "noise standard deviation must be nonnegative, got {noise_sd}"
        )));
    }
    let n = path.len();
    let basis = path.basis();
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut records = Vec::with_capacity(n * m);
    for t in 0..n {
        for _ in 0..m {
            let u = rng.random::<f64>() * 2.0 * std::f64::consts::PI;
            let psi = basis.eval_all(u);
            let mut y = 0.0;
            for (k, p) in psi.iter().enumerate() {
                y += path.coords()[(t, k)] * p;
            }
            if noise_sd > 0.0 {
                y += noise_sd * rng.sample::<f64, _>(StandardNormal);
            }
            records.push(SparseRecord {
                curve: t + 1,
                location: u,
                value: y,
            });
        }
    }
    SparseDesign::new(records, n, m, noise_sd)
}

/// Default stage-1 ridge weight: σ²·J/m when the design carries noise,
/// [`NOISELESS_RIDGE`] otherwise.
pub fn default_ridge(design: &SparseDesign, basis: &BasisSpec) -> f64 {
    if design.noise_sd() > 0.0 {
        design.noise_sd().powi(2) * basis.dimension() as f64 / design.m() as f64
    } else {
        NOISELESS_RIDGE
    }
}

struct CurveFit {
    coef: DVector<f64>,
    /// T Tᵀ with T = (BᵀB + ridge·I)⁻¹Bᵀ, the smoother's noise gram.
    smoother_gram: DMatrix<f64>,
    residual_sq: f64,
    hat_trace: f64,
}

/// Two-stage ridge-projection covariance estimator for sparse designs.
///
/// Stage 1 fits each curve by ridge regression of its m measurements on
/// the J basis evaluations. Stage 2 forms the sample covariances of the
/// fitted coefficients; the lag-0 term is corrected for measurement noise
/// by subtracting σ̂² times the average smoother gram, with σ̂² estimated
/// from the per-curve residual mean squares (approximate: smoothing bias
/// leaks into the residuals).
pub fn sparse_cov_estimate(
    design: &SparseDesign,
    basis: &Arc<BasisSpec>,
    ridge: f64,
) -> Result<CovPair> {
    if ridge.is_nan() || ridge <= 0.0 {
        return Err(Error::InvalidInput(format!(
            "ridge weight must be positive, got {ridge}"
        )));
    }
    let n = design.n();
    let m = design.m();
    let j = basis.dimension();

    // Group measurements by curve, preserving record order within a curve.
    let mut grouped: BTreeMap<usize, Vec<(f64, f64)>> = BTreeMap::new();
    for r in design.records() {
        grouped
            .entry(r.curve)
            .or_default()
            .push((r.location, r.value));
    }

    let fits: Vec<Result<CurveFit>> = (1..=n)
        .into_par_iter()
        .map(|t| {
            let obs = &grouped[&t];
            let b = DMatrix::from_fn(m, j, |row, col| {
                basis.eval(col + 1, obs[row].0).expect("index in range")
            });
            let y = DVector::from_iterator(m, obs.iter().map(|&(_, v)| v));
            let gram = b.transpose() * &b + DMatrix::identity(j, j) * ridge;
            let chol = gram.clone().cholesky().ok_or_else(|| {
                Error::Numerical(format!("ridge system not positive definite for curve {t}"))
            })?;
            let bty = b.transpose() * &y;
            let coef = chol.solve(&bty);
            // T = G⁻¹Bᵀ, so T Tᵀ = G⁻¹ BᵀB G⁻¹ and tr(H) = tr(G⁻¹BᵀB).
            let smoother = chol.solve(&b.transpose());
            let smoother_gram = &smoother * smoother.transpose();
            let hat_trace = (&b * &smoother).trace();
            let residual_sq = (&y - &b * &coef).norm_squared();
            Ok(CurveFit {
                coef,
                smoother_gram,
                residual_sq,
                hat_trace,
            })
        })
        .collect();
    let fits: Vec<CurveFit> = fits.into_iter().collect::<Result<_>>()?;

    let noise_var = fits
        .iter()
        .map(|f| f.residual_sq / (m as f64 - f.hat_trace).max(1.0))
        .sum::<f64>()
        / n as f64;

    let mut r0 = DMatrix::zeros(j, j);
    let mut smoother_mean = DMatrix::zeros(j, j);
    for f in &fits {
        r0 += &f.coef * f.coef.transpose();
        smoother_mean += &f.smoother_gram;
    }
    r0 /= n as f64;
    smoother_mean /= n as f64;
    r0 -= smoother_mean * noise_var;

    let mut warnings = Vec::new();
    if m < 2 && design.noise_sd() > 0.0 {
        warnings.push(format!(
            "m = {m} measurement(s) per curve cannot separate noise from signal; \
             estimates returned but the bias correction is unreliable"
        ));
    }

    let r1 = if n >= 2 {
        let mut acc = DMatrix::zeros(j, j);
        for t in 0..n - 1 {
            acc += &fits[t + 1].coef * fits[t].coef.transpose();
        }
        acc / (n - 1) as f64
    } else {
        warnings.push("single curve: lag-1 estimate set to zero".into());
        DMatrix::zeros(j, j)
    };

    CovPair::new(
        HilbertOperator::self_adjoint_from_matrix(basis.clone(), (&r0 + r0.transpose()) * 0.5)?,
        HilbertOperator::from_matrix(basis.clone(), r1)?,
        CovMeta {
            regime: Regime::Sparse,
            n,
            m: Some(m),
            ridge: Some(ridge),
            noise_var: Some(noise_var),
            warnings,
        },
    )
}
