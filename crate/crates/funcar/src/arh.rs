//! ARH(1) model definition, exact stationary covariances, and simulation.
//!
//! A model is the pair (ρ, Σ_ε) of an autoregression operator and a noise
//! covariance; the state equation is X_t = ρ(X_{t−1}) + ε_t with i.i.d.
//! Gaussian ε_t ~ N(0, Σ_ε). Stationarity is checked through the spectral
//! radius of ρ, and the stationary covariance solves the Stein equation
//! R₀ = ρR₀ρ* + Σ_ε, which this module does exactly (up to a verified
//! residual) as a dense linear system in the J² matrix coordinates.

use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

use crate::basis::BasisSpec;
use crate::error::{Error, Result};
use crate::operator::{ensure_same_basis, HilbertOperator};

/// Margin used by [`check_stationarity`]: the spectral radius must stay
/// below 1 − STATIONARITY_MARGIN.
pub const STATIONARITY_MARGIN: f64 = 1e-8;

/// Relative Hilbert-Schmidt residual allowed for the Stein-equation solve.
const STEIN_RESIDUAL_TOL: f64 = 1e-10;

/// Eigenvalues of the noise covariance below zero by at most this amount
/// are clipped to zero; anything lower is rejected.
const PSD_CLIP_TOL: f64 = 1e-12;

/// Outcome of the stationarity test.
#[derive(Clone, Copy, Debug)]
pub struct StationarityCheck {
    pub stationary: bool,
    pub spectral_radius: f64,
}

/// True iff the spectral radius of `rho` is below 1 − margin. In finite
/// dimension this is equivalent to square-summability of ‖ρʲ‖_∞ by
/// Gelfand's formula.
pub fn check_stationarity(rho: &HilbertOperator) -> StationarityCheck {
    let radius = rho.spectral_radius();
    StationarityCheck {
        stationary: radius < 1.0 - STATIONARITY_MARGIN,
        spectral_radius: radius,
    }
}

/// An ARH(1) law: autoregression operator, Gaussian noise covariance, and
/// the derived stationary quantities.
///
/// Construction performs the Stein solve once; models are immutable and
/// cheap to share across simulation workers afterwards.
#[derive(Clone, Debug)]
pub struct ArhModel {
    basis: Arc<BasisSpec>,
    rho: HilbertOperator,
    noise_cov: HilbertOperator,
    stationary_cov: HilbertOperator,
    sqrt_stationary: DMatrix<f64>,
    sqrt_noise: DMatrix<f64>,
    spectral_radius: f64,
}

impl ArhModel {
    pub fn new(rho: HilbertOperator, noise_cov: HilbertOperator) -> Result<Self> {
        ensure_same_basis(rho.basis(), noise_cov.basis())?;
        let check = check_stationarity(&rho);
        if !check.stationary {
            return Err(Error::NonStationary {
                radius: check.spectral_radius,
            });
        }
        if !noise_cov.is_self_adjoint() {
            return Err(Error::InvalidInput(
                "noise covariance must be self-adjoint".into(),
            ));
        }
        let noise_cov = clip_psd(&noise_cov)?;
        let stationary_cov = solve_stein(&rho, &noise_cov)?;
        let sqrt_stationary = symmetric_sqrt(stationary_cov.matrix());
        let sqrt_noise = symmetric_sqrt(noise_cov.matrix());
        Ok(ArhModel {
            basis: rho.basis().clone(),
            rho,
            noise_cov,
            stationary_cov,
            sqrt_stationary,
            sqrt_noise,
            spectral_radius: check.spectral_radius,
        })
    }

    /// Diagonal model with target stationary spectrum `lambdas` and
    /// autoregression spectrum `mus`: ρ = diag(μ) and Σ_ε = diag(λ(1−μ²)),
    /// so that the stationary covariance is exactly diag(λ).
    pub fn from_spectra(basis: Arc<BasisSpec>, lambdas: &[f64], mus: &[f64]) -> Result<Self> {
        Self::from_rotated_spectra(basis, lambdas, mus, None)
    }

    /// Same as [`ArhModel::from_spectra`] but conjugated by an orthogonal
    /// map: ρ = Q diag(μ) Qᵀ, Σ_ε = Q diag(λ(1−μ²)) Qᵀ. The stationary
    /// covariance is Q diag(λ) Qᵀ and ρ, R₀ stay simultaneously
    /// diagonalizable.
    pub fn from_rotated_spectra(
        basis: Arc<BasisSpec>,
        lambdas: &[f64],
        mus: &[f64],
        rotation: Option<&HilbertOperator>,
    ) -> Result<Self> {
        let j = basis.dimension();
        if lambdas.len() != j || mus.len() != j {
            return Err(Error::InvalidInput(format!(
                "spectra must have length {j}, got {} and {}",
                lambdas.len(),
                mus.len()
            )));
        }
        for (i, &l) in lambdas.iter().enumerate() {
            if l.is_nan() || l <= 0.0 {
                return Err(Error::InvalidInput(format!(
                    "stationary eigenvalue {i} must be positive, got {l}"
                )));
            }
        }
        for (i, &m) in mus.iter().enumerate() {
            if m.is_nan() || m.abs() >= 1.0 {
                return Err(Error::InvalidInput(format!(
                    "autoregression eigenvalue {i} must satisfy |μ| < 1, got {m}"
                )));
            }
        }
        let noise: Vec<f64> = lambdas
            .iter()
            .zip(mus.iter())
            .map(|(l, m)| l * (1.0 - m * m))
            .collect();
        let rho = HilbertOperator::diagonal(basis.clone(), mus)?;
        let sigma = HilbertOperator::diagonal(basis.clone(), &noise)?;
        match rotation {
            None => Self::new(rho, sigma),
            Some(q) => {
                ensure_same_basis(&basis, q.basis())?;
                let conjugate = |d: &HilbertOperator| -> Result<HilbertOperator> {
                    let m = q.matrix() * d.matrix() * q.matrix().transpose();
                    HilbertOperator::self_adjoint_from_matrix(
                        basis.clone(),
                        (&m + m.transpose()) * 0.5,
                    )
                };
                Self::new(conjugate(&rho)?, conjugate(&sigma)?)
            }
        }
    }

    pub fn basis(&self) -> &Arc<BasisSpec> {
        &self.basis
    }

    pub fn rho(&self) -> &HilbertOperator {
        &self.rho
    }

    pub fn noise_cov(&self) -> &HilbertOperator {
        &self.noise_cov
    }

    pub fn spectral_radius(&self) -> f64 {
        self.spectral_radius
    }

    /// Stationary covariance R₀, the unique self-adjoint nonnegative
    /// solution of R₀ = ρR₀ρ* + Σ_ε.
    pub fn stationary_cov(&self) -> &HilbertOperator {
        &self.stationary_cov
    }

    /// Lag-h autocovariance ρ^h R₀; h = 1 gives the cross-covariance whose
    /// adjoint is the lag −1 operator.
    pub fn lag_cov(&self, h: usize) -> HilbertOperator {
        let mut out = self.stationary_cov.clone();
        for _ in 0..h {
            out = self.rho.compose(&out).expect("same basis");
        }
        out
    }

    /// Simulate n states of the stationary chain. The initial state is an
    /// exact N(0, R₀) draw (so `burn_in` = 0 already yields a stationary
    /// sample); `burn_in` extra steps are advanced and discarded before
    /// recording. Fixed seeds reproduce bitwise-identical paths; the
    /// generator is ChaCha12 seeded with `seed`.
    pub fn simulate(&self, n: usize, burn_in: usize, seed: u64) -> Result<SamplePath> {
        if n < 2 {
            return Err(Error::InvalidInput(format!(
                "sample path length must be at least 2, got {n}"
            )));
        }
        let j = self.basis.dimension();
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let mut draw = |scale: &DMatrix<f64>| -> DVector<f64> {
            let z = DVector::from_iterator(j, (0..j).map(|_| rng.sample::<f64, _>(StandardNormal)));
            scale * z
        };
        let mut state = draw(&self.sqrt_stationary);
        for _ in 0..burn_in {
            state = self.rho.matrix() * &state + draw(&self.sqrt_noise);
        }
        let mut coords = DMatrix::zeros(n, j);
        coords.row_mut(0).tr_copy_from(&state);
        for t in 1..n {
            state = self.rho.matrix() * &state + draw(&self.sqrt_noise);
            coords.row_mut(t).tr_copy_from(&state);
        }
        SamplePath::new(self.basis.clone(), coords, seed, burn_in)
    }
}

fn clip_psd(op: &HilbertOperator) -> Result<HilbertOperator> {
    let eig = nalgebra::SymmetricEigen::new(op.matrix().clone());
    let min = eig.eigenvalues.min();
    if min < -PSD_CLIP_TOL {
        return Err(Error::InvalidInput(format!(
            "noise covariance has eigenvalue {min:.3e} below -{PSD_CLIP_TOL:.0e}"
        )));
    }
    if min >= 0.0 {
        return Ok(op.clone());
    }
    let clipped = DVector::from_iterator(
        eig.eigenvalues.len(),
        eig.eigenvalues.iter().map(|l| l.max(0.0)),
    );
    let m = &eig.eigenvectors * DMatrix::from_diagonal(&clipped) * eig.eigenvectors.transpose();
    HilbertOperator::self_adjoint_from_matrix(op.basis().clone(), (&m + m.transpose()) * 0.5)
}

/// Solve R₀ = ρ R₀ ρᵀ + Σ by vectorizing: (I − ρ⊗ρ) vec(R₀) = vec(Σ).
fn solve_stein(rho: &HilbertOperator, noise: &HilbertOperator) -> Result<HilbertOperator> {
    let j = rho.basis().dimension();
    let kron = rho.matrix().kronecker(rho.matrix());
    let system = DMatrix::identity(j * j, j * j) - kron;
    let b = DVector::from_column_slice(noise.matrix().as_slice());
    let x = system
        .lu()
        .solve(&b)
        .ok_or_else(|| Error::Numerical("Stein system is singular".into()))?;
    let raw = DMatrix::from_column_slice(j, j, x.as_slice());
    let r0 = (&raw + raw.transpose()) * 0.5;
    let residual = (&r0 - rho.matrix() * &r0 * rho.matrix().transpose() - noise.matrix()).norm();
    if residual > STEIN_RESIDUAL_TOL * r0.norm().max(f64::MIN_POSITIVE) {
        return Err(Error::Numerical(format!(
            "Stein solve residual {residual:.3e} exceeds tolerance"
        )));
    }
    HilbertOperator::self_adjoint_from_matrix(rho.basis().clone(), r0)
}

/// Symmetric PSD square root via eigendecomposition; small negative
/// eigenvalues from roundoff are clipped to zero.
fn symmetric_sqrt(m: &DMatrix<f64>) -> DMatrix<f64> {
    let eig = nalgebra::SymmetricEigen::new(m.clone());
    let sqrt = DVector::from_iterator(
        eig.eigenvalues.len(),
        eig.eigenvalues.iter().map(|l| l.max(0.0).sqrt()),
    );
    &eig.eigenvectors * DMatrix::from_diagonal(&sqrt) * eig.eigenvectors.transpose()
}

/// Random orthogonal operator (QR orientation of a Gaussian matrix),
/// deterministic in the seed. Used to build rotated test models.
pub fn random_orthogonal(basis: Arc<BasisSpec>, seed: u64) -> HilbertOperator {
    let j = basis.dimension();
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let g = DMatrix::from_fn(j, j, |_, _| rng.sample::<f64, _>(StandardNormal));
    let q = g.qr().q();
    HilbertOperator::from_matrix(basis, q).expect("finite orthogonal factor")
}

/// A simulated stretch of the chain: row t holds the coordinates of X_t.
#[derive(Clone, Debug)]
pub struct SamplePath {
    coords: DMatrix<f64>,
    basis: Arc<BasisSpec>,
    model_seed: u64,
    burn_in: usize,
}

impl SamplePath {
    pub fn new(
        basis: Arc<BasisSpec>,
        coords: DMatrix<f64>,
        model_seed: u64,
        burn_in: usize,
    ) -> Result<Self> {
        if coords.nrows() < 2 {
            return Err(Error::InvalidInput(format!(
                "sample path must contain at least 2 states, got {}",
                coords.nrows()
            )));
        }
        if coords.ncols() != basis.dimension() {
            return Err(Error::InvalidInput(format!(
                "path has {} coordinates per state, basis dimension is {}",
                coords.ncols(),
                basis.dimension()
            )));
        }
        if coords.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("path contains non-finite entries".into()));
        }
        Ok(SamplePath {
            coords,
            basis,
            model_seed,
            burn_in,
        })
    }

    pub fn len(&self) -> usize {
        self.coords.nrows()
    }

    pub fn is_empty(&self) -> bool {
        false // construction enforces n >= 2
    }

    pub fn coords(&self) -> &DMatrix<f64> {
        &self.coords
    }

    pub fn basis(&self) -> &Arc<BasisSpec> {
        &self.basis
    }

    pub fn model_seed(&self) -> u64 {
        self.model_seed
    }

    pub fn burn_in(&self) -> usize {
        self.burn_in
    }

    /// State at row `t` (0-based).
    pub fn state(&self, t: usize) -> DVector<f64> {
        self.coords.row(t).transpose()
    }

    /// CSV with header `t,coord_1,…,coord_J`; t runs from 1.
    pub fn to_csv_string(&self) -> String {
        let j = self.basis.dimension();
        let mut out = String::from("t");
        for k in 1..=j {
            let _ = write!(out, ",coord_{k}");
        }
        out.push('\n');
        for t in 0..self.len() {
            let _ = write!(out, "{}", t + 1);
            for k in 0..j {
                let _ = write!(out, ",{}", self.coords[(t, k)]);
            }
            out.push('\n');
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv_string()).map_err(|e| Error::io(path, e))
    }

    /// Read a path written by [`SamplePath::to_csv_string`]. The basis
    /// dimension comes from the header; `sobolev_order` supplies the order
    /// the columns refer to (0 when only coordinates matter).
    pub fn read_csv(path: &Path, sobolev_order: f64) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_csv_str(&text, sobolev_order)
    }

    pub fn from_csv_str(text: &str, sobolev_order: f64) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::InvalidInput("empty sample path CSV".into()))?;
        let cols: Vec<&str> = header.split(',').collect();
        if cols.first() != Some(&"t") || cols.len() < 2 {
            return Err(Error::InvalidInput(
                "sample path CSV must start with header t,coord_1,…".into(),
            ));
        }
        let j = cols.len() - 1;
        let mut rows: Vec<f64> = Vec::new();
        let mut n = 0usize;
        for (lineno, line) in lines.enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != j + 1 {
                return Err(Error::InvalidInput(format!(
                    "line {}: expected {} fields, got {}",
                    lineno + 2,
                    j + 1,
                    fields.len()
                )));
            }
            for f in &fields[1..] {
                let v: f64 = f.trim().parse().map_err(|_| {
                    Error::InvalidInput(format!("line {}: bad number {f:?}", lineno + 2))
                })?;
                rows.push(v);
            }
            n += 1;
        }
        let basis = Arc::new(BasisSpec::fourier_circle(j, sobolev_order)?);
        SamplePath::new(basis, DMatrix::from_row_slice(n.max(1), j, &rows), 0, 0)
    }
}
