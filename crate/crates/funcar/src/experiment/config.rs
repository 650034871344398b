//! Flat dotted-key experiment configuration.
//!
//! The file format is line-oriented `key = value` text. Blank lines and
//! lines starting with `#` are ignored. Values are numbers, single words,
//! or comma-separated lists. Unknown and duplicate keys are hard errors.
//!
//! ```text
//! basis.dimension       = 30      # truncation level J
//! basis.sobolev_order   = 0       # order r of H_r
//! model.lambda_scale    = 1.0     # λ_j = scale · j^(−decay)
//! model.lambda_decay    = 2.0
//! model.lambda          = …       # explicit λ list, overrides the law
//! model.rho_scale       = 0.8     # μ_j = scale · j^(−decay) · λ_j
//! model.rho_decay       = 1.0
//! model.mu              = …       # explicit μ list, overrides the law
//! observation.regime    = complete | sparse
//! observation.m         = 20      # measurements per curve (sparse)
//! observation.noise_sd  = 0.1     # measurement error sd (sparse)
//! observation.ridge     = …       # stage-1 ridge override (sparse)
//! experiment.n_grid     = 128,256,512,1024,2048,4096
//! experiment.replications = 50
//! experiment.p_norms    = 2       # subset of 1,2,inf
//! experiment.base_seed  = 0
//! experiment.burn_in    = 0
//! alpha.rule            = tuned | fixed
//! alpha.c               = 1.0     # α_n = c·γ_n^(1/4) (tuned)
//! alpha.value           = …       # α (fixed)
//! output.path           = …       # report stem; .csv/.json are appended
//! ```
//!
//! The model keys describe a diagonal law: the stationary covariance has
//! eigenvalues λ_j, the autoregression operator has eigenvalues μ_j, and
//! the noise covariance diag(λ_j(1 − μ_j²)) is derived so those targets
//! hold exactly. Arbitrary (non-diagonal) operators are available through
//! the library API.

use std::collections::HashSet;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{ObservationRegime, PNorm};
use crate::arh::ArhModel;
use crate::basis::BasisSpec;
use crate::error::{Error, Result};

/// Rule for picking the regularization weight per sample size.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "lowercase")]
pub enum AlphaRule {
    /// One α for every n.
    Fixed { value: f64 },
    /// α_n = c·γ_n^{1/4} with γ_n from the regime's plug-in rate.
    Tuned { c: f64 },
}

/// Everything a rate experiment needs; parsed from the flat config format
/// and echoed verbatim into reports.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub dimension: usize,
    pub sobolev_order: f64,
    pub lambda_scale: f64,
    pub lambda_decay: f64,
    /// Explicit stationary spectrum; overrides the power law.
    pub lambda_seq: Option<Vec<f64>>,
    pub rho_scale: f64,
    pub rho_decay: f64,
    /// Explicit autoregression spectrum; overrides the power law.
    pub mu_seq: Option<Vec<f64>>,
    pub regime: ObservationRegime,
    /// Stage-1 ridge override for the sparse regime.
    pub ridge: Option<f64>,
    pub n_grid: Vec<usize>,
    pub replications: usize,
    pub p_norms: Vec<PNorm>,
    pub alpha_rule: AlphaRule,
    pub base_seed: u64,
    pub burn_in: usize,
    pub output_path: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            dimension: 30,
            sobolev_order: 0.0,
            lambda_scale: 1.0,
            lambda_decay: 2.0,
            lambda_seq: None,
            rho_scale: 0.8,
            rho_decay: 1.0,
            mu_seq: None,
            regime: ObservationRegime::Complete,
            ridge: None,
            n_grid: vec![128, 256, 512, 1024, 2048, 4096],
            replications: 50,
            p_norms: vec![PNorm::HilbertSchmidt],
            alpha_rule: AlphaRule::Tuned { c: 1.0 },
            base_seed: 0,
            burn_in: 0,
            output_path: None,
        }
    }
}

fn config_err(lineno: usize, msg: impl std::fmt::Display) -> Error {
    Error::Config(format!("line {lineno}: {msg}"))
}

fn parse_num<T: std::str::FromStr>(lineno: usize, key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| config_err(lineno, format!("{key}: cannot parse {value:?}")))
}

fn parse_list<T: std::str::FromStr>(lineno: usize, key: &str, value: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .map(|tok| parse_num(lineno, key, tok.trim()))
        .collect()
}

impl ExperimentConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_str(&text)
    }

    pub fn parse_str(text: &str) -> Result<Self> {
        let mut cfg = ExperimentConfig::default();
        let mut regime_kind = String::from("complete");
        let mut m = 20usize;
        let mut noise_sd = 0.1f64;
        let mut alpha_kind = String::from("tuned");
        let mut alpha_c = 1.0f64;
        let mut alpha_value: Option<f64> = None;
        let mut seen = HashSet::new();

        for (i, raw) in text.lines().enumerate() {
            let lineno = i + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| config_err(lineno, "expected `key = value`"))?;
            let key = key.trim();
            let value = value.trim();
            if value.is_empty() {
                return Err(config_err(lineno, format!("{key}: empty value")));
            }
            if !seen.insert(key.to_string()) {
                return Err(config_err(lineno, format!("duplicate key {key}")));
            }
            match key {
                "basis.dimension" => cfg.dimension = parse_num(lineno, key, value)?,
                "basis.sobolev_order" => cfg.sobolev_order = parse_num(lineno, key, value)?,
                "model.lambda_scale" => cfg.lambda_scale = parse_num(lineno, key, value)?,
                "model.lambda_decay" => cfg.lambda_decay = parse_num(lineno, key, value)?,
                "model.lambda" => cfg.lambda_seq = Some(parse_list(lineno, key, value)?),
                "model.rho_scale" => cfg.rho_scale = parse_num(lineno, key, value)?,
                "model.rho_decay" => cfg.rho_decay = parse_num(lineno, key, value)?,
                "model.mu" => cfg.mu_seq = Some(parse_list(lineno, key, value)?),
                "observation.regime" => {
                    if value != "complete" && value != "sparse" {
                        return Err(config_err(
                            lineno,
                            format!("observation.regime must be complete or sparse, got {value}"),
                        ));
                    }
                    regime_kind = value.to_string();
                }
                "observation.m" => m = parse_num(lineno, key, value)?,
                "observation.noise_sd" => noise_sd = parse_num(lineno, key, value)?,
                "observation.ridge" => cfg.ridge = Some(parse_num(lineno, key, value)?),
                "experiment.n_grid" => cfg.n_grid = parse_list(lineno, key, value)?,
                "experiment.replications" => cfg.replications = parse_num(lineno, key, value)?,
                "experiment.p_norms" => {
                    cfg.p_norms = value
                        .split(',')
                        .map(|tok| {
                            tok.trim()
                                .parse()
                                .map_err(|e: Error| config_err(lineno, e))
                        })
                        .collect::<Result<_>>()?;
                }
                "experiment.base_seed" => cfg.base_seed = parse_num(lineno, key, value)?,
                "experiment.burn_in" => cfg.burn_in = parse_num(lineno, key, value)?,
                "alpha.rule" => {
                    if value != "tuned" && value != "fixed" {
                        return Err(config_err(
                            lineno,
                            format!("alpha.rule must be tuned or fixed, got {value}"),
                        ));
                    }
                    alpha_kind = value.to_string();
                }
                "alpha.c" => alpha_c = parse_num(lineno, key, value)?,
                "alpha.value" => alpha_value = Some(parse_num(lineno, key, value)?),
                "output.path" => cfg.output_path = Some(PathBuf::from(value)),
                other => {
                    return Err(config_err(lineno, format!("unknown key {other}")));
                }
            }
        }

        cfg.regime = match regime_kind.as_str() {
            "complete" => ObservationRegime::Complete,
            _ => ObservationRegime::Sparse { m, noise_sd },
        };
        cfg.alpha_rule = match alpha_kind.as_str() {
            "fixed" => {
                let value = alpha_value
                    .ok_or_else(|| Error::Config("alpha.rule = fixed requires alpha.value".into()))?;
                AlphaRule::Fixed { value }
            }
            _ => AlphaRule::Tuned { c: alpha_c },
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.dimension == 0 {
            return fail("basis.dimension must be positive".into());
        }
        if self.sobolev_order.is_nan() || self.sobolev_order < 0.0 {
            return fail("basis.sobolev_order must be nonnegative".into());
        }
        if self.n_grid.is_empty() {
            return fail("experiment.n_grid must not be empty".into());
        }
        for w in self.n_grid.windows(2) {
            if w[1] <= w[0] {
                return fail(format!(
                    "experiment.n_grid must be strictly increasing, got {} after {}",
                    w[1], w[0]
                ));
            }
        }
        if let Some(&n) = self.n_grid.first() {
            if n < 4 {
                return fail(format!("experiment.n_grid entries must be >= 4, got {n}"));
            }
        }
        if self.replications == 0 {
            return fail("experiment.replications must be >= 1".into());
        }
        if self.p_norms.is_empty() {
            return fail("experiment.p_norms must not be empty".into());
        }
        if let Some(seq) = &self.lambda_seq {
            if seq.len() != self.dimension {
                return fail(format!(
                    "model.lambda has {} entries, basis.dimension is {}",
                    seq.len(),
                    self.dimension
                ));
            }
        }
        if let Some(seq) = &self.mu_seq {
            if seq.len() != self.dimension {
                return fail(format!(
                    "model.mu has {} entries, basis.dimension is {}",
                    seq.len(),
                    self.dimension
                ));
            }
        }
        match (&self.regime, &self.alpha_rule) {
            (ObservationRegime::Sparse { m, noise_sd }, rule) => {
                if *m == 0 {
                    return fail("observation.m must be >= 1".into());
                }
                if noise_sd.is_nan() || *noise_sd < 0.0 {
                    return fail("observation.noise_sd must be nonnegative".into());
                }
                if matches!(rule, AlphaRule::Tuned { .. }) && self.sobolev_order <= 1.0 {
                    return fail(
                        "tuned α in the sparse regime needs basis.sobolev_order > 1".into(),
                    );
                }
            }
            (ObservationRegime::Complete, _) => {}
        }
        if let AlphaRule::Fixed { value } = self.alpha_rule {
            if value.is_nan() || value <= 0.0 {
                return fail(format!("alpha.value must be positive, got {value}"));
            }
        }
        if let AlphaRule::Tuned { c } = self.alpha_rule {
            if c.is_nan() || c <= 0.0 {
                return fail(format!("alpha.c must be positive, got {c}"));
            }
        }
        if let Some(ridge) = self.ridge {
            if ridge.is_nan() || ridge <= 0.0 {
                return fail(format!("observation.ridge must be positive, got {ridge}"));
            }
        }
        Ok(())
    }

    pub fn basis(&self) -> Result<Arc<BasisSpec>> {
        Ok(Arc::new(BasisSpec::fourier_circle(
            self.dimension,
            self.sobolev_order,
        )?))
    }

    /// Stationary spectrum λ_j.
    pub fn lambdas(&self) -> Vec<f64> {
        match &self.lambda_seq {
            Some(seq) => seq.clone(),
            None => (1..=self.dimension)
                .map(|j| self.lambda_scale * (j as f64).powf(-self.lambda_decay))
                .collect(),
        }
    }

    /// Autoregression spectrum μ_j.
    pub fn mus(&self) -> Vec<f64> {
        match &self.mu_seq {
            Some(seq) => seq.clone(),
            None => {
                let lambdas = self.lambdas();
                (1..=self.dimension)
                    .zip(lambdas)
                    .map(|(j, l)| self.rho_scale * (j as f64).powf(-self.rho_decay) * l)
                    .collect()
            }
        }
    }

    pub fn build_model(&self) -> Result<ArhModel> {
        ArhModel::from_spectra(self.basis()?, &self.lambdas(), &self.mus())
    }
}
