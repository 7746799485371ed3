use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::SystemLaplacian;

/// Initial Gram matrix `V₀`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Regularizer {
    /// `β |Λ|` in spectral coordinates.
    Spectral { beta: f64 },
    /// `λ I`.
    L2 { lambda: f64 },
    /// `λ I + |Λ|`.
    Hybrid { lambda: f64 },
}

impl Regularizer {
    /// `V₀` for the given spectral weights `|Λ|`.
    pub fn initial_gram(&self, weights: &DVector<f64>) -> Result<DMatrix<f64>> {
        let n = weights.len();
        let (scale, diag) = match *self {
            Self::Spectral { beta } => (beta, weights.scale(beta)),
            Self::L2 { lambda } => (lambda, DVector::from_element(n, lambda)),
            Self::Hybrid { lambda } => (lambda, weights.add_scalar(lambda)),
        };
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::Domain(format!("regularization strength must be positive, got {scale}")));
        }
        if diag.iter().any(|d| !(*d > 0.0)) {
            return Err(Error::Numeric("initial Gram matrix is not positive definite".into()));
        }
        Ok(DMatrix::from_diagonal(&diag))
    }
}

/// Rank-one updates between two Cholesky refreshes of `V⁻¹`.
const REFRESH_EVERY: u64 = 64;

/// Learner state: `V_t`, `V_t⁻¹`, `Σ w_s y_s` and `ψ̂_t = V_t⁻¹ Σ w_s y_s`.
///
/// `V⁻¹` is kept by Sherman–Morrison and recomputed from `V` every
/// `REFRESH_EVERY` feature updates. The log-determinant and the elliptical
/// potential `Σ min(1, ‖w‖²_{V⁻¹})` are tracked with the matrix determinant
/// lemma.
#[derive(Debug, Clone)]
pub struct SamplerState {
    gram: DMatrix<f64>,
    gram_inv: DMatrix<f64>,
    obs_accum: DVector<f64>,
    psi_hat: DVector<f64>,
    round: u64,
    log_det: f64,
    log_det_initial: f64,
    potential: f64,
    since_refresh: u64,
}

impl SamplerState {
    pub fn new(initial_gram: DMatrix<f64>) -> Result<Self> {
        let n = initial_gram.nrows();
        Error::check_dim(n, initial_gram.ncols())?;
        let chol = initial_gram
            .clone()
            .cholesky()
            .ok_or_else(|| Error::Numeric("initial Gram matrix is not positive definite".into()))?;
        let log_det = 2.0 * chol.l_dirty().diagonal().iter().map(|d| d.ln()).sum::<f64>();
        Ok(Self {
            gram_inv: chol.inverse(),
            gram: initial_gram,
            obs_accum: DVector::zeros(n),
            psi_hat: DVector::zeros(n),
            round: 0,
            log_det,
            log_det_initial: log_det,
            potential: 0.0,
            since_refresh: 0,
        })
    }

    pub fn dim(&self) -> usize {
        self.gram.nrows()
    }

    pub fn gram(&self) -> &DMatrix<f64> {
        &self.gram
    }

    pub fn gram_inv(&self) -> &DMatrix<f64> {
        &self.gram_inv
    }

    pub fn obs_accum(&self) -> &DVector<f64> {
        &self.obs_accum
    }

    pub fn psi_hat(&self) -> &DVector<f64> {
        &self.psi_hat
    }

    /// Completed rounds.
    pub fn round(&self) -> u64 {
        self.round
    }

    /// `log det V_t`.
    pub fn log_det(&self) -> f64 {
        self.log_det
    }

    /// `log det V₀`.
    pub fn log_det_initial(&self) -> f64 {
        self.log_det_initial
    }

    /// `Σ min(1, ‖w‖²_{V⁻¹})` over all features absorbed so far, each taken
    /// against the Gram matrix just before its update.
    pub fn elliptical_potential(&self) -> f64 {
        self.potential
    }

    /// `‖w‖_{V⁻¹} = √(wᵀ V⁻¹ w)`.
    pub fn weighted_norm(&self, w: &DVector<f64>) -> f64 {
        w.dot(&(&self.gram_inv * w)).max(0.0).sqrt()
    }

    /// Absorbs one round: features `w_i` of the observed nodes and their
    /// centered readings `y_i = v_i − v•`.
    pub fn update(&mut self, features: &[DVector<f64>], observations: &[f64]) -> Result<()> {
        Error::check_dim(features.len(), observations.len())?;
        for (w, &y) in features.iter().zip(observations) {
            Error::check_dim(self.dim(), w.len())?;
            if !y.is_finite() {
                return Err(Error::Numeric(format!("observation {y} is not finite")));
            }
            let vw = &self.gram_inv * w;
            let q = w.dot(&vw);
            self.potential += q.min(1.0);
            self.log_det += q.ln_1p();
            self.gram.ger(1.0, w, w, 1.0);
            self.gram_inv.ger(-1.0 / (1.0 + q), &vw, &vw, 1.0);
            self.obs_accum.axpy(y, w, 1.0);
            self.since_refresh += 1;
        }
        if self.since_refresh >= REFRESH_EVERY {
            self.refresh()?;
        }
        self.psi_hat = &self.gram_inv * &self.obs_accum;
        self.round += 1;
        Ok(())
    }

    /// Recomputes `V⁻¹` and `log det V` from `V`.
    pub fn refresh(&mut self) -> Result<()> {
        let sym = (&self.gram + self.gram.transpose()) * 0.5;
        let chol = sym.cholesky().ok_or_else(|| Error::Numeric("Gram matrix lost positive definiteness".into()))?;
        self.log_det = 2.0 * chol.l_dirty().diagonal().iter().map(|d| d.ln()).sum::<f64>();
        self.gram_inv = chol.inverse();
        self.psi_hat = &self.gram_inv * &self.obs_accum;
        self.since_refresh = 0;
        Ok(())
    }
}

/// `argmin_ψ Σ (y_s − ⟨w_s, ψ⟩)² + ψᵀ V₀ ψ` from the normal equations.
pub fn regularized_ls(history: &[(DVector<f64>, f64)], initial_gram: &DMatrix<f64>) -> Result<DVector<f64>> {
    let n = initial_gram.nrows();
    let mut gram = initial_gram.clone();
    let mut rhs = DVector::zeros(n);
    for (w, y) in history {
        Error::check_dim(n, w.len())?;
        gram.ger(1.0, w, w, 1.0);
        rhs.axpy(*y, w, 1.0);
    }
    let chol = gram.cholesky().ok_or_else(|| Error::Numeric("normal equations are not positive definite".into()))?;
    Ok(chol.solve(&rhs))
}

/// Row `i` of the feature matrix as a vector.
pub(crate) fn feature_row(features: &DMatrix<f64>, i: usize) -> DVector<f64> {
    features.row(i).transpose()
}

/// `V₀` for the spectral learner on `basis`.
pub fn spectral_initial_gram(basis: &SystemLaplacian, reg: Regularizer) -> Result<DMatrix<f64>> {
    reg.initial_gram(&basis.regularizer_weights())
}
